//! Measured transfer matrices of a six-mode fused-fiber interferometer,
//! reconstructed from coherent-state probes and rounded to three decimals.
//! The device drifts slightly between runs, so two snapshots are kept: one
//! taken after a two-photon interference run and one after a three-photon
//! run. Both are near-unitary, not exactly unitary.

use ndarray::Array2;
use num_complex::Complex64;

use crate::core::TransferMatrix;

fn from_rows(rows: [[(f64, f64); 6]; 6], label: &str) -> TransferMatrix {
    let entries = Array2::from_shape_fn((6, 6), |(i, j)| {
        let (re, im) = rows[i][j];
        Complex64::new(re, im)
    });
    TransferMatrix::new(entries, label).expect("finite entries")
}

/// Device snapshot taken after the two-photon run.
pub fn six_mode_two_photon() -> TransferMatrix {
    from_rows(
        [
            [(0.297, 0.0), (0.325, 0.0), (0.126, 0.0), (0.500, 0.0), (0.430, 0.0), (0.253, 0.0)],
            [(0.330, 0.0), (-0.302, -0.011), (0.001, 0.503), (0.028, -0.390), (0.221, 0.118), (-0.385, -0.213)],
            [(0.388, 0.0), (0.182, 0.248), (-0.220, 0.133), (-0.212, 0.204), (-0.127, -0.386), (0.108, -0.081)],
            [(0.311, 0.0), (-0.220, -0.315), (-0.169, -0.246), (0.190, 0.157), (-0.073, -0.089), (-0.227, 0.355)],
            [(0.396, 0.0), (-0.222, -0.169), (0.387, -0.130), (-0.265, 0.004), (-0.103, 0.202), (0.353, -0.112)],
            [(0.279, 0.0), (0.322, 0.244), (-0.101, -0.239), (-0.051, -0.400), (-0.184, 0.320), (-0.217, 0.074)],
        ],
        "six-mode-two-photon-run",
    )
}

/// Device snapshot taken after the three-photon run.
pub fn six_mode_three_photon() -> TransferMatrix {
    from_rows(
        [
            [(0.334, 0.0), (0.277, 0.0), (0.125, 0.0), (0.479, 0.0), (0.415, 0.0), (0.237, 0.0)],
            [(0.273, 0.0), (-0.329, -0.051), (0.055, 0.478), (0.021, -0.121), (0.197, 0.128), (-0.345, -0.253)],
            [(0.420, 0.0), (0.140, 0.242), (-0.191, 0.198), (-0.195, 0.204), (-0.139, -0.393), (0.113, -0.085)],
            [(0.284, 0.0), (-0.197, -0.367), (-0.194, -0.224), (0.189, 0.190), (-0.072, -0.106), (-0.278, 0.333)],
            [(0.340, 0.0), (-0.329, -0.049), (0.328, -0.312), (-0.144, 0.042), (-0.131, 0.187), (0.283, -0.216)],
            [(0.324, 0.0), (0.344, 0.036), (-0.114, -0.101), (-0.206, -0.398), (-0.111, 0.351), (-0.098, 0.208)],
        ],
        "six-mode-three-photon-run",
    )
}
