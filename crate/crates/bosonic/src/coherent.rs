//! Classical-light predictions: phase-averaged intensity correlations for
//! equal-amplitude coherent states injected into n distinct modes.
//!
//! With fields E_i = e^{iθ_i} the zero-delay coincidence rate is the phase
//! average of ∏_{j∈T} |E_j|²; each |E_j|² is a trigonometric polynomial in
//! the input phases, so the integral is evaluated exactly by keeping the
//! terms whose phase exponents cancel — pairs of input-index tuples that are
//! permutations of each other. Fully delayed (mutually incoherent) fields
//! keep only the diagonal terms, an incoherent sum of single-input
//! intensities.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::core::{ModeConfiguration, TransferMatrix};
use crate::error::{Error, Result};

/// Cap for the exact n^n tuple expansion.
pub const COHERENT_CAP: usize = 5;

/// Equal-amplitude coherent fields entering a set of distinct modes.
#[derive(Debug, Clone)]
pub struct CoherentInput {
    modes: Vec<usize>,
}

impl CoherentInput {
    pub fn new(modes: Vec<usize>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidParameter("coherent input needs at least one mode".into()));
        }
        let mut sorted = modes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != modes.len() {
            return Err(Error::InvalidParameter("coherent input modes must be distinct".into()));
        }
        Ok(Self { modes })
    }

    pub fn from_configuration(s: &ModeConfiguration) -> Result<Self> {
        if !s.is_collision_free() {
            return Err(Error::InvalidParameter(
                "coherent input configuration must be collision-free".into(),
            ));
        }
        Self::new(s.support())
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn n(&self) -> usize {
        self.modes.len()
    }
}

fn check(u: &TransferMatrix, inputs: &CoherentInput, t: &ModeConfiguration) -> Result<Vec<usize>> {
    let n = inputs.n();
    if t.len() != u.m() {
        return Err(Error::DimensionMismatch { what: "output configuration", expected: u.m(), got: t.len() });
    }
    if let Some(&bad) = inputs.modes().iter().find(|&&i| i >= u.m()) {
        return Err(Error::InvalidParameter(format!("input mode {bad} out of range")));
    }
    if t.total() != n {
        return Err(Error::PhotonNumberMismatch { input: n, output: t.total() });
    }
    if n > COHERENT_CAP {
        return Err(Error::DimensionTooLarge { what: "coherent phase expansion", n, cap: COHERENT_CAP });
    }
    Ok(t.photon_modes())
}

/// Zero-delay coincidence rate P⁽⁰⁾: exact phase average of
/// ∏_{j∈T} |E_j|² divided by ∏_j t_j! for colliding detector multiplicities.
pub fn p_zero_delay(u: &TransferMatrix, inputs: &CoherentInput, t: &ModeConfiguration) -> Result<f64> {
    let slots = check(u, inputs, t)?;
    let n = inputs.n();
    // A tuple assigns one input field to each output slot; only pairs of
    // tuples with equal multiset survive the phase average, so group
    // amplitudes by multiset and sum |·|².
    let mut amplitudes: HashMap<Vec<u8>, Complex64> = HashMap::new();
    let mut tuple = vec![0usize; n];
    loop {
        let mut amp = Complex64::new(1.0, 0.0);
        for (k, &slot) in slots.iter().enumerate() {
            amp *= u.entry(inputs.modes()[tuple[k]], slot);
        }
        let mut key = vec![0u8; n];
        for &x in &tuple {
            key[x] += 1;
        }
        *amplitudes.entry(key).or_insert(Complex64::new(0.0, 0.0)) += amp;

        // odometer increment over [0, n)^n
        let mut pos = 0;
        loop {
            if pos == n {
                let total: f64 = amplitudes.values().map(|a| a.norm_sqr()).sum();
                return Ok(total / t.occupation_factorial());
            }
            tuple[pos] += 1;
            if tuple[pos] < n {
                break;
            }
            tuple[pos] = 0;
            pos += 1;
        }
    }
}

/// Fully delayed coincidence rate P⁽∞⁾: mutually incoherent fields leave
/// ∏_{j∈T} Σ_i |U_ij|², again divided by ∏_j t_j!.
pub fn p_infinite_delay(
    u: &TransferMatrix,
    inputs: &CoherentInput,
    t: &ModeConfiguration,
) -> Result<f64> {
    let slots = check(u, inputs, t)?;
    let mut prod = 1.0;
    for &slot in &slots {
        let intensity: f64 = inputs.modes().iter().map(|&i| u.entry(i, slot).norm_sqr()).sum();
        prod *= intensity;
    }
    Ok(prod / t.occupation_factorial())
}

/// Coherent-state interference visibility (P⁽∞⁾ − P⁽⁰⁾) / P⁽∞⁾.
pub fn visibility(u: &TransferMatrix, inputs: &CoherentInput, t: &ModeConfiguration) -> Result<f64> {
    let p_inf = p_infinite_delay(u, inputs, t)?;
    if p_inf <= 1e-15 {
        return Err(Error::ZeroDenominator { what: "coherent P(∞) vanishes; output unreachable" });
    }
    let p0 = p_zero_delay(u, inputs, t)?;
    Ok((p_inf - p0) / p_inf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{enumerate_configurations, random_unitary};
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Monte Carlo phase integration; the independent oracle for the exact
    /// expansion.
    fn monte_carlo_p0(
        u: &TransferMatrix,
        inputs: &CoherentInput,
        t: &ModeConfiguration,
        samples: u64,
        seed: u64,
    ) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let slots = t.photon_modes();
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for k in 0..samples {
            let phases: Vec<Complex64> = inputs
                .modes()
                .iter()
                .map(|_| {
                    let th: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
                    Complex64::new(th.cos(), th.sin())
                })
                .collect();
            let mut prod = 1.0;
            for &slot in &slots {
                let field: Complex64 = inputs
                    .modes()
                    .iter()
                    .zip(&phases)
                    .map(|(&i, ph)| u.entry(i, slot) * ph)
                    .sum();
                prod *= field.norm_sqr();
            }
            let x = prod / t.occupation_factorial();
            let delta = x - mean;
            mean += delta / (k + 1) as f64;
            m2 += delta * (x - mean);
        }
        let var = m2 / (samples - 1) as f64;
        (mean, (var / samples as f64).sqrt())
    }

    #[test]
    fn balanced_splitter_coincidence() {
        let u = TransferMatrix::balanced_splitter();
        let inputs = CoherentInput::new(vec![0, 1]).unwrap();
        let t = ModeConfiguration::new(vec![1, 1]);
        assert_abs_diff_eq!(p_zero_delay(&u, &inputs, &t).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p_infinite_delay(&u, &inputs, &t).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(visibility(&u, &inputs, &t).unwrap(), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn balanced_splitter_bunched_output() {
        let u = TransferMatrix::balanced_splitter();
        let inputs = CoherentInput::new(vec![0, 1]).unwrap();
        let t = ModeConfiguration::new(vec![2, 0]);
        assert_abs_diff_eq!(p_zero_delay(&u, &inputs, &t).unwrap(), 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(p_infinite_delay(&u, &inputs, &t).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn single_field_has_no_interference() {
        let u = random_unitary(4, 11);
        let inputs = CoherentInput::new(vec![2]).unwrap();
        for j in 0..4 {
            let t = ModeConfiguration::from_modes(&[j], 4).unwrap();
            let expected = u.entry(2, j).norm_sqr();
            assert_abs_diff_eq!(p_zero_delay(&u, &inputs, &t).unwrap(), expected, epsilon = 1e-12);
            assert_abs_diff_eq!(p_infinite_delay(&u, &inputs, &t).unwrap(), expected, epsilon = 1e-12);
            assert_abs_diff_eq!(visibility(&u, &inputs, &t).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn identity_network_passthrough() {
        let u = TransferMatrix::identity(4);
        let inputs = CoherentInput::new(vec![0, 1]).unwrap();
        let t = ModeConfiguration::new(vec![1, 1, 0, 0]);
        assert_abs_diff_eq!(p_infinite_delay(&u, &inputs, &t).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p_zero_delay(&u, &inputs, &t).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unreachable_output_is_an_error() {
        let u = TransferMatrix::identity(3);
        let inputs = CoherentInput::new(vec![0]).unwrap();
        let t = ModeConfiguration::from_modes(&[2], 3).unwrap();
        assert!(matches!(visibility(&u, &inputs, &t), Err(Error::ZeroDenominator { .. })));
    }

    #[test]
    fn exact_expansion_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for case in 0..6u64 {
            let m = 4 + (case as usize % 3);
            let u = random_unitary(m, 40 + case);
            let n = 2 + (case as usize % 2);
            let modes: Vec<usize> = (0..n).map(|k| (2 * k + case as usize) % m).collect();
            let mut modes = modes;
            modes.sort_unstable();
            modes.dedup();
            let inputs = CoherentInput::new(modes).unwrap();
            let n = inputs.n();
            let all = enumerate_configurations(m, n, false);
            let t = all[rng.gen_range(0..all.len())].clone();
            let exact = p_zero_delay(&u, &inputs, &t).unwrap();
            let (mc, se) = monte_carlo_p0(&u, &inputs, &t, 200_000, 7 + case);
            assert!(
                (exact - mc).abs() < 3.5 * se.max(1e-6),
                "case {case}: exact {exact} vs mc {mc} ± {se}"
            );
        }
    }

    #[test]
    fn total_intensity_is_conserved() {
        // Σ_T P⁽⁰⁾ == Σ_T P⁽∞⁾ over all output multisets for unitary U.
        for (m, n, seed) in [(4usize, 2usize, 1u64), (5, 3, 2), (6, 2, 3)] {
            let u = random_unitary(m, seed);
            let modes: Vec<usize> = (0..n).collect();
            let inputs = CoherentInput::new(modes).unwrap();
            let mut sum0 = 0.0;
            let mut sum_inf = 0.0;
            for t in enumerate_configurations(m, n, false) {
                sum0 += p_zero_delay(&u, &inputs, &t).unwrap();
                sum_inf += p_infinite_delay(&u, &inputs, &t).unwrap();
            }
            assert!((sum0 - sum_inf).abs() < 1e-9, "m={m} n={n}: {sum0} vs {sum_inf}");
        }
    }

    #[test]
    fn rates_are_nonnegative_and_visibility_bounded() {
        let u = random_unitary(5, 77);
        let inputs = CoherentInput::new(vec![0, 2, 4]).unwrap();
        for t in enumerate_configurations(5, 3, false) {
            let p0 = p_zero_delay(&u, &inputs, &t).unwrap();
            let pinf = p_infinite_delay(&u, &inputs, &t).unwrap();
            assert!(p0 >= 0.0 && pinf >= 0.0);
            if pinf > 1e-15 {
                assert!(visibility(&u, &inputs, &t).unwrap() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn duplicate_modes_are_rejected() {
        assert!(CoherentInput::new(vec![1, 1]).is_err());
        assert!(CoherentInput::new(vec![]).is_err());
    }
}
