//! Domain types for linear-optical networks: transfer matrices, mode
//! occupation configurations, configuration enumeration, and Haar-random
//! unitary generation.

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Max-norm deviation below which a matrix counts as exactly unitary.
pub const UNITARY_TOLERANCE: f64 = 1e-12;

/// Deviation threshold covering rounding-level error (e.g. three-decimal
/// published data of a lossless device).
pub const NEAR_UNITARY_TOLERANCE: f64 = 0.05;

/// Passivity bounds for measured lossy devices: a physical network cannot
/// amplify (largest singular value ≤ 1 + tolerance) and a usable one is not
/// close to rank-deficient. Measured fiber-network matrices carry ~35%
/// insertion loss, which makes the raw ‖U†U − I‖ deviation large while the
/// device is still a perfectly good attenuated unitary.
pub const PASSIVE_SIGMA_MAX: f64 = 1.0 + NEAR_UNITARY_TOLERANCE;
pub const PASSIVE_SIGMA_MIN: f64 = 0.5;

/// An m-mode optical network: entry (i, j) is the complex amplitude
/// r_ij e^{iθ_ij} from input mode i to output mode j.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    entries: Array2<Complex64>,
    label: String,
    unitarity_tolerance: f64,
}

/// Classification produced by [`TransferMatrix::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitarityClass {
    Unitary,
    NearUnitary,
    Invalid,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub m: usize,
    /// ‖U†U − I‖_max.
    pub deviation: f64,
    /// Extreme singular values of the matrix.
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub class: UnitarityClass,
}

impl TransferMatrix {
    pub fn new(entries: Array2<Complex64>, label: impl Into<String>) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows != cols {
            return Err(Error::NonSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::InvalidParameter("mode count must be at least 1".into()));
        }
        for ((i, j), z) in entries.indexed_iter() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
        Ok(Self { entries, label: label.into(), unitarity_tolerance: UNITARY_TOLERANCE })
    }

    /// Identity network: every photon exits the mode it entered.
    pub fn identity(m: usize) -> Self {
        Self::new(Array2::eye(m), "identity").expect("identity is valid")
    }

    /// Symmetric 50:50 two-mode splitter with a real matrix
    /// [[1, 1], [1, -1]]/√2.
    pub fn balanced_splitter() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let entries = Array2::from_shape_vec(
            (2, 2),
            vec![
                Complex64::new(s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(-s, 0.0),
            ],
        )
        .unwrap();
        Self::new(entries, "balanced-splitter").unwrap()
    }

    pub fn m(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn entry(&self, input: usize, output: usize) -> Complex64 {
        self.entries[[input, output]]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    /// Conjugate transpose, i.e. the time-reversed network.
    pub fn adjoint(&self) -> Self {
        let mut t = self.entries.t().to_owned();
        t.mapv_inplace(|z| z.conj());
        Self { entries: t, label: format!("{}-adjoint", self.label), unitarity_tolerance: self.unitarity_tolerance }
    }

    /// ‖U†U − I‖_max.
    pub fn unitarity_deviation(&self) -> f64 {
        let m = self.m();
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..m {
                    acc += self.entries[[k, i]].conj() * self.entries[[k, j]];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - expect).norm());
            }
        }
        worst
    }

    pub fn validate(&self) -> ValidationReport {
        let deviation = self.unitarity_deviation();
        let m = self.m();
        // singular values via the eigenvalues of the Hermitian U†U
        let mut gram = Array2::zeros((m, m));
        for i in 0..m {
            for j in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..m {
                    acc += self.entries[[k, i]].conj() * self.entries[[k, j]];
                }
                gram[[i, j]] = acc;
            }
        }
        let evals = hermitian_eigenvalues(&gram);
        let sigma_max = evals.iter().cloned().fold(0.0_f64, f64::max).max(0.0).sqrt();
        let sigma_min = evals.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0).sqrt();
        let class = if !deviation.is_finite() {
            UnitarityClass::Invalid
        } else if deviation <= self.unitarity_tolerance {
            UnitarityClass::Unitary
        } else if deviation <= NEAR_UNITARY_TOLERANCE
            || (sigma_max <= PASSIVE_SIGMA_MAX && sigma_min >= PASSIVE_SIGMA_MIN)
        {
            UnitarityClass::NearUnitary
        } else {
            UnitarityClass::Invalid
        };
        ValidationReport { m, deviation, sigma_max, sigma_min, class }
    }
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.
fn hermitian_eigenvalues(a: &Array2<Complex64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| m[[p, q]].norm_sqr())
            .sum();
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.norm() < 1e-300 {
                    continue;
                }
                let app = m[[p, p]].re;
                let aqq = m[[q, q]].re;
                let phase = apq / apq.norm();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(app - aqq);
                let (s, c) = theta.sin_cos();
                // columns: [p q] ← [p q]·[[c, −s·e^{iφ}], [s·e^{−iφ}, c]]
                for i in 0..n {
                    let vip = m[[i, p]];
                    let viq = m[[i, q]];
                    m[[i, p]] = c * vip + s * phase.conj() * viq;
                    m[[i, q]] = -s * phase * vip + c * viq;
                }
                for j in 0..n {
                    let vpj = m[[p, j]];
                    let vqj = m[[q, j]];
                    m[[p, j]] = c * vpj + s * phase * vqj;
                    m[[q, j]] = -s * phase.conj() * vpj + c * vqj;
                }
            }
        }
    }
    (0..n).map(|i| m[[i, i]].re).collect()
}

/// Interchange schema: `{"m": int, "re": [[f;m];m], "im": [[f;m];m], "label": s}`.
#[derive(Serialize, Deserialize)]
struct TransferMatrixSchema {
    m: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
    label: String,
}

impl Serialize for TransferMatrix {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let m = self.m();
        let grab = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..m)
                .map(|i| (0..m).map(|j| f(&self.entries[[i, j]])).collect())
                .collect()
        };
        TransferMatrixSchema {
            m,
            re: grab(|z| z.re),
            im: grab(|z| z.im),
            label: self.label.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for TransferMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = TransferMatrixSchema::deserialize(de)?;
        if raw.re.len() != raw.m
            || raw.im.len() != raw.m
            || raw.re.iter().any(|r| r.len() != raw.m)
            || raw.im.iter().any(|r| r.len() != raw.m)
        {
            return Err(D::Error::custom("re/im arrays do not match the declared mode count"));
        }
        let mut entries = Array2::zeros((raw.m, raw.m));
        for i in 0..raw.m {
            for j in 0..raw.m {
                entries[[i, j]] = Complex64::new(raw.re[i][j], raw.im[i][j]);
            }
        }
        TransferMatrix::new(entries, raw.label).map_err(D::Error::custom)
    }
}

/// Photon occupation numbers per mode. Serializes as a bare integer array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeConfiguration(Vec<u32>);

impl ModeConfiguration {
    pub fn new(occupations: Vec<u32>) -> Self {
        Self(occupations)
    }

    /// One photon in each of the given (0-based, distinct) modes.
    pub fn from_modes(modes: &[usize], m: usize) -> Result<Self> {
        let mut occ = vec![0u32; m];
        for &i in modes {
            if i >= m {
                return Err(Error::InvalidParameter(format!(
                    "mode index {i} out of range for {m} modes"
                )));
            }
            occ[i] += 1;
        }
        Ok(Self(occ))
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, mode: usize) -> u32 {
        self.0[mode]
    }

    /// Total photon number n.
    pub fn total(&self) -> usize {
        self.0.iter().map(|&c| c as usize).sum()
    }

    /// True when no mode holds more than one photon.
    pub fn is_collision_free(&self) -> bool {
        self.0.iter().all(|&c| c <= 1)
    }

    /// Modes with at least one photon, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Expansion into one entry per photon (mode indices, ascending).
    pub fn photon_modes(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.total());
        for (i, &c) in self.0.iter().enumerate() {
            for _ in 0..c {
                out.push(i);
            }
        }
        out
    }

    /// ∏_j (occupation_j)!.
    pub fn occupation_factorial(&self) -> f64 {
        self.0.iter().map(|&c| factorial(c as usize)).product()
    }

    /// Elementwise sum; panics if lengths differ.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.0.len(), other.0.len());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl std::fmt::Display for ModeConfiguration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Bijection between mode indices and human-readable port labels, e.g. the
/// polarization/spatial convention {H1, V1, H2, V2, H3, V3} of a six-mode
/// device built from three dual-polarization spatial modes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeLabeling {
    labels: Vec<String>,
}

impl ModeLabeling {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.clone()) {
                return Err(Error::InvalidParameter(format!("duplicate mode label {l:?}")));
            }
        }
        Ok(Self { labels })
    }

    /// H/V polarization labels over ⌈m/2⌉ spatial modes.
    pub fn polarization_spatial(m: usize) -> Self {
        let labels = (0..m)
            .map(|i| format!("{}{}", if i % 2 == 0 { "H" } else { "V" }, i / 2 + 1))
            .collect();
        Self { labels }
    }

    pub fn m(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, mode: usize) -> &str {
        &self.labels[mode]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// All occupation vectors of `n` photons over `m` modes, lexicographically
/// descending; restricted to at most one photon per mode when
/// `collision_free_only` is set.
pub fn enumerate_configurations(m: usize, n: usize, collision_free_only: bool) -> Vec<ModeConfiguration> {
    assert!(m >= 1, "mode count must be at least 1");
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(m);
    fill(&mut out, &mut prefix, m, n, collision_free_only);
    out
}

fn fill(out: &mut Vec<ModeConfiguration>, prefix: &mut Vec<u32>, m: usize, n: usize, cf: bool) {
    if prefix.len() == m - 1 {
        if !cf || n <= 1 {
            let mut occ = prefix.clone();
            occ.push(n as u32);
            out.push(ModeConfiguration(occ));
        }
        return;
    }
    let cap = if cf { n.min(1) } else { n };
    let remaining_modes = m - prefix.len() - 1;
    for k in (0..=cap).rev() {
        let rest = n - k;
        // prune branches that cannot absorb the remaining photons
        if cf && rest > remaining_modes {
            continue;
        }
        prefix.push(k as u32);
        fill(out, prefix, m, rest, cf);
        prefix.pop();
    }
}

/// Exact n! in double precision (exact through n = 20).
pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Binomial coefficient C(n, k) as f64.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0_f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Haar-distributed random unitary: QR orthonormalization of a complex
/// Gaussian matrix with the R-diagonal phases pushed into Q. Deterministic
/// for a fixed seed.
pub fn random_unitary(m: usize, seed: u64) -> TransferMatrix {
    assert!(m >= 1, "mode count must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Array2::zeros((m, m));
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..m {
        for j in 0..m {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            g[[i, j]] = Complex64::new(re * scale, im * scale);
        }
    }
    let (q, r) = householder_qr(&g);
    let mut u = q;
    for j in 0..m {
        let d = r[[j, j]];
        let phase = if d.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { d / d.norm() };
        for i in 0..m {
            u[[i, j]] *= phase;
        }
    }
    TransferMatrix::new(u, format!("haar-m{m}-seed{seed}")).expect("finite by construction")
}

/// Householder QR of a square complex matrix; returns (Q, R) with A = Q R.
fn householder_qr(a: &Array2<Complex64>) -> (Array2<Complex64>, Array2<Complex64>) {
    let n = a.nrows();
    let mut r = a.clone();
    let mut q: Array2<Complex64> = Array2::eye(n);
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let norm_x: f64 = (k..n).map(|i| r[[i, k]].norm_sqr()).sum::<f64>().sqrt();
        if norm_x < 1e-300 {
            continue;
        }
        let x0 = r[[k, k]];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm_x;
        for i in k..n {
            v[i] = r[[i, k]];
        }
        v[k] -= alpha;
        let vnorm2: f64 = (k..n).map(|i| v[i].norm_sqr()).sum();
        if vnorm2 < 1e-300 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // R ← H R with H = I − β v v†
        for j in k..n {
            let dot: Complex64 = (k..n).map(|i| v[i].conj() * r[[i, j]]).sum();
            for i in k..n {
                r[[i, j]] -= beta * v[i] * dot;
            }
        }
        // Q ← Q H
        for i in 0..n {
            let dot: Complex64 = (k..n).map(|j| q[[i, j]] * v[j]).sum();
            for j in k..n {
                q[[i, j]] -= beta * dot * v[j].conj();
            }
        }
    }
    (q, r)
}
