//! Scattering probabilities of Fock-state inputs through a linear network.
//!
//! For input S and output T the event amplitude is the permanent of the
//! row/column-replicated submatrix U_ST; indistinguishable photons use
//! |Per(U_ST)|², distinguishable ones Per of the entrywise |·|², and partially
//! distinguishable ones a double sum over permutation pairs weighted by a
//! Gram matrix of single-photon overlaps.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::{enumerate_configurations, ModeConfiguration, TransferMatrix, UnitarityClass};
use crate::error::{Error, Result};
use crate::permanent::{permanent_nonneg, permanent_ryser};

/// Cap for the explicit double-permutation sum in [`p_partial`].
pub const PARTIAL_CAP: usize = 5;

/// Column- and row-replicated submatrices for a scattering event.
#[derive(Debug, Clone)]
pub struct ScatteringSubmatrix {
    /// One column per output photon: t_j copies of column j, ascending j.
    pub u_t: Array2<Complex64>,
    /// s_i copies of row i of `u_t`, ascending i; n×n.
    pub u_st: Array2<Complex64>,
    pub input: ModeConfiguration,
    pub output: ModeConfiguration,
}

pub fn build_submatrix(
    u: &TransferMatrix,
    s: &ModeConfiguration,
    t: &ModeConfiguration,
) -> Result<ScatteringSubmatrix> {
    let m = u.m();
    if s.len() != m {
        return Err(Error::DimensionMismatch { what: "input configuration", expected: m, got: s.len() });
    }
    if t.len() != m {
        return Err(Error::DimensionMismatch { what: "output configuration", expected: m, got: t.len() });
    }
    let n = s.total();
    if t.total() != n {
        return Err(Error::PhotonNumberMismatch { input: n, output: t.total() });
    }
    let out_modes = t.photon_modes();
    let in_modes = s.photon_modes();
    let u_t = Array2::from_shape_fn((m, n), |(i, k)| u.entry(i, out_modes[k]));
    let u_st = Array2::from_shape_fn((n, n), |(r, k)| u_t[[in_modes[r], k]]);
    Ok(ScatteringSubmatrix { u_t, u_st, input: s.clone(), output: t.clone() })
}

fn collision_norm(s: &ModeConfiguration, t: &ModeConfiguration) -> f64 {
    s.occupation_factorial() * t.occupation_factorial()
}

/// Probability of output T for indistinguishable input photons S:
/// |Per(U_ST)|² / (∏ s_i! ∏ t_j!).
pub fn p_quantum(u: &TransferMatrix, s: &ModeConfiguration, t: &ModeConfiguration) -> Result<f64> {
    let sub = build_submatrix(u, s, t)?;
    let amp = permanent_ryser(&sub.u_st)?;
    Ok(amp.norm_sqr() / collision_norm(s, t))
}

/// Probability of output T for fully distinguishable input photons:
/// Per(Ũ_ST) / (∏ s_i! ∏ t_j!) with Ũ entrywise |·|².
pub fn p_classical(u: &TransferMatrix, s: &ModeConfiguration, t: &ModeConfiguration) -> Result<f64> {
    let sub = build_submatrix(u, s, t)?;
    let abs2 = sub.u_st.mapv(|z| z.norm_sqr());
    Ok(permanent_nonneg(&abs2)? / collision_norm(s, t))
}

/// Pairwise single-photon state overlaps S_kl = ⟨ψ_k|ψ_l⟩: Hermitian,
/// unit-diagonal, positive semidefinite. All-ones means fully
/// indistinguishable photons, the identity fully distinguishable ones.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: Array2<Complex64>,
}

impl GramMatrix {
    pub fn new(entries: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows != cols {
            return Err(Error::NonSquare { rows, cols });
        }
        let tol = 1e-12;
        for i in 0..rows {
            if (entries[[i, i]] - 1.0).norm() > tol {
                return Err(Error::InvalidParameter(format!(
                    "Gram diagonal entry {i} is {}, expected 1",
                    entries[[i, i]]
                )));
            }
            for j in 0..rows {
                if (entries[[i, j]] - entries[[j, i]].conj()).norm() > tol {
                    return Err(Error::InvalidParameter("Gram matrix is not Hermitian".into()));
                }
                if entries[[i, j]].norm() > 1.0 + tol {
                    return Err(Error::InvalidParameter(format!(
                        "Gram entry ({i}, {j}) has modulus {} > 1",
                        entries[[i, j]].norm()
                    )));
                }
            }
        }
        if !is_psd(&entries, 1e-12) {
            return Err(Error::InvalidParameter("Gram matrix is not positive semidefinite".into()));
        }
        Ok(Self { entries })
    }

    /// Fully indistinguishable photons.
    pub fn all_ones(n: usize) -> Self {
        Self { entries: Array2::from_elem((n, n), Complex64::new(1.0, 0.0)) }
    }

    /// Fully distinguishable photons.
    pub fn identity(n: usize) -> Self {
        Self { entries: Array2::eye(n) }
    }

    /// Constant off-diagonal overlap, (1−λ)I + λJ for λ ∈ [0, 1].
    pub fn uniform(n: usize, overlap: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&overlap) {
            return Err(Error::InvalidParameter(format!("uniform overlap {overlap} outside [0, 1]")));
        }
        let entries = Array2::from_shape_fn((n, n), |(i, j)| {
            Complex64::new(if i == j { 1.0 } else { overlap }, 0.0)
        });
        Ok(Self { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, k: usize, l: usize) -> Complex64 {
        self.entries[[k, l]]
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }
}

/// Cholesky feasibility after adding `jitter` to the diagonal.
pub(crate) fn is_psd(a: &Array2<Complex64>, jitter: f64) -> bool {
    let n = a.nrows();
    let mut l = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            if i == j {
                sum += jitter;
            }
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]].conj();
            }
            if i == j {
                if sum.re < 0.0 || sum.im.abs() > 1e-9 {
                    return false;
                }
                l[[i, j]] = Complex64::new(sum.re.sqrt(), 0.0);
            } else {
                if l[[j, j]].re <= 0.0 {
                    // zero pivot with a nonzero entry below it: only PSD if
                    // the whole column vanished
                    if sum.norm() > 1e-9 {
                        return false;
                    }
                    l[[i, j]] = Complex64::new(0.0, 0.0);
                } else {
                    l[[i, j]] = sum / l[[j, j]];
                }
            }
        }
    }
    true
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    heap_permute(&mut items, n, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

/// Output probability for partially distinguishable photons with pairwise
/// overlaps `gram`:
///
///   (1/∏s!∏t!) Σ_{σ,ρ} ∏_k gram(σ(k), ρ(k)) · ∏_k M(σ(k), k) · [∏_k M(ρ(k), k)]*
///
/// with M = U_ST. Brute force over permutation pairs, n ≤ 5. Equals
/// [`p_quantum`] for an all-ones Gram and [`p_classical`] for the identity.
pub fn p_partial(
    u: &TransferMatrix,
    s: &ModeConfiguration,
    t: &ModeConfiguration,
    gram: &GramMatrix,
) -> Result<f64> {
    let n = s.total();
    if n > PARTIAL_CAP {
        return Err(Error::DimensionTooLarge { what: "partial-distinguishability sum", n, cap: PARTIAL_CAP });
    }
    if gram.n() != n {
        return Err(Error::DimensionMismatch { what: "Gram matrix", expected: n, got: gram.n() });
    }
    let sub = build_submatrix(u, s, t)?;
    let value = partial_permutation_sum(&sub.u_st, gram) / collision_norm(s, t);
    Ok(value.clamp(0.0, 1.0))
}

/// The raw double-permutation sum (no collision normalization, no clamp).
pub(crate) fn partial_permutation_sum(m: &Array2<Complex64>, gram: &GramMatrix) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 1.0;
    }
    let perms = permutations(n);
    let mut total = Complex64::new(0.0, 0.0);
    for sigma in &perms {
        // amplitude for σ
        let mut amp_sigma = Complex64::new(1.0, 0.0);
        for (k, &sk) in sigma.iter().enumerate() {
            amp_sigma *= m[[sk, k]];
        }
        if amp_sigma.norm_sqr() == 0.0 {
            continue;
        }
        for rho in &perms {
            let mut overlap = Complex64::new(1.0, 0.0);
            let mut amp_rho = Complex64::new(1.0, 0.0);
            let mut dead = false;
            for (k, (&sk, &rk)) in sigma.iter().zip(rho.iter()).enumerate() {
                let g = gram.entry(sk, rk);
                if g.norm_sqr() == 0.0 {
                    dead = true;
                    break;
                }
                overlap *= g;
                amp_rho *= m[[rk, k]];
            }
            if dead {
                continue;
            }
            total += overlap * amp_sigma * amp_rho.conj();
        }
    }
    total.re
}

/// Which probability column a distribution or sampler draws from.
#[derive(Debug, Clone)]
pub enum Flavor {
    Quantum,
    Classical,
    Partial(GramMatrix),
}

/// One row of an [`OutcomeTable`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbabilityRecord {
    #[serde(rename = "T")]
    pub config: ModeConfiguration,
    #[serde(rename = "pQ")]
    pub p_quantum: f64,
    #[serde(rename = "pC")]
    pub p_classical: f64,
    #[serde(rename = "pModel")]
    pub p_model: Option<f64>,
}

/// Per-configuration probabilities over an enumerated output set.
/// Serializes as the bare record array.
#[derive(Debug, Clone)]
pub struct OutcomeTable {
    pub input: Option<ModeConfiguration>,
    pub records: Vec<ProbabilityRecord>,
    pub collision_free_only: bool,
    /// Set when the matrix is only near-unitary; column sums may then deviate
    /// from 1 by up to the unitarity deviation.
    pub warning: Option<String>,
}

impl Serialize for OutcomeTable {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.records.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for OutcomeTable {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let records = Vec::<ProbabilityRecord>::deserialize(de)?;
        let collision_free_only = records.iter().all(|r| r.config.is_collision_free());
        Ok(OutcomeTable { input: None, records, collision_free_only, warning: None })
    }
}

impl OutcomeTable {
    pub fn sum_quantum(&self) -> f64 {
        self.records.iter().map(|r| r.p_quantum).sum()
    }

    pub fn sum_classical(&self) -> f64 {
        self.records.iter().map(|r| r.p_classical).sum()
    }

    /// The probability column matching `flavor` (model column when partial).
    pub fn column(&self, flavor: &Flavor) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| match flavor {
                Flavor::Quantum => r.p_quantum,
                Flavor::Classical => r.p_classical,
                Flavor::Partial(_) => r.p_model.unwrap_or(r.p_quantum),
            })
            .collect()
    }

    /// CSV with one configuration per row: `T,pQ,pC,pModel`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "T,pQ,pC,pModel")?;
        for r in &self.records {
            match r.p_model {
                Some(p) => writeln!(w, "{},{},{},{}", r.config, r.p_quantum, r.p_classical, p)?,
                None => writeln!(w, "{},{},{},", r.config, r.p_quantum, r.p_classical)?,
            }
        }
        Ok(())
    }
}

/// Probabilities for every enumerated output configuration of ΣS photons.
pub fn full_distribution(
    u: &TransferMatrix,
    s: &ModeConfiguration,
    flavor: &Flavor,
    collision_free_only: bool,
) -> Result<OutcomeTable> {
    let n = s.total();
    if n == 0 {
        return Err(Error::InvalidParameter("input must carry at least one photon".into()));
    }
    if s.len() != u.m() {
        return Err(Error::DimensionMismatch { what: "input configuration", expected: u.m(), got: s.len() });
    }
    let configs = enumerate_configurations(u.m(), n, collision_free_only);
    let records: Result<Vec<ProbabilityRecord>> = configs
        .par_iter()
        .map(|t| {
            let p_model = match flavor {
                Flavor::Partial(g) => Some(p_partial(u, s, t, g)?),
                _ => None,
            };
            Ok(ProbabilityRecord {
                config: t.clone(),
                p_quantum: p_quantum(u, s, t)?,
                p_classical: p_classical(u, s, t)?,
                p_model,
            })
        })
        .collect();
    let validation = u.validate();
    let warning = match validation.class {
        UnitarityClass::Unitary => None,
        _ => Some(format!(
            "matrix '{}' is {} unitary (deviation {:.3e}); probability sums may deviate accordingly",
            u.label(),
            if validation.class == UnitarityClass::NearUnitary { "only approximately" } else { "not" },
            validation.deviation
        )),
    };
    Ok(OutcomeTable { input: Some(s.clone()), records: records?, collision_free_only, warning })
}

/// Sampled output counts. Serializes with the draw count so that rates can be
/// normalized independently of detection losses downstream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountsTable {
    pub shots: u64,
    pub counts: Vec<CountRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountRecord {
    #[serde(rename = "T")]
    pub config: ModeConfiguration,
    pub count: u64,
}

/// I.i.d. categorical draws from the exact distribution; deterministic for a
/// fixed seed. Zero-probability outcomes can never be drawn.
pub fn sample(
    u: &TransferMatrix,
    s: &ModeConfiguration,
    flavor: &Flavor,
    shots: u64,
    seed: u64,
) -> Result<CountsTable> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let table = full_distribution(u, s, flavor, false)?;
    let probs = table.column(flavor);
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in &probs {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    if total <= 0.0 {
        return Err(Error::ZeroDenominator { what: "sampling distribution has zero total mass" });
    }
    let mut counts = vec![0u64; probs.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..shots {
        let x: f64 = rng.gen::<f64>() * total;
        // first index with x < cdf[i]; zero-width intervals are unreachable
        let idx = match cdf.binary_search_by(|c| c.partial_cmp(&x).unwrap()) {
            Ok(i) => i + 1,
            Err(i) => i,
        };
        counts[idx.min(probs.len() - 1)] += 1;
    }
    Ok(CountsTable {
        shots,
        counts: table
            .records
            .into_iter()
            .zip(counts)
            .map(|(r, c)| CountRecord { config: r.config, count: c })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::random_unitary;
    use crate::measured;
    use approx::assert_abs_diff_eq;

    fn supp_configs() -> (ModeConfiguration, ModeConfiguration) {
        (
            ModeConfiguration::new(vec![1, 0, 1, 0, 0, 0]),
            ModeConfiguration::new(vec![0, 1, 0, 0, 1, 0]),
        )
    }

    #[test]
    fn submatrix_matches_published_slice() {
        let u = measured::six_mode_two_photon();
        let (s, t) = supp_configs();
        let sub = build_submatrix(&u, &s, &t).unwrap();
        assert_eq!(sub.u_t.dim(), (6, 2));
        assert_eq!(sub.u_st.dim(), (2, 2));
        assert_eq!(sub.u_st[[0, 0]], Complex64::new(0.325, 0.0));
        assert_eq!(sub.u_st[[0, 1]], Complex64::new(0.430, 0.0));
        assert_eq!(sub.u_st[[1, 0]], Complex64::new(0.182, 0.248));
        assert_eq!(sub.u_st[[1, 1]], Complex64::new(-0.127, -0.386));
    }

    #[test]
    fn submatrix_duplicates_columns() {
        let u = random_unitary(4, 1);
        let s = ModeConfiguration::new(vec![1, 1, 0, 0]);
        let t = ModeConfiguration::new(vec![0, 2, 0, 0]);
        let sub = build_submatrix(&u, &s, &t).unwrap();
        assert_eq!(sub.u_st[[0, 0]], sub.u_st[[0, 1]]);
        assert_eq!(sub.u_st[[0, 0]], u.entry(0, 1));
        assert_eq!(sub.u_st[[1, 0]], u.entry(1, 1));
    }

    #[test]
    fn identity_submatrix() {
        let u = TransferMatrix::identity(3);
        let s = ModeConfiguration::new(vec![1, 1, 0]);
        let sub = build_submatrix(&u, &s, &s).unwrap();
        assert_eq!(sub.u_st, Array2::eye(2));
    }

    #[test]
    fn photon_number_mismatch_is_rejected() {
        let u = TransferMatrix::identity(3);
        let s = ModeConfiguration::new(vec![1, 1, 0]);
        let t = ModeConfiguration::new(vec![1, 0, 0]);
        assert!(matches!(build_submatrix(&u, &s, &t), Err(Error::PhotonNumberMismatch { .. })));
    }

    #[test]
    fn published_two_photon_probabilities() {
        let u = measured::six_mode_two_photon();
        let (s, t) = supp_configs();
        let pq = p_quantum(&u, &s, &t).unwrap();
        let pc = p_classical(&u, &s, &t).unwrap();
        assert!((pq - 0.0017).abs() < 5e-4, "pQ {pq}");
        assert!((pc - 0.0349).abs() < 5e-4, "pC {pc}");
    }

    #[test]
    fn hom_suppression_is_exact() {
        let u = TransferMatrix::balanced_splitter();
        let s = ModeConfiguration::new(vec![1, 1]);
        assert_eq!(p_quantum(&u, &s, &s).unwrap(), 0.0);
        assert_abs_diff_eq!(p_classical(&u, &s, &s).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn vacuum_scatters_to_vacuum() {
        let u = random_unitary(4, 9);
        let zero = ModeConfiguration::new(vec![0, 0, 0, 0]);
        assert_eq!(p_quantum(&u, &zero, &zero).unwrap(), 1.0);
        assert_eq!(p_classical(&u, &zero, &zero).unwrap(), 1.0);
    }

    #[test]
    fn identity_is_a_point_mass() {
        let u = TransferMatrix::identity(6);
        let s = ModeConfiguration::new(vec![1, 1, 0, 0, 0, 0]);
        assert_eq!(p_quantum(&u, &s, &s).unwrap(), 1.0);
        let table = full_distribution(&u, &s, &Flavor::Quantum, false).unwrap();
        for r in &table.records {
            let expect = if r.config == s { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(r.p_quantum, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn hom_distribution() {
        let u = TransferMatrix::balanced_splitter();
        let s = ModeConfiguration::new(vec![1, 1]);
        let table = full_distribution(&u, &s, &Flavor::Quantum, false).unwrap();
        let probs: Vec<f64> = table.records.iter().map(|r| r.p_quantum).collect();
        assert_abs_diff_eq!(probs[0], 0.5, epsilon = 1e-12); // (2,0)
        assert_abs_diff_eq!(probs[1], 0.0, epsilon = 1e-12); // (1,1)
        assert_abs_diff_eq!(probs[2], 0.5, epsilon = 1e-12); // (0,2)
    }

    #[test]
    fn distributions_normalize_for_unitaries() {
        for (m, n, seed) in [(4usize, 2usize, 7u64), (6, 3, 7), (6, 2, 3), (8, 3, 1)] {
            let u = random_unitary(m, seed);
            let mut occ = vec![0u32; m];
            for k in 0..n {
                occ[2 * k % m] += 1;
            }
            let s = ModeConfiguration::new(occ);
            let table = full_distribution(&u, &s, &Flavor::Quantum, false).unwrap();
            assert!((table.sum_quantum() - 1.0).abs() < 1e-9, "m={m} n={n} q={}", table.sum_quantum());
            assert!((table.sum_classical() - 1.0).abs() < 1e-9, "m={m} n={n} c={}", table.sum_classical());
        }
    }

    #[test]
    fn colliding_input_normalizes() {
        let u = random_unitary(4, 5);
        let s = ModeConfiguration::new(vec![2, 0, 1, 0]);
        let table = full_distribution(&u, &s, &Flavor::Quantum, false).unwrap();
        assert!((table.sum_quantum() - 1.0).abs() < 1e-9, "q={}", table.sum_quantum());
        // the shared ∏s_i!∏t_j! convention leaves the classical column
        // summing to 1/∏s_i! when the input itself collides
        let expected = 1.0 / s.occupation_factorial();
        assert!((table.sum_classical() - expected).abs() < 1e-9, "c={}", table.sum_classical());
    }

    #[test]
    fn near_unitary_matrix_is_annotated() {
        let u = measured::six_mode_two_photon();
        let s = ModeConfiguration::new(vec![1, 0, 1, 0, 0, 0]);
        let table = full_distribution(&u, &s, &Flavor::Quantum, false).unwrap();
        assert!(table.warning.is_some());
    }

    #[test]
    fn partial_reduces_to_quantum_and_classical() {
        for seed in 0..10u64 {
            let u = random_unitary(5, seed);
            let s = ModeConfiguration::new(vec![1, 1, 0, 1, 0]);
            for t in enumerate_configurations(5, 3, false).into_iter().step_by(7) {
                let pq = p_quantum(&u, &s, &t).unwrap();
                let pc = p_classical(&u, &s, &t).unwrap();
                let ones = p_partial(&u, &s, &t, &GramMatrix::all_ones(3)).unwrap();
                let id = p_partial(&u, &s, &t, &GramMatrix::identity(3)).unwrap();
                assert_abs_diff_eq!(ones, pq, epsilon = 1e-12);
                assert_abs_diff_eq!(id, pc, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn partial_balanced_splitter_half_overlap() {
        let u = TransferMatrix::balanced_splitter();
        let s = ModeConfiguration::new(vec![1, 1]);
        let g = GramMatrix::uniform(2, 0.5).unwrap();
        assert_abs_diff_eq!(p_partial(&u, &s, &s, &g).unwrap(), 0.375, epsilon = 1e-12);
    }

    #[test]
    fn partial_interpolates_continuously() {
        let u = random_unitary(4, 17);
        let s = ModeConfiguration::new(vec![1, 0, 1, 1]);
        let t = ModeConfiguration::new(vec![0, 1, 1, 1]);
        let pq = p_quantum(&u, &s, &t).unwrap();
        let pc = p_classical(&u, &s, &t).unwrap();
        let p_at = |lambda: f64| {
            p_partial(&u, &s, &t, &GramMatrix::uniform(3, lambda).unwrap()).unwrap()
        };
        assert_abs_diff_eq!(p_at(0.0), pc, epsilon = 1e-12);
        assert_abs_diff_eq!(p_at(1.0), pq, epsilon = 1e-12);
        let delta = 1e-6;
        for k in 0..=10 {
            let lambda = k as f64 / 10.0;
            let hi = (lambda + delta).min(1.0);
            assert!((p_at(hi) - p_at(lambda)).abs() < 1e-4, "jump at λ={lambda}");
        }
    }

    #[test]
    fn partial_cap_is_enforced() {
        let u = random_unitary(6, 2);
        let s = ModeConfiguration::new(vec![1, 1, 1, 1, 1, 1]);
        let g = GramMatrix::identity(6);
        assert!(matches!(p_partial(&u, &s, &s, &g), Err(Error::DimensionTooLarge { .. })));
    }

    #[test]
    fn gram_validation() {
        assert!(GramMatrix::uniform(3, 0.5).is_ok());
        // non-unit diagonal
        let mut e = Array2::eye(2);
        e[[0, 0]] = Complex64::new(0.9, 0.0);
        assert!(GramMatrix::new(e).is_err());
        // non-Hermitian
        let mut e: Array2<Complex64> = Array2::eye(2);
        e[[0, 1]] = Complex64::new(0.5, 0.0);
        e[[1, 0]] = Complex64::new(0.3, 0.0);
        assert!(GramMatrix::new(e).is_err());
        // valid Hermitian with complex off-diagonal
        let mut e: Array2<Complex64> = Array2::eye(2);
        e[[0, 1]] = Complex64::new(0.3, 0.4);
        e[[1, 0]] = Complex64::new(0.3, -0.4);
        assert!(GramMatrix::new(e).is_ok());
        // not PSD: |overlap| structure violating positivity
        let mut e: Array2<Complex64> = Array2::eye(3);
        for (i, j) in [(0, 1), (1, 0), (0, 2), (2, 0)] {
            e[[i, j]] = Complex64::new(0.9, 0.0);
        }
        for (i, j) in [(1, 2), (2, 1)] {
            e[[i, j]] = Complex64::new(-0.9, 0.0);
        }
        assert!(GramMatrix::new(e).is_err());
    }

    #[test]
    fn time_reversal_symmetry() {
        let u = random_unitary(5, 23);
        let s = ModeConfiguration::new(vec![1, 0, 1, 0, 1]);
        let t = ModeConfiguration::new(vec![0, 1, 1, 1, 0]);
        let forward = p_quantum(&u, &s, &t).unwrap();
        let backward = p_quantum(&u.adjoint(), &t, &s).unwrap();
        assert_abs_diff_eq!(forward, backward, epsilon = 1e-12);
    }

    #[test]
    fn permutation_covariance() {
        let u = random_unitary(4, 31);
        let s = ModeConfiguration::new(vec![1, 1, 0, 0]);
        let t = ModeConfiguration::new(vec![0, 1, 0, 1]);
        let reference = p_quantum(&u, &s, &t).unwrap();
        // swap input modes 0 and 3 in both U's rows and S
        let perm = [3usize, 1, 2, 0];
        let permuted_entries = Array2::from_shape_fn((4, 4), |(i, j)| u.entry(perm[i], j));
        let pu = TransferMatrix::new(permuted_entries, "permuted").unwrap();
        let ps = ModeConfiguration::new(vec![0, 1, 0, 1]);
        assert_abs_diff_eq!(p_quantum(&pu, &ps, &t).unwrap(), reference, epsilon = 1e-12);
    }

    #[test]
    fn sampler_counts_and_determinism() {
        let u = random_unitary(6, 7);
        let s = ModeConfiguration::new(vec![1, 0, 1, 0, 1, 0]);
        let a = sample(&u, &s, &Flavor::Quantum, 5000, 99).unwrap();
        let b = sample(&u, &s, &Flavor::Quantum, 5000, 99).unwrap();
        assert_eq!(a.counts.iter().map(|c| c.count).sum::<u64>(), 5000);
        assert_eq!(
            a.counts.iter().map(|c| c.count).collect::<Vec<_>>(),
            b.counts.iter().map(|c| c.count).collect::<Vec<_>>()
        );
        let c = sample(&u, &s, &Flavor::Quantum, 5000, 100).unwrap();
        assert_ne!(
            a.counts.iter().map(|c| c.count).collect::<Vec<_>>(),
            c.counts.iter().map(|c| c.count).collect::<Vec<_>>()
        );
    }

    #[test]
    fn sampler_never_draws_zero_probability_outcomes() {
        let u = TransferMatrix::balanced_splitter();
        let s = ModeConfiguration::new(vec![1, 1]);
        let table = sample(&u, &s, &Flavor::Quantum, 10_000, 4).unwrap();
        let coincidence = table
            .counts
            .iter()
            .find(|c| c.config == ModeConfiguration::new(vec![1, 1]))
            .unwrap();
        assert_eq!(coincidence.count, 0);
    }

    #[test]
    fn single_shot_yields_single_configuration() {
        let u = random_unitary(4, 2);
        let s = ModeConfiguration::new(vec![1, 1, 0, 0]);
        let table = sample(&u, &s, &Flavor::Quantum, 1, 8).unwrap();
        assert_eq!(table.counts.iter().map(|c| c.count).sum::<u64>(), 1);
    }

    #[test]
    fn outcome_table_json_schema() {
        let u = TransferMatrix::balanced_splitter();
        let s = ModeConfiguration::new(vec![1, 1]);
        let table = full_distribution(&u, &s, &Flavor::Quantum, false).unwrap();
        let json = serde_json::to_value(&table).unwrap();
        let arr = json.as_array().expect("bare array");
        assert_eq!(arr.len(), 3);
        assert_eq!(arr[0]["T"], serde_json::json!([2, 0]));
        assert!(arr[0]["pQ"].is_number());
        assert!(arr[0]["pModel"].is_null());
        let back: OutcomeTable = serde_json::from_value(json).unwrap();
        assert_eq!(back.records.len(), 3);
    }
}
