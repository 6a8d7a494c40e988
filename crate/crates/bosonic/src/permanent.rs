//! Exact matrix permanents for complex and non-negative real matrices.
//!
//! Every scattering probability in this crate reduces to a permanent of a
//! small submatrix. Three kernels are provided: a factorial-time expansion
//! used as an independent oracle, and the two standard O(2^n·n)
//! inclusion-exclusion schemes (Ryser, Glynn) with Gray-code updates.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap for the factorial-time kernel.
pub const NAIVE_CAP: usize = 10;
/// Practical cap for the 2^n kernels.
pub const FAST_CAP: usize = 30;
/// Above this dimension the inclusion-exclusion sums switch to compensated
/// (Neumaier) accumulation; condition growth of the alternating series
/// demands it.
const COMPENSATION_THRESHOLD: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Naive,
    Ryser,
    Glynn,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algorithm::Naive => write!(f, "naive"),
            Algorithm::Ryser => write!(f, "ryser"),
            Algorithm::Glynn => write!(f, "glynn"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PermanentResult {
    pub re: f64,
    pub im: f64,
    pub algorithm: Algorithm,
    pub n: usize,
}

impl PermanentResult {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Permanent by the requested kernel, with metadata.
pub fn compute(a: &Array2<Complex64>, algorithm: Algorithm) -> Result<PermanentResult> {
    let value = match algorithm {
        Algorithm::Naive => permanent_naive(a)?,
        Algorithm::Ryser => permanent_ryser(a)?,
        Algorithm::Glynn => permanent_glynn(a)?,
    };
    Ok(PermanentResult { re: value.re, im: value.im, algorithm, n: a.nrows() })
}

/// Default kernel (Ryser).
pub fn permanent(a: &Array2<Complex64>) -> Result<Complex64> {
    permanent_ryser(a)
}

fn check_square(a: &Array2<Complex64>) -> Result<usize> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return Err(Error::NonSquare { rows, cols });
    }
    Ok(rows)
}

/// Σ over all permutations σ of ∏_k A[k, σ(k)]. O(n!·n); the independent
/// oracle for the fast kernels. The 0×0 permanent is 1 (empty product).
pub fn permanent_naive(a: &Array2<Complex64>) -> Result<Complex64> {
    let n = check_square(a)?;
    if n > NAIVE_CAP {
        return Err(Error::DimensionTooLarge { what: "naive permanent", n, cap: NAIVE_CAP });
    }
    fn expand(a: &Array2<Complex64>, row: usize, used: u32, n: usize) -> Complex64 {
        if row == n {
            return Complex64::new(1.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for col in 0..n {
            if used & (1 << col) == 0 {
                acc += a[[row, col]] * expand(a, row + 1, used | (1 << col), n);
            }
        }
        acc
    }
    Ok(expand(a, 0, 0, n))
}

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Ryser inclusion-exclusion with Gray-code subset iteration and incremental
/// row-sum updates:
///
///   Per(A) = (−1)^n Σ_{∅≠S⊆[n]} (−1)^{|S|} ∏_i Σ_{j∈S} A_ij
///
/// Serial deterministic summation order; compensated accumulation above
/// n = 20.
pub fn permanent_ryser(a: &Array2<Complex64>) -> Result<Complex64> {
    let n = check_square(a)?;
    if n > FAST_CAP {
        return Err(Error::DimensionTooLarge { what: "permanent", n, cap: FAST_CAP });
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let compensate = n > COMPENSATION_THRESHOLD;
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut plain = Complex64::new(0.0, 0.0);
    let mut comp_re = CompensatedSum::default();
    let mut comp_im = CompensatedSum::default();
    let mut size: u32 = 0;

    for k in 1u64..(1u64 << n) {
        // Gray code for k differs from the previous one in bit tz(k).
        let j = k.trailing_zeros() as usize;
        let gray = k ^ (k >> 1);
        if gray & (1 << j) != 0 {
            for i in 0..n {
                row_sums[i] += a[[i, j]];
            }
            size += 1;
        } else {
            for i in 0..n {
                row_sums[i] -= a[[i, j]];
            }
            size -= 1;
        }
        let mut prod = Complex64::new(1.0, 0.0);
        for rs in &row_sums {
            prod *= rs;
        }
        if size % 2 == 1 {
            prod = -prod;
        }
        if compensate {
            comp_re.add(prod.re);
            comp_im.add(prod.im);
        } else {
            plain += prod;
        }
    }
    let total = if compensate {
        Complex64::new(comp_re.value(), comp_im.value())
    } else {
        plain
    };
    Ok(if n % 2 == 0 { total } else { -total })
}

/// Glynn formula over ±1 sign vectors with Gray-code updates:
///
///   Per(A) = 2^{1−n} Σ_{δ, δ_1=1} (∏_k δ_k) ∏_j Σ_i δ_i A_ij
pub fn permanent_glynn(a: &Array2<Complex64>) -> Result<Complex64> {
    let n = check_square(a)?;
    if n > FAST_CAP {
        return Err(Error::DimensionTooLarge { what: "permanent", n, cap: FAST_CAP });
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let compensate = n > COMPENSATION_THRESHOLD;
    // start with all δ_i = +1
    let mut col_sums: Vec<Complex64> = (0..n)
        .map(|j| (0..n).map(|i| a[[i, j]]).sum())
        .collect();
    let mut plain = Complex64::new(0.0, 0.0);
    let mut comp_re = CompensatedSum::default();
    let mut comp_im = CompensatedSum::default();

    let mut term = |col_sums: &[Complex64], negatives: u32| {
        let mut prod = Complex64::new(1.0, 0.0);
        for cs in col_sums {
            prod *= cs;
        }
        if negatives % 2 == 1 {
            prod = -prod;
        }
        if compensate {
            comp_re.add(prod.re);
            comp_im.add(prod.im);
        } else {
            plain += prod;
        }
    };

    term(&col_sums, 0);
    let mut gray_prev: u64 = 0;
    let mut negatives: u32 = 0;
    for k in 1u64..(1u64 << (n - 1)) {
        let gray = k ^ (k >> 1);
        let flipped = (gray ^ gray_prev).trailing_zeros() as usize;
        let row = flipped + 1; // δ_1 stays +1
        let now_negative = gray & (1 << flipped) != 0;
        let sign = if now_negative { -2.0 } else { 2.0 };
        for (j, cs) in col_sums.iter_mut().enumerate() {
            *cs += sign * a[[row, j]];
        }
        if now_negative {
            negatives += 1;
        } else {
            negatives -= 1;
        }
        term(&col_sums, negatives);
        gray_prev = gray;
    }
    let total = if compensate {
        Complex64::new(comp_re.value(), comp_im.value())
    } else {
        plain
    };
    Ok(total / 2f64.powi(n as i32 - 1))
}

/// Permanent of a non-negative real matrix; uses the default complex kernel
/// and clamps the tiny negative residue of cancellation to zero.
pub fn permanent_nonneg(a: &Array2<f64>) -> Result<f64> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return Err(Error::NonSquare { rows, cols });
    }
    for ((i, j), &x) in a.indexed_iter() {
        if x < 0.0 {
            return Err(Error::NegativeEntry { row: i, col: j, value: x });
        }
    }
    let complex = a.mapv(|x| Complex64::new(x, 0.0));
    let value = permanent_ryser(&complex)?;
    Ok(value.re.max(0.0))
}
