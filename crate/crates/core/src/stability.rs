//! Characteristic polynomials, Routh-Hurwitz determinant cascades and
//! stability verdicts.
//!
//! Polynomial coefficients are extracted by the Faddeev-LeVerrier recurrence,
//! which reproduces the exact rational structure of small Jacobians in double
//! precision. The Hurwitz matrices follow the banded pattern
//! `H[i][j] = a_{2j - i}` (with `a_0 = 1` and out-of-range entries zero);
//! their leading principal minors are all positive exactly when every
//! characteristic root lies in the open left half-plane.

use crate::linalg::{Matrix, LinalgError};
use crate::transform::AugmentedSystem;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;

/// Maximum supported matrix dimension for coefficient extraction.
pub const MAX_CHAR_POLY_DIM: usize = 64;

/// Monic characteristic polynomial
/// `P(z) = z^r + b_1 z^(r-1) + ... + b_r`, storing `b_1 .. b_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPoly {
    coeffs: Vec<f64>,
}

impl CharPoly {
    /// Wrap explicit coefficients `b_1 .. b_r` (leading 1 implied).
    pub fn from_coefficients(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// The stored coefficients `b_1 .. b_r`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Evaluate at a complex argument by Horner's scheme.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for &c in &self.coeffs {
            acc = acc * z + c;
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StabilityError {
    DimensionTooLarge { dim: usize },
    /// The vector field produced a NaN or infinity while differencing.
    NonFiniteEvaluation,
    Linalg(LinalgError),
}

impl fmt::Display for StabilityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StabilityError::DimensionTooLarge { dim } => write!(
                f,
                "dimension {dim} exceeds the coefficient-extraction bound {MAX_CHAR_POLY_DIM}"
            ),
            StabilityError::NonFiniteEvaluation => {
                write!(f, "vector field evaluated to a non-finite value")
            }
            StabilityError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for StabilityError {}

impl From<LinalgError> for StabilityError {
    fn from(e: LinalgError) -> Self {
        StabilityError::Linalg(e)
    }
}

/// Characteristic polynomial of a square matrix by the Faddeev-LeVerrier
/// recurrence: `M_1 = A`, `c_k = -tr(A M_k) / k`, `M_{k+1} = A (M_k + c_k I)`.
pub fn char_poly(matrix: &Matrix) -> Result<CharPoly, StabilityError> {
    let n = matrix.dim();
    if n > MAX_CHAR_POLY_DIM {
        return Err(StabilityError::DimensionTooLarge { dim: n });
    }
    let mut coeffs = Vec::with_capacity(n);
    let mut m = matrix.clone();
    for k in 1..=n {
        let c = -m.trace() / k as f64;
        coeffs.push(c);
        if k < n {
            for i in 0..n {
                m[(i, i)] += c;
            }
            m = matrix.mul(&m);
        }
    }
    Ok(CharPoly { coeffs })
}

/// Central finite-difference Jacobian of the reduced vector field at `state`.
pub fn jacobian(system: &AugmentedSystem, state: &[f64]) -> Result<Matrix, StabilityError> {
    let n = system.dim();
    let mut jac = Matrix::zeros(n);
    let mut x = state.to_vec();
    let mut f_plus = vec![0.0; n];
    let mut f_minus = vec![0.0; n];
    for j in 0..n {
        let h = f64::EPSILON.sqrt() * x[j].abs().max(1.0);
        let saved = x[j];
        x[j] = saved + h;
        system.eval(&x, &mut f_plus);
        x[j] = saved - h;
        system.eval(&x, &mut f_minus);
        x[j] = saved;
        for i in 0..n {
            let diff = (f_plus[i] - f_minus[i]) / (2.0 * h);
            if !diff.is_finite() {
                return Err(StabilityError::NonFiniteEvaluation);
            }
            jac[(i, j)] = diff;
        }
    }
    Ok(jac)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    AsymptoticallyStable,
    Unstable,
    Critical,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::AsymptoticallyStable => write!(f, "stable"),
            Verdict::Unstable => write!(f, "unstable"),
            Verdict::Critical => write!(f, "critical"),
        }
    }
}

/// Result of the determinant cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct RouthHurwitzReport {
    determinants: Vec<f64>,
    verdict: Verdict,
    first_failure_index: Option<usize>,
}

impl RouthHurwitzReport {
    /// The leading principal minors `|D_1| .. |D_r|`.
    pub fn determinants(&self) -> &[f64] {
        &self.determinants
    }

    pub fn verdict(&self) -> Verdict {
        self.verdict
    }

    /// 1-based index of the first non-positive determinant, if any.
    pub fn first_failure_index(&self) -> Option<usize> {
        self.first_failure_index
    }
}

/// The Hurwitz matrix minor `D_m` for a monic polynomial.
pub fn hurwitz_matrix(p: &CharPoly, m: usize) -> Matrix {
    let r = p.degree();
    debug_assert!(m >= 1 && m <= r);
    let coeff = |k: isize| -> f64 {
        if k == 0 {
            1.0
        } else if k > 0 && (k as usize) <= r {
            p.coefficients()[k as usize - 1]
        } else {
            0.0
        }
    };
    Matrix::from_fn(m, |i, j| coeff(2 * (j as isize + 1) - (i as isize + 1)))
}

/// All determinants `|D_1| .. |D_r|` of the Hurwitz cascade.
pub fn hurwitz_determinants(p: &CharPoly) -> Vec<f64> {
    (1..=p.degree()).map(|m| hurwitz_matrix(p, m).det()).collect()
}

fn hadamard_bound(m: &Matrix) -> f64 {
    let mut bound = 1.0;
    for i in 0..m.dim() {
        let norm: f64 = m.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
        bound *= norm;
    }
    bound
}

/// The Routh-Hurwitz criterion with a zero-classification band.
///
/// Determinant magnitudes span many orders (the decay-rate scaling alone
/// moves `|D_j|` by `sigma^(j (j + 1) / 2)`), so each minor gets its own
/// band: `D_j` counts as zero when within `tol * max(1, H_j)` where `H_j`
/// is the Hadamard bound of its Hurwitz matrix. All minors above their
/// bands: asymptotically stable. Any below: unstable. Otherwise critical.
pub fn routh_hurwitz(p: &CharPoly, tol: f64) -> RouthHurwitzReport {
    let r = p.degree();
    let mut determinants = Vec::with_capacity(r);
    let mut verdict = Verdict::AsymptoticallyStable;
    let mut first_failure_index = None;
    for m in 1..=r {
        let matrix = hurwitz_matrix(p, m);
        let d = matrix.det();
        let band = tol * hadamard_bound(&matrix).max(1.0);
        if d <= band {
            if first_failure_index.is_none() {
                first_failure_index = Some(m);
            }
            if d < -band {
                verdict = Verdict::Unstable;
            } else if verdict != Verdict::Unstable {
                verdict = Verdict::Critical;
            }
        }
        determinants.push(d);
    }
    RouthHurwitzReport { determinants, verdict, first_failure_index }
}

/// Undo the decay-rate normalization of reduced coefficients:
/// `a_j = sigma^j b_j`. Under this map the cascade determinants scale as
/// `|D_j(a)| = sigma^(j (j + 1) / 2) |D_j(b)|`.
pub fn scale_coefficients(sigma: f64, b: &[f64]) -> Vec<f64> {
    b.iter()
        .enumerate()
        .map(|(i, &bj)| sigma.powi(i as i32 + 1) * bj)
        .collect()
}

/// Full stability analysis of one Jacobian: coefficients, determinant
/// cascade, verdict, and the spectrum from an independent QR route.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub char_poly: CharPoly,
    pub routh_hurwitz: RouthHurwitzReport,
    pub eigenvalues: Vec<Complex64>,
}

pub fn analyze_matrix(matrix: &Matrix, tol: f64) -> Result<StabilityReport, StabilityError> {
    let p = char_poly(matrix)?;
    let report = routh_hurwitz(&p, tol);
    let eigenvalues = matrix.eigenvalues()?;
    Ok(StabilityReport { char_poly: p, routh_hurwitz: report, eigenvalues })
}
