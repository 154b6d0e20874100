//! Hopf-bifurcation location and phase-diagram classification over a
//! two-parameter plane `(sigma, epsilon)`.
//!
//! A Hopf point is located where the next-to-last Hurwitz determinant
//! vanishes while all lower ones stay positive; the determinant is a
//! polynomial in `sigma` with steep scaling, so roots are bracketed and
//! bisected rather than Newton-polished. Tracing a locus steps the second
//! parameter and re-brackets around the previous root with an adaptive
//! bracket width.

use crate::linalg::Matrix;
use crate::stability::{char_poly, hurwitz_determinants, routh_hurwitz, Verdict};
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

/// Default zero-classification tolerance for verdicts.
pub const DEFAULT_VERDICT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    InvalidParameters { sigma: f64, epsilon: f64 },
    /// The model has no finite equilibrium at these parameters.
    Singular { sigma: f64, epsilon: f64 },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidParameters { sigma, epsilon } => {
                write!(f, "invalid model parameters (sigma = {sigma}, epsilon = {epsilon})")
            }
            ModelError::Singular { sigma, epsilon } => {
                write!(f, "equilibrium diverges at (sigma = {sigma}, epsilon = {epsilon})")
            }
        }
    }
}

impl core::error::Error for ModelError {}

/// A family of equilibria parameterized by `(sigma, epsilon)`, exposing the
/// Jacobian at the tracked equilibrium. Implementations must be pure so that
/// parameter sweeps can evaluate cells concurrently.
pub trait ParametricModel: Sync {
    /// Dimension of the Jacobian (the reduced system dimension `r`).
    fn dim(&self) -> usize;
    /// Jacobian of the reduced vector field at the equilibrium for these
    /// parameters.
    fn jacobian_at(&self, sigma: f64, epsilon: f64) -> Result<Matrix, ModelError>;
    /// True where the equilibrium escapes to infinity (or parameters are
    /// otherwise inadmissible).
    fn is_singular(&self, sigma: f64, epsilon: f64) -> bool;
}

#[derive(Debug, Clone, PartialEq)]
pub enum BifurcationError {
    /// The critical determinant does not change sign over the bracket.
    NoSignChange { sigma_lo: f64, sigma_hi: f64, f_lo: f64, f_hi: f64 },
    InvalidBracket { sigma_lo: f64, sigma_hi: f64 },
    InvalidRange,
    Model(ModelError),
}

impl fmt::Display for BifurcationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BifurcationError::NoSignChange { sigma_lo, sigma_hi, f_lo, f_hi } => write!(
                f,
                "critical determinant keeps its sign on [{sigma_lo}, {sigma_hi}] ({f_lo:.3e} to {f_hi:.3e})"
            ),
            BifurcationError::InvalidBracket { sigma_lo, sigma_hi } => {
                write!(f, "invalid bracket [{sigma_lo}, {sigma_hi}]")
            }
            BifurcationError::InvalidRange => write!(f, "invalid parameter range"),
            BifurcationError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for BifurcationError {}

impl From<ModelError> for BifurcationError {
    fn from(e: ModelError) -> Self {
        BifurcationError::Model(e)
    }
}

/// Value of the critical (next-to-last) Hurwitz determinant at a parameter
/// point.
pub fn critical_determinant(
    model: &dyn ParametricModel,
    sigma: f64,
    epsilon: f64,
) -> Result<f64, BifurcationError> {
    let jac = model.jacobian_at(sigma, epsilon)?;
    let p = char_poly(&jac).map_err(|_| ModelError::InvalidParameters { sigma, epsilon })?;
    let dets = hurwitz_determinants(&p);
    Ok(dets[dets.len() - 2])
}

/// A located Hopf candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfPoint {
    pub sigma: f64,
    pub epsilon: f64,
    /// `d/d sigma` of the critical determinant at the root (central
    /// difference).
    pub transversality: f64,
    /// Set when the transversality derivative is numerically zero
    /// (|value| < 1e-12): the crossing is degenerate.
    pub degenerate: bool,
    /// Whether every lower determinant stays positive at the root.
    pub lower_positive: bool,
}

/// Bisect the critical determinant in `sigma` at fixed `epsilon`.
///
/// Requires a sign change over the bracket. The returned point carries the
/// transversality derivative and the positivity status of the lower
/// determinants.
pub fn hopf_point_at(
    model: &dyn ParametricModel,
    epsilon: f64,
    bracket: (f64, f64),
    tol: f64,
) -> Result<HopfPoint, BifurcationError> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo && tol > 0.0) {
        return Err(BifurcationError::InvalidBracket { sigma_lo: lo, sigma_hi: hi });
    }
    let mut f_lo = critical_determinant(model, lo, epsilon)?;
    let f_hi = critical_determinant(model, hi, epsilon)?;
    if f_lo == 0.0 {
        hi = lo;
    } else if f_hi == 0.0 {
        lo = hi;
    } else if f_lo.signum() == f_hi.signum() {
        return Err(BifurcationError::NoSignChange {
            sigma_lo: lo,
            sigma_hi: hi,
            f_lo,
            f_hi,
        });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = critical_determinant(model, mid, epsilon)?;
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let sigma = 0.5 * (lo + hi);

    let h = 1e-6 * sigma.abs().max(1.0);
    let transversality = (critical_determinant(model, sigma + h, epsilon)?
        - critical_determinant(model, sigma - h, epsilon)?)
        / (2.0 * h);

    let jac = model.jacobian_at(sigma, epsilon)?;
    let p = char_poly(&jac).map_err(|_| ModelError::InvalidParameters { sigma, epsilon })?;
    let dets = hurwitz_determinants(&p);
    let lower_positive = dets[..dets.len() - 2].iter().all(|d| *d > 0.0);

    Ok(HopfPoint {
        sigma,
        epsilon,
        transversality,
        degenerate: transversality.abs() < 1e-12,
        lower_positive,
    })
}

/// One traced locus point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocusPoint {
    pub epsilon: f64,
    pub sigma: f64,
    pub transversality: f64,
}

/// Why tracing ended before the requested range was exhausted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    /// A lower determinant lost positivity; the curve is no longer a simple
    /// Hopf locus there.
    LowerDeterminantFailed,
    /// Could not re-bracket the root.
    BracketFailed,
}

/// A traced Hopf locus in the `(sigma, epsilon)` plane.
#[derive(Debug, Clone, PartialEq)]
pub struct HopfLocus {
    pub points: Vec<LocusPoint>,
    /// `d sigma / d epsilon` of the implicit curve at the seed point, from
    /// Richardson-extrapolated central differences of the critical
    /// determinant.
    pub slope_at_origin: f64,
    /// Set when tracing stopped early, with the offending `epsilon`.
    pub stopped: Option<(f64, StopReason)>,
}

/// Trace the locus `critical_determinant = 0` over an `epsilon` range.
///
/// `seed_bracket` brackets the root at `epsilon_range.0`; subsequent steps
/// re-bracket around the previous root with an adaptive width. Tracing stops
/// early (without error) when a lower determinant loses positivity or
/// re-bracketing fails.
pub fn trace_locus(
    model: &dyn ParametricModel,
    epsilon_range: (f64, f64),
    steps: usize,
    seed_bracket: (f64, f64),
    tol: f64,
) -> Result<HopfLocus, BifurcationError> {
    let (eps_start, eps_end) = epsilon_range;
    if !(eps_end >= eps_start) {
        return Err(BifurcationError::InvalidRange);
    }
    let seed = hopf_point_at(model, eps_start, seed_bracket, tol)?;
    let slope_at_origin = implicit_slope(model, seed.sigma, eps_start)?;
    let mut points = Vec::with_capacity(steps + 1);
    points.push(LocusPoint {
        epsilon: eps_start,
        sigma: seed.sigma,
        transversality: seed.transversality,
    });
    let mut stopped = None;
    if !seed.lower_positive {
        return Ok(HopfLocus {
            points,
            slope_at_origin,
            stopped: Some((eps_start, StopReason::LowerDeterminantFailed)),
        });
    }
    if steps > 0 && eps_end > eps_start {
        let d_eps = (eps_end - eps_start) / steps as f64;
        let mut prev_sigma = seed.sigma;
        let mut prev_step = 0.0f64;
        for i in 1..=steps {
            let eps = eps_start + d_eps * i as f64;
            let mut width = (4.0 * prev_step.abs()).max(64.0 * tol).max(1e-4 * prev_sigma.max(1.0));
            let mut found = None;
            for _ in 0..40 {
                // Scan the window and bisect the sign change closest to the
                // previous root, so a wide window cannot jump branches.
                if let Some(bracket) = nearest_sign_change(model, eps, prev_sigma, width)? {
                    match hopf_point_at(model, eps, bracket, tol) {
                        Ok(point) => {
                            found = Some(point);
                            break;
                        }
                        Err(BifurcationError::NoSignChange { .. }) => width *= 2.0,
                        Err(e) => return Err(e),
                    }
                } else {
                    width *= 2.0;
                }
            }
            match found {
                Some(point) if point.lower_positive => {
                    prev_step = point.sigma - prev_sigma;
                    prev_sigma = point.sigma;
                    points.push(LocusPoint {
                        epsilon: eps,
                        sigma: point.sigma,
                        transversality: point.transversality,
                    });
                }
                Some(_) => {
                    stopped = Some((eps, StopReason::LowerDeterminantFailed));
                    break;
                }
                None => {
                    stopped = Some((eps, StopReason::BracketFailed));
                    break;
                }
            }
        }
    }
    Ok(HopfLocus { points, slope_at_origin, stopped })
}

/// Scan `[center - width, center + width]` on a fine grid and return the
/// sign-change subinterval of the critical determinant closest to `center`.
fn nearest_sign_change(
    model: &dyn ParametricModel,
    epsilon: f64,
    center: f64,
    width: f64,
) -> Result<Option<(f64, f64)>, BifurcationError> {
    const NODES: usize = 25;
    let lo = (center - width).max(1e-12);
    let hi = center + width;
    let mut best: Option<(f64, f64)> = None;
    let mut best_distance = f64::INFINITY;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..NODES {
        let sigma = lo + (hi - lo) * i as f64 / (NODES - 1) as f64;
        if model.is_singular(sigma, epsilon) {
            prev = None;
            continue;
        }
        let value = match critical_determinant(model, sigma, epsilon) {
            Ok(v) => v,
            Err(_) => {
                prev = None;
                continue;
            }
        };
        if let Some((prev_sigma, prev_value)) = prev {
            if prev_value.signum() != value.signum() || value == 0.0 {
                let mid = 0.5 * (prev_sigma + sigma);
                let distance = (mid - center).abs();
                if distance < best_distance {
                    best_distance = distance;
                    best = Some((prev_sigma, sigma));
                }
            }
        }
        prev = Some((sigma, value));
    }
    Ok(best)
}

/// `d sigma / d epsilon` of the implicit curve at a point, via
/// `-(dD/d eps) / (dD/d sigma)` with Richardson-extrapolated central
/// differences.
fn implicit_slope(
    model: &dyn ParametricModel,
    sigma: f64,
    epsilon: f64,
) -> Result<f64, BifurcationError> {
    let d_sigma = richardson(|h| {
        Ok((critical_determinant(model, sigma + h, epsilon)?
            - critical_determinant(model, sigma - h, epsilon)?)
            / (2.0 * h))
    }, 1e-4 * sigma.abs().max(1.0))?;
    let d_eps = richardson(|h| {
        Ok((critical_determinant(model, sigma, epsilon + h)?
            - critical_determinant(model, sigma, epsilon - h)?)
            / (2.0 * h))
    }, 1e-4)?;
    Ok(-d_eps / d_sigma)
}

fn richardson(
    f: impl Fn(f64) -> Result<f64, BifurcationError>,
    h: f64,
) -> Result<f64, BifurcationError> {
    let coarse = f(h)?;
    let fine = f(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Stability class of one parameter cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellClass {
    Stable,
    Unstable,
    Critical,
    /// Equilibrium at infinity, inadmissible parameters, or a failed
    /// evaluation.
    Singular,
}

impl fmt::Display for CellClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellClass::Stable => write!(f, "stable"),
            CellClass::Unstable => write!(f, "unstable"),
            CellClass::Critical => write!(f, "critical"),
            CellClass::Singular => write!(f, "singular"),
        }
    }
}

/// Classification of one cell with the determinant cascade behind it
/// (empty for singular cells).
#[derive(Debug, Clone, PartialEq)]
pub struct CellEntry {
    pub class: CellClass,
    pub determinants: Vec<f64>,
}

/// Classify one `(sigma, epsilon)` cell through the determinant cascade.
pub fn classify_cell(model: &dyn ParametricModel, sigma: f64, epsilon: f64) -> CellEntry {
    if model.is_singular(sigma, epsilon) {
        return CellEntry { class: CellClass::Singular, determinants: Vec::new() };
    }
    let jac = match model.jacobian_at(sigma, epsilon) {
        Ok(j) => j,
        Err(_) => return CellEntry { class: CellClass::Singular, determinants: Vec::new() },
    };
    let p = match char_poly(&jac) {
        Ok(p) => p,
        Err(_) => return CellEntry { class: CellClass::Singular, determinants: Vec::new() },
    };
    let report = routh_hurwitz(&p, DEFAULT_VERDICT_TOL);
    let class = match report.verdict() {
        Verdict::AsymptoticallyStable => CellClass::Stable,
        Verdict::Unstable => CellClass::Unstable,
        Verdict::Critical => CellClass::Critical,
    };
    CellEntry { class, determinants: report.determinants().to_vec() }
}

/// Grid classification over the parameter plane. Cells are stored row-major
/// with `epsilon` as the outer index: `cells[i_eps * n_sigma + j_sigma]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    pub sigma_grid: Vec<f64>,
    pub epsilon_grid: Vec<f64>,
    pub cells: Vec<CellEntry>,
}

impl PhaseDiagram {
    pub fn cell(&self, eps_index: usize, sigma_index: usize) -> &CellEntry {
        &self.cells[eps_index * self.sigma_grid.len() + sigma_index]
    }
}

/// Classify every grid cell sequentially (deterministic ordering). Callers
/// that want data parallelism split `epsilon_grid` into chunks, classify
/// each chunk with [`classify_cell`], and reassemble in order.
pub fn phase_diagram(
    model: &dyn ParametricModel,
    sigma_grid: &[f64],
    epsilon_grid: &[f64],
) -> PhaseDiagram {
    let mut cells = Vec::with_capacity(sigma_grid.len() * epsilon_grid.len());
    for &eps in epsilon_grid {
        for &sigma in sigma_grid {
            cells.push(classify_cell(model, sigma, eps));
        }
    }
    PhaseDiagram {
        sigma_grid: sigma_grid.to_vec(),
        epsilon_grid: epsilon_grid.to_vec(),
        cells,
    }
}

/// Evenly spaced grid over `[lo, hi]` with `n >= 1` points (endpoint
/// included for `n >= 2`).
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logistic::LogisticModel;

    fn model() -> LogisticModel {
        LogisticModel { growth: 2.0, capacity: 1.0, omega: 0.8 }
    }

    #[test]
    fn unperturbed_root_at_half_growth_rate() {
        for growth in [0.5, 1.0, 2.0, 4.0] {
            let m = LogisticModel { growth, capacity: 1.0, omega: 0.8 };
            let point = hopf_point_at(&m, 0.0, (0.05 * growth, 4.0 * growth), 1e-10).unwrap();
            assert!(
                (point.sigma - 0.5 * growth).abs() < 1e-8,
                "growth {growth}: sigma {}",
                point.sigma
            );
            assert!(point.lower_positive);
            assert!(!point.degenerate);
        }
    }

    #[test]
    fn no_sign_change_detected() {
        let m = model();
        match hopf_point_at(&m, 0.0, (2.0, 3.0), 1e-10) {
            Err(BifurcationError::NoSignChange { .. }) => {}
            other => panic!("expected sign-change error, got {other:?}"),
        }
    }

    #[test]
    fn zero_width_range_is_single_point() {
        let m = model();
        let locus = trace_locus(&m, (0.0, 0.0), 0, (0.5, 2.0), 1e-10).unwrap();
        assert_eq!(locus.points.len(), 1);
        let point = hopf_point_at(&m, 0.0, (0.5, 2.0), 1e-10).unwrap();
        assert_eq!(locus.points[0].sigma, point.sigma);
    }

    #[test]
    fn slope_predicts_nearby_roots() {
        let m = model();
        let locus = trace_locus(&m, (0.0, 0.0), 0, (0.5, 2.0), 1e-12).unwrap();
        let slope = locus.slope_at_origin;
        let sigma0 = locus.points[0].sigma;
        // sigma*(eps) - (sigma0 + slope * eps) should shrink quadratically.
        let mut errors = Vec::new();
        for eps in [2e-2, 1e-2] {
            let point = hopf_point_at(&m, eps, (sigma0 - 0.2, sigma0 + 0.2), 1e-12).unwrap();
            errors.push((point.sigma - (sigma0 + slope * eps)).abs());
        }
        assert!(
            errors[1] < 0.35 * errors[0],
            "linear prediction errors {errors:?} do not contract"
        );
    }

    #[test]
    fn classification_of_reference_cells() {
        let m = model();
        assert_eq!(classify_cell(&m, 2.0, 0.0).class, CellClass::Stable);
        assert_eq!(classify_cell(&m, 0.5, 0.0).class, CellClass::Unstable);
        let point = hopf_point_at(&m, 0.0, (0.5, 2.0), 1e-12).unwrap();
        assert_eq!(classify_cell(&m, point.sigma, 0.0).class, CellClass::Critical);
    }

    #[test]
    fn diagram_indexing_is_row_major_in_epsilon() {
        let m = model();
        let sigmas = linspace(0.5, 2.5, 4);
        let epsilons = linspace(0.0, 1.0, 3);
        let diagram = phase_diagram(&m, &sigmas, &epsilons);
        assert_eq!(diagram.cells.len(), 12);
        for (i, &eps) in epsilons.iter().enumerate() {
            for (j, &sigma) in sigmas.iter().enumerate() {
                assert_eq!(diagram.cell(i, j), &classify_cell(&m, sigma, eps));
            }
        }
    }

    #[test]
    fn refinement_keeps_classes_away_from_curve() {
        let m = model();
        // Points comfortably off the critical curve keep their class under
        // grid refinement; compare direct classification at shifted points.
        let point = hopf_point_at(&m, 0.5, (0.2, 2.5), 1e-10).unwrap();
        for offset in [0.15, 0.2, 0.3] {
            assert_eq!(classify_cell(&m, point.sigma + offset, 0.5).class, CellClass::Stable);
            if point.sigma - offset > 0.05 {
                assert_eq!(
                    classify_cell(&m, point.sigma - offset, 0.5).class,
                    CellClass::Unstable
                );
            }
        }
    }

    #[test]
    fn trace_stops_when_lower_determinants_fail() {
        let m = model();
        let locus = trace_locus(&m, (0.0, 2.0), 50, (0.2, 2.5), 1e-10).unwrap();
        assert!(locus.points.len() > 20);
        match locus.stopped {
            Some((eps, StopReason::LowerDeterminantFailed)) => {
                assert!(eps > 1.0 && eps < 1.4, "stopped at {eps}");
            }
            other => panic!("expected a lower-determinant stop, got {other:?}"),
        }
    }
}
