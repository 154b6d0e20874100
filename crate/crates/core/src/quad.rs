//! Adaptive Simpson quadrature on a bounded interval.
//!
//! Memory kernels and their history integrands are smooth between isolated
//! kinks (absolute values of oscillating kernels), so interval-halving
//! Simpson converges quickly. The error estimate uses the classic
//! `|S_fine - S_coarse| / 15` criterion.

#[allow(unused_imports)]
use num_traits::Float;

/// Integrate `f` over `[a, b]` with absolute tolerance `tol`.
///
/// The interval is first split into `base_panels` equal panels (to resolve
/// oscillations the error estimator would otherwise miss), each refined
/// adaptively with its share of the tolerance budget.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    base_panels: usize,
) -> f64 {
    if a == b {
        return 0.0;
    }
    let panels = base_panels.max(1);
    let width = (b - a) / panels as f64;
    let panel_tol = tol / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == panels { b } else { lo + width };
        let flo = f(lo);
        let fmid = f(0.5 * (lo + hi));
        let fhi = f(hi);
        let whole = simpson(lo, hi, flo, fmid, fhi);
        total += refine(f, lo, hi, flo, fmid, fhi, whole, panel_tol, 40);
    }
    total
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // The relative floor keeps refinement bounded on huge integrands.
    let accept = tol.max(1e-13 * (left + right).abs());
    if depth == 0 || delta.abs() <= 15.0 * accept || !delta.is_finite() {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
