//! Time integration: fixed and adaptive Runge-Kutta for the reduced ODE
//! system, direct integration of the original delay equation by convolution
//! quadrature, and the kernel-continuity certificate comparing the two.
//!
//! The direct integrator is the trusted oracle for the chain reduction, so
//! it deliberately shares no machinery with it: the delay term is an actual
//! integral over the stored solution history (composite trapezoid on the
//! step grid, growing memory, O(n^2) work) plus the kernel tail against the
//! initial history function.

use crate::kernels::{kernel_difference_norm, KernelError, KernelSpec};
use crate::linalg::{inf_norm, one_norm, Matrix};
use crate::quad::adaptive_simpson;
use crate::system::{DelaySystemSpec, HistoryForm};
use crate::transform::AugmentedSystem;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;

/// States with infinity norm beyond this are treated as numerical blow-up;
/// integration stops and flags the trajectory instead of failing.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeMethod {
    /// Classic fourth-order Runge-Kutta with a fixed step.
    FixedRk4 { step: f64 },
    /// Embedded 4(5) pair with proportional step control.
    AdaptiveRk45 { rel_tol: f64, abs_tol: f64 },
}

impl OdeMethod {
    /// Default fixed step for a system with decay rate `sigma`:
    /// `min(1e-2, 0.05 / sigma)`.
    pub fn default_rk4(sigma: f64) -> Self {
        OdeMethod::FixedRk4 { step: (0.05 / sigma).min(1e-2) }
    }

    pub fn default_rk45() -> Self {
        OdeMethod::AdaptiveRk45 { rel_tol: 1e-8, abs_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub method: &'static str,
    pub step: f64,
    pub rel_tol: Option<f64>,
    /// Set when integration stopped early because the state exceeded
    /// [`BLOW_UP_THRESHOLD`].
    pub blow_up: bool,
}

/// A computed trajectory on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<f64>,
    dim: usize,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.times.iter().enumerate().map(|(i, &t)| (t, self.state(i)))
    }

    fn push(&mut self, t: f64, state: &[f64]) {
        self.times.push(t);
        self.states.extend_from_slice(state);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntegrateError {
    NonPositiveDuration { t_end: f64 },
    NonPositiveStep { step: f64 },
    /// Fixed steps must resolve the fastest kernel oscillation:
    /// `h * max(omega) <= 0.5`.
    StepTooLargeForFrequency { step: f64, omega: f64 },
    /// Adaptive stepping drove the step below the resolvable scale.
    StepUnderflow { t: f64 },
    NonFiniteState { t: f64 },
    DimensionMismatch { expected: usize, found: usize },
    /// The two problems must be identical apart from their kernel lists.
    SpecMismatch,
    Kernel(KernelError),
}

impl fmt::Display for IntegrateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegrateError::NonPositiveDuration { t_end } => {
                write!(f, "integration horizon must be positive, got {t_end}")
            }
            IntegrateError::NonPositiveStep { step } => {
                write!(f, "step must be positive, got {step}")
            }
            IntegrateError::StepTooLargeForFrequency { step, omega } => write!(
                f,
                "step {step} cannot resolve kernel frequency {omega} (need h * omega <= 0.5)"
            ),
            IntegrateError::StepUnderflow { t } => {
                write!(f, "adaptive step underflow at t = {t}")
            }
            IntegrateError::NonFiniteState { t } => {
                write!(f, "state became non-finite at t = {t}")
            }
            IntegrateError::DimensionMismatch { expected, found } => {
                write!(f, "initial state has dimension {found}, system needs {expected}")
            }
            IntegrateError::SpecMismatch => {
                write!(f, "problems differ in more than their kernels")
            }
            IntegrateError::Kernel(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for IntegrateError {}

impl From<KernelError> for IntegrateError {
    fn from(e: KernelError) -> Self {
        IntegrateError::Kernel(e)
    }
}

/// Integrate the reduced system from `initial` over `[0, t_end]`.
pub fn integrate_ode(
    system: &AugmentedSystem,
    initial: &[f64],
    t_end: f64,
    method: &OdeMethod,
) -> Result<Trajectory, IntegrateError> {
    if !(t_end > 0.0) {
        return Err(IntegrateError::NonPositiveDuration { t_end });
    }
    if initial.len() != system.dim() {
        return Err(IntegrateError::DimensionMismatch {
            expected: system.dim(),
            found: initial.len(),
        });
    }
    if initial.iter().any(|v| !v.is_finite()) {
        return Err(IntegrateError::NonFiniteState { t: 0.0 });
    }
    match *method {
        OdeMethod::FixedRk4 { step } => rk4_fixed(system, initial, t_end, step),
        OdeMethod::AdaptiveRk45 { rel_tol, abs_tol } => {
            rkf45(system, initial, t_end, rel_tol, abs_tol)
        }
    }
}

fn rk4_fixed(
    system: &AugmentedSystem,
    initial: &[f64],
    t_end: f64,
    step: f64,
) -> Result<Trajectory, IntegrateError> {
    if !(step > 0.0) {
        return Err(IntegrateError::NonPositiveStep { step });
    }
    let dim = system.dim();
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        dim,
        meta: TrajectoryMeta { method: "rk4", step, rel_tol: None, blow_up: false },
    };
    let mut state = initial.to_vec();
    traj.push(0.0, &state);
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut scratch = vec![0.0; dim];
    // Grid times are exact multiples of the step; a shorter final step
    // lands exactly on the horizon when it does not divide evenly.
    let n_full = (t_end / step + 1e-9).floor() as usize;
    let remainder = t_end - n_full as f64 * step;
    let total = n_full + usize::from(remainder > 1e-12 * t_end.max(1.0));
    for i in 0..total {
        let h = if i < n_full { step } else { remainder };
        system.eval(&state, &mut k1);
        stage(&state, &k1, 0.5 * h, &mut scratch);
        system.eval(&scratch, &mut k2);
        stage(&state, &k2, 0.5 * h, &mut scratch);
        system.eval(&scratch, &mut k3);
        stage(&state, &k3, h, &mut scratch);
        system.eval(&scratch, &mut k4);
        for c in 0..dim {
            state[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        let t_next = if i + 1 == total { t_end } else { (i + 1) as f64 * step };
        if state.iter().any(|v| !v.is_finite()) {
            return Err(IntegrateError::NonFiniteState { t: t_next });
        }
        traj.push(t_next, &state);
        if inf_norm(&state) > BLOW_UP_THRESHOLD {
            traj.meta.blow_up = true;
            break;
        }
    }
    Ok(traj)
}

fn stage(base: &[f64], slope: &[f64], factor: f64, out: &mut [f64]) {
    for ((o, b), s) in out.iter_mut().zip(base.iter()).zip(slope.iter()) {
        *o = b + factor * s;
    }
}

/// Fehlberg 4(5) embedded pair.
fn rkf45(
    system: &AugmentedSystem,
    initial: &[f64],
    t_end: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Trajectory, IntegrateError> {
    const A: [[f64; 5]; 5] = [
        [0.25, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
        [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
        [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
        [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
    ];
    const B5: [f64; 6] = [
        16.0 / 135.0,
        0.0,
        6656.0 / 12825.0,
        28561.0 / 56430.0,
        -9.0 / 50.0,
        2.0 / 55.0,
    ];
    const B4: [f64; 6] =
        [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -0.2, 0.0];

    let dim = system.dim();
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        dim,
        meta: TrajectoryMeta {
            method: "rkf45",
            step: 0.0,
            rel_tol: Some(rel_tol),
            blow_up: false,
        },
    };
    let mut state = initial.to_vec();
    let mut t = 0.0;
    traj.push(t, &state);
    let mut h = (t_end / 100.0).min(1e-2);
    traj.meta.step = h;
    let mut k = [(); 6].map(|_| vec![0.0; dim]);
    let mut scratch = vec![0.0; dim];
    let mut guard = 0usize;
    while t < t_end - 1e-12 * t_end.max(1.0) {
        guard += 1;
        if guard > 50_000_000 {
            return Err(IntegrateError::StepUnderflow { t });
        }
        h = h.min(t_end - t);
        if h < 16.0 * f64::EPSILON * t.max(1.0) {
            return Err(IntegrateError::StepUnderflow { t });
        }
        system.eval(&state, &mut k[0]);
        for (s, row) in A.iter().enumerate() {
            for i in 0..dim {
                let mut acc = state[i];
                for (j, kj) in k.iter().enumerate().take(s + 1) {
                    acc += h * row[j] * kj[i];
                }
                scratch[i] = acc;
            }
            let (_, tail) = k.split_at_mut(s + 1);
            system.eval(&scratch, &mut tail[0]);
        }
        let mut err_ratio = 0.0f64;
        let mut next = vec![0.0; dim];
        for i in 0..dim {
            let mut y5 = state[i];
            let mut y4 = state[i];
            for s in 0..6 {
                y5 += h * B5[s] * k[s][i];
                y4 += h * B4[s] * k[s][i];
            }
            next[i] = y5;
            let scale = abs_tol + rel_tol * state[i].abs().max(y5.abs());
            err_ratio = err_ratio.max(((y5 - y4) / scale).abs());
        }
        if err_ratio <= 1.0 {
            t += h;
            state = next;
            if state.iter().any(|v| !v.is_finite()) {
                return Err(IntegrateError::NonFiniteState { t });
            }
            traj.push(t, &state);
            if inf_norm(&state) > BLOW_UP_THRESHOLD {
                traj.meta.blow_up = true;
                break;
            }
        }
        let scale = if err_ratio > 0.0 {
            (0.9 * err_ratio.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= scale;
    }
    Ok(traj)
}

/// Per-kernel precomputed data for the direct integrator.
struct KernelTables {
    weight: f64,
    /// Kernel values on the step grid: `alpha(m h)`.
    grid: Vec<f64>,
    /// Kernel values on the half-offset grid: `alpha(m h + h/2)`.
    half: Vec<f64>,
}

/// Direct integration of the delay problem on a uniform grid of step `h`
/// over `[0, n h]` with `n = round(t_end / h)`.
///
/// Each right-hand-side evaluation reconstructs the delay term as the
/// trapezoid convolution of the stored solution plus the kernel tail
/// against the history function (closed form for constant histories,
/// window-doubled quadrature otherwise). States at Runge-Kutta stage points
/// enter through the final, linearly interpolated partial panel.
pub fn integrate_direct(
    spec: &DelaySystemSpec,
    t_end: f64,
    h: f64,
) -> Result<Trajectory, IntegrateError> {
    integrate_direct_full(spec, t_end, h).map(|(traj, _)| traj)
}

/// As [`integrate_direct`], additionally returning the delay-term values on
/// the solution grid (width `D` per step).
pub(crate) fn integrate_direct_full(
    spec: &DelaySystemSpec,
    t_end: f64,
    h: f64,
) -> Result<(Trajectory, Vec<f64>), IntegrateError> {
    if !(t_end > 0.0) {
        return Err(IntegrateError::NonPositiveDuration { t_end });
    }
    if !(h > 0.0) {
        return Err(IntegrateError::NonPositiveStep { step: h });
    }
    let omega_max = spec
        .kernels()
        .iter()
        .flat_map(|k| k.oscillations())
        .fold(0.0f64, |acc, o| acc.max(o.omega.abs()));
    if h * omega_max > 0.5 {
        return Err(IntegrateError::StepTooLargeForFrequency { step: h, omega: omega_max });
    }
    let n = (t_end / h).round().max(1.0) as usize;

    let dim = spec.dim();
    let d = spec.delayed_dim();
    let tables: Vec<KernelTables> = spec
        .kernels()
        .iter()
        .zip(spec.weights().iter())
        .map(|(kernel, &weight)| KernelTables {
            weight,
            grid: (0..=n).map(|m| kernel.eval(m as f64 * h)).collect(),
            half: (0..n).map(|m| kernel.eval(m as f64 * h + 0.5 * h)).collect(),
        })
        .collect();
    let history_tail = HistoryTail::new(spec);

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        dim,
        meta: TrajectoryMeta { method: "direct-rk4", step: h, rel_tol: None, blow_up: false },
    };
    let mut delay_trace: Vec<f64> = Vec::with_capacity((n + 1) * dim);

    let mut state = spec.history_at_zero();
    traj.push(0.0, &state);

    // Flattened delayed coordinates of all stored grid states.
    let mut past_d: Vec<f64> = Vec::with_capacity((n + 1) * d);
    past_d.extend_from_slice(&state[..d]);

    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut scratch = vec![0.0; dim];
    let mut z = vec![0.0; dim];

    // Base convolution sums per kernel and delayed coordinate, for the three
    // stage offsets of the current step.
    let n_k = tables.len();
    let mut base_now = vec![0.0; n_k * d];
    let mut base_half = vec![0.0; n_k * d];
    let mut base_next = vec![0.0; n_k * d];
    let mut hist_now = vec![0.0; n_k * d];
    let mut hist_half = vec![0.0; n_k * d];
    let mut hist_next = vec![0.0; n_k * d];

    for i in 0..n {
        let t = i as f64 * h;
        for (kk, tab) in tables.iter().enumerate() {
            for c in 0..d {
                let idx = kk * d + c;
                base_now[idx] = grid_convolution(&tab.grid, &past_d, i, c, d, h, 0);
                base_half[idx] = grid_convolution(&tab.half, &past_d, i, c, d, h, 0);
                base_next[idx] = grid_convolution(&tab.grid, &past_d, i, c, d, h, 1);
            }
        }
        history_tail.fill(spec, t, &mut hist_now)?;
        history_tail.fill(spec, t + 0.5 * h, &mut hist_half)?;
        history_tail.fill(spec, t + h, &mut hist_next)?;

        // Stage 1 at time t: the grid sum is complete, no partial panel.
        assemble_delay(&tables, &base_now, &hist_now, None, d, &mut z);
        delay_trace.extend_from_slice(&z);
        spec.rhs().eval(&state, &z, &mut k1);

        // Stages 2 and 3 at time t + h/2.
        stage(&state, &k1, 0.5 * h, &mut scratch);
        assemble_delay(
            &tables,
            &base_half,
            &hist_half,
            Some(PartialPanel { width: 0.5 * h, at_prev: HalfOffset::Half, prev: &state[..d], current: &scratch[..d] }),
            d,
            &mut z,
        );
        spec.rhs().eval(&scratch, &z, &mut k2);

        stage(&state, &k2, 0.5 * h, &mut scratch);
        assemble_delay(
            &tables,
            &base_half,
            &hist_half,
            Some(PartialPanel { width: 0.5 * h, at_prev: HalfOffset::Half, prev: &state[..d], current: &scratch[..d] }),
            d,
            &mut z,
        );
        spec.rhs().eval(&scratch, &z, &mut k3);

        // Stage 4 at time t + h.
        stage(&state, &k3, h, &mut scratch);
        assemble_delay(
            &tables,
            &base_next,
            &hist_next,
            Some(PartialPanel { width: h, at_prev: HalfOffset::Full, prev: &state[..d], current: &scratch[..d] }),
            d,
            &mut z,
        );
        spec.rhs().eval(&scratch, &z, &mut k4);

        for c in 0..dim {
            state[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        let t_next = (i + 1) as f64 * h;
        if state.iter().any(|v| !v.is_finite()) {
            return Err(IntegrateError::NonFiniteState { t: t_next });
        }
        traj.push(t_next, &state);
        past_d.extend_from_slice(&state[..d]);
        if inf_norm(&state) > BLOW_UP_THRESHOLD {
            traj.meta.blow_up = true;
            break;
        }
    }

    // Delay term at the final stored grid point.
    let steps_done = traj.len() - 1;
    for (kk, tab) in tables.iter().enumerate() {
        for c in 0..d {
            base_now[kk * d + c] = grid_convolution(&tab.grid, &past_d, steps_done, c, d, h, 0);
        }
    }
    history_tail.fill(spec, steps_done as f64 * h, &mut hist_now)?;
    assemble_delay(&tables, &base_now, &hist_now, None, d, &mut z);
    delay_trace.extend_from_slice(&z);

    Ok((traj, delay_trace))
}

/// Composite trapezoid of `alpha(tau - s) x_c(s)` over the stored grid
/// `s = 0 .. i h`, where `tau = (i + offset) h` plus the table's own
/// half-step shift: `table[i + offset - j]` is `alpha(tau - j h)`.
fn grid_convolution(
    table: &[f64],
    past_d: &[f64],
    i: usize,
    c: usize,
    d: usize,
    h: f64,
    offset: usize,
) -> f64 {
    if i == 0 {
        return 0.0;
    }
    let mut acc = 0.5 * (table[i + offset] * past_d[c] + table[offset] * past_d[i * d + c]);
    for j in 1..i {
        acc += table[i + offset - j] * past_d[j * d + c];
    }
    acc * h
}

enum HalfOffset {
    /// Partial panel `[t, t + h/2]`.
    Half,
    /// Partial panel `[t, t + h]`.
    Full,
}

struct PartialPanel<'a> {
    width: f64,
    at_prev: HalfOffset,
    prev: &'a [f64],
    current: &'a [f64],
}

fn assemble_delay(
    tables: &[KernelTables],
    base: &[f64],
    hist: &[f64],
    panel: Option<PartialPanel<'_>>,
    d: usize,
    z: &mut [f64],
) {
    z.fill(0.0);
    for (kk, tab) in tables.iter().enumerate() {
        for c in 0..d {
            let mut value = base[kk * d + c] + hist[kk * d + c];
            if let Some(p) = &panel {
                let alpha_prev = match p.at_prev {
                    HalfOffset::Half => tab.half[0],
                    HalfOffset::Full => tab.grid[1],
                };
                value += 0.5 * p.width * (alpha_prev * p.prev[c] + tab.grid[0] * p.current[c]);
            }
            z[c] += tab.weight * value;
        }
    }
}

/// Kernel tail against the history: `int_tau^inf alpha_k(w) u_d(tau - w) dw`.
struct HistoryTail {
    constant: Option<Vec<f64>>,
}

impl HistoryTail {
    fn new(spec: &DelaySystemSpec) -> Self {
        let constant = match spec.history().closed_form() {
            Some(HistoryForm::Constant(value)) => Some(value),
            _ => None,
        };
        Self { constant }
    }

    fn fill(
        &self,
        spec: &DelaySystemSpec,
        tau: f64,
        out: &mut [f64],
    ) -> Result<(), IntegrateError> {
        let d = spec.delayed_dim();
        for (kk, kernel) in spec.kernels().iter().enumerate() {
            match &self.constant {
                Some(value) => {
                    let scalar = kernel_tail_mass(kernel, tau);
                    for c in 0..d {
                        out[kk * d + c] = scalar * value[c];
                    }
                }
                None => {
                    let vals = history_tail_quadrature(spec, kernel, tau)?;
                    out[kk * d..kk * d + d].copy_from_slice(&vals);
                }
            }
        }
        Ok(())
    }
}

/// Closed-form tail mass `int_tau^inf alpha(w) dw` of a perturbed Erlang
/// kernel: the Erlang upper tail for the constant part plus, per
/// oscillation, the real/imaginary parts of
/// `(sigma / beta)^k e^(-beta tau) sum_{j<k} (beta tau)^j / j!` with
/// `beta = sigma - i omega`.
fn kernel_tail_mass(kernel: &KernelSpec, tau: f64) -> f64 {
    let sigma = kernel.sigma();
    let order = kernel.order();
    let mut total =
        kernel.base_weight() * crate::kernels::erlang_upper_tail(order, sigma, tau);
    for osc in kernel.oscillations() {
        if osc.eps == 0.0 && osc.mu == 0.0 {
            continue;
        }
        let beta = Complex64::new(sigma, -osc.omega);
        let ratio = Complex64::new(sigma, 0.0) / beta;
        let mut power = Complex64::new(1.0, 0.0);
        for _ in 0..order {
            power *= ratio;
        }
        let bt = beta * tau;
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for j in 1..order {
            term = term * bt / j as f64;
            sum += term;
        }
        let tail = power * (-bt).exp() * sum;
        total += osc.eps * tail.re + osc.mu * tail.im;
    }
    total
}

fn history_tail_quadrature(
    spec: &DelaySystemSpec,
    kernel: &KernelSpec,
    tau: f64,
) -> Result<Vec<f64>, IntegrateError> {
    let d = spec.delayed_dim();
    let dim = spec.dim();
    let sigma = kernel.sigma();
    let mut window = {
        let mut t = (kernel.order() as f64 / sigma).max(1.0 / sigma);
        let mut guard = 0;
        while crate::kernels::erlang_upper_tail(kernel.order(), sigma, t) >= 1e-12
            && guard < 200
        {
            t *= 2.0;
            guard += 1;
        }
        t
    };
    let coord = |c: usize, t: f64| {
        let mut buf = vec![0.0; dim];
        spec.history().eval(-t, &mut buf);
        kernel.eval(tau + t) * buf[c]
    };
    let mut totals = vec![0.0; d];
    let mut lo = 0.0;
    let mut previous = f64::INFINITY;
    for _ in 0..=20 {
        let mut increment = 0.0f64;
        for (c, total) in totals.iter_mut().enumerate() {
            let panels = ((window - lo) * sigma).ceil().clamp(16.0, 2048.0) as usize;
            let part = adaptive_simpson(&|t| coord(c, t), lo, window, 1e-13, panels);
            *total += part;
            increment = increment.max(part.abs());
        }
        if lo > 0.0 {
            if increment < 1e-12 {
                return Ok(totals);
            }
            if !increment.is_finite() || increment > 4.0 * previous {
                break;
            }
        }
        previous = increment;
        lo = window;
        window *= 2.0;
    }
    Err(IntegrateError::NonFiniteState { t: tau })
}

/// Numerical certificate for the kernel-continuity estimate: the sup-norm
/// trajectory gap between two problems differing only in their kernels,
/// against the Gronwall bound
/// `L T sup||x_2|| [sum |c_k| ||alpha_k_2 - alpha_k_1||_1] exp(Omega_N L T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityCertificate {
    /// `max_t sum_i |x_2,i(t) - x_1,i(t)|` over the shared grid.
    pub delta_sup: f64,
    /// Right-hand side of the estimate.
    pub bound: f64,
    /// Lipschitz estimate: largest sampled induced 1-norm of the two partial
    /// Jacobians of `F`, inflated by the documented safety factor 1.5.
    pub lipschitz: f64,
    /// `sum_k |c_k| ||alpha_k_2 - alpha_k_1||_1`.
    pub kernel_distance: f64,
    /// `1 + sum_k |c_k| ||alpha_k_1||_1`.
    pub omega_n: f64,
    pub satisfied: bool,
}

/// Integrate both problems and evaluate the continuity estimate.
///
/// The Lipschitz constant is estimated by sampling finite-difference
/// Jacobians of `F` along the visited states (a numerical check, not a
/// proof; the sampled value is reported in the certificate).
pub fn continuity_gap(
    spec1: &DelaySystemSpec,
    spec2: &DelaySystemSpec,
    t_end: f64,
    h: f64,
) -> Result<ContinuityCertificate, IntegrateError> {
    if !spec1.same_problem_except_kernels(spec2) {
        return Err(IntegrateError::SpecMismatch);
    }
    let (traj1, z1) = integrate_direct_full(spec1, t_end, h)?;
    let (traj2, z2) = integrate_direct_full(spec2, t_end, h)?;
    let dim = spec1.dim();
    let steps = traj1.len().min(traj2.len());
    let t_shared = traj1.time(steps - 1).min(traj2.time(steps - 1));

    let mut delta_sup = 0.0f64;
    for i in 0..steps {
        let gap: f64 = traj1
            .state(i)
            .iter()
            .zip(traj2.state(i).iter())
            .map(|(a, b)| (b - a).abs())
            .sum();
        delta_sup = delta_sup.max(gap);
    }

    // Kernel L1 quantities.
    let mut kernel_distance = 0.0;
    let mut omega_n = 1.0;
    for ((k1, k2), &c) in spec1
        .kernels()
        .iter()
        .zip(spec2.kernels().iter())
        .zip(spec1.weights().iter())
    {
        kernel_distance += c.abs() * kernel_difference_norm(k2, k1, 1e-8)?;
        omega_n += c.abs() * k1.l1_norm(1e-8)?;
    }

    // Lipschitz estimate over sampled visited states of both runs.
    let mut lipschitz = 0.0f64;
    let sample_stride = (steps / 50).max(1);
    let mut sample = |traj: &Trajectory, z: &Vec<f64>| {
        for i in (0..steps).step_by(sample_stride) {
            let x = traj.state(i);
            let zv = &z[i * dim..(i + 1) * dim];
            let (jx, jz) = field_jacobians(spec1, x, zv);
            lipschitz = lipschitz.max(jx.induced_one_norm()).max(jz.induced_one_norm());
        }
    };
    sample(&traj1, &z1);
    sample(&traj2, &z2);
    lipschitz *= 1.5;

    // sup-norm of the second solution over history and forward grid.
    let mut sup_x2 = (0..steps)
        .map(|i| one_norm(traj2.state(i)))
        .fold(0.0f64, f64::max);
    let t_hist = spec2
        .kernels()
        .iter()
        .map(|k| k.truncation_time(1e-10).unwrap_or(1.0))
        .fold(1.0f64, f64::max);
    let mut buf = vec![0.0; dim];
    for i in 0..=200 {
        let tau = -t_hist * i as f64 / 200.0;
        spec2.history().eval(tau, &mut buf);
        sup_x2 = sup_x2.max(one_norm(&buf));
    }

    let bound = lipschitz
        * t_shared
        * sup_x2
        * kernel_distance
        * (omega_n * lipschitz * t_shared).exp();
    let satisfied = delta_sup <= bound * (1.0 + 1e-9);
    Ok(ContinuityCertificate { delta_sup, bound, lipschitz, kernel_distance, omega_n, satisfied })
}

/// Finite-difference Jacobians of `F(x, z)` with respect to both arguments.
fn field_jacobians(spec: &DelaySystemSpec, x: &[f64], z: &[f64]) -> (Matrix, Matrix) {
    let dim = spec.dim();
    let rhs = spec.rhs();
    let mut f0 = vec![0.0; dim];
    rhs.eval(x, z, &mut f0);
    let mut fp = vec![0.0; dim];
    let mut jx = Matrix::zeros(dim);
    let mut jz = Matrix::zeros(dim);
    let mut xp = x.to_vec();
    let mut zp = z.to_vec();
    for j in 0..dim {
        let hx = f64::EPSILON.sqrt() * x[j].abs().max(1.0);
        xp[j] = x[j] + hx;
        rhs.eval(&xp, z, &mut fp);
        xp[j] = x[j];
        for i in 0..dim {
            jx[(i, j)] = (fp[i] - f0[i]) / hx;
        }
        let hz = f64::EPSILON.sqrt() * z[j].abs().max(1.0);
        zp[j] = z[j] + hz;
        rhs.eval(x, &zp, &mut fp);
        zp[j] = z[j];
        for i in 0..dim {
            jz[(i, j)] = (fp[i] - f0[i]) / hz;
        }
    }
    (jx, jz)
}
