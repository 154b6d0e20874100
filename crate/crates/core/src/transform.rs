//! Reduction of a distributed-delay system to a finite-dimensional
//! autonomous ODE system.
//!
//! Each Erlang kernel stage contributes one auxiliary chain variable `V_k`;
//! each oscillation term contributes a pair of auxiliary variables
//! `(u, v)` carrying the real and imaginary parts of a complex chain. Only
//! the `d` delayed coordinates are stored per auxiliary block: the trailing
//! `D - d` components of every block are identically zero and are
//! reconstructed as exact zeros when the delay argument is assembled.
//!
//! State layout: `[ x | V_1 .. V_N | u-blocks in (k, n) lexicographic order |
//! v-blocks likewise ]`, which keeps the Jacobian lower-block-triangular
//! structure of the reduced system explicit.

use crate::equilibria::block_delta;
use crate::kernels::{erlang_density, erlang_upper_tail};
use crate::quad::adaptive_simpson;
use crate::system::{DelaySystemSpec, HistoryForm};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;

/// Names one contiguous block of the augmented state vector.
///
/// Kernel and oscillation indices are 0-based here; display code conventionally
/// prints them 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockId {
    /// The original state `x` (`D` slots).
    State,
    /// Erlang chain stage `V_{k+1}` (`d` slots).
    Chain { kernel: usize },
    /// Real part of oscillation chain `(k, n)` (`d` slots).
    OscRe { kernel: usize, osc: usize },
    /// Imaginary part of oscillation chain `(k, n)` (`d` slots).
    OscIm { kernel: usize, osc: usize },
}

/// Index map for the augmented state vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateLayout {
    dim: usize,
    delayed_dim: usize,
    osc_counts: Vec<usize>,
}

impl StateLayout {
    pub fn new(dim: usize, delayed_dim: usize, osc_counts: Vec<usize>) -> Self {
        assert!(delayed_dim >= 1 && delayed_dim <= dim);
        assert!(!osc_counts.is_empty());
        Self { dim, delayed_dim, osc_counts }
    }

    /// Original state dimension `D`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of delayed coordinates `d`.
    pub fn delayed_dim(&self) -> usize {
        self.delayed_dim
    }

    /// Number of kernels `N`.
    pub fn kernel_count(&self) -> usize {
        self.osc_counts.len()
    }

    /// Oscillation counts `M_k` per kernel.
    pub fn osc_counts(&self) -> &[usize] {
        &self.osc_counts
    }

    fn total_osc(&self) -> usize {
        self.osc_counts.iter().sum()
    }

    /// Augmented dimension `r = D + d (N + 2 sum_k M_k)`.
    pub fn dim_augmented(&self) -> usize {
        self.dim + self.delayed_dim * (self.kernel_count() + 2 * self.total_osc())
    }

    pub fn state_range(&self) -> Range<usize> {
        0..self.dim
    }

    /// Slots of chain stage `V_{k+1}`, `kernel` 0-based.
    pub fn chain_range(&self, kernel: usize) -> Range<usize> {
        debug_assert!(kernel < self.kernel_count());
        let start = self.dim + kernel * self.delayed_dim;
        start..start + self.delayed_dim
    }

    fn osc_flat_index(&self, kernel: usize, osc: usize) -> usize {
        debug_assert!(osc < self.osc_counts[kernel]);
        self.osc_counts[..kernel].iter().sum::<usize>() + osc
    }

    /// Slots of the real oscillation block `(kernel, osc)`, both 0-based.
    pub fn osc_re_range(&self, kernel: usize, osc: usize) -> Range<usize> {
        let base = self.dim + self.kernel_count() * self.delayed_dim;
        let start = base + self.osc_flat_index(kernel, osc) * self.delayed_dim;
        start..start + self.delayed_dim
    }

    /// Slots of the imaginary oscillation block `(kernel, osc)`.
    pub fn osc_im_range(&self, kernel: usize, osc: usize) -> Range<usize> {
        let base =
            self.dim + (self.kernel_count() + self.total_osc()) * self.delayed_dim;
        let start = base + self.osc_flat_index(kernel, osc) * self.delayed_dim;
        start..start + self.delayed_dim
    }

    /// All blocks in storage order with their slot ranges.
    pub fn blocks(&self) -> Vec<(BlockId, Range<usize>)> {
        let mut out = Vec::new();
        out.push((BlockId::State, self.state_range()));
        for k in 0..self.kernel_count() {
            out.push((BlockId::Chain { kernel: k }, self.chain_range(k)));
        }
        for k in 0..self.kernel_count() {
            for n in 0..self.osc_counts[k] {
                out.push((BlockId::OscRe { kernel: k, osc: n }, self.osc_re_range(k, n)));
            }
        }
        for k in 0..self.kernel_count() {
            for n in 0..self.osc_counts[k] {
                out.push((BlockId::OscIm { kernel: k, osc: n }, self.osc_im_range(k, n)));
            }
        }
        out
    }
}

/// The reduced autonomous system `dX/dt = G(X)`.
///
/// `eval` is pure; concurrent invocations with distinct buffers are safe.
pub struct AugmentedSystem {
    layout: StateLayout,
    sigma: f64,
    weights: Vec<f64>,
    base_weights: Vec<f64>,
    oscillations: Vec<Vec<crate::kernels::Oscillation>>,
    rhs: Arc<dyn crate::system::VectorField>,
}

impl AugmentedSystem {
    /// Augmented dimension `r`.
    pub fn dim(&self) -> usize {
        self.layout.dim_augmented()
    }

    pub fn layout(&self) -> &StateLayout {
        &self.layout
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Assemble the delay-operator value carried by the auxiliary blocks:
    /// `sum_k c_k [ a_k V_k + sum_n (eps u + mu v) ]`, zero-padded to width
    /// `D`.
    pub fn delayed_argument(&self, state: &[f64], out: &mut [f64]) {
        let d = self.layout.delayed_dim;
        out[..self.layout.dim].fill(0.0);
        for (k, osc_list) in self.oscillations.iter().enumerate() {
            let chain = self.layout.chain_range(k);
            for i in 0..d {
                let mut inner = self.base_weights[k] * state[chain.start + i];
                for (n, osc) in osc_list.iter().enumerate() {
                    let u = self.layout.osc_re_range(k, n).start + i;
                    let v = self.layout.osc_im_range(k, n).start + i;
                    inner += osc.eps * state[u] + osc.mu * state[v];
                }
                out[i] += self.weights[k] * inner;
            }
        }
    }

    /// Evaluate `G(X)` into `out` (both of length `r`).
    pub fn eval(&self, state: &[f64], out: &mut [f64]) {
        debug_assert_eq!(state.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        let d = self.layout.delayed_dim;
        let dim = self.layout.dim;
        let sigma = self.sigma;

        let mut delayed = vec![0.0; dim];
        self.delayed_argument(state, &mut delayed);
        self.rhs.eval(&state[..dim], &delayed, &mut out[..dim]);

        for k in 0..self.layout.kernel_count() {
            let block = self.layout.chain_range(k);
            for i in 0..d {
                let feed = if k == 0 {
                    state[i]
                } else {
                    state[self.layout.chain_range(k - 1).start + i]
                };
                out[block.start + i] = -sigma * state[block.start + i] + sigma * feed;
            }
        }

        for (k, osc_list) in self.oscillations.iter().enumerate() {
            for (n, osc) in osc_list.iter().enumerate() {
                let u = self.layout.osc_re_range(k, n).start;
                let v = self.layout.osc_im_range(k, n).start;
                let linked = k > 0 && n < self.oscillations[k - 1].len();
                for i in 0..d {
                    let (feed_u, feed_v) = if linked {
                        (
                            state[self.layout.osc_re_range(k - 1, n).start + i],
                            state[self.layout.osc_im_range(k - 1, n).start + i],
                        )
                    } else {
                        // First stage of a chain is driven by the delayed
                        // coordinates themselves.
                        (state[i], 0.0)
                    };
                    out[u + i] =
                        -osc.omega * state[v + i] - sigma * state[u + i] + sigma * feed_u;
                    out[v + i] =
                        osc.omega * state[u + i] - sigma * state[v + i] + sigma * feed_v;
                }
            }
        }
    }

}

impl fmt::Debug for AugmentedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AugmentedSystem")
            .field("layout", &self.layout)
            .field("sigma", &self.sigma)
            .field("weights", &self.weights)
            .finish_non_exhaustive()
    }
}

/// Replace the delay term of `spec` with auxiliary chains, producing the
/// reduced autonomous system.
pub fn transform(spec: &DelaySystemSpec) -> AugmentedSystem {
    let layout = StateLayout::new(spec.dim(), spec.delayed_dim(), spec.oscillation_counts());
    AugmentedSystem {
        layout,
        sigma: spec.sigma(),
        weights: spec.weights().to_vec(),
        base_weights: spec.kernels().iter().map(|k| k.base_weight()).collect(),
        oscillations: spec.kernels().iter().map(|k| k.oscillations().to_vec()).collect(),
        rhs: Arc::clone(spec.rhs()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialStateError {
    InvalidTolerance { tol: f64 },
    /// A history integral failed to settle after repeated doubling of the
    /// truncation window.
    NonConvergent { block: BlockId, residual: f64 },
}

impl fmt::Display for InitialStateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialStateError::InvalidTolerance { tol } => {
                write!(f, "tail tolerance must be positive, got {tol}")
            }
            InitialStateError::NonConvergent { block, residual } => write!(
                f,
                "history integral for {block:?} did not converge (last increment {residual:.3e})"
            ),
        }
    }
}

impl core::error::Error for InitialStateError {}

/// Initial state of the reduced system induced by the history function.
///
/// The `x` block is the history at time zero. Each chain block integrates
/// the Erlang stage density against the history; each oscillation block
/// integrates the correspondingly modulated density. Constant and
/// exponential histories use closed forms; anything else falls back to
/// truncated adaptive quadrature with window doubling.
pub fn initial_state(
    spec: &DelaySystemSpec,
    tail_tol: f64,
) -> Result<Vec<f64>, InitialStateError> {
    if !(tail_tol > 0.0) {
        return Err(InitialStateError::InvalidTolerance { tol: tail_tol });
    }
    let layout = StateLayout::new(spec.dim(), spec.delayed_dim(), spec.oscillation_counts());
    let d = spec.delayed_dim();
    let sigma = spec.sigma();
    let mut state = vec![0.0; layout.dim_augmented()];

    let u0 = spec.history_at_zero();
    state[..spec.dim()].copy_from_slice(&u0);

    let closed = spec.history().closed_form();
    for k in 0..layout.kernel_count() {
        let order = k + 1;
        let range = layout.chain_range(k);
        match &closed {
            Some(HistoryForm::Constant(value)) => {
                state[range].copy_from_slice(&value[..d]);
            }
            Some(HistoryForm::Exponential { rate, value }) => {
                let scale = (sigma / (sigma + rate)).powi(order as i32);
                for i in 0..d {
                    state[range.start + i] = scale * value[i];
                }
            }
            None => {
                let vals = history_integral(
                    spec,
                    tail_tol,
                    BlockId::Chain { kernel: k },
                    |t| erlang_density(order, sigma, t),
                )?;
                state[range].copy_from_slice(&vals);
            }
        }
    }

    for k in 0..layout.kernel_count() {
        let order = k + 1;
        for (n, osc) in spec.kernels()[k].oscillations().iter().enumerate() {
            let re_range = layout.osc_re_range(k, n);
            let im_range = layout.osc_im_range(k, n);
            match &closed {
                Some(HistoryForm::Constant(value)) => {
                    let delta = block_delta(sigma, osc.omega, order);
                    for i in 0..d {
                        state[re_range.start + i] = delta.re * value[i];
                        state[im_range.start + i] = delta.im * value[i];
                    }
                }
                Some(HistoryForm::Exponential { rate, value }) => {
                    let base = Complex64::new(sigma, 0.0)
                        / Complex64::new(sigma + rate, -osc.omega);
                    let mut weight = Complex64::new(1.0, 0.0);
                    for _ in 0..order {
                        weight *= base;
                    }
                    for i in 0..d {
                        state[re_range.start + i] = weight.re * value[i];
                        state[im_range.start + i] = weight.im * value[i];
                    }
                }
                None => {
                    let re = history_integral(
                        spec,
                        tail_tol,
                        BlockId::OscRe { kernel: k, osc: n },
                        |t| erlang_density(order, sigma, t) * (osc.omega * t).cos(),
                    )?;
                    let im = history_integral(
                        spec,
                        tail_tol,
                        BlockId::OscIm { kernel: k, osc: n },
                        |t| erlang_density(order, sigma, t) * (osc.omega * t).sin(),
                    )?;
                    state[re_range].copy_from_slice(&re);
                    state[im_range].copy_from_slice(&im);
                }
            }
        }
    }

    Ok(state)
}

/// `int_0^inf w(t) u_j(-t) dt` for the first `d` history coordinates,
/// integrated window by window until the increment drops below tolerance.
fn history_integral(
    spec: &DelaySystemSpec,
    tail_tol: f64,
    block: BlockId,
    weight: impl Fn(f64) -> f64,
) -> Result<Vec<f64>, InitialStateError> {
    let d = spec.delayed_dim();
    let dim = spec.dim();
    let sigma = spec.sigma();
    let order = match block {
        BlockId::Chain { kernel } => kernel + 1,
        BlockId::OscRe { kernel, .. } | BlockId::OscIm { kernel, .. } => kernel + 1,
        BlockId::State => 1,
    };

    // First window: where the bare Erlang envelope tail falls below tolerance.
    let mut window = {
        let mut t = (order as f64 / sigma).max(1.0 / sigma);
        let mut guard = 0;
        while erlang_upper_tail(order, sigma, t) >= tail_tol && guard < 200 {
            t *= 2.0;
            guard += 1;
        }
        t
    };

    let coord = |j: usize, t: f64| {
        let mut buf = vec![0.0; dim];
        spec.history().eval(-t, &mut buf);
        weight(t) * buf[j]
    };

    let mut totals = vec![0.0; d];
    let mut lo = 0.0;
    let mut previous = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for _ in 0..=20 {
        let mut increment = 0.0f64;
        for (j, total) in totals.iter_mut().enumerate() {
            let panels = ((window - lo) * sigma).ceil().clamp(16.0, 4096.0) as usize;
            let part = adaptive_simpson(&|t| coord(j, t), lo, window, tail_tol / 10.0, panels);
            *total += part;
            increment = increment.max(part.abs());
        }
        residual = increment;
        if lo > 0.0 {
            if increment < tail_tol {
                return Ok(totals);
            }
            // Tail contributions should shrink; growth means divergence.
            if !increment.is_finite() || increment > 4.0 * previous {
                break;
            }
        }
        previous = increment;
        lo = window;
        window *= 2.0;
    }
    Err(InitialStateError::NonConvergent { block, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{KernelSpec, Oscillation};
    use crate::system::{ConstantHistory, ExponentialHistory, FnField, FnHistory};

    fn zero_field(dim: usize) -> Arc<dyn crate::system::VectorField> {
        Arc::new(FnField::new(dim, |_: &[f64], _: &[f64], out: &mut [f64]| out.fill(0.0)))
    }

    fn simple_spec(osc_counts: &[usize]) -> DelaySystemSpec {
        let kernels: Vec<KernelSpec> = osc_counts
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                let osc = (0..m)
                    .map(|n| Oscillation { eps: 0.2, mu: 0.1, omega: 0.7 + n as f64 })
                    .collect();
                KernelSpec::new(k + 1, 1.0, 1.0, osc).unwrap()
            })
            .collect();
        let weights = vec![1.0 / osc_counts.len() as f64; osc_counts.len()];
        DelaySystemSpec::new(
            1,
            1,
            kernels,
            weights,
            zero_field(1),
            Arc::new(ConstantHistory::new(vec![1.0])),
        )
        .unwrap()
    }

    #[test]
    fn dimension_formula_plain_chain() {
        let spec = simple_spec(&[0, 0, 0]);
        assert_eq!(transform(&spec).dim(), 1 + 3);
    }

    #[test]
    fn dimension_formula_with_oscillations() {
        let spec = simple_spec(&[1, 2, 0]);
        // D + d (N + 2 sum M) = 1 + 1 (3 + 6) = 10
        assert_eq!(transform(&spec).dim(), 10);
    }

    #[test]
    fn layout_blocks_are_contiguous_and_cover() {
        let layout = StateLayout::new(4, 2, vec![1, 2, 0]);
        let blocks = layout.blocks();
        let mut next = 0;
        for (_, range) in &blocks {
            assert_eq!(range.start, next);
            next = range.end;
        }
        assert_eq!(next, layout.dim_augmented());
        assert_eq!(layout.dim_augmented(), 4 + 2 * (3 + 2 * 3));
    }

    #[test]
    fn constant_history_fixed_point_is_stationary() {
        // With F = 0 and a constant history every auxiliary block starts at
        // its chain fixed point, so G vanishes there.
        let spec = simple_spec(&[1, 1]);
        let system = transform(&spec);
        let x0 = initial_state(&spec, 1e-12).unwrap();
        let mut g = vec![0.0; system.dim()];
        system.eval(&x0, &mut g);
        for (i, gi) in g.iter().enumerate() {
            assert!(gi.abs() < 1e-12, "component {i}: {gi}");
        }
    }

    #[test]
    fn constant_history_chain_blocks_equal_value() {
        let spec = simple_spec(&[1, 1]);
        let x0 = initial_state(&spec, 1e-12).unwrap();
        let layout = transform(&spec).layout().clone();
        for k in 0..2 {
            assert_eq!(x0[layout.chain_range(k)][0], 1.0);
        }
    }

    #[test]
    fn constant_history_oscillation_block_closed_form() {
        // sigma = 1, omega = 1, first-order block: weight (1 + i) / 2.
        let kernels = vec![KernelSpec::new(
            1,
            1.0,
            1.0,
            vec![Oscillation { eps: 0.0, mu: 0.0, omega: 1.0 }],
        )
        .unwrap()];
        let spec = DelaySystemSpec::new(
            1,
            1,
            kernels,
            vec![1.0],
            zero_field(1),
            Arc::new(ConstantHistory::new(vec![2.0])),
        )
        .unwrap();
        let x0 = initial_state(&spec, 1e-12).unwrap();
        let layout = transform(&spec).layout().clone();
        assert!((x0[layout.osc_re_range(0, 0)][0] - 1.0).abs() < 1e-14);
        assert!((x0[layout.osc_im_range(0, 0)][0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exponential_history_closed_form_and_quadrature_agree() {
        // u(s) = e^s u0 against a first-order kernel with sigma = 1 gives
        // V_1(0) = u0 / 2.
        let kernels = vec![KernelSpec::pure_erlang(1, 1.0).unwrap()];
        let closed = DelaySystemSpec::new(
            1,
            1,
            kernels.clone(),
            vec![1.0],
            zero_field(1),
            Arc::new(ExponentialHistory::new(1.0, vec![3.0])),
        )
        .unwrap();
        let x_closed = initial_state(&closed, 1e-12).unwrap();
        assert!((x_closed[1] - 1.5).abs() < 1e-14);

        let quadrature = DelaySystemSpec::new(
            1,
            1,
            kernels,
            vec![1.0],
            zero_field(1),
            Arc::new(FnHistory::new(1, |tau: f64, out: &mut [f64]| {
                out[0] = 3.0 * tau.exp();
            })),
        )
        .unwrap();
        let x_quad = initial_state(&quadrature, 1e-12).unwrap();
        assert!((x_quad[1] - 1.5).abs() < 1e-9, "got {}", x_quad[1]);
    }

    #[test]
    fn zero_history_gives_zero_blocks() {
        let kernels = vec![KernelSpec::new(
            1,
            1.0,
            1.0,
            vec![Oscillation { eps: 0.3, mu: 0.0, omega: 0.8 }],
        )
        .unwrap()];
        let spec = DelaySystemSpec::new(
            1,
            1,
            kernels,
            vec![1.0],
            zero_field(1),
            Arc::new(ConstantHistory::new(vec![0.0])),
        )
        .unwrap();
        let x0 = initial_state(&spec, 1e-10).unwrap();
        assert!(x0.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn growing_history_integral_errors_out() {
        let kernels = vec![KernelSpec::pure_erlang(1, 1.0).unwrap()];
        let spec = DelaySystemSpec::new(
            1,
            1,
            kernels,
            vec![1.0],
            zero_field(1),
            Arc::new(FnHistory::new(1, |tau: f64, out: &mut [f64]| {
                // grows like e^{1.5 |tau|}, faster than the kernel decays
                out[0] = (-1.5 * tau).exp() * (1.0 + 0.1 * (3.0 * tau).sin());
            })),
        )
        .unwrap();
        match initial_state(&spec, 1e-10) {
            Err(InitialStateError::NonConvergent { .. }) => {}
            other => panic!("expected divergence error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let spec = simple_spec(&[0]);
        assert!(matches!(
            initial_state(&spec, 0.0),
            Err(InitialStateError::InvalidTolerance { .. })
        ));
    }

    #[test]
    fn delayed_argument_pads_with_exact_zeros() {
        let kernels = vec![KernelSpec::new(
            1,
            1.0,
            1.0,
            vec![Oscillation { eps: 0.5, mu: 0.2, omega: 1.1 }],
        )
        .unwrap()];
        let rhs = zero_field(3);
        let spec = DelaySystemSpec::new(
            3,
            1,
            kernels,
            vec![1.0],
            rhs,
            Arc::new(ConstantHistory::new(vec![1.0, 2.0, 3.0])),
        )
        .unwrap();
        let system = transform(&spec);
        let mut state = vec![0.0; system.dim()];
        for (i, s) in state.iter_mut().enumerate() {
            *s = 1.0 + i as f64;
        }
        let mut delayed = vec![f64::NAN; 3];
        system.delayed_argument(&state, &mut delayed);
        assert_eq!(delayed[1], 0.0);
        assert_eq!(delayed[2], 0.0);
    }
}
