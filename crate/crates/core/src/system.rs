//! Delay-system specifications: right-hand sides, history functions, and the
//! validated problem description consumed by the chain transform and the
//! direct integrator.

use crate::kernels::KernelSpec;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::Matrix;

/// Right-hand side `F(x, z)` of a delay system, where `z` is the value of the
/// delay operator. Implementations must be pure: concurrent calls with
/// distinct output buffers are safe.
pub trait VectorField: Send + Sync {
    /// State dimension `D`.
    fn dim(&self) -> usize;
    /// Write `F(state, delayed)` into `out` (length `D`).
    fn eval(&self, state: &[f64], delayed: &[f64], out: &mut [f64]);
}

/// Closed forms a history function may expose so induced integrals can be
/// evaluated exactly instead of by quadrature.
#[derive(Debug, Clone, PartialEq)]
pub enum HistoryForm {
    /// `u(s) = value` for all `s <= 0`.
    Constant(Vec<f64>),
    /// `u(s) = value * e^(rate * s)` for `s <= 0`, with `rate > 0` so that
    /// kernel-weighted integrals converge.
    Exponential { rate: f64, value: Vec<f64> },
}

/// Initial function `u(tau)` on `tau <= 0`.
pub trait History: Send + Sync {
    fn dim(&self) -> usize;
    /// Write `u(tau)` into `out` (length `D`), `tau <= 0`.
    fn eval(&self, tau: f64, out: &mut [f64]);
    /// Closed form, if the implementation has one.
    fn closed_form(&self) -> Option<HistoryForm> {
        None
    }
}

/// Constant history `u(s) = value`.
#[derive(Debug, Clone)]
pub struct ConstantHistory {
    value: Vec<f64>,
}

impl ConstantHistory {
    pub fn new(value: Vec<f64>) -> Self {
        Self { value }
    }

    pub fn value(&self) -> &[f64] {
        &self.value
    }
}

impl History for ConstantHistory {
    fn dim(&self) -> usize {
        self.value.len()
    }

    fn eval(&self, _tau: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.value);
    }

    fn closed_form(&self) -> Option<HistoryForm> {
        Some(HistoryForm::Constant(self.value.clone()))
    }
}

/// Exponentially decaying history `u(s) = value * e^(rate s)`, `rate > 0`.
#[derive(Debug, Clone)]
pub struct ExponentialHistory {
    rate: f64,
    value: Vec<f64>,
}

impl ExponentialHistory {
    pub fn new(rate: f64, value: Vec<f64>) -> Self {
        assert!(rate > 0.0, "history growth rate must be positive");
        Self { rate, value }
    }
}

impl History for ExponentialHistory {
    fn dim(&self) -> usize {
        self.value.len()
    }

    fn eval(&self, tau: f64, out: &mut [f64]) {
        #[allow(unused_imports)]
        use num_traits::Float;
        let scale = (self.rate * tau).exp();
        for (o, v) in out.iter_mut().zip(self.value.iter()) {
            *o = scale * v;
        }
    }

    fn closed_form(&self) -> Option<HistoryForm> {
        Some(HistoryForm::Exponential { rate: self.rate, value: self.value.clone() })
    }
}

/// History given by an arbitrary callable (evaluated by quadrature).
pub struct FnHistory<F: Fn(f64, &mut [f64]) + Send + Sync> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64, &mut [f64]) + Send + Sync> FnHistory<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(f64, &mut [f64]) + Send + Sync> History for FnHistory<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, tau: f64, out: &mut [f64]) {
        (self.f)(tau, out)
    }
}

/// Linear right-hand side `F(x, z) = A x + B z`.
#[derive(Debug, Clone)]
pub struct LinearField {
    a: Matrix,
    b: Matrix,
}

impl LinearField {
    pub fn new(a: Matrix, b: Matrix) -> Self {
        assert_eq!(a.dim(), b.dim());
        Self { a, b }
    }

    pub fn state_matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn delay_matrix(&self) -> &Matrix {
        &self.b
    }
}

impl VectorField for LinearField {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn eval(&self, state: &[f64], delayed: &[f64], out: &mut [f64]) {
        let n = self.a.dim();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = 0.0;
            let row_a = self.a.row(i);
            let row_b = self.b.row(i);
            for j in 0..n {
                acc += row_a[j] * state[j] + row_b[j] * delayed[j];
            }
            *o = acc;
        }
    }
}

/// Right-hand side wrapping a closure.
pub struct FnField<F: Fn(&[f64], &[f64], &mut [f64]) + Send + Sync> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &[f64], &mut [f64]) + Send + Sync> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64], &[f64], &mut [f64]) + Send + Sync> VectorField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, state: &[f64], delayed: &[f64], out: &mut [f64]) {
        (self.f)(state, delayed, out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpecError {
    EmptyKernelList,
    /// All kernels in a system must share one decay rate.
    SigmaMismatch { expected: f64, found: f64, index: usize },
    /// Kernel at list position `index` (0-based) must have Erlang order
    /// `index + 1`: the auxiliary chain feeds each stage from the previous
    /// order.
    OrderMismatch { expected: usize, found: usize, index: usize },
    WeightCountMismatch { kernels: usize, weights: usize },
    /// Requires `1 <= delayed_dim <= dim`.
    DimensionRange { dim: usize, delayed_dim: usize },
    RhsDimensionMismatch { expected: usize, found: usize },
    HistoryDimensionMismatch { expected: usize, found: usize },
    NonFiniteWeight { index: usize },
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecError::EmptyKernelList => write!(f, "kernel list must not be empty"),
            SpecError::SigmaMismatch { expected, found, index } => write!(
                f,
                "kernel {index} has decay rate {found} but the system uses {expected}"
            ),
            SpecError::OrderMismatch { expected, found, index } => write!(
                f,
                "kernel {index} must have Erlang order {expected}, got {found}"
            ),
            SpecError::WeightCountMismatch { kernels, weights } => write!(
                f,
                "got {weights} weights for {kernels} kernels"
            ),
            SpecError::DimensionRange { dim, delayed_dim } => write!(
                f,
                "delayed dimension must satisfy 1 <= d <= D, got d = {delayed_dim}, D = {dim}"
            ),
            SpecError::RhsDimensionMismatch { expected, found } => write!(
                f,
                "right-hand side has dimension {found}, system needs {expected}"
            ),
            SpecError::HistoryDimensionMismatch { expected, found } => write!(
                f,
                "history has dimension {found}, system needs {expected}"
            ),
            SpecError::NonFiniteWeight { index } => {
                write!(f, "weight {index} is not finite")
            }
        }
    }
}

impl core::error::Error for SpecError {}

/// A distributed-delay problem: `dx/dt = F(x, R x)` where the delay operator
/// `R` is a weighted sum of kernel convolutions against the first
/// `delayed_dim` coordinates of the state.
#[derive(Clone)]
pub struct DelaySystemSpec {
    dim: usize,
    delayed_dim: usize,
    kernels: Vec<KernelSpec>,
    weights: Vec<f64>,
    rhs: Arc<dyn VectorField>,
    history: Arc<dyn History>,
}

impl DelaySystemSpec {
    pub fn new(
        dim: usize,
        delayed_dim: usize,
        kernels: Vec<KernelSpec>,
        weights: Vec<f64>,
        rhs: Arc<dyn VectorField>,
        history: Arc<dyn History>,
    ) -> Result<Self, SpecError> {
        if kernels.is_empty() {
            return Err(SpecError::EmptyKernelList);
        }
        if dim == 0 || delayed_dim == 0 || delayed_dim > dim {
            return Err(SpecError::DimensionRange { dim, delayed_dim });
        }
        if weights.len() != kernels.len() {
            return Err(SpecError::WeightCountMismatch {
                kernels: kernels.len(),
                weights: weights.len(),
            });
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(SpecError::NonFiniteWeight { index: i });
        }
        let sigma = kernels[0].sigma();
        for (i, k) in kernels.iter().enumerate() {
            if k.sigma() != sigma {
                return Err(SpecError::SigmaMismatch {
                    expected: sigma,
                    found: k.sigma(),
                    index: i,
                });
            }
            if k.order() != i + 1 {
                return Err(SpecError::OrderMismatch {
                    expected: i + 1,
                    found: k.order(),
                    index: i,
                });
            }
        }
        if rhs.dim() != dim {
            return Err(SpecError::RhsDimensionMismatch { expected: dim, found: rhs.dim() });
        }
        if history.dim() != dim {
            return Err(SpecError::HistoryDimensionMismatch {
                expected: dim,
                found: history.dim(),
            });
        }
        Ok(Self { dim, delayed_dim, kernels, weights, rhs, history })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delayed_dim(&self) -> usize {
        self.delayed_dim
    }

    pub fn kernels(&self) -> &[KernelSpec] {
        &self.kernels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sigma(&self) -> f64 {
        self.kernels[0].sigma()
    }

    pub fn rhs(&self) -> &Arc<dyn VectorField> {
        &self.rhs
    }

    pub fn history(&self) -> &Arc<dyn History> {
        &self.history
    }

    /// Oscillation counts `M_k` per kernel.
    pub fn oscillation_counts(&self) -> Vec<usize> {
        self.kernels.iter().map(|k| k.oscillations().len()).collect()
    }

    /// The same problem with a replacement kernel list (weights, dimensions,
    /// right-hand side and history shared). Used for kernel-perturbation
    /// studies.
    pub fn with_kernels(&self, kernels: Vec<KernelSpec>) -> Result<Self, SpecError> {
        Self::new(
            self.dim,
            self.delayed_dim,
            kernels,
            self.weights.clone(),
            Arc::clone(&self.rhs),
            Arc::clone(&self.history),
        )
    }

    /// The same problem with a replacement history function.
    pub fn with_history(&self, history: Arc<dyn History>) -> Result<Self, SpecError> {
        Self::new(
            self.dim,
            self.delayed_dim,
            self.kernels.clone(),
            self.weights.clone(),
            Arc::clone(&self.rhs),
            history,
        )
    }

    /// True when `other` differs from `self` at most in its kernel list
    /// (same shapes and the very same shared right-hand side and history).
    pub fn same_problem_except_kernels(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.delayed_dim == other.delayed_dim
            && self.weights == other.weights
            && Arc::ptr_eq(&self.rhs, &other.rhs)
            && Arc::ptr_eq(&self.history, &other.history)
    }

    /// Projection `J x`: keeps the first `delayed_dim` coordinates, zeroes
    /// the rest.
    pub fn project_delayed(&self, state: &[f64], out: &mut [f64]) {
        out[..self.delayed_dim].copy_from_slice(&state[..self.delayed_dim]);
        for o in out[self.delayed_dim..self.dim].iter_mut() {
            *o = 0.0;
        }
    }

    /// History value at time 0.
    pub fn history_at_zero(&self) -> Vec<f64> {
        let mut u0 = vec![0.0; self.dim];
        self.history.eval(0.0, &mut u0);
        u0
    }
}

impl fmt::Debug for DelaySystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DelaySystemSpec")
            .field("dim", &self.dim)
            .field("delayed_dim", &self.delayed_dim)
            .field("kernels", &self.kernels)
            .field("weights", &self.weights)
            .finish_non_exhaustive()
    }
}
