//! Equilibrium points of the reduced system.
//!
//! At a fixed point the delay operator acts as multiplication by a scalar
//! gain: each oscillation block settles at a complex multiple of the delayed
//! equilibrium coordinates, with the multiplier determined by the chain of
//! first-order stages feeding it. Solving `F(x, gain * J x) = 0` for `x`
//! therefore yields the full augmented equilibrium in closed form.

use crate::linalg::{inf_norm, Matrix};
use crate::logistic::LogisticParams;
use crate::system::DelaySystemSpec;
use crate::transform::{transform, StateLayout};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;

/// One stage of an oscillation chain: `sigma / (sigma - i omega)`, of
/// modulus `sigma / sqrt(sigma^2 + omega^2) <= 1`.
pub(crate) fn delta_factor(sigma: f64, omega: f64) -> Complex64 {
    Complex64::new(sigma, 0.0) / Complex64::new(sigma, -omega)
}

/// Chain multiplier for a block of Erlang order `order` whose stages all
/// carry frequency `omega`: the `order`-fold product of [`delta_factor`].
pub(crate) fn block_delta(sigma: f64, omega: f64, order: usize) -> Complex64 {
    let factor = delta_factor(sigma, omega);
    let mut delta = Complex64::new(1.0, 0.0);
    for _ in 0..order {
        delta *= factor;
    }
    delta
}

/// Complex equilibrium multipliers, one per oscillation block `(k, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSequence {
    values: Vec<Vec<Complex64>>,
}

impl DeltaSequence {
    /// Multiplier of block `(kernel, osc)`, both 0-based.
    pub fn get(&self, kernel: usize, osc: usize) -> Complex64 {
        self.values[kernel][osc]
    }

    pub fn per_kernel(&self) -> &[Vec<Complex64>] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EquilibriumError {
    InvalidSigma { sigma: f64 },
    /// Newton iteration did not reach the requested residual.
    NonConvergence { iterations: usize, residual: f64 },
    /// The Newton system became numerically singular.
    SingularJacobian { condition_estimate: f64 },
    /// The equilibrium denominator vanished; coordinates grow without bound.
    AtInfinity,
    DimensionMismatch { expected: usize, found: usize },
}

impl fmt::Display for EquilibriumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquilibriumError::InvalidSigma { sigma } => {
                write!(f, "decay rate must be positive, got {sigma}")
            }
            EquilibriumError::NonConvergence { iterations, residual } => write!(
                f,
                "Newton did not converge after {iterations} iterations (residual {residual:.3e})"
            ),
            EquilibriumError::SingularJacobian { condition_estimate } => write!(
                f,
                "Newton system is singular (condition estimate {condition_estimate:.3e})"
            ),
            EquilibriumError::AtInfinity => {
                write!(f, "equilibrium denominator vanishes; coordinates diverge")
            }
            EquilibriumError::DimensionMismatch { expected, found } => {
                write!(f, "guess has dimension {found}, system needs {expected}")
            }
        }
    }
}

impl core::error::Error for EquilibriumError {}

/// Multipliers computed from explicit frequencies: block `(k, n)` of Erlang
/// order `k + 1` takes the `(k + 1)`-fold product of its own stage factor.
///
/// `omegas[k]` lists the frequencies of kernel `k` (0-based, order `k + 1`).
pub fn delta_sequence(
    sigma: f64,
    omegas: &[Vec<f64>],
) -> Result<DeltaSequence, EquilibriumError> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(EquilibriumError::InvalidSigma { sigma });
    }
    let values = omegas
        .iter()
        .enumerate()
        .map(|(k, freqs)| {
            freqs
                .iter()
                .map(|&omega| block_delta(sigma, omega, k + 1))
                .collect()
        })
        .collect();
    Ok(DeltaSequence { values })
}

/// Multipliers induced by the actual chain wiring of a system: each block
/// multiplies its own stage factor onto the multiplier of the block feeding
/// it (one factor total where a chain restarts from the delayed state).
///
/// Identical to [`delta_sequence`] whenever chains carry one shared
/// frequency, which is the domain the kernel family is designed for.
pub fn chain_delta_sequence(spec: &DelaySystemSpec) -> DeltaSequence {
    let sigma = spec.sigma();
    let counts = spec.oscillation_counts();
    let mut values: Vec<Vec<Complex64>> = Vec::with_capacity(counts.len());
    for (k, kernel) in spec.kernels().iter().enumerate() {
        let row: Vec<Complex64> = kernel
            .oscillations()
            .iter()
            .enumerate()
            .map(|(n, osc)| {
                let factor = delta_factor(sigma, osc.omega);
                if k > 0 && n < counts[k - 1] {
                    values[k - 1][n] * factor
                } else {
                    factor
                }
            })
            .collect();
        values.push(row);
    }
    DeltaSequence { values }
}

/// The scalar `g` with `R x_e = g * J x_e` at equilibrium:
/// `g = sum_k c_k [ a_k + sum_n (eps Re(delta) + mu Im(delta)) ]`.
pub fn effective_gain(spec: &DelaySystemSpec) -> f64 {
    let deltas = chain_delta_sequence(spec);
    spec.kernels()
        .iter()
        .enumerate()
        .map(|(k, kernel)| {
            let mut inner = kernel.base_weight();
            for (n, osc) in kernel.oscillations().iter().enumerate() {
                let delta = deltas.get(k, n);
                inner += osc.eps * delta.re + osc.mu * delta.im;
            }
            spec.weights()[k] * inner
        })
        .sum()
}

/// A constructed equilibrium of the reduced system.
#[derive(Debug, Clone)]
pub struct EquilibriumPoint {
    layout: StateLayout,
    state: Vec<f64>,
    residual: f64,
}

impl EquilibriumPoint {
    pub fn layout(&self) -> &StateLayout {
        &self.layout
    }

    /// Full augmented state vector in layout order.
    pub fn state(&self) -> &[f64] {
        &self.state
    }

    /// The original-state block `x_e`.
    pub fn x(&self) -> &[f64] {
        &self.state[self.layout.state_range()]
    }

    pub fn chain_block(&self, kernel: usize) -> &[f64] {
        &self.state[self.layout.chain_range(kernel)]
    }

    pub fn osc_re_block(&self, kernel: usize, osc: usize) -> &[f64] {
        &self.state[self.layout.osc_re_range(kernel, osc)]
    }

    pub fn osc_im_block(&self, kernel: usize, osc: usize) -> &[f64] {
        &self.state[self.layout.osc_im_range(kernel, osc)]
    }

    /// Infinity norm of the reduced vector field at this point.
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

/// Assemble the full augmented equilibrium from a root of
/// `F(x, gain * J x) = 0`: chain blocks take the delayed coordinates, each
/// oscillation block its chain multiplier times them.
pub fn assemble_equilibrium(spec: &DelaySystemSpec, x_root: &[f64]) -> EquilibriumPoint {
    let layout = StateLayout::new(spec.dim(), spec.delayed_dim(), spec.oscillation_counts());
    let d = spec.delayed_dim();
    let deltas = chain_delta_sequence(spec);
    let mut state = vec![0.0; layout.dim_augmented()];
    state[..spec.dim()].copy_from_slice(x_root);
    for k in 0..layout.kernel_count() {
        let range = layout.chain_range(k);
        state.copy_within(0..d, range.start);
    }
    for k in 0..layout.kernel_count() {
        for n in 0..layout.osc_counts()[k] {
            let delta = deltas.get(k, n);
            let re = layout.osc_re_range(k, n).start;
            let im = layout.osc_im_range(k, n).start;
            for i in 0..d {
                state[re + i] = delta.re * x_root[i];
                state[im + i] = delta.im * x_root[i];
            }
        }
    }
    let system = transform(spec);
    let mut g = vec![0.0; system.dim()];
    system.eval(&state, &mut g);
    let residual = inf_norm(&g);
    EquilibriumPoint { layout, state, residual }
}

/// Find an equilibrium by damped Newton iteration on the reduced root
/// problem `F(x, gain * J x) = 0`, starting from `x_guess`.
pub fn find_equilibrium(
    spec: &DelaySystemSpec,
    x_guess: &[f64],
    tol: f64,
) -> Result<EquilibriumPoint, EquilibriumError> {
    if x_guess.len() != spec.dim() {
        return Err(EquilibriumError::DimensionMismatch {
            expected: spec.dim(),
            found: x_guess.len(),
        });
    }
    let dim = spec.dim();
    let gain = effective_gain(spec);
    let rhs = spec.rhs();
    let eval = |x: &[f64], out: &mut [f64]| {
        let mut delayed = vec![0.0; dim];
        for i in 0..spec.delayed_dim() {
            delayed[i] = gain * x[i];
        }
        rhs.eval(x, &delayed, out);
    };

    let mut x = x_guess.to_vec();
    let mut f = vec![0.0; dim];
    eval(&x, &mut f);
    let mut residual = inf_norm(&f);
    const MAX_ITER: usize = 100;
    for _ in 0..MAX_ITER {
        if residual <= tol {
            return Ok(assemble_equilibrium(spec, &x));
        }
        // Forward-difference Jacobian of the root function.
        let mut jac = Matrix::zeros(dim);
        let mut f_pert = vec![0.0; dim];
        for j in 0..dim {
            let h = f64::EPSILON.sqrt() * x[j].abs().max(1.0);
            let saved = x[j];
            x[j] = saved + h;
            eval(&x, &mut f_pert);
            x[j] = saved;
            for i in 0..dim {
                jac[(i, j)] = (f_pert[i] - f[i]) / h;
            }
        }
        let neg_f: Vec<f64> = f.iter().map(|v| -v).collect();
        let step = jac.solve(&neg_f).map_err(|e| match e {
            crate::linalg::LinalgError::Singular { condition_estimate } => {
                EquilibriumError::SingularJacobian { condition_estimate }
            }
            _ => EquilibriumError::NonConvergence { iterations: MAX_ITER, residual },
        })?;
        // Damping: halve until the residual decreases.
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> =
                x.iter().zip(step.iter()).map(|(xi, si)| xi + scale * si).collect();
            eval(&trial, &mut f_pert);
            let trial_residual = inf_norm(&f_pert);
            if trial_residual < residual {
                x = trial;
                f.copy_from_slice(&f_pert);
                residual = trial_residual;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if residual <= tol {
        return Ok(assemble_equilibrium(spec, &x));
    }
    Err(EquilibriumError::NonConvergence { iterations: MAX_ITER, residual })
}

/// Closed-form nontrivial equilibrium of the delayed logistic system, all
/// seven coordinates: with `theta = (Omega / sigma)^2` and denominator
/// `(1 + theta)^2 - epsilon (theta - 1)`,
///
/// ```text
/// x = V_1 = V_2 = (1 + theta)^2 K / denom
/// u_1 = (1 + theta) K / denom          v_1 = sqrt(theta) (1 + theta) K / denom
/// u_2 = (1 - theta) K / denom          v_2 = 2 sqrt(theta) K / denom
/// ```
pub fn logistic_equilibrium(
    params: &LogisticParams,
) -> Result<EquilibriumPoint, EquilibriumError> {
    let theta = params.theta();
    let capacity = params.capacity();
    let denom = (1.0 + theta).powi(2) - params.epsilon() * (theta - 1.0);
    if denom.abs() < 1e-12 {
        return Err(EquilibriumError::AtInfinity);
    }
    let scale = capacity / denom;
    let sqrt_theta = theta.sqrt();
    let x = (1.0 + theta).powi(2) * scale;
    let u1 = (1.0 + theta) * scale;
    let v1 = sqrt_theta * (1.0 + theta) * scale;
    let u2 = (1.0 - theta) * scale;
    let v2 = 2.0 * sqrt_theta * scale;

    let layout = StateLayout::new(1, 1, vec![1, 1]);
    // Layout order: [x, V1, V2, u^(1), u^(2), v^(1), v^(2)]
    let state = vec![x, x, x, u1, u2, v1, v2];
    let spec = params.delay_spec_at_capacity();
    let system = transform(&spec);
    let mut g = vec![0.0; system.dim()];
    system.eval(&state, &mut g);
    let residual = inf_norm(&g);
    Ok(EquilibriumPoint { layout, state, residual })
}
