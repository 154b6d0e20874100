//! Oscillation-perturbed Erlang memory kernels.
//!
//! A kernel is an Erlang density of integer order `k` and decay rate `sigma`
//! multiplied by a constant weight plus a finite superposition of sinusoids:
//!
//! ```text
//! alpha(t) = sigma^k t^(k-1) e^(-sigma t) / (k-1)!
//!            * [ a + sum_n (eps_n cos(omega_n t) + mu_n sin(omega_n t)) ]
//! ```
//!
//! Oscillation amplitudes may push the kernel below zero; the L1 norm
//! integrates the absolute value. All evaluation is pure, and `KernelSpec`
//! is an immutable value safe to share across threads.

use crate::quad::adaptive_simpson;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

/// One sinusoidal perturbation term: `eps cos(omega t) + mu sin(omega t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillation {
    pub eps: f64,
    pub mu: f64,
    pub omega: f64,
}

/// A perturbed Erlang memory kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    order: usize,
    sigma: f64,
    base_weight: f64,
    oscillations: Vec<Oscillation>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelError {
    /// Erlang order must be at least 1.
    InvalidOrder { order: usize },
    /// Decay rate must be a positive finite real.
    InvalidSigma { sigma: f64 },
    /// An amplitude or frequency is NaN or infinite.
    NonFiniteParameter,
    /// Tail tolerances must be positive.
    InvalidTolerance { tol: f64 },
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelError::InvalidOrder { order } => {
                write!(f, "kernel order must be >= 1, got {order}")
            }
            KernelError::InvalidSigma { sigma } => {
                write!(f, "kernel decay rate must be positive and finite, got {sigma}")
            }
            KernelError::NonFiniteParameter => {
                write!(f, "kernel amplitudes and frequencies must be finite")
            }
            KernelError::InvalidTolerance { tol } => {
                write!(f, "tail tolerance must be positive, got {tol}")
            }
        }
    }
}

impl core::error::Error for KernelError {}

impl KernelSpec {
    pub fn new(
        order: usize,
        sigma: f64,
        base_weight: f64,
        oscillations: Vec<Oscillation>,
    ) -> Result<Self, KernelError> {
        if order == 0 {
            return Err(KernelError::InvalidOrder { order });
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(KernelError::InvalidSigma { sigma });
        }
        if !base_weight.is_finite()
            || oscillations
                .iter()
                .any(|o| !(o.eps.is_finite() && o.mu.is_finite() && o.omega.is_finite()))
        {
            return Err(KernelError::NonFiniteParameter);
        }
        Ok(Self { order, sigma, base_weight, oscillations })
    }

    /// Plain Erlang density of the given order and rate (unit weight, no
    /// oscillations). Integrates to one.
    pub fn pure_erlang(order: usize, sigma: f64) -> Result<Self, KernelError> {
        Self::new(order, sigma, 1.0, Vec::new())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn base_weight(&self) -> f64 {
        self.base_weight
    }

    pub fn oscillations(&self) -> &[Oscillation] {
        &self.oscillations
    }

    /// The Erlang envelope `sigma^k t^(k-1) e^(-sigma t) / (k-1)!`.
    ///
    /// Returns 0 for negative `t` (the kernel is causal).
    pub fn eval_erlang(&self, t: f64) -> f64 {
        erlang_density(self.order, self.sigma, t)
    }

    /// The full kernel value at `t >= 0`.
    ///
    /// With no oscillations (or all amplitudes zero) this is exactly
    /// `base_weight * eval_erlang(t)`, composed of the same floating
    /// operations.
    pub fn eval(&self, t: f64) -> f64 {
        let mut factor = self.base_weight;
        for osc in &self.oscillations {
            let phase = osc.omega * t;
            factor += osc.eps * phase.cos() + osc.mu * phase.sin();
        }
        self.eval_erlang(t) * factor
    }

    /// `|a| + sum(|eps| + |mu|)`: bounds `|alpha(t)| <= amplitude_bound * theta_k(t)`.
    pub fn amplitude_bound(&self) -> f64 {
        self.base_weight.abs()
            + self
                .oscillations
                .iter()
                .map(|o| o.eps.abs() + o.mu.abs())
                .sum::<f64>()
    }

    /// Smallest `T` such that the Erlang-envelope bound on the kernel tail
    /// `int_T^inf |alpha|` falls below `tail_tol`.
    pub fn truncation_time(&self, tail_tol: f64) -> Result<f64, KernelError> {
        if !(tail_tol > 0.0) {
            return Err(KernelError::InvalidTolerance { tol: tail_tol });
        }
        let amp = self.amplitude_bound();
        if amp == 0.0 {
            return Ok(0.0);
        }
        let tail = |t: f64| amp * erlang_upper_tail(self.order, self.sigma, t);
        // Bracket by doubling from the distribution mean, then bisect.
        let mut hi = (self.order as f64 / self.sigma).max(1.0 / self.sigma);
        let mut lo = 0.0;
        let mut doubles = 0;
        while tail(hi) >= tail_tol {
            lo = hi;
            hi *= 2.0;
            doubles += 1;
            if doubles > 200 {
                break;
            }
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if tail(mid) < tail_tol {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Numerical L1 norm `int_0^inf |alpha(t)| dt`, truncated where the
    /// Erlang tail bound drops below `tail_tol` and integrated by adaptive
    /// Simpson quadrature. Accurate to `tail_tol` plus quadrature error.
    pub fn l1_norm(&self, tail_tol: f64) -> Result<f64, KernelError> {
        let t_max = self.truncation_time(tail_tol)?;
        if t_max == 0.0 {
            return Ok(0.0);
        }
        let panels = base_panels_for(self, t_max);
        Ok(adaptive_simpson(
            &|t| self.eval(t).abs(),
            0.0,
            t_max,
            tail_tol / 10.0,
            panels,
        ))
    }
}

/// L1 distance `int_0^inf |b(t) - a(t)| dt` between two kernels.
pub fn kernel_difference_norm(
    a: &KernelSpec,
    b: &KernelSpec,
    tail_tol: f64,
) -> Result<f64, KernelError> {
    let ta = a.truncation_time(0.5 * tail_tol)?;
    let tb = b.truncation_time(0.5 * tail_tol)?;
    let t_max = ta.max(tb);
    if t_max == 0.0 {
        return Ok(0.0);
    }
    let panels = base_panels_for(a, t_max).max(base_panels_for(b, t_max));
    Ok(adaptive_simpson(
        &|t| (b.eval(t) - a.eval(t)).abs(),
        0.0,
        t_max,
        tail_tol / 10.0,
        panels,
    ))
}

/// Erlang density of order `k` and rate `sigma` at `t`.
///
/// Evaluated in log space for large orders to avoid factorial overflow.
pub(crate) fn erlang_density(order: usize, sigma: f64, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    if order == 1 {
        return sigma * (-sigma * t).exp();
    }
    if t == 0.0 {
        return 0.0;
    }
    let k = order as f64;
    let log_density = k * sigma.ln() + (k - 1.0) * t.ln() - sigma * t - ln_factorial(order - 1);
    log_density.exp()
}

/// Regularized upper incomplete gamma `Q(k, sigma t)` for integer `k`:
/// the Erlang tail mass `int_t^inf theta_k(s) ds = e^-x sum_{j<k} x^j / j!`.
pub(crate) fn erlang_upper_tail(order: usize, sigma: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let x = sigma * t;
    // Recurrence over the partial Poisson sum, in log space if needed.
    let mut term = (-x).exp();
    if term == 0.0 {
        // Far tail: work in logs; the sum is dominated by its largest term.
        let mut log_term = -x;
        let mut best = f64::NEG_INFINITY;
        for j in 0..order {
            if j > 0 {
                log_term += x.ln() - (j as f64).ln();
            }
            best = best.max(log_term);
        }
        return best.exp() * order as f64; // crude but only reached below ~1e-300
    }
    let mut sum = term;
    for j in 1..order {
        term *= x / j as f64;
        sum += term;
    }
    sum.min(1.0)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Enough equal panels that each oscillation period and the Erlang peak are
/// seen by the quadrature before adaptivity kicks in.
fn base_panels_for(spec: &KernelSpec, t_max: f64) -> usize {
    let omega_max = spec
        .oscillations
        .iter()
        .fold(0.0f64, |acc, o| acc.max(o.omega.abs()));
    let rate = spec.sigma + omega_max;
    ((t_max * rate).ceil() as usize).clamp(16, 8192)
}
