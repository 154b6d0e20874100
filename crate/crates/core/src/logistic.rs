//! The delayed logistic equation as a fully worked example model.
//!
//! Population growth `dx/dt = r x (1 - (R x) / K)` where the delay operator
//! convolves the population history against a second-order Erlang kernel
//! carrying one cosine perturbation of amplitude `epsilon` and frequency
//! `Omega`. The reduction to ODEs produces a seven-dimensional system; this
//! module carries the hand-derived right-hand side, its analytic Jacobian,
//! the closed-form reduced characteristic coefficients, and the
//! three-dimensional subsystem that governs stability when `epsilon = 0`.
//!
//! Hand-derived functions use the interleaved state order
//! `[x, V1, V2, u1, v1, u2, v2]`; the chain transform groups blocks as
//! `[x, V1, V2, u1, u2, v1, v2]`. [`interleave_state`] and [`group_state`]
//! convert between the two.

use crate::bifurcation::{ModelError, ParametricModel};
use crate::kernels::{KernelSpec, Oscillation};
use crate::linalg::Matrix;
use crate::system::{ConstantHistory, DelaySystemSpec, History, VectorField};
use crate::transform::{transform, AugmentedSystem};
use alloc::sync::Arc;
use alloc::vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

/// Parameters of the delayed logistic model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticParams {
    growth: f64,
    capacity: f64,
    sigma: f64,
    omega: f64,
    epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LogisticError {
    /// `growth`, `capacity` and `sigma` must be positive; `omega` nonnegative.
    InvalidParameter { name: &'static str, value: f64 },
    /// The equilibrium denominator `(1 + theta)^2 - epsilon (theta - 1)`
    /// vanished.
    SingularDenominator,
}

impl fmt::Display for LogisticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogisticError::InvalidParameter { name, value } => {
                write!(f, "invalid logistic parameter {name} = {value}")
            }
            LogisticError::SingularDenominator => {
                write!(f, "equilibrium denominator vanishes for these parameters")
            }
        }
    }
}

impl core::error::Error for LogisticError {}

impl LogisticParams {
    pub fn new(
        growth: f64,
        capacity: f64,
        sigma: f64,
        omega: f64,
        epsilon: f64,
    ) -> Result<Self, LogisticError> {
        let positive = [("growth", growth), ("capacity", capacity), ("sigma", sigma)];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(LogisticError::InvalidParameter { name, value });
            }
        }
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(LogisticError::InvalidParameter { name: "omega", value: omega });
        }
        if !epsilon.is_finite() {
            return Err(LogisticError::InvalidParameter { name: "epsilon", value: epsilon });
        }
        Ok(Self { growth, capacity, sigma, omega, epsilon })
    }

    pub fn growth(&self) -> f64 {
        self.growth
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Squared ratio of oscillation frequency to decay rate.
    pub fn theta(&self) -> f64 {
        (self.omega / self.sigma).powi(2)
    }

    /// Growth rate measured in units of the decay rate.
    pub fn mu0(&self) -> f64 {
        self.growth / self.sigma
    }

    /// The delay-system description whose reduction is the 7D system, with
    /// the given history.
    pub fn delay_spec(&self, history: Arc<dyn History>) -> DelaySystemSpec {
        let kernels = vec![
            KernelSpec::new(
                1,
                self.sigma,
                1.0,
                vec![Oscillation { eps: 0.0, mu: 0.0, omega: self.omega }],
            )
            .expect("validated parameters"),
            KernelSpec::new(
                2,
                self.sigma,
                1.0,
                vec![Oscillation { eps: self.epsilon, mu: 0.0, omega: self.omega }],
            )
            .expect("validated parameters"),
        ];
        DelaySystemSpec::new(
            1,
            1,
            kernels,
            vec![0.0, 1.0],
            Arc::new(LogisticField { growth: self.growth, capacity: self.capacity }),
            history,
        )
        .expect("logistic spec is well-formed")
    }

    /// Same, with the constant history `u = K`.
    pub fn delay_spec_at_capacity(&self) -> DelaySystemSpec {
        self.delay_spec(Arc::new(ConstantHistory::new(vec![self.capacity])))
    }

    /// The oscillation-free chain system `(x, V1, V2)` whose spectrum
    /// controls stability when `epsilon = 0`. Equilibria sit at the origin
    /// and at `[K, K, K]`.
    pub fn subsystem_3d(&self) -> AugmentedSystem {
        let kernels = vec![
            KernelSpec::pure_erlang(1, self.sigma).expect("validated parameters"),
            KernelSpec::pure_erlang(2, self.sigma).expect("validated parameters"),
        ];
        let spec = DelaySystemSpec::new(
            1,
            1,
            kernels,
            vec![0.0, 1.0],
            Arc::new(LogisticField { growth: self.growth, capacity: self.capacity }),
            Arc::new(ConstantHistory::new(vec![self.capacity])),
        )
        .expect("logistic 3D spec is well-formed");
        transform(&spec)
    }
}

/// Right-hand side of the delay equation: `F(x, z) = r x (1 - z / K)`.
#[derive(Debug, Clone, Copy)]
pub struct LogisticField {
    growth: f64,
    capacity: f64,
}

impl VectorField for LogisticField {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, state: &[f64], delayed: &[f64], out: &mut [f64]) {
        out[0] = self.growth * state[0] * (1.0 - delayed[0] / self.capacity);
    }
}

/// Hand-derived 7D right-hand side in the interleaved order
/// `[x, V1, V2, u1, v1, u2, v2]`.
pub fn rhs(params: &LogisticParams, state: &[f64; 7]) -> [f64; 7] {
    let [x, v1, v2, u1, w1, u2, w2] = *state;
    let r = params.growth;
    let k = params.capacity;
    let s = params.sigma;
    let om = params.omega;
    let eps = params.epsilon;
    [
        r * x * (1.0 - (v2 + eps * u2) / k),
        -s * v1 + s * x,
        -s * v2 + s * v1,
        -s * u1 - om * w1 + s * x,
        -s * w1 + om * u1,
        -s * u2 - om * w2 + s * u1,
        -s * w2 + om * u2 + s * w1,
    ]
}

/// Analytic Jacobian of [`rhs`] at an arbitrary state (interleaved order).
pub fn jacobian(params: &LogisticParams, state: &[f64; 7]) -> Matrix {
    let r = params.growth;
    let k = params.capacity;
    let s = params.sigma;
    let om = params.omega;
    let eps = params.epsilon;
    let x = state[0];
    let v2 = state[2];
    let u2 = state[5];
    let mut j = Matrix::zeros(7);
    j[(0, 0)] = r * (1.0 - (v2 + eps * u2) / k);
    j[(0, 2)] = -r * x / k;
    j[(0, 5)] = -eps * r * x / k;
    j[(1, 0)] = s;
    j[(1, 1)] = -s;
    j[(2, 1)] = s;
    j[(2, 2)] = -s;
    j[(3, 0)] = s;
    j[(3, 3)] = -s;
    j[(3, 4)] = -om;
    j[(4, 3)] = om;
    j[(4, 4)] = -s;
    j[(5, 3)] = s;
    j[(5, 5)] = -s;
    j[(5, 6)] = -om;
    j[(6, 4)] = s;
    j[(6, 5)] = om;
    j[(6, 6)] = -s;
    j
}

/// Analytic Jacobian of the three-dimensional subsystem at an arbitrary
/// state `[x, V1, V2]`.
pub fn subsystem_jacobian(params: &LogisticParams, state: &[f64; 3]) -> Matrix {
    let r = params.growth;
    let k = params.capacity;
    let s = params.sigma;
    let mut j = Matrix::zeros(3);
    j[(0, 0)] = r * (1.0 - state[2] / k);
    j[(0, 2)] = -r * state[0] / k;
    j[(1, 0)] = s;
    j[(1, 1)] = -s;
    j[(2, 1)] = s;
    j[(2, 2)] = -s;
    j
}

/// Interleaved coordinates of the nontrivial equilibrium, or an error when
/// the denominator vanishes.
pub fn equilibrium_state(params: &LogisticParams) -> Result<[f64; 7], LogisticError> {
    let theta = params.theta();
    let denom = (1.0 + theta).powi(2) - params.epsilon() * (theta - 1.0);
    if denom.abs() < 1e-12 {
        return Err(LogisticError::SingularDenominator);
    }
    let scale = params.capacity / denom;
    let st = theta.sqrt();
    let x = (1.0 + theta).powi(2) * scale;
    Ok([
        x,
        x,
        x,
        (1.0 + theta) * scale,
        st * (1.0 + theta) * scale,
        (1.0 - theta) * scale,
        2.0 * st * scale,
    ])
}

/// Convert a transform-layout state `[x, V1, V2, u1, u2, v1, v2]` to the
/// interleaved order `[x, V1, V2, u1, v1, u2, v2]`.
pub fn interleave_state(grouped: &[f64; 7]) -> [f64; 7] {
    [
        grouped[0], grouped[1], grouped[2], grouped[3], grouped[5], grouped[4], grouped[6],
    ]
}

/// Inverse of [`interleave_state`].
pub fn group_state(interleaved: &[f64; 7]) -> [f64; 7] {
    [
        interleaved[0],
        interleaved[1],
        interleaved[2],
        interleaved[3],
        interleaved[5],
        interleaved[4],
        interleaved[6],
    ]
}

/// Coefficients of the degree-7 characteristic polynomial with the decay
/// rate scaled out, as functions of `(theta, epsilon, mu0)` where
/// `mu = mu0 (1 + theta)^2 / [(1 + theta)^2 - epsilon (theta - 1)]`:
///
/// ```text
/// b1 = 6
/// b2 = 2 theta + 15
/// b3 = 20 + 8 theta + eps mu + mu
/// b4 = theta^2 + 12 theta + 15 + 4 eps mu + 4 mu
/// b5 = 2 theta^2 + 8 theta + 6 + 2 mu theta + 6 mu - eps mu theta + 6 eps mu
/// b6 = theta^2 + 2 theta + 1 + 4 mu theta + 4 mu - 2 eps mu theta + 4 eps mu
/// b7 = -mu [eps (theta - 1) - (theta + 1)^2]
/// ```
///
/// The unscaled coefficients are recovered by multiplying `b_j` with
/// `sigma^j` (see [`crate::stability::scale_coefficients`]).
pub fn reduced_char_coefficients(
    theta: f64,
    epsilon: f64,
    mu0: f64,
) -> Result<[f64; 7], LogisticError> {
    let denom = (1.0 + theta).powi(2) - epsilon * (theta - 1.0);
    if denom.abs() < 1e-12 {
        return Err(LogisticError::SingularDenominator);
    }
    let mu = mu0 * (1.0 + theta).powi(2) / denom;
    let em = epsilon * mu;
    Ok([
        6.0,
        2.0 * theta + 15.0,
        20.0 + 8.0 * theta + em + mu,
        theta * theta + 12.0 * theta + 15.0 + 4.0 * em + 4.0 * mu,
        2.0 * theta * theta + 8.0 * theta + 6.0 + 2.0 * mu * theta + 6.0 * mu - em * theta
            + 6.0 * em,
        theta * theta + 2.0 * theta + 1.0 + 4.0 * mu * theta + 4.0 * mu - 2.0 * em * theta
            + 4.0 * em,
        -mu * (epsilon * (theta - 1.0) - (theta + 1.0).powi(2)),
    ])
}

/// The logistic model as a two-parameter family over `(sigma, epsilon)`,
/// with `growth`, `capacity` and `omega` held fixed. Jacobians are taken at
/// the nontrivial equilibrium.
#[derive(Debug, Clone, Copy)]
pub struct LogisticModel {
    pub growth: f64,
    pub capacity: f64,
    pub omega: f64,
}

impl LogisticModel {
    pub fn params_at(&self, sigma: f64, epsilon: f64) -> Result<LogisticParams, LogisticError> {
        LogisticParams::new(self.growth, self.capacity, sigma, self.omega, epsilon)
    }
}

impl ParametricModel for LogisticModel {
    fn dim(&self) -> usize {
        7
    }

    fn jacobian_at(&self, sigma: f64, epsilon: f64) -> Result<Matrix, ModelError> {
        let params = self
            .params_at(sigma, epsilon)
            .map_err(|_| ModelError::InvalidParameters { sigma, epsilon })?;
        let state = equilibrium_state(&params)
            .map_err(|_| ModelError::Singular { sigma, epsilon })?;
        Ok(jacobian(&params, &state))
    }

    fn is_singular(&self, sigma: f64, epsilon: f64) -> bool {
        if sigma <= 0.0 {
            return true;
        }
        let theta = (self.omega / sigma).powi(2);
        ((1.0 + theta).powi(2) - epsilon * (theta - 1.0)).abs() < 1e-9
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use alloc::vec::Vec;

    fn params(sigma: f64, epsilon: f64) -> LogisticParams {
        LogisticParams::new(2.0, 1.0, sigma, 0.8, epsilon).unwrap()
    }

    #[test]
    fn rhs_vanishes_at_equilibrium() {
        let p = params(1.0, 0.5);
        let eq = equilibrium_state(&p).unwrap();
        let f = rhs(&p, &eq);
        for (i, fi) in f.iter().enumerate() {
            assert!(fi.abs() < 1e-12, "component {i}: {fi}");
        }
    }

    #[test]
    fn rhs_vanishes_at_origin() {
        let p = params(1.0, 0.5);
        let f = rhs(&p, &[0.0; 7]);
        assert!(f.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn population_decouples_from_u2_when_unperturbed() {
        let p = params(1.3, 0.0);
        let mut rng = SplitMix64::new(5);
        for _ in 0..20 {
            let state: [f64; 7] = core::array::from_fn(|_| rng.uniform(-2.0, 2.0));
            let j = jacobian(&p, &state);
            assert_eq!(j[(0, 5)], 0.0);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = params(0.9, 0.4);
        let mut rng = SplitMix64::new(17);
        for _ in 0..100 {
            let state: [f64; 7] = core::array::from_fn(|_| rng.uniform(-1.5, 1.5));
            let j = jacobian(&p, &state);
            for col in 0..7 {
                let h = 1e-6 * state[col].abs().max(1.0);
                let mut plus = state;
                plus[col] += h;
                let mut minus = state;
                minus[col] -= h;
                let fp = rhs(&p, &plus);
                let fm = rhs(&p, &minus);
                for row in 0..7 {
                    let fd = (fp[row] - fm[row]) / (2.0 * h);
                    assert!(
                        (j[(row, col)] - fd).abs() < 1e-6,
                        "entry ({row}, {col}): analytic {} vs fd {fd}",
                        j[(row, col)]
                    );
                }
            }
        }
    }

    #[test]
    fn jacobian_at_unperturbed_equilibrium_is_block_triangular() {
        let p = params(1.3, 0.0);
        let eq = equilibrium_state(&p).unwrap();
        let j = jacobian(&p, &eq);
        let (r, s, om) = (p.growth(), p.sigma(), p.omega());
        let expected = [
            [0.0, 0.0, -r, 0.0, 0.0, 0.0, 0.0],
            [s, -s, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, s, -s, 0.0, 0.0, 0.0, 0.0],
            [s, 0.0, 0.0, -s, -om, 0.0, 0.0],
            [0.0, 0.0, 0.0, om, -s, 0.0, 0.0],
            [0.0, 0.0, 0.0, s, 0.0, -s, -om],
            [0.0, 0.0, 0.0, 0.0, s, om, -s],
        ];
        for (a, row) in expected.iter().enumerate() {
            for (b, want) in row.iter().enumerate() {
                assert!(
                    (j[(a, b)] - want).abs() <= 1e-13,
                    "entry ({a}, {b}): {} vs {want}",
                    j[(a, b)]
                );
            }
        }
    }

    #[test]
    fn trivial_state_is_unstable_for_every_amplitude() {
        for eps in [0.0, 0.4, 1.5, -0.8] {
            let p = params(1.1, eps);
            let j = jacobian(&p, &[0.0; 7]);
            assert_eq!(j[(0, 0)], p.growth());
            let eigs = j.eigenvalues().unwrap();
            assert!(
                eigs.iter().any(|e| (e.re - p.growth()).abs() < 1e-10 && e.im.abs() < 1e-10),
                "spectrum misses the growth rate: {eigs:?}"
            );
        }
    }

    #[test]
    fn transform_of_delay_spec_matches_hand_derived_rhs() {
        let p = params(1.1, 0.6);
        let system = transform(&p.delay_spec_at_capacity());
        assert_eq!(system.dim(), 7);
        let mut rng = SplitMix64::new(23);
        for _ in 0..1000 {
            let grouped: [f64; 7] = core::array::from_fn(|_| rng.uniform(-3.0, 3.0));
            let mut g = vec![0.0; 7];
            system.eval(&grouped, &mut g);
            let f = rhs(&p, &interleave_state(&grouped));
            let g_expected = group_state(&f);
            for i in 0..7 {
                assert!(
                    (g[i] - g_expected[i]).abs() <= 1e-12,
                    "component {i}: transform {} vs direct {}",
                    g[i],
                    g_expected[i]
                );
            }
        }
    }

    #[test]
    fn subsystem_is_three_dimensional_with_expected_fixed_points() {
        let p = params(1.7, 0.0);
        let sub = p.subsystem_3d();
        assert_eq!(sub.dim(), 3);
        let mut g = vec![0.0; 3];
        sub.eval(&[0.0, 0.0, 0.0], &mut g);
        assert!(g.iter().all(|v| v.abs() == 0.0));
        sub.eval(&[1.0, 1.0, 1.0], &mut g);
        assert!(g.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn unperturbed_projection_reproduces_subsystem() {
        // With epsilon = 0 the (x, V1, V2) components of the 7D flow close
        // on themselves and equal the 3D flow exactly.
        let p = params(0.8, 0.0);
        let full = transform(&p.delay_spec_at_capacity());
        let sub = p.subsystem_3d();
        let mut rng = SplitMix64::new(31);
        for _ in 0..200 {
            let grouped: [f64; 7] = core::array::from_fn(|_| rng.uniform(-2.0, 2.0));
            let mut g_full = vec![0.0; 7];
            full.eval(&grouped, &mut g_full);
            let mut g_sub = vec![0.0; 3];
            sub.eval(&grouped[..3], &mut g_sub);
            for i in 0..3 {
                assert!((g_full[i] - g_sub[i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn equilibrium_approaches_capacity_in_limits() {
        // epsilon -> 0
        let mut prev_gap = f64::INFINITY;
        for eps in [0.5, 0.25, 0.1, 0.01] {
            let p = params(1.0, eps);
            let x = equilibrium_state(&p).unwrap()[0];
            let gap = (x - 1.0).abs();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        // theta -> 1 (sigma -> omega)
        let mut prev_gap = f64::INFINITY;
        for sigma in [1.2, 1.0, 0.9, 0.82, 0.801] {
            let p = params(sigma, 0.7);
            let x = equilibrium_state(&p).unwrap()[0];
            let gap = (x - 1.0).abs();
            assert!(gap < prev_gap, "sigma {sigma}: gap {gap} vs {prev_gap}");
            prev_gap = gap;
        }
    }

    #[test]
    fn singular_denominator_detected() {
        // theta = 3 requires epsilon = (1 + 3)^2 / 2 = 8 to blow up.
        let p = LogisticParams::new(2.0, 1.0, 1.0, 3f64.sqrt(), 8.0).unwrap();
        assert!(matches!(
            equilibrium_state(&p),
            Err(LogisticError::SingularDenominator)
        ));
        assert!(matches!(
            reduced_char_coefficients(3.0, 8.0, 2.0),
            Err(LogisticError::SingularDenominator)
        ));
    }

    #[test]
    fn reduced_coefficient_values_at_zero_theta() {
        let b = reduced_char_coefficients(0.0, 0.0, 2.0).unwrap();
        assert_eq!(b[0], 6.0);
        assert_eq!(b[6], 2.0);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(LogisticParams::new(0.0, 1.0, 1.0, 0.8, 0.0).is_err());
        assert!(LogisticParams::new(2.0, 1.0, -1.0, 0.8, 0.0).is_err());
        assert!(LogisticParams::new(2.0, 1.0, 1.0, -0.8, 0.0).is_err());
        assert!(LogisticParams::new(2.0, 1.0, 1.0, 0.8, f64::NAN).is_err());
    }

    #[test]
    fn state_order_conversions_roundtrip() {
        let s: [f64; 7] = core::array::from_fn(|i| i as f64);
        assert_eq!(group_state(&interleave_state(&s)), s);
        let others: Vec<f64> = interleave_state(&s).to_vec();
        assert_eq!(others, vec![0.0, 1.0, 2.0, 3.0, 5.0, 4.0, 6.0]);
    }
}
