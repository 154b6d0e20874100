//! Deterministic verification suites runnable from the command line.
//!
//! Each suite re-derives a family of closed-form or cross-route checks with
//! a seeded generator and fails loudly on the first mismatch.

use crate::error::CliError;
use lct_core::bifurcation::{hopf_point_at, ParametricModel};
use lct_core::equilibria::{find_equilibrium, logistic_equilibrium};
use lct_core::integrators::{continuity_gap, integrate_direct, integrate_ode, OdeMethod};
use lct_core::kernels::{KernelSpec, Oscillation};
use lct_core::linalg::Matrix;
use lct_core::logistic::{self, LogisticModel, LogisticParams};
use lct_core::rng::SplitMix64;
use lct_core::stability::{char_poly, hurwitz_determinants, scale_coefficients, CharPoly};
use lct_core::system::{ConstantHistory, DelaySystemSpec, FnField, LinearField};
use lct_core::transform::{initial_state, transform};
use std::sync::Arc;

pub const SUITES: &[&str] = &[
    "all",
    "dimension",
    "coefficients",
    "scaling",
    "equilibrium",
    "hopf",
    "lct",
    "continuity",
];

pub fn run_suite(name: &str, seed: u64) -> Result<usize, CliError> {
    let canonical = match name {
        // historical alias for the closed-form coefficient oracle
        "appendix-b" => "coefficients",
        other => other,
    };
    let mut checks = 0usize;
    match canonical {
        "all" => {
            for suite in SUITES.iter().filter(|s| **s != "all") {
                checks += run_suite(suite, seed)?;
            }
        }
        "dimension" => checks += dimension_suite(seed)?,
        "coefficients" => checks += coefficients_suite()?,
        "scaling" => checks += scaling_suite(seed)?,
        "equilibrium" => checks += equilibrium_suite()?,
        "hopf" => checks += hopf_suite()?,
        "lct" => checks += lct_suite(seed)?,
        "continuity" => checks += continuity_suite(seed)?,
        other => {
            return Err(CliError::validation(format!(
                "unknown suite '{other}' (available: {})",
                SUITES.join(", ")
            )))
        }
    }
    Ok(checks)
}

fn fail(suite: &str, detail: String) -> CliError {
    CliError::numeric(format!("suite {suite}: {detail}"))
}

fn dimension_suite(seed: u64) -> Result<usize, CliError> {
    let mut rng = SplitMix64::new(seed);
    for _ in 0..200 {
        let dim = 1 + rng.below(4);
        let delayed_dim = 1 + rng.below(dim);
        let n_kernels = 1 + rng.below(3);
        let sigma = rng.uniform(0.3, 2.5);
        let counts: Vec<usize> = (0..n_kernels).map(|_| rng.below(3)).collect();
        let kernels: Vec<KernelSpec> = counts
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                let osc = (0..m)
                    .map(|_| Oscillation {
                        eps: rng.uniform(-1.0, 1.0),
                        mu: rng.uniform(-1.0, 1.0),
                        omega: rng.uniform(0.0, 3.0),
                    })
                    .collect();
                KernelSpec::new(k + 1, sigma, 1.0, osc).expect("valid kernel")
            })
            .collect();
        let spec = DelaySystemSpec::new(
            dim,
            delayed_dim,
            kernels,
            vec![1.0; n_kernels],
            Arc::new(FnField::new(dim, |_: &[f64], _: &[f64], out: &mut [f64]| out.fill(0.0))),
            Arc::new(ConstantHistory::new(vec![0.0; dim])),
        )?;
        let total: usize = counts.iter().sum();
        let expected = dim + delayed_dim * (n_kernels + 2 * total);
        let got = transform(&spec).dim();
        if got != expected {
            return Err(fail("dimension", format!("got {got}, expected {expected}")));
        }
    }
    println!("  dimension: 200 random shapes match the formula");
    Ok(200)
}

fn coefficients_suite() -> Result<usize, CliError> {
    let mut checks = 0;
    for i in 0..10 {
        let sigma = 0.3 + 2.2 * i as f64 / 9.0;
        for j in 0..10 {
            let omega = 2.5 * j as f64 / 9.0;
            for eps in [-0.4, 0.3, 0.8] {
                let params = LogisticParams::new(2.0, 1.0, sigma, omega, eps)?;
                let theta = params.theta();
                if ((1.0 + theta).powi(2) - eps * (theta - 1.0)).abs() < 0.1 {
                    continue;
                }
                let eq = logistic::equilibrium_state(&params)?;
                let extracted = char_poly(&logistic::jacobian(&params, &eq))?;
                let b = logistic::reduced_char_coefficients(theta, eps, params.mu0())?;
                let predicted = scale_coefficients(sigma, &b);
                for (got, want) in extracted.coefficients().iter().zip(predicted.iter()) {
                    if (got - want).abs() > 1e-8 * want.abs().max(1e-6) {
                        return Err(fail(
                            "coefficients",
                            format!("sigma {sigma}, omega {omega}, eps {eps}: {got} vs {want}"),
                        ));
                    }
                }
                checks += 1;
            }
        }
    }
    for theta in [0.0, 0.25, 0.64, 1.0, 2.0] {
        let b = logistic::reduced_char_coefficients(theta, 0.0, 2.0)?;
        let d = hurwitz_determinants(&CharPoly::from_coefficients(b.to_vec()));
        let expected = [
            6.0,
            4.0 * theta + 68.0,
            8.0 * theta * theta + 272.0 * theta + 776.0,
            64.0 * theta.powi(3) + 1216.0 * theta.powi(2) + 6336.0 * theta + 5184.0,
            128.0 * theta.powi(5)
                + 2688.0 * theta.powi(4)
                + 17664.0 * theta.powi(3)
                + 38144.0 * theta.powi(2)
                + 33408.0 * theta
                + 10368.0,
        ];
        for (got, want) in d.iter().zip(expected.iter()) {
            if (got - want).abs() > 1e-8 * want.abs() {
                return Err(fail("coefficients", format!("theta {theta}: {got} vs {want}")));
            }
        }
        if d[5].abs() > 1e-8 * expected[4].max(1.0) {
            return Err(fail("coefficients", format!("theta {theta}: sixth minor {}", d[5])));
        }
        checks += 1;
    }
    println!("  coefficients: {checks} closed-form checks hold to 1e-8");
    Ok(checks)
}

fn scaling_suite(seed: u64) -> Result<usize, CliError> {
    let mut rng = SplitMix64::new(seed ^ 0x5ca1e);
    for _ in 0..100 {
        let b: Vec<f64> = (0..7).map(|_| rng.uniform(-3.0, 3.0)).collect();
        let sigma = rng.uniform(0.4, 2.5);
        let a = scale_coefficients(sigma, &b);
        let db = hurwitz_determinants(&CharPoly::from_coefficients(b));
        let da = hurwitz_determinants(&CharPoly::from_coefficients(a));
        for j in 1..=7usize {
            let factor = sigma.powi((j * (j + 1) / 2) as i32);
            let want = factor * db[j - 1];
            if (da[j - 1] - want).abs() > 1e-9 * want.abs().max(1e-12) {
                return Err(fail("scaling", format!("j = {j}: {} vs {want}", da[j - 1])));
            }
        }
    }
    println!("  scaling: determinant law holds on 100 random coefficient sets");
    Ok(100)
}

fn equilibrium_suite() -> Result<usize, CliError> {
    let mut checks = 0;
    for i in 0..20 {
        let sigma = 0.3 + 2.2 * i as f64 / 19.0;
        for j in 0..20 {
            let eps = -0.8 + 2.0 * j as f64 / 19.0;
            let params = LogisticParams::new(2.0, 1.0, sigma, 0.8, eps)?;
            let theta = params.theta();
            if ((1.0 + theta).powi(2) - eps * (theta - 1.0)).abs() < 0.1 {
                continue;
            }
            let closed = logistic_equilibrium(&params)?;
            if closed.residual() > 1e-10 {
                return Err(fail(
                    "equilibrium",
                    format!("closed-form residual {} at ({sigma}, {eps})", closed.residual()),
                ));
            }
            let spec = params.delay_spec_at_capacity();
            let newton = find_equilibrium(&spec, &[0.9 * closed.x()[0]], 1e-12)?;
            for (a, b) in newton.state().iter().zip(closed.state().iter()) {
                if (a - b).abs() > 1e-10 {
                    return Err(fail("equilibrium", format!("{a} vs {b} at ({sigma}, {eps})")));
                }
            }
            checks += 1;
        }
    }
    println!("  equilibrium: {checks} grid points, residuals <= 1e-10");
    Ok(checks)
}

fn hopf_suite() -> Result<usize, CliError> {
    for growth in [0.5, 1.0, 2.0, 4.0] {
        let model = LogisticModel { growth, capacity: 1.0, omega: 0.8 };
        let point = hopf_point_at(&model, 0.0, (0.05 * growth, 4.0 * growth), 1e-10)?;
        if (point.sigma - 0.5 * growth).abs() > 1e-8 {
            return Err(fail("hopf", format!("growth {growth}: root {}", point.sigma)));
        }
        if !point.lower_positive || point.degenerate {
            return Err(fail("hopf", format!("growth {growth}: degenerate configuration")));
        }
        let jac = model.jacobian_at(point.sigma, 0.0)?;
        let eigs = jac.eigenvalues().map_err(|e| fail("hopf", e.to_string()))?;
        let near_axis = eigs.iter().filter(|e| e.re.abs() < 1e-6).count();
        if near_axis != 2 {
            return Err(fail("hopf", format!("growth {growth}: {near_axis} critical eigenvalues")));
        }
    }
    println!("  hopf: roots at half the growth rate with a clean critical pair");
    Ok(4)
}

fn lct_suite(seed: u64) -> Result<usize, CliError> {
    // Logistic reference point.
    let params = LogisticParams::new(2.0, 1.0, 2.0, 0.8, 0.1)?;
    let spec = params.delay_spec(Arc::new(ConstantHistory::new(vec![0.4])));
    let h = 1e-3;
    let direct = integrate_direct(&spec, 5.0, h)?;
    let system = transform(&spec);
    let x0 = initial_state(&spec, 1e-12)?;
    let ode = integrate_ode(&system, &x0, 5.0, &OdeMethod::FixedRk4 { step: h })?;
    let mut sup = 0.0f64;
    for i in 0..direct.len() {
        sup = sup.max((direct.state(i)[0] - ode.state(i)[0]).abs());
    }
    if sup > 1e-4 {
        return Err(fail("lct", format!("logistic equivalence gap {sup}")));
    }

    // A few random problems from the aligned family.
    let mut rng = SplitMix64::new(seed ^ 0x1c7);
    for trial in 0..5 {
        let spec = random_aligned_spec(&mut rng);
        let direct = integrate_direct(&spec, 5.0, h)?;
        let system = transform(&spec);
        let x0 = initial_state(&spec, 1e-12)?;
        let ode = integrate_ode(&system, &x0, 5.0, &OdeMethod::FixedRk4 { step: h })?;
        let mut sup = 0.0f64;
        for i in 0..direct.len() {
            for c in 0..spec.dim() {
                sup = sup.max((direct.state(i)[c] - ode.state(i)[c]).abs());
            }
        }
        if sup > 1e-3 {
            return Err(fail("lct", format!("trial {trial}: equivalence gap {sup}")));
        }
    }
    println!("  lct: direct and reduced routes agree (logistic {sup:.3e}, 5 random trials)");
    Ok(6)
}

fn continuity_suite(seed: u64) -> Result<usize, CliError> {
    let mut rng = SplitMix64::new(seed ^ 0xc047);
    for trial in 0..20 {
        let spec = random_aligned_spec(&mut rng);
        let perturbed: Vec<KernelSpec> = spec
            .kernels()
            .iter()
            .map(|k| {
                let osc: Vec<Oscillation> = k
                    .oscillations()
                    .iter()
                    .map(|o| Oscillation {
                        eps: o.eps + rng.uniform(-0.1, 0.1),
                        mu: o.mu + rng.uniform(-0.1, 0.1),
                        omega: o.omega,
                    })
                    .collect();
                KernelSpec::new(
                    k.order(),
                    k.sigma(),
                    k.base_weight() + rng.uniform(-0.1, 0.1),
                    osc,
                )
                .expect("valid kernel")
            })
            .collect();
        let spec2 = spec.with_kernels(perturbed)?;
        let cert = continuity_gap(&spec, &spec2, 3.0, 1e-2)?;
        if !cert.satisfied {
            return Err(fail(
                "continuity",
                format!("trial {trial}: gap {} exceeds bound {}", cert.delta_sup, cert.bound),
            ));
        }
    }
    println!("  continuity: 20 perturbation certificates satisfied");
    Ok(20)
}

/// Same random family as the library test suites: aligned chains,
/// contractive linear right-hand side, constant history.
fn random_aligned_spec(rng: &mut SplitMix64) -> DelaySystemSpec {
    let dim = 1 + rng.below(2);
    let delayed_dim = 1 + rng.below(dim);
    let n_kernels = 1 + rng.below(2);
    let sigma = rng.uniform(0.5, 2.0);
    let m1 = rng.below(2);
    let counts: Vec<usize> = if n_kernels == 1 {
        vec![m1]
    } else {
        vec![m1, if m1 == 1 { rng.below(2) } else { 0 }]
    };
    let shared_omega = rng.uniform(0.3, 2.0);
    let kernels: Vec<KernelSpec> = counts
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let osc: Vec<Oscillation> = (0..m)
                .map(|_| Oscillation {
                    eps: rng.uniform(-0.5, 0.5),
                    mu: rng.uniform(-0.5, 0.5),
                    omega: shared_omega,
                })
                .collect();
            KernelSpec::new(k + 1, sigma, rng.uniform(-1.0, 1.0), osc).expect("valid kernel")
        })
        .collect();
    let weights: Vec<f64> = (0..n_kernels).map(|_| rng.uniform(-0.8, 0.8)).collect();
    let mut a = Matrix::from_fn(dim, |_, _| rng.uniform(-0.5, 0.5));
    for i in 0..dim {
        a[(i, i)] -= 1.5;
    }
    let b = Matrix::from_fn(dim, |_, _| rng.uniform(-0.5, 0.5));
    let history: Vec<f64> = (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect();
    DelaySystemSpec::new(
        dim,
        delayed_dim,
        kernels,
        weights,
        Arc::new(LinearField::new(a, b)),
        Arc::new(ConstantHistory::new(history)),
    )
    .expect("valid spec")
}
