//! Helpers shared by the integration test suites.

use lct_core::kernels::{KernelSpec, Oscillation};
use lct_core::linalg::Matrix;
use lct_core::rng::SplitMix64;
use lct_core::system::{ConstantHistory, DelaySystemSpec, LinearField};
use std::sync::Arc;

/// A random small delay problem from the family the chain reduction is
/// designed for: chains aligned in frequency (each oscillation index reuses
/// one frequency across kernel orders), a contractive linear right-hand
/// side, and a constant history.
pub fn random_aligned_spec(rng: &mut SplitMix64) -> DelaySystemSpec {
    let dim = 1 + rng.below(2);
    let delayed_dim = 1 + rng.below(dim);
    let n_kernels = 1 + rng.below(2);
    let sigma = rng.uniform(0.5, 2.0);

    // Oscillation counts M_k <= 1, staircase-aligned so every chain is fed.
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
            KernelSpec::new(k + 1, sigma, rng.uniform(-1.0, 1.0), osc).unwrap()
        })
        .collect();
    let weights: Vec<f64> = (0..n_kernels).map(|_| rng.uniform(-0.8, 0.8)).collect();

    // A x + B z with A shifted well into the left half-plane keeps the
    // trajectories bounded on the test horizons.
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
    .unwrap()
}

/// Least-squares slope of `ln(windowed max |deviation|)` against time.
#[allow(dead_code)]
pub fn log_envelope_slope(times: &[f64], deviation: &[f64], t_lo: f64, window: f64) -> f64 {
    let t_end = times[times.len() - 1];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut t = t_lo;
    while t + window <= t_end + 1e-9 {
        let mut peak = 0.0f64;
        for (i, &ti) in times.iter().enumerate() {
            if ti >= t && ti < t + window {
                peak = peak.max(deviation[i].abs());
            }
        }
        if peak > 0.0 {
            xs.push(t + 0.5 * window);
            ys.push(peak.ln());
        }
        t += window;
    }
    assert!(xs.len() >= 4, "not enough envelope windows");
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys.iter()).map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
