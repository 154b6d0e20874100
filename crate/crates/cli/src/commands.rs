//! Subcommand implementations. Each writes deterministic artifacts into the
//! output directory and prints a one-line summary.

use crate::error::CliError;
use crate::output::{
    fmt_float, json_array, json_float, json_float_array, json_object, out_path,
    state_column_names, Csv,
};
use crate::spec_file::{self, LoadedSpec};
use crate::svg;
use lct_core::bifurcation::{
    classify_cell, linspace, trace_locus, CellEntry, HopfLocus, ParametricModel, PhaseDiagram,
    StopReason,
};
use lct_core::equilibria::{find_equilibrium, EquilibriumPoint};
use lct_core::integrators::{
    continuity_gap, integrate_direct, integrate_ode, OdeMethod, Trajectory,
};
use lct_core::logistic::{LogisticModel, LogisticParams};
use lct_core::stability::{analyze_matrix, jacobian, StabilityReport};
use lct_core::system::{ConstantHistory, DelaySystemSpec};
use lct_core::transform::{initial_state, transform};
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub struct ModelArgs {
    pub input: Option<PathBuf>,
    pub builtin: Option<String>,
    pub growth: f64,
    pub capacity: f64,
    pub sigma: f64,
    pub omega: f64,
    pub epsilon: f64,
    pub history: Option<String>,
    pub overrides: Vec<(String, f64)>,
}

pub struct Loaded {
    pub spec: DelaySystemSpec,
    pub logistic: Option<LogisticParams>,
}

impl ModelArgs {
    pub fn load(&self) -> Result<Loaded, CliError> {
        match (&self.input, &self.builtin) {
            (Some(_), Some(_)) => {
                Err(CliError::validation("pass either --input or --builtin, not both"))
            }
            (None, None) => Err(CliError::validation("pass --input FILE or --builtin logistic")),
            (Some(path), None) => {
                let LoadedSpec { spec, logistic } = spec_file::load(path, &self.overrides)?;
                let spec = match &self.history {
                    Some(text) => {
                        spec.with_history(spec_file::parse_history(text, spec.dim())?)?
                    }
                    None => spec,
                };
                Ok(Loaded { spec, logistic })
            }
            (None, Some(name)) => {
                if name != "logistic" {
                    return Err(CliError::validation(format!(
                        "unknown builtin model '{name}' (registry: logistic)"
                    )));
                }
                if !self.overrides.is_empty() {
                    return Err(CliError::validation(
                        "--set overrides apply to --input files; use the model flags instead",
                    ));
                }
                let params = LogisticParams::new(
                    self.growth,
                    self.capacity,
                    self.sigma,
                    self.omega,
                    self.epsilon,
                )?;
                // Default start slightly off capacity so critical-line runs
                // show their oscillation.
                let history = match &self.history {
                    Some(text) => spec_file::parse_history(text, 1)?,
                    None => Arc::new(ConstantHistory::new(vec![1.05 * self.capacity])),
                };
                Ok(Loaded { spec: params.delay_spec(history), logistic: Some(params) })
            }
        }
    }

    pub fn logistic_model(&self) -> Result<LogisticModel, CliError> {
        let loaded = self.load()?;
        let params = loaded.logistic.ok_or_else(|| {
            CliError::validation("this command needs the builtin logistic model")
        })?;
        Ok(LogisticModel {
            growth: params.growth(),
            capacity: params.capacity(),
            omega: params.omega(),
        })
    }
}

fn write_artifact(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}

fn equilibrium_json(
    point: &EquilibriumPoint,
    sigma: f64,
    epsilon: Option<f64>,
) -> String {
    let layout = point.layout();
    let chains = json_array(
        (0..layout.kernel_count()).map(|k| json_float_array(point.chain_block(k))),
    );
    let mut u_blocks = Vec::new();
    let mut v_blocks = Vec::new();
    for k in 0..layout.kernel_count() {
        for n in 0..layout.osc_counts()[k] {
            u_blocks.push(json_float_array(point.osc_re_block(k, n)));
            v_blocks.push(json_float_array(point.osc_im_block(k, n)));
        }
    }
    json_object(&[
        ("sigma", json_float(sigma)),
        ("epsilon", epsilon.map(json_float).unwrap_or_else(|| "null".into())),
        ("x_e", json_float_array(point.x())),
        ("V", chains),
        ("u", json_array(u_blocks)),
        ("v", json_array(v_blocks)),
        ("residual", json_float(point.residual())),
    ])
}

pub fn run_transform(args: &ModelArgs, tol: f64, out: &Path) -> Result<(), CliError> {
    let loaded = args.load()?;
    let system = transform(&loaded.spec);
    let layout = system.layout();
    let init = initial_state(&loaded.spec, tol)?;
    let blocks = json_array(layout.blocks().into_iter().map(|(_, range)| {
        json_object(&[
            ("start", range.start.to_string()),
            ("len", range.len().to_string()),
        ])
    }));
    let names = state_column_names(layout);
    let json = json_object(&[
        ("r", system.dim().to_string()),
        ("D", layout.dim().to_string()),
        ("d", layout.delayed_dim().to_string()),
        ("sigma", json_float(system.sigma())),
        ("state_names", json_array(names.iter().map(|n| format!("\"{n}\"")))),
        ("blocks", blocks),
        ("initial_state", json_float_array(&init)),
    ]);
    let path = out_path(out, "transform.json");
    write_artifact(&path, &json)?;
    println!("transform: r={} sigma={} -> {}", system.dim(), system.sigma(), path.display());
    Ok(())
}

pub fn run_equilibrium(
    args: &ModelArgs,
    guess: Option<&str>,
    tol: f64,
    out: &Path,
) -> Result<(), CliError> {
    let loaded = args.load()?;
    let guess: Vec<f64> = match guess {
        Some(text) => text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| CliError::validation(format!("bad --guess entry '{s}': {e}")))
            })
            .collect::<Result<_, _>>()?,
        None => loaded.spec.history_at_zero(),
    };
    let point = find_equilibrium(&loaded.spec, &guess, tol)?;
    let json = equilibrium_json(
        &point,
        loaded.spec.sigma(),
        loaded.logistic.as_ref().map(|p| p.epsilon()),
    );
    let path = out_path(out, "equilibrium.json");
    write_artifact(&path, &json)?;
    println!(
        "equilibrium: residual={:.3e} x_e[0]={:.6} -> {}",
        point.residual(),
        point.x()[0],
        path.display()
    );
    Ok(())
}

fn stability_report(loaded: &Loaded, tol: f64) -> Result<(StabilityReport, usize), CliError> {
    // Prefer the analytic route for the builtin model; fall back to the
    // reduced system with a finite-difference Jacobian at a located
    // equilibrium.
    if let Some(params) = &loaded.logistic {
        let state = lct_core::logistic::equilibrium_state(params)?;
        let matrix = lct_core::logistic::jacobian(params, &state);
        return Ok((analyze_matrix(&matrix, tol)?, 7));
    }
    let system = transform(&loaded.spec);
    let guess = loaded.spec.history_at_zero();
    let point = find_equilibrium(&loaded.spec, &guess, 1e-11)?;
    let matrix = jacobian(&system, point.state())?;
    Ok((analyze_matrix(&matrix, tol)?, system.dim()))
}

pub fn run_stability(args: &ModelArgs, tol: f64, out: &Path) -> Result<(), CliError> {
    let loaded = args.load()?;
    let (report, dim) = stability_report(&loaded, tol)?;
    let sigma = loaded.spec.sigma();
    let epsilon = loaded.logistic.as_ref().map(|p| p.epsilon());

    let det_names: Vec<String> = (1..=dim).map(|j| format!("D{j}")).collect();
    let mut header: Vec<&str> = vec!["sigma", "epsilon"];
    header.extend(det_names.iter().map(|s| s.as_str()));
    header.push("verdict");
    let mut csv = Csv::new(&header);
    let mut row = vec![fmt_float(sigma), fmt_float(epsilon.unwrap_or(f64::NAN))];
    row.extend(report.routh_hurwitz.determinants().iter().map(|d| fmt_float(*d)));
    row.push(report.routh_hurwitz.verdict().to_string());
    csv.row(&row);
    let csv_path = out_path(out, "stability.csv");
    write_artifact(&csv_path, &csv.finish())?;

    let json = json_object(&[
        ("sigma", json_float(sigma)),
        ("epsilon", epsilon.map(json_float).unwrap_or_else(|| "null".into())),
        ("coefficients", json_float_array(report.char_poly.coefficients())),
        ("determinants", json_float_array(report.routh_hurwitz.determinants())),
        ("verdict", format!("\"{}\"", report.routh_hurwitz.verdict())),
        (
            "first_failure_index",
            report
                .routh_hurwitz
                .first_failure_index()
                .map(|i| i.to_string())
                .unwrap_or_else(|| "null".into()),
        ),
        (
            "eigenvalues",
            json_array(
                report
                    .eigenvalues
                    .iter()
                    .map(|e| json_array([json_float(e.re), json_float(e.im)])),
            ),
        ),
    ]);
    let json_path = out_path(out, "stability.json");
    write_artifact(&json_path, &json)?;
    println!(
        "stability: verdict={} r={dim} -> {} {}",
        report.routh_hurwitz.verdict(),
        csv_path.display(),
        json_path.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn run_hopf(
    args: &ModelArgs,
    eps_range: (f64, f64),
    steps: usize,
    bracket: (f64, f64),
    tol: f64,
    out: &Path,
) -> Result<(), CliError> {
    let model = args.logistic_model()?;
    let locus = trace_locus(&model, eps_range, steps, bracket, tol)?;
    let mut csv = Csv::new(&["epsilon", "sigma", "transversality"]);
    for p in &locus.points {
        csv.row(&[fmt_float(p.epsilon), fmt_float(p.sigma), fmt_float(p.transversality)]);
    }
    let path = out_path(out, "hopf.csv");
    write_artifact(&path, &csv.finish())?;
    let stopped = match locus.stopped {
        None => "completed".to_string(),
        Some((eps, StopReason::LowerDeterminantFailed)) => {
            format!("stopped at eps={eps} (lower determinant lost positivity)")
        }
        Some((eps, StopReason::BracketFailed)) => {
            format!("stopped at eps={eps} (re-bracketing failed)")
        }
    };
    println!(
        "hopf: {} points, slope at seed {:.6}, {stopped} -> {}",
        locus.points.len(),
        locus.slope_at_origin,
        path.display()
    );
    Ok(())
}

/// Deterministic data-parallel grid sweep: rows of the diagram are split
/// into contiguous chunks, each classified on its own thread, and
/// reassembled in order by a single writer.
pub fn parallel_phase_diagram(
    model: &dyn ParametricModel,
    sigmas: &[f64],
    epsilons: &[f64],
    threads: usize,
) -> PhaseDiagram {
    if threads <= 1 || epsilons.len() <= 1 {
        return lct_core::bifurcation::phase_diagram(model, sigmas, epsilons);
    }
    let chunk = epsilons.len().div_ceil(threads);
    let mut cells: Vec<CellEntry> = Vec::with_capacity(sigmas.len() * epsilons.len());
    std::thread::scope(|scope| {
        let handles: Vec<_> = epsilons
            .chunks(chunk)
            .map(|eps_chunk| {
                scope.spawn(move || {
                    let mut block = Vec::with_capacity(eps_chunk.len() * sigmas.len());
                    for &eps in eps_chunk {
                        for &sigma in sigmas {
                            block.push(classify_cell(model, sigma, eps));
                        }
                    }
                    block
                })
            })
            .collect();
        for handle in handles {
            cells.extend(handle.join().expect("worker panicked"));
        }
    });
    PhaseDiagram {
        sigma_grid: sigmas.to_vec(),
        epsilon_grid: epsilons.to_vec(),
        cells,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run_phase_diagram(
    args: &ModelArgs,
    grid: (usize, usize),
    sigma_range: (f64, f64),
    eps_range: (f64, f64),
    threads: usize,
    plot: bool,
    out: &Path,
) -> Result<(), CliError> {
    let model = args.logistic_model()?;
    let (n_sigma, n_eps) = grid;
    if n_sigma == 0 || n_eps == 0 {
        return Err(CliError::validation("grid must be at least 1x1"));
    }
    if sigma_range.0 < 0.0 || sigma_range.1 <= sigma_range.0 {
        return Err(CliError::validation("sigma range must be positive and increasing"));
    }
    // Open lower endpoint in sigma: step in from zero.
    let sigmas: Vec<f64> = (1..=n_sigma)
        .map(|j| sigma_range.0 + (sigma_range.1 - sigma_range.0) * j as f64 / n_sigma as f64)
        .collect();
    let epsilons = linspace(eps_range.0, eps_range.1, n_eps);
    let diagram = parallel_phase_diagram(&model, &sigmas, &epsilons, threads);

    let dim = model.dim();
    let det_names: Vec<String> = (1..=dim).map(|j| format!("D{j}")).collect();
    let mut header: Vec<&str> = vec!["sigma", "epsilon", "class"];
    header.extend(det_names.iter().map(|s| s.as_str()));
    let mut csv = Csv::new(&header);
    for (i, &eps) in diagram.epsilon_grid.iter().enumerate() {
        for (j, &sigma) in diagram.sigma_grid.iter().enumerate() {
            let cell = diagram.cell(i, j);
            let mut row = vec![fmt_float(sigma), fmt_float(eps), cell.class.to_string()];
            for k in 0..dim {
                row.push(fmt_float(cell.determinants.get(k).copied().unwrap_or(f64::NAN)));
            }
            csv.row(&row);
        }
    }
    let csv_path = out_path(out, "phase_diagram.csv");
    write_artifact(&csv_path, &csv.finish())?;

    let mut summary = format!("phase-diagram: {}x{} cells -> {}", n_sigma, n_eps, csv_path.display());
    if plot {
        // Overlay the critical line when it can be traced from the low end
        // of the epsilon range.
        let locus: Option<HopfLocus> = trace_locus(
            &model,
            (eps_range.0, eps_range.1),
            (4 * n_eps).max(64),
            (sigmas[0], sigma_range.1),
            1e-10,
        )
        .ok();
        let svg_text =
            svg::phase_diagram_svg(&diagram, locus.as_ref().map(|l| l.points.as_slice()));
        let svg_path = out_path(out, "phase_diagram.svg");
        write_artifact(&svg_path, &svg_text)?;
        summary.push_str(&format!(" {}", svg_path.display()));
    }
    println!("{summary}");
    Ok(())
}

pub struct SimulateOptions {
    pub t_end: f64,
    pub step: f64,
    pub method: String,
    pub tol: f64,
    pub plot: bool,
}

pub fn run_simulate(args: &ModelArgs, opts: &SimulateOptions, out: &Path) -> Result<(), CliError> {
    let loaded = args.load()?;
    let (trajectory, names): (Trajectory, Vec<String>) = match opts.method.as_str() {
        "rk4" | "rk45" => {
            let system = transform(&loaded.spec);
            let x0 = initial_state(&loaded.spec, opts.tol)?;
            let method = if opts.method == "rk4" {
                OdeMethod::FixedRk4 { step: opts.step }
            } else {
                OdeMethod::AdaptiveRk45 { rel_tol: 1e-8, abs_tol: 1e-10 }
            };
            let traj = integrate_ode(&system, &x0, opts.t_end, &method)?;
            let names = state_column_names(system.layout());
            (traj, names)
        }
        "direct" => {
            let traj = integrate_direct(&loaded.spec, opts.t_end, opts.step)?;
            let names = (1..=loaded.spec.dim()).map(|i| format!("x{i}")).collect();
            (traj, names)
        }
        other => {
            return Err(CliError::validation(format!(
                "unknown method '{other}' (rk4, rk45, direct)"
            )))
        }
    };

    let mut header: Vec<&str> = vec!["t"];
    header.extend(names.iter().map(|s| s.as_str()));
    let mut csv = Csv::new(&header);
    for (t, state) in trajectory.iter() {
        let mut row = vec![fmt_float(t)];
        row.extend(state.iter().map(|v| fmt_float(*v)));
        csv.row(&row);
    }
    let csv_path = out_path(out, "trajectory.csv");
    write_artifact(&csv_path, &csv.finish())?;

    let mut summary = format!(
        "simulate: {} steps to t={} ({}){} -> {}",
        trajectory.len() - 1,
        trajectory.time(trajectory.len() - 1),
        trajectory.meta.method,
        if trajectory.meta.blow_up { " [blow-up]" } else { "" },
        csv_path.display()
    );
    if opts.plot {
        let series: Vec<(String, Vec<f64>)> = names
            .iter()
            .enumerate()
            .map(|(c, name)| {
                (name.clone(), (0..trajectory.len()).map(|i| trajectory.state(i)[c]).collect())
            })
            .collect();
        let svg_text = svg::trajectory_svg(trajectory.times(), &series);
        let svg_path = out_path(out, "trajectory.svg");
        write_artifact(&svg_path, &svg_text)?;
        summary.push_str(&format!(" {}", svg_path.display()));
    }
    println!("{summary}");
    Ok(())
}

pub fn run_continuity(
    input: &Path,
    input2: &Path,
    t_end: f64,
    step: f64,
    out: &Path,
) -> Result<(), CliError> {
    let first = spec_file::load(input, &[])?;
    let second = spec_file::load(input2, &[])?;
    // The estimate applies to problems differing only in their kernels;
    // graft the second kernel list onto the first problem so the shared
    // parts are literally shared.
    let spec1 = first.spec;
    let spec2 = spec1.with_kernels(second.spec.kernels().to_vec())?;
    if second.spec.dim() != spec1.dim()
        || second.spec.delayed_dim() != spec1.delayed_dim()
        || second.spec.weights() != spec1.weights()
    {
        return Err(CliError::validation(
            "the two problems must share D, d and weights (only kernels may differ)",
        ));
    }
    let cert = continuity_gap(&spec1, &spec2, t_end, step)?;
    let json = json_object(&[
        ("delta_sup", json_float(cert.delta_sup)),
        ("bound", json_float(cert.bound)),
        ("lipschitz", json_float(cert.lipschitz)),
        ("kernel_distance", json_float(cert.kernel_distance)),
        ("omega_n", json_float(cert.omega_n)),
        ("lipschitz_safety_factor", json_float(1.5)),
        ("satisfied", cert.satisfied.to_string()),
    ]);
    let path = out_path(out, "continuity.json");
    write_artifact(&path, &json)?;
    println!(
        "continuity: gap={:.3e} bound={:.3e} satisfied={} -> {}",
        cert.delta_sup,
        cert.bound,
        cert.satisfied,
        path.display()
    );
    if !cert.satisfied {
        return Err(CliError::numeric(
            "continuity certificate violated (the estimate should always hold; \
             this indicates a numerical failure)",
        ));
    }
    Ok(())
}

pub fn run_verify(suite: &str, seed: u64) -> Result<(), CliError> {
    let checks = crate::verify::run_suite(suite, seed)?;
    println!("verify: suite {suite} ok ({checks} checks, seed {seed})");
    Ok(())
}

/// Parse "A:B" ranges.
pub fn parse_range(text: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        return Err(CliError::validation(format!("range must be 'a:b', got '{text}'")));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|e| CliError::validation(format!("bad range start '{}': {e}", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|e| CliError::validation(format!("bad range end '{}': {e}", parts[1])))?;
    Ok((lo, hi))
}

/// Parse "NXxNY" grids.
pub fn parse_grid(text: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = text.split('x').collect();
    if parts.len() != 2 {
        return Err(CliError::validation(format!("grid must be 'NXxNY', got '{text}'")));
    }
    let nx: usize = parts[0]
        .parse()
        .map_err(|e| CliError::validation(format!("bad grid width '{}': {e}", parts[0])))?;
    let ny: usize = parts[1]
        .parse()
        .map_err(|e| CliError::validation(format!("bad grid height '{}': {e}", parts[1])))?;
    Ok((nx, ny))
}

/// Parse "key=value" overrides.
pub fn parse_override(text: &str) -> Result<(String, f64), CliError> {
    match text.split_once('=') {
        Some((key, value)) => {
            let parsed: f64 = value
                .parse()
                .map_err(|e| CliError::validation(format!("bad override '{text}': {e}")))?;
            Ok((key.to_string(), parsed))
        }
        None => Err(CliError::validation(format!("override must be key=value, got '{text}'"))),
    }
}
