//! `lct`: analysis front end for distributed-delay systems with
//! oscillation-perturbed Erlang memory kernels.

mod commands;
mod error;
mod output;
mod spec_file;
mod svg;
mod verify;

use clap::{Args, Parser, Subcommand};
use commands::{parse_grid, parse_override, parse_range, ModelArgs, SimulateOptions};
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "lct",
    version,
    about = "Distributed-delay systems with oscillating memory kernels: \
             chain reduction, stability, Hopf loci, phase diagrams, simulation",
    after_help = "CSV artifacts use fixed column orders: \
                  stability.csv (sigma, epsilon, D1.., verdict), \
                  phase_diagram.csv (sigma, epsilon, class, D1..), \
                  hopf.csv (epsilon, sigma, transversality), \
                  trajectory.csv (t, x.., V.., u.., v..). \
                  Floats carry 17 significant digits and round-trip exactly."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputOpts {
    /// Problem description (JSON)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Built-in model (registry: logistic)
    #[arg(long)]
    builtin: Option<String>,
    /// Growth rate of the builtin logistic model
    #[arg(long, default_value_t = 2.0)]
    r: f64,
    /// Carrying capacity of the builtin logistic model
    #[arg(long = "K", default_value_t = 1.0)]
    capacity: f64,
    /// Kernel decay rate of the builtin logistic model
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Kernel oscillation frequency of the builtin logistic model
    #[arg(long = "Omega", default_value_t = 0.8)]
    omega: f64,
    /// Kernel oscillation amplitude of the builtin logistic model
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// History override: 'constant:[...]' or 'expr:zero'
    #[arg(long)]
    history: Option<String>,
    /// Override a file parameter (key=value); unknown keys are rejected
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl InputOpts {
    fn model_args(&self) -> Result<ModelArgs, CliError> {
        let overrides = self
            .overrides
            .iter()
            .map(|text| parse_override(text))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ModelArgs {
            input: self.input.clone(),
            builtin: self.builtin.clone(),
            growth: self.r,
            capacity: self.capacity,
            sigma: self.sigma,
            omega: self.omega,
            epsilon: self.epsilon,
            history: self.history.clone(),
            overrides,
        })
    }
}

#[derive(Args)]
struct OutOpts {
    /// Output directory for artifacts
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a delay problem to its ODE system; emit layout and initial state
    Transform {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        out: OutOpts,
        /// Tail tolerance for history integrals
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Locate an equilibrium and emit its block coordinates
    Equilibrium {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        out: OutOpts,
        /// Starting guess, comma-separated (default: history at time zero)
        #[arg(long)]
        guess: Option<String>,
        /// Newton residual tolerance
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Characteristic polynomial, determinant cascade, verdict and spectrum
    Stability {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        out: OutOpts,
        /// Zero-classification tolerance for the verdict
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Trace the Hopf locus of the builtin model over an epsilon range
    Hopf {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        out: OutOpts,
        /// Epsilon range 'a:b'
        #[arg(long = "eps-range", default_value = "0:2")]
        eps_range: String,
        /// Continuation steps across the range
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Bracket 'a:b' for the seed root in sigma
        #[arg(long = "sigma-range", default_value = "0.05:4")]
        sigma_range: String,
        /// Bisection tolerance in sigma
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Classify a (sigma, epsilon) grid of the builtin model
    #[command(name = "phase-diagram")]
    PhaseDiagram {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        out: OutOpts,
        /// Grid size 'NXxNY' (sigma by epsilon)
        #[arg(long, default_value = "200x200")]
        grid: String,
        /// Sigma range 'a:b' (lower endpoint open)
        #[arg(long = "sigma-range", default_value = "0:3")]
        sigma_range: String,
        /// Epsilon range 'a:b'
        #[arg(long = "eps-range", default_value = "0:2")]
        eps_range: String,
        /// Worker threads (fallback: LCT_THREADS, then 1)
        #[arg(long)]
        threads: Option<usize>,
        /// Also write an SVG heat map with the critical line overlaid
        #[arg(long)]
        plot: bool,
    },
    /// Integrate the reduced system (rk4, rk45) or the delay equation (direct)
    Simulate {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        out: OutOpts,
        /// Integration horizon
        #[arg(long = "T", default_value_t = 200.0)]
        t_end: f64,
        /// Fixed step (rk4/direct)
        #[arg(long, default_value_t = 1e-2)]
        h: f64,
        /// Integration method: rk4, rk45 or direct
        #[arg(long, default_value = "rk4")]
        method: String,
        /// Tail tolerance for history integrals
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Also write an SVG line plot
        #[arg(long)]
        plot: bool,
    },
    /// Continuity certificate for two problems differing only in kernels
    Continuity {
        /// First problem description (JSON)
        #[arg(long)]
        input: PathBuf,
        /// Second problem description (JSON)
        #[arg(long)]
        input2: PathBuf,
        #[command(flatten)]
        out: OutOpts,
        /// Integration horizon
        #[arg(long = "T", default_value_t = 5.0)]
        t_end: f64,
        /// Integration step
        #[arg(long, default_value_t = 1e-2)]
        h: f64,
    },
    /// Run a deterministic verification suite
    Verify {
        /// Suite name (all, dimension, coefficients, scaling, equilibrium,
        /// hopf, lct, continuity)
        #[arg(long, default_value = "all")]
        suite: String,
        /// Seed for randomized checks
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn threads_from(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var("LCT_THREADS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1)
        .max(1)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Transform { input, out, tol } => {
            commands::run_transform(&input.model_args()?, tol, &out.out)
        }
        Command::Equilibrium { input, out, guess, tol } => {
            commands::run_equilibrium(&input.model_args()?, guess.as_deref(), tol, &out.out)
        }
        Command::Stability { input, out, tol } => {
            commands::run_stability(&input.model_args()?, tol, &out.out)
        }
        Command::Hopf { input, out, eps_range, steps, sigma_range, tol } => commands::run_hopf(
            &input.model_args()?,
            parse_range(&eps_range)?,
            steps,
            parse_range(&sigma_range)?,
            tol,
            &out.out,
        ),
        Command::PhaseDiagram { input, out, grid, sigma_range, eps_range, threads, plot } => {
            commands::run_phase_diagram(
                &input.model_args()?,
                parse_grid(&grid)?,
                parse_range(&sigma_range)?,
                parse_range(&eps_range)?,
                threads_from(threads),
                plot,
                &out.out,
            )
        }
        Command::Simulate { input, out, t_end, h, method, tol, plot } => commands::run_simulate(
            &input.model_args()?,
            &SimulateOptions { t_end, step: h, method, tol, plot },
            &out.out,
        ),
        Command::Continuity { input, input2, out, t_end, h } => {
            commands::run_continuity(&input, &input2, t_end, h, &out.out)
        }
        Command::Verify { suite, seed } => commands::run_verify(&suite, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let message = e.to_string();
            let first_line = message.lines().next().unwrap_or("invalid arguments");
            eprintln!("error[validation]: {first_line}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
