//! `qsvt`: batch front end for the simulation toolkit.
//!
//! Exit codes: 0 success, 2 schema or usage error, 3 simulation error,
//! 4 oracle mismatch under `--check`.

mod commands;
mod config;
mod sweep;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qsvt_core::io::{self, InstanceDoc, TaskDoc};

use commands::{Outcome, Settings};

#[derive(Debug)]
pub enum CliError {
    Schema(String),
    Simulation(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Simulation(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "schema error: {m}"),
            CliError::Simulation(m) => write!(f, "simulation error: {m}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qsvt", version, about = "Trotterized QSVT experiments: runs, sweeps, approximations and resource reports")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Target accuracy ε.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Suzuki order parameter k (formula order 2k).
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// exact-read | shots:N[:seed] | coherent:eps:delta[:seed]; N may be `auto`.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Number of extrapolation nodes.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Base step size; must be 1/q for an integer q divisible by the segment count.
    #[arg(long, global = true)]
    pub s0: Option<f64>,
    /// Worker threads for node and sweep parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Compare against dense oracles (n ≤ 12); exit 4 on mismatch.
    #[arg(long, global = true)]
    pub check: bool,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Default seed for sampling modes without an explicit seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute the task in a config file and print result JSON (CSV for sweeps).
    Run { config: PathBuf },
    /// Execute a sweep config and print CSV rows with a trailing fit row.
    Sweep { config: PathBuf },
    /// Build a polynomial approximation and print its certificate.
    Approx {
        /// sign | shifted-sign | rectangle | filter | inverse | exp | poly2laurent
        function: String,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        /// Monomial coefficients for poly2laurent, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        coeffs: Vec<f64>,
        /// Write Laurent coefficients as `k,re,im` CSV.
        #[arg(long)]
        coeff_out: Option<PathBuf>,
        /// Also synthesize GQSP angles.
        #[arg(long)]
        angles: bool,
    },
    /// Solve a linear-system instance file and estimate ⟨x|O|x⟩.
    Qls {
        #[arg(long)]
        instance: PathBuf,
        /// Adiabatic step count T (default ⌈8κ⌉).
        #[arg(long)]
        t_steps: Option<usize>,
    },
    /// Estimate a ground-state property from a task file.
    Gse {
        #[arg(long)]
        task: PathBuf,
    },
    /// Report the extrapolation scheme and resource counts without simulating.
    Resources { config: PathBuf },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(|e| CliError::Simulation(format!("{}: {e}", path.display())))
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Run { config } => {
            let (cfg, raw) = config::load(&read(config)?)?;
            commands::run_config("run", &cfg, &raw, g)
        }
        Command::Sweep { config } => {
            let (cfg, raw) = config::load(&read(config)?)?;
            if !matches!(cfg.task, config::TaskSpec::Sweep(_)) {
                return Err(CliError::Schema(format!("task.kind: sweep expected, got {:?}", cfg.task.kind())));
            }
            commands::run_config("sweep", &cfg, &raw, g)
        }
        Command::Resources { config } => {
            let (mut cfg, raw) = config::load(&read(config)?)?;
            if let config::TaskSpec::Interleaved(spec) = &cfg.task {
                cfg.task = config::TaskSpec::Resources {
                    circuit: spec.circuit.clone(),
                };
            }
            if !matches!(cfg.task, config::TaskSpec::Resources { .. }) {
                return Err(CliError::Schema(format!(
                    "task.kind: resources needs an interleaved or resources task, got {:?}",
                    cfg.task.kind()
                )));
            }
            commands::run_config("resources", &cfg, &raw, g)
        }
        Command::Approx {
            function,
            delta,
            mu,
            t,
            kappa,
            beta,
            coeffs,
            coeff_out,
            angles,
        } => {
            let st = Settings::resolve(g, None, 1e-3)?;
            let params: BTreeMap<String, f64> = [("delta", delta), ("mu", mu), ("t", t), ("kappa", kappa), ("beta", beta)]
                .into_iter()
                .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
                .collect();
            let out = commands::run_approx("approx", function, &params, coeffs, *angles, &st, None)?;
            if let Some(path) = coeff_out {
                let rep = commands::approximation(function, &params, coeffs, st.eps)?;
                write_file(path, &commands::coefficient_csv(&rep)?)?;
            }
            Ok(out)
        }
        Command::Qls { instance, t_steps } => {
            let doc: InstanceDoc = io::from_json(&read(instance)?).map_err(|e| CliError::Schema(format!("instance: {e}")))?;
            let inst = doc.build().map_err(|e| CliError::Schema(format!("instance: {e}")))?;
            let st = Settings::resolve(g, None, 1e-2)?;
            commands::run_qls("qls", &inst, *t_steps, &st, None)
        }
        Command::Gse { task } => {
            let doc: TaskDoc = io::from_json(&read(task)?).map_err(|e| CliError::Schema(format!("task: {e}")))?;
            let task = doc.build().map_err(|e| CliError::Schema(format!("task: {e}")))?;
            let st = Settings::resolve(g, None, 1e-2)?;
            commands::run_gse("gse", &task, &st, None)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.global.workers {
        if w == 0 {
            eprintln!("schema error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .expect("thread pool configured once");
    }
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.code());
        }
    };
    let emitted = match &cli.global.out {
        Some(path) => write_file(path, &outcome.body),
        None => {
            print!("{}", outcome.body);
            Ok(())
        }
    };
    if let Err(e) = emitted {
        eprintln!("{e}");
        return ExitCode::from(e.code());
    }
    match outcome.mismatch {
        Some(m) => {
            eprintln!("check failed: {m}");
            ExitCode::from(4)
        }
        None => ExitCode::SUCCESS,
    }
}
