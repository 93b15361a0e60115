use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use gaborkit::config::EpsParam;
use gaborkit::{init_threads, run_experiment, CliError, Command, ExperimentConfig, Which};

/// Finite Gabor analysis experiments.
#[derive(Debug, Parser)]
#[command(name = "gaborkit", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON config; command-line options override its parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid length.
    #[arg(long = "L")]
    l: Option<usize>,
    /// Period of the physical grid.
    #[arg(long = "T")]
    t: Option<f64>,
    /// Use the abstract group Z_L (unit weights) instead of a physical grid.
    #[arg(long = "abstract")]
    abstract_grid: bool,
    /// Separable lattice steps `a,b`.
    #[arg(long)]
    lattice: Option<String>,
    /// Lattice density used when no lattice is given.
    #[arg(long)]
    density: Option<f64>,
    /// Window name or CSV file.
    #[arg(long)]
    window: Option<String>,
    /// Seed for random probes and trials.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for report.json and artifacts.
    #[arg(long)]
    out: Option<String>,
    /// Zak block length.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Center of the reference window for norms (default T/2).
    #[arg(long)]
    center: Option<f64>,
    /// Counterexample quadrature resolution.
    #[arg(long = "M")]
    m: Option<usize>,
    /// Counterexample series truncation.
    #[arg(long = "K")]
    k: Option<usize>,
    /// Evaluation budget of the greedy search.
    #[arg(long)]
    budget: Option<usize>,
    /// Truncation radii, comma separated.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<usize>>,
    /// Cross-check the eigendecomposition with a contour quadrature on this many nodes.
    #[arg(long)]
    contour_nodes: Option<usize>,
    /// `auto` or a positive spectral threshold.
    #[arg(long)]
    eps: Option<EpsParam>,
    /// Identity checked by `identity`.
    #[arg(long, value_enum)]
    which: Option<Which>,
    /// Random trials per lattice.
    #[arg(long)]
    trials: Option<usize>,
    /// Grid sizes for refine-study, comma separated.
    #[arg(long, value_delimiter = ',')]
    ladder: Option<Vec<usize>>,
}

fn resolve(cli: Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::new(cli.command),
    };
    cfg.command = cli.command;
    let p = &mut cfg.parameters;
    macro_rules! set {
        ($($field:ident),*) => {$( if let Some(v) = cli.$field { p.$field = v; } )*};
    }
    set!(l, t, density, seed, m, k, budget, radii, eps, which, trials, ladder);
    macro_rules! set_opt {
        ($($field:ident),*) => {$( if cli.$field.is_some() { p.$field = cli.$field; } )*};
    }
    set_opt!(lattice, window, out, n, center, contour_nodes);
    if cli.abstract_grid {
        p.abstract_grid = true;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    init_threads()?;
    let cfg = resolve(cli)?;
    let report = run_experiment(&cfg)?;
    if let Some(dir) = &cfg.parameters.out {
        report.write_to(Path::new(dir))?;
    }
    print!("{}", report.to_pretty());
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {} = {:e} (required {:?} {:e})", c.name, c.value, c.relation, c.tolerance);
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
