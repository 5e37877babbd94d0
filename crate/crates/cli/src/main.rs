//! Command-line front end: single runs, parameter sweeps and connection
//! checks driven by JSON configuration files.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::SystemTime;

use clap::{Args, Parser, Subcommand, ValueEnum};
use levelcross::connection::connection_comparison;
use levelcross::evolution::{Basis, EvolutionConfig, Integrator};
use levelcross::model::{ParameterPath, DEFAULT_R_MIN};
use levelcross::phases::DEFAULT_FIDELITY_FLOOR;
use levelcross::scenarios::config::{ScenarioFile, SweepFile};
use levelcross::scenarios::{
    build_shrink_rotate_return_path, simulate, sweep_phase_map, write_connection_csv, write_sweep_csv,
    write_trajectory_csv, ShrinkRotateReturn, SimulationReport, SweepOptions, DEFAULT_SEGMENT_SPLIT,
};

#[derive(Parser)]
#[command(name = "levelcross", version, about = "Driven two-level dynamics and geometric phases near a level crossing")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Relative tolerance of the adaptive integrator; the absolute tolerance
    /// is set to 1e-2 of it
    #[arg(long, global = true, value_name = "REL_TOL")]
    tolerance: Option<f64>,
    /// Override the integrator named in the config file
    #[arg(long, global = true, value_enum)]
    integrator: Option<IntegratorArg>,
    /// Write the state after every step of a single run to this CSV file
    #[arg(long, global = true, value_name = "PATH")]
    trajectory: Option<PathBuf>,
    /// Omit the timestamp line and the runtime column for byte-reproducible output
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Worker threads for sweeps (default: one per core)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegratorArg {
    #[value(name = "midpoint_exponential", alias = "midpoint")]
    MidpointExponential,
    #[value(name = "rk_adaptive", alias = "rk")]
    RkAdaptive,
}

impl From<IntegratorArg> for Integrator {
    fn from(a: IntegratorArg) -> Self {
        match a {
            IntegratorArg::MidpointExponential => Integrator::MidpointExponential,
            IntegratorArg::RkAdaptive => Integrator::RkAdaptive,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and print its phase decomposition as JSON
    Simulate { config: PathBuf },
    /// Scan a (B0, omega) grid and write one CSV row per point
    Sweep {
        config: PathBuf,
        /// Write the CSV here instead of stdout
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Tabulate the analytic connection against central differences
    ConnectionCheck {
        config: PathBuf,
        /// Number of sample times along the path
        #[arg(long, default_value_t = 64)]
        points: usize,
        /// Difference step as a fraction of the period
        #[arg(long, default_value_t = 1e-5)]
        dt_fraction: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Built-in scenarios configured from flags
    #[command(subcommand)]
    Scenario(ScenarioCommand),
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Shrink the field towards the crossing, rotate it once, bring it back
    ShrinkRotateReturn(ShrinkRotateReturnArgs),
}

#[derive(Args)]
struct ShrinkRotateReturnArgs {
    /// Polar angle of the field direction
    #[arg(long)]
    theta: f64,
    /// Starting azimuth
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    #[arg(long)]
    r_start: f64,
    #[arg(long)]
    r_small: f64,
    /// Total duration of the cycle
    #[arg(long)]
    period: f64,
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    /// Fractions of the period spent shrinking, rotating and returning
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SEGMENT_SPLIT)]
    split: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_R_MIN)]
    r_min: f64,
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<levelcross::Error> for Failure {
    fn from(e: levelcross::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    if let Some(n) = g.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Config(e.to_string()))?;
    }
    if let Some(tol) = g.tolerance {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Failure::Config(format!("--tolerance must lie in (0, 1), got {tol}")));
        }
    }
    match &cli.command {
        Command::Simulate { config } => run_simulate(g, config),
        Command::Sweep { config, output } => run_sweep(g, config, output.as_deref()),
        Command::ConnectionCheck { config, points, dt_fraction, output } => {
            run_connection_check(config, *points, *dt_fraction, output.as_deref())
        }
        Command::Scenario(ScenarioCommand::ShrinkRotateReturn(args)) => run_shrink_rotate_return(g, args),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn apply_overrides(g: &GlobalOpts, mut cfg: EvolutionConfig) -> EvolutionConfig {
    if let Some(tol) = g.tolerance {
        cfg.rel_tol = tol;
        cfg.abs_tol = tol * 1e-2;
    }
    if let Some(i) = g.integrator {
        cfg.integrator = i.into();
    }
    cfg.record_trajectory = g.trajectory.is_some();
    cfg
}

fn with_output(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Outcome {
    match path {
        Some(p) => {
            let mut f =
                BufWriter::new(fs::File::create(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?);
            write(&mut f)?;
            f.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = BufWriter::new(stdout.lock());
            write(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn single_run(
    g: &GlobalOpts,
    kind: &str,
    path: &ParameterPath,
    basis: Basis,
    cfg: EvolutionConfig,
    floor: f64,
) -> Outcome {
    let cfg = apply_overrides(g, cfg);
    let sim = simulate(path, basis, &cfg, floor)?;
    if let (Some(file), Some(points)) = (&g.trajectory, &sim.result.trajectory) {
        with_output(Some(file), |w| write_trajectory_csv(points, w))?;
    }
    let report = SimulationReport::new(kind, &sim, &cfg);
    let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::Config(e.to_string()))?;
    with_output(None, |w| writeln!(w, "{json}"))
}

fn run_simulate(g: &GlobalOpts, config: &Path) -> Outcome {
    let file = ScenarioFile::from_json(&read(config)?)?;
    let path = file.build_path()?;
    single_run(
        g,
        file.scenario.kind(),
        &path,
        file.evolution.basis,
        file.evolution_config(),
        file.outputs.fidelity_floor,
    )
}

fn run_shrink_rotate_return(g: &GlobalOpts, a: &ShrinkRotateReturnArgs) -> Outcome {
    if a.split.len() != 3 {
        return Err(Failure::Config(format!("--split takes three fractions, got {}", a.split.len())));
    }
    let spec = ShrinkRotateReturn {
        theta: a.theta,
        phi: a.phi,
        r_start: a.r_start,
        r_small: a.r_small,
        period: a.period,
        g: a.g,
        split: [a.split[0], a.split[1], a.split[2]],
    };
    if !(a.hbar > 0.0 && a.hbar.is_finite()) {
        return Err(Failure::Config(format!("--hbar must be positive, got {}", a.hbar)));
    }
    let path = build_shrink_rotate_return_path(&spec, a.r_min)?;
    let cfg = EvolutionConfig::default().with_hbar(a.hbar);
    single_run(g, "shrink_rotate_return", &path, Basis::Original, cfg, DEFAULT_FIDELITY_FLOOR)
}

fn run_sweep(g: &GlobalOpts, config: &Path, output: Option<&Path>) -> Outcome {
    if g.trajectory.is_some() {
        return Err(Failure::Config("--trajectory applies to single runs, not sweeps".into()));
    }
    let file = SweepFile::from_json(&read(config)?)?;
    let (b0, omega) = file.grid()?;
    let cfg = apply_overrides(g, file.evolution_config());
    let opts = SweepOptions { fidelity_floor: file.fidelity_floor, record_runtime: !g.no_timestamp };
    let records = sweep_phase_map(&b0, &omega, &file.base_model(), &cfg, &opts)?;
    let stamp = (!g.no_timestamp).then(|| humantime::format_rfc3339_seconds(SystemTime::now()).to_string());
    with_output(output, |w| write_sweep_csv(&records, w, stamp.as_deref()))
}

fn run_connection_check(config: &Path, points: usize, dt_fraction: f64, output: Option<&Path>) -> Outcome {
    if points == 0 {
        return Err(Failure::Config("--points must be at least 1".into()));
    }
    if !(dt_fraction > 0.0 && dt_fraction < 0.5 / points as f64) {
        return Err(Failure::Config(format!("--dt-fraction must lie in (0, 0.5/points), got {dt_fraction}")));
    }
    let file = ScenarioFile::from_json(&read(config)?)?;
    let path = file.build_path()?;
    let rows = connection_comparison(&path, points, dt_fraction * path.period())?;
    let worst = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    with_output(output, |w| write_connection_csv(&rows, w))?;
    eprintln!("max |analytic - numeric| = {worst:.3e} over {} entries", rows.len());
    Ok(())
}
