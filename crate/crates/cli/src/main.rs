//! `skyferry` command-line front end.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use skyferry::config::ConfigError;
use skyferry::mobility::MobilityError;
use skyferry::sim::{self, SimError, SweepAxis};
use skyferry::{selftest, MobilitySource, ScenarioConfig};

#[derive(Parser)]
#[command(name = "skyferry", version, about = "Joint UAV cell coverage and DTN data ferrying simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write report.json, series.csv and messages.csv.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Run one scenario per value of a parameter.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_parser = parse_axis)]
        axis: SweepAxis,
        /// Comma-separated values, e.g. 4,6,8,10,12
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<u64>,
    },
    /// Time control epochs over a grid of user and UAV counts.
    Bench {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// `M=100,400,1000` and `N=10,25,50`
        #[arg(long, num_args = 1.., default_values = ["M=100,400,1000", "N=10,25,50"])]
        grid: Vec<String>,
        #[arg(long, default_value_t = 100)]
        epochs: u64,
    },
    /// Check the solvers against brute-force enumeration.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// JSON scenario file; missing keys take their defaults
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Override one field, e.g. --set rotation_mode=tsp (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Waypoint trace file for the ground users
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Maximum concurrent runs
    #[arg(long)]
    jobs: Option<usize>,
    /// Print the resolved configuration as JSON and exit
    #[arg(long)]
    print_config: bool,
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse()
}

enum Failure {
    Config(String),
    Selftest,
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Selftest => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Selftest => write!(f, "selftest failed"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Mobility(MobilityError::Io(io)) => Failure::Io(format!("trace: {io}")),
            other => Failure::Config(other.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

impl ScenarioArgs {
    fn resolve(&self) -> Result<ScenarioConfig, Failure> {
        let text = match &self.config {
            Some(p) => Some(fs::read_to_string(p).map_err(io_err(p))?),
            None => None,
        };
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        let mut config = ScenarioConfig::from_json_with_overrides(text.as_deref(), &overrides)?;
        if let Some(trace) = &self.trace {
            config.mobility_source = MobilitySource::TraceFile(trace.clone());
            config.validate()?;
        }
        if let Some(jobs) = self.jobs {
            // only fails if a pool already exists, which cannot happen here
            let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global();
        }
        Ok(config)
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), Failure> {
        fs::create_dir_all(&self.out).map_err(io_err(&self.out))?;
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(io_err(&path))
    }
}

fn fmt_opt(x: Option<f64>, scale: f64) -> String {
    x.map(|v| format!("{:.3}", v * scale)).unwrap_or_else(|| "-".into())
}

fn parse_grid(grid: &[String]) -> Result<(Vec<usize>, Vec<usize>), Failure> {
    let (mut users, mut uavs) = (None, None);
    for spec in grid {
        let (key, list) = spec.split_once('=').ok_or_else(|| Failure::Config(format!("bad grid spec `{spec}`")))?;
        let values = list
            .split(',')
            .map(|v| v.trim().parse::<usize>().map_err(|_| Failure::Config(format!("bad grid value `{v}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        match key.trim() {
            "M" | "m" | "n_users" => users = Some(values),
            "N" | "n" | "n_uavs" => uavs = Some(values),
            other => return Err(Failure::Config(format!("unknown grid axis `{other}`"))),
        }
    }
    match (users, uavs) {
        (Some(m), Some(n)) if !m.is_empty() && !n.is_empty() => Ok((m, n)),
        _ => Err(Failure::Config("grid needs both M=... and N=...".into())),
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { scenario } => {
            let config = scenario.resolve()?;
            if scenario.print_config {
                print!("{}", config.to_json_pretty());
                return Ok(());
            }
            let report = sim::run(&config)?;
            scenario.write("report.json", &report.to_json())?;
            scenario.write("series.csv", &report.series_csv())?;
            scenario.write("messages.csv", &report.messages_csv())?;
            println!(
                "{} seed={} ttd={}s p_deliver={:.3} coverage={} distance={}km ({:.1}s)",
                config.rotation_mode.name(),
                config.seed,
                fmt_opt(report.ttd_mean, 1.0),
                report.p_deliver,
                fmt_opt(report.coverage_mean, 1.0),
                fmt_opt(report.distance_total, 1e-3),
                report.wall_clock
            );
        }
        Command::Sweep { scenario, axis, values } => {
            let config = scenario.resolve()?;
            if scenario.print_config {
                print!("{}", config.to_json_pretty());
                return Ok(());
            }
            let points = sim::sweep(&config, axis, &values)?;
            scenario.write("sweep.csv", &sim::sweep_csv(axis, &points))?;
            let reports: Vec<_> = points.iter().map(|p| &p.report).collect();
            let json = serde_json::to_string_pretty(&reports).expect("reports serialize");
            scenario.write("sweep.json", &(json + "\n"))?;
            for p in &points {
                let r = &p.report;
                println!(
                    "{}={} ttd={}s p_deliver={:.3} coverage={} distance={}km",
                    axis.name(),
                    p.value,
                    fmt_opt(r.ttd_mean, 1.0),
                    r.p_deliver,
                    fmt_opt(r.coverage_mean, 1.0),
                    fmt_opt(r.distance_total, 1e-3)
                );
            }
        }
        Command::Bench { scenario, grid, epochs } => {
            let config = scenario.resolve()?;
            if scenario.print_config {
                print!("{}", config.to_json_pretty());
                return Ok(());
            }
            let (users, uavs) = parse_grid(&grid)?;
            if epochs == 0 {
                return Err(Failure::Config("epochs must be positive".into()));
            }
            let rows = sim::bench(&config, &users, &uavs, epochs)?;
            scenario.write("bench.csv", &sim::bench_csv(config.rotation_mode.name(), &rows))?;
            for r in &rows {
                println!("M={} N={} epochs={} total={:.3}s per_epoch={:.4}s", r.n_users, r.n_uavs, r.epochs, r.seconds, r.per_epoch());
            }
        }
        Command::Selftest { seed } => {
            let results = selftest::run_all(seed);
            for r in &results {
                println!("{:<10} {}/{} {}", r.name, r.passed, r.total, if r.ok() { "ok" } else { "FAILED" });
            }
            if !results.iter().all(|r| r.ok()) {
                return Err(Failure::Selftest);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("skyferry: {e}");
            ExitCode::from(e.code())
        }
    }
}
