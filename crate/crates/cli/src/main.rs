mod output;
mod request;

use std::collections::HashSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::thread;

use anyhow::{bail, ensure, Result};
use clap::{Args, Parser, Subcommand};
use mood1d::benchmarks::CaseId;
use mood1d::{Method, Mode};

use output::{convergence_table, format_convergence, solve, write_convergence, write_run};
use request::{parse_method, parse_mode, Settings};

/// Sixth-order MOOD finite volume solver for 1D steady benchmarks.
#[derive(Parser)]
#[command(name = "mood1d", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one benchmark on one mesh and write solution.csv, cpd.csv and
    /// report.json.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        cells: usize,
    },
    /// Solve on several meshes and write convergence.csv.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Comma-separated mesh sizes, e.g. 40,80,160.
        #[arg(long, value_delimiter = ',', required = true)]
        cells: Vec<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// adv-regular, adv-irregular, burgers or euler.
    #[arg(long, value_parser = |s: &str| s.parse::<CaseId>())]
    case: CaseId,
    /// l (advection only), nl, tm1 or tm2.
    #[arg(long, value_parser = parse_method)]
    solver: Method,
    /// unlimited, mood or mood-as.
    #[arg(long, value_parser = parse_mode, default_value = "mood")]
    mode: Mode,
    #[arg(long, default_value_t = 5)]
    d_max: usize,
    /// File of key=value settings applied before --set.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Setting override, e.g. --set cfl=0.25; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long, short)]
    out: PathBuf,
}

impl Common {
    fn settings(&self) -> Settings<'_> {
        Settings {
            case: self.case,
            method: self.solver,
            mode: self.mode,
            d_max: self.d_max,
            config_file: self.config.as_deref(),
            overrides: &self.overrides,
        }
    }
}

fn init_logging() -> Result<()> {
    let level = match std::env::var("MOOD1D_LOG").as_deref() {
        Err(_) | Ok("quiet") => log::LevelFilter::Warn,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        Ok(other) => bail!("MOOD1D_LOG must be quiet, info or debug, got `{other}`"),
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    Ok(())
}

fn run(common: &Common, cells: usize) -> Result<()> {
    let req = common.settings().request(cells)?;
    let out = solve(&req)?;
    write_run(&common.out, &out)?;
    let s = &out.summary;
    println!("{} I={} {}/{}: {}, E1 {:?}, Einf {:?}", s.case, s.cells, s.solver, s.mode, s.termination, s.e1, s.einf);
    Ok(())
}

fn convergence(common: &Common, cells: &[usize]) -> Result<()> {
    ensure!(cells.len() >= 2, "a convergence study needs at least two meshes");
    let mut seen = HashSet::new();
    for &n in cells {
        ensure!(seen.insert(n), "mesh size {n} is requested twice");
    }
    let settings = common.settings();
    let requests = cells.iter().map(|&n| settings.request(n)).collect::<Result<Vec<_>>>()?;
    let outcomes = thread::scope(|s| {
        let handles: Vec<_> = requests.iter().map(|r| s.spawn(move || solve(r))).collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect::<Result<Vec<_>>>()
    })?;
    let rows = convergence_table(&outcomes, requests[0].config.detectors.component)?;
    std::fs::create_dir_all(&common.out)?;
    write_convergence(&common.out.join("convergence.csv"), &rows)?;
    print!("{}", format_convergence(&rows));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_logging().and_then(|()| match &cli.command {
        Command::Run { common, cells } => run(common, *cells),
        Command::Convergence { common, cells } => convergence(common, cells),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
