//! Command-line front end: runs experiment configs, the fixed acceptance
//! suites, and prints the accepted file formats.

mod config;
mod report;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use mmpoincare::verify::{run_suite, Suite, DEFAULT_SEED};
use rayon::prelude::*;

use config::ExperimentConfig;
use report::{ExperimentReport, RowSink, RunInfo, Status};

const EXIT_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(name = "mmpoincare", version, about = "Large-scale Poincaré inequality experiments on graphs and point clouds")]
struct Cli {
    /// Results directory; overrides the config's `output` field.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Master seed; overrides the config's `seed` field.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments in a JSON config.
    Run { config: PathBuf },
    /// Run an acceptance suite: antenna, theorem, net, spectral, horosphere or all.
    Verify { suite: String },
    /// Describe the input and output formats.
    Formats {
        #[command(subcommand)]
        what: FormatsCommand,
    },
}

#[derive(Subcommand)]
enum FormatsCommand {
    Print,
}

const FORMATS: &str = r#"EDGE LIST (space generator "edge-list")
  # comment lines and blank lines are ignored
  vertices <n>                 optional; otherwise inferred from ids
  <u> <v>                      one undirected edge per line, 0-based ids
  measure                      optional block header, then one line per vertex:
  <v> <mass>                   every vertex exactly once; default mass 1

POINT CLOUD (space generator "point-cloud")
  # comment lines and blank lines are ignored
  weighted                     optional header: last column is the weight
  <x1> <x2> ... <xd> [<w>]     one point per line, same column count throughout
  metric: {"name": "euclidean"} | {"name": "horospherical", "scale": s}
          | {"name": "tube-graph-ambient", "link_radius": r}

CONFIG (JSON; one experiment or {"experiments": [...]})
  id        string, names the output subdirectory
  seed      integer, default 0
  output    results directory, default "results"
  space     {"generator": ...}
              antenna        max_radius
              grid           dim, max_radius
              tree           branching, depth
              random-geometric count, radius
              edge-list      path
              horosphere     n, a, height, extent, count
              tube-surface   tube_radius, arm_extent, spine_extent, density
              point-cloud    path, metric
  net       {"epsilon": e, "order": "index" | {"shuffled": seed}}
            required for horosphere, tube-surface and point-cloud
  analysis  {"name": ...}
              growth           radii, fit_range, center?, expect_alpha?
              poincare-ratio   sigma, beta, outer_factor, r0?, radii, field, center?
              optimal-constant radii, outer_factor, sigma?, search_iters?, center?
              verify-theorem   sigmas, radii, fit_range, fields?, center?
              divergence       sigma, beta, outer_factor, alpha, radii, field,
                               slope_tolerance?, center?
              ledger           n, kappa, epsilon, sigma, beta, r0, r1, v_prime,
                               outer_factor, local_poincare, smoothing
  local_poincare {"name": "buser", "sqrt_kappa": b} | {"name": "constant", "value": c}
  smoothing {"source": "plug-in" | "empirical", "t": t, "tprime": t2}
              rough-isometry   pair_budget?, target? ("net" | "antenna")
  field     {"kind": "antenna-height" | "random" | "coordinate", "axis": k}
  center    "origin" or {"vertex": id}

OUTPUT (<output>/<id>/)
  report.json    full report with status and rows
  report.csv     columns: experiment, config_hash, params, metric, value, pass
                 pass is "pass", "fail" or empty for plain measurements
  metadata.json  seed, jobs, tool version, start and finish times

EXIT CODES
  0 all checks passed, 1 a check failed or a run was incomplete, 2 invalid input
"#;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    }
    match &cli.command {
        Command::Formats { what: FormatsCommand::Print } => {
            print!("{FORMATS}");
            ExitCode::SUCCESS
        }
        Command::Verify { suite } => verify(suite, cli.seed.unwrap_or(DEFAULT_SEED)),
        Command::Run { config } => run_config(&cli, config),
    }
}

fn verify(name: &str, seed: u64) -> ExitCode {
    let suite = match Suite::parse(name) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let outcomes = run_suite(suite, seed, |o| println!("{}", o.line()));
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    if passed == outcomes.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

fn run_config(cli: &Cli, path: &Path) -> ExitCode {
    let (mut experiments, base) = match config::load(path) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    if let Some(seed) = cli.seed {
        for e in &mut experiments {
            e.seed = seed;
        }
    }
    let dirs: Vec<PathBuf> = experiments
        .iter()
        .map(|e| {
            let root = cli.output.clone().or_else(|| e.output.clone()).unwrap_or_else(|| "results".into());
            root.join(&e.id)
        })
        .collect();
    for (e, dir) in experiments.iter().zip(&dirs) {
        if let Err(err) = report::check_resume(dir, &e.hash()) {
            eprintln!("error: {err:#}");
            return ExitCode::from(EXIT_INVALID);
        }
    }

    let info = RunInfo {
        seed: cli.seed.unwrap_or(0),
        jobs: rayon::current_num_threads(),
        started: chrono::Utc::now(),
    };
    let reports: Vec<ExperimentReport> = experiments.par_iter().map(|e| execute(e, &base)).collect();

    let mut ok = true;
    for ((e, dir), rep) in experiments.iter().zip(&dirs).zip(&reports) {
        let info = RunInfo { seed: e.seed, ..info };
        if let Err(err) = report::write(dir, rep, &info).with_context(|| format!("writing {}", dir.display())) {
            eprintln!("error: {err:#}");
            return ExitCode::from(EXIT_FAILED);
        }
        let checks = rep.rows.iter().filter(|r| r.pass.is_some()).count();
        let failed = rep.rows.iter().filter(|r| r.pass == Some(false)).count();
        let status = match (&rep.status, failed) {
            (Status::Incomplete, _) => "INCOMPLETE",
            (_, 0) => "PASS",
            _ => "FAIL",
        };
        println!(
            "{status} {} [{}] rows={} checks={} failed={} -> {}",
            rep.id,
            rep.analysis,
            rep.rows.len(),
            checks,
            failed,
            dir.display()
        );
        if let Some(err) = &rep.error {
            eprintln!("  {}: {err}", rep.id);
        }
        ok &= rep.all_pass();
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

fn execute(cfg: &ExperimentConfig, base: &Path) -> ExperimentReport {
    let hash = cfg.hash();
    let mut sink = RowSink::new(&cfg.id, &hash);
    let result = run::execute(cfg, base, &mut sink);
    ExperimentReport {
        id: cfg.id.clone(),
        analysis: cfg.analysis.name().to_string(),
        config_hash: hash,
        status: if result.is_ok() { Status::Complete } else { Status::Incomplete },
        error: result.err().map(|e| format!("{e:#}")),
        rows: sink.rows,
    }
}
