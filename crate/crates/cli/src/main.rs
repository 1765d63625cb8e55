//! `sfvem-bench`: runs the third-medium contact benchmarks from presets or
//! JSON configuration files.
//!
//! Exit codes: 0 on success, 1 on configuration or mesh errors, 2 when the
//! load program collapses.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use sfvem::bench::{run_benchmark, sweep, sweep_csv, BenchmarkConfig, SweepGrid, PRESETS};
use sfvem::material::RegularizationKind;
use sfvem::mesh::BenchmarkId;
use sfvem::solver::Termination;

#[derive(Debug, Parser)]
#[command(name = "sfvem-bench", version, about = "Third-medium contact benchmarks with stabilization-free VEM")]
struct Args {
    /// JSON configuration; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset name, or the benchmark id when a config file is given.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    refinement: Option<u32>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long = "alpha-r")]
    alpha_r: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Regularization kind: huhu, huhu-dev, rot-j or tan-rot-j.
    #[arg(long)]
    reg: Option<RegularizationKind>,
    #[arg(long)]
    steps: Option<usize>,
    /// Vertical displacement of the loaded set at full load.
    #[arg(long, allow_hyphen_values = true)]
    uy: Option<f64>,
    /// Relative Newton tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON grid `{"gamma": [...], "alpha_r": [...], "reg": [...]}` to sweep over.
    #[arg(long)]
    sweep: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    no_auto_adjust: bool,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    dump_config: bool,
    /// List the presets and exit.
    #[arg(long)]
    list: bool,
}

fn resolve(args: &Args) -> Result<BenchmarkConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut cfg: BenchmarkConfig =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            if let Some(p) = &args.problem {
                cfg.problem = p.parse::<BenchmarkId>()?;
            }
            cfg
        }
        None => BenchmarkConfig::preset(args.problem.as_deref().unwrap_or("box-self-contact"))?,
    };
    if let Some(r) = args.refinement {
        cfg.refinement = r;
    }
    if let Some(g) = args.gamma {
        cfg.medium.gamma = g;
    }
    if let Some(a) = args.alpha_r {
        cfg.medium.alpha_r = a;
    }
    if let Some(b) = args.beta {
        cfg.medium.beta = b;
    }
    if let Some(k) = args.reg {
        cfg.medium.reg = k;
    }
    if let Some(n) = args.steps {
        cfg.load.n_steps = n;
    }
    if let Some(uy) = args.uy {
        let Some(set) = cfg.load.reaction_set.clone() else {
            bail!("--uy needs a loaded set (`reaction_set`) in the configuration");
        };
        cfg.load.targets.entry(set).or_insert([None, None])[1] = Some(uy);
    }
    if let Some(t) = args.tol {
        cfg.newton.tol_rel = t;
    }
    if let Some(o) = &args.out {
        cfg.output = Some(o.clone());
    }
    if args.no_auto_adjust {
        cfg.load.auto_adjust.enabled = false;
    }
    Ok(cfg)
}

fn run(args: &Args) -> Result<ExitCode> {
    if args.list {
        for p in PRESETS {
            println!("{p}");
        }
        return Ok(ExitCode::SUCCESS);
    }
    let cfg = resolve(args)?;
    if args.dump_config {
        println!("{}", serde_json::to_string_pretty(&cfg)?);
        return Ok(ExitCode::SUCCESS);
    }
    let threads = args.threads.unwrap_or(0);
    if let Some(path) = &args.sweep {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let grid: SweepGrid = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let rows = sweep(&cfg, &grid, if threads == 0 { 1 } else { threads })?;
        print!("{}", sweep_csv(&rows));
        let all_done = rows.iter().all(|r| r.status == "completed");
        return Ok(if all_done { ExitCode::SUCCESS } else { ExitCode::from(2) });
    }
    if threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    let run = run_benchmark(&cfg)?;
    let report = &run.report;
    let gap = report.final_gap().map_or_else(|| "n/a".to_string(), |g| format!("{g:.6e}"));
    match &report.termination {
        Termination::Completed => {
            println!(
                "completed: {} steps, {} halvings, final gap {gap}",
                report.steps.len(),
                report.halvings
            );
            Ok(ExitCode::SUCCESS)
        }
        Termination::StepCollapse { factor, reason } => {
            eprintln!("step collapse at load factor {factor}: {reason} (final gap {gap})");
            Ok(ExitCode::from(2))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
