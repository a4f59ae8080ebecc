use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use podnewton::Method;
use podnewton_bench::output::{error_json, simulation_run_json, write_benchmark, write_json, write_simulation};
use podnewton_bench::spec::apply_seed;
use podnewton_bench::{compute_speedup, driver_settings, run_benchmark, simulate_built, BenchError, BenchmarkRow, BenchmarkSpec, SweepPoint};
use podnewton_reservoir::Scenario;

#[derive(Parser)]
#[command(name = "podnewton", version, about = "Newton and POD Newton-like reservoir simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Disable step halving when a step fails.
    #[arg(long, global = true)]
    strict: bool,
    /// Seed of the synthetic rock field.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run benchmark points concurrently; timings become indicative.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario.
    Simulate {
        scenario: PathBuf,
        #[arg(long, default_value = "newton-like")]
        method: Method,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep grid sizes with both methods.
    Bench {
        spec: PathBuf,
        /// Output directory; falls back to the spec's `out`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the planned sweep and exit.
        #[arg(long)]
        dry_run: bool,
        /// 1200 to 13200 cells on 60 rows.
        #[arg(long)]
        full_scale: bool,
        /// Override the spec's repetition count.
        #[arg(long)]
        repetitions: Option<usize>,
    },
}

fn create_dir(dir: &Path) -> Result<(), BenchError> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))
}

fn simulate_cmd(cli: &Cli, path: &Path, method: Method, out: &Path) -> Result<(), BenchError> {
    let (mut scenario, base) = Scenario::load(path)?;
    if let Some(seed) = cli.seed {
        apply_seed(&mut scenario, seed);
    }
    let built = scenario.build(&base)?;
    create_dir(out)?;
    let settings = driver_settings(built.x0.len(), method, cli.strict);
    let point = SweepPoint { cells: scenario.cell_count(), columns: scenario.grid.nx, rows: scenario.grid.ny };
    match simulate_built(&built, method, cli.strict) {
        Ok(result) => {
            let row = BenchmarkRow::from_result(point, method, 0, &result);
            write_simulation(out, &result, Some(&row))?;
            write_json(out, "run.json", &simulation_run_json(&scenario, &settings, Some(&row)))?;
            println!(
                "{method}: {} steps, {} iterations ({} reduced, {} full), {:.3} s",
                result.reports.len(),
                row.iterations,
                row.reduced_solves,
                row.full_solves,
                row.wall_clock_s
            );
            Ok(())
        }
        Err(e) => {
            if let Some(partial) = e.partial() {
                write_simulation(out, partial, None)?;
            }
            write_json(out, "run.json", &simulation_run_json(&scenario, &settings, None))?;
            Err(e.into())
        }
    }
}

fn bench_cmd(
    cli: &Cli,
    path: &Path,
    out: Option<&Path>,
    dry_run: bool,
    full_scale: bool,
    repetitions: Option<usize>,
) -> Result<(), BenchError> {
    let (mut spec, spec_dir) = BenchmarkSpec::load(path)?;
    if full_scale {
        spec = spec.full_scale();
    }
    spec.strict |= cli.strict;
    spec.seed = cli.seed.or(spec.seed);
    if let Some(r) = repetitions {
        spec.repetitions = r;
    }
    spec.validate()?;
    let plan = spec.plan()?;
    if dry_run {
        println!("{:>7} {:>7} {:>5} {:>7}  methods x repetitions", "cells", "columns", "rows", "n_x");
        for p in &plan {
            let methods: Vec<String> = spec.methods.iter().map(|m| m.to_string()).collect();
            println!("{:>7} {:>7} {:>5} {:>7}  {} x {}", p.cells, p.columns, p.rows, p.n_x(), methods.join(","), spec.repetitions);
        }
        return Ok(());
    }
    let out = out
        .map(Path::to_path_buf)
        .or_else(|| spec.out.as_ref().map(|o| spec_dir.join(o)))
        .ok_or_else(|| BenchError::InvalidSpec("no output directory: pass --out or set `out`".into()))?;
    create_dir(&out)?;
    let (scenario, _) = spec.base_scenario(&spec_dir)?;
    let rows = run_benchmark(&spec, &spec_dir, cli.threads)?;
    let report = compute_speedup(&rows);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for r in rows.iter().filter(|r| !r.is_ok()) {
        eprintln!("warning: {} cells, {}: {}", r.cells, r.method, r.error.as_deref().unwrap_or_default());
    }
    write_benchmark(&out, &spec, &scenario, &plan, &rows, &report, cli.threads)?;
    for s in &report.sizes {
        println!("{:>7} cells  newton {:.3} s  newton-like {:.3} s  speedup {:.1} %", s.cells, s.newton_s, s.newton_like_s, 100.0 * s.speedup);
    }
    if let (Some(m), s) = (report.mean, report.std_dev) {
        println!("mean speedup {:.1} %, std {}", 100.0 * m, s.map_or("n/a".into(), |s| format!("{:.1} %", 100.0 * s)));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, out) = match &cli.command {
        Command::Simulate { scenario, method, out } => (simulate_cmd(&cli, scenario, *method, out), Some(out.clone())),
        Command::Bench { spec, out, dry_run, full_scale, repetitions } => {
            (bench_cmd(&cli, spec, out.as_deref(), *dry_run, *full_scale, *repetitions), out.clone())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let value = error_json(&e);
            if let Some(dir) = out.filter(|d| d.is_dir()) {
                let _ = write_json(&dir, "error.json", &value);
            }
            eprintln!("{value}");
            ExitCode::FAILURE
        }
    }
}
