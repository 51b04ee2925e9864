//! Command-line driver: runs verification suites, single Chern-Simons
//! evaluations and ε-sweeps, and exports the run record.
//!
//! Exit codes: 0 when every suite passes, 1 when any suite fails, 2 on a
//! configuration or I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use adiabatic_cs::chern_simons::{adiabatic_sweep, cs_reduced};
use adiabatic_cs::config::{parse_bool, parse_config, parse_eps_grid, parse_grid, Config};
use adiabatic_cs::export::{export_results, to_csv_string, to_json_string, ExportFormat, ResultRow, RunRecord};
use adiabatic_cs::presets::{build_preset, PresetName, PresetSpec};
use adiabatic_cs::suite::{run_suite, RunOptions, SuiteName, Tolerances};
use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "adiabatic-cs", version, about = "Chern-Simons verification for adiabatic metric families")]
struct Cli {
    /// Write the record here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// json or csv.
    #[arg(long, global = true)]
    format: Option<String>,
    /// key = value file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct PresetArgs {
    /// hopf, lens, torus-random or product-flat.
    #[arg(long)]
    geometry: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long = "lens-order")]
    lens_order: Option<u32>,
    /// Quadrature points per base axis, N0xN1.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long = "fiber-volume")]
    fiber_volume: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one comparison suite.
    Verify {
        /// christoffel, spin, reduce, integrand, cs or sweep.
        #[arg(long)]
        suite: Option<String>,
        #[command(flatten)]
        preset: PresetArgs,
        /// Sample points for pointwise suites.
        #[arg(long)]
        points: Option<usize>,
        /// Overrides every tolerance of the suite.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long = "eps-grid")]
        eps_grid: Option<String>,
    },
    /// Evaluate both Chern-Simons routes at one ε.
    Compute {
        #[command(flatten)]
        preset: PresetArgs,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Evaluate over an ε grid, optionally fitting a·ε + b·ε².
    Sweep {
        #[command(flatten)]
        preset: PresetArgs,
        #[arg(long = "eps-grid")]
        eps_grid: Option<String>,
        #[arg(long)]
        fit: bool,
    },
}

fn pick<T: std::str::FromStr>(flag: Option<T>, cfg: &Config, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => Ok(cfg.parse::<T>(key)?),
    }
}

fn preset_spec(args: &PresetArgs, cfg: &Config, epsilon: Option<f64>) -> Result<PresetSpec> {
    let name: PresetName = pick(args.geometry.clone(), cfg, "geometry")?
        .ok_or_else(|| anyhow!("--geometry is required"))?
        .parse::<PresetName>()?;
    let mut spec = PresetSpec::new(name);
    if let Some(seed) = pick(args.seed, cfg, "seed")? {
        spec.seed = seed;
    }
    if let Some(r) = pick(args.radius, cfg, "radius")? {
        spec.radius = r;
    }
    if let Some(p) = pick(args.lens_order, cfg, "lens-order")? {
        spec.lens_order = p;
    }
    if let Some(g) = pick(args.grid.clone(), cfg, "grid")? {
        spec.grid = parse_grid(&g)?;
    }
    spec.fiber_volume = pick(args.fiber_volume, cfg, "fiber-volume")?;
    if let Some(e) = epsilon {
        spec.epsilon = e;
    }
    spec.validate()?;
    Ok(spec)
}

fn eps_grid(flag: Option<String>, cfg: &Config) -> Result<Option<Vec<f64>>> {
    Ok(match pick(flag, cfg, "eps-grid")? {
        Some(s) => Some(parse_eps_grid(&s)?),
        None => None,
    })
}

/// Builds and emits the record; returns whether every suite passed.
fn run(cli: Cli) -> Result<bool> {
    let cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_config(&text)?
        }
        None => Config::default(),
    };
    let format: ExportFormat = pick(cli.format.clone(), &cfg, "format")?
        .unwrap_or_else(|| "json".to_string())
        .parse()?;
    let output: Option<PathBuf> = pick(cli.output.clone(), &cfg, "output")?;

    let record = match cli.command {
        Command::Verify {
            suite,
            preset,
            points,
            tolerance,
            epsilon,
            eps_grid: grid,
        } => {
            let suite: SuiteName = pick(suite, &cfg, "suite")?
                .ok_or_else(|| anyhow!("--suite is required"))?
                .parse()?;
            let spec = preset_spec(&preset, &cfg, pick(epsilon, &cfg, "epsilon")?)?;
            let mut opts = RunOptions::default();
            if let Some(p) = pick(points, &cfg, "points")? {
                if p == 0 {
                    return Err(anyhow!("--points must be positive"));
                }
                opts.points = p;
            }
            if let Some(t) = pick(tolerance, &cfg, "tolerance")? {
                opts.tolerances = Tolerances::uniform(t)?;
            }
            if let Some(g) = eps_grid(grid, &cfg)? {
                opts.eps_grid = g;
            }
            let outcome = run_suite(suite, &spec, &opts)?;
            let fiber_volume = build_preset(&spec)?.kk.fiber_volume();
            for c in &outcome.report.checks {
                eprintln!(
                    "{:<5} {}/{} {}: {:.3e} (tolerance {:.3e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    suite,
                    spec.name,
                    c.name,
                    c.value,
                    c.tolerance
                );
            }
            let mut rec = RunRecord::new(spec, fiber_volume);
            rec.results = outcome.results.iter().map(ResultRow::from).collect();
            rec.fit = outcome.fit;
            rec.suites.push(outcome.report);
            rec
        }
        Command::Compute { preset, epsilon } => {
            let spec = preset_spec(&preset, &cfg, pick(epsilon, &cfg, "epsilon")?)?;
            let p = build_preset(&spec)?;
            let r = cs_reduced(&p.kk, &p.domain, &p.quadrature)?;
            let mut rec = RunRecord::new(spec, r.fiber_volume);
            rec.results.push(ResultRow::from(&r));
            rec
        }
        Command::Sweep { preset, eps_grid: grid, fit } => {
            let fit = fit || pick::<String>(None, &cfg, "fit")?.map(|s| parse_bool(&s)).transpose()?.unwrap_or(false);
            let grid = eps_grid(grid, &cfg)?.ok_or_else(|| anyhow!("--eps-grid is required"))?;
            let spec = preset_spec(&preset, &cfg, None)?;
            let p = build_preset(&spec)?;
            let mut rec = RunRecord::new(spec, p.kk.fiber_volume());
            if fit {
                let sweep = adiabatic_sweep(&p.kk, &grid, &p.domain, &p.quadrature)?;
                rec.results = sweep.results.iter().map(ResultRow::from).collect();
                rec.fit = Some(sweep.fit);
            } else {
                for &e in &grid {
                    let r = cs_reduced(&p.kk.with_epsilon(e)?, &p.domain, &p.quadrature)?;
                    rec.results.push(ResultRow::from(&r));
                }
            }
            rec
        }
    };

    match output {
        Some(path) => export_results(&record, format, &path).with_context(|| format!("writing {}", path.display()))?,
        None => print!(
            "{}",
            match format {
                ExportFormat::Json => to_json_string(&record)?,
                ExportFormat::Csv => to_csv_string(&record.results)?,
            }
        ),
    }
    Ok(record.passed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
