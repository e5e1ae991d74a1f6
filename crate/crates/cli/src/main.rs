mod bench;
mod io;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use trajdist::frechet::dfr_2approx;
use trajdist::{
    approx_dtw, approx_ed, exact_dfr, exact_dtw, exact_ed, gen_curve, CurveFamilyParams, EdConfig,
    PointSequence,
};

use crate::bench::{run_bench, BenchConfig};
use crate::io::{parse_trajectory, write_trajectory, Format};
use crate::report::{millis, ReportMode, RunReport};

/// Approximate DTW, edit distance and discrete Fréchet distance between
/// trajectories. Results are printed as JSON.
#[derive(Debug, Parser)]
#[command(name = "trajdist", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Inputs {
    /// First trajectory (CSV, or JSON for `.json` files)
    a: PathBuf,
    /// Second trajectory
    b: PathBuf,
    /// Override the format detected from the file extension
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dynamic time warping
    Dtw {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        eps: f64,
        /// Also run the exact dynamic program and report the ratio
        #[arg(long)]
        exact: bool,
    },
    /// Edit distance with gap penalty g
    Ed {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 1.0)]
        g: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        exact: bool,
    },
    /// Discrete Fréchet distance (2-approximation)
    Dfr {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        exact: bool,
    },
    /// Generate a curve from one of the supported families
    Gen {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        shape: Shape,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Boundary-size scaling benchmark
    Bench {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        eps: f64,
        /// Comma-separated sequence lengths
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Gap penalty for the edit-distance runs
        #[arg(long, default_value_t = 1.0)]
        g: f64,
        #[command(flatten)]
        shape: Shape,
        /// Skip the exact DTW timing
        #[arg(long)]
        skip_exact: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Packed,
    Bounded,
    Backbone,
}

#[derive(Debug, clap::Args)]
struct Shape {
    /// Packedness or boundedness constant (default 8 packed, 4 bounded)
    #[arg(long, conflicts_with_all = ["c1", "c2"])]
    kappa: Option<f64>,
    /// Backbone minimum step (default 1.2)
    #[arg(long)]
    c1: Option<f64>,
    /// Backbone maximum step (default 1.8)
    #[arg(long)]
    c2: Option<f64>,
}

impl Family {
    fn name(self) -> &'static str {
        match self {
            Family::Packed => "packed",
            Family::Bounded => "bounded",
            Family::Backbone => "backbone",
        }
    }

    fn params(self, shape: &Shape, seed: u64) -> Result<CurveFamilyParams> {
        let backbone_flags = shape.c1.is_some() || shape.c2.is_some();
        Ok(match self {
            Family::Packed | Family::Bounded if backbone_flags => {
                anyhow::bail!("--c1/--c2 only apply to the backbone family")
            }
            Family::Backbone if shape.kappa.is_some() => {
                anyhow::bail!("--kappa does not apply to the backbone family")
            }
            Family::Packed => CurveFamilyParams::packed(shape.kappa.unwrap_or(8.0), seed),
            Family::Bounded => CurveFamilyParams::bounded(shape.kappa.unwrap_or(4.0), seed),
            Family::Backbone => {
                CurveFamilyParams::backbone(shape.c1.unwrap_or(1.2), shape.c2.unwrap_or(1.8), seed)
            }
        })
    }
}

#[derive(Debug, Serialize)]
struct GenReport<'a> {
    path: &'a Path,
    family: &'a str,
    n: usize,
    d: usize,
    seed: u64,
}

/// An error that indicates a bug rather than bad input.
#[derive(Debug, thiserror::Error)]
#[error("internal error: {0}")]
struct Internal(trajdist::Error);

fn classify(e: trajdist::Error) -> anyhow::Error {
    match e {
        trajdist::Error::Coverage { .. } | trajdist::Error::Range { .. } => Internal(e).into(),
        e => e.into(),
    }
}

fn lib<T>(r: trajdist::Result<T>) -> Result<T> {
    r.map_err(classify)
}

fn load(inputs: &Inputs) -> Result<(PointSequence, PointSequence)> {
    let read = |path: &Path| {
        let fmt = inputs.format.unwrap_or_else(|| Format::from_path(path));
        parse_trajectory(path, fmt)
    };
    let p = read(&inputs.a)?;
    let q = read(&inputs.b)?;
    if p.dim() != q.dim() {
        anyhow::bail!(
            "dimension mismatch: {} has d={}, {} has d={}",
            inputs.a.display(),
            p.dim(),
            inputs.b.display(),
            q.dim()
        );
    }
    Ok((p, q))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Dtw { inputs, eps, exact } => {
            let (p, q) = load(&inputs)?;
            let r = lib(approx_dtw(&p, &q, eps))?;
            let mut report = RunReport::from_approx(&r, eps, None, p.len(), q.len(), p.dim());
            if exact {
                let start = Instant::now();
                let v = lib(exact_dtw(&p, &q))?.value;
                report = report.with_exact(v, start.elapsed());
            }
            print_json(&report)
        }
        Command::Ed {
            inputs,
            g,
            eps,
            exact,
        } => {
            let (p, q) = load(&inputs)?;
            let cfg = lib(EdConfig::new(g, eps))?;
            let r = lib(approx_ed(&p, &q, &cfg))?;
            let mut report = RunReport::from_approx(&r, eps, Some(g), p.len(), q.len(), p.dim());
            if exact {
                let start = Instant::now();
                let v = lib(exact_ed(&p, &q, g))?.value;
                report = report.with_exact(v, start.elapsed());
            }
            print_json(&report)
        }
        Command::Dfr { inputs, exact } => {
            let (p, q) = load(&inputs)?;
            let start = Instant::now();
            let value = lib(dfr_2approx(&p, &q))?;
            let elapsed = start.elapsed();
            let mut report = RunReport {
                value,
                lower_bound: value / 2.0,
                upper_bound: value,
                mode: ReportMode::Approx,
                eps: None,
                g: None,
                num_rects: None,
                boundary_points: None,
                union_boundary_points: None,
                pairing_calls: None,
                elapsed_ms: millis(elapsed),
                n: q.len(),
                m: p.len(),
                d: p.dim(),
                exact_value: None,
                exact_elapsed_ms: None,
                ratio: None,
            };
            if exact {
                let start = Instant::now();
                let v = lib(exact_dfr(&p, &q))?;
                report = report.with_exact(v, start.elapsed());
            }
            print_json(&report)
        }
        Command::Gen {
            family,
            n,
            seed,
            shape,
            output,
            format,
        } => {
            let params = family.params(&shape, seed)?;
            let curve = lib(gen_curve(&params, n))?;
            let fmt = format.unwrap_or_else(|| Format::from_path(&output));
            write_trajectory(&output, &curve, fmt)
                .with_context(|| format!("writing {}", output.display()))?;
            print_json(&GenReport {
                path: &output,
                family: family.name(),
                n: curve.len(),
                d: curve.dim(),
                seed,
            })
        }
        Command::Bench {
            family,
            eps,
            sizes,
            seed,
            g,
            shape,
            skip_exact,
            output,
        } => {
            let cfg = BenchConfig {
                family: family.name().to_string(),
                params: family.params(&shape, seed)?,
                eps,
                g,
                sizes,
                exact: !skip_exact,
            };
            let report = run_bench(&cfg, seed)
                .map_err(|e| e.downcast::<trajdist::Error>().map_or_else(|e| e, classify))?;
            let text = serde_json::to_string_pretty(&report)?;
            std::fs::write(&output, &text)
                .with_context(|| format!("writing {}", output.display()))?;
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            if e.is::<Internal>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
        Err(_) => ExitCode::from(2),
    }
}
