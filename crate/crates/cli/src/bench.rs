//! Scaling harness: one DTW and one ED run per size on a seeded pair of
//! curves, plus log-log slopes of the boundary counts.

use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use trajdist::{approx_dtw, approx_ed, exact_dtw, gen_curve, CurveFamilyParams, EdConfig, Mode};

use crate::report::millis;

pub const THREADS_VAR: &str = "TRAJDIST_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub dtw_value: f64,
    pub dtw_mode: String,
    pub num_rects: usize,
    pub boundary_points: usize,
    pub pairing_calls: usize,
    pub elapsed_ms: f64,
    pub ed_value: f64,
    pub ed_mode: String,
    pub union_boundary_points: Option<usize>,
    pub ed_elapsed_ms: f64,
    pub exact_value: Option<f64>,
    pub exact_elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub family: String,
    pub eps: f64,
    pub g: f64,
    pub seed: u64,
    pub threads: usize,
    pub rows: Vec<BenchRow>,
    pub slope_boundary_points: Option<f64>,
    pub slope_union_boundary_points: Option<f64>,
}

pub struct BenchConfig {
    pub family: String,
    pub params: CurveFamilyParams,
    pub eps: f64,
    pub g: f64,
    pub sizes: Vec<usize>,
    pub exact: bool,
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// distinct positive points.
pub fn loglog_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = pts
        .iter()
        .filter(|&&(x, y)| x > 0.0 && y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_VAR) {
        Ok(s) => {
            let t: usize = s
                .trim()
                .parse()
                .with_context(|| format!("{THREADS_VAR}={s:?} is not a thread count"))?;
            Ok(t.max(1))
        }
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn mode_name(m: Mode) -> String {
    match m {
        Mode::Exact => "exact",
        Mode::Approx => "approx",
    }
    .to_string()
}

fn run_size(cfg: &BenchConfig, n: usize) -> trajdist::Result<BenchRow> {
    let p = gen_curve(&cfg.params, n)?;
    let q = gen_curve(&cfg.params.with_seed(cfg.params.seed.wrapping_add(1)), n)?;
    let dtw = approx_dtw(&p, &q, cfg.eps)?;
    let ed = approx_ed(&p, &q, &EdConfig::new(cfg.g, cfg.eps)?)?;
    let (exact_value, exact_elapsed_ms) = if cfg.exact {
        let start = Instant::now();
        let v = exact_dtw(&p, &q)?.value;
        (Some(v), Some(millis(start.elapsed())))
    } else {
        (None, None)
    };
    Ok(BenchRow {
        n,
        dtw_value: dtw.value,
        dtw_mode: mode_name(dtw.mode),
        num_rects: dtw.stats.num_rects,
        boundary_points: dtw.stats.boundary_points,
        pairing_calls: dtw.stats.pairing_calls,
        elapsed_ms: millis(dtw.stats.elapsed),
        ed_value: ed.value,
        ed_mode: mode_name(ed.mode),
        union_boundary_points: ed.stats.union_boundary_points,
        ed_elapsed_ms: millis(ed.stats.elapsed),
        exact_value,
        exact_elapsed_ms,
    })
}

pub fn run_bench(cfg: &BenchConfig, seed: u64) -> Result<BenchReport> {
    let threads = thread_count()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building worker pool")?;
    let rows = pool.install(|| {
        cfg.sizes
            .par_iter()
            .map(|&n| run_size(cfg, n))
            .collect::<trajdist::Result<Vec<_>>>()
    })?;
    let slope = |f: &dyn Fn(&BenchRow) -> Option<usize>| {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| f(r).map(|y| (r.n as f64, y as f64)))
            .collect();
        loglog_slope(&pts)
    };
    Ok(BenchReport {
        family: cfg.family.clone(),
        eps: cfg.eps,
        g: cfg.g,
        seed,
        threads,
        slope_boundary_points: slope(&|r| Some(r.boundary_points)),
        slope_union_boundary_points: slope(&|r| r.union_boundary_points),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [2.0f64, 4.0, 8.0, 16.0]
            .iter()
            .map(|&x| (x, 3.0 * x.powf(1.5)))
            .collect();
        assert!((loglog_slope(&pts).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(loglog_slope(&pts[..1]), None);
        assert_eq!(loglog_slope(&[(2.0, 1.0), (2.0, 5.0)]), None);
    }

    #[test]
    fn rows_are_deterministic() {
        let cfg = BenchConfig {
            family: "packed".into(),
            params: CurveFamilyParams::packed(8.0, 3),
            eps: 0.25,
            g: 1.0,
            sizes: vec![64, 128],
            exact: true,
        };
        let a = run_bench(&cfg, 3).unwrap();
        let b = run_bench(&cfg, 3).unwrap();
        assert_eq!(a.rows.len(), 2);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(
                (x.n, x.dtw_value, x.boundary_points),
                (y.n, y.dtw_value, y.boundary_points)
            );
            assert_eq!(x.union_boundary_points, y.union_boundary_points);
            let exact = x.exact_value.unwrap();
            assert!((x.dtw_value - exact).abs() <= 0.25 * exact + 1e-9);
        }
    }
}
