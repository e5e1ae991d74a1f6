//! Approximate dynamic time warping.
//!
//! The pipeline brackets the distance with the discrete Fréchet estimate,
//! builds the active quadtree and its pair family between the implied
//! scales, turns the pairs into weighted grid rectangles, and sweeps their
//! boundary points row by row.

use std::time::{Duration, Instant};

use crate::error::{param, Error, Result};
use crate::exact_dp::exact_dtw;
use crate::frechet::{dtw_bounds, DistanceBounds};
use crate::geometry::{dist, PointSequence};
use crate::quadtree::{build_active_tree, build_pair_family, PairFamily, QuadTree, Scales};
use crate::rectangles::{build_rectangles, RectangleCover};
use crate::sweep::{sweep_dtw, SweepOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Computed by the exact dynamic program or a closed form.
    Exact,
    Approx,
}

#[derive(Debug, Clone, Default)]
pub struct ApproxStats {
    pub num_rects: usize,
    pub boundary_points: usize,
    /// ED only.
    pub union_boundary_points: Option<usize>,
    pub pairs: usize,
    pub pairing_calls: usize,
    pub rmq_ops: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct ApproxResult {
    pub value: f64,
    pub mode: Mode,
    /// The bracketing estimates, when they were computed.
    pub bounds: Option<DistanceBounds>,
    pub stats: ApproxStats,
}

impl ApproxResult {
    pub(crate) fn exact(value: f64, bounds: Option<DistanceBounds>, start: Instant) -> Self {
        Self {
            value,
            mode: Mode::Exact,
            bounds,
            stats: ApproxStats {
                elapsed: start.elapsed(),
                ..ApproxStats::default()
            },
        }
    }
}

pub(crate) fn check_inputs(p: &PointSequence, q: &PointSequence, eps: f64) -> Result<()> {
    p.check_same_dim(q)?;
    if p.is_empty() || q.is_empty() {
        return Err(param("sequences must be nonempty"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(param("eps must lie in (0, 1)"));
    }
    Ok(())
}

/// Intermediate products of one approximation run.
#[derive(Debug, Clone)]
pub struct DtwRun {
    pub bounds: DistanceBounds,
    pub scales: Scales,
    pub tree: QuadTree,
    pub family: PairFamily,
    pub cover: RectangleCover,
    pub sweep: SweepOutput,
}

impl DtwRun {
    /// The approximate value at `(m, n)`.
    pub fn value(&self) -> Result<f64> {
        let (m, n) = (self.cover.boundary.cols(), self.cover.boundary.rows());
        match self.sweep.value_at(&self.cover.boundary, m, n) {
            Some(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Coverage { i: m, j: n }),
        }
    }
}

/// Runs the full pipeline with the given bounds; `bounds.lower` must be
/// positive.
pub fn run_dtw(
    p: &PointSequence,
    q: &PointSequence,
    eps: f64,
    bounds: DistanceBounds,
) -> Result<DtwRun> {
    check_inputs(p, q, eps)?;
    let n = p.len().max(q.len());
    let scales = Scales::new(eps, p.dim(), bounds.lower, bounds.upper, n)?;
    let tree = build_active_tree(p, q, scales.r_low, scales.r_high)?;
    let family = build_pair_family(&tree, &scales)?;
    let cover = build_rectangles(&tree, &family, false);
    let sweep = sweep_dtw(&cover.boundary, &cover.rects, |i, j| {
        dist(p.point(i as usize - 1), q.point(j as usize - 1))
    });
    Ok(DtwRun {
        bounds,
        scales,
        tree,
        family,
        cover,
        sweep,
    })
}

/// A value within a factor `1 ± eps` of `dtw(P, Q)`.
///
/// Falls back to the exact dynamic program when `eps < 1/max(m, n)`.
pub fn approx_dtw(p: &PointSequence, q: &PointSequence, eps: f64) -> Result<ApproxResult> {
    check_inputs(p, q, eps)?;
    let start = Instant::now();
    let n = p.len().max(q.len());
    if eps < 1.0 / n as f64 {
        return Ok(ApproxResult::exact(exact_dtw(p, q)?.value, None, start));
    }
    let bounds = dtw_bounds(p, q)?;
    if bounds.lower == 0.0 {
        return Ok(ApproxResult::exact(0.0, Some(bounds), start));
    }
    let run = run_dtw(p, q, eps, bounds)?;
    Ok(ApproxResult {
        value: run.value()?,
        mode: Mode::Approx,
        bounds: Some(bounds),
        stats: ApproxStats {
            num_rects: run.cover.rects.len(),
            boundary_points: run.cover.boundary.len(),
            union_boundary_points: None,
            pairs: run.family.pairs.len(),
            pairing_calls: run.family.pairing_calls,
            rmq_ops: run.sweep.rmq_ops,
            elapsed: start.elapsed(),
        },
    })
}
