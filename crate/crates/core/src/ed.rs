//! Approximate edit distance with a linear gap penalty.
//!
//! Same pipeline as DTW on the `(m+1) x (n+1)` grid, whose diagonal edges
//! carry the point distances and whose axis edges cost `g`. Points reached
//! only through uncovered cells are bridged from the union boundary of the
//! rectangles.

use std::time::Instant;

use crate::dtw::{check_inputs, ApproxResult, ApproxStats, Mode};
use crate::error::{param, Error, Result};
use crate::exact_dp::exact_ed;
use crate::frechet::{ed_bounds, DistanceBounds, EdBounds};
use crate::geometry::{dist, PointSequence};
use crate::quadtree::{build_active_tree, build_pair_family, PairFamily, QuadTree, Scales};
use crate::rectangles::{build_rectangles, RectangleCover};
use crate::sweep::{mark_union_boundary, sweep_ed, SweepOutput, UnionBoundary};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdConfig {
    /// Gap penalty.
    pub g: f64,
    pub eps: f64,
}

impl EdConfig {
    pub fn new(g: f64, eps: f64) -> Result<Self> {
        let cfg = Self { g, eps };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(param("gap penalty g must be positive and finite"));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(param("eps must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Intermediate products of one approximation run.
#[derive(Debug, Clone)]
pub struct EdRun {
    pub bounds: DistanceBounds,
    pub scales: Scales,
    pub tree: QuadTree,
    pub family: PairFamily,
    pub cover: RectangleCover,
    pub union: UnionBoundary,
    pub sweep: SweepOutput,
}

impl EdRun {
    /// The approximate value at `(m+1, n+1)`.
    pub fn value(&self) -> Result<f64> {
        let (m1, n1) = (self.cover.boundary.cols(), self.cover.boundary.rows());
        match self.sweep.value_at(&self.cover.boundary, m1, n1) {
            Some(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Coverage { i: m1, j: n1 }),
        }
    }
}

pub fn run_ed(
    p: &PointSequence,
    q: &PointSequence,
    cfg: &EdConfig,
    bounds: DistanceBounds,
) -> Result<EdRun> {
    cfg.validate()?;
    check_inputs(p, q, cfg.eps)?;
    let n = p.len().max(q.len()) + 1;
    let scales = Scales::new(cfg.eps, p.dim(), bounds.lower, bounds.upper, n)?;
    let tree = build_active_tree(p, q, scales.r_low, scales.r_high)?;
    let family = build_pair_family(&tree, &scales)?;
    let cover = build_rectangles(&tree, &family, true);
    let union = mark_union_boundary(&cover.rects, &cover.boundary);
    let sweep = sweep_ed(&cover.boundary, &cover.rects, &union, cfg.g, |i, j| {
        dist(p.point(i as usize - 1), q.point(j as usize - 1))
    });
    Ok(EdRun {
        bounds,
        scales,
        tree,
        family,
        cover,
        union,
        sweep,
    })
}

/// A value within a factor `1 ± eps` of `ed(P, Q)` under gap penalty `g`.
pub fn approx_ed(p: &PointSequence, q: &PointSequence, cfg: &EdConfig) -> Result<ApproxResult> {
    cfg.validate()?;
    check_inputs(p, q, cfg.eps)?;
    let start = Instant::now();
    let n = p.len().max(q.len());
    if cfg.eps < 1.0 / n as f64 {
        return Ok(ApproxResult::exact(
            exact_ed(p, q, cfg.g)?.value,
            None,
            start,
        ));
    }
    let bounds = match ed_bounds(p, q, cfg.g)? {
        EdBounds::Exact(v) => return Ok(ApproxResult::exact(v, None, start)),
        EdBounds::Bounds(b) => b,
    };
    let run = run_ed(p, q, cfg, bounds)?;
    Ok(ApproxResult {
        value: run.value()?,
        mode: Mode::Approx,
        bounds: Some(bounds),
        stats: ApproxStats {
            num_rects: run.cover.rects.len(),
            boundary_points: run.cover.boundary.len(),
            union_boundary_points: Some(run.union.count),
            pairs: run.family.pairs.len(),
            pairing_calls: run.family.pairing_calls,
            rmq_ops: run.sweep.rmq_ops,
            elapsed: start.elapsed(),
        },
    })
}
