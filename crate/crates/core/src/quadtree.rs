//! Active portion of a hierarchical grid over `P ∪ Q` and the pairing
//! procedure producing a family of well-separated node pairs.
//!
//! Cells are half-open boxes. The grid is anchored at the bounding-box
//! minimum snapped down to a multiple of `r_high`; a node of level `ℓ` has
//! side `r_low·2^ℓ`, and top-level nodes have side `r_high`.

use std::collections::HashMap;

use crate::error::{param, Error, Result};
use crate::geometry::PointSequence;

/// Largest supported ratio `r_high / r_low`, as a power of two.
pub const MAX_LEVELS: u32 = 62;

/// Scale parameters shared by the pairing and the rectangle construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    /// Pairing separation factor: pairs stop once
    /// `max Δ <= sep·max(dsq, floor)`.
    pub sep: f64,
    /// Additive floor `δ_low / 2n` of the stopping rule.
    pub floor: f64,
    pub r_low: f64,
    pub r_high: f64,
}

fn pow2_at_most(x: f64) -> f64 {
    let mut r = 2f64.powi(x.log2().floor() as i32);
    while r > x {
        r /= 2.0;
    }
    while 2.0 * r <= x {
        r *= 2.0;
    }
    r
}

impl Scales {
    /// `sep = ε / max(16, 8√d)`; `r_low <= sep·floor <= 2 r_low` and
    /// `r_high <= 4 δ_high <= 2 r_high`, both powers of two.
    pub fn new(eps: f64, d: usize, delta_low: f64, delta_high: f64, n: usize) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(param("eps must lie in (0, 1)"));
        }
        if !(delta_low > 0.0 && delta_low <= delta_high && delta_high.is_finite()) {
            return Err(param("need 0 < delta_low <= delta_high"));
        }
        let sep = eps / 16f64.max(8.0 * (d as f64).sqrt());
        let floor = delta_low / (2.0 * n as f64);
        let r_low = pow2_at_most(sep * floor);
        let r_high = pow2_at_most(4.0 * delta_high);
        Ok(Self {
            sep,
            floor,
            r_low,
            r_high,
        })
    }

    pub fn levels(&self) -> u32 {
        (self.r_high / self.r_low).log2().round() as u32
    }
}

/// Which sequence a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    P,
    Q,
}

#[derive(Debug, Clone)]
struct Node {
    level: u32,
    top: u32,
    parent: u32,
    p: (u32, u32),
    q: (u32, u32),
    children: (u32, u32),
}

/// Per-sequence quantised coordinates.
#[derive(Debug, Clone)]
struct Located {
    /// Offset from the anchor, `d` per point.
    rel: Vec<f64>,
    /// Index of the top-level cell, `d` per point.
    top: Vec<i64>,
    /// Cell index at the finest level inside the top cell, `d` per point.
    fine: Vec<u64>,
}

/// The active nodes of the grid hierarchy.
#[derive(Debug, Clone)]
pub struct QuadTree {
    d: usize,
    levels: u32,
    r_low: f64,
    r_high: f64,
    anchor: Vec<f64>,
    tops: Vec<Vec<i64>>,
    nodes: Vec<Node>,
    corners: Vec<u64>,
    p_idx: Vec<u32>,
    q_idx: Vec<u32>,
    child_idx: Vec<u32>,
    roots: Vec<u32>,
    loc_p: Located,
    loc_q: Located,
}

pub const NO_PARENT: u32 = u32::MAX;

impl QuadTree {
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Length of the indexed sequence.
    pub fn seq_len(&self, side: Side) -> usize {
        self.located(side).rel.len() / self.d
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn r_low(&self) -> f64 {
        self.r_low
    }

    pub fn r_high(&self) -> f64 {
        self.r_high
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    /// Top-level nodes, in order of creation.
    pub fn roots(&self) -> &[u32] {
        &self.roots
    }

    pub fn level(&self, v: u32) -> u32 {
        self.nodes[v as usize].level
    }

    /// Side length `Δ(v)`.
    pub fn side(&self, v: u32) -> f64 {
        self.r_low * (1u64 << self.level(v)) as f64
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        let p = self.nodes[v as usize].parent;
        (p != NO_PARENT).then_some(p)
    }

    pub fn children(&self, v: u32) -> &[u32] {
        let (a, b) = self.nodes[v as usize].children;
        &self.child_idx[a as usize..b as usize]
    }

    /// Ascending 0-based indices of the points of `P` inside the node.
    pub fn p_indices(&self, v: u32) -> &[u32] {
        let (a, b) = self.nodes[v as usize].p;
        &self.p_idx[a as usize..b as usize]
    }

    pub fn q_indices(&self, v: u32) -> &[u32] {
        let (a, b) = self.nodes[v as usize].q;
        &self.q_idx[a as usize..b as usize]
    }

    pub fn indices(&self, v: u32, side: Side) -> &[u32] {
        match side {
            Side::P => self.p_indices(v),
            Side::Q => self.q_indices(v),
        }
    }

    fn corner(&self, v: u32) -> &[u64] {
        &self.corners[v as usize * self.d..(v as usize + 1) * self.d]
    }

    /// Lower corner of the node box relative to the anchor, per axis.
    fn rel_lo(&self, v: u32, k: usize) -> f64 {
        let node = &self.nodes[v as usize];
        self.tops[node.top as usize][k] as f64 * self.r_high
            + self.corner(v)[k] as f64 * self.side(v)
    }

    /// Lower corner of the node box in input coordinates.
    pub fn box_min(&self, v: u32) -> Vec<f64> {
        (0..self.d)
            .map(|k| self.anchor[k] + self.rel_lo(v, k))
            .collect()
    }

    /// Node box corner in units of `r_low`, exact.
    fn unit_lo(&self, v: u32, k: usize) -> i128 {
        let node = &self.nodes[v as usize];
        ((self.tops[node.top as usize][k] as i128) << self.levels)
            + ((self.corner(v)[k] as i128) << node.level)
    }

    /// Box-to-box distance `dsq(u, v)`.
    pub fn node_dist(&self, u: u32, v: u32) -> f64 {
        let (su, sv) = (1i128 << self.level(u), 1i128 << self.level(v));
        let mut acc = 0.0;
        for k in 0..self.d {
            let (lu, lv) = (self.unit_lo(u, k), self.unit_lo(v, k));
            let gap = (lv - (lu + su)).max(lu - (lv + sv)).max(0);
            acc += (gap as f64) * (gap as f64);
        }
        acc.sqrt() * self.r_low
    }

    /// Whether point `t` of the given sequence lies in the concentric box of
    /// twice the side of node `v`.
    pub fn in_doubled_box(&self, v: u32, side: Side, t: usize) -> bool {
        let loc = self.located(side);
        let half = 0.5 * self.side(v);
        (0..self.d).all(|k| {
            let lo = self.rel_lo(v, k) - half;
            let x = loc.rel[t * self.d + k];
            lo <= x && x < lo + 4.0 * half
        })
    }

    /// Whether point `t` lies in the half-open box of node `v`.
    pub fn in_box(&self, v: u32, side: Side, t: usize) -> bool {
        let loc = self.located(side);
        let s = self.side(v);
        (0..self.d).all(|k| {
            let lo = self.rel_lo(v, k);
            let x = loc.rel[t * self.d + k];
            lo <= x && x < lo + s
        })
    }

    fn located(&self, side: Side) -> &Located {
        match side {
            Side::P => &self.loc_p,
            Side::Q => &self.loc_q,
        }
    }

    /// Top-level cell coordinates of a node.
    pub fn top_cell(&self, v: u32) -> &[i64] {
        &self.tops[self.nodes[v as usize].top as usize]
    }
}

fn locate(seq: &PointSequence, anchor: &[f64], r_low: f64, r_high: f64) -> Located {
    let d = seq.dim();
    let mut loc = Located {
        rel: Vec::with_capacity(seq.len() * d),
        top: Vec::with_capacity(seq.len() * d),
        fine: Vec::with_capacity(seq.len() * d),
    };
    for x in seq.points() {
        for k in 0..d {
            let rel = x[k] - anchor[k];
            let t = (rel / r_high).floor();
            // Exact: `rel` lies in `[t·r_high, (t+1)·r_high)`.
            let local = rel - t * r_high;
            loc.rel.push(rel);
            loc.top.push(t as i64);
            loc.fine.push((local / r_low).floor() as u64);
        }
    }
    loc
}

/// Builds every non-empty node with side between `r_low` and `r_high`.
pub fn build_active_tree(
    p: &PointSequence,
    q: &PointSequence,
    r_low: f64,
    r_high: f64,
) -> Result<QuadTree> {
    p.check_same_dim(q)?;
    if !(r_low > 0.0 && r_low <= r_high && r_high.is_finite()) {
        return Err(param("need 0 < r_low <= r_high"));
    }
    let ratio = r_high / r_low;
    let levels = ratio.log2().round() as u32;
    if 2f64.powi(levels as i32) != ratio {
        return Err(param("r_high / r_low must be a power of two"));
    }
    if levels > MAX_LEVELS {
        return Err(param(format!(
            "more than {MAX_LEVELS} grid levels requested"
        )));
    }
    let d = p.dim();
    let mut anchor = vec![f64::INFINITY; d];
    for x in p.points().chain(q.points()) {
        for k in 0..d {
            anchor[k] = anchor[k].min(x[k]);
        }
    }
    for a in &mut anchor {
        *a = (*a / r_high).floor() * r_high;
    }
    let loc_p = locate(p, &anchor, r_low, r_high);
    let loc_q = locate(q, &anchor, r_low, r_high);

    let mut tree = QuadTree {
        d,
        levels,
        r_low,
        r_high,
        anchor,
        tops: Vec::new(),
        nodes: Vec::new(),
        corners: Vec::new(),
        p_idx: Vec::new(),
        q_idx: Vec::new(),
        child_idx: Vec::new(),
        roots: Vec::new(),
        loc_p,
        loc_q,
    };

    // Group points by top cell, preserving sequence order.
    let mut top_of: HashMap<Vec<i64>, u32> = HashMap::new();
    let mut groups: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();
    for (side, n) in [(Side::P, p.len()), (Side::Q, q.len())] {
        for t in 0..n {
            let key = tree.located(side).top[t * d..(t + 1) * d].to_vec();
            let id = *top_of.entry(key.clone()).or_insert_with(|| {
                tree.tops.push(key);
                groups.push((Vec::new(), Vec::new()));
                (groups.len() - 1) as u32
            });
            match side {
                Side::P => groups[id as usize].0.push(t as u32),
                Side::Q => groups[id as usize].1.push(t as u32),
            }
        }
    }

    // Depth-first construction; each stack entry owns its point lists.
    let mut stack: Vec<(u32, Vec<u32>, Vec<u32>)> = Vec::new();
    for (top, (ps, qs)) in groups.into_iter().enumerate() {
        let v = tree.push_node(levels, top as u32, NO_PARENT, &vec![0; d], &ps, &qs);
        tree.roots.push(v);
        stack.push((v, ps, qs));
    }
    let mut children: Vec<(u32, Vec<u32>, Vec<u32>)> = Vec::new();
    while let Some((v, ps, qs)) = stack.pop() {
        let level = tree.nodes[v as usize].level;
        if level == 0 {
            continue;
        }
        let bit = level - 1;
        let mut buckets: Vec<(Vec<u64>, Vec<u32>, Vec<u32>)> = Vec::new();
        let mut bucket_of: HashMap<Vec<u64>, usize> = HashMap::new();
        for (side, list) in [(Side::P, &ps), (Side::Q, &qs)] {
            let loc = tree.located(side);
            for &t in list.iter() {
                let corner: Vec<u64> = loc.fine[t as usize * d..(t as usize + 1) * d]
                    .iter()
                    .map(|&f| f >> bit)
                    .collect();
                let b = *bucket_of.entry(corner.clone()).or_insert_with(|| {
                    buckets.push((corner, Vec::new(), Vec::new()));
                    buckets.len() - 1
                });
                match side {
                    Side::P => buckets[b].1.push(t),
                    Side::Q => buckets[b].2.push(t),
                }
            }
        }
        buckets.sort_by(|a, b| a.0.cmp(&b.0));
        let top = tree.nodes[v as usize].top;
        let start = tree.child_idx.len() as u32;
        children.clear();
        for (corner, bp, bq) in buckets {
            let w = tree.push_node(bit, top, v, &corner, &bp, &bq);
            children.push((w, bp, bq));
        }
        for (w, _, _) in &children {
            tree.child_idx.push(*w);
        }
        tree.nodes[v as usize].children = (start, tree.child_idx.len() as u32);
        stack.append(&mut children);
    }
    Ok(tree)
}

impl QuadTree {
    fn push_node(
        &mut self,
        level: u32,
        top: u32,
        parent: u32,
        corner: &[u64],
        ps: &[u32],
        qs: &[u32],
    ) -> u32 {
        let id = self.nodes.len() as u32;
        let p0 = self.p_idx.len() as u32;
        self.p_idx.extend_from_slice(ps);
        let q0 = self.q_idx.len() as u32;
        self.q_idx.extend_from_slice(qs);
        self.corners.extend_from_slice(corner);
        self.nodes.push(Node {
            level,
            top,
            parent,
            p: (p0, self.p_idx.len() as u32),
            q: (q0, self.q_idx.len() as u32),
            children: (0, 0),
        });
        id
    }
}

/// The well-separated pair family.
#[derive(Debug, Clone)]
pub struct PairFamily {
    pub pairs: Vec<(u32, u32)>,
    pub scales: Scales,
    /// Number of pairing invocations, including the emitting ones.
    pub pairing_calls: usize,
}

/// Runs the pairing procedure from every top-level node with points of `P`
/// against itself and its `3^d - 1` surrounding top-level nodes holding
/// points of `Q`.
pub fn build_pair_family(tree: &QuadTree, scales: &Scales) -> Result<PairFamily> {
    if scales.r_low != tree.r_low || scales.r_high != tree.r_high {
        return Err(Error::Param(
            "tree was built for different scales".to_string(),
        ));
    }
    let d = tree.d;
    let by_cell: HashMap<&[i64], u32> = tree.roots.iter().map(|&v| (tree.top_cell(v), v)).collect();
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
        .map(|mut code| {
            (0..d)
                .map(|_| {
                    let o = (code % 3) as i64 - 1;
                    code /= 3;
                    o
                })
                .collect()
        })
        .collect();

    let mut stack: Vec<(u32, u32)> = Vec::new();
    for &u in &tree.roots {
        if tree.p_indices(u).is_empty() {
            continue;
        }
        let cell = tree.top_cell(u);
        for off in &offsets {
            let nb: Vec<i64> = cell.iter().zip(off).map(|(c, o)| c + o).collect();
            if let Some(&v) = by_cell.get(nb.as_slice()) {
                if !tree.q_indices(v).is_empty() {
                    stack.push((u, v));
                }
            }
        }
    }

    let mut pairs = Vec::new();
    let mut calls = 0usize;
    while let Some((u, v)) = stack.pop() {
        calls += 1;
        let (su, sv) = (tree.side(u), tree.side(v));
        if su.max(sv) <= scales.sep * tree.node_dist(u, v).max(scales.floor) {
            pairs.push((u, v));
            continue;
        }
        if su >= sv {
            for &w in tree.children(u).iter().rev() {
                if !tree.p_indices(w).is_empty() {
                    stack.push((w, v));
                }
            }
        } else {
            for &z in tree.children(v).iter().rev() {
                if !tree.q_indices(z).is_empty() {
                    stack.push((u, z));
                }
            }
        }
    }
    Ok(PairFamily {
        pairs,
        scales: *scales,
        pairing_calls: calls,
    })
}
