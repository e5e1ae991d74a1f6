//! Weighted grid rectangles built from the pair family, and the set of
//! rectangle boundary points the sweeps evaluate.
//!
//! Rectangle and boundary coordinates are 1-based grid points `(x, y)`,
//! `x` indexing `P` and `y` indexing `Q`. Sequence intervals returned by
//! [`extract_mcs`] are 0-based.

use std::collections::HashMap;

use crate::quadtree::{PairFamily, QuadTree, Side};

/// The grid rectangle `[x_lo : x_hi] x [y_lo : y_hi]` with weight `ω_R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRect {
    pub x_lo: u32,
    pub x_hi: u32,
    pub y_lo: u32,
    pub y_hi: u32,
    pub weight: f64,
}

impl GridRect {
    pub fn contains(&self, x: u32, y: u32) -> bool {
        self.x_lo <= x && x <= self.x_hi && self.y_lo <= y && y <= self.y_hi
    }

    /// `(x, y)` hits the rectangle when `x_lo < x <= x_hi` and
    /// `y_lo < y <= y_hi`.
    pub fn is_hit_by(&self, x: u32, y: u32) -> bool {
        self.x_lo < x && x <= self.x_hi && self.y_lo < y && y <= self.y_hi
    }

    pub fn has_interior_point(&self, x: u32, y: u32) -> bool {
        self.x_lo < x && x < self.x_hi && self.y_lo < y && y < self.y_hi
    }

    pub fn on_boundary(&self, x: u32, y: u32) -> bool {
        self.contains(x, y) && !self.has_interior_point(x, y)
    }
}

/// Maximal contiguous runs of the sequence inside the doubled box of `v`,
/// each starting at a not-yet-covered point of the node.
pub fn extract_mcs(tree: &QuadTree, v: u32, side: Side) -> Vec<(u32, u32)> {
    let idx = tree.indices(v, side);
    let len = tree.seq_len(side);
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < idx.len() {
        let start = idx[pos];
        let mut end = start as usize;
        while end + 1 < len && tree.in_doubled_box(v, side, end + 1) {
            end += 1;
        }
        out.push((start, end as u32));
        while pos < idx.len() && idx[pos] as usize <= end {
            pos += 1;
        }
    }
    out
}

/// Stable LSD radix sort on a 64-bit key, 16 bits per pass.
fn radix_sort_by_key<T: Copy + Default>(items: &mut Vec<T>, key: impl Fn(&T) -> u64) {
    let mut buf = vec![T::default(); items.len()];
    let mut count = vec![0usize; 1 << 16];
    for pass in 0..4 {
        let shift = 16 * pass;
        let digit = |t: &T| ((key(t) >> shift) & 0xffff) as usize;
        if items.iter().all(|t| digit(t) == 0) {
            continue;
        }
        count.iter_mut().for_each(|c| *c = 0);
        for t in items.iter() {
            count[digit(t)] += 1;
        }
        let mut sum = 0;
        for c in count.iter_mut() {
            let t = *c;
            *c = sum;
            sum += t;
        }
        for t in items.iter() {
            let b = digit(t);
            buf[count[b]] = *t;
            count[b] += 1;
        }
        std::mem::swap(items, &mut buf);
    }
}

pub(crate) fn radix_sort(keys: &mut Vec<u64>) {
    radix_sort_by_key(keys, |&k| k);
}

/// Positions of `keys` in ascending key order.
fn radix_argsort(keys: &[u64]) -> Vec<u32> {
    let mut pos: Vec<u32> = (0..keys.len() as u32).collect();
    radix_sort_by_key(&mut pos, |&i| keys[i as usize]);
    pos
}

pub const NONE: u32 = u32::MAX;

#[inline]
fn key(x: u32, y: u32) -> u64 {
    ((y as u64) << 32) | x as u64
}

/// Deduplicated boundary points with row, column and diagonal orders.
#[derive(Debug, Clone)]
pub struct BoundarySet {
    cols: u32,
    rows: u32,
    /// `(y, x)` keys in ascending row order; a point's index is its rank here.
    keys: Vec<u64>,
    /// Indices in `(x, y)` order.
    col_order: Vec<u32>,
    /// Position of each index in `col_order`.
    col_rank: Vec<u32>,
    /// Indices in `(y - x, x)` order.
    diag_order: Vec<u32>,
    diag_rank: Vec<u32>,
}

impl BoundarySet {
    /// Builds the set over a `cols x rows` grid from raw (possibly repeated)
    /// points.
    pub fn from_points(cols: u32, rows: u32, points: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut keys: Vec<u64> = points.into_iter().map(|(x, y)| key(x, y)).collect();
        radix_sort(&mut keys);
        keys.dedup();
        let col_keys: Vec<u64> = keys.iter().map(|&k| k.rotate_right(32)).collect();
        let col_order = radix_argsort(&col_keys);
        let diag_keys: Vec<u64> = keys
            .iter()
            .map(|&k| {
                let (x, y) = ((k & 0xffff_ffff) as u32, (k >> 32) as u32);
                (((y + cols - x) as u64) << 32) | x as u64
            })
            .collect();
        let diag_order = radix_argsort(&diag_keys);
        let mut col_rank = vec![0u32; keys.len()];
        for (r, &i) in col_order.iter().enumerate() {
            col_rank[i as usize] = r as u32;
        }
        let mut diag_rank = vec![0u32; keys.len()];
        for (r, &i) in diag_order.iter().enumerate() {
            diag_rank[i as usize] = r as u32;
        }
        Self {
            cols,
            rows,
            keys,
            col_order,
            col_rank,
            diag_order,
            diag_rank,
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    /// Grid point `(x, y)` of index `idx`.
    #[inline]
    pub fn point(&self, idx: usize) -> (u32, u32) {
        let k = self.keys[idx];
        ((k & 0xffff_ffff) as u32, (k >> 32) as u32)
    }

    pub fn points(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    pub fn index_of(&self, x: u32, y: u32) -> Option<usize> {
        self.keys.binary_search(&key(x, y)).ok()
    }

    /// Nearest point to the left in the same row.
    #[inline]
    pub fn left_pred(&self, idx: usize) -> Option<usize> {
        (idx > 0 && self.keys[idx - 1] >> 32 == self.keys[idx] >> 32).then(|| idx - 1)
    }

    /// Nearest point below in the same column.
    #[inline]
    pub fn below_pred(&self, idx: usize) -> Option<usize> {
        let r = self.col_rank[idx] as usize;
        if r == 0 {
            return None;
        }
        let j = self.col_order[r - 1] as usize;
        (self.point(j).0 == self.point(idx).0).then_some(j)
    }

    /// Nearest point on the same diagonal towards the origin.
    #[inline]
    pub fn diag_pred(&self, idx: usize) -> Option<usize> {
        let r = self.diag_rank[idx] as usize;
        if r == 0 {
            return None;
        }
        let j = self.diag_order[r - 1] as usize;
        let (x, y) = self.point(idx);
        let (a, b) = self.point(j);
        (y.wrapping_sub(x) == b.wrapping_sub(a)).then_some(j)
    }

    #[inline]
    pub(crate) fn col_rank(&self, idx: usize) -> usize {
        self.col_rank[idx] as usize
    }

    #[inline]
    pub(crate) fn col_at(&self, rank: usize) -> usize {
        self.col_order[rank] as usize
    }
}

/// The rectangles and their boundary points.
#[derive(Debug, Clone)]
pub struct RectangleCover {
    pub rects: Vec<GridRect>,
    pub boundary: BoundarySet,
}

/// Emits the cross product of the `P`- and `Q`-runs of every pair. With
/// `padded`, the boundary set spans the `(m+1) x (n+1)` grid and also holds
/// its last column, its last row and `(1, 1)`.
pub fn build_rectangles(tree: &QuadTree, family: &PairFamily, padded: bool) -> RectangleCover {
    let (m, n) = (tree.seq_len(Side::P) as u32, tree.seq_len(Side::Q) as u32);
    let mut memo_p: HashMap<u32, Vec<(u32, u32)>> = HashMap::new();
    let mut memo_q: HashMap<u32, Vec<(u32, u32)>> = HashMap::new();
    let mut rects = Vec::new();
    for &(u, v) in &family.pairs {
        let w = tree.node_dist(u, v);
        let xs = memo_p
            .entry(u)
            .or_insert_with(|| extract_mcs(tree, u, Side::P));
        let ys = memo_q
            .entry(v)
            .or_insert_with(|| extract_mcs(tree, v, Side::Q));
        for &(a0, a1) in xs.iter() {
            for &(b0, b1) in ys.iter() {
                rects.push(GridRect {
                    x_lo: a0 + 1,
                    x_hi: a1 + 1,
                    y_lo: b0 + 1,
                    y_hi: b1 + 1,
                    weight: w,
                });
            }
        }
    }
    let (cols, rows) = if padded { (m + 1, n + 1) } else { (m, n) };
    let boundary = BoundarySet::from_points(cols, rows, boundary_points(&rects, padded, m, n));
    RectangleCover { rects, boundary }
}

fn boundary_points(rects: &[GridRect], padded: bool, m: u32, n: u32) -> Vec<(u32, u32)> {
    let mut pts = Vec::new();
    for r in rects {
        for x in r.x_lo..=r.x_hi {
            pts.push((x, r.y_lo));
            pts.push((x, r.y_hi));
        }
        for y in r.y_lo + 1..r.y_hi {
            pts.push((r.x_lo, y));
            pts.push((r.x_hi, y));
        }
    }
    if padded {
        pts.push((1, 1));
        pts.extend((1..=n + 1).map(|y| (m + 1, y)));
        pts.extend((1..=m).map(|x| (x, n + 1)));
    }
    pts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BoundaryStats {
    pub num_rects: usize,
    pub num_boundary_points: usize,
    /// Pairs of rectangles whose interiors intersect.
    pub overlap_count: usize,
}

pub fn boundary_stats(rects: &[GridRect], boundary: &BoundarySet) -> BoundaryStats {
    let mut order: Vec<&GridRect> = rects
        .iter()
        .filter(|r| r.x_lo < r.x_hi && r.y_lo < r.y_hi)
        .collect();
    order.sort_by_key(|r| r.x_lo);
    let mut overlap_count = 0;
    for (a, r) in order.iter().enumerate() {
        for s in &order[a + 1..] {
            if s.x_lo >= r.x_hi {
                break;
            }
            if s.y_lo.max(r.y_lo) < s.y_hi.min(r.y_hi) {
                overlap_count += 1;
            }
        }
    }
    BoundaryStats {
        num_rects: rects.len(),
        num_boundary_points: boundary.len(),
        overlap_count,
    }
}
