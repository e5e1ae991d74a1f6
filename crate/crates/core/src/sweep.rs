//! Row-by-row evaluation of approximate path weights at the rectangle
//! boundary points, in `(y, x)` order.
//!
//! A point `(i, j)` that hits a rectangle takes its value from the left and
//! bottom boundaries of that rectangle through range-minimum queries; any
//! other point is evaluated from its grid neighbours (DTW) or from gap
//! bridges out of the union boundary (ED).

use std::collections::BTreeSet;

use crate::rangemin::{AppendableRmq, ColumnMinTree, StaticRmq};
use crate::rectangles::{BoundarySet, GridRect, NONE};

/// Values per boundary index, the rectangle each point was evaluated
/// through (or [`NONE`]), and the number of range-min operations issued.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub values: Vec<f64>,
    pub hit: Vec<u32>,
    pub rmq_ops: usize,
}

impl SweepOutput {
    pub fn value_at(&self, boundary: &BoundarySet, x: u32, y: u32) -> Option<f64> {
        boundary.index_of(x, y).map(|k| self.values[k])
    }
}

/// A rectangle reduced to the column interval `[lo, hi]` tested against a
/// query column and the rows `first..=last` it is active in.
#[derive(Debug, Clone, Copy)]
struct Span {
    lo: u32,
    hi: u32,
    first: u32,
    last: u32,
}

/// Reports, for increasing columns of one row, the active span with
/// `lo <= i` reaching farthest right, if it reaches `i`.
struct RowScanner {
    spans: Vec<(u32, Span)>,
    by_first: Vec<u32>,
    by_last: Vec<u32>,
    next_first: usize,
    next_last: usize,
    active: BTreeSet<(u32, u32)>,
    row: Vec<u32>,
    pos: usize,
    best_hi: u32,
    best: u32,
}

impl RowScanner {
    fn new(spans: Vec<(u32, Span)>) -> Self {
        let mut by_first: Vec<u32> = (0..spans.len() as u32).collect();
        by_first.sort_by_key(|&s| spans[s as usize].1.first);
        let mut by_last = by_first.clone();
        by_last.sort_by_key(|&s| spans[s as usize].1.last);
        Self {
            spans,
            by_first,
            by_last,
            next_first: 0,
            next_last: 0,
            active: BTreeSet::new(),
            row: Vec::new(),
            pos: 0,
            best_hi: 0,
            best: NONE,
        }
    }

    /// Hits: `x_lo < i <= x_hi`, `y_lo < j <= y_hi`.
    fn hits(rects: &[GridRect]) -> Self {
        Self::new(
            rects
                .iter()
                .enumerate()
                .filter(|(_, r)| r.x_lo < r.x_hi && r.y_lo < r.y_hi)
                .map(|(k, r)| {
                    let s = Span {
                        lo: r.x_lo + 1,
                        hi: r.x_hi,
                        first: r.y_lo + 1,
                        last: r.y_hi,
                    };
                    (k as u32, s)
                })
                .collect(),
        )
    }

    /// Strict interior points.
    fn interiors(rects: &[GridRect]) -> Self {
        Self::new(
            rects
                .iter()
                .enumerate()
                .filter(|(_, r)| r.x_lo + 2 <= r.x_hi && r.y_lo + 2 <= r.y_hi)
                .map(|(k, r)| {
                    let s = Span {
                        lo: r.x_lo + 1,
                        hi: r.x_hi - 1,
                        first: r.y_lo + 1,
                        last: r.y_hi - 1,
                    };
                    (k as u32, s)
                })
                .collect(),
        )
    }

    /// Closed rectangles.
    fn members(rects: &[GridRect]) -> Self {
        Self::new(
            rects
                .iter()
                .enumerate()
                .map(|(k, r)| {
                    let s = Span {
                        lo: r.x_lo,
                        hi: r.x_hi,
                        first: r.y_lo,
                        last: r.y_hi,
                    };
                    (k as u32, s)
                })
                .collect(),
        )
    }

    /// Moves to row `j` (increasing between calls); ids of rectangles that
    /// stopped being active are appended to `gone`.
    fn start_row(&mut self, j: u32, gone: &mut Vec<u32>) {
        while let Some(&s) = self.by_first.get(self.next_first) {
            let span = self.spans[s as usize].1;
            if span.first > j {
                break;
            }
            if span.last >= j {
                self.active.insert((span.lo, s));
            }
            self.next_first += 1;
        }
        while let Some(&s) = self.by_last.get(self.next_last) {
            let span = self.spans[s as usize].1;
            if span.last >= j {
                break;
            }
            self.active.remove(&(span.lo, s));
            gone.push(self.spans[s as usize].0);
            self.next_last += 1;
        }
        self.row.clear();
        self.row.extend(self.active.iter().map(|&(_, s)| s));
        self.pos = 0;
        self.best_hi = 0;
        self.best = NONE;
    }

    /// Rectangle id reaching column `i` in the current row, or [`NONE`].
    #[inline]
    fn query(&mut self, i: u32) -> u32 {
        while let Some(&s) = self.row.get(self.pos) {
            let span = self.spans[s as usize].1;
            if span.lo > i {
                break;
            }
            if self.best == NONE || span.hi > self.best_hi {
                self.best_hi = span.hi;
                self.best = s;
            }
            self.pos += 1;
        }
        if self.best != NONE && self.best_hi >= i {
            self.spans[self.best as usize].0
        } else {
            NONE
        }
    }
}

/// Contiguous index ranges of `boundary`, one per row.
fn rows(boundary: &BoundarySet) -> impl Iterator<Item = (u32, std::ops::Range<usize>)> + '_ {
    let mut start = 0;
    std::iter::from_fn(move || {
        if start >= boundary.len() {
            return None;
        }
        let y = boundary.point(start).1;
        let mut end = start + 1;
        while end < boundary.len() && boundary.point(end).1 == y {
            end += 1;
        }
        let r = start..end;
        start = end;
        Some((y, r))
    })
}

/// Boundary points of the rectangle union: points of some rectangle that
/// lie in the interior of none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnionBoundary {
    pub flags: Vec<bool>,
    pub count: usize,
}

pub fn mark_union_boundary(rects: &[GridRect], boundary: &BoundarySet) -> UnionBoundary {
    let mut members = RowScanner::members(rects);
    let mut interiors = RowScanner::interiors(rects);
    let mut flags = vec![false; boundary.len()];
    let mut gone = Vec::new();
    for (y, range) in rows(boundary) {
        members.start_row(y, &mut gone);
        interiors.start_row(y, &mut gone);
        gone.clear();
        for k in range {
            let x = boundary.point(k).0;
            flags[k] = members.query(x) != NONE && interiors.query(x) == NONE;
        }
    }
    let count = flags.iter().filter(|&&f| f).count();
    UnionBoundary { flags, count }
}

/// Per-rectangle range-min state, created at the first hit.
struct RectState {
    bottom_start: usize,
    corner_rank: usize,
    bottom: Option<(StaticRmq, StaticRmq)>,
    left_plain: AppendableRmq,
    left_slope: AppendableRmq,
}

impl RectState {
    fn new(boundary: &BoundarySet, r: &GridRect) -> Self {
        let bottom_start = boundary
            .index_of(r.x_lo, r.y_lo)
            .expect("rectangle corner missing from boundary set");
        Self {
            bottom_start,
            corner_rank: boundary.col_rank(bottom_start),
            bottom: None,
            left_plain: AppendableRmq::new(),
            left_slope: AppendableRmq::new(),
        }
    }

    fn left_index(&self, boundary: &BoundarySet, k: u32) -> usize {
        boundary.col_at(self.corner_rank + k as usize)
    }
}

/// Affine costs of moving inside a rectangle of weight `w`: from a boundary
/// point `(a, b)` to `(i, j)` with `dx = i - a`, `dy = j - b`.
#[derive(Debug, Clone, Copy)]
enum Kernel {
    /// `max(dx, dy)·w`.
    Dtw,
    /// `min(dx, dy)·w + |dx - dy|·g`, valid when `2g > w`.
    EdDiagonal { g: f64 },
}

impl Kernel {
    /// Coefficients of the boundary coordinate in the plain and slope keys:
    /// `plain = μ̃ + cp·t`, `slope = μ̃ - cs·t`.
    fn coefficients(self, w: f64) -> (f64, f64) {
        match self {
            Kernel::Dtw => (0.0, w),
            Kernel::EdDiagonal { g } => (g - w, g),
        }
    }
}

struct HitQuery {
    i: u32,
    j: u32,
}

/// Value of a point hitting `r` through its left and bottom boundaries.
fn hit_value(
    kernel: Kernel,
    boundary: &BoundarySet,
    values: &[f64],
    r: &GridRect,
    st: &mut RectState,
    q: HitQuery,
    ops: &mut usize,
) -> f64 {
    let w = r.weight;
    let (cp, cs) = kernel.coefficients(w);
    if st.bottom.is_none() {
        let width = (r.x_hi - r.x_lo) as usize;
        let mut plain = Vec::with_capacity(width + 1);
        let mut slope = Vec::with_capacity(width + 1);
        for k in 0..=width {
            let idx = st.bottom_start + k;
            debug_assert_eq!(boundary.point(idx), (r.x_lo + k as u32, r.y_lo));
            let a = (r.x_lo + k as u32) as f64;
            plain.push(values[idx] + cp * a);
            slope.push(values[idx] - cs * a);
        }
        st.bottom = Some((StaticRmq::new(plain), StaticRmq::new(slope)));
    }
    let dx0 = q.i - r.x_lo;
    let dy0 = q.j - r.y_lo;
    while st.left_plain.len() <= dy0 as usize {
        let k = st.left_plain.len() as u32;
        let idx = st.left_index(boundary, k);
        debug_assert_eq!(boundary.point(idx), (r.x_lo, r.y_lo + k));
        let b = (r.y_lo + k) as f64;
        st.left_plain.push(values[idx] + cp * b);
        st.left_slope.push(values[idx] - cs * b);
        *ops += 1;
    }
    let (bottom_plain, bottom_slope) = st.bottom.as_ref().expect("built above");
    let (i, j) = (q.i as f64, q.j as f64);
    let mut best = f64::INFINITY;
    if dx0 >= dy0 {
        let (dxf, d) = (dx0 as f64, dy0 as f64);
        let (a1, a2, a3) = match kernel {
            Kernel::Dtw => (dxf * w, i * w, d * w),
            Kernel::EdDiagonal { g } => (
                j * w + (dxf - j) * g,
                d * w + (i - d) * g,
                i * w + (d - i) * g,
            ),
        };
        best = best.min(st.left_plain.min(0, dy0 as usize).0 + a1);
        if dx0 > dy0 {
            best = best.min(bottom_slope.min(0, (dx0 - dy0 - 1) as usize).0 + a2);
            *ops += 1;
        }
        best = best.min(bottom_plain.min((dx0 - dy0) as usize, dx0 as usize).0 + a3);
    } else {
        let (e, d) = (dx0 as f64, dy0 as f64);
        let (b1, b2, b3) = match kernel {
            Kernel::Dtw => (d * w, j * w, e * w),
            Kernel::EdDiagonal { g } => (
                i * w + (d - i) * g,
                e * w + (j - e) * g,
                j * w + (e - j) * g,
            ),
        };
        best = best.min(bottom_plain.min(0, dx0 as usize).0 + b1);
        best = best.min(st.left_slope.min(0, (dy0 - dx0 - 1) as usize).0 + b2);
        best = best.min(st.left_plain.min((dy0 - dx0) as usize, dy0 as usize).0 + b3);
        *ops += 1;
    }
    *ops += 2;
    best
}

/// Adjacent left, lower and diagonal neighbours of `k` present in the set.
fn adjacent(boundary: &BoundarySet, k: usize) -> [Option<usize>; 3] {
    let (x, y) = boundary.point(k);
    let left = boundary
        .left_pred(k)
        .filter(|&p| boundary.point(p).0 + 1 == x);
    let below = boundary
        .below_pred(k)
        .filter(|&p| boundary.point(p).1 + 1 == y);
    let diag = boundary
        .diag_pred(k)
        .filter(|&p| boundary.point(p) == (x.wrapping_sub(1), y.wrapping_sub(1)));
    [left, below, diag]
}

/// DTW sweep over the `m x n` grid; `omega(i, j)` is the weight of grid
/// point `(i, j)`.
pub fn sweep_dtw(
    boundary: &BoundarySet,
    rects: &[GridRect],
    omega: impl Fn(u32, u32) -> f64,
) -> SweepOutput {
    let mut values = vec![f64::INFINITY; boundary.len()];
    let mut hit = vec![NONE; boundary.len()];
    let mut states: Vec<Option<RectState>> = (0..rects.len()).map(|_| None).collect();
    let mut scanner = RowScanner::hits(rects);
    let mut gone = Vec::new();
    let mut ops = 0;
    for (y, range) in rows(boundary) {
        scanner.start_row(y, &mut gone);
        for id in gone.drain(..) {
            states[id as usize] = None;
        }
        for k in range {
            let (x, _) = boundary.point(k);
            let id = scanner.query(x);
            values[k] = if id != NONE {
                hit[k] = id;
                let r = &rects[id as usize];
                let st = states[id as usize].get_or_insert_with(|| RectState::new(boundary, r));
                hit_value(
                    Kernel::Dtw,
                    boundary,
                    &values,
                    r,
                    st,
                    HitQuery { i: x, j: y },
                    &mut ops,
                )
            } else if (x, y) == (1, 1) {
                omega(1, 1)
            } else {
                let prev = adjacent(boundary, k)
                    .iter()
                    .flatten()
                    .map(|&p| values[p])
                    .fold(f64::INFINITY, f64::min);
                prev + omega(x, y)
            };
        }
    }
    SweepOutput {
        values,
        hit,
        rmq_ops: ops,
    }
}

/// ED sweep over the padded `(m+1) x (n+1)` grid with gap penalty `g`;
/// `omega(i, j)`, `i <= m`, `j <= n`, is the cost of the diagonal edge
/// leaving `(i, j)`.
pub fn sweep_ed(
    boundary: &BoundarySet,
    rects: &[GridRect],
    union: &UnionBoundary,
    g: f64,
    omega: impl Fn(u32, u32) -> f64,
) -> SweepOutput {
    sweep_ed_impl(boundary, rects, union, g, omega, false)
}

fn sweep_ed_impl(
    boundary: &BoundarySet,
    rects: &[GridRect],
    union: &UnionBoundary,
    g: f64,
    omega: impl Fn(u32, u32) -> f64,
    check_colmin: bool,
) -> SweepOutput {
    let mut values = vec![f64::INFINITY; boundary.len()];
    let mut hit = vec![NONE; boundary.len()];
    let mut states: Vec<Option<RectState>> = (0..rects.len()).map(|_| None).collect();
    let mut scanner = RowScanner::hits(rects);
    let mut colmin = ColumnMinTree::new(boundary.cols() as usize);
    let mut naive: Vec<(u32, f64)> = Vec::new();
    let mut gone = Vec::new();
    let mut ops = 0;
    let bridge_key =
        |v: f64, a: u32, b: u32| v - (a + b) as f64 * g + (omega(a, b) - 2.0 * g).min(0.0);
    for (y, range) in rows(boundary) {
        scanner.start_row(y, &mut gone);
        for id in gone.drain(..) {
            states[id as usize] = None;
        }
        for k in range.clone() {
            let (x, _) = boundary.point(k);
            let id = scanner.query(x);
            values[k] = if id != NONE {
                hit[k] = id;
                let r = &rects[id as usize];
                let st = states[id as usize].get_or_insert_with(|| RectState::new(boundary, r));
                if 2.0 * g > r.weight {
                    hit_value(
                        Kernel::EdDiagonal { g },
                        boundary,
                        &values,
                        r,
                        st,
                        HitQuery { i: x, j: y },
                        &mut ops,
                    )
                } else {
                    let (dx0, dy0) = (x - r.x_lo, y - r.y_lo);
                    let left = values[st.left_index(boundary, dy0)] + dx0 as f64 * g;
                    let below = values[st.bottom_start + dx0 as usize] + dy0 as f64 * g;
                    left.min(below)
                }
            } else if (x, y) == (1, 1) {
                0.0
            } else {
                let [left, below, diag] = adjacent(boundary, k);
                match (left, below, diag) {
                    (Some(l), Some(b), Some(d)) => (values[l] + g)
                        .min(values[b] + g)
                        .min(values[d] + omega(x - 1, y - 1)),
                    _ => {
                        let mut best = f64::INFINITY;
                        if let Some(l) = boundary.left_pred(k) {
                            best = best.min(values[l] + (x - boundary.point(l).0) as f64 * g);
                        }
                        if let Some(b) = boundary.below_pred(k) {
                            best = best.min(values[b] + (y - boundary.point(b).1) as f64 * g);
                        }
                        let bridge = colmin.prefix(x as usize - 1);
                        if check_colmin {
                            let expect = naive
                                .iter()
                                .filter(|&&(a, _)| a < x)
                                .map(|&(_, key)| key)
                                .fold(f64::INFINITY, f64::min);
                            assert_eq!(bridge, expect, "column minimum at ({x}, {y})");
                        }
                        best.min(bridge + (x + y) as f64 * g)
                    }
                }
            };
        }
        for k in range {
            let (a, b) = boundary.point(k);
            if union.flags[k] || (a, b) == (1, 1) {
                let key = bridge_key(values[k], a, b);
                colmin.lower(a as usize, key);
                if check_colmin {
                    naive.push((a, key));
                }
            }
        }
    }
    SweepOutput {
        values,
        hit,
        rmq_ops: ops,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_dp::{dtw_table_by, ed_table_by};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rect(x_lo: u32, x_hi: u32, y_lo: u32, y_hi: u32, weight: f64) -> GridRect {
        GridRect {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
            weight,
        }
    }

    fn boundary_of(cols: u32, rows: u32, rects: &[GridRect], extra: &[(u32, u32)]) -> BoundarySet {
        let mut pts = extra.to_vec();
        for r in rects {
            for x in r.x_lo..=r.x_hi {
                pts.push((x, r.y_lo));
                pts.push((x, r.y_hi));
            }
            for y in r.y_lo..=r.y_hi {
                pts.push((r.x_lo, y));
                pts.push((r.x_hi, y));
            }
        }
        BoundarySet::from_points(cols, rows, pts)
    }

    fn random_rects(rng: &mut ChaCha8Rng, m: u32, n: u32, count: usize) -> Vec<GridRect> {
        (0..count)
            .map(|_| {
                let (a, b) = (rng.gen_range(1..=m), rng.gen_range(1..=m));
                let (c, d) = (rng.gen_range(1..=n), rng.gen_range(1..=n));
                rect(
                    a.min(b),
                    a.max(b),
                    c.min(d),
                    c.max(d),
                    rng.gen_range(0.0..3.0),
                )
            })
            .collect()
    }

    #[test]
    fn single_cell_rectangle() {
        let rects = [rect(1, 1, 1, 1, 0.7)];
        let b = boundary_of(1, 1, &rects, &[]);
        let out = sweep_dtw(&b, &rects, |_, _| 0.7);
        assert_eq!(out.values, vec![0.7]);
    }

    #[test]
    fn uniform_square_takes_diagonal() {
        let w = 1.5;
        let rects = [rect(1, 3, 1, 3, w)];
        let b = boundary_of(3, 3, &rects, &[]);
        let out = sweep_dtw(&b, &rects, |_, _| w);
        assert_eq!(out.value_at(&b, 3, 3), Some(3.0 * w));
        // Every admissible path from (1,1) to (3,3) has at least 3 points.
        let table = dtw_table_by(3, 3, |_, _| w);
        assert_eq!(table.get(3, 3), 3.0 * w);
        for (k, (x, y)) in b.points().enumerate() {
            assert_eq!(out.values[k], table.get(x as usize, y as usize));
        }
    }

    #[test]
    fn hit_scanner_agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let (m, n) = (rng.gen_range(1..30), rng.gen_range(1..30));
            let rects = {
                let c = rng.gen_range(1..12);
                random_rects(&mut rng, m, n, c)
            };
            let b = boundary_of(m, n, &rects, &[]);
            let out = sweep_dtw(&b, &rects, |_, _| 1.0);
            for (k, (x, y)) in b.points().enumerate() {
                let any = rects.iter().any(|r| r.is_hit_by(x, y));
                if out.hit[k] == NONE {
                    assert!(!any, "missed hit at ({x}, {y})");
                } else {
                    let r = &rects[out.hit[k] as usize];
                    assert!(r.is_hit_by(x, y));
                    let far = rects
                        .iter()
                        .filter(|s| s.is_hit_by(x, y))
                        .map(|s| s.x_hi)
                        .max();
                    assert_eq!(Some(r.x_hi), far);
                }
            }
        }
    }

    #[test]
    fn union_boundary_agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let (m, n) = (rng.gen_range(1..40), rng.gen_range(1..40));
            let rects = {
                let c = rng.gen_range(1..10);
                random_rects(&mut rng, m, n, c)
            };
            let b = boundary_of(m + 1, n + 1, &rects, &[(1, 1), (m + 1, n + 1)]);
            let u = mark_union_boundary(&rects, &b);
            for (k, (x, y)) in b.points().enumerate() {
                let in_u = rects.iter().any(|r| r.contains(x, y));
                let inner = rects.iter().any(|r| r.has_interior_point(x, y));
                assert_eq!(u.flags[k], in_u && !inner, "({x}, {y})");
            }
            assert_eq!(u.count, u.flags.iter().filter(|&&f| f).count());
        }
    }

    #[test]
    fn nested_rectangle_boundary_is_not_on_union_boundary() {
        let rects = [rect(1, 10, 1, 10, 1.0), rect(3, 6, 3, 6, 1.0)];
        let b = boundary_of(10, 10, &rects, &[]);
        let u = mark_union_boundary(&rects, &b);
        for (k, (x, y)) in b.points().enumerate() {
            assert_eq!(u.flags[k], rects[0].on_boundary(x, y));
        }
        let single = [rect(2, 5, 2, 4, 1.0)];
        let b = boundary_of(6, 6, &single, &[]);
        let u = mark_union_boundary(&single, &b);
        assert!(u.flags.iter().all(|&f| f));
    }

    /// With every rectangle carrying the true constant weight of its cells,
    /// the DTW sweep must reproduce the exact table at every covered point.
    #[test]
    fn dtw_sweep_is_exact_on_piecewise_constant_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let (m, n) = (rng.gen_range(2..25u32), rng.gen_range(2..25u32));
            // One rectangle tiling the whole grid, plus random sub-rectangles of
            // the same weight: every point has weight w.
            let w = rng.gen_range(0.1..2.0);
            let mut rects = vec![rect(1, m, 1, n, w)];
            for mut r in {
                let c = rng.gen_range(0..6);
                random_rects(&mut rng, m, n, c)
            } {
                r.weight = w;
                rects.push(r);
            }
            let b = boundary_of(m, n, &rects, &[]);
            let out = sweep_dtw(&b, &rects, |_, _| w);
            let table = dtw_table_by(m as usize, n as usize, |_, _| w);
            for (k, (x, y)) in b.points().enumerate() {
                let exact = table.get(x as usize, y as usize);
                assert!((out.values[k] - exact).abs() <= 1e-9 * exact, "({x},{y})");
            }
        }
    }

    /// Diagonal regime: values on the right and top sides of a rectangle
    /// whose left and bottom sides are seeded equal a DP inside it with
    /// diagonal cost `w` and axis cost `g`.
    #[test]
    fn ed_hit_matches_frozen_weight_dp() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..200 {
            let g = rng.gen_range(0.2..3.0);
            let w = rng.gen_range(0.0..2.0 * g);
            let (m, n) = (rng.gen_range(2..20u32), rng.gen_range(2..20u32));
            let rects = [rect(1, m, 1, n, w)];
            let b = boundary_of(m + 1, n + 1, &rects, &[(m + 1, n + 1)]);
            let u = mark_union_boundary(&rects, &b);
            let out = sweep_ed(&b, &rects, &u, g, |_, _| w);
            let table = ed_table_by(m as usize - 1, n as usize - 1, g, |_, _| w);
            for (k, (x, y)) in b.points().enumerate() {
                if x > m || y > n {
                    continue;
                }
                let exact = table.get(x as usize, y as usize);
                assert!(
                    (out.values[k] - exact).abs() <= 1e-9 * exact.max(1.0),
                    "({x},{y}) {} vs {exact}",
                    out.values[k]
                );
            }
        }
    }

    #[test]
    fn ed_rectilinear_regime_uses_gap_routes() {
        let (g, w) = (1.0, 2.5);
        let rects = [rect(1, 4, 1, 4, w)];
        let b = boundary_of(5, 5, &rects, &[(5, 5)]);
        let u = mark_union_boundary(&rects, &b);
        let out = sweep_ed(&b, &rects, &u, g, |_, _| w);
        // (4,4) via (1,4) or (4,1): 3 gaps along the side plus 3 more.
        assert_eq!(out.value_at(&b, 4, 4), Some(6.0));
        assert_eq!(out.value_at(&b, 4, 2), Some(4.0));
        let table = ed_table_by(3, 3, g, |_, _| w);
        assert_eq!(table.get(4, 4), 6.0);
    }

    #[test]
    fn ed_gap_chain_without_rectangles() {
        let b = BoundarySet::from_points(3, 3, [(1, 1), (2, 1), (1, 2), (3, 3)]);
        let u = mark_union_boundary(&[], &b);
        let out = sweep_ed(&b, &[], &u, 0.5, |_, _| 10.0);
        assert_eq!(out.value_at(&b, 2, 1), Some(0.5));
        assert_eq!(out.value_at(&b, 1, 2), Some(0.5));
        // (1,1) bridges to (3,3) with four gaps, its diagonal costing 10 > 2g.
        assert_eq!(out.value_at(&b, 3, 3), Some(2.0));
    }

    /// A rectangle far below-left of the target: the value there comes from
    /// a gap bridge out of the union boundary.
    #[test]
    fn ed_bridge_from_distant_rectangle() {
        let (g, w) = (1.0, 0.25);
        let rects = [rect(1, 3, 1, 3, w)];
        let (m, n) = (8u32, 7u32);
        let mut extra = vec![(m + 1, n + 1)];
        extra.extend((1..=m + 1).map(|x| (x, n + 1)));
        extra.extend((1..=n + 1).map(|y| (m + 1, y)));
        let b = boundary_of(m + 1, n + 1, &rects, &extra);
        let u = mark_union_boundary(&rects, &b);
        // Cells outside the rectangle are far too expensive to match.
        let omega = |i: u32, j: u32| if i <= 3 && j <= 3 { w } else { 100.0 };
        let out = sweep_ed_impl(&b, &rects, &u, g, omega, true);
        let table = ed_table_by(m as usize, n as usize, g, |i, j| omega(i as u32, j as u32));
        let exact = table.get(m as usize + 1, n as usize + 1);
        // Three diagonals out of the rectangle, then gaps to (9, 8).
        assert_eq!(exact, 3.0 * w + 9.0 * g);
        assert_eq!(out.value_at(&b, m + 1, n + 1), Some(exact));
    }

    #[test]
    fn column_minimum_matches_naive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..100 {
            let (m, n) = (rng.gen_range(2..20u32), rng.gen_range(2..20u32));
            let rects = {
                let c = rng.gen_range(1..8);
                random_rects(&mut rng, m, n, c)
            };
            let mut extra = vec![(1, 1)];
            extra.extend((1..=m + 1).map(|x| (x, n + 1)));
            extra.extend((1..=n + 1).map(|y| (m + 1, y)));
            let b = boundary_of(m + 1, n + 1, &rects, &extra);
            let u = mark_union_boundary(&rects, &b);
            let g = rng.gen_range(0.1..2.0);
            sweep_ed_impl(
                &b,
                &rects,
                &u,
                g,
                |i, j| ((i * 7 + j * 3) % 5) as f64 * 0.3,
                true,
            );
        }
    }

    #[test]
    fn rmq_work_is_linear_in_boundary_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..50 {
            let (m, n) = (rng.gen_range(2..40u32), rng.gen_range(2..40u32));
            let rects = {
                let c = rng.gen_range(1..10);
                random_rects(&mut rng, m, n, c)
            };
            let b = boundary_of(m, n, &rects, &[]);
            let out = sweep_dtw(&b, &rects, |_, _| 1.0);
            let perimeter: usize = rects
                .iter()
                .map(|r| 2 * (r.x_hi - r.x_lo + r.y_hi - r.y_lo) as usize + 1)
                .sum();
            assert!(out.rmq_ops <= 4 * b.len() + perimeter);
        }
    }
}
