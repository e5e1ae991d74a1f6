//! Quadratic-time exact dynamic programs for DTW, edit distance and the
//! discrete Fréchet distance.
//!
//! Grid points are 1-based: `(i, j)` pairs `p_i` with `q_j`. The DTW and
//! Fréchet grids are `[m] x [n]`; the edit-distance grid is
//! `[m+1] x [n+1]`, where a diagonal edge leaving `(i, j)` matches `p_i` with
//! `q_j` and every axis edge pays the gap penalty `g`.

use crate::error::{param, Result};
use crate::geometry::{dist, PointSequence};

/// An exact distance, optionally with an optimal admissible path.
#[derive(Debug, Clone, PartialEq)]
pub struct DpResult {
    pub value: f64,
    pub path: Option<Vec<(usize, usize)>>,
}

/// A dense table over a 1-based grid, stored row-major by `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub cols: usize,
    pub rows: usize,
    data: Vec<f64>,
}

impl Table {
    fn new(cols: usize, rows: usize) -> Self {
        Self {
            cols,
            rows,
            data: vec![f64::INFINITY; cols * rows],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i - 1) * self.rows + (j - 1)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[(i - 1) * self.rows + (j - 1)] = v;
    }
}

fn omega<'a>(p: &'a PointSequence, q: &'a PointSequence) -> impl Fn(usize, usize) -> f64 + 'a {
    move |i, j| dist(p.point(i - 1), q.point(j - 1))
}

/// Full DTW table `μ(i, j)` for an arbitrary weight function on `[m] x [n]`.
pub fn dtw_table_by(m: usize, n: usize, w: impl Fn(usize, usize) -> f64) -> Table {
    let mut t = Table::new(m, n);
    for i in 1..=m {
        for j in 1..=n {
            let best = if i == 1 && j == 1 {
                0.0
            } else {
                let mut b = f64::INFINITY;
                if i > 1 && j > 1 {
                    b = b.min(t.get(i - 1, j - 1));
                }
                if j > 1 {
                    b = b.min(t.get(i, j - 1));
                }
                if i > 1 {
                    b = b.min(t.get(i - 1, j));
                }
                b
            };
            t.set(i, j, best + w(i, j));
        }
    }
    t
}

/// Full edit-distance table on `[m+1] x [n+1]`; `w(i, j)` is the cost of the
/// diagonal edge leaving `(i, j)`.
pub fn ed_table_by(m: usize, n: usize, g: f64, w: impl Fn(usize, usize) -> f64) -> Table {
    let mut t = Table::new(m + 1, n + 1);
    for i in 1..=m + 1 {
        for j in 1..=n + 1 {
            let v = if i == 1 && j == 1 {
                0.0
            } else {
                let mut b = f64::INFINITY;
                if i > 1 && j > 1 {
                    b = b.min(t.get(i - 1, j - 1) + w(i - 1, j - 1));
                }
                if j > 1 {
                    b = b.min(t.get(i, j - 1) + g);
                }
                if i > 1 {
                    b = b.min(t.get(i - 1, j) + g);
                }
                b
            };
            t.set(i, j, v);
        }
    }
    t
}

pub fn dtw_table(p: &PointSequence, q: &PointSequence) -> Result<Table> {
    p.check_same_dim(q)?;
    Ok(dtw_table_by(p.len(), q.len(), omega(p, q)))
}

pub fn ed_table(p: &PointSequence, q: &PointSequence, g: f64) -> Result<Table> {
    p.check_same_dim(q)?;
    check_gap(g)?;
    Ok(ed_table_by(p.len(), q.len(), g, omega(p, q)))
}

fn check_gap(g: f64) -> Result<()> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(param("gap penalty g must be positive and finite"));
    }
    Ok(())
}

/// Walks back from `(i, j)` preferring the diagonal, then vertical, then
/// horizontal predecessor among those achieving `t(i, j)`.
fn backtrack(
    t: &Table,
    mut i: usize,
    mut j: usize,
    step: impl Fn(usize, usize, usize, usize) -> f64,
) -> Vec<(usize, usize)> {
    let mut path = vec![(i, j)];
    while (i, j) != (1, 1) {
        let here = t.get(i, j);
        let cands = [
            (i > 1 && j > 1, i.wrapping_sub(1), j.wrapping_sub(1)),
            (j > 1, i, j.wrapping_sub(1)),
            (i > 1, i.wrapping_sub(1), j),
        ];
        let next = cands
            .iter()
            .filter(|c| c.0)
            .find(|&&(_, a, b)| step(a, b, i, j) == here)
            .or_else(|| {
                // Rounding can hide the exact predecessor; fall back to the argmin.
                cands
                    .iter()
                    .filter(|c| c.0)
                    .min_by(|x, y| step(x.1, x.2, i, j).total_cmp(&step(y.1, y.2, i, j)))
            })
            .map(|&(_, a, b)| (a, b))
            .expect("every non-origin cell has a predecessor");
        (i, j) = next;
        path.push(next);
    }
    path.reverse();
    path
}

fn dtw_rolling(
    m: usize,
    n: usize,
    w: impl Fn(usize, usize) -> f64,
    combine: impl Fn(f64, f64) -> f64,
) -> f64 {
    let mut prev = vec![f64::INFINITY; n + 1];
    let mut cur = vec![f64::INFINITY; n + 1];
    for i in 1..=m {
        cur[0] = f64::INFINITY;
        for j in 1..=n {
            let best = if i == 1 && j == 1 {
                f64::NEG_INFINITY
            } else {
                prev[j - 1].min(cur[j - 1]).min(prev[j])
            };
            cur[j] = combine(best, w(i, j));
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[n]
}

/// Exact dynamic time warping distance.
pub fn exact_dtw(p: &PointSequence, q: &PointSequence) -> Result<DpResult> {
    p.check_same_dim(q)?;
    let value = dtw_rolling(p.len(), q.len(), omega(p, q), |b, w| {
        if b == f64::NEG_INFINITY {
            w
        } else {
            b + w
        }
    });
    Ok(DpResult { value, path: None })
}

/// Exact DTW distance together with an optimal admissible path.
pub fn exact_dtw_with_path(p: &PointSequence, q: &PointSequence) -> Result<DpResult> {
    let t = dtw_table(p, q)?;
    let w = omega(p, q);
    let path = backtrack(&t, p.len(), q.len(), |a, b, i, j| t.get(a, b) + w(i, j));
    Ok(DpResult {
        value: t.get(p.len(), q.len()),
        path: Some(path),
    })
}

/// Exact discrete Fréchet distance.
pub fn exact_dfr(p: &PointSequence, q: &PointSequence) -> Result<f64> {
    p.check_same_dim(q)?;
    Ok(dtw_rolling(p.len(), q.len(), omega(p, q), f64::max))
}

fn ed_rolling(m: usize, n: usize, g: f64, w: impl Fn(usize, usize) -> f64) -> f64 {
    let mut prev = vec![f64::INFINITY; n + 2];
    let mut cur = vec![f64::INFINITY; n + 2];
    for i in 1..=m + 1 {
        cur[0] = f64::INFINITY;
        for j in 1..=n + 1 {
            cur[j] = if i == 1 && j == 1 {
                0.0
            } else {
                let mut b = prev[j] + g;
                b = b.min(cur[j - 1] + g);
                if i > 1 && j > 1 {
                    b = b.min(prev[j - 1] + w(i - 1, j - 1));
                }
                b
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[n + 1]
}

/// Exact edit distance with linear gap penalty `g`.
pub fn exact_ed(p: &PointSequence, q: &PointSequence, g: f64) -> Result<DpResult> {
    p.check_same_dim(q)?;
    check_gap(g)?;
    Ok(DpResult {
        value: ed_rolling(p.len(), q.len(), g, omega(p, q)),
        path: None,
    })
}

/// Exact edit distance together with an optimal path on the padded grid.
pub fn exact_ed_with_path(p: &PointSequence, q: &PointSequence, g: f64) -> Result<DpResult> {
    let t = ed_table(p, q, g)?;
    let w = omega(p, q);
    let path = backtrack(&t, p.len() + 1, q.len() + 1, |a, b, i, j| {
        if a < i && b < j {
            t.get(a, b) + w(a, b)
        } else {
            t.get(a, b) + g
        }
    });
    Ok(DpResult {
        value: t.get(p.len() + 1, q.len() + 1),
        path: Some(path),
    })
}
