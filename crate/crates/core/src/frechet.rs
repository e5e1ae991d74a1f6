//! Discrete Fréchet 2-approximation and the distance estimates derived from
//! it.
//!
//! The approximation binary-searches a linear-size candidate set (from a
//! well-separated pair decomposition of `P ∪ Q`) with an approximate decision
//! procedure that runs on simplified sequences and only touches table entries
//! whose points are close.

use std::collections::HashMap;

use crate::error::{param, Result};
use crate::geometry::{dist, PointSequence};

/// A left μ-simplification: 0-based indices of the kept points.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplification {
    pub indices: Vec<usize>,
    pub mu: f64,
}

/// Keeps the first point, then every point more than `mu` away from the
/// last kept one.
pub fn left_mu_simplify(q: &PointSequence, mu: f64) -> Simplification {
    let mut indices = vec![0];
    let mut last = 0;
    for j in 1..q.len() {
        if dist(q.point(last), q.point(j)) > mu {
            indices.push(j);
            last = j;
        }
    }
    Simplification { indices, mu }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    AtMost,
    Exceeds,
}

/// Decision constant used by [`dfr_2approx`].
pub const DECISION_EPS: f64 = 1.0 / 3.0;

/// Approximate decision for `dfr(P, Q)` against `delta`: returns `AtMost`
/// when `dfr <= delta`, `Exceeds` when `dfr > (1 + eps0)·delta`, and either
/// answer in between.
pub fn dfr_decision(
    p: &PointSequence,
    q: &PointSequence,
    delta: f64,
    eps0: f64,
) -> Result<Decision> {
    p.check_same_dim(q)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(param("delta must be positive and finite"));
    }
    if !(eps0 > 0.0 && eps0 <= 1.0) {
        return Err(param("eps0 must lie in (0, 1]"));
    }
    // Each simplification moves the Fréchet distance by at most mu.
    let mu = eps0 * delta / 4.0;
    let radius = (1.0 + eps0 / 2.0) * delta;
    let sp = left_mu_simplify(p, mu).indices;
    let sq = left_mu_simplify(q, mu).indices;
    Ok(if reachable(p, &sp, q, &sq, radius) {
        Decision::AtMost
    } else {
        Decision::Exceeds
    })
}

fn cell_key(x: &[f64], side: f64, offset: &[i64]) -> u64 {
    // Bucket keys are hashed; a collision only adds candidates that the
    // distance filter discards.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for (k, &c) in x.iter().enumerate() {
        let cell = (c / side).floor() as i64 + offset.get(k).copied().unwrap_or(0);
        h ^= cell as u64;
        h = h.wrapping_mul(0x1000_0000_01b3).rotate_left(29);
    }
    h
}

/// Whether the monotone reachability DP over `sp x sq` reaches the corner,
/// using only pairs within `radius`.
fn reachable(
    p: &PointSequence,
    sp: &[usize],
    q: &PointSequence,
    sq: &[usize],
    radius: f64,
) -> bool {
    let d = p.dim();
    if dist(p.point(sp[0]), q.point(sq[0])) > radius
        || dist(p.point(*sp.last().unwrap()), q.point(*sq.last().unwrap())) > radius
    {
        return false;
    }
    let mut grid: HashMap<u64, Vec<u32>> = HashMap::new();
    for (t, &j) in sq.iter().enumerate() {
        grid.entry(cell_key(q.point(j), radius, &[]))
            .or_default()
            .push(t as u32);
    }
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

    const NONE: usize = usize::MAX;
    // last[t]: last simplified row in which column t was reachable.
    let mut last = vec![NONE; sq.len()];
    let mut row: Vec<u32> = Vec::new();
    for (s, &i) in sp.iter().enumerate() {
        row.clear();
        let x = p.point(i);
        for off in &offsets {
            if let Some(bucket) = grid.get(&cell_key(x, radius, off)) {
                row.extend(
                    bucket
                        .iter()
                        .filter(|&&t| dist(x, q.point(sq[t as usize])) <= radius),
                );
            }
        }
        row.sort_unstable();
        row.dedup();
        let mut any = false;
        for &t in &row {
            let t = t as usize;
            let ok = (s == 0 && t == 0)
                || (s > 0 && last[t] == s - 1)
                || (t > 0 && (last[t - 1] == s || (s > 0 && last[t - 1] == s - 1)));
            if ok {
                last[t] = s;
                any = true;
            }
        }
        if !any {
            return false;
        }
    }
    last[sq.len() - 1] == sp.len() - 1
}

#[derive(Debug, Clone)]
struct SplitNode {
    lo: Vec<f64>,
    hi: Vec<f64>,
    rep: usize,
    has_p: bool,
    has_q: bool,
    children: Option<(usize, usize)>,
}

impl SplitNode {
    fn diam(&self) -> f64 {
        dist(&self.lo, &self.hi)
    }
}

/// Split tree over the combined point set; points `< split` come from `P`.
fn split_tree(pts: &[&[f64]], split: usize) -> Vec<SplitNode> {
    let d = pts[0].len();
    let mut nodes: Vec<SplitNode> = Vec::with_capacity(2 * pts.len());
    let mut order: Vec<usize> = (0..pts.len()).collect();
    // (node, range in `order`)
    let mut stack = vec![(0usize, 0usize, pts.len())];
    nodes.push(empty_node(d));
    while let Some((v, a, b)) = stack.pop() {
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        let (mut has_p, mut has_q) = (false, false);
        for &idx in &order[a..b] {
            for k in 0..d {
                lo[k] = lo[k].min(pts[idx][k]);
                hi[k] = hi[k].max(pts[idx][k]);
            }
            has_p |= idx < split;
            has_q |= idx >= split;
        }
        let axis = (0..d)
            .max_by(|&x, &y| (hi[x] - lo[x]).total_cmp(&(hi[y] - lo[y])))
            .unwrap();
        let node = &mut nodes[v];
        node.rep = order[a];
        node.has_p = has_p;
        node.has_q = has_q;
        if hi[axis] > lo[axis] {
            let mid = 0.5 * (lo[axis] + hi[axis]);
            let slice = &mut order[a..b];
            let mut m = 0;
            for t in 0..slice.len() {
                if pts[slice[t]][axis] < mid {
                    slice.swap(t, m);
                    m += 1;
                }
            }
            if m == 0 {
                // `mid` rounded onto `lo`: split off the points at `lo`.
                for t in 0..slice.len() {
                    if pts[slice[t]][axis] <= mid {
                        slice.swap(t, m);
                        m += 1;
                    }
                }
            }
            let l = nodes.len();
            nodes.push(empty_node(d));
            nodes.push(empty_node(d));
            nodes[v].children = Some((l, l + 1));
            stack.push((l, a, a + m));
            stack.push((l + 1, a + m, b));
        }
        nodes[v].lo = lo;
        nodes[v].hi = hi;
    }
    nodes
}

fn empty_node(d: usize) -> SplitNode {
    SplitNode {
        lo: vec![0.0; d],
        hi: vec![0.0; d],
        rep: 0,
        has_p: false,
        has_q: false,
        children: None,
    }
}

/// Distances `D` such that every `||p_i q_j||` lies within a factor `1.2` of
/// some `D`; sorted, deduplicated, positive.
pub fn candidate_distances(p: &PointSequence, q: &PointSequence) -> Result<Vec<f64>> {
    p.check_same_dim(q)?;
    let pts: Vec<&[f64]> = p.points().chain(q.points()).collect();
    let nodes = split_tree(&pts, p.len());
    let relevant = |a: &SplitNode, b: &SplitNode| (a.has_p && b.has_q) || (a.has_q && b.has_p);
    let mut out = Vec::new();
    let mut stack: Vec<(usize, usize)> = nodes.iter().filter_map(|n| n.children).collect();
    while let Some((a, b)) = stack.pop() {
        let (na, nb) = (&nodes[a], &nodes[b]);
        if !relevant(na, nb) {
            continue;
        }
        let gap = dist(pts[na.rep], pts[nb.rep]);
        // Any cross distance is within (diam_a + diam_b) of `gap`.
        if 6.0 * (na.diam() + nb.diam()) <= gap {
            if gap > 0.0 {
                out.push(gap);
            }
            continue;
        }
        let (big, other) = if na.diam() >= nb.diam() {
            (a, b)
        } else {
            (b, a)
        };
        let (c1, c2) = nodes[big]
            .children
            .expect("a zero-diameter pair is always separated");
        stack.push((c1, other));
        stack.push((c2, other));
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

fn collapse_runs(s: &PointSequence) -> Vec<&[f64]> {
    let mut out: Vec<&[f64]> = Vec::new();
    for x in s.points() {
        if out.last() != Some(&x) {
            out.push(x);
        }
    }
    out
}

/// Whether some monotone correspondence pairs only identical points.
pub fn dfr_is_zero(p: &PointSequence, q: &PointSequence) -> bool {
    p.dim() == q.dim() && collapse_runs(p) == collapse_runs(q)
}

/// A value `v` with `dfr(P, Q) <= v <= 2·dfr(P, Q)`.
pub fn dfr_2approx(p: &PointSequence, q: &PointSequence) -> Result<f64> {
    p.check_same_dim(q)?;
    if dfr_is_zero(p, q) {
        return Ok(0.0);
    }
    let base = candidate_distances(p, q)?;
    // Scaled copies bound the gap between a failing candidate and the next one.
    let mut cands: Vec<f64> = base.iter().flat_map(|&c| [c, 1.2 * c]).collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let decide = |c: f64| dfr_decision(p, q, c, DECISION_EPS).map(|d| d == Decision::AtMost);

    let mut hi = cands.len() - 1;
    debug_assert!(decide(cands[hi])?);
    if decide(cands[0])? {
        return Ok((1.0 + DECISION_EPS) * cands[0]);
    }
    let mut lo = 0;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if decide(cands[mid])? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((1.0 + DECISION_EPS) * cands[hi])
}

/// Lower and upper estimates bracketing a distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceBounds {
    pub lower: f64,
    pub upper: f64,
}

/// `δ_low = dfr_2approx / 2` and `δ_high = 4n·δ_low`, `n = max(m, n)`.
pub fn dtw_bounds(p: &PointSequence, q: &PointSequence) -> Result<DistanceBounds> {
    let v = dfr_2approx(p, q)?;
    let n = p.len().max(q.len()) as f64;
    let lower = v / 2.0;
    Ok(DistanceBounds {
        lower,
        upper: 4.0 * n * lower,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdBounds {
    /// The diagonal matching is optimal.
    Exact(f64),
    Bounds(DistanceBounds),
}

/// Either the exact edit distance (equal lengths, diagonal cost at most `g`)
/// or the bounds `(g, 2(m+n)g)`.
pub fn ed_bounds(p: &PointSequence, q: &PointSequence, g: f64) -> Result<EdBounds> {
    p.check_same_dim(q)?;
    if !(g > 0.0 && g.is_finite()) {
        return Err(param("gap penalty g must be positive and finite"));
    }
    if p.len() == q.len() {
        let diag: f64 = p.points().zip(q.points()).map(|(a, b)| dist(a, b)).sum();
        if diag <= g {
            return Ok(EdBounds::Exact(diag));
        }
    }
    Ok(EdBounds::Bounds(DistanceBounds {
        lower: g,
        upper: 2.0 * (p.len() + q.len()) as f64 * g,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_dp::{exact_dfr, exact_dtw, exact_ed};
    use crate::geometry::{gen_curve, CurveFamilyParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seq(points: &[&[f64]]) -> PointSequence {
        PointSequence::from_points(points.iter().copied()).unwrap()
    }

    fn line(xs: &[f64]) -> PointSequence {
        PointSequence::from_flat(1, xs.to_vec()).unwrap()
    }

    fn random_seq(rng: &mut ChaCha8Rng, n: usize, spread: f64) -> PointSequence {
        let coords = (0..2 * n).map(|_| rng.gen_range(-spread..spread)).collect();
        PointSequence::from_flat(2, coords).unwrap()
    }

    fn check_simplification(q: &PointSequence, s: &Simplification) {
        assert_eq!(s.indices[0], 0);
        for w in s.indices.windows(2) {
            assert!(w[0] < w[1]);
            assert!(dist(q.point(w[0]), q.point(w[1])) > s.mu);
        }
        let mut kept = 0;
        for j in 0..q.len() {
            if s.indices.get(kept + 1) == Some(&j) {
                kept += 1;
            }
            if s.indices[kept] != j {
                assert!(dist(q.point(j), q.point(s.indices[kept])) <= s.mu);
            }
        }
    }

    #[test]
    fn simplify_examples() {
        let q = line(&[0.0, 0.5, 2.0, 2.4, 5.0]);
        assert_eq!(left_mu_simplify(&q, 1.0).indices, vec![0, 2, 4]);
        assert_eq!(left_mu_simplify(&q, 0.0).indices, vec![0, 1, 2, 3, 4]);
        assert_eq!(left_mu_simplify(&q, 5.0).indices, vec![0]);
    }

    #[test]
    fn decision_examples() {
        let a = seq(&[&[0.0, 0.0], &[1.0, 2.0]]);
        assert_eq!(dfr_decision(&a, &a, 1.0, 0.5).unwrap(), Decision::AtMost);
        let p = seq(&[&[0.0, 0.0]]);
        let q = seq(&[&[10.0, 0.0]]);
        assert_eq!(dfr_decision(&p, &q, 1.0, 0.5).unwrap(), Decision::Exceeds);
        assert!(dfr_decision(&p, &q, 0.0, 0.5).is_err());
        assert!(dfr_decision(&p, &q, -1.0, 0.5).is_err());
    }

    #[test]
    fn decision_respects_gap_against_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let p = random_seq(&mut rng, 50, 5.0);
            let q = random_seq(&mut rng, 50, 5.0);
            let dfr = exact_dfr(&p, &q).unwrap();
            for f in [0.5, 0.7, 0.74, 0.76, 0.9, 1.0, 1.01, 1.2, 2.0] {
                let delta = dfr * f;
                let dec = dfr_decision(&p, &q, delta, 1.0 / 3.0).unwrap();
                if dfr <= delta {
                    assert_eq!(dec, Decision::AtMost);
                }
                if dfr > (1.0 + 1.0 / 3.0) * delta {
                    assert_eq!(dec, Decision::Exceeds);
                }
            }
        }
    }

    #[test]
    fn decision_is_monotone_over_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let p = random_seq(&mut rng, 40, 5.0);
            let q = random_seq(&mut rng, 40, 5.0);
            let mut seen_at_most = false;
            for k in 1..200 {
                let delta = 0.05 * k as f64;
                let at_most = dfr_decision(&p, &q, delta, 1.0 / 3.0).unwrap() == Decision::AtMost;
                assert!(!seen_at_most || at_most, "not monotone at {delta}");
                seen_at_most |= at_most;
            }
        }
    }

    #[test]
    fn candidate_examples() {
        let a = seq(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(candidate_distances(&a, &a).unwrap().is_empty());
        let c = candidate_distances(&seq(&[&[0.0, 0.0]]), &seq(&[&[8.0, 0.0]])).unwrap();
        assert_eq!(c.len(), 1);
        assert!(8.0 / 1.2 <= c[0] && c[0] <= 8.0 * 1.2);
    }

    #[test]
    fn candidates_approximate_every_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let p = random_seq(&mut rng, 40, 10.0);
            let q = random_seq(&mut rng, 40, 10.0);
            let c = candidate_distances(&p, &q).unwrap();
            assert!(c.len() <= 40 * (p.len() + q.len()));
            for x in p.points() {
                for y in q.points() {
                    let d = dist(x, y);
                    assert!(c.iter().any(|&v| d / 1.2 <= v && v <= 1.2 * d), "{d}");
                }
            }
        }
    }

    #[test]
    fn approx_examples() {
        let a = seq(&[&[0.0, 0.0], &[2.0, 1.0]]);
        assert_eq!(dfr_2approx(&a, &a).unwrap(), 0.0);
        let v = dfr_2approx(&seq(&[&[0.0, 0.0]]), &seq(&[&[3.0, 4.0]])).unwrap();
        assert!((5.0..=10.0).contains(&v), "{v}");
        let stutter = seq(&[&[0.0, 0.0], &[0.0, 0.0], &[2.0, 1.0]]);
        assert_eq!(dfr_2approx(&a, &stutter).unwrap(), 0.0);
    }

    #[test]
    fn approx_within_factor_two_on_packed_curves() {
        for seed in 0..10 {
            let p = gen_curve(&CurveFamilyParams::packed(8.0, seed), 100).unwrap();
            let q = gen_curve(&CurveFamilyParams::packed(8.0, seed + 100), 100).unwrap();
            let dfr = exact_dfr(&p, &q).unwrap();
            let v = dfr_2approx(&p, &q).unwrap();
            assert!(dfr <= v && v <= 2.0 * dfr, "{dfr} {v}");
        }
    }

    #[test]
    fn bounds_examples() {
        let a = seq(&[&[0.0, 0.0], &[1.0, 1.0]]);
        assert_eq!(
            dtw_bounds(&a, &a).unwrap(),
            DistanceBounds {
                lower: 0.0,
                upper: 0.0
            }
        );
        let b = dtw_bounds(&seq(&[&[0.0, 0.0]]), &seq(&[&[3.0, 4.0]])).unwrap();
        assert!((2.5..=5.0).contains(&b.lower));
        assert_eq!(b.upper, 4.0 * b.lower);

        assert_eq!(ed_bounds(&a, &a, 1.0).unwrap(), EdBounds::Exact(0.0));
        let m3 = seq(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]]);
        assert_eq!(
            ed_bounds(&a, &m3, 1.0).unwrap(),
            EdBounds::Bounds(DistanceBounds {
                lower: 1.0,
                upper: 10.0
            })
        );
        let far = seq(&[&[3.0, 4.0], &[1.0, 1.0]]);
        assert_eq!(
            ed_bounds(&a, &far, 1.0).unwrap(),
            EdBounds::Bounds(DistanceBounds {
                lower: 1.0,
                upper: 8.0
            })
        );
        assert!(ed_bounds(&a, &a, 0.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_seq(max: usize) -> impl Strategy<Value = PointSequence> {
            prop::collection::vec(prop::collection::vec(-4i32..4, 2), 1..=max).prop_map(|pts| {
                PointSequence::from_points(
                    pts.into_iter()
                        .map(|p| p.into_iter().map(f64::from).collect::<Vec<_>>()),
                )
                .unwrap()
            })
        }

        proptest! {
            #[test]
            fn simplification_invariants(q in arb_seq(40), mu in 0.0f64..4.0) {
                check_simplification(&q, &left_mu_simplify(&q, mu));
            }

            #[test]
            fn approx_factor_and_bounds(p in arb_seq(25), q in arb_seq(25), g in 0.1f64..3.0) {
                let dfr = exact_dfr(&p, &q).unwrap();
                let v = dfr_2approx(&p, &q).unwrap();
                if dfr == 0.0 {
                    prop_assert_eq!(v, 0.0);
                } else {
                    prop_assert!(dfr <= v + 1e-9 && v <= 2.0 * dfr + 1e-9);
                }
                let b = dtw_bounds(&p, &q).unwrap();
                let dtw = exact_dtw(&p, &q).unwrap().value;
                prop_assert!(b.lower <= dtw + 1e-9 && dtw <= b.upper + 1e-9);
                let ed = exact_ed(&p, &q, g).unwrap().value;
                match ed_bounds(&p, &q, g).unwrap() {
                    EdBounds::Exact(x) => prop_assert!((x - ed).abs() <= 1e-9),
                    EdBounds::Bounds(b) => prop_assert!(b.lower <= ed + 1e-9 && ed <= b.upper + 1e-9),
                }
            }
        }
    }
}
