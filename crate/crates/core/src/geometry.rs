//! Point sequences, the Euclidean metric, and generators for the three curve
//! families the approximation algorithms are analysed on.
//!
//! * **κ-packed**: the length of the curve inside any ball of radius `r` is at
//!   most `κ·r`.
//! * **κ-bounded**: the subcurve between any two points lies inside the union
//!   of the two balls of radius `κ/2` times their separation, centred at them.
//! * **backbone**: consecutive points are between `c1` and `c2` apart and
//!   non-consecutive points are more than `1` apart.
//!
//! Generated curves are planar. Every generator is a pure function of its
//! parameters and the requested length.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{param, Error, Result};

/// A single point of `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(param("a point needs at least one coordinate"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(param("point coordinates must be finite"));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Euclidean distance between two points of equal dimension.
pub fn euclid_dist(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Dimension {
            expected: p.len(),
            found: q.len(),
        });
    }
    Ok(dist(p, q))
}

#[inline]
pub(crate) fn dist(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// A non-empty ordered sequence of points sharing one dimension, stored as a
/// flat coordinate buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSequence {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSequence {
    /// Builds a sequence from a flat buffer of `len * dim` coordinates.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(param("dimension must be at least 1"));
        }
        if coords.is_empty() {
            return Err(param("a point sequence must be non-empty"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::Dimension {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(param("point coordinates must be finite"));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points<I, P>(points: I) -> Result<Self>
    where
        I: IntoIterator<Item = P>,
        P: AsRef<[f64]>,
    {
        let mut dim = None;
        let mut coords = Vec::new();
        for p in points {
            let p = p.as_ref();
            match dim {
                None => dim = Some(p.len()),
                Some(d) if d != p.len() => {
                    return Err(Error::Dimension {
                        expected: d,
                        found: p.len(),
                    })
                }
                Some(_) => {}
            }
            coords.extend_from_slice(p);
        }
        let dim = dim.ok_or_else(|| param("a point sequence must be non-empty"))?;
        Self::from_flat(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false; sequences are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn flat(&self) -> &[f64] {
        &self.coords
    }

    pub(crate) fn check_same_dim(&self, other: &PointSequence) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveFamily {
    KappaPacked,
    KappaBounded,
    Backbone,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveFamilyParams {
    pub family: CurveFamily,
    pub kappa: f64,
    pub c1: f64,
    pub c2: f64,
    pub seed: u64,
}

impl CurveFamilyParams {
    pub fn packed(kappa: f64, seed: u64) -> Self {
        Self {
            family: CurveFamily::KappaPacked,
            kappa,
            c1: 1.5,
            c2: 1.5,
            seed,
        }
    }

    pub fn bounded(kappa: f64, seed: u64) -> Self {
        Self {
            family: CurveFamily::KappaBounded,
            kappa,
            c1: 1.5,
            c2: 1.5,
            seed,
        }
    }

    pub fn backbone(c1: f64, c2: f64, seed: u64) -> Self {
        Self {
            family: CurveFamily::Backbone,
            kappa: 1.0,
            c1,
            c2,
            seed,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(param("kappa must be positive"));
        }
        if self.family == CurveFamily::Backbone
            && !(1.0 < self.c1 && self.c1 <= self.c2 && self.c2.is_finite())
        {
            return Err(param("backbone steps need 1 < c1 <= c2"));
        }
        if self.family == CurveFamily::KappaPacked && self.kappa < 4.0 {
            return Err(param("the spiral generator needs kappa >= 4"));
        }
        Ok(())
    }
}

/// Fraction of `κ` used as the spiral's total turning angle (radians).
const SPIRAL_ANGLE_PER_KAPPA: f64 = 1.0;
/// Backbone generator: attempts per step before giving up.
const BACKBONE_RETRIES: usize = 1000;
/// Backbone generator: largest heading change per step on ordinary attempts.
const BACKBONE_TURN: f64 = 0.35;

/// Generates `n` points of the requested curve family.
pub fn gen_curve(params: &CurveFamilyParams, n: usize) -> Result<PointSequence> {
    if n < 2 {
        return Err(param("curve generation needs n >= 2"));
    }
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let coords = match params.family {
        CurveFamily::KappaPacked => spiral(params.kappa, n, &mut rng),
        CurveFamily::KappaBounded => koch(n, &mut rng),
        CurveFamily::Backbone => backbone(params.c1, params.c2, n, &mut rng)?,
    };
    PointSequence::from_flat(2, coords)
}

fn rotate_translate(coords: &mut [f64], rng: &mut ChaCha8Rng, shift: f64) {
    let phi = rng.gen_range(0.0..2.0 * PI);
    let (s, c) = phi.sin_cos();
    let dx = rng.gen_range(-shift..=shift);
    let dy = rng.gen_range(-shift..=shift);
    for p in coords.chunks_exact_mut(2) {
        let (x, y) = (p[0], p[1]);
        p[0] = c * x - s * y + dx;
        p[1] = s * x + c * y + dy;
    }
}

/// Archimedean spiral `r = a·θ` for `θ ∈ [0, κ]`, sampled uniformly by
/// arclength at unit spacing, with a small per-vertex jitter.
fn spiral(kappa: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let theta_max = kappa * SPIRAL_ANGLE_PER_KAPPA;
    let unit_len = |t: f64| 0.5 * (t * (1.0 + t * t).sqrt() + t.asinh());
    let a = (n - 1) as f64 / unit_len(theta_max);
    let mut coords = Vec::with_capacity(2 * n);
    let mut theta: f64 = 0.0;
    for k in 0..n {
        let target = k as f64 / a;
        // Newton on the unit arclength; monotone and convex past the origin.
        for _ in 0..50 {
            let f = unit_len(theta) - target;
            let df = (1.0 + theta * theta).sqrt();
            let step = f / df;
            theta = (theta - step).clamp(0.0, theta_max);
            if step.abs() < 1e-14 {
                break;
            }
        }
        let r = a * theta;
        let jx = rng.gen_range(-0.1..=0.1);
        let jy = rng.gen_range(-0.1..=0.1);
        coords.push(r * theta.cos() + jx);
        coords.push(r * theta.sin() + jy);
    }
    rotate_translate(&mut coords, rng, 1.0);
    coords
}

/// Koch curve of the smallest level with at least `n` vertices, unit segment
/// length, truncated to its first `n` vertices.
fn koch(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut level = 0u32;
    while 4usize.pow(level) + 1 < n {
        level += 1;
    }
    let scale = 3f64.powi(level as i32);
    let mut pts: Vec<(f64, f64)> = vec![(0.0, 0.0), (scale, 0.0)];
    for _ in 0..level {
        let mut next = Vec::with_capacity(4 * pts.len());
        for w in pts.windows(2) {
            let (ax, ay) = w[0];
            let (bx, by) = w[1];
            let (dx, dy) = ((bx - ax) / 3.0, (by - ay) / 3.0);
            let p1 = (ax + dx, ay + dy);
            let p3 = (ax + 2.0 * dx, ay + 2.0 * dy);
            // Apex: rotate the middle third by +60 degrees.
            let (s, c) = (PI / 3.0).sin_cos();
            let p2 = (p1.0 + c * dx - s * dy, p1.1 + s * dx + c * dy);
            next.extend_from_slice(&[w[0], p1, p2, p3]);
        }
        next.push(*pts.last().unwrap());
        pts = next;
    }
    let mut coords: Vec<f64> = pts[..n].iter().flat_map(|&(x, y)| [x, y]).collect();
    rotate_translate(&mut coords, rng, 1.0);
    coords
}

fn backbone(c1: f64, c2: f64, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let cell = |x: f64, y: f64| (x.floor() as i64, y.floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut pts: Vec<[f64; 2]> = Vec::with_capacity(n);
    pts.push([0.0, 0.0]);
    grid.entry(cell(0.0, 0.0)).or_default().push(0);
    let mut heading = rng.gen_range(0.0..2.0 * PI);

    for k in 1..n {
        let prev = pts[k - 1];
        let mut placed = false;
        for attempt in 0..BACKBONE_RETRIES {
            let turn = if attempt < BACKBONE_RETRIES / 2 {
                rng.gen_range(-BACKBONE_TURN..=BACKBONE_TURN)
            } else {
                rng.gen_range(-PI..=PI)
            };
            let len = if c1 == c2 { c1 } else { rng.gen_range(c1..=c2) };
            let h = heading + turn;
            let cand = [prev[0] + len * h.cos(), prev[1] + len * h.sin()];
            let step = dist(&prev, &cand);
            if step < c1 || step > c2 {
                continue;
            }
            let (cx, cy) = cell(cand[0], cand[1]);
            let clash = (-1..=1).any(|ox| {
                (-1..=1).any(|oy| {
                    grid.get(&(cx + ox, cy + oy)).is_some_and(|bucket| {
                        bucket
                            .iter()
                            .any(|&i| i + 1 < k && dist(&pts[i], &cand) <= 1.0)
                    })
                })
            });
            if clash {
                continue;
            }
            heading = h;
            grid.entry((cx, cy)).or_default().push(k);
            pts.push(cand);
            placed = true;
            break;
        }
        if !placed {
            return Err(Error::Generation(format!(
                "no admissible backbone step at index {k} after {BACKBONE_RETRIES} attempts"
            )));
        }
    }
    Ok(pts.into_iter().flatten().collect())
}

/// Outcome of a family-membership check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyReport {
    pub ok: bool,
    /// Largest observed ratio of the measured quantity to its allowed bound;
    /// `ok` implies `worst_ratio <= 1` for the sampled families.
    pub worst_ratio: f64,
}

/// Checks `seq` against the family described by `params`.
///
/// The κ-packed check is sampled: balls are centred at vertices, with
/// `resolution` radii spaced geometrically between half the shortest segment
/// and the diameter. The κ-bounded check tests the two-ball containment of
/// every intermediate vertex for every vertex pair. The backbone check is
/// exact.
pub fn validate_family(
    seq: &PointSequence,
    params: &CurveFamilyParams,
    resolution: usize,
) -> FamilyReport {
    let resolution = resolution.max(1);
    match params.family {
        CurveFamily::KappaPacked => check_packed(seq, params.kappa, resolution),
        CurveFamily::KappaBounded => check_bounded(seq, params.kappa),
        CurveFamily::Backbone => check_backbone(seq, params.c1, params.c2),
    }
}

/// Length of segment `a`-`b` inside the closed ball `B(c, r)`.
fn segment_in_ball(a: &[f64], b: &[f64], c: &[f64], r: f64) -> f64 {
    let mut dd = 0.0;
    let mut df = 0.0;
    let mut ff = 0.0;
    for k in 0..a.len() {
        let d = b[k] - a[k];
        let f = a[k] - c[k];
        dd += d * d;
        df += d * f;
        ff += f * f;
    }
    if dd == 0.0 {
        return 0.0;
    }
    // |f + t d|^2 <= r^2
    let disc = df * df - dd * (ff - r * r);
    if disc <= 0.0 {
        return 0.0;
    }
    let sq = disc.sqrt();
    let t0 = ((-df - sq) / dd).max(0.0);
    let t1 = ((-df + sq) / dd).min(1.0);
    if t1 <= t0 {
        0.0
    } else {
        (t1 - t0) * dd.sqrt()
    }
}

fn check_packed(seq: &PointSequence, kappa: f64, resolution: usize) -> FamilyReport {
    let n = seq.len();
    if n < 2 {
        return FamilyReport {
            ok: true,
            worst_ratio: 0.0,
        };
    }
    let min_seg = (1..n)
        .map(|i| dist(seq.point(i - 1), seq.point(i)))
        .filter(|&l| l > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !min_seg.is_finite() {
        return FamilyReport {
            ok: true,
            worst_ratio: 0.0,
        };
    }
    let diam = bbox_diagonal(seq);
    let r_min = (0.5 * min_seg).min(diam);
    let radii: Vec<f64> = if resolution == 1 {
        vec![diam]
    } else {
        let ratio = (diam / r_min).ln() / (resolution - 1) as f64;
        (0..resolution)
            .map(|k| r_min * (ratio * k as f64).exp())
            .collect()
    };
    let mut worst: f64 = 0.0;
    for c in seq.points() {
        for &r in &radii {
            let len: f64 = (1..n)
                .map(|i| segment_in_ball(seq.point(i - 1), seq.point(i), c, r))
                .sum();
            worst = worst.max(len / (kappa * r));
        }
    }
    FamilyReport {
        ok: worst <= 1.0,
        worst_ratio: worst,
    }
}

fn bbox_diagonal(seq: &PointSequence) -> f64 {
    let d = seq.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in seq.points() {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    dist(&lo, &hi)
}

fn check_bounded(seq: &PointSequence, kappa: f64) -> FamilyReport {
    let n = seq.len();
    let mut worst: f64 = 0.0;
    for s in 0..n {
        for t in s + 2..n {
            let st = dist(seq.point(s), seq.point(t));
            let allowed = 0.5 * kappa * st;
            for k in s + 1..t {
                let reach = dist(seq.point(k), seq.point(s)).min(dist(seq.point(k), seq.point(t)));
                let ratio = if allowed > 0.0 {
                    reach / allowed
                } else if reach > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                worst = worst.max(ratio);
            }
        }
    }
    FamilyReport {
        ok: worst <= 1.0,
        worst_ratio: worst,
    }
}

fn check_backbone(seq: &PointSequence, c1: f64, c2: f64) -> FamilyReport {
    let n = seq.len();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for i in 1..n {
        let l = dist(seq.point(i - 1), seq.point(i));
        ok &= c1 <= l && l <= c2;
        worst = worst.max(c1 / l).max(l / c2);
    }
    for i in 0..n {
        for j in i + 2..n {
            let l = dist(seq.point(i), seq.point(j));
            ok &= l > 1.0;
            worst = worst.max(1.0 / l);
        }
    }
    FamilyReport {
        ok,
        worst_ratio: worst,
    }
}
