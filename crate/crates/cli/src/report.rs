use std::time::Duration;

use serde::{Deserialize, Serialize};
use trajdist::frechet::DistanceBounds;
use trajdist::{ApproxResult, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportMode {
    Exact,
    Approx,
}

impl From<Mode> for ReportMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exact => ReportMode::Exact,
            Mode::Approx => ReportMode::Approx,
        }
    }
}

/// Output of the `dtw`, `ed` and `dfr` subcommands. Every field is always
/// serialized; concepts that do not apply are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub value: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub mode: ReportMode,
    pub eps: Option<f64>,
    pub g: Option<f64>,
    pub num_rects: Option<usize>,
    pub boundary_points: Option<usize>,
    pub union_boundary_points: Option<usize>,
    pub pairing_calls: Option<usize>,
    pub elapsed_ms: f64,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub exact_value: Option<f64>,
    pub exact_elapsed_ms: Option<f64>,
    pub ratio: Option<f64>,
}

pub fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Certified bracket around the true distance that also contains `value`.
///
/// An approximate value `v` pins the distance to `[v/(1+ε), v/(1-ε)]`; this
/// is intersected with the initial estimates, then widened to `v` if needed.
pub fn bracket(value: f64, eps: f64, mode: Mode, bounds: Option<DistanceBounds>) -> (f64, f64) {
    if mode == Mode::Exact {
        return (value, value);
    }
    let mut lo = value / (1.0 + eps);
    let mut hi = value / (1.0 - eps);
    if let Some(b) = bounds {
        lo = lo.max(b.lower);
        hi = hi.min(b.upper);
    }
    (lo.min(value), hi.max(value))
}

pub fn ratio(value: f64, exact: f64) -> Option<f64> {
    if exact > 0.0 {
        Some(value / exact)
    } else if value == 0.0 {
        Some(1.0)
    } else {
        None
    }
}

impl RunReport {
    pub fn from_approx(
        r: &ApproxResult,
        eps: f64,
        g: Option<f64>,
        m: usize,
        n: usize,
        d: usize,
    ) -> Self {
        let (lower_bound, upper_bound) = bracket(r.value, eps, r.mode, r.bounds);
        let approx = r.mode == Mode::Approx;
        let stat = |x: usize| approx.then_some(x);
        Self {
            value: r.value,
            lower_bound,
            upper_bound,
            mode: r.mode.into(),
            eps: Some(eps),
            g,
            num_rects: stat(r.stats.num_rects),
            boundary_points: stat(r.stats.boundary_points),
            union_boundary_points: if approx {
                r.stats.union_boundary_points
            } else {
                None
            },
            pairing_calls: stat(r.stats.pairing_calls),
            elapsed_ms: millis(r.stats.elapsed),
            n,
            m,
            d,
            exact_value: None,
            exact_elapsed_ms: None,
            ratio: None,
        }
    }

    pub fn with_exact(mut self, exact: f64, elapsed: Duration) -> Self {
        self.exact_value = Some(exact);
        self.exact_elapsed_ms = Some(millis(elapsed));
        self.ratio = ratio(self.value, exact);
        self
    }
}
