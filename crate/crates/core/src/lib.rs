//! Approximate dynamic time warping and edit distance between point
//! sequences, with exact dynamic-programming oracles, a discrete Fréchet
//! 2-approximation, and generators for the curve families the approximation
//! guarantees are stated for.

pub mod dtw;
pub mod ed;
pub mod error;
pub mod exact_dp;
pub mod frechet;
pub mod geometry;
pub mod quadtree;
pub mod rangemin;
pub mod rectangles;
pub mod sweep;

pub use dtw::{approx_dtw, ApproxResult, ApproxStats, Mode};
pub use ed::{approx_ed, EdConfig};
pub use error::{Error, Result};
pub use exact_dp::{
    exact_dfr, exact_dtw, exact_dtw_with_path, exact_ed, exact_ed_with_path, DpResult,
};
pub use geometry::{
    euclid_dist, gen_curve, validate_family, CurveFamily, CurveFamilyParams, FamilyReport, Point,
    PointSequence,
};
pub use sweep::{mark_union_boundary, UnionBoundary};
