//! Constructive Lipschitz machinery over finite metric data.
//!
//! The crate evaluates Pasch–Hausdorff envelopes, McShane–Whitney
//! extensions, locally Lipschitz partitions of unity and the extension and
//! approximation pipelines built from them. Every evaluator works by
//! scanning a finite anchor set or a finite cover, so results are exact
//! up to floating-point rounding. The [`verify`] module measures
//! Lipschitz-type moduli on samples and turns the guarantees of each
//! construction into checkable verdicts.

// NaN-rejecting guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod approx;
pub mod blend;
pub mod envelope;
pub mod error;
pub mod extension;
pub mod function;
pub mod io;
pub mod metric;
pub mod partition;
pub mod verify;

pub use error::{LipError, Result};
pub use function::{AnchoredFunction, Evaluable, FnEval, SharedFn};
pub use metric::{Ball, MetricDomain, Point, Transform};
