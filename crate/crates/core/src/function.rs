//! Anchored data and the common evaluator interface.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{LipError, Result};
use crate::metric::{MetricDomain, Point, PointKey};

/// Anything that can be evaluated at a point of its domain.
pub trait Evaluable: Send + Sync {
    fn eval(&self, p: &Point) -> Result<f64>;

    fn domain(&self) -> &MetricDomain;

    fn eval_many(&self, points: &[Point]) -> Result<Vec<f64>> {
        points.iter().map(|p| self.eval(p)).collect()
    }
}

/// Shared, type-erased evaluator.
pub type SharedFn = Arc<dyn Evaluable>;

impl<T: Evaluable + ?Sized> Evaluable for Arc<T> {
    fn eval(&self, p: &Point) -> Result<f64> {
        (**self).eval(p)
    }

    fn domain(&self) -> &MetricDomain {
        (**self).domain()
    }
}

/// A real function known on a finite set of anchor points, optionally with
/// a per-anchor Lipschitz constant.
#[derive(Clone)]
pub struct AnchoredFunction {
    domain: Arc<MetricDomain>,
    anchors: Vec<Point>,
    values: Vec<f64>,
    constants: Option<Vec<f64>>,
    index: HashMap<PointKey, usize>,
}

impl fmt::Debug for AnchoredFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnchoredFunction")
            .field("anchors", &self.anchors)
            .field("values", &self.values)
            .field("constants", &self.constants)
            .finish()
    }
}

impl AnchoredFunction {
    /// Anchors must be nonempty, valid for `domain` and pairwise distinct;
    /// values must be finite.
    pub fn new(domain: Arc<MetricDomain>, anchors: Vec<Point>, values: Vec<f64>) -> Result<Self> {
        if anchors.is_empty() {
            return Err(LipError::arg("anchored function needs at least one anchor"));
        }
        if anchors.len() != values.len() {
            return Err(LipError::arg(format!(
                "{} anchors but {} values",
                anchors.len(),
                values.len()
            )));
        }
        for p in &anchors {
            domain.check_point(p)?;
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LipError::arg(format!("value at anchor {i} is not finite")));
        }
        let mut index = HashMap::with_capacity(anchors.len());
        for (i, p) in anchors.iter().enumerate() {
            if let Some(j) = index.insert(p.key(), i) {
                return Err(LipError::arg(format!("duplicate anchors {j} and {i} at {p}")));
            }
        }
        // Distinct coordinates can still be at distance zero only through
        // rounding; the explicit case is ruled out by matrix validation.
        Ok(Self {
            domain,
            anchors,
            values,
            constants: None,
            index,
        })
    }

    /// Anchors on the real line.
    pub fn on_line(xs: &[f64], values: &[f64]) -> Result<Self> {
        Self::new(
            Arc::new(MetricDomain::line()),
            xs.iter().copied().map(Point::scalar).collect(),
            values.to_vec(),
        )
    }

    /// Values at every point of an explicit domain, in index order.
    pub fn on_explicit(domain: Arc<MetricDomain>, values: Vec<f64>) -> Result<Self> {
        let points = domain
            .points()
            .ok_or_else(|| LipError::UnsupportedDomain("expected an explicit domain".into()))?;
        Self::new(domain, points, values)
    }

    pub fn with_constants(mut self, constants: Vec<f64>) -> Result<Self> {
        if constants.len() != self.anchors.len() {
            return Err(LipError::arg(format!(
                "{} constants for {} anchors",
                constants.len(),
                self.anchors.len()
            )));
        }
        if let Some(i) = constants.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(LipError::arg(format!(
                "constant at anchor {i} must be finite and nonnegative, got {}",
                constants[i]
            )));
        }
        self.constants = Some(constants);
        Ok(self)
    }

    /// Same anchors, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.domain.clone(), self.anchors.clone(), values)
    }

    /// Apply `f` to every value.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    /// Restriction to the anchors at `indices`.
    pub fn restrict(&self, indices: &[usize]) -> Result<Self> {
        let mut anchors = Vec::with_capacity(indices.len());
        let mut values = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.anchors.len() {
                return Err(LipError::arg(format!(
                    "anchor index {i} out of range for {} anchors",
                    self.anchors.len()
                )));
            }
            anchors.push(self.anchors[i].clone());
            values.push(self.values[i]);
        }
        let out = Self::new(self.domain.clone(), anchors, values)?;
        match &self.constants {
            Some(c) => out.with_constants(indices.iter().map(|&i| c[i]).collect()),
            None => Ok(out),
        }
    }

    pub fn shared_domain(&self) -> &Arc<MetricDomain> {
        &self.domain
    }

    pub fn anchors(&self) -> &[Point] {
        &self.anchors
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn constants(&self) -> Option<&[f64]> {
        self.constants.as_deref()
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    /// Position of `p` among the anchors.
    pub fn anchor_index(&self, p: &Point) -> Option<usize> {
        self.index.get(&p.key()).copied()
    }

    /// Value at `p` if `p` is an anchor.
    pub fn value_at(&self, p: &Point) -> Option<f64> {
        self.anchor_index(p).map(|i| self.values[i])
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest distance between two distinct anchors; `None` for a single anchor.
    pub fn min_separation(&self) -> Option<f64> {
        let n = self.anchors.len();
        let mut best: Option<f64> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.domain.dist(&self.anchors[i], &self.anchors[j]);
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
        }
        best
    }

    /// `d(p, A)` for the anchor set `A`.
    pub fn distance_to_anchors(&self, p: &Point) -> Result<f64> {
        self.domain.check_point(p)?;
        Ok(self.domain.dist_to_set(p, &self.anchors))
    }
}

impl Evaluable for AnchoredFunction {
    /// Defined only on the anchor set.
    fn eval(&self, p: &Point) -> Result<f64> {
        self.value_at(p)
            .ok_or_else(|| LipError::NotAnAnchor { point: p.to_string() })
    }

    fn domain(&self) -> &MetricDomain {
        &self.domain
    }
}

/// Closure-backed evaluator, used for closed-form reference functions.
pub struct FnEval<F> {
    domain: Arc<MetricDomain>,
    f: F,
}

impl<F> FnEval<F>
where
    F: Fn(&Point) -> f64 + Send + Sync,
{
    pub fn new(domain: Arc<MetricDomain>, f: F) -> Self {
        Self { domain, f }
    }
}

impl<F> Evaluable for FnEval<F>
where
    F: Fn(&Point) -> f64 + Send + Sync,
{
    fn eval(&self, p: &Point) -> Result<f64> {
        self.domain.check_point(p)?;
        Ok((self.f)(p))
    }

    fn domain(&self) -> &MetricDomain {
        &self.domain
    }
}
