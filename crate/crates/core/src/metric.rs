//! Metric domains, points and distances.
//!
//! A [`MetricDomain`] is either an explicit finite space given by a distance
//! matrix, or a Euclidean continuum `R^d`. Either kind can be composed with
//! the bounded transform `t -> t / (1 + t)`. All distances used anywhere in
//! the crate are obtained through this module.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LipError, Result};

/// Absolute tolerance used when validating metric axioms.
pub const METRIC_TOL: f64 = 1e-12;

/// A point of a [`MetricDomain`]. Serialized as a bare index or a
/// coordinate array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    /// Index into an explicit domain.
    Index(usize),
    /// Coordinates in a Euclidean domain.
    Coords(Vec<f64>),
}

impl Point {
    pub fn scalar(x: f64) -> Self {
        Point::Coords(vec![x])
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Coords(c) => Some(c),
            Point::Index(_) => None,
        }
    }

    /// First coordinate, or the index as a float for explicit points.
    /// Used for plotting along a single axis.
    pub fn abscissa(&self) -> f64 {
        match self {
            Point::Coords(c) => c.first().copied().unwrap_or(0.0),
            Point::Index(i) => *i as f64,
        }
    }

    /// Hashable identity of the point. `-0.0` and `0.0` map to the same key.
    pub(crate) fn key(&self) -> PointKey {
        match self {
            Point::Index(i) => PointKey::Index(*i),
            Point::Coords(c) => PointKey::Coords(c.iter().map(|x| (x + 0.0).to_bits()).collect()),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Index(i) => write!(f, "#{i}"),
            Point::Coords(c) => {
                write!(f, "(")?;
                for (i, x) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::scalar(x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum PointKey {
    Index(usize),
    Coords(Vec<u64>),
}

/// Post-processing applied to the base distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    #[default]
    Identity,
    /// `t / (1 + t)`: an equivalent metric with every distance below 1.
    Bounded,
}

impl Transform {
    #[inline]
    pub fn apply(self, t: f64) -> f64 {
        match self {
            Transform::Identity => t,
            Transform::Bounded => t / (1.0 + t),
        }
    }

    /// Every distance is strictly below this value.
    pub fn sup(self) -> f64 {
        match self {
            Transform::Identity => f64::INFINITY,
            Transform::Bounded => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    Explicit {
        labels: Vec<String>,
        matrix: Vec<Vec<f64>>,
    },
    Euclidean {
        dim: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricDomain {
    kind: DomainKind,
    transform: Transform,
}

impl MetricDomain {
    /// Explicit finite space. The matrix is validated against the metric
    /// axioms; any violation is returned as [`LipError::NotAMetric`].
    pub fn explicit(labels: Vec<String>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        if labels.len() != matrix.len() {
            return Err(LipError::arg(format!(
                "{} labels for a {}x{} matrix",
                labels.len(),
                matrix.len(),
                matrix.len()
            )));
        }
        if matrix.is_empty() {
            return Err(LipError::arg("explicit domain needs at least one point"));
        }
        let violations = validate_metric(&matrix)?;
        if !violations.is_empty() {
            return Err(LipError::NotAMetric(violations));
        }
        Ok(Self {
            kind: DomainKind::Explicit { labels, matrix },
            transform: Transform::Identity,
        })
    }

    /// Explicit space with labels `0..n`.
    pub fn from_matrix(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (0..matrix.len()).map(|i| i.to_string()).collect();
        Self::explicit(labels, matrix)
    }

    /// Explicit space made of points on the real line, `d(i, j) = |x_i - x_j|`.
    pub fn line_points(xs: &[f64]) -> Result<Self> {
        let matrix = xs
            .iter()
            .map(|a| xs.iter().map(|b| (a - b).abs()).collect())
            .collect();
        let labels = xs.iter().map(|x| x.to_string()).collect();
        Self::explicit(labels, matrix)
    }

    pub fn euclidean(dim: usize) -> Self {
        assert!(dim > 0, "euclidean dimension must be positive");
        Self {
            kind: DomainKind::Euclidean { dim },
            transform: Transform::Identity,
        }
    }

    /// The real line with the usual metric.
    pub fn line() -> Self {
        Self::euclidean(1)
    }

    pub fn with_transform(mut self, transform: Transform) -> Self {
        self.transform = transform;
        self
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn transform(&self) -> Transform {
        self.transform
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.kind, DomainKind::Explicit { .. })
    }

    /// Number of points of an explicit domain.
    pub fn len(&self) -> Option<usize> {
        match &self.kind {
            DomainKind::Explicit { matrix, .. } => Some(matrix.len()),
            DomainKind::Euclidean { .. } => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn dim(&self) -> Option<usize> {
        match self.kind {
            DomainKind::Euclidean { dim } => Some(dim),
            DomainKind::Explicit { .. } => None,
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        match &self.kind {
            DomainKind::Explicit { labels, .. } => Some(labels),
            DomainKind::Euclidean { .. } => None,
        }
    }

    /// All points of an explicit domain, in index order.
    pub fn points(&self) -> Option<Vec<Point>> {
        self.len().map(|n| (0..n).map(Point::Index).collect())
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        match (&self.kind, p) {
            (DomainKind::Explicit { matrix, .. }, Point::Index(i)) => {
                if *i < matrix.len() {
                    Ok(())
                } else {
                    Err(LipError::Domain(format!(
                        "index {i} out of bounds for a {}-point space",
                        matrix.len()
                    )))
                }
            }
            (DomainKind::Euclidean { dim }, Point::Coords(c)) => {
                if c.len() != *dim {
                    Err(LipError::Domain(format!(
                        "point {p} has {} coordinates, domain dimension is {dim}",
                        c.len()
                    )))
                } else if c.iter().any(|x| !x.is_finite()) {
                    Err(LipError::Domain(format!("point {p} has non-finite coordinates")))
                } else {
                    Ok(())
                }
            }
            (DomainKind::Explicit { .. }, Point::Coords(_)) => Err(LipError::Domain(format!(
                "coordinate point {p} given to an explicit domain"
            ))),
            (DomainKind::Euclidean { .. }, Point::Index(_)) => Err(LipError::Domain(format!(
                "index point {p} given to a euclidean domain"
            ))),
        }
    }

    /// Distance between two validated points.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.dist(p, q))
    }

    /// Distance without validation; callers guarantee both points belong
    /// to the domain.
    #[inline]
    pub(crate) fn dist(&self, p: &Point, q: &Point) -> f64 {
        let base = match (&self.kind, p, q) {
            (DomainKind::Explicit { matrix, .. }, Point::Index(i), Point::Index(j)) => matrix[*i][*j],
            (DomainKind::Euclidean { .. }, Point::Coords(a), Point::Coords(b)) => {
                if a.len() == 1 {
                    (a[0] - b[0]).abs()
                } else {
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt()
                }
            }
            _ => unreachable!("point kind checked on entry"),
        };
        self.transform.apply(base)
    }

    /// `d(p, S) = min_{s in S} d(p, s)`.
    pub fn distance_to_set(&self, p: &Point, set: &[Point]) -> Result<f64> {
        if set.is_empty() {
            return Err(LipError::arg("distance to an empty set"));
        }
        self.check_point(p)?;
        for s in set {
            self.check_point(s)?;
        }
        Ok(self.dist_to_set(p, set))
    }

    /// Unchecked `d(p, S)`; `+inf` for an empty set.
    pub(crate) fn dist_to_set(&self, p: &Point, set: &[Point]) -> f64 {
        set.iter()
            .map(|s| self.dist(p, s))
            .fold(f64::INFINITY, f64::min)
    }
}

/// An open ball `O(center, radius)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(LipError::arg(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, domain: &MetricDomain, p: &Point) -> bool {
        domain.dist(&self.center, p) < self.radius
    }
}

/// A failed metric axiom, with the offending indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NotFinite { i: usize, j: usize },
    Negative { i: usize, j: usize },
    NonZeroDiagonal { i: usize },
    /// Distinct points at distance zero.
    ZeroDistance { i: usize, j: usize },
    Asymmetry { i: usize, j: usize },
    /// `d(i, k) > d(i, j) + d(j, k)`.
    Triangle { i: usize, j: usize, k: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotFinite { i, j } => write!(f, "non-finite entry at ({i},{j})"),
            Violation::Negative { i, j } => write!(f, "negative entry at ({i},{j})"),
            Violation::NonZeroDiagonal { i } => write!(f, "non-zero diagonal at ({i},{i})"),
            Violation::ZeroDistance { i, j } => write!(f, "zero distance between distinct points ({i},{j})"),
            Violation::Asymmetry { i, j } => write!(f, "asymmetry at ({i},{j})"),
            Violation::Triangle { i, j, k } => write!(f, "triangle inequality fails for ({i},{j},{k})"),
        }
    }
}

/// Check the metric axioms on a square matrix with tolerance [`METRIC_TOL`].
///
/// Returns every violation found, in scan order. Triangle triples are
/// reported as `(i, j, k)` with `i < k`, meaning `d(i,k) > d(i,j) + d(j,k)`.
pub fn validate_metric(matrix: &[Vec<f64>]) -> Result<Vec<Violation>> {
    let n = matrix.len();
    if let Some(row) = matrix.iter().position(|r| r.len() != n) {
        return Err(LipError::arg(format!(
            "matrix is not square: row {row} has {} entries, expected {n}",
            matrix[row].len()
        )));
    }
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = matrix[i][j];
            if !v.is_finite() {
                out.push(Violation::NotFinite { i, j });
            } else if v < -METRIC_TOL {
                out.push(Violation::Negative { i, j });
            }
        }
    }
    if !out.is_empty() {
        return Ok(out);
    }
    for i in 0..n {
        if matrix[i][i].abs() > METRIC_TOL {
            out.push(Violation::NonZeroDiagonal { i });
        }
        for j in (i + 1)..n {
            if (matrix[i][j] - matrix[j][i]).abs() > METRIC_TOL {
                out.push(Violation::Asymmetry { i, j });
            }
            if matrix[i][j] <= METRIC_TOL || matrix[j][i] <= METRIC_TOL {
                out.push(Violation::ZeroDistance { i, j });
            }
        }
    }
    for i in 0..n {
        for k in (i + 1)..n {
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                if matrix[i][k] > matrix[i][j] + matrix[j][k] + METRIC_TOL {
                    out.push(Violation::Triangle { i, j, k });
                }
            }
        }
    }
    Ok(out)
}
