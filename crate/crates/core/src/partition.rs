//! Finite covers and their locally Lipschitz partitions of unity.
//!
//! For a cover `O_1, ..., O_m` (0-based position `i` carries weight
//! `2^-(i+1)`):
//!
//! ```text
//! eta_i   = min(d(x, X \ O_i), 2^-(i+1))
//! eta     = sum_i eta_i / 2^(i+1)
//! gamma_i = max(eta_i - eta / 2, 0)
//! xi_i    = gamma_i / sum_j gamma_j
//! ```
//!
//! On explicit domains `d(x, X \ O_i)` is exact. On continua a ball uses
//! the margin `max(r - d(x, c), 0)` and sets defined through sampled data
//! measure the distance to the sampled points lying outside the set.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{LipError, Result};
use crate::function::{AnchoredFunction, Evaluable};
use crate::metric::{Ball, MetricDomain, Point};

/// Above this many sets the weights `4^-(i+1)` leave the normal `f64` range.
pub const MAX_SETS: usize = 500;

type Predicate = dyn Fn(&Point) -> Result<bool> + Send + Sync;

/// An open set given by a membership test, with the complement known
/// through a finite probe sample (all points on an explicit domain).
#[derive(Clone)]
pub struct LevelSet {
    label: String,
    test: Arc<Predicate>,
    outside: Vec<Point>,
}

impl fmt::Debug for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevelSet")
            .field("label", &self.label)
            .field("outside", &self.outside.len())
            .finish()
    }
}

impl LevelSet {
    pub fn new<F>(domain: &MetricDomain, label: impl Into<String>, probes: &[Point], test: F) -> Result<Self>
    where
        F: Fn(&Point) -> Result<bool> + Send + Sync + 'static,
    {
        let probes = domain.points().unwrap_or_else(|| probes.to_vec());
        let mut outside = Vec::new();
        for p in probes {
            domain.check_point(&p)?;
            if !test(&p)? {
                outside.push(p);
            }
        }
        Ok(Self {
            label: label.into(),
            test: Arc::new(test),
            outside,
        })
    }

    pub fn contains(&self, p: &Point) -> Result<bool> {
        (self.test)(p)
    }

    /// Sampled complement.
    pub fn outside(&self) -> &[Point] {
        &self.outside
    }
}

#[derive(Debug, Clone)]
pub enum CoverSet {
    Ball(Ball),
    BallUnion(Vec<Ball>),
    /// Explicit domains only: the listed point indices.
    Subset(Vec<usize>),
    /// `{ carrier > -threshold }`.
    Sublevel { threshold: f64 },
    /// `{ |carrier - center| < radius }`.
    Preimage { center: f64, radius: f64 },
    Whole,
    Level(LevelSet),
}

impl CoverSet {
    fn needs_carrier(&self) -> bool {
        matches!(self, CoverSet::Sublevel { .. } | CoverSet::Preimage { .. })
    }
}

#[derive(Debug, Clone)]
pub struct Cover {
    domain: Arc<MetricDomain>,
    sets: Vec<CoverSet>,
    carrier: Option<AnchoredFunction>,
    /// Complement sample per set, `None` where a closed-form margin is used.
    outside: Vec<Option<Vec<Point>>>,
    subsets: Vec<Option<HashSet<usize>>>,
    samples: Vec<Point>,
}

impl Cover {
    pub fn new(domain: Arc<MetricDomain>, sets: Vec<CoverSet>, carrier: Option<AnchoredFunction>) -> Result<Self> {
        if sets.is_empty() {
            return Err(LipError::arg("a cover needs at least one set"));
        }
        if sets.len() > MAX_SETS {
            return Err(LipError::arg(format!(
                "{} sets exceed the supported maximum of {MAX_SETS}",
                sets.len()
            )));
        }
        if let Some(c) = &carrier {
            if c.domain() != domain.as_ref() {
                return Err(LipError::arg("carrier lives on a different domain"));
            }
        }
        let mut subsets = Vec::with_capacity(sets.len());
        for (i, s) in sets.iter().enumerate() {
            if s.needs_carrier() && carrier.is_none() {
                return Err(LipError::arg(format!("set {i} is defined through a carrier function, none given")));
            }
            match s {
                CoverSet::Ball(b) => {
                    domain.check_point(&b.center)?;
                    Ball::new(b.center.clone(), b.radius)?;
                }
                CoverSet::BallUnion(bs) => {
                    for b in bs {
                        domain.check_point(&b.center)?;
                        Ball::new(b.center.clone(), b.radius)?;
                    }
                }
                CoverSet::Subset(ix) => {
                    if !domain.is_explicit() {
                        return Err(LipError::UnsupportedDomain(format!(
                            "set {i}: index subsets need an explicit domain"
                        )));
                    }
                    for &k in ix {
                        domain.check_point(&Point::Index(k))?;
                    }
                }
                CoverSet::Preimage { radius, .. } if !(*radius > 0.0) => {
                    return Err(LipError::arg(format!("set {i}: preimage radius must be positive")));
                }
                _ => {}
            }
            subsets.push(match s {
                CoverSet::Subset(ix) => Some(ix.iter().copied().collect()),
                _ => None,
            });
        }
        let samples = match (domain.points(), &carrier) {
            (Some(all), _) => all,
            (None, Some(c)) => c.anchors().to_vec(),
            (None, None) => Vec::new(),
        };
        let mut cover = Self {
            domain,
            sets,
            carrier,
            outside: Vec::new(),
            subsets,
            samples,
        };
        cover.outside = (0..cover.sets.len()).map(|i| cover.sample_complement(i)).collect();
        Ok(cover)
    }

    /// Add points at which the cover property is validated.
    pub fn with_samples(mut self, samples: &[Point]) -> Result<Self> {
        for p in samples {
            self.domain.check_point(p)?;
        }
        self.samples.extend_from_slice(samples);
        Ok(self)
    }

    fn sample_complement(&self, i: usize) -> Option<Vec<Point>> {
        let explicit = self.domain.is_explicit();
        match &self.sets[i] {
            CoverSet::Level(l) => Some(l.outside.clone()),
            CoverSet::Whole => None,
            CoverSet::Ball(_) | CoverSet::BallUnion(_) if !explicit => None,
            _ => {
                let probes = match self.domain.points() {
                    Some(all) => all,
                    None => self.carrier.as_ref().map(|c| c.anchors().to_vec()).unwrap_or_default(),
                };
                Some(
                    probes
                        .into_iter()
                        .filter(|p| {
                            let cv = self.carrier_value(p);
                            !self.member(i, p, cv).unwrap_or(false)
                        })
                        .collect(),
                )
            }
        }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[CoverSet] {
        &self.sets
    }

    pub fn domain(&self) -> &MetricDomain {
        &self.domain
    }

    pub fn shared_domain(&self) -> &Arc<MetricDomain> {
        &self.domain
    }

    pub fn samples(&self) -> &[Point] {
        &self.samples
    }

    pub fn carrier(&self) -> Option<&AnchoredFunction> {
        self.carrier.as_ref()
    }

    fn carrier_value(&self, p: &Point) -> Option<f64> {
        self.carrier.as_ref().and_then(|c| c.value_at(p))
    }

    fn member(&self, i: usize, p: &Point, carrier: Option<f64>) -> Result<bool> {
        Ok(match &self.sets[i] {
            CoverSet::Ball(b) => b.contains(&self.domain, p),
            CoverSet::BallUnion(bs) => bs.iter().any(|b| b.contains(&self.domain, p)),
            CoverSet::Subset(_) => match p {
                Point::Index(k) => self.subsets[i].as_ref().is_some_and(|s| s.contains(k)),
                Point::Coords(_) => false,
            },
            CoverSet::Sublevel { threshold } => carrier.is_some_and(|v| v > -threshold),
            CoverSet::Preimage { center, radius } => carrier.is_some_and(|v| (v - center).abs() < *radius),
            CoverSet::Whole => true,
            CoverSet::Level(l) => l.contains(p)?,
        })
    }

    pub fn contains(&self, i: usize, p: &Point) -> Result<bool> {
        self.check_index(i)?;
        self.domain.check_point(p)?;
        self.member(i, p, self.carrier_value(p))
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.sets.len() {
            Ok(())
        } else {
            Err(LipError::arg(format!(
                "set index {i} out of range for a cover of {} sets",
                self.sets.len()
            )))
        }
    }

    /// Uncapped margin `m_i(p)`: distance to the complement (or its
    /// surrogate), zero off the set, `+inf` when the complement is empty.
    fn margin_raw(&self, i: usize, p: &Point, carrier: Option<f64>) -> Result<f64> {
        if !self.member(i, p, carrier)? {
            return Ok(0.0);
        }
        if let Some(outside) = &self.outside[i] {
            return Ok(self.domain.dist_to_set(p, outside));
        }
        Ok(match &self.sets[i] {
            CoverSet::Ball(b) => ball_margin(&self.domain, b, p),
            CoverSet::BallUnion(bs) => bs
                .iter()
                .map(|b| ball_margin(&self.domain, b, p))
                .fold(0.0, f64::max),
            _ => f64::INFINITY,
        })
    }

    /// `d(p, X \ O_i)` as used by the clamp function.
    pub fn complement_distance(&self, i: usize, p: &Point) -> Result<f64> {
        self.check_index(i)?;
        self.domain.check_point(p)?;
        self.margin_raw(i, p, self.carrier_value(p))
    }

    /// Whether set `i` is provably the whole space.
    pub fn is_whole(&self, i: usize) -> bool {
        let sup = self.domain.transform().sup();
        match &self.sets[i] {
            CoverSet::Whole => true,
            CoverSet::Ball(b) if !self.domain.is_explicit() => b.radius >= sup,
            CoverSet::BallUnion(bs) if !self.domain.is_explicit() => bs.iter().any(|b| b.radius >= sup),
            _ => self.domain.is_explicit() && self.outside[i].as_ref().is_some_and(|o| o.is_empty()),
        }
    }

    /// First sample lying in no set.
    pub fn uncovered_sample(&self) -> Result<Option<Point>> {
        for p in &self.samples {
            let cv = self.carrier_value(p);
            let mut hit = false;
            for i in 0..self.sets.len() {
                if self.member(i, p, cv)? {
                    hit = true;
                    break;
                }
            }
            if !hit {
                return Ok(Some(p.clone()));
            }
        }
        Ok(None)
    }
}

fn ball_margin(domain: &MetricDomain, b: &Ball, p: &Point) -> f64 {
    (b.radius - domain.dist(&b.center, p)).max(0.0)
}

#[inline]
fn weight(i: usize) -> f64 {
    0.5f64.powi(i as i32 + 1)
}

/// `min(m_i(p), 2^-(i+1))` for the set at 0-based position `i`.
pub fn membership_margin(cover: &Cover, i: usize, p: &Point) -> Result<f64> {
    cover.check_index(i)?;
    cover.domain.check_point(p)?;
    Ok(cover.margin_raw(i, p, cover.carrier_value(p))?.min(weight(i)))
}

/// All intermediate quantities of the construction at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTerms {
    pub eta_n: Vec<f64>,
    pub eta: f64,
    pub gamma: Vec<f64>,
    pub xi: Vec<f64>,
}

impl PartitionTerms {
    /// Indices with `xi > 0`, ascending.
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.xi.iter().enumerate().filter(|(_, &x)| x > 0.0).map(|(i, _)| i)
    }
}

#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    cover: Cover,
    trivial: Option<usize>,
}

/// Validate the cover on its samples and build the partition. If some set
/// is the whole space, the first such set gets `xi = 1` everywhere.
pub fn build_partition(cover: Cover) -> Result<PartitionOfUnity> {
    if let Some(p) = cover.uncovered_sample()? {
        return Err(LipError::Uncovered { point: p.to_string() });
    }
    let trivial = (0..cover.len()).find(|&i| cover.is_whole(i));
    Ok(PartitionOfUnity { cover, trivial })
}

impl PartitionOfUnity {
    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn len(&self) -> usize {
        self.cover.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cover.is_empty()
    }

    /// Index of the whole-space set when the trivial partition is used.
    pub fn trivial_index(&self) -> Option<usize> {
        self.trivial
    }

    pub fn terms(&self, p: &Point) -> Result<PartitionTerms> {
        let cover = &self.cover;
        cover.domain.check_point(p)?;
        let cv = cover.carrier_value(p);
        let m = cover.len();
        let mut eta_n = Vec::with_capacity(m);
        for i in 0..m {
            eta_n.push(cover.margin_raw(i, p, cv)?.min(weight(i)));
        }
        let eta: f64 = eta_n.iter().enumerate().map(|(i, e)| e * weight(i)).sum();
        if !(eta > 0.0) {
            return Err(LipError::Uncovered { point: p.to_string() });
        }
        let gamma: Vec<f64> = eta_n.iter().map(|e| (e - 0.5 * eta).max(0.0)).collect();
        let xi = match self.trivial {
            Some(t) => (0..m).map(|i| if i == t { 1.0 } else { 0.0 }).collect(),
            None => {
                let total: f64 = gamma.iter().sum();
                gamma.iter().map(|g| g / total).collect()
            }
        };
        Ok(PartitionTerms { eta_n, eta, gamma, xi })
    }

    pub fn xi(&self, i: usize, p: &Point) -> Result<f64> {
        self.cover.check_index(i)?;
        Ok(self.terms(p)?.xi[i])
    }

    /// Least `k >= 1` with `eta(p) > 2^-k`; every set at position `>= k`
    /// (1-based index `> k`) has `gamma = 0` at `p`.
    pub fn vanish_index(&self, p: &Point) -> Result<usize> {
        Ok(vanish_index_of(self.terms(p)?.eta))
    }

    /// The `i`-th partition member as a standalone evaluator.
    pub fn member(self: &Arc<Self>, i: usize) -> Result<PartitionMember> {
        self.cover.check_index(i)?;
        Ok(PartitionMember {
            partition: self.clone(),
            index: i,
        })
    }
}

/// Least `k >= 1` with `eta > 2^-k`.
pub fn vanish_index_of(eta: f64) -> usize {
    let mut k = 1;
    while !(eta > 0.5f64.powi(k as i32)) && k < 1100 {
        k += 1;
    }
    k
}

/// `vanish_index` as a free function.
pub fn vanish_index(partition: &PartitionOfUnity, p: &Point) -> Result<usize> {
    partition.vanish_index(p)
}

/// One `xi_i` as an [`Evaluable`].
#[derive(Debug, Clone)]
pub struct PartitionMember {
    partition: Arc<PartitionOfUnity>,
    index: usize,
}

impl Evaluable for PartitionMember {
    fn eval(&self, p: &Point) -> Result<f64> {
        Ok(self.partition.terms(p)?.xi[self.index])
    }

    fn domain(&self) -> &MetricDomain {
        self.partition.cover.domain()
    }
}

/// Default locality radius per anchor: half the distance to the nearest
/// other anchor (1 for a lone anchor).
pub fn default_radii(source: &AnchoredFunction) -> Vec<f64> {
    let domain = source.domain();
    let pts = source.anchors();
    (0..pts.len())
        .map(|i| {
            let d = pts
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| domain.dist(&pts[i], q))
                .fold(f64::INFINITY, f64::min);
            if d.is_finite() {
                d / 2.0
            } else {
                1.0
            }
        })
        .collect()
}

/// `U_n = union { O(a, delta_a) : K_a <= n }` for `n = 1..=levels`.
/// A level may be empty.
pub fn increasing_lipschitz_cover(
    source: &AnchoredFunction,
    constants: &[f64],
    radii: &[f64],
    levels: usize,
) -> Result<Vec<Vec<Ball>>> {
    if constants.len() != source.len() || radii.len() != source.len() {
        return Err(LipError::arg(format!(
            "need one constant and one radius per anchor ({}), got {} and {}",
            source.len(),
            constants.len(),
            radii.len()
        )));
    }
    (1..=levels)
        .map(|n| {
            source
                .anchors()
                .iter()
                .zip(constants.iter().zip(radii))
                .filter(|(_, (k, _))| **k <= n as f64)
                .map(|(a, (_, r))| Ball::new(a.clone(), *r))
                .collect()
        })
        .collect()
}

/// Largest pairwise slope among anchors lying in the union of `balls`.
pub fn slope_within(source: &AnchoredFunction, balls: &[Ball]) -> f64 {
    let domain = source.domain();
    let inside: Vec<usize> = (0..source.len())
        .filter(|&i| balls.iter().any(|b| b.contains(domain, &source.anchors()[i])))
        .collect();
    let (pts, vals) = (source.anchors(), source.values());
    let mut best = 0.0f64;
    for (x, &i) in inside.iter().enumerate() {
        for &j in &inside[x + 1..] {
            best = best.max((vals[i] - vals[j]).abs() / domain.dist(&pts[i], &pts[j]));
        }
    }
    best
}
