//! Partition-of-unity blending and the locally Lipschitz extension
//! pipelines built on it.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::error::{LipError, Result};
use crate::extension::{decompress_one, ExtensionMode, ExtensionSpec, LambdaPolicy};
use crate::function::{AnchoredFunction, Evaluable, SharedFn};
use crate::metric::{Ball, MetricDomain, Point};
use crate::partition::{build_partition, Cover, CoverSet, PartitionOfUnity, PartitionTerms};
use crate::verify;

/// `sum_n xi_n * v_n` over the active indices. When every active value is
/// the same the common value is returned as is.
pub fn combine(xi: &[f64], active: &[(usize, f64)]) -> f64 {
    match active.first() {
        None => 0.0,
        Some(&(_, first)) if active.iter().all(|&(_, v)| v == first) => first,
        _ => active.iter().map(|&(i, v)| xi[i] * v).sum(),
    }
}

/// Blend value and the pieces that contributed to it.
#[derive(Debug, Clone, PartialEq)]
pub struct BlendValue {
    pub value: f64,
    pub active: Vec<usize>,
    pub terms: PartitionTerms,
}

#[derive(Clone)]
pub struct BlendSpec {
    partition: Arc<PartitionOfUnity>,
    pieces: Vec<SharedFn>,
}

impl BlendSpec {
    pub fn new(partition: Arc<PartitionOfUnity>, pieces: Vec<SharedFn>) -> Result<Self> {
        if pieces.len() != partition.len() {
            return Err(LipError::arg(format!(
                "{} pieces for a partition of {} members",
                pieces.len(),
                partition.len()
            )));
        }
        Ok(Self { partition, pieces })
    }

    pub fn partition(&self) -> &Arc<PartitionOfUnity> {
        &self.partition
    }

    pub fn pieces(&self) -> &[SharedFn] {
        &self.pieces
    }

    /// Only pieces with `xi_n(p) > 0` are evaluated.
    pub fn eval_detailed(&self, p: &Point) -> Result<BlendValue> {
        let terms = self.partition.terms(p)?;
        let mut values = Vec::new();
        for i in terms.active() {
            values.push((i, self.pieces[i].eval(p)?));
        }
        Ok(BlendValue {
            value: combine(&terms.xi, &values),
            active: values.iter().map(|&(i, _)| i).collect(),
            terms,
        })
    }
}

impl Evaluable for BlendSpec {
    fn eval(&self, p: &Point) -> Result<f64> {
        self.eval_detailed(p).map(|b| b.value)
    }

    fn domain(&self) -> &MetricDomain {
        self.partition.cover().domain()
    }
}

pub fn blend_eval(spec: &BlendSpec, p: &Point) -> Result<f64> {
    spec.eval(p)
}

/// Open cover of the space with `O_n ∩ A = U_n`: each anchor of `U_n` gets
/// a ball of radius `d(a, A \ U_n) / 2`. A subset holding every anchor
/// becomes the whole space.
pub fn inflate_subdomain_cover(source: &AnchoredFunction, subsets: &[Vec<usize>]) -> Result<Cover> {
    check_subsets(source, subsets)?;
    let domain = source.domain();
    let pts = source.anchors();
    let mut sets = Vec::with_capacity(subsets.len());
    for u in subsets {
        let rest: Vec<Point> = (0..pts.len())
            .filter(|i| !u.contains(i))
            .map(|i| pts[i].clone())
            .collect();
        if rest.is_empty() {
            sets.push(CoverSet::Whole);
            continue;
        }
        let balls = u
            .iter()
            .map(|&i| Ball::new(pts[i].clone(), domain.dist_to_set(&pts[i], &rest) / 2.0))
            .collect::<Result<Vec<_>>>()?;
        sets.push(CoverSet::BallUnion(balls));
    }
    Cover::new(source.shared_domain().clone(), sets, None)
}

fn check_subsets(source: &AnchoredFunction, subsets: &[Vec<usize>]) -> Result<()> {
    if subsets.is_empty() {
        return Err(LipError::arg("subdomain cover has no sets"));
    }
    let mut seen = vec![false; source.len()];
    for (n, u) in subsets.iter().enumerate() {
        if u.is_empty() {
            return Err(LipError::arg(format!("subdomain set {n} is empty")));
        }
        for &i in u {
            if i >= source.len() {
                return Err(LipError::arg(format!("subdomain set {n}: anchor {i} out of range")));
            }
            seen[i] = true;
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(LipError::Uncovered {
            point: source.anchors()[i].to_string(),
        });
    }
    Ok(())
}

/// Blend of per-piece McShane–Whitney extensions.
///
/// Piece `n` is the maximal extension `Phi_+` of `phi` restricted to
/// `U_n`, with `lambda_n` the exact pairwise constant on `U_n`.
#[derive(Clone)]
pub struct LocalExtension {
    source: AnchoredFunction,
    blend: BlendSpec,
}

impl LocalExtension {
    pub fn new(source: &AnchoredFunction, subsets: &[Vec<usize>], full_cover: Option<Cover>) -> Result<Self> {
        check_subsets(source, subsets)?;
        let cover = match full_cover {
            Some(c) => c,
            None => inflate_subdomain_cover(source, subsets)?,
        };
        if cover.len() != subsets.len() {
            return Err(LipError::arg(format!(
                "full cover has {} sets for {} subdomain sets",
                cover.len(),
                subsets.len()
            )));
        }
        for (n, u) in subsets.iter().enumerate() {
            for (i, a) in source.anchors().iter().enumerate() {
                if cover.contains(n, a)? != u.contains(&i) {
                    return Err(LipError::arg(format!(
                        "full cover set {n} must meet the anchors exactly in subdomain set {n}; anchor {i} disagrees"
                    )));
                }
            }
        }
        let mut pieces: Vec<SharedFn> = Vec::with_capacity(subsets.len());
        for (n, u) in subsets.iter().enumerate() {
            let part = source.restrict(u)?;
            let spec = ExtensionSpec::new(part, ExtensionMode::Maximal, LambdaPolicy::Auto, None)
                .map_err(|e| e.in_piece(n))?;
            pieces.push(Arc::new(spec));
        }
        let cover = cover.with_samples(source.anchors())?;
        let partition = Arc::new(build_partition(cover)?);
        Ok(Self {
            source: source.clone(),
            blend: BlendSpec::new(partition, pieces)?,
        })
    }

    pub fn blend(&self) -> &BlendSpec {
        &self.blend
    }

    pub fn source(&self) -> &AnchoredFunction {
        &self.source
    }
}

impl Evaluable for LocalExtension {
    fn eval(&self, p: &Point) -> Result<f64> {
        self.blend.eval(p)
    }

    fn domain(&self) -> &MetricDomain {
        self.source.domain()
    }
}

pub fn extend_locally_lipschitz(
    source: &AnchoredFunction,
    subsets: &[Vec<usize>],
    full_cover: Option<Cover>,
) -> Result<LocalExtension> {
    LocalExtension::new(source, subsets, full_cover)
}

/// `d_c / (d_A + d_c)` with `d_c = +inf` meaning the open set is the whole
/// space.
pub(crate) fn clamp_value(d_anchor: f64, d_complement: f64, p: &Point) -> Result<f64> {
    if d_complement == f64::INFINITY || d_anchor == 0.0 {
        if d_complement == 0.0 {
            return Err(LipError::Inconsistent { point: p.to_string() });
        }
        return Ok(1.0);
    }
    Ok(d_complement / (d_anchor + d_complement))
}

/// `eta(p) = d(p, X \ U) / (d(p, A) + d(p, X \ U))` for the set at position
/// `set` of `cover`; 1 on `A`, 0 off `U`, 1 everywhere if `U` is the space.
pub fn clamp_function(cover: &Cover, set: usize, anchors: &[Point], p: &Point) -> Result<f64> {
    if anchors.is_empty() {
        return Err(LipError::arg("clamp needs a nonempty anchor set"));
    }
    let d_c = cover.complement_distance(set, p)?;
    let d_a = cover.domain().distance_to_set(p, anchors)?;
    clamp_value(d_a, d_c, p)
}

/// `eta * Psi` with `Psi` a [`LocalExtension`] and `U = {|Psi| < M}`.
/// The complement of `U` is sampled at `probes` on continua.
#[derive(Clone)]
pub struct RangeBoundedExtension {
    psi: LocalExtension,
    bound: f64,
    outside: Vec<Point>,
}

impl RangeBoundedExtension {
    pub fn new(
        source: &AnchoredFunction,
        subsets: &[Vec<usize>],
        full_cover: Option<Cover>,
        bound: f64,
        probes: &[Point],
    ) -> Result<Self> {
        if !(bound > 0.0) {
            return Err(LipError::arg(format!("bound M must be positive, got {bound}")));
        }
        if let Some(i) = source.values().iter().position(|v| !(v.abs() < bound)) {
            return Err(LipError::arg(format!(
                "|phi| < M fails at anchor {i}: |{}| >= {bound}",
                source.values()[i]
            )));
        }
        let psi = LocalExtension::new(source, subsets, full_cover)?;
        let domain = source.domain();
        let probes = domain.points().unwrap_or_else(|| probes.to_vec());
        let mut outside = Vec::new();
        for q in probes {
            domain.check_point(&q)?;
            if !(psi.eval(&q)?.abs() < bound) {
                outside.push(q);
            }
        }
        Ok(Self { psi, bound, outside })
    }

    pub fn psi(&self) -> &LocalExtension {
        &self.psi
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }
}

impl Evaluable for RangeBoundedExtension {
    fn eval(&self, p: &Point) -> Result<f64> {
        let v = self.psi.eval(p)?;
        if !(v.abs() < self.bound) {
            return Ok(0.0);
        }
        let domain = self.psi.domain();
        let d_a = domain.dist_to_set(p, self.psi.source.anchors());
        let d_c = domain.dist_to_set(p, &self.outside);
        let eta = clamp_value(d_a, d_c, p)?;
        if eta == 1.0 {
            return Ok(v);
        }
        Ok(eta * v)
    }

    fn domain(&self) -> &MetricDomain {
        self.psi.domain()
    }
}

pub fn extend_range_bounded(
    source: &AnchoredFunction,
    subsets: &[Vec<usize>],
    full_cover: Option<Cover>,
    bound: f64,
    probes: &[Point],
) -> Result<RangeBoundedExtension> {
    RangeBoundedExtension::new(source, subsets, full_cover, bound, probes)
}

/// Locally Lipschitz extension of arbitrary real data:
/// `tan(extend_range_bounded(arctan(phi), M = pi/2))`.
#[derive(Clone)]
pub struct FullExtension {
    inner: RangeBoundedExtension,
}

impl FullExtension {
    pub fn new(
        source: &AnchoredFunction,
        subsets: &[Vec<usize>],
        full_cover: Option<Cover>,
        probes: &[Point],
    ) -> Result<Self> {
        let compressed = source.map_values(f64::atan)?;
        let inner = RangeBoundedExtension::new(&compressed, subsets, full_cover, FRAC_PI_2, probes)?;
        Ok(Self { inner })
    }

    pub fn compressed(&self) -> &RangeBoundedExtension {
        &self.inner
    }
}

impl Evaluable for FullExtension {
    fn eval(&self, p: &Point) -> Result<f64> {
        decompress_one(self.inner.eval(p)?)
    }

    fn domain(&self) -> &MetricDomain {
        self.inner.domain()
    }
}

/// Measured moduli around one point, reported without a pass/fail claim.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCertificate {
    pub blend_modulus: f64,
    /// Largest measured modulus among active partition members and pieces.
    pub ingredient_modulus: f64,
    pub active: usize,
    pub max_abs_piece: f64,
    /// `C * (1 + active) * (1 + max |piece|)`.
    pub reference_bound: f64,
}

/// Measure the blend and its active ingredients on the samples within
/// `radius` of `center`.
pub fn local_certificate(spec: &BlendSpec, center: &Point, radius: f64, samples: &[Point]) -> Result<LocalCertificate> {
    let domain = spec.domain();
    let mut local: Vec<Point> = vec![center.clone()];
    for q in samples {
        if domain.distance(center, q)? < radius && q != center {
            local.push(q.clone());
        }
    }
    let mut active: Vec<usize> = Vec::new();
    for q in &local {
        for i in spec.partition.terms(q)?.active() {
            if !active.contains(&i) {
                active.push(i);
            }
        }
    }
    active.sort_unstable();
    if local.len() < 2 {
        return Ok(LocalCertificate {
            blend_modulus: 0.0,
            ingredient_modulus: 0.0,
            active: active.len(),
            max_abs_piece: 0.0,
            reference_bound: 0.0,
        });
    }
    let blend_modulus = verify::empirical_lip(spec, &local, None)?.constant;
    let mut ingredient: f64 = 0.0;
    let mut max_abs: f64 = 0.0;
    for &i in &active {
        let member = spec.partition.member(i)?;
        ingredient = ingredient.max(verify::empirical_lip(&member, &local, None)?.constant);
        ingredient = ingredient.max(verify::empirical_lip(&spec.pieces[i], &local, None)?.constant);
        for q in &local {
            max_abs = max_abs.max(spec.pieces[i].eval(q)?.abs());
        }
    }
    Ok(LocalCertificate {
        blend_modulus,
        ingredient_modulus: ingredient,
        active: active.len(),
        max_abs_piece: max_abs,
        reference_bound: ingredient * (1.0 + active.len() as f64) * (1.0 + max_abs),
    })
}
