//! Locally Lipschitz approximation: monotone sequences, uniform and
//! variable-tolerance approximation, insertion between two functions and
//! the windowed small-scale envelope.
//!
//! Data-defined cover sets (`{|phi - r| < eps}`, `{tol > 1/n}`, ...) are
//! known only at the sample points carried by the source, so on a
//! continuum the approximants are evaluable at those samples.

use std::sync::Arc;

use crate::blend::{clamp_value, combine, BlendSpec};
use crate::envelope::{convergence_index, EnvelopeSpec};
use crate::error::{LipError, Result};
use crate::extension::{ExtensionMode, ExtensionSpec, LambdaPolicy};
use crate::function::{AnchoredFunction, Evaluable, SharedFn};
use crate::metric::{MetricDomain, Point};
use crate::partition::{build_partition, Cover, CoverSet, LevelSet, PartitionOfUnity};

/// Finite list of levels with consecutive gaps at most `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelGrid {
    levels: Vec<f64>,
    epsilon: f64,
}

impl LevelGrid {
    pub fn new(levels: Vec<f64>, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(LipError::arg(format!("grid epsilon must be positive and finite, got {epsilon}")));
        }
        if levels.is_empty() {
            return Err(LipError::arg("grid needs at least one level"));
        }
        if levels.iter().any(|l| !l.is_finite()) {
            return Err(LipError::arg("grid levels must be finite"));
        }
        for w in levels.windows(2) {
            if !(w[0] < w[1]) {
                return Err(LipError::arg(format!("grid levels must increase, found {} then {}", w[0], w[1])));
            }
            if w[1] - w[0] > epsilon * (1.0 + 1e-12) {
                return Err(LipError::arg(format!(
                    "grid gap {} between {} and {} exceeds epsilon {epsilon}",
                    w[1] - w[0],
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(Self { levels, epsilon })
    }

    /// Levels `start, start + step, ...` up to the first one `>= end`.
    pub fn regular(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && start.is_finite() && end.is_finite()) {
            return Err(LipError::arg(format!("bad grid range [{start}, {end}] with step {step}")));
        }
        let m = ((end - start) / step).ceil().max(0.0) as usize;
        Self::new((0..=m).map(|i| start + i as f64 * step).collect(), step)
    }

    /// Spacing `epsilon / 2` over `[min - epsilon, max + epsilon]`.
    pub fn covering(min: f64, max: f64, epsilon: f64) -> Result<Self> {
        Self::covering_with_spacing(min, max, epsilon, epsilon / 2.0)
    }

    pub fn covering_with_spacing(min: f64, max: f64, epsilon: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing <= epsilon) {
            return Err(LipError::arg(format!("spacing {spacing} must lie in (0, epsilon = {epsilon}]")));
        }
        let start = min - epsilon;
        let m = ((max + epsilon - start) / spacing).ceil().max(0.0) as usize;
        Self::new((0..=m).map(|i| start + i as f64 * spacing).collect(), epsilon)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Strictly positive tolerance, constant or given per sample.
#[derive(Debug, Clone)]
pub enum ToleranceField {
    Constant(f64),
    Sampled(AnchoredFunction),
}

impl ToleranceField {
    pub fn constant(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(LipError::arg(format!("tolerance must be positive and finite, got {eps}")));
        }
        Ok(Self::Constant(eps))
    }

    pub fn sampled(tol: AnchoredFunction) -> Result<Self> {
        if let Some(i) = tol.values().iter().position(|v| !(*v > 0.0)) {
            return Err(LipError::arg(format!(
                "tolerance must be positive, got {} at sample {i}",
                tol.values()[i]
            )));
        }
        Ok(Self::Sampled(tol))
    }

    pub fn at(&self, p: &Point) -> Result<f64> {
        match self {
            Self::Constant(e) => Ok(*e),
            Self::Sampled(f) => f.eval(p),
        }
    }

    pub fn min_value(&self) -> f64 {
        match self {
            Self::Constant(e) => *e,
            Self::Sampled(f) => f.min_value(),
        }
    }

    /// The common value if the field is constant.
    fn as_constant(&self) -> Option<f64> {
        match self {
            Self::Constant(e) => Some(*e),
            Self::Sampled(f) if f.min_value() == f.max_value() => Some(f.min_value()),
            Self::Sampled(_) => None,
        }
    }
}

/// `f = sum_r xi_r * r` over a cover indexed by levels.
#[derive(Debug, Clone)]
pub struct LevelBlend {
    partition: Arc<PartitionOfUnity>,
    levels: Vec<f64>,
}

impl LevelBlend {
    pub fn partition(&self) -> &Arc<PartitionOfUnity> {
        &self.partition
    }

    /// Levels whose sets contain at least one sample, in cover order.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
}

impl Evaluable for LevelBlend {
    fn eval(&self, p: &Point) -> Result<f64> {
        let terms = self.partition.terms(p)?;
        let active: Vec<(usize, f64)> = terms.active().map(|i| (i, self.levels[i])).collect();
        Ok(combine(&terms.xi, &active))
    }

    fn domain(&self) -> &MetricDomain {
        self.partition.cover().domain()
    }
}

/// Blend of the levels over the preimage cover `{|phi - r| < eps}`.
/// Levels whose window holds no sample are dropped.
pub fn uniform_approximation(source: &AnchoredFunction, grid: &LevelGrid) -> Result<LevelBlend> {
    let eps = grid.epsilon;
    let levels: Vec<f64> = grid
        .levels
        .iter()
        .copied()
        .filter(|r| source.values().iter().any(|v| (v - r).abs() < eps))
        .collect();
    if levels.is_empty() {
        let p = source.anchors()[0].to_string();
        return Err(LipError::Uncovered { point: p });
    }
    let sets = levels
        .iter()
        .map(|&center| CoverSet::Preimage { center, radius: eps })
        .collect();
    let cover = Cover::new(source.shared_domain().clone(), sets, Some(source.clone()))?;
    Ok(LevelBlend {
        partition: Arc::new(build_partition(cover)?),
        levels,
    })
}

/// Approximation within a variable tolerance.
#[derive(Clone)]
pub enum FineApproximation {
    /// Constant tolerance: a single uniform approximant.
    Uniform(LevelBlend),
    Blend(BlendSpec),
}

impl Evaluable for FineApproximation {
    fn eval(&self, p: &Point) -> Result<f64> {
        match self {
            Self::Uniform(f) => f.eval(p),
            Self::Blend(b) => b.eval(p),
        }
    }

    fn domain(&self) -> &MetricDomain {
        match self {
            Self::Uniform(f) => f.domain(),
            Self::Blend(b) => b.domain(),
        }
    }
}

/// Cover `{tol > 1/n}` for `n = 1..=N` with `N = floor(1 / min tol) + 1`,
/// blending the uniform approximants at `eps = 1/n`.
pub fn fine_approximation(source: &AnchoredFunction, tol: &ToleranceField) -> Result<FineApproximation> {
    let (lo, hi) = (source.min_value(), source.max_value());
    if let Some(eps) = tol.as_constant() {
        return Ok(FineApproximation::Uniform(uniform_approximation(
            source,
            &LevelGrid::covering(lo, hi, eps)?,
        )?));
    }
    let ToleranceField::Sampled(field) = tol else { unreachable!() };
    if field.anchors() != source.anchors() {
        return Err(LipError::arg("tolerance must be sampled at the anchors of the source"));
    }
    let n_max = (1.0 / field.min_value()).floor() as usize + 1;
    let mut sets = Vec::new();
    let mut pieces: Vec<SharedFn> = Vec::new();
    for n in 1..=n_max {
        let level = 1.0 / n as f64;
        if !field.values().iter().any(|&t| t > level) {
            continue;
        }
        sets.push(CoverSet::Sublevel { threshold: -level });
        let f_n = uniform_approximation(source, &LevelGrid::covering(lo, hi, level)?)?;
        pieces.push(Arc::new(f_n));
    }
    let cover = Cover::new(source.shared_domain().clone(), sets, Some(field.clone()))?;
    let partition = Arc::new(build_partition(cover)?);
    Ok(FineApproximation::Blend(BlendSpec::new(partition, pieces)?))
}

type NearTest = Arc<dyn Fn(&Point) -> Result<bool> + Send + Sync>;

/// `f = eta * Psi + (1 - eta) * Phi`: agrees with `g` on its anchors and
/// stays within `tol` of the sampled `phi`.
#[derive(Clone)]
pub struct ExtendApproximation {
    g: AnchoredFunction,
    psi: ExtensionSpec,
    near: NearTest,
    outside: Vec<Point>,
    phi_approx: FineApproximation,
}

impl ExtendApproximation {
    pub fn psi(&self) -> &ExtensionSpec {
        &self.psi
    }

    pub fn far_field(&self) -> &FineApproximation {
        &self.phi_approx
    }

    /// Clamp weight `eta(p)` on `U = {|Psi - phi| < tol}`.
    pub fn eta(&self, p: &Point) -> Result<f64> {
        if !(self.near)(p)? {
            return Ok(0.0);
        }
        let domain = self.g.domain();
        let d_a = domain.dist_to_set(p, self.g.anchors());
        let d_c = domain.dist_to_set(p, &self.outside);
        clamp_value(d_a, d_c, p)
    }
}

impl Evaluable for ExtendApproximation {
    fn eval(&self, p: &Point) -> Result<f64> {
        self.g.domain().check_point(p)?;
        let eta = self.eta(p)?;
        if eta == 1.0 {
            return self.psi.eval(p);
        }
        let far = self.phi_approx.eval(p)?;
        if eta == 0.0 {
            return Ok(far);
        }
        Ok(eta * self.psi.eval(p)? + (1.0 - eta) * far)
    }

    fn domain(&self) -> &MetricDomain {
        self.g.domain()
    }
}

/// `Psi` is the midpoint McShane–Whitney extension of `g` with its exact
/// constant; `phi` supplies the samples.
pub fn extend_and_approximate(
    g: &AnchoredFunction,
    phi: &AnchoredFunction,
    tol: &ToleranceField,
) -> Result<ExtendApproximation> {
    if g.domain() != phi.domain() {
        return Err(LipError::arg("g and phi live on different domains"));
    }
    for (a, gv) in g.anchors().iter().zip(g.values()) {
        let pv = phi.value_at(a).ok_or_else(|| {
            LipError::arg(format!("anchor {a} of g is not a sample of phi"))
        })?;
        let t = tol.at(a)?;
        if !((gv - pv).abs() < t) {
            return Err(LipError::arg(format!(
                "|g - phi| < tol fails at anchor {a}: |{gv} - {pv}| >= {t}"
            )));
        }
    }
    let psi = ExtensionSpec::new(g.clone(), ExtensionMode::Midpoint, LambdaPolicy::Auto, None)?;
    let near: NearTest = {
        let (psi, phi, tol) = (psi.clone(), phi.clone(), tol.clone());
        Arc::new(move |p: &Point| match phi.value_at(p) {
            None => Ok(false),
            Some(v) => Ok((psi.eval(p)? - v).abs() < tol.at(p)?),
        })
    };
    let u = {
        let near = near.clone();
        LevelSet::new(phi.domain(), "|psi - phi| < tol", phi.anchors(), move |p| near(p))?
    };
    Ok(ExtendApproximation {
        g: g.clone(),
        psi,
        near,
        outside: u.outside().to_vec(),
        phi_approx: fine_approximation(phi, tol)?,
    })
}

/// `phi < f < psi` at every sample: the levels blended over the sets
/// `{phi < r < psi}`. Levels strictly between the two functions at no
/// sample are dropped.
pub fn insert_between(below: &AnchoredFunction, above: &AnchoredFunction, grid: &LevelGrid) -> Result<LevelBlend> {
    if below.anchors() != above.anchors() || below.domain() != above.domain() {
        return Err(LipError::arg("both functions must share their samples"));
    }
    let (lo, hi) = (below.values(), above.values());
    if let Some(i) = (0..lo.len()).find(|&i| !(lo[i] < hi[i])) {
        return Err(LipError::arg(format!(
            "phi < psi fails at sample {}: {} >= {}",
            below.anchors()[i],
            lo[i],
            hi[i]
        )));
    }
    let levels: Vec<f64> = grid
        .levels
        .iter()
        .copied()
        .filter(|&r| (0..lo.len()).any(|i| lo[i] < r && r < hi[i]))
        .collect();
    let domain = below.shared_domain().clone();
    let mut sets = Vec::with_capacity(levels.len());
    for &r in &levels {
        let (b, a) = (below.clone(), above.clone());
        let test = move |p: &Point| Ok(matches!((b.value_at(p), a.value_at(p)), (Some(x), Some(y)) if x < r && r < y));
        sets.push(CoverSet::Level(LevelSet::new(&domain, format!("{{phi < {r} < psi}}"), below.anchors(), test)?));
    }
    if sets.is_empty() {
        return Err(LipError::Uncovered {
            point: below.anchors()[0].to_string(),
        });
    }
    let cover = Cover::new(domain, sets, None)?.with_samples(below.anchors())?;
    Ok(LevelBlend {
        partition: Arc::new(build_partition(cover)?),
        levels,
    })
}

/// One member of a monotone approximating sequence.
#[derive(Clone)]
pub struct MonotoneStep {
    pub n: usize,
    pub blend: BlendSpec,
}

impl Evaluable for MonotoneStep {
    fn eval(&self, p: &Point) -> Result<f64> {
        self.blend.eval(p)
    }

    fn domain(&self) -> &MetricDomain {
        self.blend.domain()
    }
}

/// Increasing sequence converging to `phi` on an explicit domain.
///
/// Cover `O_k = {phi > -k}` for `k = 1..=K` (the last is the whole space),
/// truncations `phi_k = max(phi, -k)`, lower envelopes of `phi_k` at
/// `kappa = n`, blended through the partition over the `O_k`.
pub fn monotone_approximation(source: &AnchoredFunction, n_list: &[usize]) -> Result<Vec<MonotoneStep>> {
    if !source.domain().is_explicit() {
        return Err(LipError::UnsupportedDomain(
            "monotone approximation needs an explicit finite domain".into(),
        ));
    }
    if source.domain().len() != Some(source.len()) {
        return Err(LipError::arg("monotone approximation needs a value at every domain point"));
    }
    if let Some(w) = n_list.windows(2).find(|w| w[0] >= w[1]) {
        return Err(LipError::arg(format!("n must be strictly increasing, found {} then {}", w[0], w[1])));
    }
    if n_list.first() == Some(&0) {
        return Err(LipError::arg("n must be positive"));
    }
    let k_max = (-source.min_value()).floor().max(0.0) as usize + 1;
    let sets = (1..=k_max)
        .map(|k| CoverSet::Sublevel { threshold: k as f64 })
        .collect();
    let cover = Cover::new(source.shared_domain().clone(), sets, Some(source.clone()))?;
    let partition = Arc::new(build_partition(cover)?);
    let truncated: Vec<AnchoredFunction> = (1..=k_max)
        .map(|k| source.map_values(|v| v.max(-(k as f64))))
        .collect::<Result<_>>()?;
    n_list
        .iter()
        .map(|&n| {
            let pieces = truncated
                .iter()
                .map(|t| Ok(Arc::new(EnvelopeSpec::lower(t.clone(), n as f64)?) as SharedFn))
                .collect::<Result<Vec<_>>>()?;
            Ok(MonotoneStep {
                n,
                blend: BlendSpec::new(partition.clone(), pieces)?,
            })
        })
        .collect()
}

/// Smallest integer `n` with `f_n = phi`, as guaranteed by the envelope
/// convergence index.
pub fn monotone_convergence_n(source: &AnchoredFunction) -> Result<usize> {
    Ok((convergence_index(source)?.ceil() as usize).max(1))
}

/// Scale `delta`, slope `k` and target `epsilon` of a small-scale
/// approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallScaleSpec {
    pub delta: f64,
    pub k: u64,
    pub epsilon: f64,
}

impl SmallScaleSpec {
    pub fn new(delta: f64, k: u64, epsilon: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite() && epsilon > 0.0 && epsilon.is_finite()) || k == 0 {
            return Err(LipError::arg("delta, k and epsilon must be positive"));
        }
        if !(k as f64 * delta > epsilon) {
            return Err(LipError::arg(format!(
                "k * delta > epsilon fails: {k} * {delta} <= {epsilon}"
            )));
        }
        Ok(Self { delta, k, epsilon })
    }

    /// `|phi(a) - phi(b)| < epsilon` for every anchor pair with
    /// `d(a, b) < 2 delta`.
    pub fn validate(&self, source: &AnchoredFunction) -> Result<()> {
        let domain = source.domain();
        let (pts, vals) = (source.anchors(), source.values());
        let reach = 2.0 * self.delta;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let jump = (vals[i] - vals[j]).abs();
                if jump >= self.epsilon && domain.dist(&pts[i], &pts[j]) < reach {
                    return Err(LipError::arg(format!(
                        "modulus condition fails for anchors {} and {}: |{} - {}| >= {} at distance < {reach}",
                        pts[i], pts[j], vals[i], vals[j], self.epsilon
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest `delta` meeting the modulus condition on the anchors, with
    /// `k = floor(epsilon / delta) + 1`. The threshold is located exactly:
    /// half the shortest distance between two anchors whose values differ
    /// by at least `epsilon` (the diameter when there is none).
    pub fn for_target(source: &AnchoredFunction, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(LipError::arg(format!("epsilon must be positive, got {epsilon}")));
        }
        let domain = source.domain();
        let (pts, vals) = (source.anchors(), source.values());
        let mut bad = f64::INFINITY;
        let mut diam: f64 = 0.0;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let d = domain.dist(&pts[i], &pts[j]);
                diam = diam.max(d);
                if (vals[i] - vals[j]).abs() >= epsilon {
                    bad = bad.min(d);
                }
            }
        }
        let delta = if bad.is_finite() {
            bad / 2.0
        } else if diam > 0.0 {
            diam
        } else {
            1.0
        };
        Self::new(delta, (epsilon / delta).floor() as u64 + 1, epsilon)
    }
}

/// Max disagreement between the `delta` and `2 delta` window forms.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowAgreement {
    pub max_diff: f64,
    pub worst: Option<Point>,
}

impl WindowAgreement {
    pub fn agrees(&self, tol: f64) -> bool {
        self.max_diff <= tol
    }
}

/// `f(x) = min over anchors y with d(x, y) < delta of phi(y) + k d(x, y)`.
#[derive(Debug, Clone)]
pub struct SmallScaleApproximation {
    spec: SmallScaleSpec,
    narrow: EnvelopeSpec,
    wide: EnvelopeSpec,
}

impl SmallScaleApproximation {
    pub fn spec(&self) -> &SmallScaleSpec {
        &self.spec
    }

    /// The `2 delta` window form.
    pub fn eval_wide(&self, p: &Point) -> Result<f64> {
        self.wide.eval(p)
    }

    pub fn window_agreement(&self, samples: &[Point]) -> Result<WindowAgreement> {
        let mut out = WindowAgreement {
            max_diff: 0.0,
            worst: None,
        };
        for p in samples {
            let d = (self.narrow.eval(p)? - self.wide.eval(p)?).abs();
            if d > out.max_diff {
                out = WindowAgreement {
                    max_diff: d,
                    worst: Some(p.clone()),
                };
            }
        }
        Ok(out)
    }
}

impl Evaluable for SmallScaleApproximation {
    fn eval(&self, p: &Point) -> Result<f64> {
        self.narrow.eval(p)
    }

    fn domain(&self) -> &MetricDomain {
        self.narrow.domain()
    }
}

/// Validates the spec on the anchors before building the envelope.
pub fn small_scale_approximation(source: &AnchoredFunction, spec: SmallScaleSpec) -> Result<SmallScaleApproximation> {
    let spec = SmallScaleSpec::new(spec.delta, spec.k, spec.epsilon)?;
    spec.validate(source)?;
    let k = spec.k as f64;
    Ok(SmallScaleApproximation {
        spec,
        narrow: EnvelopeSpec::lower(source.clone(), k)?.with_window(spec.delta)?,
        wide: EnvelopeSpec::lower(source.clone(), k)?.with_window(2.0 * spec.delta)?,
    })
}
