//! McShane–Whitney extensions.
//!
//! With per-anchor constants `lambda_a` (a single constant is the special
//! case `lambda_a = lambda`):
//!
//! ```text
//! Phi_-(p) = max_a [ phi(a) - lambda_a * d(a, p) ]
//! Phi_+(p) = min_a [ phi(a) + lambda_a * d(a, p) ]
//! ```
//!
//! Both agree with `phi` on the anchors and `Phi_- <= Phi_+`. For a constant
//! `lambda` they are the smallest and the largest `lambda`-Lipschitz
//! extensions.

use std::f64::consts::FRAC_PI_2;

use crate::error::{LipError, Result};
use crate::function::{AnchoredFunction, Evaluable};
use crate::metric::{MetricDomain, Point};

/// Relative slack for admissibility checks.
const ADMISSIBLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionMode {
    /// `Phi_-`.
    Minimal,
    /// `Phi_+`.
    Maximal,
    /// `(Phi_- + Phi_+) / 2`.
    Midpoint,
    /// `(Phi_- + Phi_+) / (2 + d(p, A))`, values in `(-M, M)`.
    BoundedRange,
}

/// How the Lipschitz constants are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaPolicy {
    Constant(f64),
    /// Use the constants attached to the source.
    PerAnchor,
    /// Exact pairwise constant `max |phi(a) - phi(b)| / d(a, b)`.
    Auto,
    /// [`estimate_anchor_constants`].
    AutoPerAnchor,
}

/// Resolved constants.
#[derive(Debug, Clone, PartialEq)]
pub enum Lambda {
    Constant(f64),
    PerAnchor(Vec<f64>),
}

impl Lambda {
    #[inline]
    fn at(&self, i: usize) -> f64 {
        match self {
            Lambda::Constant(l) => *l,
            Lambda::PerAnchor(v) => v[i],
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExtensionSpec {
    source: AnchoredFunction,
    mode: ExtensionMode,
    lambda: Lambda,
    bound: Option<f64>,
}

impl ExtensionSpec {
    /// Resolves the lambda policy and checks admissibility eagerly.
    pub fn new(
        source: AnchoredFunction,
        mode: ExtensionMode,
        policy: LambdaPolicy,
        bound: Option<f64>,
    ) -> Result<Self> {
        let lambda = match policy {
            LambdaPolicy::Constant(l) => {
                if !(l >= 0.0 && l.is_finite()) {
                    return Err(LipError::arg(format!("lambda must be finite and nonnegative, got {l}")));
                }
                Lambda::Constant(l)
            }
            LambdaPolicy::Auto => Lambda::Constant(pairwise_constant(&source).0),
            LambdaPolicy::PerAnchor => Lambda::PerAnchor(
                source
                    .constants()
                    .ok_or_else(|| LipError::arg("per-anchor lambda requested but the source has no constants"))?
                    .to_vec(),
            ),
            LambdaPolicy::AutoPerAnchor => Lambda::PerAnchor(estimate_anchor_constants(&source)),
        };
        check_admissible(&source, &lambda)?;
        if let Some(m) = bound {
            if !(m > 0.0) {
                return Err(LipError::arg(format!("bound M must be positive, got {m}")));
            }
            if let Some(i) = source.values().iter().position(|v| !(v.abs() < m)) {
                return Err(LipError::arg(format!(
                    "|phi| < M fails at anchor {i}: |{}| >= {m}",
                    source.values()[i]
                )));
            }
        } else if mode == ExtensionMode::BoundedRange {
            return Err(LipError::arg("bounded-range mode needs a bound M"));
        }
        Ok(Self {
            source,
            mode,
            lambda,
            bound,
        })
    }

    pub fn constant(source: AnchoredFunction, mode: ExtensionMode, lambda: f64) -> Result<Self> {
        Self::new(source, mode, LambdaPolicy::Constant(lambda), None)
    }

    pub fn lambda(&self) -> &Lambda {
        &self.lambda
    }

    pub fn mode(&self) -> ExtensionMode {
        self.mode
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    pub fn source(&self) -> &AnchoredFunction {
        &self.source
    }

    pub fn with_mode(&self, mode: ExtensionMode) -> Result<Self> {
        if mode == ExtensionMode::BoundedRange && self.bound.is_none() {
            return Err(LipError::arg("bounded-range mode needs a bound M"));
        }
        Ok(Self {
            mode,
            ..self.clone()
        })
    }

    /// `(Phi_-(p), Phi_+(p))` in one anchor scan.
    pub fn pair(&self, p: &Point) -> Result<(f64, f64)> {
        let domain = self.source.domain();
        domain.check_point(p)?;
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (i, (a, &v)) in self.source.anchors().iter().zip(self.source.values()).enumerate() {
            let reach = self.lambda.at(i) * domain.dist(a, p);
            lo = lo.max(v - reach);
            hi = hi.min(v + reach);
        }
        Ok((lo, hi))
    }

    pub fn minimal(&self, p: &Point) -> Result<f64> {
        self.pair(p).map(|(lo, _)| lo)
    }

    pub fn maximal(&self, p: &Point) -> Result<f64> {
        self.pair(p).map(|(_, hi)| hi)
    }

    pub fn midpoint(&self, p: &Point) -> Result<f64> {
        self.pair(p).map(|(lo, hi)| (lo + hi) / 2.0)
    }

    /// `(Phi_- + Phi_+) / (2 + d(p, A))`.
    pub fn bounded(&self, p: &Point) -> Result<f64> {
        let (lo, hi) = self.pair(p)?;
        let d = self.source.shared_domain().dist_to_set(p, self.source.anchors());
        Ok((lo + hi) / (2.0 + d))
    }
}

impl Evaluable for ExtensionSpec {
    fn eval(&self, p: &Point) -> Result<f64> {
        match self.mode {
            ExtensionMode::Minimal => self.minimal(p),
            ExtensionMode::Maximal => self.maximal(p),
            ExtensionMode::Midpoint => self.midpoint(p),
            ExtensionMode::BoundedRange => self.bounded(p),
        }
    }

    fn domain(&self) -> &MetricDomain {
        self.source.domain()
    }
}

pub fn mw_minimal(spec: &ExtensionSpec, p: &Point) -> Result<f64> {
    spec.minimal(p)
}

pub fn mw_maximal(spec: &ExtensionSpec, p: &Point) -> Result<f64> {
    spec.maximal(p)
}

/// Evaluate the bounded-range extension; the spec must carry a bound.
pub fn bounded_range_extension(spec: &ExtensionSpec, p: &Point) -> Result<f64> {
    if spec.bound.is_none() {
        return Err(LipError::arg("bounded-range extension needs a bound M"));
    }
    spec.bounded(p)
}

/// Exact Lipschitz constant of the anchored data and a pair attaining it.
/// `(0, None)` for a single anchor.
pub fn pairwise_constant(source: &AnchoredFunction) -> (f64, Option<(usize, usize)>) {
    let domain = source.domain();
    let (pts, vals) = (source.anchors(), source.values());
    let mut best = 0.0;
    let mut witness = None;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let r = (vals[i] - vals[j]).abs() / domain.dist(&pts[i], &pts[j]);
            if r > best || witness.is_none() {
                best = best.max(r);
                witness = Some((i, j));
            }
        }
    }
    (best, witness)
}

/// `K_a = max_{b != a} |phi(a) - phi(b)| / d(a, b)`, the smallest constants
/// for which the per-anchor extension is admissible. Zero for a single anchor.
pub fn estimate_anchor_constants(source: &AnchoredFunction) -> Vec<f64> {
    let domain = source.domain();
    let (pts, vals) = (source.anchors(), source.values());
    let n = pts.len();
    let mut k = vec![0.0f64; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let r = (vals[i] - vals[j]).abs() / domain.dist(&pts[i], &pts[j]);
            k[i] = k[i].max(r);
            k[j] = k[j].max(r);
        }
    }
    k
}

/// `|phi(a) - phi(b)| <= min(lambda_a, lambda_b) * d(a, b)` for every pair.
pub fn check_admissible(source: &AnchoredFunction, lambda: &Lambda) -> Result<()> {
    let domain = source.domain();
    let (pts, vals) = (source.anchors(), source.values());
    if let Lambda::PerAnchor(v) = lambda {
        if v.len() != pts.len() {
            return Err(LipError::arg(format!("{} constants for {} anchors", v.len(), pts.len())));
        }
        if let Some(i) = v.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(LipError::arg(format!("constant at anchor {i} must be finite and nonnegative")));
        }
    }
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let lam = lambda.at(i).min(lambda.at(j));
            let d = domain.dist(&pts[i], &pts[j]);
            let jump = (vals[i] - vals[j]).abs();
            if jump - lam * d > ADMISSIBLE_TOL * jump.max(1.0) {
                return Err(LipError::Inadmissible {
                    a: i,
                    b: j,
                    slope: jump / d,
                    lambda: lam,
                    piece: None,
                });
            }
        }
    }
    Ok(())
}

/// Bounds behind the one-center constant `K = max(L, M_osc / delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointwiseConstantEstimate {
    /// Lipschitz bound on the `delta`-ball.
    pub local_slope: f64,
    pub delta: f64,
    /// Oscillation bound used for far pairs.
    pub oscillation: f64,
    pub constant: f64,
}

impl PointwiseConstantEstimate {
    pub fn new(local_slope: f64, oscillation: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || local_slope < 0.0 || oscillation < 0.0 {
            return Err(LipError::arg(
                "need delta > 0 and nonnegative slope and oscillation",
            ));
        }
        Ok(Self {
            local_slope,
            delta,
            oscillation,
            constant: local_slope.max(oscillation / delta),
        })
    }
}

/// Per-anchor estimates: `L_a` is the pairwise constant of the anchors in
/// `O(a, delta_a)`, the oscillation is `max phi - min phi`.
pub fn estimate_pointwise_constants(
    source: &AnchoredFunction,
    deltas: &[f64],
) -> Result<Vec<PointwiseConstantEstimate>> {
    if deltas.len() != source.len() {
        return Err(LipError::arg(format!(
            "{} radii for {} anchors",
            deltas.len(),
            source.len()
        )));
    }
    let domain = source.domain();
    let (pts, vals) = (source.anchors(), source.values());
    let osc = source.max_value() - source.min_value();
    deltas
        .iter()
        .enumerate()
        .map(|(a, &delta)| {
            let near: Vec<usize> = (0..pts.len())
                .filter(|&b| domain.dist(&pts[a], &pts[b]) < delta)
                .collect();
            let mut slope = 0.0f64;
            for (x, &i) in near.iter().enumerate() {
                for &j in &near[x + 1..] {
                    slope = slope.max((vals[i] - vals[j]).abs() / domain.dist(&pts[i], &pts[j]));
                }
            }
            PointwiseConstantEstimate::new(slope, osc, delta)
        })
        .collect()
}

/// `arctan` applied to each value.
pub fn compress(values: &[f64]) -> Vec<f64> {
    values.iter().map(|v| v.atan()).collect()
}

/// `tan` applied to each value; every input must lie strictly inside
/// `(-pi/2, pi/2)`.
pub fn decompress(values: &[f64]) -> Result<Vec<f64>> {
    values.iter().map(|&v| decompress_one(v)).collect()
}

pub(crate) fn decompress_one(v: f64) -> Result<f64> {
    if v.abs() < FRAC_PI_2 {
        Ok(v.tan())
    } else {
        Err(LipError::Range(format!("{v} is outside (-pi/2, pi/2)")))
    }
}

/// Extension of arbitrary real data through `arctan`, the bounded-range
/// extension with `M = pi/2` and per-anchor constants, then `tan`.
#[derive(Debug, Clone)]
pub struct UnboundedExtension {
    inner: ExtensionSpec,
}

impl UnboundedExtension {
    pub fn new(source: &AnchoredFunction) -> Result<Self> {
        let compressed = source.with_values(compress(source.values()))?;
        let inner = ExtensionSpec::new(
            compressed,
            ExtensionMode::BoundedRange,
            LambdaPolicy::AutoPerAnchor,
            Some(FRAC_PI_2),
        )?;
        Ok(Self { inner })
    }

    pub fn compressed(&self) -> &ExtensionSpec {
        &self.inner
    }
}

impl Evaluable for UnboundedExtension {
    fn eval(&self, p: &Point) -> Result<f64> {
        decompress_one(self.inner.bounded(p)?)
    }

    fn domain(&self) -> &MetricDomain {
        self.inner.domain()
    }
}

pub fn extend_unbounded(source: &AnchoredFunction, p: &Point) -> Result<f64> {
    UnboundedExtension::new(source)?.eval(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_point() -> AnchoredFunction {
        AnchoredFunction::on_line(&[0.0, 3.0], &[0.0, 3.0]).unwrap()
    }

    /// Direct evaluation of both formulas for anchors on the line.
    fn oracle_pair(xs: &[f64], vs: &[f64], lam: &[f64], p: f64) -> (f64, f64) {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for i in 0..xs.len() {
            lo = lo.max(vs[i] - lam[i] * (xs[i] - p).abs());
            hi = hi.min(vs[i] + lam[i] * (xs[i] - p).abs());
        }
        (lo, hi)
    }

    #[test]
    fn constant_lambda_examples() {
        let spec = ExtensionSpec::constant(two_point(), ExtensionMode::Midpoint, 1.0).unwrap();
        assert_eq!(spec.pair(&1.0.into()).unwrap(), (1.0, 1.0));
        assert_eq!(spec.pair(&(-1.0).into()).unwrap(), (-1.0, 1.0));
        assert_eq!(spec.pair(&0.0.into()).unwrap(), (0.0, 0.0));
        assert_eq!(oracle_pair(&[0.0, 3.0], &[0.0, 3.0], &[1.0, 1.0], -1.0), (-1.0, 1.0));
        assert_eq!(mw_maximal(&spec, &1.0.into()).unwrap(), 1.0);
        assert_eq!(mw_minimal(&spec, &(-1.0).into()).unwrap(), -1.0);
    }

    #[test]
    fn per_anchor_example() {
        let src = two_point().with_constants(vec![1.0, 2.0]).unwrap();
        let spec = ExtensionSpec::new(src, ExtensionMode::Midpoint, LambdaPolicy::PerAnchor, None).unwrap();
        assert_eq!(spec.pair(&1.0.into()).unwrap(), (-1.0, 1.0));
        assert_eq!(oracle_pair(&[0.0, 3.0], &[0.0, 3.0], &[1.0, 2.0], 1.0), (-1.0, 1.0));
    }

    #[test]
    fn inadmissible_lambda_reports_pair() {
        let err = ExtensionSpec::constant(two_point(), ExtensionMode::Minimal, 0.5).unwrap_err();
        assert_eq!(
            err,
            LipError::Inadmissible { a: 0, b: 1, slope: 1.0, lambda: 0.5, piece: None }
        );
        let src = two_point().with_constants(vec![0.5, 2.0]).unwrap();
        assert!(ExtensionSpec::new(src, ExtensionMode::Minimal, LambdaPolicy::PerAnchor, None).is_err());
        assert!(ExtensionSpec::new(two_point(), ExtensionMode::Minimal, LambdaPolicy::PerAnchor, None).is_err());
    }

    #[test]
    fn auto_lambda_is_exact_constant() {
        let src = AnchoredFunction::on_line(&[0.0, 1.0, 3.0], &[0.0, 5.0, 1.0]).unwrap();
        let spec = ExtensionSpec::new(src, ExtensionMode::Maximal, LambdaPolicy::Auto, None).unwrap();
        assert_eq!(spec.lambda(), &Lambda::Constant(5.0));
    }

    #[test]
    fn anchor_constant_examples() {
        let src = AnchoredFunction::on_line(&[0.0, 1.0, 3.0], &[0.0, 5.0, 1.0]).unwrap();
        // ratios: (0,1) -> 5, (0,3) -> 1/3, (1,3) -> 2
        assert_eq!(estimate_anchor_constants(&src), vec![5.0, 5.0, 2.0]);
        let c = AnchoredFunction::on_line(&[0.0, 1.0, 3.0], &[4.0; 3]).unwrap();
        assert_eq!(estimate_anchor_constants(&c), vec![0.0; 3]);
        let s = AnchoredFunction::on_line(&[0.0, 1.0], &[0.0, 1.0]).unwrap();
        assert_eq!(estimate_anchor_constants(&s), vec![1.0, 1.0]);
        let one = AnchoredFunction::on_line(&[2.0], &[1.0]).unwrap();
        assert_eq!(estimate_anchor_constants(&one), vec![0.0]);
    }

    #[test]
    fn pointwise_estimate_takes_max() {
        let e = PointwiseConstantEstimate::new(2.0, 6.0, 1.5).unwrap();
        assert_eq!(e.constant, 4.0);
        assert!(e.constant >= e.local_slope && e.constant >= e.oscillation / e.delta);
        assert!(PointwiseConstantEstimate::new(1.0, 1.0, 0.0).is_err());
        let src = AnchoredFunction::on_line(&[0.0, 1.0, 3.0], &[0.0, 5.0, 1.0]).unwrap();
        let est = estimate_pointwise_constants(&src, &[1.5, 1.5, 1.5]).unwrap();
        // ball(0, 1.5) holds anchors 0 and 1: L = 5; oscillation 5 / 1.5
        assert_eq!(est[0].local_slope, 5.0);
        assert_eq!(est[2].local_slope, 0.0);
        assert_eq!(est[2].constant, 5.0 / 1.5);
    }

    #[test]
    fn bounded_range_examples() {
        let spec = ExtensionSpec::new(
            two_point(),
            ExtensionMode::BoundedRange,
            LambdaPolicy::Constant(1.0),
            Some(3.5),
        )
        .unwrap();
        assert_eq!(bounded_range_extension(&spec, &(-1.0).into()).unwrap(), 0.0);
        // oracle: Phi_-(1) = 1, Phi_+(1) = 1, d(1, A) = 1
        let (lo, hi) = oracle_pair(&[0.0, 3.0], &[0.0, 3.0], &[1.0, 1.0], 1.0);
        assert_eq!((lo + hi) / (2.0 + 1.0), 2.0 / 3.0);
        assert_eq!(spec.eval(&1.0.into()).unwrap(), 2.0 / 3.0);
        assert_eq!(spec.eval(&3.0.into()).unwrap(), 3.0);
        assert!(ExtensionSpec::new(two_point(), ExtensionMode::BoundedRange, LambdaPolicy::Auto, Some(3.0)).is_err());
        assert!(ExtensionSpec::new(two_point(), ExtensionMode::BoundedRange, LambdaPolicy::Auto, None).is_err());
    }

    #[test]
    fn compress_roundtrip() {
        assert_eq!(compress(&[0.0]), vec![0.0]);
        assert_eq!(compress(&[1.0]), vec![std::f64::consts::FRAC_PI_4]);
        let back = decompress(&compress(&[57.3])).unwrap();
        assert!((back[0] - 57.3).abs() < 1e-12);
        assert!(matches!(decompress(&[FRAC_PI_2]), Err(LipError::Range(_))));
        assert!(decompress(&[-2.0]).is_err());
    }

    #[test]
    fn unbounded_pipeline() {
        let big = AnchoredFunction::on_line(&[0.0, 2.0], &[1e3, -4.0]).unwrap();
        let ext = UnboundedExtension::new(&big).unwrap();
        assert!((ext.eval(&0.0.into()).unwrap() - 1e3).abs() < 1e-6);
        assert!((ext.eval(&2.0.into()).unwrap() + 4.0).abs() < 1e-9);

        // oracle: compose the three stages by hand
        let t = [0.0f64.atan(), 3.0f64.atan()];
        let k = (t[1] - t[0]).abs() / 3.0;
        let (lo, hi) = oracle_pair(&[0.0, 3.0], &t, &[k, k], 1.0);
        let expected = ((lo + hi) / (2.0 + 1.0)).tan();
        let got = extend_unbounded(&two_point(), &1.0.into()).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");

        let c = AnchoredFunction::on_line(&[0.0, 1.0, 5.0], &[-2.0; 3]).unwrap();
        let ext = UnboundedExtension::new(&c).unwrap();
        // (2 tan^-1(c)) / (2 + d) -> c only on A; constant data gives equal Phi_-
        // and Phi_+, scaled by 2 / (2 + d) away from A
        assert!((ext.eval(&1.0.into()).unwrap() + 2.0).abs() < 1e-12);
    }

    fn line_data() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..10).prop_flat_map(|n| {
            (
                prop::collection::btree_set(-500i32..500, n)
                    .prop_map(|s| s.into_iter().map(|v| v as f64 / 50.0).collect::<Vec<_>>()),
                prop::collection::vec(-3.0..3.0f64, n),
            )
        })
        .prop_filter("lengths match", |(x, v)| x.len() == v.len())
    }

    proptest! {
        #[test]
        fn mw_invariants((xs, vs) in line_data(), p in -15.0..15.0f64, q in -15.0..15.0f64, t in 0.0..1.0f64) {
            let src = AnchoredFunction::on_line(&xs, &vs).unwrap();
            let spec = ExtensionSpec::new(src.clone(), ExtensionMode::Midpoint, LambdaPolicy::Auto, None).unwrap();
            let lam = match spec.lambda() { Lambda::Constant(l) => *l, _ => unreachable!() };
            let (lp, hp) = spec.pair(&p.into()).unwrap();
            let (lq, hq) = spec.pair(&q.into()).unwrap();
            prop_assert!(lp <= hp + 1e-12);
            prop_assert!((lp - lq).abs() <= lam * (p - q).abs() + 1e-9);
            prop_assert!((hp - hq).abs() <= lam * (p - q).abs() + 1e-9);
            let blend = t * lp + (1.0 - t) * hp;
            prop_assert!(lp <= blend + 1e-12 && blend <= hp + 1e-12);
            prop_assert_eq!(spec.eval(&p.into()).unwrap(), (lp + hp) / 2.0);
            for (x, v) in xs.iter().zip(&vs) {
                let (l, h) = spec.pair(&(*x).into()).unwrap();
                prop_assert!((l - v).abs() <= 1e-12 && (h - v).abs() <= 1e-12);
            }
            // variable constants: sandwich
            let var = ExtensionSpec::new(src, ExtensionMode::Midpoint, LambdaPolicy::AutoPerAnchor, None).unwrap();
            let (vl, vh) = var.pair(&p.into()).unwrap();
            prop_assert!(vl <= vh + 1e-12);
        }

        #[test]
        fn bounded_range_stays_inside((xs, vs) in line_data(), p in -100.0..100.0f64) {
            let src = AnchoredFunction::on_line(&xs, &vs).unwrap();
            let spec = ExtensionSpec::new(src, ExtensionMode::BoundedRange, LambdaPolicy::AutoPerAnchor, Some(3.0)).unwrap();
            let v = spec.eval(&p.into()).unwrap();
            prop_assert!(v > -3.0 && v < 3.0);
        }
    }
}
