//! Sampling-based measurement of Lipschitz-type moduli.
//!
//! Every check here is evidence from finitely many samples: a measured
//! constant is a lower bound of the true one and a pass verdict only
//! covers the pairs that were looked at.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{LipError, Result};
use crate::function::{AnchoredFunction, Evaluable};
use crate::metric::{MetricDomain, Point};

pub const DEFAULT_PAIR_BUDGET: usize = 1_000_000;
pub const DEFAULT_SEED: u64 = 0x5eed;
/// Slack for Lipschitz bounds and order checks.
pub const CHECK_TOL: f64 = 1e-9;
/// Slack for agreement with anchor data.
pub const AGREEMENT_TOL: f64 = 1e-12;

/// How many pairs a scan may visit. Scans with more candidate pairs are
/// replaced by `max_pairs` uniformly drawn pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairBudget {
    pub max_pairs: usize,
    pub seed: u64,
}

impl Default for PairBudget {
    fn default() -> Self {
        Self {
            max_pairs: DEFAULT_PAIR_BUDGET,
            seed: DEFAULT_SEED,
        }
    }
}

impl PairBudget {
    pub fn exhaustive() -> Self {
        Self {
            max_pairs: usize::MAX,
            seed: DEFAULT_SEED,
        }
    }

    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Visit `(i, j)` with `i < j`: all of them in lexicographic order, or a
/// seeded sample. Returns the seed when sampling happened.
fn for_pairs(n: usize, budget: PairBudget, mut visit: impl FnMut(usize, usize)) -> Option<u64> {
    let total = n.saturating_mul(n.saturating_sub(1)) / 2;
    if total <= budget.max_pairs {
        for i in 0..n {
            for j in (i + 1)..n {
                visit(i, j);
            }
        }
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    for _ in 0..budget.max_pairs {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        visit(i.min(j), i.max(j));
    }
    Some(budget.seed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "status")]
pub enum Verdict {
    Pass,
    Fail { violations: usize },
    /// Nothing in scope to check.
    Inconclusive,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Largest sampled slope and the pair attaining it (sample indices).
#[derive(Debug, Clone, PartialEq)]
pub struct LipEstimate {
    pub constant: f64,
    pub witness: (usize, usize),
    pub pairs: usize,
    pub seed: Option<u64>,
}

/// `max |f(p) - f(q)| / d(p, q)` over sampled pairs. Coincident samples
/// are skipped; ties keep the first pair in scan order.
pub fn empirical_lip<E: Evaluable + ?Sized>(f: &E, samples: &[Point], budget: Option<PairBudget>) -> Result<LipEstimate> {
    let values = f.eval_many(samples)?;
    slope_scan(f.domain(), samples, &values, budget.unwrap_or_default())
}

/// [`empirical_lip`] on the anchor data itself.
pub fn empirical_lip_anchored(source: &AnchoredFunction, budget: Option<PairBudget>) -> Result<LipEstimate> {
    slope_scan(source.domain(), source.anchors(), source.values(), budget.unwrap_or_default())
}

fn slope_scan(domain: &MetricDomain, samples: &[Point], values: &[f64], budget: PairBudget) -> Result<LipEstimate> {
    if samples.len() < 2 {
        return Err(LipError::arg("empirical_lip needs at least two samples"));
    }
    for p in samples {
        domain.check_point(p)?;
    }
    let mut best: Option<(f64, usize, usize)> = None;
    let mut pairs = 0;
    let seed = for_pairs(samples.len(), budget, |i, j| {
        let d = domain.dist(&samples[i], &samples[j]);
        if d == 0.0 {
            return;
        }
        pairs += 1;
        let r = (values[i] - values[j]).abs() / d;
        if best.is_none_or(|(b, _, _)| r > b) {
            best = Some((r, i, j));
        }
    });
    let (constant, a, b) = best.ok_or_else(|| LipError::arg("all sampled pairs are coincident"))?;
    Ok(LipEstimate {
        constant,
        witness: (a, b),
        pairs,
        seed,
    })
}

/// `sup |f(x) - f(p)| / d(x, p)` over samples with `0 < d(x, p) < t`,
/// zero when no sample is in that range.
pub fn pointwise_modulus<E: Evaluable + ?Sized>(f: &E, p: &Point, t: f64, samples: &[Point]) -> Result<f64> {
    Ok(pointwise_with_witness(f, p, t, samples)?.0)
}

fn pointwise_with_witness<E: Evaluable + ?Sized>(
    f: &E,
    p: &Point,
    t: f64,
    samples: &[Point],
) -> Result<(f64, Option<usize>)> {
    let domain = f.domain();
    let fp = f.eval(p)?;
    let mut best = (0.0, None);
    for (i, x) in samples.iter().enumerate() {
        let d = domain.distance(x, p)?;
        if d > 0.0 && d < t {
            let r = (f.eval(x)? - fp).abs() / d;
            if best.1.is_none() || r > best.0 {
                best = (r, Some(i));
            }
        }
    }
    Ok(best)
}

/// One sampled pair breaking a bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairViolation {
    pub p: Point,
    pub q: Point,
    pub distance: f64,
    pub jump: f64,
}

/// At most this many violations are listed; the verdict keeps the count.
pub const MAX_LISTED: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleCheck {
    pub delta: f64,
    pub k: f64,
    pub verdict: Verdict,
    pub pairs_in_scope: usize,
    /// Largest excess `jump - K d` among violating pairs.
    pub worst: Option<PairViolation>,
    pub violations: Vec<PairViolation>,
    pub seed: Option<u64>,
}

/// Every sampled pair with `d < delta` must satisfy
/// `|f(p) - f(q)| <= K d + 1e-9`.
pub fn check_small_scale<E: Evaluable + ?Sized>(
    f: &E,
    samples: &[Point],
    delta: f64,
    k: f64,
    budget: Option<PairBudget>,
) -> Result<ScaleCheck> {
    if !(delta > 0.0) || !(k >= 0.0) {
        return Err(LipError::arg("check_small_scale needs delta > 0 and K >= 0"));
    }
    let domain = f.domain();
    let values = f.eval_many(samples)?;
    let mut in_scope = 0;
    let mut count = 0;
    let mut listed = Vec::new();
    let mut worst: Option<(f64, PairViolation)> = None;
    let seed = for_pairs(samples.len(), budget.unwrap_or_default(), |i, j| {
        let d = domain.dist(&samples[i], &samples[j]);
        if !(d < delta) {
            return;
        }
        in_scope += 1;
        let jump = (values[i] - values[j]).abs();
        let excess = jump - k * d;
        if excess > CHECK_TOL {
            count += 1;
            let v = PairViolation {
                p: samples[i].clone(),
                q: samples[j].clone(),
                distance: d,
                jump,
            };
            if worst.as_ref().is_none_or(|(e, _)| excess > *e) {
                worst = Some((excess, v.clone()));
            }
            if listed.len() < MAX_LISTED {
                listed.push(v);
            }
        }
    });
    Ok(ScaleCheck {
        delta,
        k,
        verdict: verdict_of(in_scope, count),
        pairs_in_scope: in_scope,
        worst: worst.map(|w| w.1),
        violations: listed,
        seed,
    })
}

fn verdict_of(in_scope: usize, violations: usize) -> Verdict {
    if in_scope == 0 {
        Verdict::Inconclusive
    } else if violations == 0 {
        Verdict::Pass
    } else {
        Verdict::Fail { violations }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorCheck {
    pub verdict: Verdict,
    pub max_error: f64,
    /// Anchor indices off by more than the tolerance.
    pub failing: Vec<usize>,
}

/// `|ext(a) - phi(a)| <= 1e-12` at every anchor.
pub fn check_extension<E: Evaluable + ?Sized>(ext: &E, source: &AnchoredFunction) -> Result<AnchorCheck> {
    let mut max_error: f64 = 0.0;
    let mut failing = Vec::new();
    for (i, (a, v)) in source.anchors().iter().zip(source.values()).enumerate() {
        let e = (ext.eval(a)? - v).abs();
        max_error = max_error.max(e);
        if !(e <= AGREEMENT_TOL) {
            failing.push(i);
        }
    }
    Ok(AnchorCheck {
        verdict: verdict_of(source.len(), failing.len()),
        max_error,
        failing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderCheck {
    pub verdict: Verdict,
    /// Sample indices where the order fails.
    pub failing: Vec<usize>,
}

/// `lo <= mid <= hi` within 1e-9 at every sample.
pub fn check_sandwich<A, B, C>(lo: &A, mid: &B, hi: &C, samples: &[Point]) -> Result<OrderCheck>
where
    A: Evaluable + ?Sized,
    B: Evaluable + ?Sized,
    C: Evaluable + ?Sized,
{
    let mut failing = Vec::new();
    for (i, p) in samples.iter().enumerate() {
        let (l, m, h) = (lo.eval(p)?, mid.eval(p)?, hi.eval(p)?);
        if !(l <= m + CHECK_TOL && m <= h + CHECK_TOL) {
            failing.push(i);
        }
    }
    Ok(OrderCheck {
        verdict: verdict_of(samples.len(), failing.len()),
        failing,
    })
}

/// `max |f(p) - f(q)|` over sampled pairs with `d(p, q) < scale`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub scale: f64,
    pub value: f64,
    pub witness: Option<(usize, usize)>,
    pub pairs_in_scope: usize,
    pub seed: Option<u64>,
}

pub fn modulus_of_continuity<E: Evaluable + ?Sized>(
    f: &E,
    samples: &[Point],
    scale: f64,
    budget: Option<PairBudget>,
) -> Result<ModulusEstimate> {
    let domain = f.domain();
    let values = f.eval_many(samples)?;
    let mut out = ModulusEstimate {
        scale,
        value: 0.0,
        witness: None,
        pairs_in_scope: 0,
        seed: None,
    };
    out.seed = for_pairs(samples.len(), budget.unwrap_or_default(), |i, j| {
        if domain.dist(&samples[i], &samples[j]) < scale {
            out.pairs_in_scope += 1;
            let jump = (values[i] - values[j]).abs();
            if out.witness.is_none() || jump > out.value {
                out.value = jump;
                out.witness = Some((i, j));
            }
        }
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NecessityCheck {
    pub sup_error: f64,
    pub eps_prime: f64,
    pub scale: f64,
    pub modulus: ModulusEstimate,
    pub verdict: Verdict,
}

/// Given an approximant `f` of `phi` whose restrictions to `delta`-balls
/// are `k`-Lipschitz, and `eps' > 3 sup |f - phi|`, the modulus of `phi`
/// at scale `min(eps' / (3k), delta)` must not exceed `eps'`. Inconclusive
/// when `eps'` is too small for the measured error.
#[allow(clippy::too_many_arguments)]
pub fn check_uniform_continuity<P, F>(
    phi: &P,
    f: &F,
    samples: &[Point],
    k: f64,
    delta: f64,
    eps_prime: f64,
    budget: Option<PairBudget>,
) -> Result<NecessityCheck>
where
    P: Evaluable + ?Sized,
    F: Evaluable + ?Sized,
{
    if !(k > 0.0 && delta > 0.0 && eps_prime > 0.0) {
        return Err(LipError::arg("k, delta and eps' must be positive"));
    }
    let mut sup_error: f64 = 0.0;
    for p in samples {
        sup_error = sup_error.max((f.eval(p)? - phi.eval(p)?).abs());
    }
    let scale = (eps_prime / (3.0 * k)).min(delta);
    let modulus = modulus_of_continuity(phi, samples, scale, budget)?;
    let verdict = if !(eps_prime > 3.0 * sup_error) || modulus.pairs_in_scope == 0 {
        Verdict::Inconclusive
    } else if modulus.value <= eps_prime {
        Verdict::Pass
    } else {
        Verdict::Fail { violations: 1 }
    };
    Ok(NecessityCheck {
        sup_error,
        eps_prime,
        scale,
        modulus,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointwiseEntry {
    pub point: Point,
    pub radius: f64,
    pub modulus: f64,
}

/// Serializable summary of the measurements on one sample set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub global_constant: f64,
    pub witness: [Point; 2],
    pub pointwise: Vec<PointwiseEntry>,
    pub verdicts: BTreeMap<String, Verdict>,
    pub small_scale: Vec<ScaleCheck>,
    pub seed: Option<u64>,
}

impl LipschitzReport {
    /// Global constant plus pointwise moduli at radius `t` at every sample.
    /// The global constant is raised to the largest pointwise modulus when
    /// pair sampling missed it, so it bounds every pointwise entry.
    pub fn measure<E: Evaluable + ?Sized>(f: &E, samples: &[Point], t: f64, budget: Option<PairBudget>) -> Result<Self> {
        let global = empirical_lip(f, samples, budget)?;
        let mut constant = global.constant;
        let mut witness = [samples[global.witness.0].clone(), samples[global.witness.1].clone()];
        let mut pointwise = Vec::with_capacity(samples.len());
        for p in samples {
            let (m, w) = pointwise_with_witness(f, p, t, samples)?;
            if m > constant {
                constant = m;
                witness = [p.clone(), samples[w.expect("positive modulus has a witness")].clone()];
            }
            pointwise.push(PointwiseEntry {
                point: p.clone(),
                radius: t,
                modulus: m,
            });
        }
        Ok(Self {
            global_constant: constant,
            witness,
            pointwise,
            verdicts: BTreeMap::new(),
            small_scale: Vec::new(),
            seed: global.seed,
        })
    }

    pub fn with_verdict(mut self, name: impl Into<String>, verdict: Verdict) -> Self {
        self.verdicts.insert(name.into(), verdict);
        self
    }

    pub fn with_small_scale(mut self, check: ScaleCheck) -> Self {
        self.verdicts
            .insert(format!("small_scale(delta={}, K={})", check.delta, check.k), check.verdict.clone());
        self.small_scale.push(check);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
