//! Pasch–Hausdorff envelopes.
//!
//! For anchored data `phi` and `kappa > 0` the lower envelope is
//!
//! ```text
//! f_kappa(p) = min_a [ phi(a) + kappa * d(a, p) ]
//! ```
//!
//! the greatest `kappa`-Lipschitz minorant of `phi`. The upper envelope
//! `max_a [ phi(a) - kappa * d(a, p) ]` is the negated lower envelope of
//! `-phi`. An optional window restricts the scan to anchors with
//! `d(a, p) < window`.

use std::sync::Arc;

use crate::error::{LipError, Result};
use crate::function::{AnchoredFunction, Evaluable};
use crate::metric::{MetricDomain, Point, Transform};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Clone)]
pub struct EnvelopeSpec {
    source: AnchoredFunction,
    kappa: f64,
    side: Side,
    window: Option<f64>,
}

/// Envelope value together with the anchor attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeValue {
    pub value: f64,
    /// Lowest anchor index among the minimisers (maximisers for `Upper`).
    pub anchor: usize,
}

impl EnvelopeSpec {
    pub fn new(source: AnchoredFunction, kappa: f64, side: Side) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(LipError::arg(format!("kappa must be positive and finite, got {kappa}")));
        }
        Ok(Self {
            source,
            kappa,
            side,
            window: None,
        })
    }

    pub fn lower(source: AnchoredFunction, kappa: f64) -> Result<Self> {
        Self::new(source, kappa, Side::Lower)
    }

    pub fn upper(source: AnchoredFunction, kappa: f64) -> Result<Self> {
        Self::new(source, kappa, Side::Upper)
    }

    pub fn with_window(mut self, window: f64) -> Result<Self> {
        if !(window > 0.0) {
            return Err(LipError::arg(format!("window must be positive, got {window}")));
        }
        self.window = Some(window);
        Ok(self)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn window(&self) -> Option<f64> {
        self.window
    }

    pub fn source(&self) -> &AnchoredFunction {
        &self.source
    }

    pub fn eval_with_anchor(&self, p: &Point) -> Result<EnvelopeValue> {
        let domain = self.source.domain();
        domain.check_point(p)?;
        let mut best: Option<EnvelopeValue> = None;
        for (i, (a, &v)) in self.source.anchors().iter().zip(self.source.values()).enumerate() {
            let d = domain.dist(a, p);
            if let Some(w) = self.window {
                if !(d < w) {
                    continue;
                }
            }
            let cand = match self.side {
                Side::Lower => v + self.kappa * d,
                Side::Upper => v - self.kappa * d,
            };
            let better = match (best, self.side) {
                (None, _) => true,
                (Some(b), Side::Lower) => cand < b.value,
                (Some(b), Side::Upper) => cand > b.value,
            };
            if better {
                best = Some(EnvelopeValue { value: cand, anchor: i });
            }
        }
        best.ok_or_else(|| LipError::EmptyWindow {
            point: p.to_string(),
            window: self.window.unwrap_or(f64::INFINITY),
        })
    }
}

impl Evaluable for EnvelopeSpec {
    fn eval(&self, p: &Point) -> Result<f64> {
        self.eval_with_anchor(p).map(|e| e.value)
    }

    fn domain(&self) -> &MetricDomain {
        self.source.domain()
    }
}

/// Evaluate an envelope at `p`.
pub fn envelope_eval(spec: &EnvelopeSpec, p: &Point) -> Result<f64> {
    spec.eval(p)
}

/// Lower envelopes for a strictly increasing list of `kappa`s.
pub fn envelope_sequence(source: &AnchoredFunction, kappas: &[f64]) -> Result<Vec<EnvelopeSpec>> {
    if let Some(w) = kappas.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(LipError::arg(format!(
            "kappas must be strictly increasing, found {} then {}",
            w[0], w[1]
        )));
    }
    kappas
        .iter()
        .map(|&k| EnvelopeSpec::lower(source.clone(), k))
        .collect()
}

/// `N* = (max phi - min phi) / d_min` on an explicit domain: for every
/// `kappa >= N*` the lower envelope reproduces `phi` at every anchor.
pub fn convergence_index(source: &AnchoredFunction) -> Result<f64> {
    if !source.domain().is_explicit() {
        return Err(LipError::UnsupportedDomain(
            "convergence index needs an explicit finite domain".into(),
        ));
    }
    match source.min_separation() {
        None => Ok(0.0),
        Some(d_min) => Ok((source.max_value() - source.min_value()) / d_min),
    }
}

/// Lower envelope at 0 of the identity sampled at `{0, -r, r}` on the line
/// with the bounded metric `t / (1 + t)`, one value per radius.
///
/// The values fall below `-r + kappa`, so no envelope of an unbounded-below
/// function can stay under it.
pub fn divergence_probe(kappa: f64, radii: &[f64]) -> Result<Vec<f64>> {
    let domain = Arc::new(MetricDomain::line().with_transform(Transform::Bounded));
    radii
        .iter()
        .map(|&r| {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(LipError::arg(format!("radius must be finite and nonnegative, got {r}")));
            }
            let xs: Vec<f64> = if r == 0.0 { vec![0.0] } else { vec![0.0, -r, r] };
            let phi = AnchoredFunction::new(
                domain.clone(),
                xs.iter().copied().map(Point::scalar).collect(),
                xs.clone(),
            )?;
            EnvelopeSpec::lower(phi, kappa)?.eval(&Point::scalar(0.0))
        })
        .collect()
}
