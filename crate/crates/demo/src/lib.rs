//! Curve sampling for the browser demo. Everything lives on the real line.
//!
//! The plain functions are usable natively; on `wasm32` they are exported
//! through `wasm-bindgen` with the same names.

use std::sync::Arc;

use lipkit::envelope::EnvelopeSpec;
use lipkit::extension::{pairwise_constant, ExtensionMode, ExtensionSpec, LambdaPolicy};
use lipkit::partition::{build_partition, Cover, CoverSet};
use lipkit::{AnchoredFunction, Ball, Evaluable, LipError, MetricDomain, Point};

type Res<T> = Result<T, String>;

fn err(e: LipError) -> String {
    e.to_string()
}

fn source(anchors_x: &[f64], values: &[f64]) -> Res<AnchoredFunction> {
    AnchoredFunction::on_line(anchors_x, values).map_err(err)
}

/// Exact pairwise Lipschitz constant of the anchor data.
pub fn auto_lambda(anchors_x: &[f64], values: &[f64]) -> Res<f64> {
    Ok(pairwise_constant(&source(anchors_x, values)?).0)
}

/// Minimal, maximal and midpoint extensions at `xs`, concatenated
/// (`3 * xs.len()` values). `lambda <= 0` selects the automatic constant.
pub fn mw_curves(anchors_x: &[f64], values: &[f64], lambda: f64, xs: &[f64]) -> Res<Vec<f64>> {
    let policy = if lambda > 0.0 {
        LambdaPolicy::Constant(lambda)
    } else {
        LambdaPolicy::Auto
    };
    let spec = ExtensionSpec::new(source(anchors_x, values)?, ExtensionMode::Midpoint, policy, None).map_err(err)?;
    let mut lo = Vec::with_capacity(xs.len());
    let mut hi = Vec::with_capacity(xs.len());
    for &x in xs {
        let (a, b) = spec.pair(&Point::scalar(x)).map_err(err)?;
        lo.push(a);
        hi.push(b);
    }
    let mid: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
    Ok([lo, hi, mid].concat())
}

/// Lower then upper envelope at `xs` (`2 * xs.len()` values).
pub fn envelope_curve(anchors_x: &[f64], values: &[f64], kappa: f64, xs: &[f64]) -> Res<Vec<f64>> {
    let phi = source(anchors_x, values)?;
    let pts: Vec<Point> = xs.iter().copied().map(Point::scalar).collect();
    let lower = EnvelopeSpec::lower(phi.clone(), kappa).and_then(|e| e.eval_many(&pts)).map_err(err)?;
    let upper = EnvelopeSpec::upper(phi, kappa).and_then(|e| e.eval_many(&pts)).map_err(err)?;
    Ok([lower, upper].concat())
}

/// Partition of unity for the open intervals `(c - r, c + r)`, one block
/// of `xs.len()` values per interval. Uncovered points give `NaN`.
pub fn partition_curves(centers: &[f64], radii: &[f64], xs: &[f64]) -> Res<Vec<f64>> {
    if centers.len() != radii.len() {
        return Err(format!("{} centers but {} radii", centers.len(), radii.len()));
    }
    let sets = centers
        .iter()
        .zip(radii)
        .map(|(&c, &r)| Ball::new(Point::scalar(c), r).map(CoverSet::Ball))
        .collect::<lipkit::Result<Vec<_>>>()
        .map_err(err)?;
    let m = sets.len();
    let cover = Cover::new(Arc::new(MetricDomain::line()), sets, None).map_err(err)?;
    let pou = build_partition(cover).map_err(err)?;
    let mut out = vec![f64::NAN; m * xs.len()];
    for (j, &x) in xs.iter().enumerate() {
        match pou.terms(&Point::scalar(x)) {
            Ok(t) => {
                for (i, v) in t.xi.into_iter().enumerate() {
                    out[i * xs.len() + j] = v;
                }
            }
            Err(LipError::Uncovered { .. }) => {}
            Err(e) => return Err(err(e)),
        }
    }
    Ok(out)
}

#[cfg(target_arch = "wasm32")]
mod wasm {
    use wasm_bindgen::prelude::*;

    fn js(r: super::Res<Vec<f64>>) -> Result<Vec<f64>, JsError> {
        r.map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen]
    pub fn auto_lambda(anchors_x: &[f64], values: &[f64]) -> Result<f64, JsError> {
        super::auto_lambda(anchors_x, values).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen]
    pub fn mw_curves(anchors_x: &[f64], values: &[f64], lambda: f64, xs: &[f64]) -> Result<Vec<f64>, JsError> {
        js(super::mw_curves(anchors_x, values, lambda, xs))
    }

    #[wasm_bindgen]
    pub fn envelope_curve(anchors_x: &[f64], values: &[f64], kappa: f64, xs: &[f64]) -> Result<Vec<f64>, JsError> {
        js(super::envelope_curve(anchors_x, values, kappa, xs))
    }

    #[wasm_bindgen]
    pub fn partition_curves(centers: &[f64], radii: &[f64], xs: &[f64]) -> Result<Vec<f64>, JsError> {
        js(super::partition_curves(centers, radii, xs))
    }
}
