use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use lipkit::approx::{
    fine_approximation, insert_between, monotone_approximation, small_scale_approximation, uniform_approximation,
    LevelGrid, SmallScaleSpec, ToleranceField,
};
use lipkit::blend::{extend_locally_lipschitz, extend_range_bounded};
use lipkit::envelope::{EnvelopeSpec, Side};
use lipkit::extension::{ExtensionMode, ExtensionSpec, Lambda, LambdaPolicy, UnboundedExtension};
use lipkit::io::{
    coordinate_columns, fmt_f64, parse_cover, parse_explicit_domain, partition_table, plot_table, read_anchor_csv,
    read_points_csv, CsvTable,
};
use lipkit::partition::{build_partition, Cover};
use lipkit::verify::{check_extension, check_sandwich, check_small_scale, LipschitzReport, PairBudget, Verdict, CHECK_TOL};
use lipkit::{AnchoredFunction, Evaluable, MetricDomain, Point, Transform};

use crate::{invalid, read_file, write_output, CliError, RunConfig};

type Res<T> = Result<T, CliError>;

pub(crate) fn dispatch(cfg: &RunConfig) -> Res<()> {
    match cfg.command.as_deref() {
        Some("extend") => extend(cfg),
        Some("envelope") => envelope(cfg),
        Some("approx") => approx(cfg),
        Some("pou") => pou(cfg),
        Some("check") => check(cfg),
        Some(other) => Err(invalid(format!(
            "unknown command {other:?}; expected extend, envelope, approx, pou or check"
        ))),
        None => Err(invalid("missing command; expected extend, envelope, approx, pou or check")),
    }
}

fn require<'a, T>(v: &'a Option<T>, what: &str) -> Res<&'a T> {
    v.as_ref().ok_or_else(|| invalid(format!("missing {what}")))
}

/// Explicit domain from `--domain`, otherwise `R^d` with `d` read from the
/// header of `csv`.
fn domain_for(cfg: &RunConfig, csv: Option<&str>) -> Res<Arc<MetricDomain>> {
    if let Some(path) = &cfg.domain {
        if cfg.bounded {
            return Err(invalid("--bounded applies to Euclidean domains only"));
        }
        return Ok(Arc::new(parse_explicit_domain(&read_file(path)?)?));
    }
    let csv = csv.ok_or_else(|| invalid("cannot infer the dimension: give --anchors, --queries or --domain"))?;
    let dim = coordinate_columns(csv.as_bytes())?;
    if dim == 0 {
        return Err(invalid("CSV header has no coordinate columns"));
    }
    let mut d = MetricDomain::euclidean(dim);
    if cfg.bounded {
        d = d.with_transform(Transform::Bounded);
    }
    Ok(Arc::new(d))
}

fn load_anchored(path: &Path, domain: &Arc<MetricDomain>) -> Res<AnchoredFunction> {
    Ok(read_anchor_csv(read_file(path)?.as_bytes(), domain)?.into_function(domain.clone())?)
}

fn load_source(cfg: &RunConfig, cmd: &str) -> Res<(Arc<MetricDomain>, AnchoredFunction)> {
    let path = require(&cfg.anchors, &format!("--anchors for {cmd}"))?;
    let text = read_file(path)?;
    let domain = domain_for(cfg, Some(&text))?;
    let source = read_anchor_csv(text.as_bytes(), &domain)?.into_function(domain.clone())?;
    Ok((domain, source))
}

/// `--queries`, else every point of an explicit domain, else `fallback`.
fn load_queries(cfg: &RunConfig, domain: &MetricDomain, fallback: &[Point]) -> Res<Vec<Point>> {
    match &cfg.queries {
        Some(path) => Ok(read_points_csv(read_file(path)?.as_bytes(), domain)?),
        None => Ok(domain.points().unwrap_or_else(|| fallback.to_vec())),
    }
}

/// Order-preserving parallel map.
fn par_eval<T: Send>(queries: &[Point], f: impl Fn(&Point) -> lipkit::Result<T> + Sync + Send) -> Res<Vec<T>> {
    Ok(queries.par_iter().map(f).collect::<lipkit::Result<Vec<T>>>()?)
}

fn emit(cfg: &RunConfig, table: &CsvTable, plot: Vec<(String, Vec<(f64, f64)>)>) -> Res<()> {
    write_output(cfg.out.as_deref(), &table.to_csv())?;
    if let Some(p) = &cfg.plot {
        write_output(Some(p), &plot_table(&plot).to_csv())?;
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn parse_lambda(s: &str) -> Res<LambdaPolicy> {
    Ok(match s {
        "auto" => LambdaPolicy::Auto,
        "per-anchor" => LambdaPolicy::PerAnchor,
        "auto-per-anchor" => LambdaPolicy::AutoPerAnchor,
        num => LambdaPolicy::Constant(num.parse::<f64>().map_err(|_| {
            invalid(format!(
                "--lambda must be auto, per-anchor, auto-per-anchor or a nonnegative number, got {num:?}"
            ))
        })?),
    })
}

fn extend(cfg: &RunConfig) -> Res<()> {
    let (domain, source) = load_source(cfg, "extend")?;
    let queries = load_queries(cfg, &domain, source.anchors())?;
    let mode = cfg.mode.as_deref().unwrap_or("midpoint");
    match mode {
        "minimal" | "maximal" | "midpoint" | "bounded" => {
            if mode == "bounded" && cfg.bound.is_none() {
                return Err(invalid("extend --mode bounded needs --bound M"));
            }
            let policy = parse_lambda(cfg.lambda.as_deref().unwrap_or("auto"))?;
            let spec = ExtensionSpec::new(source, ExtensionMode::Midpoint, policy, cfg.bound)?;
            let lambda_used = match spec.lambda() {
                Lambda::Constant(l) => fmt_f64(*l),
                Lambda::PerAnchor(_) => "per-anchor".to_string(),
            };
            let has_bound = cfg.bound.is_some();
            let rows = par_eval(&queries, |q| {
                let (lo, hi) = spec.pair(q)?;
                let b = if has_bound { Some(spec.bounded(q)?) } else { None };
                Ok((lo, hi, spec.midpoint(q)?, b))
            })?;
            let mut t = CsvTable::new(&["query_id", "phi_minus", "phi_plus", "mid", "bounded", "lambda_used"]);
            let mut series: Vec<(String, Vec<(f64, f64)>)> =
                ["phi_minus", "phi_plus", "mid"].iter().map(|s| (s.to_string(), Vec::new())).collect();
            if has_bound {
                series.push(("bounded".into(), Vec::new()));
            }
            for (id, (q, (lo, hi, mid, b))) in queries.iter().zip(rows).enumerate() {
                t.push(vec![id.to_string(), fmt_f64(lo), fmt_f64(hi), fmt_f64(mid), opt(b), lambda_used.clone()]);
                let x = q.abscissa();
                series[0].1.push((x, lo));
                series[1].1.push((x, hi));
                series[2].1.push((x, mid));
                if let Some(b) = b {
                    series[3].1.push((x, b));
                }
            }
            emit(cfg, &t, series)
        }
        "unbounded" => {
            let ext = UnboundedExtension::new(&source)?;
            value_table(cfg, &queries, par_eval(&queries, |q| ext.eval(q))?)
        }
        "local" => {
            let path = require(&cfg.cover, "--cover for extend --mode local")?;
            let sets = parse_cover(&read_file(path)?, &domain)?;
            let cover = Cover::new(domain.clone(), sets, None)?;
            let mut subsets = Vec::with_capacity(cover.len());
            for n in 0..cover.len() {
                let mut u = Vec::new();
                for (i, a) in source.anchors().iter().enumerate() {
                    if cover.contains(n, a)? {
                        u.push(i);
                    }
                }
                subsets.push(u);
            }
            let values = match cfg.bound {
                Some(m) => {
                    let ext = extend_range_bounded(&source, &subsets, Some(cover), m, &queries)?;
                    par_eval(&queries, |q| ext.eval(q))?
                }
                None => {
                    let ext = extend_locally_lipschitz(&source, &subsets, Some(cover))?;
                    par_eval(&queries, |q| ext.eval(q))?
                }
            };
            value_table(cfg, &queries, values)
        }
        other => Err(invalid(format!(
            "unknown extend mode {other:?}; expected minimal, maximal, midpoint, bounded, unbounded or local"
        ))),
    }
}

fn value_table(cfg: &RunConfig, queries: &[Point], values: Vec<f64>) -> Res<()> {
    let mut t = CsvTable::new(&["query_id", "value"]);
    let mut s = Vec::with_capacity(values.len());
    for (id, (q, v)) in queries.iter().zip(values).enumerate() {
        t.push(vec![id.to_string(), fmt_f64(v)]);
        s.push((q.abscissa(), v));
    }
    emit(cfg, &t, vec![("value".into(), s)])
}

fn envelope(cfg: &RunConfig) -> Res<()> {
    if cfg.kappa.is_empty() {
        return Err(invalid("envelope needs --kappa (one or more positive slopes)"));
    }
    let (domain, source) = load_source(cfg, "envelope")?;
    let queries = load_queries(cfg, &domain, source.anchors())?;
    let side = match cfg.side.as_deref().unwrap_or("lower") {
        "lower" => Side::Lower,
        "upper" => Side::Upper,
        other => return Err(invalid(format!("--side must be lower or upper, got {other:?}"))),
    };
    let mut t = CsvTable::new(&["query_id", "kappa", "value", "argmin_anchor"]);
    let mut series = Vec::new();
    for &kappa in &cfg.kappa {
        let mut spec = EnvelopeSpec::new(source.clone(), kappa, side)?;
        if let Some(w) = cfg.window {
            spec = spec.with_window(w)?;
        }
        let vals = par_eval(&queries, |q| spec.eval_with_anchor(q))?;
        let mut s = Vec::with_capacity(vals.len());
        for (id, (q, v)) in queries.iter().zip(vals).enumerate() {
            t.push(vec![id.to_string(), fmt_f64(kappa), fmt_f64(v.value), v.anchor.to_string()]);
            s.push((q.abscissa(), v.value));
        }
        series.push((format!("kappa={}", fmt_f64(kappa)), s));
    }
    emit(cfg, &t, series)
}

struct ApproxRow {
    value: f64,
    phi: Option<f64>,
    bound: String,
}

fn approx_table(cfg: &RunConfig, queries: &[Point], groups: Vec<(String, Vec<ApproxRow>)>) -> Res<()> {
    let mut t = CsvTable::new(&["query_id", "value", "phi", "abs_err", "bound"]);
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    let single = groups.len() == 1;
    for (name, rows) in groups {
        let mut value = Vec::new();
        let mut phi = Vec::new();
        let mut err = Vec::new();
        for (id, (q, r)) in queries.iter().zip(rows).enumerate() {
            let e = r.phi.map(|p| (r.value - p).abs());
            t.push(vec![id.to_string(), fmt_f64(r.value), opt(r.phi), opt(e), r.bound]);
            let x = q.abscissa();
            value.push((x, r.value));
            if let (Some(p), Some(e)) = (r.phi, e) {
                phi.push((x, p));
                err.push((x, e));
            }
        }
        if single {
            series.push(("value".into(), value));
            series.push(("phi".into(), phi));
            series.push(("abs_err".into(), err));
        } else {
            if series.is_empty() {
                series.push(("phi".into(), phi));
            }
            series.push((format!("value_{name}"), value.clone()));
            series.push((format!("abs_err_{name}"), err));
        }
    }
    emit(cfg, &t, series)
}

fn rows_for(
    queries: &[Point],
    source: &AnchoredFunction,
    f: &dyn Evaluable,
    bound: impl Fn(&Point) -> Res<String> + Sync,
) -> Res<Vec<ApproxRow>> {
    let values = par_eval(queries, |q| f.eval(q))?;
    queries
        .iter()
        .zip(values)
        .map(|(q, value)| {
            Ok(ApproxRow {
                value,
                phi: source.value_at(q),
                bound: bound(q)?,
            })
        })
        .collect()
}

fn approx(cfg: &RunConfig) -> Res<()> {
    let method = require(&cfg.method, "approx method (monotone, uniform, fine, insert or small)")?.as_str();
    let (domain, source) = load_source(cfg, "approx")?;
    let queries = load_queries(cfg, &domain, source.anchors())?;
    let eps_for = |what: &str| {
        cfg.eps
            .ok_or_else(|| invalid(format!("approx {what} needs --eps")))
    };
    match method {
        "monotone" => {
            if cfg.n.is_empty() {
                return Err(invalid("approx monotone needs --n (increasing positive integers)"));
            }
            let steps = monotone_approximation(&source, &cfg.n)?;
            let mut groups = Vec::new();
            for s in &steps {
                let n = s.n.to_string();
                groups.push((format!("n={n}"), rows_for(&queries, &source, s, |_| Ok(n.clone()))?));
            }
            approx_table(cfg, &queries, groups)
        }
        "uniform" => {
            let eps = eps_for("uniform")?;
            let spacing = cfg.spacing.unwrap_or(eps / 2.0);
            let grid = LevelGrid::covering_with_spacing(source.min_value(), source.max_value(), eps, spacing)?;
            let f = uniform_approximation(&source, &grid)?;
            let b = fmt_f64(eps);
            let rows = rows_for(&queries, &source, &f, |_| Ok(b.clone()))?;
            approx_table(cfg, &queries, vec![("value".into(), rows)])
        }
        "fine" => {
            let tol = match (&cfg.tol, cfg.eps) {
                (Some(path), _) => ToleranceField::sampled(load_anchored(path, &domain)?)?,
                (None, Some(eps)) => ToleranceField::constant(eps)?,
                (None, None) => return Err(invalid("approx fine needs --tol PATH or --eps")),
            };
            let f = fine_approximation(&source, &tol)?;
            let rows = rows_for(&queries, &source, &f, |q| Ok(fmt_f64(tol.at(q)?)))?;
            approx_table(cfg, &queries, vec![("value".into(), rows)])
        }
        "insert" => {
            let step = eps_for("insert")?;
            let upper = load_anchored(require(&cfg.upper, "--upper for approx insert")?, &domain)?;
            let grid = LevelGrid::regular(source.min_value(), upper.max_value(), step)?;
            let f = insert_between(&source, &upper, &grid)?;
            let rows = rows_for(&queries, &source, &f, |q| Ok(fmt_f64(upper.eval(q)?)))?;
            approx_table(cfg, &queries, vec![("value".into(), rows)])
        }
        "small" => {
            let eps = eps_for("small")?;
            let spec = match (cfg.delta, cfg.k) {
                (Some(d), Some(k)) => SmallScaleSpec::new(d, k, eps)?,
                (None, None) => SmallScaleSpec::for_target(&source, eps)?,
                _ => return Err(invalid("approx small needs both --delta and --k, or neither")),
            };
            let f = small_scale_approximation(&source, spec)?;
            let agreement = f.window_agreement(&queries)?;
            if !agreement.agrees(1e-12) {
                eprintln!(
                    "lipkit: warning: delta and 2 delta windows differ by {} at {}",
                    agreement.max_diff,
                    agreement.worst.map(|p| p.to_string()).unwrap_or_default()
                );
            }
            let b = fmt_f64(eps);
            let rows = rows_for(&queries, &source, &f, |_| Ok(b.clone()))?;
            approx_table(cfg, &queries, vec![("value".into(), rows)])
        }
        other => Err(invalid(format!(
            "unknown approx method {other:?}; expected monotone, uniform, fine, insert or small"
        ))),
    }
}

fn pou(cfg: &RunConfig) -> Res<()> {
    let path = require(&cfg.cover, "--cover for pou")?;
    let anchors_text = cfg.anchors.as_deref().map(read_file).transpose()?;
    let queries_text = cfg.queries.as_deref().map(read_file).transpose()?;
    let domain = domain_for(cfg, anchors_text.as_deref().or(queries_text.as_deref()))?;
    let carrier = anchors_text
        .map(|t| read_anchor_csv(t.as_bytes(), &domain)?.into_function(domain.clone()))
        .transpose()?;
    let queries = match (&queries_text, domain.points(), &carrier) {
        (Some(t), _, _) => read_points_csv(t.as_bytes(), &domain)?,
        (None, Some(all), _) => all,
        (None, None, Some(c)) => c.anchors().to_vec(),
        (None, None, None) => return Err(invalid("pou on a Euclidean domain needs --queries or --anchors")),
    };
    let sets = parse_cover(&read_file(path)?, &domain)?;
    let cover = Cover::new(domain.clone(), sets, carrier)?.with_samples(&queries)?;
    let pou = build_partition(cover)?;
    let table = partition_table(&pou, &queries)?;
    let mut series = Vec::new();
    for n in 0..pou.len() {
        let mut s = Vec::new();
        for q in &queries {
            s.push((q.abscissa(), pou.xi(n, q)?));
        }
        series.push((format!("xi_{n}"), s));
    }
    emit(cfg, &table, series)
}

fn check(cfg: &RunConfig) -> Res<()> {
    let (domain, source) = load_source(cfg, "check")?;
    let budget = cfg.seed.map(PairBudget::with_seed);
    let radius = cfg.radius.unwrap_or(1.0);
    if radius.is_nan() || radius <= 0.0 {
        return Err(invalid(format!("--radius must be positive, got {radius}")));
    }
    let mode = cfg.mode.as_deref().unwrap_or("data");
    let mut samples = source.anchors().to_vec();
    let mut report = match mode {
        "data" => LipschitzReport::measure(&source, &samples, radius, budget)?,
        "minimal" | "maximal" | "midpoint" | "unbounded" => {
            if let Some(path) = &cfg.queries {
                samples.extend(read_points_csv(read_file(path)?.as_bytes(), &domain)?);
            }
            if mode == "unbounded" {
                let ext = UnboundedExtension::new(&source)?;
                let r = LipschitzReport::measure(&ext, &samples, radius, budget)?;
                r.with_verdict("extension", check_extension(&ext, &source)?.verdict)
            } else {
                let policy = parse_lambda(cfg.lambda.as_deref().unwrap_or("auto"))?;
                let m = match mode {
                    "minimal" => ExtensionMode::Minimal,
                    "maximal" => ExtensionMode::Maximal,
                    _ => ExtensionMode::Midpoint,
                };
                let ext = ExtensionSpec::new(source.clone(), m, policy, None)?;
                let lo = ext.with_mode(ExtensionMode::Minimal)?;
                let hi = ext.with_mode(ExtensionMode::Maximal)?;
                let mut r = LipschitzReport::measure(&ext, &samples, radius, budget)?
                    .with_verdict("extension", check_extension(&ext, &source)?.verdict)
                    .with_verdict("sandwich", check_sandwich(&lo, &ext, &hi, &samples)?.verdict);
                if let Lambda::Constant(l) = ext.lambda() {
                    let v = if r.global_constant <= l + CHECK_TOL {
                        Verdict::Pass
                    } else {
                        Verdict::Fail { violations: 1 }
                    };
                    r = r.with_verdict("lipschitz_bound", v);
                }
                if let (Some(d), Some(k)) = (cfg.delta, cfg.k) {
                    r = r.with_small_scale(check_small_scale(&ext, &samples, d, k as f64, budget)?);
                }
                return finish_check(cfg, r);
            }
        }
        other => {
            return Err(invalid(format!(
                "unknown check mode {other:?}; expected data, minimal, maximal, midpoint or unbounded"
            )))
        }
    };
    if let (Some(d), Some(k)) = (cfg.delta, cfg.k) {
        report = report.with_small_scale(check_small_scale(&source, &samples, d, k as f64, budget)?);
    }
    finish_check(cfg, report)
}

fn finish_check(cfg: &RunConfig, report: LipschitzReport) -> Res<()> {
    let mut text = report.to_json();
    text.push('\n');
    write_output(cfg.out.as_deref(), &text)
}
