//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p lipkit-cli --test acceptance`. Set
//! `LIPKIT_BLESS=1` to rewrite the golden CLI outputs.

#[path = "support/cases.rs"]
mod cases;
#[path = "support/gen.rs"]
mod gen;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use lipkit::approx::{
    fine_approximation, insert_between, monotone_approximation, monotone_convergence_n, small_scale_approximation,
    uniform_approximation, LevelGrid, SmallScaleSpec, ToleranceField,
};
use lipkit::envelope::{convergence_index, divergence_probe, EnvelopeSpec};
use lipkit::extension::{ExtensionMode, ExtensionSpec, LambdaPolicy};
use lipkit::io::{parse_cover, parse_explicit_domain, read_anchor_csv};
use lipkit::partition::{build_partition, Cover};
use lipkit::verify::{check_small_scale, check_uniform_continuity, empirical_lip, PairBudget, Verdict};
use lipkit::{AnchoredFunction, Evaluable, FnEval, MetricDomain, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixtures_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn lip<T>(r: lipkit::Result<T>) -> Result<T, String> {
    r.map_err(|e| format!("error: {e}"))
}

fn anchors(name: &str, domain: Arc<MetricDomain>) -> Result<AnchoredFunction, String> {
    lip(read_anchor_csv(read(name).as_bytes(), &domain).and_then(|t| t.into_function(domain.clone())))
}

fn explicit(domain: &str, phi: &str) -> Result<AnchoredFunction, String> {
    let d = Arc::new(lip(parse_explicit_domain(&read(domain)))?);
    anchors(phi, d)
}

fn plane() -> Arc<MetricDomain> {
    Arc::new(MetricDomain::euclidean(2))
}

fn line() -> Arc<MetricDomain> {
    Arc::new(MetricDomain::line())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_plane_point(r: &mut ChaCha8Rng) -> Point {
    Point::Coords(vec![r.random(), r.random()])
}

fn dist2(p: &Point, q: &Point) -> f64 {
    let (a, b) = (p.coords().unwrap(), q.coords().unwrap());
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn mw_suite() -> Outcome {
    let start = Instant::now();
    let phi = anchors("mw_anchors.csv", plane())?;
    let lo = lip(ExtensionSpec::new(phi.clone(), ExtensionMode::Minimal, LambdaPolicy::Auto, None))?;
    let hi = lip(lo.with_mode(ExtensionMode::Maximal))?;
    let lambda = match lo.lambda() {
        lipkit::extension::Lambda::Constant(l) => *l,
        other => return Err(format!("unexpected lambda {other:?}")),
    };
    let mut r = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let (p, q) = (random_plane_point(&mut r), random_plane_point(&mut r));
        let d = dist2(&p, &q);
        for f in [&lo, &hi] {
            let excess = (lip(f.eval(&p))? - lip(f.eval(&q))?).abs() - lambda * d;
            worst = worst.max(excess);
        }
    }
    ensure(worst <= 1e-9, || format!("Lipschitz bound exceeded by {worst:e}"))?;
    for (a, v) in phi.anchors().iter().zip(phi.values()) {
        let (m, p) = lip(lo.pair(a))?;
        ensure((m - v).abs() <= 1e-12 && (p - v).abs() <= 1e-12, || {
            format!("anchor {a}: phi {v}, extensions {m} and {p}")
        })?;
    }
    for _ in 0..500 {
        let q = random_plane_point(&mut r);
        let (m, p) = lip(lo.pair(&q))?;
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let c = t * m + (1.0 - t) * p;
            ensure(m <= c + 1e-12 && c <= p + 1e-12, || format!("sandwich fails at {q} for t={t}"))?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 2.0, || format!("runtime {secs:.3} s exceeds 2 s"))?;
    Ok(format!(
        "lambda={lambda:.4}, max excess {worst:.2e} over 1000 pairs, 50 anchors exact, 500 queries sandwiched ({secs:.3} s)"
    ))
}

fn envelope_suite() -> Outcome {
    let start = Instant::now();
    let phi = explicit("explicit100_domain.json", "explicit100_phi.csv")?;
    let points = phi.anchors().to_vec();
    let ci = lip(convergence_index(&phi))?;
    let lower = |k: f64| -> Result<Vec<f64>, String> {
        let e = lip(EnvelopeSpec::lower(phi.clone(), k))?;
        lip(e.eval_many(&points))
    };

    let mut kappas = vec![1.0];
    while *kappas.last().unwrap() < ci {
        kappas.push(kappas.last().unwrap() * 2.0);
    }
    let mut prev = lower(kappas[0])?;
    for &k in &kappas[1..] {
        let cur = lower(k)?;
        ensure(prev.iter().zip(&cur).all(|(a, b)| a <= b), || format!("not monotone at kappa={k}"))?;
        prev = cur;
    }

    let fixed = lower(ci)?;
    let fp_err = fixed.iter().zip(phi.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(fp_err <= 1e-12, || format!("fixed point off by {fp_err:e} at kappa={ci}"))?;

    let neg = lip(phi.map_values(|v| -v))?;
    for &k in &kappas {
        let up = lip(lip(EnvelopeSpec::upper(phi.clone(), k))?.eval_many(&points))?;
        let dual = lip(lip(EnvelopeSpec::lower(neg.clone(), k))?.eval_many(&points))?;
        ensure(up.iter().zip(&dual).all(|(u, d)| *u == -d), || format!("duality not exact at kappa={k}"))?;
    }

    // minorants: max of downward cones, shifted under phi
    let domain = phi.domain();
    let mut r = ChaCha8Rng::seed_from_u64(12);
    let mut worst = f64::NEG_INFINITY;
    for trial in 0..100 {
        let k = [1.0, 2.0, 4.0, 8.0, 16.0][trial % 5];
        let cones: Vec<(usize, f64)> = (0..r.random_range(1..6))
            .map(|_| (r.random_range(0..points.len()), r.random_range(-1.0..1.0)))
            .collect();
        let raw: Vec<f64> = points
            .iter()
            .map(|p| {
                cones
                    .iter()
                    .map(|&(c, h)| h - k * domain.distance(&points[c], p).unwrap())
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let shift = raw.iter().zip(phi.values()).map(|(g, v)| g - v).fold(f64::NEG_INFINITY, f64::max);
        let f = lower(k)?;
        for (g, fk) in raw.iter().zip(&f) {
            worst = worst.max(g - shift - fk);
        }
    }
    ensure(worst <= 1e-9, || format!("a minorant exceeds the envelope by {worst:e}"))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 1.0, || format!("runtime {secs:.3} s exceeds 1 s"))?;
    Ok(format!(
        "{} kappas monotone, fixed point at kappa={ci:.3} (err {fp_err:.1e}), duality exact, 100 minorants below ({secs:.3} s)",
        kappas.len()
    ))
}

fn divergence() -> Outcome {
    let radii: Vec<f64> = (1..=6).map(|e| 10f64.powi(e)).collect();
    let vals = lip(divergence_probe(1.0, &radii))?;
    for (i, (&r, &v)) in radii.iter().zip(&vals).enumerate() {
        ensure(v < -(r - 1.0), || format!("r={r}: value {v} not below {}", -(r - 1.0)))?;
        if i > 0 {
            ensure(v < vals[i - 1], || format!("r={r}: value {v} does not decrease"))?;
        }
    }
    Ok(format!("values {vals:?}"))
}

fn partition_suite() -> Outcome {
    let samples = lip(lipkit::io::read_points_csv(read("pou_points.csv").as_bytes(), &plane()))?;
    let mut worst_sum: f64 = 0.0;
    for c in 0..gen::BALL_COVERS {
        let domain = plane();
        let sets = lip(parse_cover(&read(&format!("pou_cover_{c}.json")), &domain))?;
        ensure(sets.len() == 10, || format!("cover {c} has {} sets", sets.len()))?;
        let cover = lip(Cover::new(domain, sets, None).and_then(|c| c.with_samples(&samples)))?;
        let pou = lip(build_partition(cover))?;
        for p in &samples {
            let t = lip(pou.terms(p))?;
            let sum: f64 = t.xi.iter().sum();
            worst_sum = worst_sum.max((sum - 1.0).abs());
            ensure((sum - 1.0).abs() <= 1e-12, || format!("cover {c}: sum {sum} at {p}"))?;
            for (n, &x) in t.xi.iter().enumerate() {
                ensure((0.0..=1.0).contains(&x), || format!("cover {c}: xi_{n} = {x} at {p}"))?;
                if x > 0.0 {
                    ensure(lip(pou.cover().contains(n, p))?, || format!("cover {c}: xi_{n} > 0 outside set {n} at {p}"))?;
                }
            }
            let v = lip(pou.vanish_index(p))?;
            for n in v..t.gamma.len() {
                ensure(t.gamma[n] == 0.0, || format!("cover {c}: gamma at position {n} >= {v} is {}", t.gamma[n]))?;
            }
        }
    }

    let domain = Arc::new(lip(parse_explicit_domain(&read("three_domain.json")))?);
    let sets = lip(parse_cover(&read("three_cover.json"), &domain))?;
    let pou = lip(build_partition(lip(Cover::new(domain, sets, None))?))?;
    let expect = [[1.0, 11.0 / 14.0, 0.0], [0.0, 3.0 / 14.0, 1.0]];
    for (i, row) in expect.iter().enumerate() {
        for (p, &want) in row.iter().enumerate() {
            let got = lip(pou.xi(i, &Point::Index(p)))?;
            ensure((got - want).abs() <= 1e-12, || format!("worked example: xi_{} at p{p} is {got}, want {want}", i + 1))?;
        }
    }
    Ok(format!(
        "10 covers x 200 samples, max |sum - 1| = {worst_sum:.1e}, worked example exact"
    ))
}

fn monotone() -> Outcome {
    let phi = explicit("three_domain.json", "three_phi.csv")?;
    let pts = phi.anchors().to_vec();
    let steps = lip(monotone_approximation(&phi, &[1, 2, 5]))?;
    let expect = [[0.0, 1.0, 1.0], [0.0, 2.0, 1.0], [0.0, 5.0, 1.0]];
    for (s, want) in steps.iter().zip(expect) {
        let got = lip(s.eval_many(&pts))?;
        ensure(got == want, || format!("f_{} = {got:?}, want {want:?}", s.n))?;
    }

    let phi = explicit("explicit100_domain.json", "explicit100_phi.csv")?;
    let pts = phi.anchors().to_vec();
    let n_star = lip(monotone_convergence_n(&phi))?;
    let ns: Vec<usize> = (1..=n_star).collect();
    let steps = lip(monotone_approximation(&phi, &ns))?;
    let mut prev = vec![f64::NEG_INFINITY; pts.len()];
    for s in &steps {
        let cur = lip(s.eval_many(&pts))?;
        ensure(prev.iter().zip(&cur).all(|(a, b)| a <= b), || format!("decrease at n={}", s.n))?;
        prev = cur;
    }
    ensure(prev.as_slice() == phi.values(), || format!("f_{n_star} differs from phi"))?;
    Ok(format!("three-point sequence exact, 100-point sequence nondecreasing and equal to phi at n={n_star}"))
}

fn uniform_fine() -> Outcome {
    let phi = anchors("wave_phi.csv", line())?;
    let tol = anchors("wave_tol.csv", line())?;
    let pts = phi.anchors().to_vec();

    let grid = lip(LevelGrid::covering(phi.min_value(), phi.max_value(), 0.05))?;
    let f = lip(uniform_approximation(&phi, &grid))?;
    let vals = lip(f.eval_many(&pts))?;
    let err = vals.iter().zip(phi.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(err < 0.05, || format!("uniform error {err} not below 0.05"))?;
    let lip_u = lip(empirical_lip(&f, &pts, None))?.constant;
    ensure(lip_u.is_finite(), || "uniform approximant has infinite slope".into())?;

    let g = lip(fine_approximation(&phi, &lip(ToleranceField::sampled(tol.clone()))?))?;
    let gv = lip(g.eval_many(&pts))?;
    let mut ratio: f64 = 0.0;
    for ((p, (a, b)), t) in pts.iter().zip(gv.iter().zip(phi.values())).zip(tol.values()) {
        ensure((a - b).abs() < *t, || format!("fine error {} not below tol {t} at {p}", (a - b).abs()))?;
        ratio = ratio.max((a - b).abs() / t);
    }
    let lip_f = lip(empirical_lip(&g, &pts, None))?.constant;
    ensure(lip_f.is_finite(), || "fine approximant has infinite slope".into())?;
    Ok(format!(
        "uniform max err {err:.4} < 0.05 (lip {lip_u:.2}), fine max err/tol {ratio:.3} < 1 (lip {lip_f:.2})"
    ))
}

fn insertion() -> Outcome {
    let below = anchors("insert_lower.csv", line())?;
    let above = anchors("insert_upper.csv", line())?;
    let gap = below.values().iter().zip(above.values()).map(|(l, u)| u - l).fold(f64::INFINITY, f64::min);
    ensure(gap >= 0.2, || format!("fixture gap {gap} below 0.2"))?;
    let grid = lip(LevelGrid::regular(below.min_value(), above.max_value(), 0.05))?;
    let f = lip(insert_between(&below, &above, &grid))?;
    let vals = lip(f.eval_many(below.anchors()))?;
    let mut margin = f64::INFINITY;
    for ((v, l), u) in vals.iter().zip(below.values()).zip(above.values()) {
        ensure(l < v && v < u, || format!("{l} < {v} < {u} fails"))?;
        margin = margin.min((v - l).min(u - v));
    }
    Ok(format!("{} samples strictly inside, min margin {margin:.4}", vals.len()))
}

struct SmallScaleRun {
    f: lipkit::approx::SmallScaleApproximation,
    samples: Vec<Point>,
    spec: SmallScaleSpec,
}

fn sqrt_domain() -> Result<(AnchoredFunction, Vec<Point>), String> {
    let xs: Vec<f64> = (0..10_000).map(|i| 100.0 * i as f64 / 9_999.0).collect();
    let phi = lip(AnchoredFunction::on_line(&xs, &xs.iter().map(|x| x.sqrt()).collect::<Vec<_>>()))?;
    // offsets put pairs inside the delta window
    let mut samples = phi.anchors().to_vec();
    samples.extend(xs.iter().map(|x| Point::scalar(x + 0.002)));
    Ok((phi, samples))
}

fn small_scale(run: &mut Option<SmallScaleRun>) -> Outcome {
    let start = Instant::now();
    let (phi, samples) = sqrt_domain()?;
    let spec = lip(SmallScaleSpec::new(0.005, 21, 0.1))?;
    let f = lip(small_scale_approximation(&phi, spec))?;

    let at_anchors = lip(f.eval_many(phi.anchors()))?;
    for ((a, v), y) in phi.anchors().iter().zip(phi.values()).zip(&at_anchors) {
        ensure(v - 0.1 <= *y && *y <= *v, || format!("at {a}: f = {y}, phi = {v}"))?;
    }
    let check = lip(check_small_scale(&f, &samples, spec.delta, spec.k as f64, Some(PairBudget::exhaustive())))?;
    ensure(check.verdict == Verdict::Pass, || format!("K-check: {:?}", check.verdict))?;
    let agree = lip(f.window_agreement(&samples))?;
    ensure(agree.agrees(1e-12), || format!("windows differ by {:e}", agree.max_diff))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("runtime {secs:.2} s exceeds 10 s"))?;
    let out = format!(
        "bounds hold at 10000 samples, K-check passes on {} pairs with d < delta, windows agree within {:.1e} ({secs:.2} s)",
        check.pairs_in_scope, agree.max_diff
    );
    *run = Some(SmallScaleRun { f, samples, spec });
    Ok(out)
}

fn necessity(run: &Option<SmallScaleRun>) -> Outcome {
    let run = run.as_ref().ok_or("criterion 8 produced no approximant")?;
    let phi = FnEval::new(line(), |p: &Point| p.abscissa().sqrt());
    let c = lip(check_uniform_continuity(
        &phi,
        &run.f,
        &run.samples,
        run.spec.k as f64,
        run.spec.delta,
        0.5,
        Some(PairBudget::exhaustive()),
    ))?;
    ensure(c.verdict == Verdict::Pass, || format!("{:?} (sup error {}, modulus {})", c.verdict, c.sup_error, c.modulus.value))?;
    Ok(format!(
        "modulus {:.4} <= 0.5 at scale {:.4} over {} pairs (sup |f - phi| = {:.4})",
        c.modulus.value, c.scale, c.modulus.pairs_in_scope, c.sup_error
    ))
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_lipkit"))
        .args(args)
        .current_dir(fixtures_dir())
        .output()
        .map_err(|e| format!("spawn: {e}"))?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let bless = std::env::var_os("LIPKIT_BLESS").is_some();
    for (name, body) in gen::fixtures() {
        ensure(read(&name) == body, || format!("fixture {name} differs from its generator"))?;
    }
    let mut goldens = 0;
    for case in cases::CASES {
        let first = run_cli(case.args)?;
        let second = run_cli(case.args)?;
        ensure(first == second, || format!("{}: outputs differ between runs", case.name))?;
        if let Some(c) = case.golden_for {
            let path = golden_dir().join(format!("c{c}_{}.out", case.name));
            if bless {
                std::fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
                std::fs::write(&path, &first).map_err(|e| e.to_string())?;
            }
            let want = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            ensure(want == first, || format!("{}: output differs from {}", case.name, path.display()))?;
            goldens += 1;
        }
    }
    Ok(format!("{} commands byte-identical across runs, {goldens} goldens match", cases::CASES.len()))
}

fn main() {
    let mut small = None;
    let results: Vec<(u8, &str, Outcome)> = vec![
        (1, "McShane-Whitney extensions", mw_suite()),
        (2, "envelopes", envelope_suite()),
        (3, "divergence probe", divergence()),
        (4, "partition of unity", partition_suite()),
        (5, "monotone approximation", monotone()),
        (6, "uniform and fine approximation", uniform_fine()),
        (7, "insertion", insertion()),
        (8, "small-scale approximation", small_scale(&mut small)),
        (9, "uniform continuity", necessity(&small)),
        (10, "CLI determinism", determinism()),
    ];
    let mut failed = 0;
    for (n, name, r) in &results {
        match r {
            Ok(msg) => println!("criterion {n:>2} PASS {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n:>2} FAIL {name}: {msg}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
