//! Seeded generator for the checked-in fixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BALL_COVERS: usize = 10;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

fn points_2d(r: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 2]> {
    (0..n).map(|_| [r.random::<f64>(), r.random::<f64>()]).collect()
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// `(file name, contents)` for every fixture.
pub fn fixtures() -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut add = |name: &str, body: String| out.push((name.to_string(), body));

    // two-point line data
    add("line2_anchors.csv", csv("x,value", ["0,0".into(), "3,3".into()]));
    add("line2_queries.csv", csv("x", ["1".into()]));

    // three anchors on the line with two overlapping balls
    add("line3_anchors.csv", csv("x,value", ["0,0".into(), "1,5".into(), "3,1".into()]));
    add(
        "line3_cover.json",
        r#"{"sets":[{"type":"ball","center":0,"radius":1.5},{"type":"ball","center":2.5,"radius":1.6}]}"#.to_string() + "\n",
    );
    add("line3_queries.csv", csv("x", (0..=16).map(|i| format!("{}", -1.0 + 0.25 * i as f64))));

    // three-point explicit space {0, 1, 2}
    add(
        "three_domain.json",
        r#"{"labels":["p0","p1","p2"],"matrix":[[0,1,2],[1,0,1],[2,1,0]]}"#.to_string() + "\n",
    );
    add("three_phi.csv", csv("index,value", ["0,0".into(), "1,5".into(), "2,1".into()]));
    add(
        "three_cover.json",
        r#"{"sets":[{"type":"subset","indices":[0,1]},{"type":"subset","indices":[1,2]}]}"#.to_string() + "\n",
    );

    // 50 anchors in the unit square and 20 queries
    let mut r = rng(1);
    let pts = points_2d(&mut r, 50);
    add(
        "mw_anchors.csv",
        csv(
            "x1,x2,value",
            pts.iter().map(|p| format!("{},{},{}", p[0], p[1], r.random_range(-1.0..1.0))),
        ),
    );
    let qs = points_2d(&mut r, 20);
    add("mw_queries.csv", csv("x1,x2", qs.iter().map(|p| format!("{},{}", p[0], p[1]))));

    // 100-point explicit space from random planar points
    let mut r = rng(2);
    let pts = points_2d(&mut r, 100);
    let matrix: Vec<Vec<f64>> = pts.iter().map(|&a| pts.iter().map(|&b| dist(a, b)).collect()).collect();
    let labels: Vec<String> = (0..100).map(|i| format!("q{i}")).collect();
    add(
        "explicit100_domain.json",
        serde_json::json!({ "labels": labels, "matrix": matrix }).to_string() + "\n",
    );
    add(
        "explicit100_phi.csv",
        csv("index,value", (0..100).map(|i| format!("{i},{}", r.random_range(-1.0..1.0)))),
    );

    // ball covers over 200 planar samples
    let mut r = rng(3);
    let samples = points_2d(&mut r, 200);
    add("pou_points.csv", csv("x1,x2", samples.iter().map(|p| format!("{},{}", p[0], p[1]))));
    for c in 0..BALL_COVERS {
        let balls = loop {
            let balls: Vec<([f64; 2], f64)> = (0..10)
                .map(|_| ([r.random::<f64>(), r.random::<f64>()], r.random_range(0.25..0.6)))
                .collect();
            if samples.iter().all(|&p| balls.iter().any(|&(c, rad)| dist(p, c) < rad)) {
                break balls;
            }
        };
        let sets: Vec<serde_json::Value> = balls
            .iter()
            .map(|(c, rad)| serde_json::json!({"type": "ball", "center": [c[0], c[1]], "radius": rad}))
            .collect();
        add(&format!("pou_cover_{c}.json"), serde_json::json!({ "sets": sets }).to_string() + "\n");
    }

    // sin(5x) + x on 400 samples of [0, 4] with tolerance 0.05 + 0.05 x
    let xs: Vec<f64> = (0..400).map(|i| 4.0 * i as f64 / 399.0).collect();
    add("wave_phi.csv", csv("x,value", xs.iter().map(|x| format!("{x},{}", (5.0 * x).sin() + x))));
    add("wave_tol.csv", csv("x,value", xs.iter().map(|x| format!("{x},{}", 0.05 + 0.05 * x))));

    // 200 samples with a gap of at least 0.2 between the two functions
    let mut r = rng(4);
    let mut xs: Vec<f64> = (0..200).map(|_| r.random_range(0.0..10.0)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let lower: Vec<f64> = xs.iter().map(|_| r.random_range(-1.0..1.0)).collect();
    let upper: Vec<f64> = lower.iter().map(|l| l + r.random_range(0.2..1.0)).collect();
    add("insert_lower.csv", csv("x,value", xs.iter().zip(&lower).map(|(x, v)| format!("{x},{v}"))));
    add("insert_upper.csv", csv("x,value", xs.iter().zip(&upper).map(|(x, v)| format!("{x},{v}"))));

    out
}
