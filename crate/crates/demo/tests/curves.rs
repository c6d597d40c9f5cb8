use lipkit_demo::{auto_lambda, envelope_curve, mw_curves, partition_curves};

const AX: [f64; 3] = [0.0, 1.0, 3.0];
const AV: [f64; 3] = [0.0, 2.0, 1.0];

fn grid(n: usize, a: f64, b: f64) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn lambda_is_steepest_slope() {
    assert_eq!(auto_lambda(&AX, &AV).unwrap(), 2.0);
}

#[test]
fn extensions_interpolate_and_are_ordered() {
    let xs = grid(41, -1.0, 4.0);
    let out = mw_curves(&AX, &AV, 0.0, &xs).unwrap();
    let n = xs.len();
    let (lo, hi, mid) = (&out[..n], &out[n..2 * n], &out[2 * n..]);
    for j in 0..n {
        assert!(lo[j] <= mid[j] && mid[j] <= hi[j]);
        // hand-computed maximal extension with lambda 2
        let want = AX.iter().zip(AV).map(|(a, v)| v + 2.0 * (a - xs[j]).abs()).fold(f64::INFINITY, f64::min);
        assert_eq!(hi[j], want);
    }
    let at = mw_curves(&AX, &AV, 0.0, &AX).unwrap();
    assert_eq!(&at[..3], &AV);
    assert_eq!(&at[3..6], &AV);
}

#[test]
fn small_lambda_is_rejected() {
    assert!(mw_curves(&AX, &AV, 1.0, &[0.5]).is_err());
    assert!(mw_curves(&AX, &AV, 3.0, &[0.5]).is_ok());
}

#[test]
fn envelopes_bracket_data() {
    let out = envelope_curve(&AX, &AV, 1.0, &AX).unwrap();
    assert_eq!(&out[..3], &[0.0, 1.0, 1.0]);
    assert_eq!(&out[3..], &[1.0, 2.0, 1.0]);
}

#[test]
fn partition_sums_to_one_where_covered() {
    let xs = grid(101, -1.0, 5.0);
    let out = partition_curves(&[0.0, 2.0, 4.0], &[1.5, 1.5, 1.5], &xs).unwrap();
    let n = xs.len();
    for (j, &x) in xs.iter().enumerate() {
        let col: Vec<f64> = (0..3).map(|i| out[i * n + j]).collect();
        if x <= -1.5 + 1e-9 || x >= 5.5 {
            assert!(col.iter().all(|v| v.is_nan()));
        } else {
            assert!((col.iter().sum::<f64>() - 1.0).abs() < 1e-12, "x={x}: {col:?}");
        }
    }
}

#[test]
fn uncovered_points_are_nan() {
    let out = partition_curves(&[0.0], &[1.0], &[0.0, 2.0]).unwrap();
    assert_eq!(out[0], 1.0);
    assert!(out[1].is_nan());
}

#[test]
fn mismatched_cover_is_an_error() {
    assert!(partition_curves(&[0.0, 1.0], &[1.0], &[0.0]).is_err());
    assert!(partition_curves(&[0.0], &[-1.0], &[0.0]).is_err());
}
