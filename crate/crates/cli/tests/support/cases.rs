//! Fixture command lines run by the determinism and golden checks.

pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
    /// Acceptance criterion whose golden file this output is.
    pub golden_for: Option<u8>,
}

pub const CASES: &[Case] = &[
    Case {
        name: "mw_extend",
        args: &["extend", "--anchors", "mw_anchors.csv", "--queries", "mw_queries.csv", "--mode", "midpoint", "--lambda", "auto"],
        golden_for: Some(1),
    },
    Case {
        name: "line2_maximal",
        args: &["extend", "--anchors", "line2_anchors.csv", "--queries", "line2_queries.csv", "--mode", "maximal", "--lambda", "auto"],
        golden_for: None,
    },
    Case {
        name: "line3_local",
        args: &["extend", "--mode", "local", "--anchors", "line3_anchors.csv", "--cover", "line3_cover.json", "--queries", "line3_queries.csv"],
        golden_for: None,
    },
    Case {
        name: "explicit100_envelope",
        args: &["envelope", "--domain", "explicit100_domain.json", "--anchors", "explicit100_phi.csv", "--kappa", "1,2,4,8"],
        golden_for: Some(2),
    },
    Case {
        name: "three_envelope",
        args: &["envelope", "--domain", "three_domain.json", "--anchors", "three_phi.csv", "--kappa", "1,2,5"],
        golden_for: None,
    },
    Case {
        name: "three_pou",
        args: &["pou", "--domain", "three_domain.json", "--cover", "three_cover.json"],
        golden_for: Some(4),
    },
    Case {
        name: "ball_pou",
        args: &["pou", "--cover", "pou_cover_0.json", "--queries", "pou_points.csv"],
        golden_for: Some(4),
    },
    Case {
        name: "three_monotone",
        args: &["approx", "monotone", "--domain", "three_domain.json", "--anchors", "three_phi.csv", "--n", "1,2,5"],
        golden_for: Some(5),
    },
    Case {
        name: "wave_uniform",
        args: &["approx", "uniform", "--anchors", "wave_phi.csv", "--eps", "0.05"],
        golden_for: None,
    },
    Case {
        name: "wave_fine",
        args: &["approx", "fine", "--anchors", "wave_phi.csv", "--tol", "wave_tol.csv"],
        golden_for: None,
    },
    Case {
        name: "insert",
        args: &["approx", "insert", "--anchors", "insert_lower.csv", "--upper", "insert_upper.csv", "--eps", "0.05"],
        golden_for: None,
    },
    Case {
        name: "wave_small",
        args: &["approx", "small", "--anchors", "wave_phi.csv", "--eps", "0.5"],
        golden_for: None,
    },
    Case {
        name: "mw_check",
        args: &["check", "--anchors", "mw_anchors.csv", "--queries", "mw_queries.csv", "--mode", "midpoint", "--radius", "0.3", "--delta", "0.1", "--k", "5", "--seed", "7"],
        golden_for: None,
    },
];
