use std::path::PathBuf;

use clap::Parser;
use serde::Deserialize;

/// Batch front end for Lipschitz envelopes, extensions, partitions of
/// unity and approximations.
///
/// Every option can also be given in a JSON file passed with `--config`,
/// using the option name with underscores as key. Flags win over the file.
#[derive(Debug, Clone, Default, PartialEq, Parser, Deserialize)]
#[command(name = "lipkit", version)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// extend | envelope | approx | pou | check
    pub command: Option<String>,
    /// approx only: monotone | uniform | fine | insert | small
    pub method: Option<String>,

    /// JSON file with option values
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Anchor CSV (coordinates or index/label, then value[,lambda])
    #[arg(long)]
    pub anchors: Option<PathBuf>,
    /// Query CSV (coordinates or index/label)
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// Explicit finite domain as JSON {"labels": [...], "matrix": [[...]]}
    #[arg(long)]
    pub domain: Option<PathBuf>,
    /// Use the bounded metric d / (1 + d) on a Euclidean domain
    #[arg(long)]
    pub bounded: bool,
    /// Cover JSON (pou, extend --mode local)
    #[arg(long)]
    pub cover: Option<PathBuf>,
    /// Upper function for approx insert (anchor CSV format)
    #[arg(long)]
    pub upper: Option<PathBuf>,
    /// Tolerance field for approx fine (anchor CSV format, value = tolerance)
    #[arg(long)]
    pub tol: Option<PathBuf>,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Long-format plot data `x,series,value`
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Seed for sampled pair scans
    #[arg(long)]
    pub seed: Option<u64>,

    /// extend: minimal | maximal | midpoint | bounded | unbounded | local;
    /// check: data | minimal | maximal | midpoint | unbounded
    #[arg(long)]
    pub mode: Option<String>,
    /// auto | per-anchor | auto-per-anchor | a nonnegative number
    #[arg(long)]
    pub lambda: Option<String>,
    /// Bound M for range-bounded extensions
    #[arg(long = "bound", visible_alias = "m")]
    #[serde(alias = "m")]
    pub bound: Option<f64>,
    /// Envelope slopes, comma separated and increasing
    #[arg(long, value_delimiter = ',')]
    pub kappa: Vec<f64>,
    /// envelope: lower | upper
    #[arg(long)]
    pub side: Option<String>,
    /// Only anchors closer than this enter the envelope
    #[arg(long)]
    pub window: Option<f64>,
    /// Approximation tolerance; grid spacing for approx insert
    #[arg(long)]
    pub eps: Option<f64>,
    /// Level spacing for approx uniform (default eps / 2)
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Small-scale radius
    #[arg(long)]
    pub delta: Option<f64>,
    /// Small-scale slope
    #[arg(long)]
    pub k: Option<u64>,
    /// approx monotone: envelope indices, comma separated and increasing
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// check: radius for pointwise moduli
    #[arg(long)]
    pub radius: Option<f64>,
}

impl RunConfig {
    /// `self` (flags) over `file`.
    pub fn over(self, file: RunConfig) -> RunConfig {
        RunConfig {
            command: self.command.or(file.command),
            method: self.method.or(file.method),
            config: self.config,
            anchors: self.anchors.or(file.anchors),
            queries: self.queries.or(file.queries),
            domain: self.domain.or(file.domain),
            bounded: self.bounded || file.bounded,
            cover: self.cover.or(file.cover),
            upper: self.upper.or(file.upper),
            tol: self.tol.or(file.tol),
            out: self.out.or(file.out),
            plot: self.plot.or(file.plot),
            seed: self.seed.or(file.seed),
            mode: self.mode.or(file.mode),
            lambda: self.lambda.or(file.lambda),
            bound: self.bound.or(file.bound),
            kappa: if self.kappa.is_empty() { file.kappa } else { self.kappa },
            side: self.side.or(file.side),
            window: self.window.or(file.window),
            eps: self.eps.or(file.eps),
            spacing: self.spacing.or(file.spacing),
            delta: self.delta.or(file.delta),
            k: self.k.or(file.k),
            n: if self.n.is_empty() { file.n } else { self.n },
            radius: self.radius.or(file.radius),
        }
    }
}
