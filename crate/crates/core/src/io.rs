//! Text formats: anchor and query CSV, explicit domain and cover JSON,
//! and the CSV tables written by the command-line tool.
//!
//! Anchor CSV has a header. On a Euclidean domain the columns are the
//! coordinates followed by `value` and an optional `lambda`; on an explicit
//! domain the first column is `index` or `label`. Query CSV is the same
//! without the value columns.

use std::collections::HashMap;
use std::io::Read;
use std::sync::Arc;

use serde::Deserialize;
use serde_json::Value;

use crate::error::{LipError, Result};
use crate::function::AnchoredFunction;
use crate::metric::{Ball, MetricDomain, Point};
use crate::partition::{CoverSet, PartitionOfUnity};

fn parse_err(msg: impl Into<String>) -> LipError {
    LipError::Parse(msg.into())
}

/// Shortest round-trip decimal.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

pub fn fmt_point(p: &Point) -> String {
    match p {
        Point::Index(i) => i.to_string(),
        Point::Coords(c) => c.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(" "),
    }
}

/// Anchor rows as read from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorTable {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    pub lambdas: Option<Vec<f64>>,
}

impl AnchorTable {
    pub fn into_function(self, domain: Arc<MetricDomain>) -> Result<AnchoredFunction> {
        let f = AnchoredFunction::new(domain, self.points, self.values)?;
        match self.lambdas {
            Some(l) => f.with_constants(l),
            None => Ok(f),
        }
    }
}

fn read_records(reader: impl Read) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(e.to_string()))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    let rows = rdr
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| parse_err(e.to_string()))?;
    Ok((header, rows))
}

fn number(field: &str, row: usize, col: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| parse_err(format!("row {row}, column {col}: {field:?} is not a number")))
}

fn explicit_point(domain: &MetricDomain, key: &str, field: &str, row: usize) -> Result<Point> {
    let p = if key == "index" {
        let i = field
            .parse::<usize>()
            .map_err(|_| parse_err(format!("row {row}: {field:?} is not an index")))?;
        Point::Index(i)
    } else {
        let labels = domain.labels().unwrap_or(&[]);
        let i = labels
            .iter()
            .position(|l| l == field)
            .ok_or_else(|| parse_err(format!("row {row}: unknown label {field:?}")))?;
        Point::Index(i)
    };
    domain.check_point(&p)?;
    Ok(p)
}

type Columns = HashMap<String, Vec<f64>>;

/// Rows of points, plus the named trailing numeric columns.
fn read_table(reader: impl Read, domain: &MetricDomain, tail: &[&str]) -> Result<(Vec<Point>, Columns)> {
    let (header, rows) = read_records(reader)?;
    let explicit = domain.is_explicit();
    let key = header.first().cloned().unwrap_or_default();
    if explicit && key != "index" && key != "label" {
        return Err(parse_err("explicit-domain CSV must start with an index or label column"));
    }
    let named: Vec<usize> = (0..header.len()).filter(|&c| tail.contains(&header[c].as_str())).collect();
    let coord_cols: Vec<usize> = (0..header.len())
        .filter(|c| !named.contains(c) && !(explicit && *c == 0))
        .collect();
    if explicit && !coord_cols.is_empty() {
        return Err(parse_err(format!("unexpected column {:?}", header[coord_cols[0]])));
    }
    if !explicit && Some(coord_cols.len()) != domain.dim() {
        return Err(parse_err(format!(
            "expected {} coordinate column(s), found {}",
            domain.dim().unwrap_or(0),
            coord_cols.len()
        )));
    }
    let mut points = Vec::with_capacity(rows.len());
    let mut cols: HashMap<String, Vec<f64>> = named.iter().map(|&c| (header[c].clone(), Vec::new())).collect();
    for (r, rec) in rows.iter().enumerate() {
        let row = r + 1;
        if rec.len() != header.len() {
            return Err(parse_err(format!("row {row} has {} fields, header has {}", rec.len(), header.len())));
        }
        let p = if explicit {
            explicit_point(domain, &key, &rec[0], row)?
        } else {
            let c = coord_cols
                .iter()
                .map(|&c| number(&rec[c], row, &header[c]))
                .collect::<Result<Vec<_>>>()?;
            Point::Coords(c)
        };
        points.push(p);
        for &c in &named {
            cols.get_mut(&header[c]).unwrap().push(number(&rec[c], row, &header[c])?);
        }
    }
    Ok((points, cols))
}

/// Number of coordinate columns in an anchor or query header.
pub fn coordinate_columns(reader: impl Read) -> Result<usize> {
    let (header, _) = read_records(reader)?;
    Ok(header
        .iter()
        .filter(|h| !matches!(h.as_str(), "value" | "lambda" | "index" | "label" | "tol"))
        .count())
}

pub fn read_anchor_csv(reader: impl Read, domain: &MetricDomain) -> Result<AnchorTable> {
    let (points, mut cols) = read_table(reader, domain, &["value", "lambda"])?;
    let values = cols.remove("value").ok_or_else(|| parse_err("anchor CSV needs a value column"))?;
    if points.is_empty() {
        return Err(parse_err("anchor CSV has no rows"));
    }
    Ok(AnchorTable {
        points,
        values,
        lambdas: cols.remove("lambda"),
    })
}

pub fn read_points_csv(reader: impl Read, domain: &MetricDomain) -> Result<Vec<Point>> {
    Ok(read_table(reader, domain, &[])?.0)
}

#[derive(Deserialize)]
struct DomainJson {
    #[serde(default)]
    labels: Option<Vec<String>>,
    matrix: Vec<Vec<f64>>,
}

/// `{"labels": [...], "matrix": [[...], ...]}`; labels default to indices.
pub fn parse_explicit_domain(json: &str) -> Result<MetricDomain> {
    let d: DomainJson = serde_json::from_str(json).map_err(|e| parse_err(e.to_string()))?;
    let labels = d
        .labels
        .unwrap_or_else(|| (0..d.matrix.len()).map(|i| i.to_string()).collect());
    MetricDomain::explicit(labels, d.matrix)
}

fn json_point(v: &Value, domain: &MetricDomain) -> Result<Point> {
    let p = if domain.is_explicit() {
        match v {
            Value::Number(n) => Point::Index(
                n.as_u64()
                    .ok_or_else(|| parse_err(format!("{v} is not an index")))? as usize,
            ),
            Value::String(s) => {
                let labels = domain.labels().unwrap_or(&[]);
                Point::Index(
                    labels
                        .iter()
                        .position(|l| l == s)
                        .ok_or_else(|| parse_err(format!("unknown label {s:?}")))?,
                )
            }
            _ => return Err(parse_err(format!("{v} is not an index or label"))),
        }
    } else {
        match v {
            Value::Number(n) => Point::scalar(n.as_f64().unwrap()),
            Value::Array(a) => Point::Coords(
                a.iter()
                    .map(|x| x.as_f64().ok_or_else(|| parse_err(format!("{x} is not a coordinate"))))
                    .collect::<Result<_>>()?,
            ),
            _ => return Err(parse_err(format!("{v} is not a point"))),
        }
    };
    domain.check_point(&p)?;
    Ok(p)
}

fn field<'a>(obj: &'a Value, name: &str, i: usize) -> Result<&'a Value> {
    obj.get(name)
        .ok_or_else(|| parse_err(format!("set {i}: missing field {name:?}")))
}

fn num_field(obj: &Value, name: &str, i: usize) -> Result<f64> {
    field(obj, name, i)?
        .as_f64()
        .ok_or_else(|| parse_err(format!("set {i}: field {name:?} must be a number")))
}

fn json_ball(obj: &Value, domain: &MetricDomain, i: usize) -> Result<Ball> {
    Ball::new(json_point(field(obj, "center", i)?, domain)?, num_field(obj, "radius", i)?)
}

/// `{"sets": [{"type": ..., ...}, ...]}` or a bare array of sets.
///
/// Types: `ball {center, radius}`, `ball_union {balls}`, `subset {indices}`,
/// `sublevel {threshold}`, `preimage {center, radius}`, `whole`.
pub fn parse_cover(json: &str, domain: &MetricDomain) -> Result<Vec<CoverSet>> {
    let v: Value = serde_json::from_str(json).map_err(|e| parse_err(e.to_string()))?;
    let sets = match &v {
        Value::Array(a) => a,
        Value::Object(_) => v
            .get("sets")
            .and_then(Value::as_array)
            .ok_or_else(|| parse_err("cover JSON needs a \"sets\" array"))?,
        _ => return Err(parse_err("cover JSON must be an object or an array")),
    };
    sets.iter()
        .enumerate()
        .map(|(i, s)| {
            let ty = field(s, "type", i)?
                .as_str()
                .ok_or_else(|| parse_err(format!("set {i}: type must be a string")))?;
            Ok(match ty {
                "ball" => CoverSet::Ball(json_ball(s, domain, i)?),
                "ball_union" => CoverSet::BallUnion(
                    field(s, "balls", i)?
                        .as_array()
                        .ok_or_else(|| parse_err(format!("set {i}: balls must be an array")))?
                        .iter()
                        .map(|b| json_ball(b, domain, i))
                        .collect::<Result<_>>()?,
                ),
                "subset" => CoverSet::Subset(
                    field(s, "indices", i)?
                        .as_array()
                        .ok_or_else(|| parse_err(format!("set {i}: indices must be an array")))?
                        .iter()
                        .map(|x| match json_point(x, domain)? {
                            Point::Index(k) => Ok(k),
                            Point::Coords(_) => Err(parse_err(format!("set {i}: subsets need an explicit domain"))),
                        })
                        .collect::<Result<_>>()?,
                ),
                "sublevel" => CoverSet::Sublevel {
                    threshold: num_field(s, "threshold", i)?,
                },
                "preimage" => CoverSet::Preimage {
                    center: num_field(s, "center", i)?,
                    radius: num_field(s, "radius", i)?,
                },
                "whole" => CoverSet::Whole,
                other => return Err(parse_err(format!("set {i}: unknown type {other:?}"))),
            })
        })
        .collect()
}

/// Header plus pre-formatted rows.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

/// `point_id,set_index,eta_n,gamma_n,xi`, one row per point and set.
pub fn partition_table(pou: &PartitionOfUnity, points: &[Point]) -> Result<CsvTable> {
    let mut t = CsvTable::new(&["point_id", "set_index", "eta_n", "gamma_n", "xi"]);
    for (id, p) in points.iter().enumerate() {
        let terms = pou.terms(p)?;
        for n in 0..pou.len() {
            t.push(vec![
                id.to_string(),
                n.to_string(),
                fmt_f64(terms.eta_n[n]),
                fmt_f64(terms.gamma[n]),
                fmt_f64(terms.xi[n]),
            ]);
        }
    }
    Ok(t)
}

/// Long-format `x,series,value`, sorted by series name then `x`.
pub fn plot_table(series: &[(String, Vec<(f64, f64)>)]) -> CsvTable {
    let mut rows: Vec<(&str, f64, f64)> = series
        .iter()
        .flat_map(|(name, pts)| pts.iter().map(move |&(x, v)| (name.as_str(), x, v)))
        .collect();
    rows.sort_by(|a, b| a.0.cmp(b.0).then(a.1.total_cmp(&b.1)));
    let mut t = CsvTable::new(&["x", "series", "value"]);
    for (name, x, v) in rows {
        t.push(vec![fmt_f64(x), name.to_string(), fmt_f64(v)]);
    }
    t
}
