//! Plot ingestion, ordering and CSV output.
//!
//! Numbers are written with Rust's shortest round-trip formatting so that
//! reading a file back reproduces every coordinate bit for bit.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Window};
use crate::model::PointSequence;
use crate::summaries::{EnvelopeBand, SummaryCurve};

/// One field plot: locations in meters, optional DBH marks in cm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRecord {
    pub id: String,
    pub points: Vec<Point>,
    pub dbh: Option<Vec<f64>>,
    pub window: Window,
}

impl PlotRecord {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_dbh(&self) -> Option<f64> {
        self.dbh
            .as_ref()
            .and_then(|d| d.iter().copied().max_by(|a, b| a.total_cmp(b)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OrderRule {
    /// Largest mark first.
    DescendingMark,
    AscendingMark,
    /// Keep file order.
    Given,
}

impl std::str::FromStr for OrderRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "descending_mark" => Ok(OrderRule::DescendingMark),
            "ascending_mark" => Ok(OrderRule::AscendingMark),
            "given" => Ok(OrderRule::Given),
            _ => Err(Error::Parse(format!("unknown ordering rule '{s}'"))),
        }
    }
}

/// Reads a plot CSV (`x,y[,dbh]`, optional `index` column).
///
/// Without an explicit window the bounding box of the points is used.
pub fn ingest_csv(path: impl AsRef<Path>, window: Option<Window>) -> Result<PlotRecord> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Parse(format!("cannot open {}: {e}", path.display())))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_csv(file, &id, window)
}

pub fn parse_csv<R: Read>(reader: R, id: &str, window: Option<Window>) -> Result<PlotRecord> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("cannot read header: {e}")))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Parse(
            "empty file: expected a header with columns x,y".into(),
        ));
    }
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (xi, yi) = match (column("x"), column("y")) {
        (Some(x), Some(y)) => (x, y),
        _ => {
            return Err(Error::Parse(format!(
                "missing column: header must contain x and y, got '{}'",
                headers.iter().collect::<Vec<_>>().join(",")
            )))
        }
    };
    let di = column("dbh");

    let mut points = Vec::new();
    let mut dbh = Vec::new();
    let mut first_row: HashMap<(u64, u64), usize> = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        // header is line 1
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse(format!("row {line}: {e}")))?;
        let field = |idx: usize, name: &str| -> Result<f64> {
            let raw = rec
                .get(idx)
                .ok_or_else(|| Error::Parse(format!("row {line}: missing field '{name}'")))?;
            let v: f64 = raw.parse().map_err(|_| {
                Error::Parse(format!(
                    "row {line}: field '{name}' = '{raw}' is not a number"
                ))
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse(format!(
                    "row {line}: field '{name}' is not finite"
                )))
            }
        };
        let p = Point::new(field(xi, "x")?, field(yi, "y")?);
        if let Some(d) = di {
            let v = field(d, "dbh")?;
            if v <= 0.0 {
                return Err(Error::Parse(format!(
                    "row {line}: dbh must be positive, got {v}"
                )));
            }
            dbh.push(v);
        }
        let key = ((p.x + 0.0).to_bits(), (p.y + 0.0).to_bits());
        if let Some(prev) = first_row.insert(key, line) {
            return Err(Error::Parse(format!(
                "duplicate point ({}, {}) on rows {prev} and {line}",
                p.x, p.y
            )));
        }
        points.push(p);
    }
    if points.is_empty() {
        return Err(Error::Parse("file contains no data rows".into()));
    }
    let window = match window {
        Some(w) => w,
        None => bounding_box(&points)?,
    };
    for (i, p) in points.iter().enumerate() {
        if !window.contains(*p) {
            return Err(Error::Parse(format!(
                "row {}: point ({}, {}) lies outside the window {window}",
                i + 2,
                p.x,
                p.y
            )));
        }
    }
    Ok(PlotRecord {
        id: id.to_string(),
        points,
        dbh: di.map(|_| dbh),
        window,
    })
}

fn bounding_box(points: &[Point]) -> Result<Window> {
    let (mut x0, mut y0, mut x1, mut y1) = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for p in points {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    Window::new(x0, y0, x1, y1).map_err(|_| {
        Error::Parse("cannot infer a window from the points; pass one explicitly".into())
    })
}

/// Orders the plot into a sequence. Equal marks are ordered by `x`, then `y`.
pub fn order_sequence(record: &PlotRecord, rule: OrderRule) -> Result<PointSequence> {
    let n = record.points.len();
    let mut order: Vec<usize> = (0..n).collect();
    match rule {
        OrderRule::Given => {}
        OrderRule::DescendingMark | OrderRule::AscendingMark => {
            let dbh = record.dbh.as_ref().ok_or_else(|| {
                Error::Config(format!("ordering rule {rule:?} needs a dbh column"))
            })?;
            let pts = &record.points;
            order.sort_by(|&a, &b| {
                let by_mark = dbh[a].total_cmp(&dbh[b]);
                let by_mark = if rule == OrderRule::DescendingMark {
                    by_mark.reverse()
                } else {
                    by_mark
                };
                by_mark
                    .then(pts[a].x.total_cmp(&pts[b].x))
                    .then(pts[a].y.total_cmp(&pts[b].y))
            });
        }
    }
    let points = order.iter().map(|&i| record.points[i]).collect();
    let marks = record
        .dbh
        .as_ref()
        .map(|d| order.iter().map(|&i| d[i]).collect());
    PointSequence::with_marks(points, marks, record.window)
}

/// `index,x,y[,dbh]` with 1-based indices.
pub fn sequence_csv(seq: &PointSequence) -> String {
    let mut out = String::from(if seq.marks().is_some() {
        "index,x,y,dbh\n"
    } else {
        "index,x,y\n"
    });
    for (i, p) in seq.points().iter().enumerate() {
        match seq.marks() {
            Some(m) => out.push_str(&format!("{},{},{},{}\n", i + 1, p.x, p.y, m[i])),
            None => out.push_str(&format!("{},{},{}\n", i + 1, p.x, p.y)),
        }
    }
    out
}

/// Long format, one row per statistic and index.
pub fn curves_csv(curves: &[SummaryCurve]) -> String {
    let mut out = String::from("statistic,index,value\n");
    for c in curves {
        for (i, v) in c.index.iter().zip(&c.values) {
            out.push_str(&format!("{},{},{}\n", c.kind.name(), i, v));
        }
    }
    out
}

pub fn band_csv(band: &EnvelopeBand) -> String {
    let mut out = String::from("index,value,lower,upper,outside\n");
    for i in 0..band.index.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            band.index[i],
            band.data_curve.values[i],
            band.lower[i],
            band.upper[i],
            band.outside[i] as u8
        ));
    }
    out
}

pub fn write_string(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_string(path, &s)
}
