//! External keypoint files.
//!
//! Oxford layout: a descriptor-dimension line (ignored), a count line, then
//! one `u v a b c` row per point; trailing descriptor columns are ignored.
//! CSV layout: header `x,y,scale` then one row per point.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

use super::{DetectorError, Ellipse, ImageRef, Keypoint, KeypointSet};

pub const CSV_HEADER: &str = "x,y,scale";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KeypointFormatError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("count mismatch: declared {declared}, found {found}")]
    CountMismatch { declared: usize, found: usize },
    #[error("line {line}: non-positive-definite ellipse")]
    NotPositiveDefinite { line: usize },
    #[error("line {line}: non-finite value")]
    NonFinite { line: usize },
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeypointFormat {
    Oxford,
    Csv,
}

impl KeypointFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            Self::Oxford => "oxford",
            Self::Csv => "csv",
        }
    }
}

impl FromStr for KeypointFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oxford" => Ok(Self::Oxford),
            "csv" => Ok(Self::Csv),
            other => Err(format!("unknown keypoint format {other:?}")),
        }
    }
}

fn parse_fields(line_no: usize, fields: &[&str]) -> Result<Vec<f64>, KeypointFormatError> {
    fields
        .iter()
        .map(|f| {
            let v: f64 = f.trim().parse().map_err(|_| KeypointFormatError::MalformedRow {
                line: line_no,
                reason: format!("bad number {f:?}"),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(KeypointFormatError::NonFinite { line: line_no })
            }
        })
        .collect()
}

pub fn parse_oxford<T: Real>(text: &str) -> Result<Vec<Keypoint<T>>, KeypointFormatError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, dim) = lines
        .next()
        .ok_or_else(|| KeypointFormatError::MalformedHeader("empty file".into()))?;
    dim.trim()
        .parse::<f64>()
        .map_err(|_| KeypointFormatError::MalformedHeader(format!("first line {dim:?} is not numeric")))?;
    let (_, count) = lines
        .next()
        .ok_or_else(|| KeypointFormatError::MalformedHeader("missing count line".into()))?;
    let declared: usize = count
        .trim()
        .parse()
        .map_err(|_| KeypointFormatError::MalformedHeader(format!("count line {count:?} is not an integer")))?;
    let mut points = Vec::with_capacity(declared);
    for (idx, line) in lines {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 5 {
            return Err(KeypointFormatError::MalformedRow {
                line: line_no,
                reason: format!("expected at least 5 values, found {}", fields.len()),
            });
        }
        let v = parse_fields(line_no, &fields[..5])?;
        let ellipse = Ellipse::new(T::c(v[2]), T::c(v[3]), T::c(v[4]))
            .map_err(|_| KeypointFormatError::NotPositiveDefinite { line: line_no })?;
        let kp = Keypoint::from_ellipse(T::c(v[0]), T::c(v[1]), ellipse, T::zero())
            .map_err(|_| KeypointFormatError::NonFinite { line: line_no })?;
        points.push(kp);
    }
    if points.len() != declared {
        return Err(KeypointFormatError::CountMismatch {
            declared,
            found: points.len(),
        });
    }
    Ok(points)
}

pub fn parse_csv<T: Real>(text: &str) -> Result<Vec<Keypoint<T>>, KeypointFormatError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        Some((_, h)) => {
            return Err(KeypointFormatError::MalformedHeader(format!(
                "expected {CSV_HEADER:?}, found {:?}",
                h.trim()
            )))
        }
        None => return Err(KeypointFormatError::MalformedHeader("empty file".into())),
    }
    lines
        .map(|(idx, line)| {
            let line_no = idx + 1;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(KeypointFormatError::MalformedRow {
                    line: line_no,
                    reason: format!("expected 3 fields, found {}", fields.len()),
                });
            }
            let v = parse_fields(line_no, &fields)?;
            Keypoint::new(T::c(v[0]), T::c(v[1]), T::c(v[2]), T::zero()).map_err(|_| {
                KeypointFormatError::MalformedRow {
                    line: line_no,
                    reason: "scale must be positive".into(),
                }
            })
        })
        .collect()
}

/// CSV emission; Rust's shortest round-trip formatting makes this lossless.
pub fn emit_csv<T: Real>(points: &[Keypoint<T>]) -> String {
    let mut out = String::with_capacity(16 + points.len() * 24);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.x, p.y, p.scale);
    }
    out
}

/// Oxford emission; points without an ellipse are written as circles.
pub fn emit_oxford<T: Real>(points: &[Keypoint<T>]) -> String {
    let mut out = format!("1.0\n{}\n", points.len());
    for p in points {
        let e = p.ellipse.unwrap_or_else(|| Ellipse::circle(p.scale));
        let _ = writeln!(out, "{} {} {} {} {}", p.x, p.y, e.a, e.b, e.c);
    }
    out
}

pub fn parse_keypoints<T: Real>(text: &str, format: KeypointFormat) -> Result<Vec<Keypoint<T>>, KeypointFormatError> {
    match format {
        KeypointFormat::Oxford => parse_oxford(text),
        KeypointFormat::Csv => parse_csv(text),
    }
}

/// Read an external keypoint file; errors carry the file path.
pub fn ingest_keypoints<T: Real>(
    path: impl AsRef<Path>,
    format: KeypointFormat,
    image_ref: ImageRef,
    detector_id: &str,
) -> Result<KeypointSet<T>, DetectorError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DetectorError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let points = parse_keypoints(&text, format).map_err(|source| DetectorError::File {
        path: path.display().to_string(),
        source,
    })?;
    Ok(KeypointSet::new(image_ref, detector_id, points))
}
