//! Trajectory files: CSV with one point per line, or JSON
//! `{"d": <int>, "points": [[...], ...]}`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use trajdist::PointSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` files are JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    /// `column` is the 1-based field for CSV and the character column for JSON.
    #[error("{path}:{line}:{column}: {msg}")]
    Syntax {
        path: String,
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("{path}:{line}: expected {expected} coordinates, found {found}")]
    Dimension {
        path: String,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: {msg}")]
    Content { path: String, msg: String },
}

#[cfg(test)]
impl ParseError {
    /// 1-based line (CSV) or point index (JSON) the error refers to.
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { line, .. } | ParseError::Dimension { line, .. } => Some(*line),
            _ => None,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonTrajectory {
    d: usize,
    points: Vec<Vec<f64>>,
}

pub fn parse_trajectory(path: &Path, format: Format) -> Result<PointSequence, ParseError> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: name.clone(),
        source,
    })?;
    match format {
        Format::Csv => parse_csv(&name, &text),
        Format::Json => parse_json(&name, &text),
    }
}

pub fn parse_csv(name: &str, text: &str) -> Result<PointSequence, ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    // The reader does not count blank lines, and a record's offset points
    // before any blank lines it skipped.
    let line_of = |pos: Option<&csv::Position>| {
        pos.map_or(0, |p| {
            let bytes = text.as_bytes();
            let mut at = (p.byte() as usize).min(bytes.len());
            while at < bytes.len() && matches!(bytes[at], b'\n' | b'\r') {
                at += 1;
            }
            bytes[..at].iter().filter(|&&b| b == b'\n').count() + 1
        })
    };
    let mut dim = None;
    let mut flat = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| ParseError::Syntax {
            path: name.to_string(),
            line: line_of(e.position()),
            column: 1,
            msg: e.to_string(),
        })?;
        let line = line_of(record.position());
        for (k, field) in record.iter().enumerate() {
            let syntax = |msg: String| ParseError::Syntax {
                path: name.to_string(),
                line,
                column: k + 1,
                msg,
            };
            let x: f64 = field
                .parse()
                .map_err(|_| syntax(format!("not a number: {field:?}")))?;
            if !x.is_finite() {
                return Err(syntax("coordinates must be finite".to_string()));
            }
            flat.push(x);
        }
        match dim {
            None => dim = Some(record.len()),
            Some(d) if d != record.len() => {
                return Err(ParseError::Dimension {
                    path: name.to_string(),
                    line,
                    expected: d,
                    found: record.len(),
                })
            }
            _ => {}
        }
    }
    let dim = dim.ok_or_else(|| ParseError::Content {
        path: name.to_string(),
        msg: "no points".to_string(),
    })?;
    PointSequence::from_flat(dim, flat).map_err(|e| ParseError::Content {
        path: name.to_string(),
        msg: e.to_string(),
    })
}

pub fn parse_json(name: &str, text: &str) -> Result<PointSequence, ParseError> {
    let doc: JsonTrajectory = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        path: name.to_string(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    if doc.d == 0 {
        return Err(ParseError::Content {
            path: name.to_string(),
            msg: "dimension must be positive".to_string(),
        });
    }
    if doc.points.is_empty() {
        return Err(ParseError::Content {
            path: name.to_string(),
            msg: "no points".to_string(),
        });
    }
    let mut flat = Vec::with_capacity(doc.d * doc.points.len());
    for (k, p) in doc.points.iter().enumerate() {
        if p.len() != doc.d {
            return Err(ParseError::Dimension {
                path: name.to_string(),
                line: k + 1,
                expected: doc.d,
                found: p.len(),
            });
        }
        flat.extend_from_slice(p);
    }
    PointSequence::from_flat(doc.d, flat).map_err(|e| ParseError::Content {
        path: name.to_string(),
        msg: e.to_string(),
    })
}

pub fn to_json(seq: &PointSequence) -> String {
    let doc = JsonTrajectory {
        d: seq.dim(),
        points: seq.points().map(|p| p.to_vec()).collect(),
    };
    serde_json::to_string(&doc).expect("finite coordinates serialize")
}

pub fn to_csv(seq: &PointSequence) -> String {
    let mut out = String::new();
    for p in seq.points() {
        let row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_trajectory(path: &Path, seq: &PointSequence, format: Format) -> std::io::Result<()> {
    let text = match format {
        Format::Csv => to_csv(seq),
        Format::Json => to_json(seq),
    };
    fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_two_points() {
        let s = parse_csv("t", "0,0\n1,0\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dim(), 2);
        assert_eq!(s.point(1), &[1.0, 0.0]);
    }

    #[test]
    fn csv_ragged_row_reports_line() {
        let e = parse_csv("t", "0,0\n1,0,2\n").unwrap_err();
        assert_eq!(e.line(), Some(2));
        assert!(matches!(
            e,
            ParseError::Dimension {
                expected: 2,
                found: 3,
                ..
            }
        ));
    }

    #[test]
    fn csv_rejects_non_finite_and_garbage() {
        for bad in ["0,0\nnan,1\n", "0,0\n1,inf\n", "0,0\n1,x\n"] {
            let e = parse_csv("t", bad).unwrap_err();
            assert_eq!(e.line(), Some(2), "{bad:?}");
        }
        assert!(parse_csv("t", "\n\n").is_err());
    }

    #[test]
    fn csv_field_position() {
        match parse_csv("t", "0,0\n\n1.5, abc\n").unwrap_err() {
            ParseError::Syntax { line, column, .. } => assert_eq!((line, column), (3, 2)),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn json_round_trip() {
        let s = PointSequence::from_flat(3, vec![0.5, -1.25, 3.0, 1e-300, 7.0, 1e300]).unwrap();
        let back = parse_json("t", &to_json(&s)).unwrap();
        assert_eq!(back, s);
        let back = parse_csv("t", &to_csv(&s)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn json_errors() {
        let e = parse_json("t", r#"{"d": 2, "points": [[0, 0], [1]]}"#).unwrap_err();
        assert_eq!(e.line(), Some(2));
        assert!(parse_json("t", r#"{"d": 2, "points": []}"#).is_err());
        assert!(parse_json("t", r#"{"d": 2, "points": [[0, "a"]]}"#).is_err());
        assert!(parse_json("t", "{").is_err());
    }
}
