//! `kiss-vectors v1 dim=<n> count=<m> mode=<float|rational>` files: one
//! vector per line, whitespace-separated scalars.

use std::fmt::Write as _;
use std::path::Path;

use super::{content_lines, read_text, Header};
use crate::error::{Error, Result};
use crate::scalar::{ArithMode, Rational, Scalar};

pub const KIND: &str = "kiss-vectors";

#[derive(Clone, Debug, PartialEq)]
pub enum VectorData {
    Float { dim: usize, vectors: Vec<Vec<f64>> },
    Rational { dim: usize, vectors: Vec<Vec<Rational>> },
}

impl VectorData {
    pub fn dim(&self) -> usize {
        match self {
            VectorData::Float { dim, .. } | VectorData::Rational { dim, .. } => *dim,
        }
    }

    pub fn count(&self) -> usize {
        match self {
            VectorData::Float { vectors, .. } => vectors.len(),
            VectorData::Rational { vectors, .. } => vectors.len(),
        }
    }

    pub fn mode(&self) -> ArithMode {
        match self {
            VectorData::Float { .. } => ArithMode::Float,
            VectorData::Rational { .. } => ArithMode::Rational,
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            VectorData::Float { dim, vectors } => format_vectors(*dim, vectors),
            VectorData::Rational { dim, vectors } => format_vectors(*dim, vectors),
        }
    }
}

pub fn format_vectors<S: Scalar>(dim: usize, vectors: &[Vec<S>]) -> String {
    let mut out = format!(
        "{KIND} {} dim={dim} count={} mode={}\n",
        super::VERSION,
        vectors.len(),
        S::MODE.as_str()
    );
    for v in vectors {
        let line: Vec<String> = v.iter().map(Scalar::format_scalar).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

fn parse_rows<'a, S: Scalar>(
    lines: impl Iterator<Item = (usize, &'a str)>,
    dim: usize,
    count: usize,
) -> Result<Vec<Vec<S>>> {
    let mut rows = Vec::with_capacity(count);
    for (line, text) in lines {
        let row = text
            .split_whitespace()
            .map(|t| match S::parse_scalar(t) {
                Err(Error::MixedModeEntries(e)) => Err(Error::MixedModeEntries(e)),
                Err(e) => Err(Error::Parse {
                    line,
                    msg: e.to_string(),
                }),
                ok => ok,
            })
            .collect::<Result<Vec<S>>>()?;
        if row.len() != dim {
            return Err(Error::Parse {
                line,
                msg: format!("expected {dim} entries, found {}", row.len()),
            });
        }
        rows.push(row);
    }
    if rows.len() != count {
        return Err(Error::Parse {
            line: 1,
            msg: format!("header declares {count} rows, found {}", rows.len()),
        });
    }
    Ok(rows)
}

pub fn parse_vectors(text: &str) -> Result<VectorData> {
    let mut lines = content_lines(text);
    let (_, first) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let header = Header::parse(first, KIND)?;
    let dim = header.get_usize("dim")?;
    let count = header.get_usize("count")?;
    if dim == 0 {
        return Err(Error::Parse {
            line: 1,
            msg: "dim must be positive".into(),
        });
    }
    let mode: ArithMode = header.get("mode")?.parse()?;
    Ok(match mode {
        ArithMode::Float => VectorData::Float {
            dim,
            vectors: parse_rows(lines, dim, count)?,
        },
        ArithMode::Rational => VectorData::Rational {
            dim,
            vectors: parse_rows(lines, dim, count)?,
        },
    })
}

pub fn read_vector_file(path: &Path) -> Result<VectorData> {
    parse_vectors(&read_text(path)?)
}
