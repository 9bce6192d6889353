//! `kiss-gram v1 dim=<n> count=<m> mode=<float|rational>` files: the upper
//! triangle including the diagonal, row `i` holding entries `i..m`.

use std::fmt::Write as _;
use std::path::Path;

use super::{content_lines, read_text, Header};
use crate::error::{Error, Result};
use crate::gram::GramState;
use crate::matrix::SquareMatrix;
use crate::scalar::{ArithMode, Rational, Scalar};

pub const KIND: &str = "kiss-gram";

#[derive(Clone, Debug, PartialEq)]
pub enum GramData {
    Float(GramState<f64>),
    Rational(GramState<Rational>),
}

impl GramData {
    pub fn mode(&self) -> ArithMode {
        match self {
            GramData::Float(_) => ArithMode::Float,
            GramData::Rational(_) => ArithMode::Rational,
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            GramData::Float(g) => format_gram(g),
            GramData::Rational(g) => format_gram(g),
        }
    }
}

pub fn format_gram<S: Scalar>(state: &GramState<S>) -> String {
    let m = state.count();
    let mut out = format!(
        "{KIND} {} dim={} count={m} mode={}\n",
        super::VERSION,
        state.dim(),
        S::MODE.as_str()
    );
    for i in 0..m {
        let line: Vec<String> = (i..m).map(|j| state.get(i, j).format_scalar()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

fn parse_upper<'a, S: Scalar>(
    lines: impl Iterator<Item = (usize, &'a str)>,
    dim: usize,
    count: usize,
) -> Result<GramState<S>> {
    let mut entries = SquareMatrix::from_row_major(count, vec![S::zero(); count * count])?;
    let mut i = 0;
    for (line, text) in lines {
        if i >= count {
            return Err(Error::Parse {
                line,
                msg: format!("more than {count} rows"),
            });
        }
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
        if row.len() != count - i {
            return Err(Error::Parse {
                line,
                msg: format!("row {i} needs {} entries, found {}", count - i, row.len()),
            });
        }
        for (k, v) in row.into_iter().enumerate() {
            entries.set(i, i + k, v.clone());
            entries.set(i + k, i, v);
        }
        i += 1;
    }
    if i != count {
        return Err(Error::Parse {
            line: 1,
            msg: format!("header declares {count} rows, found {i}"),
        });
    }
    GramState::new(dim, entries)
}

pub fn parse_gram(text: &str) -> Result<GramData> {
    let mut lines = content_lines(text);
    let (_, first) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let header = Header::parse(first, KIND)?;
    let dim = header.get_usize("dim")?;
    let count = header.get_usize("count")?;
    let mode: ArithMode = header.get("mode")?.parse()?;
    Ok(match mode {
        ArithMode::Float => GramData::Float(parse_upper(lines, dim, count)?),
        ArithMode::Rational => GramData::Rational(parse_upper(lines, dim, count)?),
    })
}

pub fn read_gram_file(path: &Path) -> Result<GramData> {
    parse_gram(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refconfigs::{generate, GeneratorId};
    use proptest::prelude::*;

    #[test]
    fn hexagon_round_trip_exact() {
        let hex = generate(&GeneratorId::Hexagon).unwrap().exact_gram.unwrap();
        let text = format_gram(&hex);
        assert!(text.starts_with("kiss-gram v1 dim=2 count=6 mode=rational\n1 1/2 -1/2 -1 -1/2 1/2\n"));
        assert_eq!(parse_gram(&text).unwrap(), GramData::Rational(hex));
    }

    #[test]
    fn rejects_bad_triangle() {
        assert!(parse_gram("kiss-gram v1 dim=1 count=2 mode=float\n1 0\n1 0\n").is_err());
        assert!(matches!(
            parse_gram("kiss-gram v1 dim=1 count=2 mode=float\n1 0\n0.5\n"),
            Err(Error::NonUnitDiagonal { index: 1 })
        ));
    }

    proptest! {
        #[test]
        fn float_round_trip(vals in prop::collection::vec(-1.0f64..0.5, 10)) {
            let mut rows = vec![vec![1.0; 5]; 5];
            let mut k = 0;
            for i in 0..5 {
                for j in (i + 1)..5 {
                    rows[i][j] = vals[k];
                    rows[j][i] = vals[k];
                    k += 1;
                }
            }
            let g = GramState::from_rows(5, rows).unwrap();
            prop_assert_eq!(parse_gram(&format_gram(&g)).unwrap(), GramData::Float(g));
        }
    }
}
