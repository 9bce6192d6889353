//! Text and binary file formats.
//!
//! Every text format starts with a one-line header `kiss-<kind> v1 key=value ...`,
//! allows `#` comment lines and blank lines, and uses LF line endings.

pub mod checkpoint;
pub mod config;
pub mod gram_file;
pub mod report;
pub mod vectors;

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) const VERSION: &str = "v1";

/// Parsed header line: the format kind plus its `key=value` fields.
#[derive(Debug)]
pub(crate) struct Header {
    pub fields: BTreeMap<String, String>,
}

impl Header {
    pub fn parse(line: &str, kind: &str) -> Result<Self> {
        let mut tokens = line.split_whitespace();
        let err = |msg: String| Error::Parse { line: 1, msg };
        match (tokens.next(), tokens.next()) {
            (Some(k), Some(VERSION)) if k == kind => {}
            _ => return Err(err(format!("expected header `{kind} {VERSION} ...`"))),
        }
        let mut fields = BTreeMap::new();
        for token in tokens {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| err(format!("malformed header field {token:?}")))?;
            if fields.insert(key.to_string(), value.to_string()).is_some() {
                return Err(err(format!("duplicate header field {key:?}")));
            }
        }
        Ok(Self { fields })
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.fields
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Parse {
                line: 1,
                msg: format!("missing header field {key:?}"),
            })
    }

    pub fn get_usize(&self, key: &str) -> Result<usize> {
        self.get(key)?.parse().map_err(|_| Error::Parse {
            line: 1,
            msg: format!("header field {key:?} is not a nonnegative integer"),
        })
    }

    pub fn get_bool(&self, key: &str) -> Result<bool> {
        self.get(key)?.parse().map_err(|_| Error::Parse {
            line: 1,
            msg: format!("header field {key:?} is not a boolean"),
        })
    }
}

/// Non-comment, non-blank lines with their 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Header kind of a text file (`kiss-vectors`, `kiss-gram`, ...).
pub fn sniff_kind(text: &str) -> Option<&str> {
    content_lines(text).next()?.1.split_whitespace().next()
}
