//! `kiss-cosines v1 dim=<n> samples=<k> converged=<bool>` reports.
//!
//! One `value <decimal> <exact-or--> <count> <stable>` line per value above
//! the noise floor, ascending, then a `set` line listing the recovered set.

use std::fmt::Write as _;
use std::path::Path;

use super::{content_lines, read_text, Header};
use crate::error::{Error, Result};
use crate::simulate::CosineSet;

pub const KIND: &str = "kiss-cosines";

#[derive(Clone, Debug, PartialEq)]
pub struct ReportEntry {
    pub value: f64,
    pub exact: Option<String>,
    pub count: u64,
    pub stable: bool,
}

impl ReportEntry {
    pub fn label(&self) -> String {
        self.exact.clone().unwrap_or_else(|| format!("{:?}", self.value))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CosineReport {
    pub dim: usize,
    pub samples: u64,
    pub converged: bool,
    pub entries: Vec<ReportEntry>,
}

impl CosineReport {
    pub fn from_set(set: &CosineSet) -> Self {
        Self {
            dim: set.dim,
            samples: set.histogram.total_samples,
            converged: set.converged,
            entries: set
                .values
                .iter()
                .map(|v| ReportEntry {
                    value: v.value,
                    exact: v.exact.as_ref().map(ToString::to_string),
                    count: v.count(),
                    stable: v.stable(),
                })
                .collect(),
        }
    }

    /// Labels of the stable values.
    pub fn set(&self) -> Vec<String> {
        self.entries.iter().filter(|e| e.stable).map(ReportEntry::label).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{KIND} {} dim={} samples={} converged={}\n",
            super::VERSION,
            self.dim,
            self.samples,
            self.converged
        );
        for e in &self.entries {
            let exact = e.exact.as_deref().unwrap_or("-");
            let _ = writeln!(out, "value {:?} {exact} {} {}", e.value, e.count, e.stable);
        }
        let _ = writeln!(out, "set {}", self.set().join(" "));
        out
    }
}

pub fn parse_report(text: &str) -> Result<CosineReport> {
    let mut lines = content_lines(text);
    let (_, first) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
    let header = Header::parse(first, KIND)?;
    let mut report = CosineReport {
        dim: header.get_usize("dim")?,
        samples: header.get_usize("samples")? as u64,
        converged: header.get_bool("converged")?,
        entries: Vec::new(),
    };
    let mut set_line = None;
    for (line, text) in lines {
        let err = |msg: &str| Error::Parse { line, msg: msg.to_string() };
        let tokens: Vec<&str> = text.split_whitespace().collect();
        match tokens.first() {
            Some(&"value") if tokens.len() == 5 => report.entries.push(ReportEntry {
                value: tokens[1].parse().map_err(|_| err("bad value"))?,
                exact: (tokens[2] != "-").then(|| tokens[2].to_string()),
                count: tokens[3].parse().map_err(|_| err("bad count"))?,
                stable: tokens[4].parse().map_err(|_| err("bad stability flag"))?,
            }),
            Some(&"set") => set_line = Some((line, tokens[1..].iter().map(|s| s.to_string()).collect::<Vec<_>>())),
            _ => return Err(err("expected a `value` or `set` line")),
        }
    }
    match set_line {
        Some((_, set)) if set == report.set() => Ok(report),
        Some((line, _)) => Err(Error::Parse { line, msg: "set line disagrees with the values".into() }),
        None => Err(Error::Parse { line: 1, msg: "missing set line".into() }),
    }
}

pub fn read_report(path: &Path) -> Result<CosineReport> {
    parse_report(&read_text(path)?)
}
