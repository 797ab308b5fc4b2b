use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use lbcast::conditions::{check_sc, ConditionWitness, SC_MAX_NODES};
use lbcast::digraph::Digraph;
use lbcast::protocol::Bit;
use serde::Serialize;

/// Whether the graph is known to meet SC.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScStatus {
    Holds,
    Violated,
    /// Too large to decide.
    Unknown,
}

impl ScStatus {
    pub fn of(g: &Digraph, f: usize) -> Result<(ScStatus, Option<ConditionWitness>)> {
        if g.n() > SC_MAX_NODES {
            log::warn!("n={} is above the SC cap of {SC_MAX_NODES}; guarantee status unknown", g.n());
            return Ok((ScStatus::Unknown, None));
        }
        let w = check_sc(g, f)?;
        let status = if w.holds() { ScStatus::Holds } else { ScStatus::Violated };
        Ok((status, Some(w)))
    }

    pub fn describe(self) -> &'static str {
        match self {
            ScStatus::Holds => "SC holds: agreement and validity are guaranteed",
            ScStatus::Violated => "SC is violated: no guarantee applies",
            ScStatus::Unknown => "SC not checked (graph too large)",
        }
    }
}

pub fn bits(v: &[Bit]) -> String {
    v.iter().map(|b| b.to_string()).collect()
}

/// Outputs with `-` for faulty nodes.
pub fn outputs(v: &[Option<Bit>]) -> String {
    v.iter().map(|b| b.map_or("-".to_string(), |b| b.to_string())).collect()
}

pub fn ok(flag: bool) -> &'static str {
    if flag {
        "OK"
    } else {
        "FAIL"
    }
}

pub fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}
