//! Graph families used by tests, benchmarks and the CLI.
//!
//! Text form: `complete:N`, `cycle:N`, `random:N:P:SEED`,
//! `layered:W1,W2,...`, `threshold:N:F`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::{Digraph, GraphError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("threshold graph needs n > 2f, got n={n}, f={f}")]
    ThresholdTooSmall { n: usize, f: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// Every ordered pair of distinct nodes.
    Complete { n: usize },
    /// `0 -> 1 -> ... -> n-1 -> 0`.
    Cycle { n: usize },
    /// Each ordered pair independently with probability `p`.
    Random { n: usize, p: f64, seed: u64 },
    /// All edges from each layer to the next.
    Layered { widths: Vec<usize> },
    /// Undirected graph with vertex connectivity and minimum degree `2f`,
    /// every edge in both directions.
    Threshold { n: usize, f: usize },
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<Digraph, GeneratorError> {
        match *self {
            GeneratorSpec::Complete { n } => Ok(Digraph::complete(n)?),
            GeneratorSpec::Cycle { n } => Ok(Digraph::cycle(n)?),
            GeneratorSpec::Random { n, p, seed } => Ok(random(n, p, seed)?),
            GeneratorSpec::Layered { ref widths } => Ok(layered(widths)?),
            GeneratorSpec::Threshold { n, f } => threshold(n, f),
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Complete { n } => write!(f, "complete:{n}"),
            GeneratorSpec::Cycle { n } => write!(f, "cycle:{n}"),
            GeneratorSpec::Random { n, p, seed } => write!(f, "random:{n}:{p}:{seed}"),
            GeneratorSpec::Layered { widths } => {
                let w: Vec<String> = widths.iter().map(|w| w.to_string()).collect();
                write!(f, "layered:{}", w.join(","))
            }
            GeneratorSpec::Threshold { n, f: budget } => write!(f, "threshold:{n}:{budget}"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let int = |i: usize, what: &str| -> Result<usize, String> {
            parts
                .get(i)
                .ok_or_else(|| format!("{s:?}: missing {what}"))?
                .parse()
                .map_err(|e| format!("{s:?}: bad {what}: {e}"))
        };
        let arity = |k: usize| -> Result<(), String> {
            if parts.len() == k {
                Ok(())
            } else {
                Err(format!("{s:?}: expected {} fields after the family", k - 1))
            }
        };
        let spec = match parts[0] {
            "complete" => {
                arity(2)?;
                GeneratorSpec::Complete { n: int(1, "n")? }
            }
            "cycle" => {
                arity(2)?;
                GeneratorSpec::Cycle { n: int(1, "n")? }
            }
            "random" => {
                arity(4)?;
                let p: f64 = parts[2].parse().map_err(|e| format!("{s:?}: bad p: {e}"))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(format!("{s:?}: p must be in [0, 1]"));
                }
                let seed = parts[3].parse().map_err(|e| format!("{s:?}: bad seed: {e}"))?;
                GeneratorSpec::Random { n: int(1, "n")?, p, seed }
            }
            "layered" => {
                arity(2)?;
                let widths = parts[1]
                    .split(',')
                    .map(|w| w.parse::<usize>().map_err(|e| format!("{s:?}: bad width: {e}")))
                    .collect::<Result<Vec<_>, _>>()?;
                if widths.contains(&0) {
                    return Err(format!("{s:?}: layer widths must be positive"));
                }
                GeneratorSpec::Layered { widths }
            }
            "threshold" => {
                arity(3)?;
                GeneratorSpec::Threshold {
                    n: int(1, "n")?,
                    f: int(2, "f")?,
                }
            }
            other => {
                return Err(format!(
                    "unknown family {other:?}; expected complete, cycle, random, layered or threshold"
                ))
            }
        };
        Ok(spec)
    }
}

pub fn random(n: usize, p: f64, seed: u64) -> Result<Digraph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p.clamp(0.0, 1.0)) {
                edges.push((u, v));
            }
        }
    }
    Digraph::new(n, edges)
}

pub fn layered(widths: &[usize]) -> Result<Digraph, GraphError> {
    let mut start = 0;
    let mut edges = Vec::new();
    for pair in widths.windows(2) {
        let next = start + pair[0];
        for u in start..next {
            for v in next..next + pair[1] {
                edges.push((u, v));
            }
        }
        start = next;
    }
    Digraph::new(widths.iter().sum(), edges)
}

/// Harary graph `H_{2f,n}`: node `i` is adjacent to `i ± 1, ..., i ± f`.
/// Its connectivity `2f` is at least `⌊3f/2⌋ + 1`. For `f = 0` it is a path.
pub fn threshold(n: usize, f: usize) -> Result<Digraph, GeneratorError> {
    if n == 0 || 2 * f >= n {
        return Err(GeneratorError::ThresholdTooSmall { n, f });
    }
    let mut edges = Vec::new();
    if f == 0 {
        for i in 1..n {
            edges.push((i - 1, i));
            edges.push((i, i - 1));
        }
    }
    for i in 0..n {
        for d in 1..=f {
            let j = (i + d) % n;
            edges.push((i, j));
            edges.push((j, i));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Ok(Digraph::new(n, edges)?)
}
