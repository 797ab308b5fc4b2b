use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use lbcast::digraph::{parse_edge_list, Digraph, NodeId, NodeSet};
use lbcast::protocol::Bit;
use lbcast::simulator::{AdversaryKind, GeneratorSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// An edge-list file, or `gen:<family>:...` for a generated graph.
#[derive(Clone, Debug)]
pub enum GraphSource {
    File(PathBuf),
    Generated(GeneratorSpec),
}

impl FromStr for GraphSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.strip_prefix("gen:") {
            Some(spec) => Ok(GraphSource::Generated(spec.parse()?)),
            None => Ok(GraphSource::File(PathBuf::from(s))),
        }
    }
}

impl GraphSource {
    pub fn load(&self) -> Result<Digraph> {
        match self {
            GraphSource::File(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                parse_edge_list(&text).with_context(|| format!("parsing {}", path.display()))
            }
            GraphSource::Generated(spec) => spec.generate().with_context(|| format!("generating {spec}")),
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct GraphArgs {
    /// Edge-list file, or gen:SPEC (e.g. gen:complete:4, gen:random:6:0.5:7).
    #[arg(long)]
    pub graph: GraphSource,
    /// Maximum number of Byzantine nodes.
    #[arg(long, short = 'f')]
    pub f: usize,
}

impl GraphArgs {
    pub fn load(&self) -> Result<Digraph> {
        let g = self.graph.load()?;
        if self.f == 0 || self.f >= g.n() {
            bail!("f must satisfy 0 < f < n, got f={} with n={}", self.f, g.n());
        }
        Ok(g)
    }
}

/// `all-zero`, `all-one`, `enumerate`, a bit string such as `0110`, or a
/// map such as `0=1,3=1` (unlisted nodes get 0).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputSpec {
    AllZero,
    AllOne,
    Enumerate,
    Bits(Vec<Bit>),
    Map(Vec<(usize, Bit)>),
}

fn bit(c: &str) -> Result<Bit, String> {
    match c {
        "0" => Ok(Bit::Zero),
        "1" => Ok(Bit::One),
        other => Err(format!("expected 0 or 1, found {other:?}")),
    }
}

impl FromStr for InputSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all-zero" => Ok(InputSpec::AllZero),
            "all-one" => Ok(InputSpec::AllOne),
            "enumerate" => Ok(InputSpec::Enumerate),
            _ if s.contains('=') => s
                .split(',')
                .map(|pair| {
                    let (node, value) = pair.split_once('=').ok_or_else(|| format!("bad pair {pair:?}"))?;
                    let node = node.trim().parse().map_err(|_| format!("bad node {node:?}"))?;
                    Ok((node, bit(value.trim())?))
                })
                .collect::<Result<_, String>>()
                .map(InputSpec::Map),
            _ if !s.is_empty() && s.bytes().all(|c| c == b'0' || c == b'1') => {
                Ok(InputSpec::Bits(s.bytes().map(|c| Bit::from(c == b'1')).collect()))
            }
            _ => Err(format!("unknown input spec {s:?}; expected all-zero, all-one, enumerate, bits or a node=bit map")),
        }
    }
}

impl InputSpec {
    /// Every input vector this spec stands for. Faulty nodes get 0 when
    /// enumerating.
    pub fn expand(&self, n: usize, faulty: NodeSet) -> Result<Vec<Vec<Bit>>> {
        Ok(match self {
            InputSpec::AllZero => vec![vec![Bit::Zero; n]],
            InputSpec::AllOne => vec![vec![Bit::One; n]],
            InputSpec::Bits(bits) => {
                if bits.len() != n {
                    bail!("{} input bits for {n} nodes", bits.len());
                }
                vec![bits.clone()]
            }
            InputSpec::Map(pairs) => {
                let mut v = vec![Bit::Zero; n];
                for &(node, b) in pairs {
                    if node >= n {
                        bail!("input for node {node}, but the graph has {n} nodes");
                    }
                    v[node] = b;
                }
                vec![v]
            }
            InputSpec::Enumerate => {
                let honest: Vec<usize> = (0..n).filter(|&i| !faulty.contains(NodeId::new(i))).collect();
                (0..1u64 << honest.len())
                    .map(|mask| {
                        let mut v = vec![Bit::Zero; n];
                        for (k, &i) in honest.iter().enumerate() {
                            v[i] = Bit::from(mask >> k & 1 == 1);
                        }
                        v
                    })
                    .collect()
            }
        })
    }
}

/// `none`, `sweep`, or node ids such as `1,3` or `{1,3}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FaultySpec {
    Set(Vec<usize>),
    Sweep,
}

impl FromStr for FaultySpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "sweep" {
            return Ok(FaultySpec::Sweep);
        }
        if s == "none" {
            return Ok(FaultySpec::Set(Vec::new()));
        }
        let inner = s.trim_start_matches('{').trim_end_matches('}');
        inner
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|_| format!("bad node id {t:?}")))
            .collect::<Result<_, _>>()
            .map(FaultySpec::Set)
    }
}

impl FaultySpec {
    pub fn expand(&self, g: &Digraph, f: usize) -> Result<Vec<NodeSet>> {
        match self {
            FaultySpec::Sweep => Ok(g.nodes().subsets_up_to(f)),
            FaultySpec::Set(ids) => {
                let mut set = NodeSet::EMPTY;
                for &id in ids {
                    if id >= g.n() {
                        bail!("faulty node {id} does not exist (n={})", g.n());
                    }
                    set.insert(NodeId::new(id));
                }
                if set.len() > f {
                    bail!("{} faulty nodes exceed f={f}", set.len());
                }
                Ok(vec![set])
            }
        }
    }
}

/// One strategy by name, or `suite` for all of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AdversarySpec {
    One(AdversaryKind),
    Suite,
}

impl FromStr for AdversarySpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "suite" {
            Ok(AdversarySpec::Suite)
        } else {
            s.parse().map(AdversarySpec::One)
        }
    }
}

impl AdversarySpec {
    pub fn kinds(&self) -> Vec<AdversaryKind> {
        match self {
            AdversarySpec::One(k) => vec![*k],
            AdversarySpec::Suite => AdversaryKind::ALL.to_vec(),
        }
    }
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value = "all-zero")]
    pub inputs: InputSpec,
    /// Faulty nodes, e.g. `2` or `{1,3}`.
    #[arg(long, default_value = "none")]
    pub faulty: FaultySpec,
    #[arg(long, default_value = "silent")]
    pub adversary: AdversaryKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for trace.jsonl and report.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value = "enumerate")]
    pub inputs: InputSpec,
    #[arg(long, default_value = "sweep")]
    pub faulty: FaultySpec,
    #[arg(long, default_value = "suite")]
    pub adversary: AdversarySpec,
    /// Base seed; each run gets this plus its index.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for sweep.csv and summary.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct NecessityArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Directory for trace.jsonl and report.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// complete:N, cycle:N, random:N:P:SEED, layered:W1,W2,... or threshold:N:F
    pub spec: GeneratorSpec,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_specs() {
        assert_eq!("0110".parse(), Ok(InputSpec::Bits(vec![Bit::Zero, Bit::One, Bit::One, Bit::Zero])));
        assert_eq!("2=1".parse(), Ok(InputSpec::Map(vec![(2, Bit::One)])));
        assert!("012".parse::<InputSpec>().is_err());
        let all = InputSpec::Enumerate.expand(3, NodeSet::singleton(NodeId(1))).unwrap();
        assert_eq!(all.len(), 4);
        assert!(all.iter().all(|v| v[1] == Bit::Zero));
        assert!(InputSpec::Bits(vec![Bit::One]).expand(2, NodeSet::EMPTY).is_err());
    }

    #[test]
    fn faulty_specs() {
        let g = Digraph::complete(4).unwrap();
        assert_eq!("{1,3}".parse(), Ok(FaultySpec::Set(vec![1, 3])));
        assert_eq!("none".parse::<FaultySpec>().unwrap().expand(&g, 1).unwrap(), vec![NodeSet::EMPTY]);
        assert_eq!("sweep".parse::<FaultySpec>().unwrap().expand(&g, 1).unwrap().len(), 5);
        assert!("1,3".parse::<FaultySpec>().unwrap().expand(&g, 1).is_err());
        assert!("7".parse::<FaultySpec>().unwrap().expand(&g, 1).is_err());
    }

    #[test]
    fn graph_sources() {
        let g = "gen:complete:4".parse::<GraphSource>().unwrap().load().unwrap();
        assert_eq!(g.edge_count(), 12);
        assert!("gen:nope".parse::<GraphSource>().is_err());
    }
}
