//! Byzantine strategies. An adversary speaks for every faulty slot, sees what
//! those slots receive, and knows all public data. Most strategies run an
//! honest shadow copy of each faulty node and distort its transmissions.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::digraph::{NodeId, NodeSet, Path};
use crate::protocol::trace::{NullSink, Slot};
use crate::protocol::{Bit, ConsensusNode, Delivery, FloodMessage, NodeProgram, ProtocolContext};

pub trait Adversary: Send {
    fn name(&self) -> &str;
    /// Transmissions of faulty slots for `round`; at most one per slot.
    fn transmit(&mut self, round: u64) -> Vec<(Slot, Vec<FloodMessage>)>;
    /// What faulty `slot` received in `round`.
    fn observe(&mut self, round: u64, slot: Slot, inbox: &[Delivery]);
}

/// Controls nothing. Used for fault-free runs.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoAdversary;

impl Adversary for NoAdversary {
    fn name(&self) -> &str {
        "none"
    }
    fn transmit(&mut self, _: u64) -> Vec<(Slot, Vec<FloodMessage>)> {
        Vec::new()
    }
    fn observe(&mut self, _: u64, _: Slot, _: &[Delivery]) {}
}

/// Public knowledge handed to an adversary at setup.
#[derive(Clone, Debug)]
pub struct AdversaryContext {
    pub protocol: Arc<ProtocolContext>,
    pub faulty: NodeSet,
    /// Inputs of all nodes; the adversary uses those of faulty nodes.
    pub inputs: Vec<Bit>,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdversaryKind {
    /// Never transmits.
    Silent,
    /// Relays honestly but flips every forwarded value.
    BitFlip,
    /// Honest traffic plus messages whose paths do not exist.
    PathForger,
    /// Relays honestly but never initiates a flood.
    Withholder,
    /// Sends both values on the same path, and replays old paths flipped.
    SplitBrain,
    /// Seeded random mix of silence, flips and garbage.
    Random,
}

impl AdversaryKind {
    pub const ALL: [AdversaryKind; 6] = [
        AdversaryKind::Silent,
        AdversaryKind::BitFlip,
        AdversaryKind::PathForger,
        AdversaryKind::Withholder,
        AdversaryKind::SplitBrain,
        AdversaryKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AdversaryKind::Silent => "silent",
            AdversaryKind::BitFlip => "bit-flip",
            AdversaryKind::PathForger => "path-forger",
            AdversaryKind::Withholder => "withholder",
            AdversaryKind::SplitBrain => "split-brain",
            AdversaryKind::Random => "random",
        }
    }

    pub fn build(self, ctx: AdversaryContext) -> Box<dyn Adversary> {
        match self {
            AdversaryKind::Silent => Box::new(Silent),
            AdversaryKind::Random => Box::new(RandomAdversary {
                rng: ChaCha8Rng::seed_from_u64(ctx.seed),
                shadows: Shadows::new(&ctx),
                n: ctx.protocol.n(),
            }),
            kind => Box::new(Distorting {
                kind,
                protocol: Arc::clone(&ctx.protocol),
                shadows: Shadows::new(&ctx),
                previous: Vec::new(),
            }),
        }
    }
}

impl fmt::Display for AdversaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AdversaryKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        AdversaryKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = AdversaryKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown adversary {s:?}; expected one of {}", names.join(", "))
            })
    }
}

/// Honest copies of the faulty nodes, fed with what those nodes receive.
struct Shadows {
    nodes: Vec<(Slot, ConsensusNode)>,
}

impl Shadows {
    fn new(ctx: &AdversaryContext) -> Self {
        let nodes = ctx
            .faulty
            .iter()
            .map(|v| {
                let node = ConsensusNode::new(Arc::clone(&ctx.protocol), v, v.index(), ctx.inputs[v.index()]);
                (v.index(), node)
            })
            .collect();
        Shadows { nodes }
    }

    fn transmit(&mut self, round: u64) -> Vec<(Slot, NodeId, Vec<FloodMessage>)> {
        self.nodes
            .iter_mut()
            .map(|(slot, node)| (*slot, node.id(), node.transmit(round).unwrap_or_default()))
            .collect()
    }

    fn observe(&mut self, round: u64, slot: Slot, inbox: &[Delivery]) {
        if let Some((_, node)) = self.nodes.iter_mut().find(|(s, _)| *s == slot) {
            node.deliver(round, inbox, &mut NullSink);
        }
    }
}

struct Silent;

impl Adversary for Silent {
    fn name(&self) -> &str {
        AdversaryKind::Silent.name()
    }
    fn transmit(&mut self, _: u64) -> Vec<(Slot, Vec<FloodMessage>)> {
        Vec::new()
    }
    fn observe(&mut self, _: u64, _: Slot, _: &[Delivery]) {}
}

fn flipped(m: &FloodMessage) -> FloodMessage {
    FloodMessage {
        value: m.value.flip(),
        path: m.path.clone(),
    }
}

/// Deterministic distortions of the shadow's honest traffic.
struct Distorting {
    kind: AdversaryKind,
    protocol: Arc<ProtocolContext>,
    shadows: Shadows,
    /// Honest batches of the previous round, per slot.
    previous: Vec<(Slot, Vec<FloodMessage>)>,
}

impl Distorting {
    fn distort(&self, round: u64, me: NodeId, slot: Slot, honest: &[FloodMessage]) -> Vec<FloodMessage> {
        match self.kind {
            AdversaryKind::BitFlip => honest
                .iter()
                .map(|m| if m.path.is_empty() { m.clone() } else { flipped(m) })
                .collect(),
            AdversaryKind::Withholder => honest.iter().filter(|m| !m.path.is_empty()).cloned().collect(),
            AdversaryKind::PathForger => {
                let mut out = honest.to_vec();
                for m in honest {
                    // The sender's own id on the path makes it non-simple.
                    out.push(FloodMessage {
                        value: m.value.flip(),
                        path: m.path.extended(me),
                    });
                }
                out
            }
            AdversaryKind::SplitBrain => {
                let mut out = Vec::with_capacity(honest.len() * 3);
                for m in honest {
                    if round % 2 == 0 {
                        out.push(flipped(m));
                        out.push(m.clone());
                    } else {
                        out.push(m.clone());
                        out.push(flipped(m));
                    }
                }
                if let Some((_, prev)) = self.previous.iter().find(|(s, _)| *s == slot) {
                    out.extend(prev.iter().map(flipped));
                }
                out
            }
            AdversaryKind::Silent | AdversaryKind::Random => unreachable!("handled elsewhere"),
        }
    }
}

impl Adversary for Distorting {
    fn name(&self) -> &str {
        self.kind.name()
    }

    fn transmit(&mut self, round: u64) -> Vec<(Slot, Vec<FloodMessage>)> {
        let honest = self.shadows.transmit(round);
        let mut out = Vec::new();
        for (slot, me, batch) in &honest {
            let mut distorted = self.distort(round, *me, *slot, batch);
            if self.kind == AdversaryKind::PathForger {
                // Also claim an edge into this node that does not exist.
                let g = self.protocol.graph();
                if let Some(w) = (g.nodes() - g.in_neighbors(*me)).without(*me).first() {
                    distorted.push(FloodMessage {
                        value: Bit::Zero,
                        path: Path::singleton(w),
                    });
                }
            }
            if !distorted.is_empty() {
                out.push((*slot, distorted));
            }
        }
        self.previous = honest.into_iter().map(|(s, _, b)| (s, b)).collect();
        out
    }

    fn observe(&mut self, round: u64, slot: Slot, inbox: &[Delivery]) {
        self.shadows.observe(round, slot, inbox);
    }
}

/// Each round and faulty node: silence, honest traffic, random flips, or
/// honest traffic padded with random messages.
struct RandomAdversary {
    rng: ChaCha8Rng,
    shadows: Shadows,
    n: usize,
}

impl Adversary for RandomAdversary {
    fn name(&self) -> &str {
        AdversaryKind::Random.name()
    }

    fn transmit(&mut self, round: u64) -> Vec<(Slot, Vec<FloodMessage>)> {
        let honest = self.shadows.transmit(round);
        let mut out = Vec::new();
        for (slot, _, batch) in honest {
            let msgs = match self.rng.gen_range(0..4u8) {
                0 => Vec::new(),
                1 => batch,
                2 => batch
                    .into_iter()
                    .map(|m| if self.rng.gen_bool(0.5) { flipped(&m) } else { m })
                    .collect(),
                _ => {
                    let mut msgs = batch;
                    for _ in 0..self.rng.gen_range(1..=3) {
                        let len = self.rng.gen_range(0..self.n);
                        let path = Path::from_nodes((0..len).map(|_| NodeId::new(self.rng.gen_range(0..self.n))));
                        msgs.push(FloodMessage {
                            value: Bit::from(self.rng.gen_bool(0.5)),
                            path,
                        });
                    }
                    msgs
                }
            };
            if !msgs.is_empty() {
                out.push((slot, msgs));
            }
        }
        out
    }

    fn observe(&mut self, round: u64, slot: Slot, inbox: &[Delivery]) {
        self.shadows.observe(round, slot, inbox);
    }
}
