use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{Bit, FloodMessage};
use crate::digraph::{Digraph, NodeId, NodeSet, Path};

/// What a receiver did with one incoming flood message. Discards carry the
/// number of the rule that fired: 1 invalid path, 2 repeated path from the
/// same sender, 3 path through the receiver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Accepted,
    Discarded { rule: u8 },
}

/// Applies the three discard rules in order, without side effects. `seen`
/// holds the extended paths `Π-u` already received during this flood.
pub fn classify(
    g: &Digraph,
    receiver: NodeId,
    from: NodeId,
    msg: &FloodMessage,
    seen: &HashSet<Path>,
) -> Outcome {
    let extended = msg.path.extended(from);
    if !extended.is_simple_path_in(g) {
        return Outcome::Discarded { rule: 1 };
    }
    if seen.contains(&extended) {
        return Outcome::Discarded { rule: 2 };
    }
    if msg.path.contains(receiver) {
        return Outcome::Discarded { rule: 3 };
    }
    Outcome::Accepted
}

/// Values a node has received, keyed by the full path from the original
/// sender to the node itself.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReceivedValues {
    map: BTreeMap<Path, Bit>,
}

impl ReceivedValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, path: &Path) -> Option<Bit> {
        self.map.get(path).copied()
    }

    pub fn insert(&mut self, path: Path, value: Bit) {
        self.map.insert(path, value);
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Path, Bit)> {
        self.map.iter().map(|(p, &b)| (p, b))
    }
}

impl FromIterator<(Path, Bit)> for ReceivedValues {
    fn from_iter<I: IntoIterator<Item = (Path, Bit)>>(iter: I) -> Self {
        ReceivedValues {
            map: iter.into_iter().collect(),
        }
    }
}

/// One node's state for a single flood.
#[derive(Clone, Debug, Default)]
pub struct FloodState {
    initiators: NodeSet,
    seen: HashSet<Path>,
    received: ReceivedValues,
    pending: Vec<FloodMessage>,
}

impl FloodState {
    pub fn new(initiators: NodeSet) -> Self {
        FloodState {
            initiators,
            ..Self::default()
        }
    }

    pub fn initiators(&self) -> NodeSet {
        self.initiators
    }

    pub fn seen(&self) -> &HashSet<Path> {
        &self.seen
    }

    pub fn received(&self) -> &ReceivedValues {
        &self.received
    }

    pub fn into_received(self) -> ReceivedValues {
        self.received
    }

    /// Handles one message from in-neighbor `from` at node `me`. Accepted
    /// messages are recorded and queued for forwarding.
    pub fn receive(&mut self, g: &Digraph, me: NodeId, from: NodeId, msg: &FloodMessage) -> Outcome {
        let outcome = classify(g, me, from, msg, &self.seen);
        if !matches!(outcome, Outcome::Discarded { rule: 1 }) {
            self.seen.insert(msg.path.extended(from));
        }
        if outcome == Outcome::Accepted {
            let forwarded = msg.path.extended(from);
            self.received.insert(forwarded.extended(me), msg.value);
            self.pending.push(FloodMessage {
                value: msg.value,
                path: forwarded,
            });
        }
        outcome
    }

    /// After the first round: every initiating in-neighbor that sent no
    /// initiation is treated as having sent `(1, ⊥)`. Returns those neighbors.
    pub fn apply_defaults(&mut self, g: &Digraph, me: NodeId) -> NodeSet {
        let mut missing = NodeSet::EMPTY;
        for u in (g.in_neighbors(me) & self.initiators).iter() {
            if !self.seen.contains(&Path::singleton(u)) {
                missing.insert(u);
                let outcome = self.receive(g, me, u, &FloodMessage::initiate(Bit::One));
                debug_assert_eq!(outcome, Outcome::Accepted);
            }
        }
        missing
    }

    /// Messages accepted since the last call, to be forwarded next round.
    pub fn take_pending(&mut self) -> Vec<FloodMessage> {
        std::mem::take(&mut self.pending)
    }
}
