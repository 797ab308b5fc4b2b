//! Structured run trace. Events are emitted in a fixed order, so a trace is a
//! pure function of the run parameters.

use serde::{Deserialize, Serialize};

use super::{Bit, FloodMessage, Outcome, Support};
use crate::digraph::{NodeId, NodeSet};

/// Network slots are the units the engine schedules. In a plain run slot `i`
/// is node `i`; in a copy network several slots share one node label.
pub type Slot = usize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunHeader {
    pub graph_hash: String,
    pub n: usize,
    pub f: usize,
    /// Slots controlled by the adversary.
    pub faulty: Vec<Slot>,
    pub adversary: String,
    pub seed: u64,
    /// Input per slot.
    pub inputs: Vec<Bit>,
    /// Node label per slot.
    pub labels: Vec<NodeId>,
    pub round_budget: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateStep {
    /// Update inside the source component after the first flood.
    Inside,
    /// Update outside the source component after the second flood.
    Outside,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TraceEvent {
    Header(RunHeader),
    /// One transmission, heard by every out-neighbor of `slot`.
    Broadcast {
        round: u64,
        slot: Slot,
        messages: Vec<FloodMessage>,
    },
    /// A receiver's handling of one message.
    Decision {
        round: u64,
        slot: Slot,
        from_slot: Slot,
        message: FloodMessage,
        #[serde(flatten)]
        outcome: Outcome,
    },
    /// `(1, ⊥)` substituted for a missing initiation from node `from`.
    Default {
        round: u64,
        slot: Slot,
        from: NodeId,
    },
    Classified {
        round: u64,
        phase: usize,
        slot: Slot,
        zero: NodeSet,
        nonzero: NodeSet,
    },
    Updated {
        round: u64,
        phase: usize,
        slot: Slot,
        step: UpdateStep,
        sides: Option<(NodeSet, NodeSet)>,
        support: Option<Support>,
        gamma: Bit,
    },
    /// State of every honest slot after a phase; `None` for faulty slots.
    PhaseEnd {
        round: u64,
        phase: usize,
        states: Vec<Option<Bit>>,
    },
    RoundEnd {
        round: u64,
    },
    Output {
        rounds: u64,
        outputs: Vec<Option<Bit>>,
    },
}

pub trait TraceSink {
    /// Producers skip building events when this is false.
    fn enabled(&self) -> bool {
        true
    }
    fn record(&mut self, event: &TraceEvent);
}

/// Discards everything.
#[derive(Clone, Copy, Debug, Default)]
pub struct NullSink;

impl TraceSink for NullSink {
    fn enabled(&self) -> bool {
        false
    }
    fn record(&mut self, _: &TraceEvent) {}
}

/// Keeps every event in memory.
#[derive(Clone, Debug, Default)]
pub struct VecSink(pub Vec<TraceEvent>);

impl TraceSink for VecSink {
    fn record(&mut self, event: &TraceEvent) {
        self.0.push(event.clone());
    }
}

impl<T: TraceSink + ?Sized> TraceSink for &mut T {
    fn enabled(&self) -> bool {
        (**self).enabled()
    }
    fn record(&mut self, event: &TraceEvent) {
        (**self).record(event)
    }
}
