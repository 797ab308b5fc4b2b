use std::sync::Arc;

use thiserror::Error;

use super::Adversary;
use crate::digraph::{Digraph, NodeId};
use crate::protocol::trace::{Slot, TraceEvent, TraceSink};
use crate::protocol::{Delivery, FloodMessage, NodeProgram};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("round {round}: adversary sent two transmissions for slot {slot}")]
    Equivocation { round: u64, slot: Slot },
    #[error("round {round}: adversary tried to transmit for honest slot {slot}")]
    NotFaulty { round: u64, slot: Slot },
    #[error("round {round}: slot {slot} does not exist")]
    UnknownSlot { round: u64, slot: Slot },
    #[error("{programs} programs for {slots} slots")]
    RosterMismatch { programs: usize, slots: usize },
}

/// Communication topology over slots. Every slot carries the label of the
/// node whose program it runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    labels: Vec<NodeId>,
    out: Vec<Vec<Slot>>,
    inn: Vec<Vec<Slot>>,
}

impl Network {
    /// One slot per node, same edges.
    pub fn from_graph(g: &Digraph) -> Self {
        let labels = g.nodes().iter().collect();
        Self::from_edges(labels, g.edges().map(|(u, v)| (u.index(), v.index())))
    }

    pub fn from_edges<I: IntoIterator<Item = (Slot, Slot)>>(labels: Vec<NodeId>, edges: I) -> Self {
        let k = labels.len();
        let mut out = vec![Vec::new(); k];
        let mut inn = vec![Vec::new(); k];
        for (a, b) in edges {
            out[a].push(b);
            inn[b].push(a);
        }
        for list in out.iter_mut().chain(inn.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        Network { labels, out, inn }
    }

    pub fn slots(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, slot: Slot) -> NodeId {
        self.labels[slot]
    }

    pub fn labels(&self) -> &[NodeId] {
        &self.labels
    }

    pub fn out_slots(&self, slot: Slot) -> &[Slot] {
        &self.out[slot]
    }

    pub fn in_slots(&self, slot: Slot) -> &[Slot] {
        &self.inn[slot]
    }

    pub fn edges(&self) -> impl Iterator<Item = (Slot, Slot)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().map(move |&b| (a, b)))
    }
}

/// Round budget and snapshot cadence for one run.
#[derive(Clone, Copy, Debug)]
pub struct EngineConfig {
    pub rounds: u64,
    /// Emit a state snapshot after every this many rounds.
    pub phase_len: Option<u64>,
}

/// Runs `config.rounds` synchronous rounds. `None` entries in `programs`
/// are faulty slots driven by `adversary`. Each round every slot transmits at
/// most once, and a transmission reaches all its out-neighbors unchanged.
pub fn run_rounds(
    network: &Network,
    programs: &mut [Option<Box<dyn NodeProgram + '_>>],
    adversary: &mut dyn Adversary,
    config: EngineConfig,
    sink: &mut dyn TraceSink,
) -> Result<u64, EngineError> {
    let k = network.slots();
    if programs.len() != k {
        return Err(EngineError::RosterMismatch {
            programs: programs.len(),
            slots: k,
        });
    }
    let mut sent: Vec<Option<Arc<Vec<FloodMessage>>>> = vec![None; k];
    for round in 0..config.rounds {
        sent.iter_mut().for_each(|s| *s = None);
        for (slot, program) in programs.iter_mut().enumerate() {
            if let Some(p) = program {
                sent[slot] = p.transmit(round).map(Arc::new);
            }
        }
        for (slot, batch) in adversary.transmit(round) {
            if slot >= k {
                return Err(EngineError::UnknownSlot { round, slot });
            }
            if programs[slot].is_some() {
                return Err(EngineError::NotFaulty { round, slot });
            }
            if sent[slot].is_some() {
                return Err(EngineError::Equivocation { round, slot });
            }
            sent[slot] = Some(Arc::new(batch));
        }
        if sink.enabled() {
            for (slot, batch) in sent.iter().enumerate() {
                if let Some(b) = batch {
                    sink.record(&TraceEvent::Broadcast {
                        round,
                        slot,
                        messages: b.as_ref().clone(),
                    });
                }
            }
        }
        let mut inbox = Vec::new();
        for slot in 0..k {
            inbox.clear();
            for &from in network.in_slots(slot) {
                if let Some(b) = &sent[from] {
                    inbox.push(Delivery {
                        from: network.label(from),
                        from_slot: from,
                        messages: Arc::clone(b),
                    });
                }
            }
            match &mut programs[slot] {
                Some(p) => p.deliver(round, &inbox, sink),
                None => adversary.observe(round, slot, &inbox),
            }
        }
        if sink.enabled() {
            sink.record(&TraceEvent::RoundEnd { round });
            if let Some(len) = config.phase_len {
                if (round + 1) % len == 0 {
                    sink.record(&TraceEvent::PhaseEnd {
                        round,
                        phase: (round / len) as usize,
                        states: programs.iter().map(|p| p.as_ref().map(|p| p.state())).collect(),
                    });
                }
            }
        }
    }
    Ok(config.rounds)
}
