use std::sync::Arc;

use super::trace::{Slot, TraceEvent, TraceSink, UpdateStep};
use super::{phase_step_c, phase_step_d, phase_step_f, Bit, FloodKind, FloodMessage, FloodState, ProtocolContext};
use crate::digraph::NodeId;

/// Everything one sender transmitted in a round, as seen by a receiver.
#[derive(Clone, Debug)]
pub struct Delivery {
    /// Node label of the sender; authenticated by the engine.
    pub from: NodeId,
    pub from_slot: Slot,
    pub messages: Arc<Vec<FloodMessage>>,
}

/// A deterministic round-based program run by an honest slot.
pub trait NodeProgram: Send {
    /// The transmission for `round`, if any. Called before delivery.
    fn transmit(&mut self, round: u64) -> Option<Vec<FloodMessage>>;
    /// Everything received in `round`, ordered by sender slot.
    fn deliver(&mut self, round: u64, inbox: &[Delivery], sink: &mut dyn TraceSink);
    /// Current state value; the output once the run is over.
    fn state(&self) -> Bit;
}

/// The consensus algorithm at one node.
pub struct ConsensusNode {
    ctx: Arc<ProtocolContext>,
    me: NodeId,
    slot: Slot,
    gamma: Bit,
    flood: FloodState,
}

impl ConsensusNode {
    pub fn new(ctx: Arc<ProtocolContext>, me: NodeId, slot: Slot, input: Bit) -> Self {
        ConsensusNode {
            ctx,
            me,
            slot,
            gamma: input,
            flood: FloodState::default(),
        }
    }

    pub fn id(&self) -> NodeId {
        self.me
    }

    pub fn gamma(&self) -> Bit {
        self.gamma
    }

    pub fn flood(&self) -> &FloodState {
        &self.flood
    }

    fn finish_candidate_flood(&mut self, round: u64, phase: usize, sink: &mut dyn TraceSink) {
        let ctx = Arc::clone(&self.ctx);
        if !ctx.phase(phase).source.contains(self.me) {
            return;
        }
        let received = self.flood.received();
        let (zero, nonzero) = phase_step_c(&ctx, phase, self.me, self.gamma, received);
        let d = phase_step_d(&ctx, phase, self.me, zero, nonzero, self.gamma, received);
        self.gamma = d.gamma;
        if sink.enabled() {
            sink.record(&TraceEvent::Classified {
                round,
                phase,
                slot: self.slot,
                zero,
                nonzero,
            });
            sink.record(&TraceEvent::Updated {
                round,
                phase,
                slot: self.slot,
                step: UpdateStep::Inside,
                sides: d.sides,
                support: d.support,
                gamma: d.gamma,
            });
        }
    }

    fn finish_source_flood(&mut self, round: u64, phase: usize, sink: &mut dyn TraceSink) {
        if !self.ctx.phase(phase).outside.contains(self.me) {
            return;
        }
        let out = phase_step_f(&self.ctx, phase, self.me, self.gamma, self.flood.received());
        self.gamma = out.gamma;
        if sink.enabled() {
            sink.record(&TraceEvent::Updated {
                round,
                phase,
                slot: self.slot,
                step: UpdateStep::Outside,
                sides: None,
                support: out.support,
                gamma: out.gamma,
            });
        }
    }
}

impl NodeProgram for ConsensusNode {
    fn transmit(&mut self, round: u64) -> Option<Vec<FloodMessage>> {
        let pos = self.ctx.position(round);
        if pos.step == 0 {
            let initiators = self.ctx.initiators(pos.phase, pos.flood);
            self.flood = FloodState::new(initiators);
            return initiators
                .contains(self.me)
                .then(|| vec![FloodMessage::initiate(self.gamma)]);
        }
        let pending = self.flood.take_pending();
        (!pending.is_empty()).then_some(pending)
    }

    fn deliver(&mut self, round: u64, inbox: &[Delivery], sink: &mut dyn TraceSink) {
        let pos = self.ctx.position(round);
        let g = self.ctx.graph();
        for d in inbox {
            for m in d.messages.iter() {
                let outcome = self.flood.receive(g, self.me, d.from, m);
                if sink.enabled() {
                    sink.record(&TraceEvent::Decision {
                        round,
                        slot: self.slot,
                        from_slot: d.from_slot,
                        message: m.clone(),
                        outcome,
                    });
                }
            }
        }
        if pos.step == 0 {
            let missing = self.flood.apply_defaults(g, self.me);
            if sink.enabled() {
                for from in missing.iter() {
                    sink.record(&TraceEvent::Default {
                        round,
                        slot: self.slot,
                        from,
                    });
                }
            }
        }
        if pos.step + 1 == self.ctx.n() {
            match pos.flood {
                FloodKind::Candidates => self.finish_candidate_flood(round, pos.phase, sink),
                FloodKind::Source => self.finish_source_flood(round, pos.phase, sink),
            }
        }
    }

    fn state(&self) -> Bit {
        self.gamma
    }
}
