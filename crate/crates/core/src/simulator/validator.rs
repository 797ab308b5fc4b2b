//! Streaming trace checker. It re-derives every accept/discard decision from
//! the raw broadcasts, tracks where each recorded value came from, and checks
//! the per-phase state invariants.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::Serialize;

use super::Network;
use crate::digraph::{Digraph, NodeId, NodeSet, Path};
use crate::protocol::trace::{RunHeader, Slot, TraceEvent, TraceSink, UpdateStep};
use crate::protocol::{Bit, FloodMessage, Outcome, ProtocolContext, Support};

const MAX_REPORTED: usize = 64;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationSummary {
    pub decisions: u64,
    pub accepted: u64,
    /// Discards by rule 1, 2, 3.
    pub discarded: [u64; 3],
    pub defaults: u64,
    /// Recorded values whose path had no faulty relay.
    pub fault_free_checked: u64,
    pub witnesses_checked: u64,
    pub phases_checked: u64,
}

impl ValidationSummary {
    /// Adds the counts of another run.
    pub fn absorb(&mut self, other: &ValidationSummary) {
        self.decisions += other.decisions;
        self.accepted += other.accepted;
        for (a, b) in self.discarded.iter_mut().zip(other.discarded) {
            *a += b;
        }
        self.defaults += other.defaults;
        self.fault_free_checked += other.fault_free_checked;
        self.witnesses_checked += other.witnesses_checked;
        self.phases_checked += other.phases_checked;
    }
}

#[derive(Clone, Copy, Debug)]
struct Provenance {
    value: Bit,
    /// Slot that started the path, when every relay was honest.
    origin: Option<Slot>,
}

#[derive(Default)]
struct SlotFlood {
    seen: HashSet<Path>,
    /// Full label path (ending at this slot) to its provenance.
    recorded: HashMap<Path, Provenance>,
}

pub struct ReplayValidator {
    ctx: Arc<ProtocolContext>,
    network: Arc<Network>,
    /// Check agreement after the phase whose fault set matches the faulty
    /// nodes. Only meaningful on graphs meeting the condition.
    expect_agreement: bool,
    header: Option<RunHeader>,
    faulty: Vec<bool>,
    round: Option<u64>,
    sent: Vec<Option<Vec<FloodMessage>>>,
    heard: HashMap<(Slot, Slot), Vec<FloodMessage>>,
    floods: Vec<SlotFlood>,
    initiated: Vec<Option<Bit>>,
    effective: HashMap<Slot, Bit>,
    phase_start: Vec<Option<Bit>>,
    summary: ValidationSummary,
    errors: Vec<String>,
    error_count: usize,
}

impl ReplayValidator {
    pub fn new(ctx: Arc<ProtocolContext>, network: Arc<Network>, expect_agreement: bool) -> Self {
        let k = network.slots();
        ReplayValidator {
            ctx,
            network,
            expect_agreement,
            header: None,
            faulty: vec![false; k],
            round: None,
            sent: vec![None; k],
            heard: HashMap::new(),
            floods: (0..k).map(|_| SlotFlood::default()).collect(),
            initiated: vec![None; k],
            effective: HashMap::new(),
            phase_start: vec![None; k],
            summary: ValidationSummary::default(),
            errors: Vec::new(),
            error_count: 0,
        }
    }

    pub fn summary(&self) -> &ValidationSummary {
        &self.summary
    }

    pub fn errors(&self) -> &[String] {
        &self.errors
    }

    /// The summary, or the first recorded problems.
    pub fn finish(self) -> Result<ValidationSummary, Vec<String>> {
        if self.error_count == 0 {
            Ok(self.summary)
        } else {
            let mut errors = self.errors;
            if self.error_count > errors.len() {
                errors.push(format!("... {} problems in total", self.error_count));
            }
            Err(errors)
        }
    }

    fn fail(&mut self, msg: String) {
        self.error_count += 1;
        if self.errors.len() < MAX_REPORTED {
            self.errors.push(msg);
        }
    }

    fn graph(&self) -> &Digraph {
        self.ctx.graph()
    }

    fn on_header(&mut self, h: &RunHeader) {
        if h.labels != self.network.labels() {
            self.fail("header labels do not match the network".into());
        }
        for &s in &h.faulty {
            if s < self.faulty.len() {
                self.faulty[s] = true;
            }
        }
        self.phase_start = (0..self.network.slots())
            .map(|s| (!self.faulty[s]).then(|| h.inputs[s]))
            .collect();
        self.header = Some(h.clone());
    }

    fn enter_round(&mut self, round: u64) {
        if self.round == Some(round) {
            return;
        }
        if let Some(prev) = self.round {
            if round != prev + 1 {
                self.fail(format!("round {round} follows round {prev}"));
            }
        } else if round != 0 {
            self.fail(format!("trace starts at round {round}"));
        }
        self.round = Some(round);
        if self.ctx.position(round).step == 0 {
            for f in &mut self.floods {
                *f = SlotFlood::default();
            }
            self.initiated.iter_mut().for_each(|v| *v = None);
            self.effective.clear();
        }
    }

    fn on_broadcast(&mut self, round: u64, slot: Slot, messages: &[FloodMessage]) {
        self.enter_round(round);
        if self.sent[slot].is_some() {
            self.fail(format!("round {round}: slot {slot} transmitted twice"));
        }
        self.sent[slot] = Some(messages.to_vec());
        let pos = self.ctx.position(round);
        if self.faulty[slot] || pos.step != 0 {
            return;
        }
        let label = self.network.label(slot);
        let initiators = self.ctx.initiators(pos.phase, pos.flood);
        match messages {
            [m] if m.path.is_empty() && initiators.contains(label) => self.initiated[slot] = Some(m.value),
            _ => self.fail(format!(
                "round {round}: honest slot {slot} sent {} messages at flood start",
                messages.len()
            )),
        }
    }

    fn replay_rules(&self, slot: Slot, from_label: NodeId, msg: &FloodMessage) -> (Outcome, Path) {
        let g = self.graph();
        let ext = msg.path.extended(from_label);
        let nodes = ext.nodes();
        let distinct = nodes.iter().copied().collect::<NodeSet>().len() == nodes.len();
        let edges = nodes.windows(2).all(|w| g.has_edge(w[0], w[1]));
        let outcome = if !distinct || !edges {
            Outcome::Discarded { rule: 1 }
        } else if self.floods[slot].seen.contains(&ext) {
            Outcome::Discarded { rule: 2 }
        } else if msg.path.contains(self.network.label(slot)) {
            Outcome::Discarded { rule: 3 }
        } else {
            Outcome::Accepted
        };
        (outcome, ext)
    }

    fn on_decision(&mut self, round: u64, slot: Slot, from_slot: Slot, msg: &FloodMessage, recorded: Outcome) {
        self.enter_round(round);
        self.summary.decisions += 1;
        if self.faulty[slot] {
            self.fail(format!("round {round}: faulty slot {slot} reported a decision"));
            return;
        }
        if !self.network.in_slots(slot).contains(&from_slot) {
            self.fail(format!("round {round}: slot {slot} heard non-neighbor {from_slot}"));
            return;
        }
        self.heard.entry((slot, from_slot)).or_default().push(msg.clone());

        let from_label = self.network.label(from_slot);
        let (expected, ext) = self.replay_rules(slot, from_label, msg);
        if expected != recorded {
            self.fail(format!(
                "round {round}: slot {slot} got {msg} from {from_slot}: recorded {recorded:?}, rules give {expected:?}"
            ));
            return;
        }
        match expected {
            Outcome::Accepted => self.summary.accepted += 1,
            Outcome::Discarded { rule } => self.summary.discarded[rule as usize - 1] += 1,
        }
        if expected == (Outcome::Discarded { rule: 1 }) {
            return;
        }
        self.floods[slot].seen.insert(ext.clone());
        if expected != Outcome::Accepted {
            return;
        }
        let origin = if msg.path.is_empty() {
            Some(from_slot)
        } else if self.faulty[from_slot] {
            None
        } else {
            match self.floods[from_slot].recorded.get(&ext).copied() {
                Some(p) => {
                    if p.value != msg.value {
                        self.fail(format!(
                            "round {round}: honest slot {from_slot} relayed {msg} but recorded {}",
                            p.value
                        ));
                    }
                    p.origin
                }
                None => {
                    self.fail(format!("round {round}: honest slot {from_slot} relayed unrecorded {msg}"));
                    None
                }
            }
        };
        self.record(round, slot, ext, msg.value, origin);
    }

    /// Stores a value received along `ext` then this slot, checking that
    /// fault-free paths carry their origin's flooded value.
    fn record(&mut self, round: u64, slot: Slot, ext: Path, value: Bit, origin: Option<Slot>) {
        if let Some(o) = origin {
            self.summary.fault_free_checked += 1;
            let flooded = if self.faulty[o] {
                *self.effective.entry(o).or_insert(value)
            } else {
                match self.initiated[o] {
                    Some(b) => b,
                    None => {
                        self.fail(format!("round {round}: value from honest slot {o} that never initiated"));
                        value
                    }
                }
            };
            if flooded != value {
                self.fail(format!(
                    "round {round}: slot {slot} received {value} along fault-free {ext} but origin {o} flooded {flooded}"
                ));
            }
        }
        let full = ext.extended(self.network.label(slot));
        self.floods[slot].recorded.insert(full, Provenance { value, origin });
    }

    fn on_default(&mut self, round: u64, slot: Slot, from: NodeId) {
        self.enter_round(round);
        self.summary.defaults += 1;
        let pos = self.ctx.position(round);
        let label = self.network.label(slot);
        if pos.step != 0
            || !self.ctx.initiators(pos.phase, pos.flood).contains(from)
            || !self.graph().has_edge(from, label)
        {
            self.fail(format!("round {round}: unjustified default at slot {slot} for {from}"));
            return;
        }
        let Some(from_slot) = self
            .network
            .in_slots(slot)
            .iter()
            .copied()
            .find(|&s| self.network.label(s) == from)
        else {
            self.fail(format!("round {round}: slot {slot} has no in-neighbor labelled {from}"));
            return;
        };
        let ext = Path::singleton(from);
        if !self.floods[slot].seen.insert(ext.clone()) {
            self.fail(format!("round {round}: default at slot {slot} after an initiation from {from}"));
            return;
        }
        self.record(round, slot, ext, Bit::One, Some(from_slot));
    }

    fn check_support(&mut self, slot: Slot, sources: NodeSet, fault: NodeSet, support: &Support) {
        self.summary.witnesses_checked += 1;
        let me = self.network.label(slot);
        let mut used = NodeSet::EMPTY;
        let ok_count = support.witness.len() == self.ctx.f() + 1;
        let mut ok = ok_count;
        for p in &support.witness {
            let body = p.node_set().without(me);
            let recorded = self.floods[slot].recorded.get(p).map(|r| r.value);
            ok &= p.terminal() == Some(me)
                && p.source().is_some_and(|s| sources.contains(s))
                && !p.internal_set().intersects(fault)
                && !body.intersects(used)
                && recorded == Some(support.value);
            used |= body;
        }
        if !ok {
            self.fail(format!("slot {slot}: unsupported adoption of {}", support.value));
        }
    }

    fn on_update(
        &mut self,
        phase: usize,
        slot: Slot,
        step: UpdateStep,
        sides: Option<(NodeSet, NodeSet)>,
        support: &Option<Support>,
    ) {
        let info = self.ctx.phase(phase);
        let (fault, source, outside) = (info.fault_set, info.source, info.outside);
        let me = self.network.label(slot);
        let sources = match (step, sides) {
            (UpdateStep::Inside, Some((a, b))) => {
                if support.is_some() && !b.contains(me) {
                    self.fail(format!("slot {slot}: adopted a value outside B"));
                }
                a
            }
            (UpdateStep::Inside, None) => {
                if support.is_some() {
                    self.fail(format!("slot {slot}: adopted a value without sides"));
                }
                return;
            }
            (UpdateStep::Outside, _) => {
                if !outside.contains(me) {
                    self.fail(format!("slot {slot}: outside update inside the source component"));
                }
                source
            }
        };
        if let Some(s) = support {
            self.check_support(slot, sources, fault, s);
        }
    }

    fn on_round_end(&mut self, round: u64) {
        self.enter_round(round);
        // Local broadcast: every honest receiver handled exactly what each
        // in-neighbor sent, in order.
        let network = Arc::clone(&self.network);
        for slot in 0..network.slots() {
            if self.faulty[slot] {
                continue;
            }
            for &from in network.in_slots(slot) {
                let heard = self.heard.remove(&(slot, from)).unwrap_or_default();
                let sent = self.sent[from].as_deref().unwrap_or(&[]);
                if heard != sent {
                    let (h, s) = (heard.len(), sent.len());
                    self.fail(format!("round {round}: slot {slot} handled {h} messages from {from}, which sent {s}"));
                }
            }
        }
        if !self.heard.is_empty() {
            self.fail(format!("round {round}: decisions on non-edges"));
            self.heard.clear();
        }
        let pos = self.ctx.position(round);
        if pos.step == 0 {
            let initiators = self.ctx.initiators(pos.phase, pos.flood);
            for slot in 0..network.slots() {
                if self.faulty[slot] {
                    continue;
                }
                for &from in network.in_slots(slot) {
                    let label = network.label(from);
                    if initiators.contains(label) && !self.floods[slot].seen.contains(&Path::singleton(label)) {
                        self.fail(format!("round {round}: slot {slot} has no initiation from {label}"));
                    }
                }
            }
        }
        self.sent.iter_mut().for_each(|s| *s = None);
    }

    fn on_phase_end(&mut self, phase: usize, states: &[Option<Bit>]) {
        self.summary.phases_checked += 1;
        let before: Vec<Bit> = self.phase_start.iter().flatten().copied().collect();
        for (slot, s) in states.iter().enumerate() {
            if s.is_some() == self.faulty[slot] {
                self.fail(format!("phase {phase}: state presence wrong for slot {slot}"));
            }
            if let Some(b) = s {
                if !before.contains(b) {
                    self.fail(format!("phase {phase}: slot {slot} holds {b}, which no honest slot held before"));
                }
            }
        }
        let faulty_labels: NodeSet = (0..self.network.slots())
            .filter(|&s| self.faulty[s])
            .map(|s| self.network.label(s))
            .collect();
        if self.expect_agreement && self.ctx.phase(phase).fault_set == faulty_labels {
            let mut honest = states.iter().flatten();
            if let Some(first) = honest.next() {
                if honest.any(|b| b != first) {
                    self.fail(format!("phase {phase}: honest states differ after the phase matching the faulty set"));
                }
            }
        }
        self.phase_start = states.to_vec();
    }
}

impl TraceSink for ReplayValidator {
    fn record(&mut self, event: &TraceEvent) {
        match event {
            TraceEvent::Header(h) => self.on_header(h),
            TraceEvent::Broadcast { round, slot, messages } => self.on_broadcast(*round, *slot, messages),
            TraceEvent::Decision {
                round,
                slot,
                from_slot,
                message,
                outcome,
            } => self.on_decision(*round, *slot, *from_slot, message, *outcome),
            TraceEvent::Default { round, slot, from } => self.on_default(*round, *slot, *from),
            TraceEvent::Classified {
                phase, slot, zero, nonzero, ..
            } => {
                let candidates = self.ctx.phase(*phase).candidates;
                if zero.intersects(*nonzero) || (*zero | *nonzero) != candidates {
                    self.fail(format!("phase {phase}: slot {slot} classification is not a split"));
                }
            }
            TraceEvent::Updated {
                phase,
                slot,
                step,
                sides,
                support,
                ..
            } => self.on_update(*phase, *slot, *step, *sides, support),
            TraceEvent::PhaseEnd { phase, states, .. } => self.on_phase_end(*phase, states),
            TraceEvent::RoundEnd { round } => self.on_round_end(*round),
            TraceEvent::Output { rounds, .. } => {
                if *rounds != self.ctx.total_rounds() {
                    self.fail(format!("run took {rounds} rounds, expected {}", self.ctx.total_rounds()));
                }
            }
        }
    }
}
