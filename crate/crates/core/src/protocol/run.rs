use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::trace::{RunHeader, TraceEvent, TraceSink};
use super::{Bit, ConsensusNode, NodeProgram, ProtocolContext, ProtocolError};
use crate::digraph::NodeSet;
use crate::simulator::{run_rounds, AdversaryContext, AdversaryKind, EngineConfig, Network};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub faulty: NodeSet,
    pub adversary: AdversaryKind,
    pub seed: u64,
    pub inputs: Vec<Bit>,
    /// Output per node; `None` for faulty nodes.
    pub outputs: Vec<Option<Bit>>,
    pub rounds: u64,
    /// All non-faulty outputs are equal.
    pub agreement: bool,
    /// If all non-faulty inputs equal some `b`, all non-faulty outputs are `b`.
    pub validity: bool,
}

impl RunReport {
    pub fn ok(&self) -> bool {
        self.agreement && self.validity
    }

    pub fn decided(&self) -> Option<Bit> {
        let mut outs = self.outputs.iter().flatten();
        let first = *outs.next()?;
        outs.all(|&b| b == first).then_some(first)
    }
}

/// Runs the algorithm for its full round budget with the nodes of `faulty`
/// driven by `adversary`. Faulty nodes' entries of `inputs` seed the
/// adversary's honest shadows.
pub fn run_algorithm(
    ctx: &Arc<ProtocolContext>,
    inputs: &[Bit],
    faulty: NodeSet,
    adversary: AdversaryKind,
    seed: u64,
    sink: &mut dyn TraceSink,
) -> Result<RunReport, ProtocolError> {
    let g = ctx.graph();
    let n = g.n();
    if inputs.len() != n {
        return Err(ProtocolError::InputLength {
            expected: n,
            got: inputs.len(),
        });
    }
    if !faulty.is_subset(g.nodes()) {
        return Err(ProtocolError::FaultyOutOfRange(faulty));
    }
    if faulty.len() > ctx.f() {
        return Err(ProtocolError::TooManyFaults {
            size: faulty.len(),
            f: ctx.f(),
        });
    }

    let rounds = ctx.total_rounds();
    if sink.enabled() {
        sink.record(&TraceEvent::Header(RunHeader {
            graph_hash: g.fingerprint(),
            n,
            f: ctx.f(),
            faulty: faulty.iter().map(|v| v.index()).collect(),
            adversary: adversary.name().into(),
            seed,
            inputs: inputs.to_vec(),
            labels: g.nodes().iter().collect(),
            round_budget: rounds,
        }));
    }

    let network = Network::from_graph(g);
    let mut programs: Vec<Option<Box<dyn NodeProgram>>> = g
        .nodes()
        .iter()
        .map(|v| {
            (!faulty.contains(v)).then(|| {
                Box::new(ConsensusNode::new(Arc::clone(ctx), v, v.index(), inputs[v.index()])) as Box<dyn NodeProgram>
            })
        })
        .collect();
    let mut adv = adversary.build(AdversaryContext {
        protocol: Arc::clone(ctx),
        faulty,
        inputs: inputs.to_vec(),
        seed,
    });
    let config = EngineConfig {
        rounds,
        phase_len: Some(ctx.rounds_per_phase()),
    };
    run_rounds(&network, &mut programs, adv.as_mut(), config, sink)?;

    let outputs: Vec<Option<Bit>> = programs.iter().map(|p| p.as_ref().map(|p| p.state())).collect();
    if sink.enabled() {
        sink.record(&TraceEvent::Output {
            rounds,
            outputs: outputs.clone(),
        });
    }

    let honest_inputs: Vec<Bit> = (g.nodes() - faulty).iter().map(|v| inputs[v.index()]).collect();
    let honest_outputs: Vec<Bit> = outputs.iter().flatten().copied().collect();
    let agreement = honest_outputs.windows(2).all(|w| w[0] == w[1]);
    let validity = match honest_inputs.first() {
        Some(&b) if honest_inputs.iter().all(|&x| x == b) => honest_outputs.iter().all(|&o| o == b),
        _ => true,
    };
    Ok(RunReport {
        faulty,
        adversary,
        seed,
        inputs: inputs.to_vec(),
        outputs,
        rounds,
        agreement,
        validity,
    })
}
