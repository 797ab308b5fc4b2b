//! Impossibility harness for graphs that violate NC.
//!
//! Given a violating partition `(L, C, R)` and fault set `F`, nodes are given
//! one to three copies, wired into a single network in which every copy runs
//! the honest program of its original. Three executions `E1`, `E2`, `E3` on
//! the original graph are then read off that one run: each node is played by
//! a fixed copy. Validity forces `L - F` to output 0 in `E1` and `R - F` to
//! output 1 in `E2`; those copies are reused in `E3`, so `E3` disagrees.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{run_rounds, EngineConfig, EngineError, HashSink, Network, NoAdversary, TeeSink};
use crate::conditions::NcViolation;
use crate::digraph::{Digraph, NodeId, NodeSet};
use crate::protocol::trace::{RunHeader, Slot, TraceEvent, TraceSink};
use crate::protocol::{Bit, ConsensusNode, NodeProgram, ProtocolContext, ProtocolError};

#[derive(Debug, Error)]
pub enum NecessityError {
    #[error("witness is not an NC violation: {0}")]
    InvalidWitness(String),
    #[error("nodes {0} and {1} in {2:?} and {3:?} have an edge against a one-way link")]
    OneWayLinkViolated(NodeId, NodeId, CopyClass, CopyClass),
    #[error("copy {slot} of node {node} has {count} copies of in-neighbor {from}")]
    InNeighborCount {
        slot: Slot,
        node: NodeId,
        from: NodeId,
        count: usize,
    },
    #[error("execution E{execution}: {msg}")]
    Unfaithful { execution: usize, msg: String },
    #[error("two runs of the copy network differ")]
    Nondeterministic,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// A group of copies sharing an input and a role in the three executions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CopyClass {
    /// `N_L(R - F) ∩ F`, single copy.
    NlF,
    /// `N_L(R - F) - F`, single copy.
    NlN,
    /// `N_R(L - F) ∩ F`, single copy.
    NrF,
    /// `N_R(L - F) - F`, single copy.
    NrN,
    L0F,
    L0,
    L1F,
    L1,
    R0F,
    R0,
    R1F,
    R1,
    /// `N_C(L - F) ∩ N_C(R - F)`, single copy.
    Clr,
    /// `N_C(L - F) - N_C(R - F)`, input 0.
    Cl0,
    Cl1,
    /// `N_C(R - F) - N_C(L - F)`, input 0.
    Cr0,
    Cr1,
    /// The rest of `C`.
    C0,
    C1,
    /// Second input-1 copy of the rest of `C`, used by `E3`.
    C1x,
}

use CopyClass::*;

impl CopyClass {
    pub const ALL: [CopyClass; 20] = [
        NlF, NlN, NrF, NrN, L0F, L0, L1F, L1, R0F, R0, R1F, R1, Clr, Cl0, Cl1, Cr0, Cr1, C0, C1, C1x,
    ];

    pub fn input(self) -> Bit {
        match self {
            NlF | NlN | L0F | L0 | R0F | R0 | Cl0 | Cr0 | C0 => Bit::Zero,
            NrF | NrN | L1F | L1 | R1F | R1 | Clr | Cl1 | Cr1 | C1 | C1x => Bit::One,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Link {
    /// Copy edges in both directions.
    Both,
    /// Copy edges from the first class to the second; the graph has none
    /// the other way.
    OneWay,
    /// Copy edges from the first class to the second only; edges the other
    /// way are dropped.
    Cut,
}

use Link::*;

/// Links between distinct classes. Class pairs not listed get no edges;
/// members of one class keep all their mutual edges.
const LINKS: &[(CopyClass, CopyClass, Link)] = &[
    // L and R.
    (NlF, L1F, Cut),
    (NlN, L1F, Cut),
    (NlF, L1, Cut),
    (NlN, L1, Cut),
    (NrF, R1F, Both),
    (NrN, R1F, Both),
    (NrF, R1, Both),
    (NrN, R1, Both),
    (L1F, L1, Both),
    (R1F, R1, Both),
    (L1F, R1F, Both),
    (NrF, L1F, Both),
    (NrN, L1F, OneWay),
    (R1, L1F, OneWay),
    (NlF, R1F, Cut),
    (NlN, R1F, OneWay),
    (L1, R1F, OneWay),
    (NrF, L1, Both),
    (NrN, L1, OneWay),
    (NlF, R1, Cut),
    (NlN, R1, OneWay),
    (NrF, NrN, Both),
    (NlF, NlN, Both),
    (NlF, NrF, Both),
    (NlN, NrN, Both),
    (NlF, NrN, Both),
    (NrF, NlN, Both),
    (NrF, R0F, Cut),
    (NrN, R0F, Cut),
    (NrF, R0, Cut),
    (NrN, R0, Cut),
    (NlF, L0F, Both),
    (NlN, L0F, Both),
    (NlF, L0, Both),
    (NlN, L0, Both),
    (L0F, L0, Both),
    (R0F, R0, Both),
    (L0F, R0F, Both),
    (NrF, L0F, Cut),
    (NrN, L0F, OneWay),
    (R0, L0F, OneWay),
    (NlF, R0F, Both),
    (NlN, R0F, OneWay),
    (L0, R0F, OneWay),
    (NrF, L0, Cut),
    (NrN, L0, OneWay),
    (NlF, R0, Both),
    (NlN, R0, OneWay),
    // L and C.
    (L1F, C1, Both),
    (L1, C1, OneWay),
    (L0F, C0, Both),
    (L0, C0, OneWay),
    (L0F, C1x, Cut),
    (L0, C1x, OneWay),
    (NlF, C0, Both),
    (NlF, C1, Cut),
    (NlF, C1x, Cut),
    (NlN, C1, OneWay),
    (NlN, C1x, OneWay),
    (NlN, C0, OneWay),
    (L0, Cl0, Both),
    (L0, Clr, Both),
    (L0, Cr0, OneWay),
    (L0, Cr1, OneWay),
    (L0F, Cl0, Both),
    (L0F, Clr, Both),
    (L0F, Cr0, Both),
    (L0F, Cr1, Cut),
    (L1, Cl1, Both),
    (Clr, L1, Cut),
    (L1F, Cl1, Both),
    (Cr1, L1F, Cut),
    (Clr, L1F, Cut),
    (NlF, Cl0, Both),
    (NlF, Cl1, Cut),
    (NlF, Cr0, Both),
    (NlF, Cr1, Cut),
    (NlF, Clr, Both),
    (NlN, Cl0, Both),
    (NlN, Cl1, Cut),
    (NlN, Cr0, OneWay),
    (NlN, Cr1, OneWay),
    (NlN, Clr, Both),
    // R and C.
    (R1F, C1, Both),
    (R1, C1, OneWay),
    (R0F, C0, Both),
    (R0, C0, OneWay),
    (R1F, C1x, Cut),
    (R1, C1x, OneWay),
    (NrF, C1, Both),
    (NrF, C0, Cut),
    (NrF, C1x, Cut),
    (NrN, C1, OneWay),
    (NrN, C1x, OneWay),
    (NrN, C0, OneWay),
    (R0, Cr0, Both),
    (Clr, R0, Cut),
    (Clr, R0F, Cut),
    (R1F, Cl0, Cut),
    (R0F, Cr0, Both),
    (R1, Cr1, Both),
    (R1, Clr, Both),
    (R1, Cl1, OneWay),
    (R1, Cl0, OneWay),
    (Cl0, R0F, Cut),
    (R1F, Cr1, Both),
    (R1F, Clr, Both),
    (R1F, Cl1, Both),
    (NrF, Cr1, Both),
    (NrF, Cr0, Cut),
    (NrF, Cl1, Both),
    (NrF, Cl0, Cut),
    (NrF, Clr, Both),
    (NrN, Cr1, Both),
    (NrN, Cr0, Cut),
    (NrN, Cl0, OneWay),
    (NrN, Cl1, OneWay),
    (NrN, Clr, Both),
    // C and C.
    (Clr, C0, Cut),
    (Clr, C1x, Both),
    (Clr, C1, Cut),
    (Clr, Cl0, Both),
    (Clr, Cl1, Cut),
    (Clr, Cr0, Cut),
    (Clr, Cr1, Both),
    (Cl0, C0, Cut),
    (Cl0, C1x, Both),
    (Cl0, Cr0, Cut),
    (Cl0, Cr1, Both),
    (Cr1, C1, Cut),
    (Cr1, C1x, Both),
    (Cr1, Cl1, Cut),
    (Cr0, C0, Both),
    (Cl1, C1, Both),
];

/// Which copy plays each node in one execution, and who is faulty there.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionMap {
    pub faulty: NodeSet,
    /// Slot of the copy playing each node.
    pub modeled_by: Vec<Slot>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CopyNetwork {
    pub f: usize,
    pub witness: NcViolation,
    /// Class and original node of every slot.
    pub slots: Vec<(CopyClass, NodeId)>,
    pub inputs: Vec<Bit>,
    #[serde(skip)]
    pub network: Arc<Network>,
    pub edges: Vec<(Slot, Slot)>,
    pub executions: [ExecutionMap; 3],
}

/// Members of every class.
fn classes(g: &Digraph, w: &NcViolation) -> BTreeMap<CopyClass, NodeSet> {
    let (fault, l, c, r) = (w.fault_set, w.l, w.c, w.r);
    let (lf, rf) = (l - fault, r - fault);
    let nlr = g.in_neighborhood(l, rf);
    let nrl = g.in_neighborhood(r, lf);
    let l_rest = l - nlr;
    let r_rest = r - nrl;
    let ncl = g.in_neighborhood(c, lf);
    let ncr = g.in_neighborhood(c, rf);
    let clr = ncl & ncr;
    let cl = ncl - ncr;
    let cr = ncr - ncl;
    let c_rest = c - ncl - ncr;
    BTreeMap::from([
        (NlF, nlr & fault),
        (NlN, nlr - fault),
        (NrF, nrl & fault),
        (NrN, nrl - fault),
        (L0F, l_rest & fault),
        (L0, l_rest - fault),
        (L1F, l_rest & fault),
        (L1, l_rest - fault),
        (R0F, r_rest & fault),
        (R0, r_rest - fault),
        (R1F, r_rest & fault),
        (R1, r_rest - fault),
        (Clr, clr),
        (Cl0, cl),
        (Cl1, cl),
        (Cr0, cr),
        (Cr1, cr),
        (C0, c_rest),
        (C1, c_rest),
        (C1x, c_rest),
    ])
}

/// Classes whose copies play the nodes in each execution.
const EXECUTION_CLASSES: [[CopyClass; 12]; 3] = [
    [NlF, NlN, NrF, NrN, L0F, L0, R0F, R0, Clr, Cl0, Cr0, C0],
    [NlF, NlN, NrF, NrN, L1F, L1, R1F, R1, Clr, Cl1, Cr1, C1],
    [NlF, NlN, NrF, NrN, L0F, L0, R1F, R1, Clr, Cl0, Cr1, C1x],
];

/// Faulty nodes of `E1`, `E2`, `E3`.
pub fn execution_faulty_sets(g: &Digraph, w: &NcViolation) -> [NodeSet; 3] {
    let (lf, rf) = (w.l - w.fault_set, w.r - w.fault_set);
    [
        g.in_neighborhood(w.r | w.c, lf),
        g.in_neighborhood(w.l | w.c, rf),
        w.fault_set & (w.l | w.r),
    ]
}

/// Builds the copy network for an NC violation from the class link table.
pub fn build_copy_network(g: &Digraph, f: usize, witness: &NcViolation) -> Result<CopyNetwork, NecessityError> {
    let check = crate::conditions::ConditionWitness {
        condition: crate::conditions::Condition::Nc,
        f,
        verdict: crate::conditions::Verdict::Violated(crate::conditions::Violation::Nc(witness.clone())),
    };
    check.validate(g).map_err(NecessityError::InvalidWitness)?;

    let members = classes(g, witness);
    let mut slots = Vec::new();
    let mut slot_of: BTreeMap<(CopyClass, NodeId), Slot> = BTreeMap::new();
    for class in CopyClass::ALL {
        for v in members[&class].iter() {
            slot_of.insert((class, v), slots.len());
            slots.push((class, v));
        }
    }

    let mut edges = Vec::new();
    for class in CopyClass::ALL {
        let m = members[&class];
        for u in m.iter() {
            for v in (g.out_neighbors(u) & m).iter() {
                edges.push((slot_of[&(class, u)], slot_of[&(class, v)]));
            }
        }
    }
    for &(x, y, link) in LINKS {
        let (mx, my) = (members[&x], members[&y]);
        for u in mx.iter() {
            for v in my.iter() {
                if g.has_edge(u, v) {
                    edges.push((slot_of[&(x, u)], slot_of[&(y, v)]));
                }
                if g.has_edge(v, u) {
                    match link {
                        Both => edges.push((slot_of[&(y, v)], slot_of[&(x, u)])),
                        OneWay => return Err(NecessityError::OneWayLinkViolated(v, u, y, x)),
                        Cut => {}
                    }
                }
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();

    let labels: Vec<NodeId> = slots.iter().map(|&(_, v)| v).collect();
    let network = Arc::new(Network::from_edges(labels, edges.iter().copied()));
    check_in_neighbors(g, &network)?;

    let faulty = execution_faulty_sets(g, witness);
    let executions = [0, 1, 2].map(|i| {
        let modeled_by = g
            .nodes()
            .iter()
            .map(|v| {
                EXECUTION_CLASSES[i]
                    .iter()
                    .find_map(|&c| slot_of.get(&(c, v)).copied())
                    .expect("every node has a copy in every execution")
            })
            .collect();
        ExecutionMap {
            faulty: faulty[i],
            modeled_by,
        }
    });

    let copy = CopyNetwork {
        f,
        witness: witness.clone(),
        inputs: slots.iter().map(|&(c, _)| c.input()).collect(),
        slots,
        network,
        edges,
        executions,
    };
    verify_execution_views(g, &copy)?;
    Ok(copy)
}

/// Every copy of `v` hears exactly one copy of each in-neighbor of `v`.
fn check_in_neighbors(g: &Digraph, network: &Network) -> Result<(), NecessityError> {
    for slot in 0..network.slots() {
        let node = network.label(slot);
        for from in g.in_neighbors(node).iter() {
            let count = network
                .in_slots(slot)
                .iter()
                .filter(|&&s| network.label(s) == from)
                .count();
            if count != 1 {
                return Err(NecessityError::InNeighborCount {
                    slot,
                    node,
                    from,
                    count,
                });
            }
        }
        if network.in_slots(slot).len() != g.in_neighbors(node).len() {
            return Err(NecessityError::InNeighborCount {
                slot,
                node,
                from: node,
                count: network.in_slots(slot).len(),
            });
        }
    }
    Ok(())
}

/// Each execution is a real execution on `G`: the copy playing a non-faulty
/// node hears exactly the copies playing its in-neighbors, the faulty set
/// fits the budget, and the inputs are as required.
pub fn verify_execution_views(g: &Digraph, copy: &CopyNetwork) -> Result<(), NecessityError> {
    for (i, ex) in copy.executions.iter().enumerate() {
        let fail = |msg: String| NecessityError::Unfaithful {
            execution: i + 1,
            msg,
        };
        if ex.faulty.len() > copy.f {
            return Err(fail(format!("faulty set {} too large", ex.faulty)));
        }
        for v in (g.nodes() - ex.faulty).iter() {
            let slot = ex.modeled_by[v.index()];
            let mut expected: Vec<Slot> = g.in_neighbors(v).iter().map(|u| ex.modeled_by[u.index()]).collect();
            expected.sort_unstable();
            if copy.network.in_slots(slot) != expected.as_slice() {
                return Err(fail(format!("copy {slot} of node {v} hears the wrong copies")));
            }
            let input = copy.inputs[slot];
            let want = match i {
                0 => Some(Bit::Zero),
                1 => Some(Bit::One),
                _ => None,
            };
            if want.is_some_and(|b| b != input) {
                return Err(fail(format!("node {v} has input {input}")));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionView {
    pub faulty: NodeSet,
    pub modeled_by: Vec<Slot>,
    /// Per node; `None` for faulty nodes.
    pub inputs: Vec<Option<Bit>>,
    pub outputs: Vec<Option<Bit>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTriple {
    pub executions: [ExecutionView; 3],
    /// Non-faulty outputs of `E1` are all 0.
    pub e1_valid: bool,
    /// Non-faulty outputs of `E2` are all 1.
    pub e2_valid: bool,
    /// In `E3` some node of `L - F` and some node of `R - F` output different values.
    pub disagreement: bool,
    pub rounds: u64,
    pub trace_hash: String,
}

impl ExecutionTriple {
    pub fn reproduces_impossibility(&self) -> bool {
        self.e1_valid && self.e2_valid && self.disagreement
    }
}

/// Runs Algorithm 1 on every copy and reads off the three executions.
pub fn run_three_executions(
    g: &Digraph,
    f: usize,
    witness: &NcViolation,
    sink: &mut dyn TraceSink,
) -> Result<(CopyNetwork, ExecutionTriple), NecessityError> {
    let ctx = ProtocolContext::new(g.clone(), f)?;
    let rounds = ctx.total_rounds();
    let phase_len = ctx.rounds_per_phase();
    let make = |label: NodeId, slot: Slot, input: Bit| -> Box<dyn NodeProgram> {
        Box::new(ConsensusNode::new(Arc::clone(&ctx), label, slot, input))
    };
    run_three_executions_with(g, f, witness, &make, rounds, Some(phase_len), sink)
}

/// As [`run_three_executions`] for any deterministic per-node program.
pub fn run_three_executions_with(
    g: &Digraph,
    f: usize,
    witness: &NcViolation,
    make: &dyn Fn(NodeId, Slot, Bit) -> Box<dyn NodeProgram>,
    rounds: u64,
    phase_len: Option<u64>,
    sink: &mut dyn TraceSink,
) -> Result<(CopyNetwork, ExecutionTriple), NecessityError> {
    let copy = build_copy_network(g, f, witness)?;
    let header = RunHeader {
        graph_hash: g.fingerprint(),
        n: g.n(),
        f,
        faulty: Vec::new(),
        adversary: "copy-network".into(),
        seed: 0,
        inputs: copy.inputs.clone(),
        labels: copy.network.labels().to_vec(),
        round_budget: rounds,
    };
    let config = EngineConfig { rounds, phase_len };

    let run = |sink: &mut dyn TraceSink| -> Result<(Vec<Bit>, String), NecessityError> {
        let mut hash = HashSink::new();
        let mut tee = TeeSink(&mut hash, sink);
        tee.record(&TraceEvent::Header(header.clone()));
        let mut programs: Vec<Option<Box<dyn NodeProgram>>> = copy
            .slots
            .iter()
            .enumerate()
            .map(|(slot, &(_, v))| Some(make(v, slot, copy.inputs[slot])))
            .collect();
        run_rounds(&copy.network, &mut programs, &mut NoAdversary, config, &mut tee)?;
        let mut outputs = Vec::with_capacity(programs.len());
        for p in &programs {
            outputs.push(p.as_ref().expect("every copy is honest").state());
        }
        tee.record(&TraceEvent::Output {
            rounds,
            outputs: outputs.iter().map(|&b| Some(b)).collect(),
        });
        Ok((outputs, hash.hex_digest()))
    };
    let (outputs, trace_hash) = run(sink)?;
    let (again, again_hash) = run(&mut crate::protocol::trace::NullSink)?;
    if outputs != again || trace_hash != again_hash {
        return Err(NecessityError::Nondeterministic);
    }

    let executions = copy.executions.clone().map(|ex| {
        let inputs = g
            .nodes()
            .iter()
            .map(|v| (!ex.faulty.contains(v)).then(|| copy.inputs[ex.modeled_by[v.index()]]))
            .collect();
        let outs = g
            .nodes()
            .iter()
            .map(|v| (!ex.faulty.contains(v)).then(|| outputs[ex.modeled_by[v.index()]]))
            .collect();
        ExecutionView {
            faulty: ex.faulty,
            modeled_by: ex.modeled_by,
            inputs,
            outputs: outs,
        }
    });
    let all = |view: &ExecutionView, b: Bit| view.outputs.iter().flatten().all(|&o| o == b);
    let e3 = &executions[2];
    let side = |set: NodeSet| -> Vec<Bit> { set.iter().filter_map(|v| e3.outputs[v.index()]).collect() };
    let left = side(witness.l - witness.fault_set);
    let right = side(witness.r - witness.fault_set);
    let disagreement = left.iter().any(|a| right.iter().any(|b| a != b));
    Ok((
        copy,
        ExecutionTriple {
            e1_valid: all(&executions[0], Bit::Zero),
            e2_valid: all(&executions[1], Bit::One),
            disagreement,
            executions,
            rounds,
            trace_hash,
        },
    ))
}
