use std::sync::Arc;

use serde::Serialize;

use super::ProtocolError;
use crate::conditions::FaultBudget;
use crate::digraph::{Digraph, NodeId, NodeSet, Path};

/// Candidate fault sets in phase order, ascending by `(size, mask)`.
pub type PhasePlan = Vec<NodeSet>;

/// Public per-phase data every node derives identically from `G` and `f`.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseInfo {
    pub fault_set: NodeSet,
    /// Source component of `G - F` used by the phase. When `G - F` has
    /// several, the one with the smallest member is used.
    pub source: NodeSet,
    pub source_unique: bool,
    /// `S ∪ N_F(S)`: initiators of the first flood.
    pub candidates: NodeSet,
    /// `V - S - F`: nodes updated by the second flood.
    pub outside: NodeSet,
    #[serde(skip)]
    canonical: Vec<Option<Path>>,
}

impl PhaseInfo {
    /// The fixed `u v`-path avoiding `F` used for classification at `v`.
    pub fn canonical_path(&self, n: usize, u: NodeId, v: NodeId) -> Option<&Path> {
        self.canonical[u.index() * n + v.index()].as_ref()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FloodKind {
    /// Candidates flood, from `S ∪ N_F(S)`.
    Candidates,
    /// Source flood, from `S`.
    Source,
}

/// Where a global round falls inside the phase schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundPosition {
    pub phase: usize,
    pub flood: FloodKind,
    /// Round within the flood, `0..n`.
    pub step: usize,
}

/// Everything a node knows before the first round: the graph, `f`, the phase
/// plan and its derived data. Shared read-only by every node.
#[derive(Debug)]
pub struct ProtocolContext {
    graph: Digraph,
    f: usize,
    plan: PhasePlan,
    phases: Vec<PhaseInfo>,
}

impl ProtocolContext {
    pub fn new(graph: Digraph, f: usize) -> Result<Arc<Self>, ProtocolError> {
        let n = graph.n();
        let plan = FaultBudget::new(f, n)?.fault_sets();
        let mut phases = Vec::with_capacity(plan.len());
        for (index, &fault) in plan.iter().enumerate() {
            let sources = graph.condense_within(graph.nodes() - fault).source_sets();
            let source = sources[0];
            let candidates = source | graph.in_neighborhood(fault, source);
            let mut canonical = vec![None; n * n];
            for u in candidates.iter() {
                for v in source.iter() {
                    let p = graph.find_path_excluding(u, v, fault).ok_or(
                        ProtocolError::MissingCanonicalPath {
                            phase: index,
                            from: u,
                            to: v,
                        },
                    )?;
                    canonical[u.index() * n + v.index()] = Some(p);
                }
            }
            if sources.len() > 1 {
                log::debug!("phase {index}: G - {fault} has {} source components", sources.len());
            }
            phases.push(PhaseInfo {
                fault_set: fault,
                source,
                source_unique: sources.len() == 1,
                candidates,
                outside: graph.nodes() - source - fault,
                canonical,
            });
        }
        Ok(Arc::new(ProtocolContext {
            graph,
            f,
            plan,
            phases,
        }))
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn plan(&self) -> &PhasePlan {
        &self.plan
    }

    pub fn phase(&self, index: usize) -> &PhaseInfo {
        &self.phases[index]
    }

    pub fn phases(&self) -> &[PhaseInfo] {
        &self.phases
    }

    pub fn rounds_per_phase(&self) -> u64 {
        2 * self.n() as u64
    }

    /// Exact length of a run: two `n`-round floods per phase.
    pub fn total_rounds(&self) -> u64 {
        self.plan.len() as u64 * self.rounds_per_phase()
    }

    pub fn position(&self, round: u64) -> RoundPosition {
        let n = self.n() as u64;
        let phase = (round / (2 * n)) as usize;
        let sub = round % (2 * n);
        RoundPosition {
            phase,
            flood: if sub < n {
                FloodKind::Candidates
            } else {
                FloodKind::Source
            },
            step: (sub % n) as usize,
        }
    }

    /// Initiators of the given flood of a phase.
    pub fn initiators(&self, phase: usize, flood: FloodKind) -> NodeSet {
        let info = &self.phases[phase];
        match flood {
            FloodKind::Candidates => info.candidates,
            FloodKind::Source => info.source,
        }
    }
}
