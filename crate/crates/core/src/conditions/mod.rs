//! Deciders for the network conditions SC and NC.
//!
//! Both conditions quantify over candidate fault sets `F` with `|F| <= f` and
//! over partitions of the node set, so the deciders enumerate exhaustively.
//! Graph size is capped to keep that tractable.

mod witness;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::{Digraph, GraphError, NodeId, NodeSet};

pub use witness::{
    Condition, ConditionWitness, CutCertificate, NcViolation, ScViolation, Verdict, Violation,
};

/// Largest graph accepted by the SC decider.
pub const SC_MAX_NODES: usize = 12;
/// Largest graph accepted by the NC decider.
pub const NC_MAX_NODES: usize = 9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConditionError {
    #[error("fault budget f={f} must satisfy 0 < f < n={n}")]
    InvalidBudget { f: usize, n: usize },
    #[error("fault set {set} has more than f={f} nodes")]
    FaultSetTooLarge { set: NodeSet, f: usize },
    #[error("{condition} check supports at most {cap} nodes, graph has {n}")]
    TooLarge {
        condition: Condition,
        n: usize,
        cap: usize,
    },
    #[error("target {0} lies in the excluded set")]
    TargetExcluded(NodeId),
    #[error("G - F has several source components: {0:?}")]
    MultipleSourceComponents(Vec<NodeSet>),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Upper bound `f` on the number of faulty nodes, with `0 < f < n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultBudget {
    f: usize,
    n: usize,
}

impl FaultBudget {
    pub fn new(f: usize, n: usize) -> Result<Self, ConditionError> {
        if f == 0 || f >= n {
            return Err(ConditionError::InvalidBudget { f, n });
        }
        Ok(FaultBudget { f, n })
    }

    pub fn f(self) -> usize {
        self.f
    }

    pub fn n(self) -> usize {
        self.n
    }

    /// Every candidate fault set, ascending by `(size, mask)`.
    pub fn fault_sets(self) -> Vec<NodeSet> {
        NodeSet::full(self.n).subsets_up_to(self.f)
    }
}

/// `|N_A(B)| > f`.
pub fn adjacent(g: &Digraph, a: NodeSet, b: NodeSet, f: usize) -> bool {
    g.in_neighborhood(a, b).len() > f
}

/// Every node of `b` has at least `f + 1` disjoint paths from `a` whose
/// internal nodes avoid `x`. Vacuously true for empty `b`.
pub fn propagates(
    g: &Digraph,
    a: NodeSet,
    b: NodeSet,
    x: NodeSet,
    f: usize,
) -> Result<bool, ConditionError> {
    Ok(first_unreached(g, a, b, x, f)?.is_none())
}

/// First node of `b` (ascending) lacking `f + 1` disjoint paths from `a`.
fn first_unreached(
    g: &Digraph,
    a: NodeSet,
    b: NodeSet,
    x: NodeSet,
    f: usize,
) -> Result<Option<NodeId>, ConditionError> {
    if let Some(t) = (b & x).first() {
        return Err(ConditionError::TargetExcluded(t));
    }
    for t in b.iter() {
        if !g.count_disjoint_paths(a, t, x)?.at_least(f + 1) {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

fn certificate(g: &Digraph, sources: NodeSet, target: NodeId, fault: NodeSet) -> CutCertificate {
    let r = g
        .disjoint_paths(sources, target, fault)
        .expect("target lies outside the fault set");
    CutCertificate {
        target,
        sources,
        cut: r.cut,
        paths: r.paths,
    }
}

fn check_cap(condition: Condition, g: &Digraph, cap: usize) -> Result<(), ConditionError> {
    if g.n() > cap {
        return Err(ConditionError::TooLarge {
            condition,
            n: g.n(),
            cap,
        });
    }
    Ok(())
}

fn check_fault_set(fault: NodeSet, f: usize) -> Result<(), ConditionError> {
    if fault.len() > f {
        return Err(ConditionError::FaultSetTooLarge { set: fault, f });
    }
    Ok(())
}

/// SC with a fixed parameter `F`. Partitions are scanned by ascending mask of
/// `A`; the first violating one is returned.
pub fn sc_with_param(
    g: &Digraph,
    fault: NodeSet,
    f: usize,
) -> Result<ConditionWitness, ConditionError> {
    check_cap(Condition::Sc, g, SC_MAX_NODES)?;
    check_fault_set(fault, f)?;
    Ok(ConditionWitness {
        condition: Condition::Sc,
        f,
        verdict: sc_verdict(g, fault, f),
    })
}

fn sc_verdict(g: &Digraph, fault: NodeSet, f: usize) -> Verdict {
    let n = g.n();
    let all = g.nodes();
    if (all - fault).len() < 2 {
        return Verdict::Holds { vacuous: true };
    }
    // (A, B) and (B, A) are violated together, and the smaller mask of the
    // pair is the one without node n-1, so only those masks are scanned.
    let top = NodeId::new(n - 1);
    for mask in 0..(1u64 << (n - 1)) {
        let a = NodeSet::from_bits(mask);
        let b = all - a;
        debug_assert!(b.contains(top));
        let (af, bf) = (a - fault, b - fault);
        if af.is_empty() || bf.is_empty() {
            continue;
        }
        let Some(t_b) = first_unreached(g, a, bf, fault, f).expect("bf avoids fault") else {
            continue;
        };
        let Some(t_a) = first_unreached(g, b, af, fault, f).expect("af avoids fault") else {
            continue;
        };
        return Verdict::Violated(Violation::Sc(ScViolation {
            fault_set: fault,
            a,
            b,
            a_to_b: certificate(g, a, t_b, fault),
            b_to_a: certificate(g, b, t_a, fault),
        }));
    }
    Verdict::Holds { vacuous: false }
}

/// NC with a fixed parameter `F`. Partitions `(L, C, R)` are scanned by a
/// ternary counter in which node `n-1` is the least significant digit and the
/// digits 0, 1, 2 mean L, C, R.
pub fn nc_with_param(
    g: &Digraph,
    fault: NodeSet,
    f: usize,
) -> Result<ConditionWitness, ConditionError> {
    check_cap(Condition::Nc, g, NC_MAX_NODES)?;
    check_fault_set(fault, f)?;
    Ok(ConditionWitness {
        condition: Condition::Nc,
        f,
        verdict: nc_verdict(g, fault, f),
    })
}

fn nc_verdict(g: &Digraph, fault: NodeSet, f: usize) -> Verdict {
    let n = g.n();
    if (g.nodes() - fault).len() < 2 {
        return Verdict::Holds { vacuous: true };
    }
    let mut digits = vec![0u8; n];
    loop {
        let mut sets = [NodeSet::EMPTY; 3];
        for (i, &d) in digits.iter().enumerate() {
            sets[d as usize].insert(NodeId::new(i));
        }
        let [l, c, r] = sets;
        let (lf, rf) = (l - fault, r - fault);
        if !lf.is_empty() && !rf.is_empty() {
            let into_left = g.in_neighborhood(r | c, lf);
            let into_right = g.in_neighborhood(l | c, rf);
            if into_left.len() <= f && into_right.len() <= f {
                return Verdict::Violated(Violation::Nc(NcViolation {
                    fault_set: fault,
                    l,
                    c,
                    r,
                    into_left,
                    into_right,
                }));
            }
        }
        // Increment, node n-1 first.
        let mut i = n;
        loop {
            if i == 0 {
                return Verdict::Holds { vacuous: false };
            }
            i -= 1;
            if digits[i] < 2 {
                digits[i] += 1;
                break;
            }
            digits[i] = 0;
        }
    }
}

fn check_all(
    g: &Digraph,
    f: usize,
    condition: Condition,
    per_set: fn(&Digraph, NodeSet, usize) -> Verdict,
) -> Result<ConditionWitness, ConditionError> {
    let cap = match condition {
        Condition::Sc => SC_MAX_NODES,
        Condition::Nc => NC_MAX_NODES,
    };
    check_cap(condition, g, cap)?;
    let budget = FaultBudget::new(f, g.n())?;
    let sets = budget.fault_sets();
    // find_map_first keeps the answer independent of scheduling.
    let violated = sets.par_iter().find_map_first(|&fault| match per_set(g, fault, f) {
        Verdict::Violated(v) => Some(v),
        Verdict::Holds { .. } => None,
    });
    let verdict = match violated {
        Some(v) => Verdict::Violated(v),
        None => Verdict::Holds {
            vacuous: sets.iter().all(|s| (g.nodes() - *s).len() < 2),
        },
    };
    Ok(ConditionWitness {
        condition,
        f,
        verdict,
    })
}

/// SC for every fault set of size at most `f`.
pub fn check_sc(g: &Digraph, f: usize) -> Result<ConditionWitness, ConditionError> {
    check_all(g, f, Condition::Sc, sc_verdict)
}

/// NC for every fault set of size at most `f`.
pub fn check_nc(g: &Digraph, f: usize) -> Result<ConditionWitness, ConditionError> {
    check_all(g, f, Condition::Nc, nc_verdict)
}

/// The unique source component of `G - F`.
pub fn unique_source_component(g: &Digraph, fault: NodeSet) -> Result<NodeSet, ConditionError> {
    let sources = g.condense_within(g.nodes() - fault).source_sets();
    match sources.as_slice() {
        [s] => Ok(*s),
        _ => Err(ConditionError::MultipleSourceComponents(sources)),
    }
}
