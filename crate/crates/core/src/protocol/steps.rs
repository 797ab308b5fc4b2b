//! The local computations of a phase, as pure functions of public data and
//! the values a node received.

use serde::{Deserialize, Serialize};

use super::{supported_value, Bit, ProtocolContext, ReceivedValues, Support};
use crate::conditions::{propagates, unique_source_component, ConditionError};
use crate::digraph::{NodeId, NodeSet};

/// Source component of `G - F` for the given phase.
pub fn phase_step_a(ctx: &ProtocolContext, phase: usize) -> Result<NodeSet, ConditionError> {
    unique_source_component(ctx.graph(), ctx.phase(phase).fault_set)
}

/// Splits `S ∪ N_F(S)` by the value `me` received from each member along its
/// canonical path: `(Z, N)`. A node's own value counts as received along the
/// single-node path, and a missing value counts as 1.
pub fn phase_step_c(
    ctx: &ProtocolContext,
    phase: usize,
    me: NodeId,
    gamma: Bit,
    received: &ReceivedValues,
) -> (NodeSet, NodeSet) {
    let info = ctx.phase(phase);
    let mut zero = NodeSet::EMPTY;
    for u in info.candidates.iter() {
        let value = if u == me {
            gamma
        } else {
            let path = info
                .canonical_path(ctx.n(), u, me)
                .expect("canonical paths exist for every member of the source component");
            received.get(path).unwrap_or(Bit::One)
        };
        if value == Bit::Zero {
            zero.insert(u);
        }
    }
    (zero, info.candidates - zero)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepD {
    /// `(A_v, B_v)`, absent when `Z - F` or `N - F` is empty.
    pub sides: Option<(NodeSet, NodeSet)>,
    pub support: Option<Support>,
    pub gamma: Bit,
}

/// Picks `(A_v, B_v)` and, if `me ∈ B_v`, adopts a value received along
/// `f + 1` disjoint paths from `A_v`.
pub fn phase_step_d(
    ctx: &ProtocolContext,
    phase: usize,
    me: NodeId,
    zero: NodeSet,
    nonzero: NodeSet,
    gamma: Bit,
    received: &ReceivedValues,
) -> StepD {
    let fault = ctx.phase(phase).fault_set;
    let (zf, nf) = (zero - fault, nonzero - fault);
    if zf.is_empty() || nf.is_empty() {
        return StepD {
            sides: None,
            support: None,
            gamma,
        };
    }
    let z_reaches_n = propagates(ctx.graph(), zero, nf, fault, ctx.f())
        .expect("N - F avoids the fault set");
    let (a, b) = if z_reaches_n { (zero, nf) } else { (nonzero, zf) };
    let support = if b.contains(me) {
        supported_value(received, a, me, fault, ctx.f())
    } else {
        None
    };
    StepD {
        sides: Some((a, b)),
        gamma: support.as_ref().map_or(gamma, |s| s.value),
        support,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepF {
    pub support: Option<Support>,
    pub gamma: Bit,
}

/// Outside `S`: adopts a value received along `f + 1` disjoint paths from `S`
/// in the second flood.
pub fn phase_step_f(
    ctx: &ProtocolContext,
    phase: usize,
    me: NodeId,
    gamma: Bit,
    received: &ReceivedValues,
) -> StepF {
    let info = ctx.phase(phase);
    let support = supported_value(received, info.source, me, info.fault_set, ctx.f());
    StepF {
        gamma: support.as_ref().map_or(gamma, |s| s.value),
        support,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{Digraph, Path};

    fn p(ids: &[u8]) -> Path {
        Path::from_nodes(ids.iter().map(|&i| NodeId(i)))
    }

    fn set(ids: &[u8]) -> NodeSet {
        ids.iter().map(|&i| NodeId(i)).collect()
    }

    /// Values node `me` would record in a fault-free first flood on `K_n`
    /// where every node floods `inputs[u]`: one entry per simple path.
    fn honest_flood(g: &Digraph, inputs: &[Bit], initiators: NodeSet, me: NodeId) -> ReceivedValues {
        let mut out = ReceivedValues::new();
        let mut stack: Vec<Path> = initiators.iter().map(Path::singleton).collect();
        while let Some(path) = stack.pop() {
            let last = path.terminal().unwrap();
            for w in g.out_neighbors(last).iter() {
                if path.contains(w) {
                    continue;
                }
                let next = path.extended(w);
                if w == me {
                    out.insert(next, inputs[path.source().unwrap().index()]);
                } else {
                    stack.push(next);
                }
            }
        }
        out
    }

    #[test]
    fn step_a_matches_context() {
        let ctx = ProtocolContext::new(Digraph::complete(4).unwrap(), 1).unwrap();
        for phase in 0..ctx.plan().len() {
            assert_eq!(phase_step_a(&ctx, phase).unwrap(), ctx.phase(phase).source);
        }
    }

    #[test]
    fn step_c_all_zero() {
        let g = Digraph::complete(4).unwrap();
        let ctx = ProtocolContext::new(g.clone(), 1).unwrap();
        let inputs = [Bit::Zero; 4];
        let recv = honest_flood(&g, &inputs, g.nodes(), NodeId(2));
        let (z, nv) = phase_step_c(&ctx, 0, NodeId(2), Bit::Zero, &recv);
        assert_eq!(z, g.nodes());
        assert!(nv.is_empty());
    }

    #[test]
    fn step_c_missing_value_counts_as_one() {
        let ctx = ProtocolContext::new(Digraph::complete(4).unwrap(), 1).unwrap();
        let (z, nv) = phase_step_c(&ctx, 0, NodeId(2), Bit::Zero, &ReceivedValues::new());
        assert_eq!(z, set(&[2]));
        assert_eq!(nv, set(&[0, 1, 3]));
    }

    #[test]
    fn step_d_adopts_common_value() {
        let g = Digraph::complete(4).unwrap();
        let ctx = ProtocolContext::new(g.clone(), 1).unwrap();
        let inputs = [Bit::Zero, Bit::Zero, Bit::One, Bit::One];
        let me = NodeId(3);
        let recv = honest_flood(&g, &inputs, g.nodes(), me);
        let (z, nv) = phase_step_c(&ctx, 0, me, Bit::One, &recv);
        assert_eq!(z, set(&[0, 1]));
        let d = phase_step_d(&ctx, 0, me, z, nv, Bit::One, &recv);
        // {0,1} reaches {2,3} with two disjoint paths each, so A = Z.
        assert_eq!(d.sides, Some((set(&[0, 1]), set(&[2, 3]))));
        assert_eq!(d.gamma, Bit::Zero);
        assert_eq!(d.support.unwrap().witness, vec![p(&[0, 3]), p(&[1, 3])]);
    }

    #[test]
    fn step_d_guard() {
        let ctx = ProtocolContext::new(Digraph::complete(4).unwrap(), 1).unwrap();
        let d = phase_step_d(&ctx, 0, NodeId(0), NodeSet::EMPTY, set(&[0, 1, 2, 3]), Bit::One, &ReceivedValues::new());
        assert_eq!(d.sides, None);
        assert_eq!(d.gamma, Bit::One);
    }

    #[test]
    fn step_f_updates_outside_nodes() {
        // Source component {0,1,2} (complete) feeding 3 from all three.
        let g = Digraph::new(
            4,
            [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1), (0, 3), (1, 3), (2, 3)],
        )
        .unwrap();
        let ctx = ProtocolContext::new(g.clone(), 1).unwrap();
        assert_eq!(ctx.phase(0).source, set(&[0, 1, 2]));
        let inputs = [Bit::One, Bit::One, Bit::One, Bit::Zero];
        let recv = honest_flood(&g, &inputs, set(&[0, 1, 2]), NodeId(3));
        let out = phase_step_f(&ctx, 0, NodeId(3), Bit::Zero, &recv);
        assert_eq!(out.gamma, Bit::One);
        let none = phase_step_f(&ctx, 0, NodeId(3), Bit::Zero, &ReceivedValues::new());
        assert_eq!(none.gamma, Bit::Zero);
        assert!(none.support.is_none());
    }
}
