use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{Bit, ReceivedValues};
use crate::digraph::{NodeId, NodeSet, Path};

/// A value received identically along `f + 1` disjoint paths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Support {
    pub value: Bit,
    pub witness: Vec<Path>,
}

/// Looks for a value `δ` that `me` received along `f + 1` paths that start in
/// `sources`, have no internal node in `exclude`, and pairwise share only
/// `me`. `δ = 0` is tried first.
///
/// Paths are considered shortest first, then lexicographically. Two paths
/// over the same node set are interchangeable, so only the first of each is
/// kept; that bounds the search by the number of node subsets.
pub fn supported_value(
    received: &ReceivedValues,
    sources: NodeSet,
    me: NodeId,
    exclude: NodeSet,
    f: usize,
) -> Option<Support> {
    [Bit::Zero, Bit::One]
        .into_iter()
        .find_map(|value| disjoint_family(received, sources, me, exclude, f + 1, value))
}

fn disjoint_family(
    received: &ReceivedValues,
    sources: NodeSet,
    me: NodeId,
    exclude: NodeSet,
    need: usize,
    value: Bit,
) -> Option<Support> {
    let mut candidates: Vec<&Path> = received
        .iter()
        .filter(|&(p, b)| {
            b == value
                && p.len() >= 2
                && p.terminal() == Some(me)
                && p.source().is_some_and(|s| sources.contains(s))
                && !p.internal_set().intersects(exclude)
        })
        .map(|(p, _)| p)
        .collect();
    candidates.sort_by_key(|p| p.len());

    let mut seen_bodies = HashSet::new();
    let distinct: Vec<(NodeSet, &Path)> = candidates
        .into_iter()
        .filter_map(|p| {
            let body = p.node_set().without(me);
            seen_bodies.insert(body).then_some((body, p))
        })
        .collect();
    if distinct.len() < need {
        return None;
    }

    let mut chosen = Vec::with_capacity(need);
    if pick(&distinct, 0, NodeSet::EMPTY, need, &mut chosen) {
        Some(Support {
            value,
            witness: chosen.into_iter().map(|i| distinct[i].1.clone()).collect(),
        })
    } else {
        None
    }
}

fn pick(
    items: &[(NodeSet, &Path)],
    start: usize,
    used: NodeSet,
    need: usize,
    chosen: &mut Vec<usize>,
) -> bool {
    if chosen.len() == need {
        return true;
    }
    for i in start..items.len() {
        if items.len() - i < need - chosen.len() {
            return false;
        }
        let (body, _) = items[i];
        if body.intersects(used) {
            continue;
        }
        chosen.push(i);
        if pick(items, i + 1, used | body, need, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}
