//! Independent reference implementations and graph corpora for the
//! integration tests. Nothing here calls the flow code, Tarjan, or the
//! condition scanners of the library.

#![allow(dead_code)]

use std::collections::BTreeSet;

use lbcast::conditions::{check_nc, check_sc, NcViolation, Violation};
use lbcast::digraph::{Digraph, NodeId, NodeSet};
use lbcast::simulator::{random, CopyClass};

pub fn set(ids: &[u8]) -> NodeSet {
    ids.iter().map(|&i| NodeId(i)).collect()
}

/// Every digraph on `n` nodes, indexed by a bitmask over ordered pairs.
pub fn all_graphs(n: usize) -> impl Iterator<Item = Digraph> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    let count = 1u64 << pairs.len();
    (0..count).map(move |mask| {
        let edges = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e);
        Digraph::new(n, edges).unwrap()
    })
}

/// All simple paths from a member of `sources` to `terminal` with no
/// internal node in `exclude`, as node lists.
pub fn simple_paths(g: &Digraph, sources: NodeSet, terminal: NodeId, exclude: NodeSet) -> Vec<Vec<NodeId>> {
    fn walk(
        g: &Digraph,
        terminal: NodeId,
        exclude: NodeSet,
        path: &mut Vec<NodeId>,
        on_path: NodeSet,
        out: &mut Vec<Vec<NodeId>>,
    ) {
        let last = *path.last().unwrap();
        for w in g.out_neighbors(last).iter() {
            if on_path.contains(w) {
                continue;
            }
            if w == terminal {
                let mut p = path.clone();
                p.push(w);
                out.push(p);
            } else if !exclude.contains(w) {
                path.push(w);
                walk(g, terminal, exclude, path, on_path.with(w), out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    for s in sources.iter().filter(|&s| s != terminal) {
        let mut path = vec![s];
        walk(g, terminal, exclude, &mut path, NodeSet::singleton(s), &mut out);
    }
    out
}

/// Largest number of `sources -> terminal` paths pairwise sharing only the
/// terminal, by exhaustive packing. `None` when the terminal is a source.
pub fn brute_disjoint(g: &Digraph, sources: NodeSet, terminal: NodeId, exclude: NodeSet) -> Option<usize> {
    if sources.contains(terminal) {
        return None;
    }
    let mut bodies: Vec<NodeSet> = simple_paths(g, sources, terminal, exclude)
        .into_iter()
        .map(|p| p[..p.len() - 1].iter().copied().collect())
        .collect();
    bodies.sort_by_key(|b: &NodeSet| (b.len(), b.bits()));
    bodies.dedup();
    fn best(bodies: &[NodeSet], used: NodeSet) -> usize {
        let mut top = 0;
        for (i, &b) in bodies.iter().enumerate() {
            if !b.intersects(used) {
                top = top.max(1 + best(&bodies[i + 1..], used | b));
            }
        }
        top
    }
    Some(best(&bodies, NodeSet::EMPTY))
}

/// Nodes of `keep` reachable from `v` inside `keep`, by repeated relaxation.
pub fn reach(g: &Digraph, v: NodeId, keep: NodeSet) -> NodeSet {
    let mut r = NodeSet::singleton(v) & keep;
    loop {
        let mut next = r;
        for u in r.iter() {
            next |= g.out_neighbors(u) & keep;
        }
        if next == r {
            return r;
        }
        r = next;
    }
}

/// Source components of `G[keep]` from pairwise reachability, ordered by
/// smallest member.
pub fn brute_source_components(g: &Digraph, keep: NodeSet) -> Vec<NodeSet> {
    let mut comps: Vec<NodeSet> = Vec::new();
    for v in keep.iter() {
        let comp: NodeSet = keep.iter().filter(|&u| reach(g, v, keep).contains(u) && reach(g, u, keep).contains(v)).collect();
        if !comps.contains(&comp) {
            comps.push(comp);
        }
    }
    comps.retain(|&c| {
        let outside = keep - c;
        !outside.iter().any(|u| g.out_neighbors(u).intersects(c))
    });
    comps.sort_by_key(|c| c.first());
    comps
}

/// `A ⇒_F B` from path enumeration: every node of `B` has `f + 1` disjoint
/// `A`-paths excluding `F`.
pub fn brute_propagates(g: &Digraph, a: NodeSet, b: NodeSet, fault: NodeSet, f: usize) -> bool {
    b.iter().all(|t| brute_disjoint(g, a, t, fault).map_or(true, |k| k > f))
}

pub fn brute_sc(g: &Digraph, f: usize) -> bool {
    let all = g.nodes();
    all.subsets_up_to(f).into_iter().all(|fault| {
        (0..1u64 << g.n()).all(|mask| {
            let a = NodeSet::from_bits(mask) & all;
            let b = all - a;
            if (a - fault).is_empty() || (b - fault).is_empty() {
                return true;
            }
            brute_propagates(g, a, b - fault, fault, f) || brute_propagates(g, b, a - fault, fault, f)
        })
    })
}

// Corpora. Each search is seeded and deterministic.

/// The first `count` seeds of `random(n, p, seed)` satisfying `keep`,
/// cycling through the given sizes.
pub fn seeded_graphs(
    sizes: &[usize],
    p: f64,
    base_seed: u64,
    count: usize,
    mut keep: impl FnMut(&Digraph) -> bool,
) -> Vec<(u64, Digraph)> {
    let mut out = Vec::new();
    let mut seed = base_seed;
    while out.len() < count {
        let n = sizes[out.len() % sizes.len()];
        let g = random(n, p, seed).unwrap();
        if keep(&g) {
            out.push((seed, g));
        }
        seed += 1;
        assert!(seed < base_seed + 1_000_000, "corpus search ran dry");
    }
    out
}

pub fn satisfies_sc(g: &Digraph, f: usize) -> bool {
    check_sc(g, f).unwrap().holds()
}

pub fn nc_violation(g: &Digraph, f: usize) -> Option<NcViolation> {
    match check_nc(g, f).unwrap().violation() {
        Some(Violation::Nc(w)) => Some(w.clone()),
        _ => None,
    }
}

/// Copy-network edges derived from the three executions alone: for each
/// execution, each non-faulty node `v` and each edge `(u, v)`, the copy
/// playing `v` must hear the copy playing `u`. Copies are `(class, node)`.
pub fn sigma_edges(g: &Digraph, w: &NcViolation) -> BTreeSet<((CopyClass, NodeId), (CopyClass, NodeId))> {
    use CopyClass::*;
    let fault = w.fault_set;
    let (lf, rf) = (w.l - fault, w.r - fault);
    let into = |from: NodeSet, to: NodeSet| -> NodeSet { from.iter().filter(|&u| g.out_neighbors(u).intersects(to)).collect() };
    let nlr = into(w.l, rf);
    let nrl = into(w.r, lf);
    let ncl = into(w.c, lf);
    let ncr = into(w.c, rf);

    let sigma = |exec: usize, v: NodeId| -> CopyClass {
        let f = fault.contains(v);
        if nlr.contains(v) {
            return if f { NlF } else { NlN };
        }
        if nrl.contains(v) {
            return if f { NrF } else { NrN };
        }
        if w.l.contains(v) {
            return match (exec, f) {
                (1, true) => L1F,
                (1, false) => L1,
                (_, true) => L0F,
                (_, false) => L0,
            };
        }
        if w.r.contains(v) {
            return match (exec, f) {
                (0, true) => R0F,
                (0, false) => R0,
                (_, true) => R1F,
                (_, false) => R1,
            };
        }
        match (ncl.contains(v), ncr.contains(v)) {
            (true, true) => Clr,
            (true, false) => [Cl0, Cl1, Cl0][exec],
            (false, true) => [Cr0, Cr1, Cr1][exec],
            (false, false) => [C0, C1, C1x][exec],
        }
    };
    let faulty = [into(w.r | w.c, lf), into(w.l | w.c, rf), fault & (w.l | w.r)];

    let mut edges = BTreeSet::new();
    for (exec, bad) in faulty.iter().enumerate() {
        for v in (g.nodes() - *bad).iter() {
            for u in g.in_neighbors(v).iter() {
                edges.insert(((sigma(exec, u), u), (sigma(exec, v), v)));
            }
        }
    }
    edges
}
