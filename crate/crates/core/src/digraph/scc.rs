use serde::Serialize;

use super::{Digraph, NodeId, NodeSet};

/// Strongly connected components and the acyclic graph between them.
///
/// Components are indexed by their smallest member, ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Condensation {
    components: Vec<NodeSet>,
    dag: Vec<(usize, usize)>,
}

impl Condensation {
    pub fn components(&self) -> &[NodeSet] {
        &self.components
    }

    /// Edges between component indices, sorted.
    pub fn dag(&self) -> &[(usize, usize)] {
        &self.dag
    }

    pub fn component_of(&self, v: NodeId) -> Option<usize> {
        self.components.iter().position(|c| c.contains(v))
    }

    /// Indices of components with no incoming dag edge, ascending.
    pub fn source_components(&self) -> Vec<usize> {
        let mut has_in = vec![false; self.components.len()];
        for &(_, j) in &self.dag {
            has_in[j] = true;
        }
        (0..self.components.len()).filter(|&i| !has_in[i]).collect()
    }

    pub fn source_sets(&self) -> Vec<NodeSet> {
        self.source_components()
            .into_iter()
            .map(|i| self.components[i])
            .collect()
    }
}

/// Tarjan's algorithm on the subgraph induced by `keep`.
pub(super) fn condense_within(g: &Digraph, keep: NodeSet) -> Condensation {
    let n = g.n();
    let keep = keep & g.nodes();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = NodeSet::EMPTY;
    let mut stack: Vec<NodeId> = Vec::new();
    let mut next_index = 0usize;
    let mut components = Vec::new();

    for root in keep.iter() {
        if index[root.index()] != usize::MAX {
            continue;
        }
        // Explicit call stack of (node, remaining successors).
        let mut call: Vec<(NodeId, NodeSet)> = Vec::new();
        index[root.index()] = next_index;
        low[root.index()] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack.insert(root);
        call.push((root, g.out_neighbors(root) & keep));

        while let Some(&mut (v, ref mut rest)) = call.last_mut() {
            if let Some(w) = rest.first() {
                rest.remove(w);
                if index[w.index()] == usize::MAX {
                    index[w.index()] = next_index;
                    low[w.index()] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack.insert(w);
                    call.push((w, g.out_neighbors(w) & keep));
                } else if on_stack.contains(w) {
                    low[v.index()] = low[v.index()].min(index[w.index()]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent.index()] = low[parent.index()].min(low[v.index()]);
            }
            if low[v.index()] == index[v.index()] {
                let mut comp = NodeSet::EMPTY;
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack.remove(w);
                    comp.insert(w);
                    if w == v {
                        break;
                    }
                }
                components.push(comp);
            }
        }
    }

    components.sort_by_key(|c| c.first());
    let mut comp_of = vec![usize::MAX; n];
    for (i, c) in components.iter().enumerate() {
        for v in c.iter() {
            comp_of[v.index()] = i;
        }
    }
    let mut dag = Vec::new();
    for (u, v) in g.edges() {
        if keep.contains(u) && keep.contains(v) {
            let (a, b) = (comp_of[u.index()], comp_of[v.index()]);
            if a != b {
                dag.push((a, b));
            }
        }
    }
    dag.sort_unstable();
    dag.dedup();
    Condensation { components, dag }
}
