//! Directed-graph primitives.
//!
//! Graphs are small (at most [`MAX_NODES`] nodes) and node sets are bitmasks, so
//! the exhaustive partition sweeps in [`crate::conditions`] can enumerate subsets
//! by counting. Every enumeration in this module runs in ascending id order,
//! which makes all downstream artifacts reproducible.

mod edgelist;
mod flow;
mod nodeset;
mod path;
mod scc;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use edgelist::{format_edge_list, parse_edge_list, ParseError};
pub use flow::{DisjointPaths, PathCount};
pub use nodeset::NodeSet;
pub use path::Path;
pub use scc::Condensation;

/// Upper bound on graph size imposed by the bitmask representation.
pub const MAX_NODES: usize = 64;

/// Dense node identifier in `[0, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u8);

impl NodeId {
    pub fn new(index: usize) -> Self {
        assert!(index < MAX_NODES, "node index {index} out of range");
        NodeId(index as u8)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u8> for NodeId {
    fn from(v: u8) -> Self {
        NodeId(v)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("graph has {0} nodes; at most {MAX_NODES} are supported")]
    TooManyNodes(usize),
    #[error("edge ({0}, {1}) references a node outside [0, {2})")]
    NodeOutOfRange(usize, usize, usize),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("node set {0} is not contained in the graph")]
    NotASubset(NodeSet),
    #[error("induced subgraph needs a non-empty node set")]
    EmptyInducedSet,
    #[error("terminal {0} lies in the excluded set")]
    TerminalExcluded(NodeId),
}

/// Immutable simple directed graph on nodes `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Digraph {
    out: Vec<NodeSet>,
    inn: Vec<NodeSet>,
    names: Option<Vec<String>>,
}

impl fmt::Debug for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Digraph")
            .field("n", &self.n())
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl Digraph {
    /// Builds a graph from an edge list. Duplicate edges collapse.
    pub fn new<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if n > MAX_NODES {
            return Err(GraphError::TooManyNodes(n));
        }
        let mut out = vec![NodeSet::EMPTY; n];
        let mut inn = vec![NodeSet::EMPTY; n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::NodeOutOfRange(u, v, n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            out[u].insert(NodeId::new(v));
            inn[v].insert(NodeId::new(u));
        }
        Ok(Digraph {
            out,
            inn,
            names: None,
        })
    }

    /// Graph with every ordered pair of distinct nodes as an edge.
    pub fn complete(n: usize) -> Result<Self, GraphError> {
        Self::new(
            n,
            (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v))),
        )
    }

    /// Directed cycle `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        if n == 1 {
            return Self::new(1, []);
        }
        Self::new(n, (0..n).map(|u| (u, (u + 1) % n)))
    }

    /// Attaches display names. Names are used only in reports.
    pub fn with_names(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.n(), "one name per node");
        self.names = Some(names);
        self
    }

    pub fn name(&self, v: NodeId) -> String {
        match &self.names {
            Some(names) => names[v.index()].clone(),
            None => v.to_string(),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn nodes(&self) -> NodeSet {
        NodeSet::full(self.n())
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(|s| s.len()).sum()
    }

    #[inline]
    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u.index() < self.n() && self.out[u.index()].contains(v)
    }

    #[inline]
    pub fn out_neighbors(&self, u: NodeId) -> NodeSet {
        self.out[u.index()]
    }

    #[inline]
    pub fn in_neighbors(&self, v: NodeId) -> NodeSet {
        self.inn[v.index()]
    }

    /// All edges in ascending `(u, v)` order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes()
            .iter()
            .flat_map(move |u| self.out[u.index()].iter().map(move |v| (u, v)))
    }

    fn check_subset(&self, set: NodeSet) -> Result<(), GraphError> {
        if set.is_subset(self.nodes()) {
            Ok(())
        } else {
            Err(GraphError::NotASubset(set))
        }
    }

    /// Subgraph induced by `keep`, re-indexed densely. The returned vector maps
    /// each new id to the original id.
    pub fn induced(&self, keep: NodeSet) -> Result<(Digraph, Vec<NodeId>), GraphError> {
        self.check_subset(keep)?;
        if keep.is_empty() {
            return Err(GraphError::EmptyInducedSet);
        }
        let map: Vec<NodeId> = keep.iter().collect();
        let mut new_id = vec![usize::MAX; self.n()];
        for (i, v) in map.iter().enumerate() {
            new_id[v.index()] = i;
        }
        let edges = self
            .edges()
            .filter(|&(u, v)| keep.contains(u) && keep.contains(v))
            .map(|(u, v)| (new_id[u.index()], new_id[v.index()]));
        let mut g = Digraph::new(map.len(), edges)?;
        if let Some(names) = &self.names {
            g.names = Some(map.iter().map(|v| names[v.index()].clone()).collect());
        }
        Ok((g, map))
    }

    /// The graph with every edge into `set` removed; edges out of `set` stay.
    pub fn strip_incoming(&self, set: NodeSet) -> Digraph {
        let mut g = self.clone();
        for v in set.iter().filter(|v| v.index() < self.n()) {
            for u in self.inn[v.index()].iter() {
                g.out[u.index()].remove(v);
            }
            g.inn[v.index()] = NodeSet::EMPTY;
        }
        g
    }

    /// Members of `from` with at least one edge into `into`.
    pub fn in_neighborhood(&self, from: NodeSet, into: NodeSet) -> NodeSet {
        from.iter()
            .filter(|&u| self.out[u.index()].intersects(into))
            .collect()
    }

    /// Nodes reachable from `start` using only nodes of `within`.
    pub fn reachable_within(&self, start: NodeSet, within: NodeSet) -> NodeSet {
        let mut seen = start & within;
        let mut frontier = seen;
        while !frontier.is_empty() {
            let mut next = NodeSet::EMPTY;
            for u in frontier.iter() {
                next |= self.out[u.index()];
            }
            next = (next & within) - seen;
            seen |= next;
            frontier = next;
        }
        seen
    }

    /// Shortest `u -> v` path whose internal nodes avoid `exclude`, ties broken
    /// by the lexicographically smallest node sequence. `u == v` yields the
    /// single-node path.
    pub fn find_path_excluding(&self, u: NodeId, v: NodeId, exclude: NodeSet) -> Option<Path> {
        if u == v {
            return Some(Path::singleton(v));
        }
        if exclude.contains(v) {
            return None;
        }
        // Distances to v in the graph with edges into `exclude` removed: only v
        // and nodes outside `exclude` may be entered.
        let n = self.n();
        let mut dist = vec![usize::MAX; n];
        dist[v.index()] = 0;
        let mut queue = std::collections::VecDeque::from([v]);
        while let Some(w) = queue.pop_front() {
            if w != v && exclude.contains(w) {
                continue;
            }
            for p in self.inn[w.index()].iter() {
                if dist[p.index()] == usize::MAX {
                    dist[p.index()] = dist[w.index()] + 1;
                    queue.push_back(p);
                }
            }
        }
        if dist[u.index()] == usize::MAX {
            return None;
        }
        let mut nodes = vec![u];
        let mut cur = u;
        while cur != v {
            let want = dist[cur.index()] - 1;
            let next = self.out[cur.index()]
                .iter()
                .find(|&w| dist[w.index()] == want && (w == v || !exclude.contains(w)))
                .expect("distance labels guarantee a successor");
            nodes.push(next);
            cur = next;
        }
        Some(Path::from_nodes(nodes))
    }

    /// Maximum number of `A v`-paths sharing only `v`, with no internal node
    /// in `exclude`. Sources may lie in `exclude`.
    pub fn count_disjoint_paths(
        &self,
        sources: NodeSet,
        terminal: NodeId,
        exclude: NodeSet,
    ) -> Result<PathCount, GraphError> {
        Ok(self.disjoint_paths(sources, terminal, exclude)?.count)
    }

    /// As [`Digraph::count_disjoint_paths`], also returning witness paths and a
    /// minimum vertex cut.
    pub fn disjoint_paths(
        &self,
        sources: NodeSet,
        terminal: NodeId,
        exclude: NodeSet,
    ) -> Result<DisjointPaths, GraphError> {
        if exclude.contains(terminal) {
            return Err(GraphError::TerminalExcluded(terminal));
        }
        self.check_subset(sources)?;
        Ok(flow::disjoint_paths(self, sources, terminal, exclude))
    }

    /// Strongly connected components of the whole graph.
    pub fn condense(&self) -> Condensation {
        scc::condense_within(self, self.nodes())
    }

    /// Strongly connected components of the subgraph on `keep` (ids preserved).
    pub fn condense_within(&self, keep: NodeSet) -> Condensation {
        scc::condense_within(self, keep)
    }

    /// Short stable fingerprint of the edge set.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(format_edge_list(self).as_bytes());
        hex::encode(&digest[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn set(ids: &[u8]) -> NodeSet {
        ids.iter().map(|&i| NodeId(i)).collect()
    }

    fn edges(g: &Digraph) -> Vec<(u8, u8)> {
        g.edges().map(|(u, v)| (u.0, v.0)).collect()
    }

    #[test]
    fn rejects_malformed_graphs() {
        assert_eq!(Digraph::new(0, []), Err(GraphError::Empty));
        assert_eq!(Digraph::new(2, [(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert_eq!(
            Digraph::new(2, [(0, 2)]),
            Err(GraphError::NodeOutOfRange(0, 2, 2))
        );
        assert!(Digraph::new(65, []).is_err());
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = Digraph::new(2, [(0, 1), (0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn induced_examples() {
        let k3 = Digraph::complete(3).unwrap();
        let (g, map) = k3.induced(set(&[0, 1])).unwrap();
        assert_eq!(edges(&g), vec![(0, 1), (1, 0)]);
        assert_eq!(map, vec![NodeId(0), NodeId(1)]);

        let (same, _) = k3.induced(k3.nodes()).unwrap();
        assert_eq!(same, k3);

        let c3 = Digraph::cycle(3).unwrap();
        let (g, map) = c3.induced(set(&[0, 2])).unwrap();
        // c -> a becomes 1 -> 0 after re-indexing.
        assert_eq!(edges(&g), vec![(1, 0)]);
        assert_eq!(map, vec![NodeId(0), NodeId(2)]);

        assert_eq!(
            c3.induced(NodeSet::EMPTY).unwrap_err(),
            GraphError::EmptyInducedSet
        );
    }

    #[test]
    fn strip_incoming_examples() {
        let k2 = Digraph::complete(2).unwrap();
        assert_eq!(edges(&k2.strip_incoming(set(&[1]))), vec![(1, 0)]);
        assert_eq!(k2.strip_incoming(NodeSet::EMPTY), k2);
        let c3 = Digraph::cycle(3).unwrap();
        assert_eq!(edges(&c3.strip_incoming(set(&[0]))), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn in_neighborhood_examples() {
        let g = Digraph::new(2, [(0, 1)]).unwrap();
        assert_eq!(g.in_neighborhood(set(&[0]), set(&[1])), set(&[0]));
        assert!(g.in_neighborhood(NodeSet::EMPTY, set(&[1])).is_empty());
        assert!(g.in_neighborhood(set(&[0]), NodeSet::EMPTY).is_empty());
        let c3 = Digraph::cycle(3).unwrap();
        assert!(c3.in_neighborhood(set(&[0, 1]), set(&[0])).is_empty());
        assert_eq!(c3.in_neighborhood(set(&[1, 2]), set(&[0])), set(&[2]));
    }

    #[test]
    fn find_path_examples() {
        let chain = Digraph::new(3, [(0, 1), (1, 2)]).unwrap();
        let p = chain
            .find_path_excluding(NodeId(0), NodeId(2), NodeSet::EMPTY)
            .unwrap();
        assert_eq!(p.nodes(), &[NodeId(0), NodeId(1), NodeId(2)]);

        let p = chain
            .find_path_excluding(NodeId(1), NodeId(1), set(&[1]))
            .unwrap();
        assert_eq!(p.nodes(), &[NodeId(1)]);

        let c3 = Digraph::cycle(3).unwrap();
        assert!(c3
            .find_path_excluding(NodeId(1), NodeId(0), set(&[2]))
            .is_none());
        // Source inside the excluded set is allowed.
        assert!(c3
            .find_path_excluding(NodeId(2), NodeId(0), set(&[2]))
            .is_some());
    }

    #[test]
    fn find_path_prefers_lexicographically_smallest() {
        // 0 -> {2, 1} -> 3: both length 2, expect via 1.
        let g = Digraph::new(4, [(0, 2), (0, 1), (2, 3), (1, 3)]).unwrap();
        let p = g
            .find_path_excluding(NodeId(0), NodeId(3), NodeSet::EMPTY)
            .unwrap();
        assert_eq!(p.nodes(), &[NodeId(0), NodeId(1), NodeId(3)]);
        let p = g.find_path_excluding(NodeId(0), NodeId(3), set(&[1])).unwrap();
        assert_eq!(p.nodes(), &[NodeId(0), NodeId(2), NodeId(3)]);
    }

    #[test]
    fn fingerprint_is_stable() {
        let a = Digraph::complete(4).unwrap();
        let b = Digraph::complete(4).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), Digraph::cycle(4).unwrap().fingerprint());
    }
}
