use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::{Digraph, NodeId, NodeSet};

/// Sequence of nodes. The empty path stands for the bare initiation marker of
/// a flood message; every other path has a source and a terminal.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path(SmallVec<[NodeId; 16]>);

impl Path {
    pub fn empty() -> Self {
        Path(SmallVec::new())
    }

    pub fn singleton(v: NodeId) -> Self {
        let mut p = SmallVec::new();
        p.push(v);
        Path(p)
    }

    pub fn from_nodes<I: IntoIterator<Item = NodeId>>(nodes: I) -> Self {
        Path(nodes.into_iter().collect())
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn source(&self) -> Option<NodeId> {
        self.0.first().copied()
    }

    pub fn terminal(&self) -> Option<NodeId> {
        self.0.last().copied()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0.contains(&v)
    }

    /// Nodes strictly between source and terminal.
    pub fn internal(&self) -> &[NodeId] {
        if self.0.len() <= 2 {
            &[]
        } else {
            &self.0[1..self.0.len() - 1]
        }
    }

    pub fn internal_set(&self) -> NodeSet {
        self.internal().iter().copied().collect()
    }

    pub fn node_set(&self) -> NodeSet {
        self.0.iter().copied().collect()
    }

    /// Copy of the path with `v` appended.
    pub fn extended(&self, v: NodeId) -> Path {
        let mut p = self.0.clone();
        p.push(v);
        Path(p)
    }

    pub fn push(&mut self, v: NodeId) {
        self.0.push(v);
    }

    /// True for a non-empty sequence without repeats whose consecutive pairs
    /// are edges of `g`.
    pub fn is_simple_path_in(&self, g: &Digraph) -> bool {
        if self.0.is_empty() {
            return false;
        }
        let mut seen = NodeSet::EMPTY;
        for &v in &self.0 {
            if v.index() >= g.n() || seen.contains(v) {
                return false;
            }
            seen.insert(v);
        }
        self.0.windows(2).all(|w| g.has_edge(w[0], w[1]))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("⊥");
        }
        f.write_str("<")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(">")
    }
}

impl fmt::Debug for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(ids: &[u8]) -> Path {
        Path::from_nodes(ids.iter().map(|&i| NodeId(i)))
    }

    #[test]
    fn internal_nodes() {
        assert!(p(&[1]).internal().is_empty());
        assert!(p(&[1, 2]).internal().is_empty());
        assert_eq!(p(&[1, 2, 3]).internal(), &[NodeId(2)]);
    }

    #[test]
    fn simple_path_check() {
        let g = Digraph::cycle(3).unwrap();
        assert!(p(&[0, 1, 2]).is_simple_path_in(&g));
        assert!(!p(&[0, 2]).is_simple_path_in(&g));
        assert!(!p(&[0, 1, 2, 0]).is_simple_path_in(&g));
        assert!(!Path::empty().is_simple_path_in(&g));
        assert!(!p(&[7]).is_simple_path_in(&g));
    }

    #[test]
    fn display() {
        assert_eq!(Path::empty().to_string(), "⊥");
        assert_eq!(p(&[0, 3]).to_string(), "<0,3>");
    }
}
