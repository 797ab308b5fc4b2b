use std::fmt;
use std::ops::{BitAnd, BitAndAssign, BitOr, BitOrAssign, Not, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{NodeId, MAX_NODES};

/// Set of node ids stored as a 64-bit mask. Iteration is ascending.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeSet(u64);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_NODES);
        if n == MAX_NODES {
            NodeSet(u64::MAX)
        } else {
            NodeSet((1u64 << n) - 1)
        }
    }

    #[inline]
    pub const fn from_bits(bits: u64) -> Self {
        NodeSet(bits)
    }

    #[inline]
    pub const fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn singleton(v: NodeId) -> Self {
        NodeSet(1u64 << v.0)
    }

    #[inline]
    pub fn contains(self, v: NodeId) -> bool {
        (v.index() < MAX_NODES) && self.0 & (1u64 << v.0) != 0
    }

    #[inline]
    pub fn insert(&mut self, v: NodeId) {
        self.0 |= 1u64 << v.0;
    }

    #[inline]
    pub fn remove(&mut self, v: NodeId) {
        self.0 &= !(1u64 << v.0);
    }

    #[inline]
    pub fn with(self, v: NodeId) -> Self {
        NodeSet(self.0 | (1u64 << v.0))
    }

    #[inline]
    pub fn without(self, v: NodeId) -> Self {
        NodeSet(self.0 & !(1u64 << v.0))
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn is_subset(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn intersects(self, other: NodeSet) -> bool {
        self.0 & other.0 != 0
    }

    /// Smallest member.
    pub fn first(self) -> Option<NodeId> {
        (self.0 != 0).then(|| NodeId(self.0.trailing_zeros() as u8))
    }

    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    /// Complement relative to `{0, .., n-1}`.
    pub fn complement(self, n: usize) -> Self {
        NodeSet::full(n) - self
    }

    /// All subsets of `self` with at most `k` members, ordered by
    /// `(size, mask)` ascending.
    pub fn subsets_up_to(self, k: usize) -> Vec<NodeSet> {
        let members: Vec<NodeId> = self.iter().collect();
        let mut out = Vec::new();
        for size in 0..=k.min(members.len()) {
            let mut level = Vec::new();
            combinations(&members, size, 0, NodeSet::EMPTY, &mut level);
            level.sort();
            out.extend(level);
        }
        out
    }
}

fn combinations(members: &[NodeId], left: usize, start: usize, acc: NodeSet, out: &mut Vec<NodeSet>) {
    if left == 0 {
        out.push(acc);
        return;
    }
    for i in start..members.len() {
        if members.len() - i < left {
            break;
        }
        combinations(members, left - 1, i + 1, acc.with(members[i]), out);
    }
}

pub struct Iter(u64);

impl Iterator for Iter {
    type Item = NodeId;

    #[inline]
    fn next(&mut self) -> Option<NodeId> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(NodeId(i as u8))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

impl IntoIterator for NodeSet {
    type Item = NodeId;
    type IntoIter = Iter;

    fn into_iter(self) -> Iter {
        self.iter()
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        let mut s = NodeSet::EMPTY;
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl BitOr for NodeSet {
    type Output = NodeSet;
    fn bitor(self, rhs: NodeSet) -> NodeSet {
        NodeSet(self.0 | rhs.0)
    }
}

impl BitOrAssign for NodeSet {
    fn bitor_assign(&mut self, rhs: NodeSet) {
        self.0 |= rhs.0;
    }
}

impl BitAnd for NodeSet {
    type Output = NodeSet;
    fn bitand(self, rhs: NodeSet) -> NodeSet {
        NodeSet(self.0 & rhs.0)
    }
}

impl BitAndAssign for NodeSet {
    fn bitand_assign(&mut self, rhs: NodeSet) {
        self.0 &= rhs.0;
    }
}

impl Sub for NodeSet {
    type Output = NodeSet;
    fn sub(self, rhs: NodeSet) -> NodeSet {
        NodeSet(self.0 & !rhs.0)
    }
}

impl SubAssign for NodeSet {
    fn sub_assign(&mut self, rhs: NodeSet) {
        self.0 &= !rhs.0;
    }
}

impl Not for NodeSet {
    type Output = NodeSet;
    fn not(self) -> NodeSet {
        NodeSet(!self.0)
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for NodeSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for NodeSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let ids = Vec::<u8>::deserialize(d)?;
        if let Some(bad) = ids.iter().find(|&&i| i as usize >= MAX_NODES) {
            return Err(serde::de::Error::custom(format!("node id {bad} out of range")));
        }
        Ok(ids.into_iter().map(NodeId).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iterates_ascending() {
        let s: NodeSet = [5u8, 1, 3].into_iter().map(NodeId).collect();
        assert_eq!(s.iter().map(|v| v.0).collect::<Vec<_>>(), vec![1, 3, 5]);
        assert_eq!(s.first(), Some(NodeId(1)));
        assert_eq!(s.to_string(), "{1,3,5}");
    }

    #[test]
    fn subsets_in_size_then_mask_order() {
        let subsets = NodeSet::full(3).subsets_up_to(2);
        let bits: Vec<u64> = subsets.iter().map(|s| s.bits()).collect();
        assert_eq!(bits, vec![0, 1, 2, 4, 3, 5, 6]);
        assert_eq!(NodeSet::full(4).subsets_up_to(4).len(), 16);
    }

    #[test]
    fn serde_as_id_list() {
        let s: NodeSet = [0u8, 2].into_iter().map(NodeId).collect();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "[0,2]");
        assert_eq!(serde_json::from_str::<NodeSet>(&json).unwrap(), s);
        assert!(serde_json::from_str::<NodeSet>("[64]").is_err());
    }

    #[test]
    fn full_sixty_four() {
        assert_eq!(NodeSet::full(64).len(), 64);
        assert_eq!(NodeSet::full(0), NodeSet::EMPTY);
    }
}
