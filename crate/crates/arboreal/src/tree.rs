//! Canonical coordinates on the rooted k-regular tree.
//!
//! A vertex is addressed by its path of child indices from the root `o`.
//! The root has `k` children (indices `0..k`); every other vertex has `k-1`
//! children (indices `0..k-1`). An edge is named by its endpoint closer to
//! the root (`lower`) together with the child index it descends along, so
//! `d(o, lower) + 1 = d(o, upper)` always holds.

use crate::error::{Error, Result};
use std::collections::BTreeSet;

/// Address of a vertex: the child-index path from the root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TreeAddress {
    path: Vec<u8>,
}

impl TreeAddress {
    /// The distinguished root vertex `o`.
    pub fn root() -> Self {
        TreeAddress { path: Vec::new() }
    }

    /// Builds an address, validating each digit against the branching of the
    /// k-regular tree (first digit `< k`, later digits `< k-1`).
    pub fn from_path(path: &[u8], k: u32) -> Result<Self> {
        for (i, &d) in path.iter().enumerate() {
            let bound = if i == 0 { k } else { k - 1 };
            if (d as u32) >= bound {
                return Err(Error::InvalidParameter(format!(
                    "child index {d} at step {i} out of range for k = {k}"
                )));
            }
        }
        Ok(TreeAddress { path: path.to_vec() })
    }

    pub fn path(&self) -> &[u8] {
        &self.path
    }

    pub fn depth(&self) -> usize {
        self.path.len()
    }

    pub fn is_root(&self) -> bool {
        self.path.is_empty()
    }

    pub fn parent(&self) -> Option<TreeAddress> {
        if self.path.is_empty() {
            None
        } else {
            Some(TreeAddress { path: self.path[..self.path.len() - 1].to_vec() })
        }
    }

    /// Child along index `i`. Callers are responsible for the branching bound
    /// (`i < k` at the root, `i < k-1` elsewhere); validated constructors go
    /// through [`TreeAddress::from_path`].
    pub fn child(&self, i: u8) -> TreeAddress {
        let mut path = self.path.clone();
        path.push(i);
        TreeAddress { path }
    }

    /// Number of children in the k-regular tree.
    pub fn child_count(&self, k: u32) -> u32 {
        if self.is_root() {
            k
        } else {
            k - 1
        }
    }

    /// True iff the geodesic from the root to `self` passes through `v`,
    /// i.e. `v`'s path is a prefix of this path.
    pub fn is_descendant_of(&self, v: &TreeAddress) -> bool {
        self.path.len() >= v.path.len() && self.path[..v.path.len()] == v.path[..]
    }

    /// Graph distance in the tree.
    pub fn distance(&self, other: &TreeAddress) -> usize {
        let common = self
            .path
            .iter()
            .zip(other.path.iter())
            .take_while(|(a, b)| a == b)
            .count();
        (self.path.len() - common) + (other.path.len() - common)
    }
}

impl std::fmt::Display for TreeAddress {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.path.is_empty() {
            return write!(f, "o");
        }
        write!(f, "o:")?;
        for (i, d) in self.path.iter().enumerate() {
            if i > 0 {
                write!(f, "/")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// An oriented tree edge, named by its lower endpoint and child index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    lower: TreeAddress,
    child_index: u8,
}

impl Edge {
    pub fn new(lower: TreeAddress, child_index: u8) -> Self {
        Edge { lower, child_index }
    }

    /// The edge whose upper endpoint is `v` (none for the root).
    pub fn parent_of(v: &TreeAddress) -> Option<Edge> {
        v.parent().map(|p| Edge::new(p, *v.path().last().unwrap()))
    }

    pub fn lower(&self) -> &TreeAddress {
        &self.lower
    }

    pub fn child_index(&self) -> u8 {
        self.child_index
    }

    pub fn upper(&self) -> TreeAddress {
        self.lower.child(self.child_index)
    }

    /// Depth of the upper endpoint; the lower endpoint sits one level above.
    pub fn depth(&self) -> usize {
        self.lower.depth() + 1
    }

    pub fn is_adjacent_to_root(&self) -> bool {
        self.lower.is_root()
    }
}

impl std::fmt::Display for Edge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.upper())
    }
}

/// All `k` tree edges incident to a vertex: the parent edge (absent at the
/// root) plus its child edges.
pub fn edges_at(v: &TreeAddress, k: u32) -> Vec<Edge> {
    let mut out = Vec::with_capacity(k as usize);
    if let Some(e) = Edge::parent_of(v) {
        out.push(e);
    }
    for i in 0..v.child_count(k) {
        out.push(Edge::new(v.clone(), i as u8));
    }
    out
}

fn vertex_set(b: &BTreeSet<Edge>) -> BTreeSet<TreeAddress> {
    let mut vs = BTreeSet::new();
    for e in b {
        vs.insert(e.lower().clone());
        vs.insert(e.upper());
    }
    vs
}

fn boundary_of(b: &BTreeSet<Edge>, k: u32) -> BTreeSet<Edge> {
    let mut out = BTreeSet::new();
    for v in vertex_set(b) {
        for e in edges_at(&v, k) {
            if !b.contains(&e) {
                out.insert(e);
            }
        }
    }
    out
}

/// Edge boundaries of a finite edge set `B` in the infinite tree:
/// `∂B` is the set of edges outside `B` sharing an endpoint with `B`, and
/// `∂²B = ∂(B ∪ ∂B)`. Both are returned in canonical order.
pub fn boundary_edge_sets(b: &[Edge], k: u32) -> (Vec<Edge>, Vec<Edge>) {
    let b_set: BTreeSet<Edge> = b.iter().cloned().collect();
    let first = boundary_of(&b_set, k);
    let mut union = b_set;
    union.extend(first.iter().cloned());
    let second = boundary_of(&union, k);
    (first.into_iter().collect(), second.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parent_child_round_trip() {
        let v = TreeAddress::from_path(&[2, 0, 1], 3).unwrap();
        for i in 0..v.child_count(3) {
            assert_eq!(v.child(i as u8).parent().unwrap(), v);
        }
    }

    #[test]
    fn root_has_k_children_others_k_minus_one() {
        assert_eq!(TreeAddress::root().child_count(4), 4);
        assert_eq!(TreeAddress::root().child(3).child_count(4), 3);
        assert!(TreeAddress::from_path(&[3], 3).is_err());
        assert!(TreeAddress::from_path(&[2, 2], 3).is_err());
        assert!(TreeAddress::from_path(&[2, 1], 3).is_ok());
    }

    #[test]
    fn edge_orientation() {
        let e = Edge::new(TreeAddress::from_path(&[1], 3).unwrap(), 0);
        assert_eq!(e.lower().depth() + 1, e.upper().depth());
        assert_eq!(e.depth(), 2);
    }

    #[test]
    fn descendant_via_geodesic_prefix() {
        let v = TreeAddress::from_path(&[1], 3).unwrap();
        let u = TreeAddress::from_path(&[1, 0, 1], 3).unwrap();
        assert!(u.is_descendant_of(&v));
        assert!(u.is_descendant_of(&TreeAddress::root()));
        assert!(!v.is_descendant_of(&u));
        assert!(v.is_descendant_of(&v));
    }

    #[test]
    fn boundary_of_single_root_edge() {
        // k = 3: two other edges at o, two child edges at the upper endpoint.
        let e = Edge::new(TreeAddress::root(), 0);
        let (b1, b2) = boundary_edge_sets(&[e.clone()], 3);
        assert_eq!(b1.len(), 4);
        assert!(!b1.contains(&e));
        // ∂²: edges adjacent to B ∪ ∂B but outside it. |∂(B ∪ ∂B)| for the
        // 5-edge star-ish set: each of the 4 boundary edges adds k-1 = 2 fresh
        // outer edges, and the two root edges' upper endpoints add 2 each.
        assert_eq!(b2.len(), 8);

        let (b1, _) = boundary_edge_sets(&[Edge::new(TreeAddress::root(), 0)], 4);
        assert_eq!(b1.len(), 6);
    }

    #[test]
    fn boundary_of_empty_set_is_empty() {
        let (b1, b2) = boundary_edge_sets(&[], 3);
        assert!(b1.is_empty());
        assert!(b2.is_empty());
    }

    #[test]
    fn boundary_of_two_edge_path() {
        // o -> u -> v with k = 3: 2 free edges at o, 1 at u, 2 at v.
        let e1 = Edge::new(TreeAddress::root(), 0);
        let e2 = Edge::new(e1.upper(), 0);
        let (b1, _) = boundary_edge_sets(&[e1, e2], 3);
        assert_eq!(b1.len(), 5);
    }
}
