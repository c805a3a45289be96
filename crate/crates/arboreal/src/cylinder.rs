//! Cylinder events: a finite pinned edge set `B` with configuration `η`.
//!
//! The closed-form infinite-volume probability needs `B` connected and
//! touching the root. `η` splits the boundary edges `∂B` into equivalence
//! classes: two boundary edges are related iff their lower endpoints are
//! joined by an open path inside `η`. Class sizes are all the formula needs.

use crate::error::{Error, Result};
use crate::tree::{boundary_edge_sets, Edge, TreeAddress};
use std::collections::HashMap;

/// A validated cylinder event over the k-regular tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderSpec {
    k: u32,
    /// Pinned edges in canonical order.
    edges: Vec<Edge>,
    /// Open flags parallel to `edges`.
    open: Vec<bool>,
}

impl CylinderSpec {
    /// The trivial cylinder (`B = ∅`), which every measure assigns mass 1.
    pub fn empty(k: u32) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidParameter(format!("k must be >= 3, got {k}")));
        }
        Ok(CylinderSpec { k, edges: Vec::new(), open: Vec::new() })
    }

    /// Validates that `B` is connected as an edge set, contains an edge
    /// adjacent to the root, and addresses respect the branching bounds.
    pub fn new(k: u32, pinned: Vec<(Edge, bool)>) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidParameter(format!("k must be >= 3, got {k}")));
        }
        if pinned.is_empty() {
            return Self::empty(k);
        }
        let mut sorted = pinned;
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidSpec(format!("edge {} pinned twice", w[0].0)));
            }
        }
        for (e, _) in &sorted {
            // re-validate digits against k
            TreeAddress::from_path(e.upper().path(), k)?;
        }
        if !sorted.iter().any(|(e, _)| e.is_adjacent_to_root()) {
            return Err(Error::InvalidSpec("B must contain an edge adjacent to the root".into()));
        }
        // connectivity: B is a subtree iff every non-root-adjacent pinned edge
        // has its parent edge pinned as well (edge sets on a tree)
        let edge_set: std::collections::BTreeSet<&Edge> = sorted.iter().map(|(e, _)| e).collect();
        for (e, _) in &sorted {
            if !e.is_adjacent_to_root() {
                let parent_edge = Edge::parent_of(e.lower()).expect("non-root lower endpoint");
                if !edge_set.contains(&parent_edge) {
                    return Err(Error::InvalidSpec(format!(
                        "B is not connected: {} is pinned but its parent edge is not",
                        e
                    )));
                }
            }
        }
        let (edges, open) = sorted.into_iter().unzip();
        Ok(CylinderSpec { k, edges, open })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_open(&self, i: usize) -> bool {
        self.open[i]
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&b| b).count()
    }

    pub fn closed_count(&self) -> usize {
        self.len() - self.open_count()
    }

    /// Largest depth of an upper endpoint of `B`.
    pub fn max_depth(&self) -> u32 {
        self.edges.iter().map(|e| e.depth() as u32).max().unwrap_or(0)
    }

    /// Same pinned set with a different configuration `η`.
    pub fn with_open_mask(&self, mask: u64) -> CylinderSpec {
        let open = (0..self.edges.len()).map(|i| mask >> i & 1 == 1).collect();
        CylinderSpec { k: self.k, edges: self.edges.clone(), open }
    }

    /// The spec extended by one boundary edge `f` with the given state.
    pub fn extended(&self, f: Edge, open: bool) -> Result<CylinderSpec> {
        let mut pinned: Vec<(Edge, bool)> =
            self.edges.iter().cloned().zip(self.open.iter().copied()).collect();
        pinned.push((f, open));
        CylinderSpec::new(self.k, pinned)
    }

    /// Boundary edges `∂B` of the pinned set.
    pub fn boundary(&self) -> Vec<Edge> {
        boundary_edge_sets(&self.edges, self.k).0
    }

    /// Multiset of equivalence-class sizes of `∂B` under the relation "lower
    /// endpoints joined by a path in η", sorted descending. Sizes sum to
    /// `|∂B| = (k-2)|B| + k` for nonempty valid specs.
    pub fn boundary_classes(&self) -> Vec<usize> {
        if self.is_empty() {
            return Vec::new();
        }
        // index the vertices of B
        let mut vid: HashMap<TreeAddress, u32> = HashMap::new();
        let mut next = 0u32;
        for e in &self.edges {
            for v in [e.lower().clone(), e.upper()] {
                vid.entry(v).or_insert_with(|| {
                    let id = next;
                    next += 1;
                    id
                });
            }
        }
        let mut dsu = crate::forest::DisjointSet::new(next as usize);
        for (i, e) in self.edges.iter().enumerate() {
            if self.open[i] {
                dsu.unite(vid[e.lower()], vid[&e.upper()]);
            }
        }
        let mut class_sizes: HashMap<u32, usize> = HashMap::new();
        for f in self.boundary() {
            // every boundary edge of a connected B touching o hangs below a
            // vertex of B, so its lower endpoint is in B
            let root = dsu.find(vid[f.lower()]);
            *class_sizes.entry(root).or_insert(0) += 1;
        }
        let mut sizes: Vec<usize> = class_sizes.into_values().collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }
}
