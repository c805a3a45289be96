//! Cycle detection through a disjoint-set structure.

use crate::ball::{EdgeConfig, WiredBall};
use crate::error::{Error, Result};

/// Union-find with union by rank and path halving.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub fn new(size: usize) -> Self {
        DisjointSet { parent: (0..size as u32).collect(), rank: vec![0; size] }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    /// Joins the two classes; returns `false` when they were already joined
    /// (i.e. the new edge closes a cycle).
    pub fn unite(&mut self, x: u32, y: u32) -> bool {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        match self.rank[rx as usize].cmp(&self.rank[ry as usize]) {
            std::cmp::Ordering::Less => self.parent[rx as usize] = ry,
            std::cmp::Ordering::Greater => self.parent[ry as usize] = rx,
            std::cmp::Ordering::Equal => {
                self.parent[ry as usize] = rx;
                self.rank[rx as usize] += 1;
            }
        }
        true
    }
}

/// True iff the open subgraph is cycle-free. Parallel boundary edges count:
/// two open parallel edges at the same depth-R vertex form a 2-cycle.
/// Processing open edges through the disjoint-set never joins two already
/// connected endpoints in a forest.
pub fn is_forest(ball: &WiredBall, config: &EdgeConfig) -> Result<bool> {
    if config.universe() != ball.universe() {
        return Err(Error::UniverseMismatch);
    }
    let n = ball.vertex_count() + 1; // + merged boundary vertex
    if n > u32::MAX as u64 {
        return Err(Error::OracleScale("ball too large for forest checking".into()));
    }
    let mut dsu = DisjointSet::new(n as usize);
    for index in config.open_indices() {
        let (u, v) = ball.edge_endpoints(index);
        if !dsu.unite(u as u32, v as u32) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_forest() {
        let ball = WiredBall::new(3, 1).unwrap();
        let cfg = ball.empty_config().unwrap();
        assert!(is_forest(&ball, &cfg).unwrap());
    }

    #[test]
    fn parallel_boundary_edges_form_two_cycle() {
        let ball = WiredBall::new(3, 1).unwrap();
        let mut cfg = ball.empty_config().unwrap();
        cfg.set(ball.boundary_edge_index(0, 0), true);
        cfg.set(ball.boundary_edge_index(0, 1), true);
        assert!(!is_forest(&ball, &cfg).unwrap());
    }

    #[test]
    fn single_path_to_boundary_is_forest() {
        let ball = WiredBall::new(3, 2).unwrap();
        let mut cfg = ball.empty_config().unwrap();
        // o -> first child -> first grandchild -> boundary
        cfg.set(0, true);
        let grandchild = ball.child_id(1, 0);
        cfg.set(ball.internal_edge_index(grandchild), true);
        cfg.set(ball.boundary_edge_index(0, 0), true);
        assert!(is_forest(&ball, &cfg).unwrap());
    }

    #[test]
    fn cycle_through_boundary_detected() {
        // two different depth-1 vertices each wired to the boundary, plus the
        // path through the root joining them
        let ball = WiredBall::new(3, 1).unwrap();
        let mut cfg = ball.empty_config().unwrap();
        cfg.set(0, true); // o - child0
        cfg.set(1, true); // o - child1
        cfg.set(ball.boundary_edge_index(0, 0), true);
        cfg.set(ball.boundary_edge_index(1, 0), true);
        assert!(!is_forest(&ball, &cfg).unwrap());
    }

    /// Independent oracle: a graph is a forest iff every connected component
    /// satisfies |edges| = |vertices| - 1.
    fn is_forest_by_counting(ball: &WiredBall, config: &EdgeConfig) -> bool {
        let n = (ball.vertex_count() + 1) as usize;
        let mut dsu = DisjointSet::new(n);
        for index in config.open_indices() {
            let (u, v) = ball.edge_endpoints(index);
            dsu.unite(u as u32, v as u32); // ignore cycle signal on purpose
        }
        let mut vert_count = vec![0u64; n];
        let mut edge_count = vec![0u64; n];
        for id in 0..n as u32 {
            vert_count[dsu.find(id) as usize] += 1;
        }
        for index in config.open_indices() {
            let (u, _) = ball.edge_endpoints(index);
            edge_count[dsu.find(u as u32) as usize] += 1;
        }
        (0..n).all(|c| vert_count[c] == 0 || edge_count[c] == vert_count[c] - 1)
    }

    #[test]
    fn agrees_with_component_counting_on_all_small_configs() {
        let ball = WiredBall::new(3, 1).unwrap();
        let m = ball.edge_count();
        assert_eq!(m, 9);
        for mask in 0u32..1 << m {
            let mut cfg = ball.empty_config().unwrap();
            for i in 0..m {
                if mask >> i & 1 == 1 {
                    cfg.set(i, true);
                }
            }
            assert_eq!(
                is_forest(&ball, &cfg).unwrap(),
                is_forest_by_counting(&ball, &cfg),
                "mask {mask:#b}"
            );
        }
    }
}
