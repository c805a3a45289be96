//! Brute-force enumeration oracle over small multigraphs.
//!
//! Ground truth for everything else: walks every forest of a graph with at
//! most [`ENUMERATION_EDGE_CAP`] edges by a depth-first scan with disjoint-set
//! rollback, so cycles are pruned without visiting their supersets.

use crate::ball::WiredBall;
use crate::error::{Error, Result};

/// Largest edge count the enumeration oracle accepts (~16M subsets).
pub const ENUMERATION_EDGE_CAP: usize = 24;

/// A small undirected multigraph, vertices `0..n_vertices`.
#[derive(Debug, Clone)]
pub struct SmallGraph {
    n_vertices: u32,
    edges: Vec<(u32, u32)>,
}

impl SmallGraph {
    pub fn new(n_vertices: u32, edges: Vec<(u32, u32)>) -> Result<Self> {
        for &(u, v) in &edges {
            if u >= n_vertices || v >= n_vertices {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u},{v}) out of range for {n_vertices} vertices"
                )));
            }
            if u == v {
                return Err(Error::InvalidParameter("self-loops are not supported".into()));
            }
        }
        Ok(SmallGraph { n_vertices, edges })
    }

    /// Three vertices, three edges; the smallest graph with a cycle.
    pub fn triangle() -> Self {
        SmallGraph { n_vertices: 3, edges: vec![(0, 1), (1, 2), (2, 0)] }
    }

    /// The wired ball as an explicit edge list; edge `i` of the graph is edge
    /// `i` of the ball's frozen numbering. The boundary vertex comes last.
    pub fn from_wired_ball(ball: &WiredBall) -> Result<Self> {
        let m = ball.edge_count();
        if m as usize > ENUMERATION_EDGE_CAP {
            return Err(Error::OracleScale(format!(
                "ball has {m} edges; the enumeration oracle caps at {ENUMERATION_EDGE_CAP}"
            )));
        }
        let edges = (0..m)
            .map(|i| {
                let (u, v) = ball.edge_endpoints(i);
                (u as u32, v as u32)
            })
            .collect();
        Ok(SmallGraph { n_vertices: ball.vertex_count() as u32 + 1, edges })
    }

    /// The subgraph of a wired ball spanned by a subset of root branches,
    /// with the root and the boundary vertex kept. Vertex 0 is the root; the
    /// boundary vertex is last.
    pub fn wired_branch_union(ball: &WiredBall, branches: &[u32]) -> Result<Self> {
        for &b in branches {
            if b >= ball.k() {
                return Err(Error::InvalidParameter(format!("branch {b} out of range")));
            }
        }
        let keep = |id: u64| -> bool {
            if id == 0 {
                return true;
            }
            let first = ball.address_of(id).path()[0] as u32;
            branches.contains(&first)
        };
        let mut map = std::collections::HashMap::new();
        map.insert(0u64, 0u32);
        let mut next = 1u32;
        let mut edges = Vec::new();
        let mut ids: Vec<u64> = (1..ball.vertex_count()).filter(|&id| keep(id)).collect();
        ids.sort_unstable();
        for id in ids {
            map.insert(id, next);
            next += 1;
        }
        let boundary = next;
        for i in 0..ball.edge_count() {
            let (u, v) = ball.edge_endpoints(i);
            let keep_edge = keep(u) && (v == ball.boundary_vertex() || keep(v));
            if keep_edge {
                let mu = map[&u];
                let mv = if v == ball.boundary_vertex() { boundary } else { map[&v] };
                edges.push((mu, mv));
            }
        }
        if edges.len() > ENUMERATION_EDGE_CAP {
            return Err(Error::OracleScale("branch union exceeds the enumeration cap".into()));
        }
        Ok(SmallGraph { n_vertices: boundary + 1, edges })
    }

    pub fn n_vertices(&self) -> u32 {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }
}

/// Union-find with union by rank and a rollback stack; no path compression,
/// so undo is O(1) per union.
struct RollbackDsu {
    parent: Vec<u32>,
    rank: Vec<u8>,
    trail: Vec<(u32, bool)>, // (child root attached, rank bumped)
}

impl RollbackDsu {
    fn new(n: usize) -> Self {
        RollbackDsu { parent: (0..n as u32).collect(), rank: vec![0; n], trail: Vec::new() }
    }

    fn find(&self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            x = self.parent[x as usize];
        }
        x
    }

    /// Returns false (and records nothing) when x and y are already joined.
    fn unite(&mut self, x: u32, y: u32) -> bool {
        let (mut rx, mut ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        if self.rank[rx as usize] < self.rank[ry as usize] {
            std::mem::swap(&mut rx, &mut ry);
        }
        let bump = self.rank[rx as usize] == self.rank[ry as usize];
        self.parent[ry as usize] = rx;
        if bump {
            self.rank[rx as usize] += 1;
        }
        self.trail.push((ry, bump));
        true
    }

    fn undo(&mut self) {
        let (child, bump) = self.trail.pop().expect("undo without union");
        let root = self.parent[child as usize];
        self.parent[child as usize] = child;
        if bump {
            self.rank[root as usize] -= 1;
        }
    }
}

/// Visits every forest of `graph` as `(edge mask, open edge count)`.
pub fn for_each_forest(graph: &SmallGraph, mut visit: impl FnMut(u32, u32)) -> Result<()> {
    let m = graph.n_edges();
    if m > ENUMERATION_EDGE_CAP {
        return Err(Error::OracleScale(format!(
            "{m} edges exceed the enumeration cap of {ENUMERATION_EDGE_CAP}"
        )));
    }
    let mut dsu = RollbackDsu::new(graph.n_vertices as usize);
    // iterative DFS over include/exclude decisions per edge
    fn recurse(
        graph: &SmallGraph,
        dsu: &mut RollbackDsu,
        i: usize,
        mask: u32,
        open: u32,
        visit: &mut impl FnMut(u32, u32),
    ) {
        if i == graph.n_edges() {
            visit(mask, open);
            return;
        }
        recurse(graph, dsu, i + 1, mask, open, visit);
        let (u, v) = graph.edges[i];
        if dsu.unite(u, v) {
            recurse(graph, dsu, i + 1, mask | 1 << i, open + 1, visit);
            dsu.undo();
        }
    }
    recurse(graph, &mut dsu, 0, 0, 0, &mut visit);
    Ok(())
}

/// Connectivity of two vertices within the open subgraph `mask`.
pub fn mask_connects(graph: &SmallGraph, mask: u32, a: u32, b: u32) -> bool {
    let mut dsu = RollbackDsu::new(graph.n_vertices as usize);
    for (i, &(u, v)) in graph.edges.iter().enumerate() {
        if mask >> i & 1 == 1 {
            dsu.unite(u, v);
        }
    }
    dsu.find(a) == dsu.find(b)
}

/// The exhaustive partition function `Z = Σ_forests β^{|η|}` together with
/// per-size forest counts, supporting event weights under the arboreal gas.
#[derive(Debug, Clone)]
pub struct ForestEnumeration {
    graph: SmallGraph,
    beta: f64,
    size_counts: Vec<u64>,
    z: f64,
}

impl ForestEnumeration {
    pub fn new(graph: &SmallGraph, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "enumeration needs finite beta > 0, got {beta}"
            )));
        }
        let mut size_counts = vec![0u64; graph.n_edges() + 1];
        for_each_forest(graph, |_, open| size_counts[open as usize] += 1)?;
        let z = size_counts
            .iter()
            .enumerate()
            .map(|(j, &c)| c as f64 * beta.powi(j as i32))
            .sum();
        Ok(ForestEnumeration { graph: graph.clone(), beta, size_counts, z })
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Forest counts by open-edge count; `Z(β) = Σ_j counts[j] β^j`.
    pub fn size_counts(&self) -> &[u64] {
        &self.size_counts
    }

    /// Total β-weight of forests whose edge mask satisfies the predicate.
    pub fn event_weight(&self, mut pred: impl FnMut(u32) -> bool) -> f64 {
        let mut w = 0.0;
        for_each_forest(&self.graph, |mask, open| {
            if pred(mask) {
                w += self.beta.powi(open as i32);
            }
        })
        .expect("cap already checked at construction");
        w
    }

    /// Probability of an event under the arboreal gas on this graph.
    pub fn probability(&self, pred: impl FnMut(u32) -> bool) -> f64 {
        self.event_weight(pred) / self.z
    }

    /// Probability that bond percolation at parameter `p` yields a forest.
    pub fn percolation_forest_prob(&self, p: f64) -> f64 {
        let m = self.graph.n_edges() as i32;
        self.size_counts
            .iter()
            .enumerate()
            .map(|(j, &c)| c as f64 * p.powi(j as i32) * (1.0 - p).powi(m - j as i32))
            .sum()
    }

    pub fn graph(&self) -> &SmallGraph {
        &self.graph
    }
}
