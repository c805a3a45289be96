//! Finite balls of the k-regular tree and edge configurations over them.
//!
//! Vertices are numbered breadth-first: the root is `0`, and vertices at each
//! depth follow in lexicographic address order. Internal edge `i` is the
//! parent edge of vertex `i + 1`, which freezes the edge numbering promised
//! by the serialization format. In the wired ball every depth-`R` vertex
//! additionally carries `k - 1` parallel edges to the single merged boundary
//! vertex; these come after all internal edges, ordered by parent vertex and
//! then by parallel slot.

use crate::error::{Error, Result};
use crate::tree::{Edge, TreeAddress};

/// Materializing a configuration beyond this is refused (bitset memory).
const MAX_CONFIG_EDGES: u64 = 1 << 28;

#[derive(Debug, Clone, PartialEq, Eq)]
struct BallGeometry {
    k: u32,
    radius: u32,
    /// `offsets[d]` = id of the first vertex at depth `d`; `offsets[r + 1]`
    /// = total internal vertex count.
    offsets: Vec<u64>,
}

impl BallGeometry {
    fn new(k: u32, radius: u32) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidParameter(format!("k must be >= 3, got {k}")));
        }
        if radius < 1 {
            return Err(Error::InvalidParameter("radius must be >= 1".into()));
        }
        let mut offsets = Vec::with_capacity(radius as usize + 2);
        offsets.push(0u64);
        let mut level = 1u64; // vertices at current depth
        let mut total = 1u64;
        for d in 1..=radius {
            level = level
                .checked_mul(if d == 1 { k as u64 } else { (k - 1) as u64 })
                .ok_or_else(|| Error::InvalidParameter("ball too large for 64-bit ids".into()))?;
            offsets.push(total);
            total = total
                .checked_add(level)
                .ok_or_else(|| Error::InvalidParameter("ball too large for 64-bit ids".into()))?;
        }
        offsets.push(total);
        // boundary edge ids must also fit
        total
            .checked_add(level.checked_mul((k - 1) as u64).ok_or_else(|| {
                Error::InvalidParameter("ball too large for 64-bit ids".into())
            })?)
            .ok_or_else(|| Error::InvalidParameter("ball too large for 64-bit ids".into()))?;
        Ok(BallGeometry { k, radius, offsets })
    }

    fn vertex_count(&self) -> u64 {
        self.offsets[self.radius as usize + 1]
    }

    fn level_count(&self, depth: u32) -> u64 {
        self.offsets[depth as usize + 1] - self.offsets[depth as usize]
    }

    fn vertex_id(&self, depth: u32, rank: u64) -> u64 {
        self.offsets[depth as usize] + rank
    }

    fn depth_rank(&self, id: u64) -> (u32, u64) {
        debug_assert!(id < self.vertex_count());
        let d = self.offsets.partition_point(|&o| o <= id) - 1;
        (d as u32, id - self.offsets[d])
    }

    fn parent_id(&self, id: u64) -> Option<u64> {
        if id == 0 {
            return None;
        }
        let (d, rank) = self.depth_rank(id);
        Some(if d == 1 {
            0
        } else {
            self.vertex_id(d - 1, rank / (self.k - 1) as u64)
        })
    }

    fn child_id(&self, id: u64, slot: u32) -> u64 {
        let (d, rank) = self.depth_rank(id);
        debug_assert!(d < self.radius);
        if d == 0 {
            self.vertex_id(1, slot as u64)
        } else {
            self.vertex_id(d + 1, rank * (self.k - 1) as u64 + slot as u64)
        }
    }

    fn slot_in_parent(&self, id: u64) -> u32 {
        let (d, rank) = self.depth_rank(id);
        debug_assert!(d >= 1);
        if d == 1 {
            rank as u32
        } else {
            (rank % (self.k - 1) as u64) as u32
        }
    }

    fn address_of(&self, id: u64) -> TreeAddress {
        let (d, mut rank) = self.depth_rank(id);
        if d == 0 {
            return TreeAddress::root();
        }
        let mut digits = vec![0u8; d as usize];
        for i in (1..d as usize).rev() {
            digits[i] = (rank % (self.k - 1) as u64) as u8;
            rank /= (self.k - 1) as u64;
        }
        digits[0] = rank as u8;
        TreeAddress::from_path(&digits, self.k).expect("ranks stay within branching bounds")
    }

    fn id_of(&self, v: &TreeAddress) -> Result<u64> {
        let d = v.depth() as u32;
        if d > self.radius {
            return Err(Error::InvalidParameter(format!(
                "vertex {v} lies outside the radius-{} ball",
                self.radius
            )));
        }
        let mut rank = 0u64;
        for (i, &digit) in v.path().iter().enumerate() {
            let bound = if i == 0 { self.k } else { self.k - 1 };
            if (digit as u32) >= bound {
                return Err(Error::InvalidParameter(format!("invalid address {v} for k = {}", self.k)));
            }
            rank = rank * (self.k - 1) as u64 + digit as u64;
        }
        Ok(self.vertex_id(d, rank))
    }
}

/// Identifies the edge universe a configuration lives over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Universe {
    /// Ball of `radius` with wired boundary: internal plus boundary edges.
    Wired { k: u32, radius: u32 },
    /// Plain truncated tree ball: internal edges only.
    Tree { k: u32, radius: u32 },
}

/// The wired ball `G_R`: the radius-`R` tree ball together with a single
/// merged boundary vertex, reached from every depth-`R` vertex through
/// `k - 1` parallel edges. Any two parallel edges form a 2-cycle, so the
/// graph is genuinely a multigraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WiredBall {
    geo: BallGeometry,
}

impl WiredBall {
    pub fn new(k: u32, radius: u32) -> Result<Self> {
        Ok(WiredBall { geo: BallGeometry::new(k, radius)? })
    }

    pub fn k(&self) -> u32 {
        self.geo.k
    }

    pub fn radius(&self) -> u32 {
        self.geo.radius
    }

    /// Internal vertices, excluding the boundary vertex.
    pub fn vertex_count(&self) -> u64 {
        self.geo.vertex_count()
    }

    /// Id of the merged boundary vertex (one past the internal vertices).
    pub fn boundary_vertex(&self) -> u64 {
        self.geo.vertex_count()
    }

    pub fn internal_edge_count(&self) -> u64 {
        self.geo.vertex_count() - 1
    }

    pub fn boundary_edge_count(&self) -> u64 {
        self.geo.level_count(self.geo.radius) * (self.geo.k - 1) as u64
    }

    pub fn edge_count(&self) -> u64 {
        self.internal_edge_count() + self.boundary_edge_count()
    }

    pub fn universe(&self) -> Universe {
        Universe::Wired { k: self.geo.k, radius: self.geo.radius }
    }

    /// Endpoints `(lower id, upper id)` of an edge in the frozen numbering.
    pub fn edge_endpoints(&self, index: u64) -> (u64, u64) {
        let internal = self.internal_edge_count();
        if index < internal {
            let upper = index + 1;
            (self.geo.parent_id(upper).unwrap(), upper)
        } else {
            let b = index - internal;
            let rank = b / (self.geo.k - 1) as u64;
            (self.geo.vertex_id(self.geo.radius, rank), self.boundary_vertex())
        }
    }

    /// Index of the internal edge whose upper endpoint is `upper_id`.
    pub fn internal_edge_index(&self, upper_id: u64) -> u64 {
        debug_assert!(upper_id >= 1 && upper_id < self.vertex_count());
        upper_id - 1
    }

    /// Index of the `slot`-th boundary edge at the depth-`R` vertex `rank`.
    pub fn boundary_edge_index(&self, rank: u64, slot: u32) -> u64 {
        self.internal_edge_count() + rank * (self.geo.k - 1) as u64 + slot as u64
    }

    pub fn vertex_id(&self, v: &TreeAddress) -> Result<u64> {
        self.geo.id_of(v)
    }

    pub fn address_of(&self, id: u64) -> TreeAddress {
        self.geo.address_of(id)
    }

    pub fn parent_id(&self, id: u64) -> Option<u64> {
        self.geo.parent_id(id)
    }

    pub fn child_id(&self, id: u64, slot: u32) -> u64 {
        self.geo.child_id(id, slot)
    }

    pub fn depth_of(&self, id: u64) -> u32 {
        self.geo.depth_rank(id).0
    }

    /// Which child slot of its parent vertex `id` occupies.
    pub fn slot_in_parent(&self, id: u64) -> u32 {
        self.geo.slot_in_parent(id)
    }

    /// Index of the internal edge named by tree coordinates.
    pub fn edge_index(&self, e: &Edge) -> Result<u64> {
        let upper = self.geo.id_of(&e.upper())?;
        Ok(self.internal_edge_index(upper))
    }

    pub fn empty_config(&self) -> Result<EdgeConfig> {
        EdgeConfig::empty(self.universe(), self.edge_count())
    }
}

/// The truncated tree ball: internal edges only, no wiring. This is the edge
/// universe of the infinite-volume samplers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeBall {
    geo: BallGeometry,
}

impl TreeBall {
    pub fn new(k: u32, radius: u32) -> Result<Self> {
        Ok(TreeBall { geo: BallGeometry::new(k, radius)? })
    }

    pub fn k(&self) -> u32 {
        self.geo.k
    }

    pub fn radius(&self) -> u32 {
        self.geo.radius
    }

    pub fn vertex_count(&self) -> u64 {
        self.geo.vertex_count()
    }

    pub fn edge_count(&self) -> u64 {
        self.geo.vertex_count() - 1
    }

    pub fn universe(&self) -> Universe {
        Universe::Tree { k: self.geo.k, radius: self.geo.radius }
    }

    /// Edge `i` is the parent edge of vertex `i + 1`.
    pub fn edge_endpoints(&self, index: u64) -> (u64, u64) {
        let upper = index + 1;
        (self.geo.parent_id(upper).unwrap(), upper)
    }

    pub fn edge_index_of_upper(&self, upper_id: u64) -> u64 {
        upper_id - 1
    }

    pub fn vertex_id(&self, v: &TreeAddress) -> Result<u64> {
        self.geo.id_of(v)
    }

    pub fn address_of(&self, id: u64) -> TreeAddress {
        self.geo.address_of(id)
    }

    pub fn parent_id(&self, id: u64) -> Option<u64> {
        self.geo.parent_id(id)
    }

    pub fn child_id(&self, id: u64, slot: u32) -> u64 {
        self.geo.child_id(id, slot)
    }

    pub fn depth_of(&self, id: u64) -> u32 {
        self.geo.depth_rank(id).0
    }

    pub fn slot_in_parent(&self, id: u64) -> u32 {
        self.geo.slot_in_parent(id)
    }

    pub fn edge_index(&self, e: &Edge) -> Result<u64> {
        Ok(self.edge_index_of_upper(self.geo.id_of(&e.upper())?))
    }

    pub fn empty_config(&self) -> Result<EdgeConfig> {
        EdgeConfig::empty(self.universe(), self.edge_count())
    }
}

/// A subgraph as a subset of the universe's edges, in frozen edge order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeConfig {
    universe: Universe,
    n_edges: u64,
    bits: Vec<u64>,
}

impl EdgeConfig {
    pub fn empty(universe: Universe, n_edges: u64) -> Result<Self> {
        if n_edges > MAX_CONFIG_EDGES {
            return Err(Error::OracleScale(format!(
                "refusing to materialize a configuration over {n_edges} edges (cap {MAX_CONFIG_EDGES})"
            )));
        }
        let words = n_edges.div_ceil(64) as usize;
        Ok(EdgeConfig { universe, n_edges, bits: vec![0; words] })
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn edge_count(&self) -> u64 {
        self.n_edges
    }

    #[inline]
    pub fn contains(&self, index: u64) -> bool {
        debug_assert!(index < self.n_edges);
        self.bits[(index >> 6) as usize] >> (index & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, index: u64, open: bool) {
        debug_assert!(index < self.n_edges);
        let w = &mut self.bits[(index >> 6) as usize];
        if open {
            *w |= 1 << (index & 63);
        } else {
            *w &= !(1 << (index & 63));
        }
    }

    /// Number of open edges.
    pub fn open_count(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn open_indices(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.n_edges).filter(move |&i| self.contains(i))
    }

    /// True iff every open edge of `self` is open in `other`.
    pub fn is_subset_of(&self, other: &EdgeConfig) -> Result<bool> {
        if self.universe != other.universe {
            return Err(Error::UniverseMismatch);
        }
        Ok(self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0))
    }

    /// Lowercase hex of the bit set in frozen edge order, little-endian
    /// within bytes: edge `i` is bit `i % 8` of byte `i / 8`.
    pub fn to_hex(&self) -> String {
        let n_bytes = self.n_edges.div_ceil(8) as usize;
        let mut s = String::with_capacity(n_bytes * 2);
        for b in 0..n_bytes {
            let word = self.bits[b / 8];
            let byte = (word >> ((b % 8) * 8)) as u8;
            s.push_str(&format!("{byte:02x}"));
        }
        s
    }

    /// Parses the hex form; the string must cover exactly the universe's
    /// edge count with all padding bits zero.
    pub fn from_hex(universe: Universe, n_edges: u64, hex: &str) -> Result<Self> {
        let n_bytes = n_edges.div_ceil(8) as usize;
        if hex.len() != n_bytes * 2 {
            return Err(Error::InvalidParameter(format!(
                "config hex must be {} chars for {n_edges} edges, got {}",
                n_bytes * 2,
                hex.len()
            )));
        }
        let mut cfg = EdgeConfig::empty(universe, n_edges)?;
        for b in 0..n_bytes {
            let byte = u8::from_str_radix(&hex[2 * b..2 * b + 2], 16)
                .map_err(|_| Error::InvalidParameter("invalid hex digit in config".into()))?;
            cfg.bits[b / 8] |= (byte as u64) << ((b % 8) * 8);
        }
        let tail = n_edges % 8;
        if tail != 0 {
            let last = cfg.bits[(n_edges / 64) as usize] >> (n_edges / 8 % 8 * 8) & 0xff;
            if last >> tail != 0 {
                return Err(Error::InvalidParameter("padding bits must be zero".into()));
            }
        }
        Ok(cfg)
    }
}
