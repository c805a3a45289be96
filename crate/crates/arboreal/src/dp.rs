//! Exact finite-volume computations on wired balls.
//!
//! Every vertex at a given depth of the ball sees an identical subtree, so
//! the bottom-up weights collapse to one pair per level. For a vertex `u`
//! with children `u_1..u_m` (boundary edges act as child slots with
//! `A = 0, B = 1`):
//!
//! ```text
//! A_u = Π_i [(A_i + B_i) + β A_i]                      u not wired to ∂
//! B_u = Σ_i β B_i Π_{j≠i} [(A_j + B_j) + β A_j]        u wired through one branch
//! ```
//!
//! `A_u` (resp. `B_u`) is the total β-weight of forest configurations of the
//! edges strictly below `u` in which `u` is not (resp. is) connected to the
//! boundary vertex. A configuration is a forest exactly when no vertex has
//! two child branches reaching the boundary, which is what the single-`B`
//! sum enforces. Weights are tracked through the normalized disconnection
//! probability `y = A / (A + B)` plus `ln(A + B)`, one exact renormalization
//! per level, so nothing overflows even at depth thousands.

use crate::ball::{EdgeConfig, WiredBall};
use crate::cylinder::CylinderSpec;
use crate::error::{Error, Result};
use crate::rng::{keyed_unit, Stream};
use std::collections::HashMap;

/// Per-level weights of the bottom-up recursion.
#[derive(Debug, Clone, Copy)]
pub struct LevelWeights {
    /// Probability that a depth-`d` vertex is disconnected from the boundary
    /// within its own subtree: `y = A / (A + B)`.
    pub y: f64,
    /// `ln(A + B)`, the log total weight of the subtree below one vertex.
    pub ln_s: f64,
    /// Disconnection probability of the edge whose upper endpoint sits at
    /// this depth: `q = (1 + β y) / (1 + β)`.
    pub q: f64,
}

/// Bottom-up partition-function table for a wired ball.
#[derive(Debug, Clone)]
pub struct DpTable {
    k: u32,
    radius: u32,
    beta: f64,
    /// `levels[d - 1]` holds the weights for depth `d`, `d = 1..=radius`.
    levels: Vec<LevelWeights>,
    root_y: f64,
    ln_z: f64,
}

impl DpTable {
    /// Runs the level recursion; `O(radius)` time and space, no ball
    /// materialization.
    pub fn new(k: u32, radius: u32, beta: f64) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidParameter(format!("k must be >= 3, got {k}")));
        }
        if radius < 1 {
            return Err(Error::InvalidParameter("radius must be >= 1".into()));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "the partition recursion needs finite beta > 0, got {beta}"
            )));
        }
        let m = (k - 1) as f64;
        let mut levels = vec![
            LevelWeights { y: 0.0, ln_s: 0.0, q: 0.0 };
            radius as usize
        ];
        // depth R: k-1 boundary slots below, each closed-or-wired
        let y_base = 1.0 / (1.0 + m * beta);
        levels[radius as usize - 1] =
            LevelWeights { y: y_base, ln_s: -y_base.ln(), q: (1.0 + beta * y_base) / (1.0 + beta) };
        for d in (1..radius).rev() {
            let below = levels[d as usize];
            let y = 1.0 / (1.0 + m * beta * (1.0 - below.y) / (1.0 + beta * below.y));
            let ln_s = m * (below.ln_s + (1.0 + beta * below.y).ln()) - y.ln();
            let q = (1.0 + beta * y) / (1.0 + beta);
            if !y.is_finite() || !ln_s.is_finite() {
                return Err(Error::NonFinite("partition recursion"));
            }
            levels[d as usize - 1] = LevelWeights { y, ln_s, q };
        }
        let top = levels[0];
        let root_y = 1.0 / (1.0 + k as f64 * beta * (1.0 - top.y) / (1.0 + beta * top.y));
        let ln_z = k as f64 * (top.ln_s + (1.0 + beta * top.y).ln()) - root_y.ln();
        if !ln_z.is_finite() {
            return Err(Error::NonFinite("partition function"));
        }
        Ok(DpTable { k, radius, beta, levels, root_y, ln_z })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Weights for depth `d`, `1 <= d <= radius`.
    pub fn level(&self, depth: u32) -> LevelWeights {
        self.levels[depth as usize - 1]
    }

    /// Disconnection probability of the edge `e` with upper endpoint at
    /// `depth`, i.e. the probability under the arboreal gas on the subgraph
    /// hanging below `e` (edge included) that its lower endpoint stays
    /// disconnected from the boundary.
    pub fn q_at_depth(&self, depth: u32) -> f64 {
        self.level(depth).q
    }

    /// `q` of a root-adjacent edge; equals the `radius`-fold iterate of the
    /// recursion map started from `1 - p_beta`.
    pub fn root_edge_q(&self) -> f64 {
        self.q_at_depth(1)
    }

    /// Probability that the root is disconnected from the boundary.
    pub fn root_disconnection(&self) -> f64 {
        self.root_y
    }

    /// `ln A`, `ln B` for one vertex at `depth`.
    pub fn ln_a(&self, depth: u32) -> f64 {
        let l = self.level(depth);
        l.y.ln() + l.ln_s
    }

    pub fn ln_b(&self, depth: u32) -> f64 {
        let l = self.level(depth);
        (1.0 - l.y).ln() + l.ln_s
    }

    /// Log partition function of the wired ball.
    pub fn ln_z(&self) -> f64 {
        self.ln_z
    }

    /// Partition function; overflows to `+inf` for large balls (use
    /// [`DpTable::ln_z`] there).
    pub fn z(&self) -> f64 {
        self.ln_z.exp()
    }
}

/// The level table for a materialized ball.
pub fn dp_partition(ball: &WiredBall, beta: f64) -> Result<DpTable> {
    DpTable::new(ball.k(), ball.radius(), beta)
}

/// One step of the disconnection recursion:
/// `F(q) = (1 - p) + p / (1 - (k-1) + (k-1)/q)` with `p = β/(β+1)`.
pub fn recursion_map(k: u32, beta: f64, q: f64) -> f64 {
    let p = beta / (beta + 1.0);
    let m = (k - 1) as f64;
    (1.0 - p) + p / (1.0 - m + m / q)
}

/// The orbit `q0, F(q0), ..., F^steps(q0)`. Started from `q0 = 1 - p_beta`
/// the sequence increases strictly and converges to the fixed point `λ`.
pub fn iterate_f(k: u32, beta: f64, q0: f64, steps: u32) -> Result<Vec<f64>> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!("k must be >= 3, got {k}")));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be finite positive, got {beta}")));
    }
    if !(q0 > 0.0 && q0 <= 1.0) {
        return Err(Error::InvalidParameter(format!("q0 must lie in (0, 1], got {q0}")));
    }
    let mut out = Vec::with_capacity(steps as usize + 1);
    out.push(q0);
    let mut q = q0;
    for _ in 0..steps {
        q = recursion_map(k, beta, q);
        out.push(q);
    }
    Ok(out)
}

/// Exact probability under the finite-volume arboreal gas on `ball` that
/// `ω ∩ B = η` for the pinned set described by `spec`.
///
/// Pinning conditions the product measure edge by edge: an open pinned edge
/// keeps only its open branch states (the forced `β` factor and the fused
/// connectivity), a closed pinned edge keeps only the closed state. The
/// result is the ratio of the pinned to the unpinned partition function.
///
/// The ratio is accumulated directly in normalized per-vertex fractions
/// `(a_u, b_u) = (A_u, B_u) / S_u` against the homogeneous subtree weight
/// `S_u`, so the enormous shared factors cancel exactly instead of meeting
/// in a log-space subtraction; precision stays near machine level at any
/// radius. Unpinned slots contribute a factor of exactly 1 and are skipped.
pub fn exact_cylinder_prob(ball: &WiredBall, beta: f64, spec: &CylinderSpec) -> Result<f64> {
    if spec.k() != ball.k() {
        return Err(Error::InvalidSpec(format!(
            "spec is for k = {}, ball has k = {}",
            spec.k(),
            ball.k()
        )));
    }
    if spec.is_empty() {
        return Ok(1.0);
    }
    if spec.max_depth() >= ball.radius() {
        return Err(Error::InvalidSpec(format!(
            "pinned edges must stay strictly inside the ball: depth {} >= radius {}",
            spec.max_depth(),
            ball.radius()
        )));
    }
    let table = DpTable::new(ball.k(), ball.radius(), beta)?;
    let k = ball.k();

    // group pinned edges by lower endpoint
    let mut pinned: HashMap<crate::tree::TreeAddress, Vec<(u8, bool)>> = HashMap::new();
    for (i, e) in spec.edges().iter().enumerate() {
        pinned.entry(e.lower().clone()).or_default().push((e.child_index(), spec.is_open(i)));
    }
    let mut lowers: Vec<crate::tree::TreeAddress> = pinned.keys().cloned().collect();
    lowers.sort_by_key(|v| std::cmp::Reverse(v.depth()));

    // normalized (a, b) = (A, B)/S per affected vertex, bottom-up
    let mut computed: HashMap<crate::tree::TreeAddress, (f64, f64)> = HashMap::new();
    for u in lowers {
        let d = u.depth() as u32;
        let states = &pinned[&u];
        let below = table.level(d + 1);
        // homogeneous slot total (A+B) + βA over S_{d+1}
        let hom_t = 1.0 + beta * below.y;
        let (y_u, slots) = if d == 0 {
            (table.root_disconnection(), k)
        } else {
            (table.level(d).y, k - 1)
        };
        let mut a = y_u; // Π over unaffected slots contributes 1
        let mut b_ratio = slots as f64 * beta * (1.0 - below.y) / hom_t;
        for slot in 0..slots as u8 {
            let child = u.child(slot);
            let (ac, bc) = match computed.get(&child) {
                Some(&v) => v,
                None => (below.y, 1.0 - below.y),
            };
            let state = states.iter().find(|(s, _)| *s == slot).map(|(_, open)| *open);
            if state.is_none() && !computed.contains_key(&child) {
                continue; // homogeneous free slot: factor 1, ratio already counted
            }
            // replace this slot's homogeneous contribution
            let (w_c, w_oa, w_ob) = match state {
                Some(true) => (0.0, beta * ac, beta * bc),
                Some(false) => (ac + bc, 0.0, 0.0),
                None => (ac + bc, beta * ac, beta * bc),
            };
            let t = w_c + w_oa;
            a *= t / hom_t;
            b_ratio += w_ob / t - beta * (1.0 - below.y) / hom_t;
        }
        if !a.is_finite() {
            return Err(Error::NonFinite("pinned recursion"));
        }
        computed.insert(u, (a, a * b_ratio));
    }
    let root = crate::tree::TreeAddress::root();
    let (a, b) = computed.get(&root).copied().expect("valid spec pins an edge at the root");
    Ok(a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Unconstrained subtree measure (closed parent edge).
    Free,
    /// Conditioned on staying disconnected from the boundary.
    Disconnected,
    /// Conditioned on exactly one branch wiring to the boundary.
    Connected,
}

/// Draws one exact sample from the finite-volume arboreal gas on the ball by
/// top-down conditional sampling against the level weights.
///
/// Descending from the root, each vertex first decides which (at most one)
/// open child branch connects it to the boundary — one uniform against the
/// cumulative branch weights in frozen edge order — then the remaining child
/// edges open independently with their conditioned-disconnected odds.
pub fn dp_exact_sample(ball: &WiredBall, beta: f64, seed: u64) -> Result<EdgeConfig> {
    let table = dp_partition(ball, beta)?;
    let mut config = ball.empty_config()?;
    let k = ball.k();
    let r = ball.radius();
    let mut stack: Vec<(u64, Mode)> = vec![(0, Mode::Free)];
    while let Some((v, mode)) = stack.pop() {
        let d = ball.depth_of(v);
        let slots: u32 = if d == 0 { k } else { k - 1 };
        let at_leaf_level = d == r;
        // per-slot wired-pick weight w = β(1-y_c)/(1+β y_c); boundary slots
        // have y_c = 0
        let (w_slot, p_open_given_not_wired) = if at_leaf_level {
            (beta, 0.0)
        } else {
            let y_c = table.level(d + 1).y;
            (beta * (1.0 - y_c) / (1.0 + beta * y_c), beta * y_c / (1.0 + beta * y_c))
        };
        let total = w_slot * slots as f64;
        let y_u = 1.0 / (1.0 + total);
        // which slot (if any) wires v to the boundary
        let wired_slot: Option<u32> = match mode {
            Mode::Disconnected => None,
            Mode::Free | Mode::Connected => {
                let x = keyed_unit(seed, Stream::DpPick, 0, v);
                let target = match mode {
                    Mode::Free => {
                        if x < y_u {
                            None
                        } else {
                            Some((x - y_u) / y_u)
                        }
                    }
                    Mode::Connected => Some(x * total),
                    Mode::Disconnected => unreachable!(),
                };
                // equal weights per slot: direct index
                target.map(|t| ((t / w_slot) as u32).min(slots - 1))
            }
        };
        for slot in 0..slots {
            if at_leaf_level {
                let rank = v - (ball.vertex_count() - ball.boundary_edge_count() / (k - 1) as u64);
                let idx = ball.boundary_edge_index(rank, slot);
                if wired_slot == Some(slot) {
                    config.set(idx, true);
                }
                // non-wired boundary slots stay closed: an open one would wire v
            } else {
                let child = ball.child_id(v, slot);
                let idx = ball.internal_edge_index(child);
                if wired_slot == Some(slot) {
                    config.set(idx, true);
                    stack.push((child, Mode::Connected));
                } else {
                    let open =
                        keyed_unit(seed, Stream::DpEdge, 0, idx) < p_open_given_not_wired;
                    if open {
                        config.set(idx, true);
                        stack.push((child, Mode::Disconnected));
                    } else {
                        stack.push((child, Mode::Free));
                    }
                }
            }
        }
    }
    Ok(config)
}
