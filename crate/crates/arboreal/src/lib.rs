//! Exact computation and perfect sampling of the arboreal gas — bond
//! percolation conditioned to be a forest — on k-regular trees with wired
//! boundary conditions.
//!
//! The crate has three layers of machinery that check each other:
//!
//! * ground truth on finite wired balls: brute-force enumeration
//!   ([`enumerate`]), a per-level partition-function recursion and exact
//!   cylinder probabilities ([`dp`]), and a top-down perfect sampler;
//! * closed forms for the infinite-volume wired limit ([`limit`]): the
//!   fixed point `λ`, the cylinder-probability formula, survival and
//!   finiteness probabilities;
//! * samplers of the limit measure restricted to a ball ([`sampler`]):
//!   below the transition plain percolation, above it critical percolation
//!   dressed with one-ended paths, plus monotone couplings across
//!   parameters and conditioned on one edge.
//!
//! [`analysis`] adds estimators, reference laws and statistical reports.

#![forbid(unsafe_code)]

pub mod analysis;
pub mod ball;
pub mod cylinder;
pub mod dp;
pub mod enumerate;
pub mod error;
pub mod forest;
pub mod limit;
pub mod params;
pub mod rng;
pub mod sampler;
pub mod tree;

pub use ball::{EdgeConfig, TreeBall, Universe, WiredBall};
pub use cylinder::CylinderSpec;
pub use dp::{dp_exact_sample, dp_partition, exact_cylinder_prob, iterate_f, recursion_map, DpTable};
pub use enumerate::{ForestEnumeration, SmallGraph, ENUMERATION_EDGE_CAP};
pub use error::{Error, Result};
pub use forest::{is_forest, DisjointSet};
pub use limit::{
    boundary_classes, conditional_no_survival, edge_conditional_survival, limit_cylinder_prob,
    q_factor, restricted_finiteness_prob, theta, EdgeConditionalSurvival,
};
pub use params::{Params, Regime};
pub use sampler::{
    sample_conditional_edge, sample_coupled_betas, sample_percolation, sample_wired_limit,
    ConditionalEdgeSampler, CoupledSampler, LimitSampleParts, LimitSampler,
};
pub use tree::{boundary_edge_sets, edges_at, Edge, TreeAddress};
