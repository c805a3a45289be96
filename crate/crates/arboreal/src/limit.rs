//! Closed forms for the infinite-volume wired limit.
//!
//! The limit of the finite-ball cylinder probabilities exists and factors
//! through the class sizes of the pinned set's boundary:
//!
//! ```text
//! P(ω ∩ B = η) = Π_i Q_{|A_i|} / (Q_k · Q_{k-1}^{|B|}) · p^{|η|} (1-p)^{|B\η|}
//! ```
//!
//! with `Q_m = λ^m + m (1-λ) λ^{m-1}` and `p = p_beta`. At and below the
//! transition `λ = 1`, every `Q` collapses to 1 and the measure is exactly
//! bond percolation at `p_beta`.

use crate::cylinder::CylinderSpec;
use crate::error::{Error, Result};
use crate::params::Params;

/// Boundary-class factor `Q_m = λ^m + m (1-λ) λ^{m-1}`; `Q_0 = 1` and
/// `Q_m = 1` for every `m` when `λ = 1`.
pub fn q_factor(m: u32, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidParameter(format!("lambda must lie in (0, 1], got {lambda}")));
    }
    if m == 0 {
        return Ok(1.0);
    }
    Ok(lambda.powi(m as i32) + m as f64 * (1.0 - lambda) * lambda.powi(m as i32 - 1))
}

fn require_finite_beta(params: &Params, what: &str) -> Result<()> {
    if params.is_wusf() {
        return Err(Error::InvalidParameter(format!(
            "{what} is not defined at beta = INFINITY; only the sampler handles the spanning-forest limit"
        )));
    }
    Ok(())
}

fn require_wired_supercritical(params: &Params) -> Result<()> {
    if !params.is_wired_supercritical() {
        return Err(Error::SubcriticalRegime {
            beta: params.beta(),
            beta_c: params.beta_c(),
            note: "below the transition the wired limit is bond percolation and the value is exactly 0",
        });
    }
    Ok(())
}

/// Multiset of boundary equivalence-class sizes for a valid spec.
pub fn boundary_classes(spec: &CylinderSpec) -> Vec<usize> {
    spec.boundary_classes()
}

/// Infinite-volume probability of the cylinder event `{ω ∩ B = η}`.
///
/// For `beta <= beta_c` this is exactly the percolation product
/// `p^{|η|} (1-p)^{|B\η|}`.
pub fn limit_cylinder_prob(params: &Params, spec: &CylinderSpec) -> Result<f64> {
    require_finite_beta(params, "the cylinder formula")?;
    if spec.k() != params.k() {
        return Err(Error::InvalidSpec(format!(
            "spec is for k = {}, params have k = {}",
            spec.k(),
            params.k()
        )));
    }
    if spec.is_empty() {
        return Ok(1.0);
    }
    let p = params.p_beta();
    let perc = p.powi(spec.open_count() as i32) * (1.0 - p).powi(spec.closed_count() as i32);
    let lambda = params.lambda();
    if lambda == 1.0 {
        return Ok(perc);
    }
    let mut class_product = 1.0;
    for size in spec.boundary_classes() {
        class_product *= q_factor(size as u32, lambda)?;
    }
    let q_k = q_factor(params.k(), lambda)?;
    let q_km1 = q_factor(params.k() - 1, lambda)?;
    Ok(class_product / (q_k * q_km1.powi(spec.len() as i32)) * perc)
}

/// Survival probability `θ = P(o ↔ ∞) = (β(k-2)k - k) / (β(k-2)k - 1)`.
///
/// Requires `beta >= beta_c` (strictly below, survival is 0 and the measure
/// is percolation; the error carries that note). Returns 0 at `beta_c` and
/// 1 at `beta = INFINITY` by continuity.
pub fn theta(params: &Params) -> Result<f64> {
    require_wired_supercritical(params)?;
    Ok(params.root_inclusion())
}

/// Probability that the cluster of the root stays finite inside the union of
/// branches `E_2` when the root's edges are split into `|E_1| + |E_2| = k`:
/// `(β(k-2)|E_1| + |E_2| - 1) / (β(k-2)k - 1)`.
///
/// With `size_e1 = 0` this equals `1 - θ`.
pub fn restricted_finiteness_prob(params: &Params, size_e1: u32, size_e2: u32) -> Result<f64> {
    require_finite_beta(params, "the restricted finiteness formula")?;
    require_wired_supercritical(params)?;
    if size_e1 + size_e2 != params.k() || size_e2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "need |E1| + |E2| = k with |E2| >= 1, got {size_e1} + {size_e2} != {}",
            params.k()
        )));
    }
    let t = params.beta() * (params.k() - 2) as f64;
    Ok((t * size_e1 as f64 + size_e2 as f64 - 1.0) / (t * params.k() as f64 - 1.0))
}

/// Probability that the root survives given that one fixed branch dies:
/// `P(o ↔ ∞ | o not ↔ ∞ through T(e)) = (β(k-2) - 1) / (β(k-2))`.
///
/// This equals the non-root vertex inclusion probability of the sampling
/// procedure. 1 at `beta = INFINITY` by continuity.
pub fn conditional_no_survival(params: &Params) -> Result<f64> {
    require_wired_supercritical(params)?;
    Ok(params.vertex_inclusion())
}

/// Survival probabilities of the root's side in the conditional-edge
/// coupling, for a root edge `e = {o, u}`:
///
/// * `open`: `P(o ↔ ∞ avoiding T(e) | e ∈ ω) = 1 - Q_{k-1} λ^{k-1} / Q_{2k-2}`
/// * `closed`: `P(o ↔ ∞ avoiding T(e) | e ∉ ω) = 1 - λ^{k-1} / Q_{k-1}`
///
/// Both sides are symmetric in `o` and `u`. The two values satisfy
/// `closed = open / (1 - open)` exactly, which is what makes the monotone
/// source coupling possible. Derived by evaluating the cylinder formula on
/// the root star and summing out the finite side; cross-validated against
/// Monte Carlo in the test suite. At `beta = INFINITY` the limits are
/// `(1/2, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct EdgeConditionalSurvival {
    pub open: f64,
    pub closed: f64,
}

pub fn edge_conditional_survival(params: &Params) -> Result<EdgeConditionalSurvival> {
    require_wired_supercritical(params)?;
    if params.is_wusf() {
        return Ok(EdgeConditionalSurvival { open: 0.5, closed: 1.0 });
    }
    let lambda = params.lambda();
    let k = params.k();
    let lam_pow = lambda.powi(k as i32 - 1);
    let q_km1 = q_factor(k - 1, lambda)?;
    let q_2km2 = q_factor(2 * k - 2, lambda)?;
    Ok(EdgeConditionalSurvival {
        open: 1.0 - q_km1 * lam_pow / q_2km2,
        closed: 1.0 - lam_pow / q_km1,
    })
}
