use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Phase of the wired arboreal gas at a given `(k, beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
    /// `beta = INFINITY`: the wired uniform spanning forest limit.
    Wusf,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Subcritical => write!(f, "SUBCRITICAL"),
            Regime::Critical => write!(f, "CRITICAL"),
            Regime::Supercritical => write!(f, "SUPERCRITICAL"),
            Regime::Wusf => write!(f, "WUSF"),
        }
    }
}

/// Model parameters for the arboreal gas on the k-regular tree, with every
/// derived constant fixed at construction.
///
/// * `p_beta = beta / (beta + 1)` is the percolation parameter whose
///   forest-conditioned law is the arboreal gas (`1` at `beta = INFINITY`).
/// * `p_c = 1/(k-1)` and `beta_c = 1/(k-2)` are the critical points of bond
///   percolation and of the wired arboreal gas; `p_c = p_{beta_c}`.
/// * `lambda` is the limiting probability that the lower endpoint of an edge
///   is disconnected from the wired boundary in the subtree hanging below it:
///   `1` for `beta <= beta_c`, `(k-1)/((k-2)(1+beta))` above. Both branches
///   agree at `beta_c`. At `beta = INFINITY` the stored value is the limit 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    k: u32,
    beta: f64,
    p_beta: f64,
    p_c: f64,
    beta_c: f64,
    lambda: f64,
    regime: Regime,
}

impl Params {
    /// Validates `k >= 3` and `beta > 0` (or `f64::INFINITY` for the WUSF).
    pub fn new(k: u32, beta: f64) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidParameter(format!("k must be >= 3, got {k}")));
        }
        if !(beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive or infinite, got {beta}"
            )));
        }
        let beta_c = 1.0 / (k - 2) as f64;
        let p_c = 1.0 / (k - 1) as f64;
        let (p_beta, lambda, regime) = if beta.is_infinite() {
            (1.0, 0.0, Regime::Wusf)
        } else {
            let p_beta = beta / (beta + 1.0);
            let lambda = if beta <= beta_c {
                1.0
            } else {
                (k - 1) as f64 / ((k - 2) as f64 * (1.0 + beta))
            };
            let regime = if beta < beta_c {
                Regime::Subcritical
            } else if beta == beta_c {
                Regime::Critical
            } else {
                Regime::Supercritical
            };
            (p_beta, lambda, regime)
        };
        Ok(Params { k, beta, p_beta, p_c, beta_c, lambda, regime })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_wusf(&self) -> bool {
        self.regime == Regime::Wusf
    }

    pub fn p_beta(&self) -> f64 {
        self.p_beta
    }

    pub fn p_c(&self) -> f64 {
        self.p_c
    }

    pub fn beta_c(&self) -> f64 {
        self.beta_c
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// True when the supercritical decomposition (critical percolation plus
    /// one-ended paths) applies, i.e. `beta >= beta_c` including WUSF.
    pub fn is_wired_supercritical(&self) -> bool {
        matches!(self.regime, Regime::Critical | Regime::Supercritical | Regime::Wusf)
    }

    /// Vertex inclusion probability at the root for the one-ended path layer:
    /// `(beta(k-2)k - k) / (beta(k-2)k - 1)`. Equals the survival probability
    /// of the root cluster. `0` at `beta_c`, `1` at `beta = INFINITY`.
    pub fn root_inclusion(&self) -> f64 {
        if self.is_wusf() {
            return 1.0;
        }
        let k = self.k as f64;
        let t = self.beta * (k - 2.0) * k;
        (t - k) / (t - 1.0)
    }

    /// Vertex inclusion probability away from the root:
    /// `(beta(k-2) - 1) / (beta(k-2))`. `0` at `beta_c`, `1` at INFINITY.
    pub fn vertex_inclusion(&self) -> f64 {
        if self.is_wusf() {
            return 1.0;
        }
        let t = self.beta * (self.k - 2) as f64;
        (t - 1.0) / t
    }
}
