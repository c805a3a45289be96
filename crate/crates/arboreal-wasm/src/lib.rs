//! wasm-bindgen surface for the browser demo. Each export returns a JSON
//! string; on bad input the string carries an `{"error": ...}` payload so
//! the page can show it inline. The crate also builds natively, which keeps
//! these functions under ordinary `cargo test`.

use arboreal::analysis::convergence_report;
use arboreal::{
    limit_cylinder_prob, theta, CylinderSpec, Edge, LimitSampler, Params, TreeAddress, WiredBall,
};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn parse_beta(s: &str) -> Result<f64, arboreal::Error> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|_| arboreal::Error::InvalidParameter(format!("bad beta `{other}`"))),
    }
}

fn err_json(e: impl std::fmt::Display) -> String {
    json!({ "error": e.to_string() }).to_string()
}

/// Derived constants for one parameter point.
#[wasm_bindgen]
pub fn params_json(k: u32, beta: &str) -> String {
    let run = || -> Result<String, arboreal::Error> {
        let p = Params::new(k, parse_beta(beta)?)?;
        Ok(json!({
            "k": p.k(),
            "p_beta": p.p_beta(),
            "p_c": p.p_c(),
            "beta_c": p.beta_c(),
            "lambda": p.lambda(),
            "regime": p.regime().to_string(),
            "theta": theta(&p).unwrap_or(0.0),
            "edge_marginal": edge_marginal(&p),
        })
        .to_string())
    };
    run().unwrap_or_else(err_json)
}

fn edge_marginal(p: &Params) -> f64 {
    if p.is_wusf() {
        return f64::NAN;
    }
    let spec = CylinderSpec::new(p.k(), vec![(Edge::new(TreeAddress::root(), 0), true)])
        .expect("root edge spec");
    limit_cylinder_prob(p, &spec).expect("finite beta")
}

/// Phase-diagram curves over a beta grid: survival probability θ, the fixed
/// point λ, the percolation parameter p_β and the single-edge marginal.
#[wasm_bindgen]
pub fn phase_curves_json(k: u32, beta_max: f64, points: u32) -> String {
    let run = || -> Result<String, arboreal::Error> {
        if !(beta_max > 0.0) || points < 2 {
            return Err(arboreal::Error::InvalidParameter("need beta_max > 0, points >= 2".into()));
        }
        let mut rows = Vec::with_capacity(points as usize);
        for i in 0..points {
            let beta = beta_max * (i + 1) as f64 / points as f64;
            let p = Params::new(k, beta)?;
            rows.push(json!({
                "beta": beta,
                "theta": theta(&p).unwrap_or(0.0),
                "lambda": p.lambda(),
                "p_beta": p.p_beta(),
                "edge_marginal": edge_marginal(&p),
            }));
        }
        let beta_c = Params::new(k, 1.0)?.beta_c();
        Ok(json!({ "beta_c": beta_c, "rows": rows }).to_string())
    };
    run().unwrap_or_else(err_json)
}

/// One sample of the wired limit on a small ball, with enough structure to
/// draw it: per-edge states split into the percolation layer and the added
/// path layer, plus the path-source vertices.
#[wasm_bindgen]
pub fn sample_forest_json(k: u32, beta: &str, radius: u32, seed: u64) -> String {
    let run = || -> Result<String, arboreal::Error> {
        if radius > 9 {
            return Err(arboreal::Error::InvalidParameter("radius capped at 9 for drawing".into()));
        }
        let params = Params::new(k, parse_beta(beta)?)?;
        let sampler = LimitSampler::new(params, radius, seed)?;
        let parts = sampler.parts(0)?;
        let ball = sampler.ball();
        let mut edges = Vec::new();
        for id in 1..ball.vertex_count() {
            let idx = ball.edge_index_of_upper(id);
            let state = if parts.omega0.contains(idx) {
                "percolation"
            } else if parts.omega.contains(idx) {
                "path"
            } else {
                "closed"
            };
            let parent = ball.parent_id(id).unwrap();
            edges.push(json!({
                "parent": parent,
                "child": id,
                "state": state,
            }));
        }
        let mut vertices = Vec::new();
        let mut level_counts = vec![0u64; radius as usize + 1];
        for id in 0..ball.vertex_count() {
            let d = ball.depth_of(id);
            vertices.push(json!({
                "id": id,
                "depth": d,
                "rank": id - first_at_depth(ball, d),
                "source": parts.u_set[id as usize],
            }));
            level_counts[d as usize] += 1;
        }
        Ok(json!({
            "k": k,
            "radius": radius,
            "level_counts": level_counts,
            "vertices": vertices,
            "edges": edges,
            "open_count": parts.omega.open_count(),
            "regime": params.regime().to_string(),
        })
        .to_string())
    };
    run().unwrap_or_else(err_json)
}

fn first_at_depth(ball: &arboreal::TreeBall, d: u32) -> u64 {
    // vertex ids are contiguous by depth; the first id at depth d is the id
    // of the address 0/0/.../0
    if d == 0 {
        return 0;
    }
    let addr = TreeAddress::from_path(&vec![0u8; d as usize], ball.k()).expect("zero path");
    ball.vertex_id(&addr).expect("inside ball")
}

/// Exact-vs-limit convergence rows for the root-edge cylinder.
#[wasm_bindgen]
pub fn convergence_json(k: u32, beta: &str, max_radius: u32) -> String {
    let run = || -> Result<String, arboreal::Error> {
        let b = parse_beta(beta)?;
        let params = Params::new(k, b)?;
        if params.is_wusf() {
            return Err(arboreal::Error::InvalidParameter(
                "convergence table needs finite beta".into(),
            ));
        }
        if !(2..=60).contains(&max_radius) {
            return Err(arboreal::Error::InvalidParameter("radius must be in 2..=60".into()));
        }
        let spec = CylinderSpec::new(k, vec![(Edge::new(TreeAddress::root(), 0), true)])?;
        let radii: Vec<u32> = (2..=max_radius).collect();
        let rows = convergence_report(&params, &spec, &radii)?;
        let out: Vec<_> = rows
            .iter()
            .map(|r| json!({ "r": r.radius, "exact": r.exact, "limit": r.limit, "gap": r.gap }))
            .collect();
        Ok(json!({ "rows": out }).to_string())
    };
    run().unwrap_or_else(err_json)
}

// sanity check that the wired ball stays drawable at the capped radius
#[allow(dead_code)]
fn drawable_edges(k: u32) -> u64 {
    WiredBall::new(k, 9).map(|b| b.internal_edge_count()).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_json_carries_the_constants() {
        let v: serde_json::Value = serde_json::from_str(&params_json(3, "2")).unwrap();
        assert_eq!(v["regime"], "SUPERCRITICAL");
        assert!((v["theta"].as_f64().unwrap() - 0.6).abs() < 1e-12);
        assert!((v["edge_marginal"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn bad_input_reports_error_payload() {
        let v: serde_json::Value = serde_json::from_str(&params_json(2, "1")).unwrap();
        assert!(v["error"].is_string());
        let v: serde_json::Value = serde_json::from_str(&sample_forest_json(3, "2", 30, 1)).unwrap();
        assert!(v["error"].is_string());
    }

    #[test]
    fn forest_sample_layers_are_consistent() {
        let v: serde_json::Value =
            serde_json::from_str(&sample_forest_json(3, "4", 5, 12345)).unwrap();
        let edges = v["edges"].as_array().unwrap();
        assert_eq!(edges.len() as u64, 3 * (2u64.pow(5) - 1));
        let open = edges.iter().filter(|e| e["state"] != "closed").count() as u64;
        assert_eq!(open, v["open_count"].as_u64().unwrap());
        // below the transition no edge may carry the path tag
        let v: serde_json::Value =
            serde_json::from_str(&sample_forest_json(3, "0.5", 5, 12345)).unwrap();
        assert!(v["edges"].as_array().unwrap().iter().all(|e| e["state"] != "path"));
    }

    #[test]
    fn phase_curves_cover_both_phases() {
        let v: serde_json::Value = serde_json::from_str(&phase_curves_json(3, 3.0, 30)).unwrap();
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 30);
        assert_eq!(v["beta_c"].as_f64().unwrap(), 1.0);
        // theta is 0 below the transition and increasing above
        assert_eq!(rows[0]["theta"].as_f64().unwrap(), 0.0);
        let last = rows.last().unwrap()["theta"].as_f64().unwrap();
        assert!(last > 0.5);
    }

    #[test]
    fn convergence_rows_approach_the_limit() {
        let v: serde_json::Value = serde_json::from_str(&convergence_json(3, "2", 12)).unwrap();
        let rows = v["rows"].as_array().unwrap();
        let first = rows[0]["gap"].as_f64().unwrap();
        let last = rows.last().unwrap()["gap"].as_f64().unwrap();
        assert!(last < first);
    }
}
