//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `--nocapture` to see them all). Tolerances are pinned here, in
//! code. Criteria 2, 3 and 8 encode thresholds that the exact mathematics of
//! the model places out of reach at the stated scales; those tests assert
//! the stated thresholds anyway and fail honestly, printing the exact
//! attainable values computed from independent oracles alongside.

use arboreal::analysis::{
    chi2_two_sample_pvalue, collect_cluster_stats, conditioned_tv_against_law,
    critical_cluster_law, critical_reach_prob,
};
use arboreal::{
    dp_partition, exact_cylinder_prob, limit_cylinder_prob, theta, ConditionalEdgeSampler,
    CoupledSampler, CylinderSpec, DpTable, Edge, ForestEnumeration, LimitSampler, Params,
    SmallGraph, TreeAddress, WiredBall,
};
use std::time::Instant;

fn report(criterion: u32, pass: bool, detail: &str) {
    println!(
        "criterion {criterion:2} [{}] {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn root_edge(i: u8) -> Edge {
    Edge::new(TreeAddress::root(), i)
}

fn single_edge_spec(open: bool) -> CylinderSpec {
    CylinderSpec::new(3, vec![(root_edge(0), open)]).unwrap()
}

/// Criterion 1 — oracle equivalence: the per-level recursion reproduces the
/// brute-force partition function on (k=3, R ∈ {1,2}) wired balls for
/// beta ∈ {0.3, 1, 2, 5}, relative error ≤ 1e-12, in under 10 s total.
#[test]
fn criterion_01_oracle_equivalence() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for r in [1u32, 2] {
        let ball = WiredBall::new(3, r).unwrap();
        let graph = SmallGraph::from_wired_ball(&ball).unwrap();
        for beta in [0.3, 1.0, 2.0, 5.0] {
            let z_enum = ForestEnumeration::new(&graph, beta).unwrap().z();
            let z_dp = dp_partition(&ball, beta).unwrap().z();
            worst = worst.max((z_dp - z_enum).abs() / z_enum);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-12 && elapsed < 10.0;
    report(1, pass, &format!("oracle equivalence: worst rel err {worst:.2e}, {elapsed:.2}s"));
    assert!(pass);
}

/// Criterion 2 — fixed-point convergence: for k=3 the root-edge
/// disconnection probability is strictly increasing in R; at beta=2 it must
/// be within 1e-9 of λ = 2/3 by R = 60, at beta=0.5 within 1e-9 of 1.
/// The exact gap at (beta=2, R=60) is 5.3e-9: the recursion contracts at
/// rate 3/4 per level near the fixed point, so 1e-9 is first reached at
/// R = 68. The beta=2 half therefore fails as specified.
#[test]
fn criterion_02_fixed_point_convergence() {
    let mut pass = true;
    let mut details = Vec::new();
    for (beta, target) in [(2.0, 2.0 / 3.0), (0.5, 1.0)] {
        let start = Instant::now();
        let mut prev = 0.0;
        let mut increasing = true;
        let mut q60 = 0.0;
        for r in 1..=60u32 {
            let q = DpTable::new(3, r, beta).unwrap().root_edge_q();
            if q <= prev {
                increasing = false;
            }
            prev = q;
            q60 = q;
        }
        let gap = (q60 - target).abs();
        let elapsed = start.elapsed().as_secs_f64();
        let ok = increasing && gap < 1e-9 && elapsed < 1.0;
        details.push(format!(
            "beta={beta}: increasing={increasing}, |q(60)-{target:.4}|={gap:.3e}, {elapsed:.3}s"
        ));
        pass &= ok;
    }
    report(2, pass, &format!("fixed-point convergence: {}", details.join("; ")));
    assert!(pass, "exact gap at beta=2 is 5.3e-9 > 1e-9; 1e-9 is reached at R=68, not R=60");
}

/// Criterion 3 — cylinder-formula convergence: |exact(R=20) − limit| < 1e-4
/// for the single-edge specs at k=3, beta ∈ {0.5, 1, 2}; the subcritical
/// limit equals p_beta exactly. The exact gaps at R=20 are 3.4e-9 (beta
/// 0.5), 2.0e-3 (beta 1, the critical point, where the recursion has no
/// geometric contraction and the gap decays like 1/R²) and 2.2e-4 (beta 2,
/// first below 1e-4 at R = 23). The beta ∈ {1, 2} halves therefore fail as
/// specified.
#[test]
fn criterion_03_cylinder_convergence() {
    let ball = WiredBall::new(3, 20).unwrap();
    let mut pass = true;
    let mut details = Vec::new();
    for beta in [0.5, 1.0, 2.0] {
        let params = Params::new(3, beta).unwrap();
        for open in [true, false] {
            let spec = single_edge_spec(open);
            let exact = exact_cylinder_prob(&ball, beta, &spec).unwrap();
            let limit = limit_cylinder_prob(&params, &spec).unwrap();
            let gap = (exact - limit).abs();
            if open {
                details.push(format!("beta={beta}: gap={gap:.3e}"));
            }
            pass &= gap < 1e-4;
        }
    }
    // subcritical limit is the percolation value, bit-exact
    let params = Params::new(3, 0.5).unwrap();
    let sub = limit_cylinder_prob(&params, &single_edge_spec(true)).unwrap();
    let sub_exact = sub == params.p_beta();
    pass &= sub_exact;
    report(
        3,
        pass,
        &format!(
            "cylinder convergence at R=20: {}; subcritical limit == p_beta: {sub_exact}",
            details.join(", ")
        ),
    );
    assert!(
        pass,
        "exact gaps at R=20 are 2.0e-3 (beta=1, critical, no contraction) and 2.2e-4 (beta=2)"
    );
}

/// Criterion 4 — normalization and consistency of the limit formula:
/// Σ_η P(B, η) = 1 for B the paths of length 1..5 and the root star, and
/// the one-edge marginalization identity holds, all to 1e-12.
#[test]
fn criterion_04_normalization_consistency() {
    let mut worst = 0.0f64;
    for beta in [0.5, 1.0, 2.0, 5.0] {
        let params = Params::new(3, beta).unwrap();
        // paths of length 1..=5
        for len in 1..=5u32 {
            let mut edges = Vec::new();
            let mut lower = TreeAddress::root();
            for _ in 0..len {
                let e = Edge::new(lower.clone(), 0);
                lower = e.upper();
                edges.push((e, false));
            }
            let base = CylinderSpec::new(3, edges).unwrap();
            let mut sum = 0.0;
            for mask in 0u64..1 << len {
                sum += limit_cylinder_prob(&params, &base.with_open_mask(mask)).unwrap();
            }
            worst = worst.max((sum - 1.0).abs());
        }
        // star at the root
        let star =
            CylinderSpec::new(3, (0..3).map(|i| (root_edge(i), false)).collect()).unwrap();
        let mut sum = 0.0;
        for mask in 0u64..8 {
            sum += limit_cylinder_prob(&params, &star.with_open_mask(mask)).unwrap();
        }
        worst = worst.max((sum - 1.0).abs());
        // marginalization: P(B, η) = P(B+f, η) + P(B+f, η+f)
        let spec = single_edge_spec(true);
        let whole = limit_cylinder_prob(&params, &spec).unwrap();
        for f in spec.boundary() {
            let closed = spec.extended(f.clone(), false).unwrap();
            let open = spec.extended(f, true).unwrap();
            let split = limit_cylinder_prob(&params, &closed).unwrap()
                + limit_cylinder_prob(&params, &open).unwrap();
            worst = worst.max((whole - split).abs());
        }
    }
    let pass = worst <= 1e-12;
    report(4, pass, &format!("normalization + consistency: worst deviation {worst:.2e}"));
    assert!(pass);
}

/// Criterion 5 — sampler marginal: k=3, beta=2, R=30, n=1e6. The empirical
/// P(e ∈ ω) for a root edge must be within 3σ of 3/5 (σ ≈ 4.9e-4), and all
/// 8 root-star configurations within 4σ of their limit values.
#[test]
fn criterion_05_sampler_marginal() {
    let start = Instant::now();
    let n = 1_000_000u64;
    let params = Params::new(3, 2.0).unwrap();
    let sampler = LimitSampler::new(params, 30, 0x5eed_0005).unwrap();
    let mut edge_hits = 0u64;
    let mut star_counts = [0u64; 8];
    for s in 0..n {
        let mask = sampler.probe(s).root_star_mask();
        if mask & 1 == 1 {
            edge_hits += 1;
        }
        star_counts[mask as usize] += 1;
    }
    let p_edge = edge_hits as f64 / n as f64;
    let sigma = (0.6f64 * 0.4 / n as f64).sqrt();
    let mut pass = (p_edge - 0.6).abs() <= 3.0 * sigma;
    let star = CylinderSpec::new(3, (0..3).map(|i| (root_edge(i), false)).collect()).unwrap();
    let mut worst_z = 0.0f64;
    for mask in 0u64..8 {
        let exact = limit_cylinder_prob(&params, &star.with_open_mask(mask)).unwrap();
        let freq = star_counts[mask as usize] as f64 / n as f64;
        let sd = (exact * (1.0 - exact) / n as f64).sqrt();
        let z = (freq - exact).abs() / sd;
        worst_z = worst_z.max(z);
        pass &= z <= 4.0;
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 60.0;
    report(
        5,
        pass,
        &format!(
            "sampler marginal: P(e∈ω)={p_edge:.5} (target 0.6 ± {:.1e}), worst star z={worst_z:.2}, {elapsed:.1}s",
            3.0 * sigma
        ),
    );
    assert!(pass);
}

/// Exact truncation bias of depth-R survival, from the independent branching
/// oracle: a sample survives iff the root carries a path source (prob θ) or
/// some root branch's critical-percolation cluster reaches depth R on its
/// own. Branch reach probability: c_R = p_c · s_{R-1} with s the survival
/// of the Binomial(k-1, p_c) branching process.
fn survival_truncation_bias(k: u32, theta_val: f64, r: u32) -> f64 {
    let c = (1.0 / (k - 1) as f64) * critical_reach_prob(k, r - 1);
    (1.0 - theta_val) * (1.0 - (1.0 - c).powi(k as i32))
}

/// Criterion 6 — θ reproduction: empirical root-to-depth-R survival at
/// k=3, beta=2, n=1e6, decreasing over R ∈ {10, 20, 30}, and within
/// 3σ plus the reported truncation bracket of θ = 3/5 at R = 30.
#[test]
fn criterion_06_theta_reproduction() {
    let n = 1_000_000u64;
    let params = Params::new(3, 2.0).unwrap();
    let theta_exact = theta(&params).unwrap();
    let mut freqs = Vec::new();
    for r in [10u32, 20, 30] {
        let sampler = LimitSampler::new(params, r, 0x5eed_0006).unwrap();
        let hits = (0..n).filter(|&s| sampler.probe(s).survives()).count();
        freqs.push(hits as f64 / n as f64);
    }
    let decreasing = freqs[0] > freqs[1] && freqs[1] > freqs[2];
    let sigma = (freqs[2] * (1.0 - freqs[2]) / n as f64).sqrt();
    let bracket = survival_truncation_bias(3, theta_exact, 30);
    let dev = (freqs[2] - theta_exact).abs();
    let pass = decreasing && dev <= 3.0 * sigma + bracket;
    report(
        6,
        pass,
        &format!(
            "theta: survival {:.4} > {:.4} > {:.4}, |emp - 3/5| = {dev:.4} <= 3σ + bracket {:.4}",
            freqs[0], freqs[1], freqs[2],
            3.0 * sigma + bracket
        ),
    );
    assert!(pass);
}

/// Criterion 7 — conditioned-finite cluster law: among n=1e6 samples at
/// k=3, beta=2, R=30 whose root cluster stays inside the ball, the size
/// histogram on 1..10 matches the critical-percolation cluster law
/// (renormalized on the truncated support) with TV < 0.01.
#[test]
fn criterion_07_conditioned_cluster_law() {
    let n = 1_000_000u64;
    let params = Params::new(3, 2.0).unwrap();
    let sampler = LimitSampler::new(params, 30, 0x5eed_0007).unwrap();
    let stats = collect_cluster_stats(&sampler, n);
    let law = critical_cluster_law(3, 10).unwrap();
    let tv = conditioned_tv_against_law(&stats, &law).unwrap();
    let pass = tv.tv_truncated < 0.01;
    report(
        7,
        pass,
        &format!(
            "conditioned cluster law: TV(1..10) = {:.5} over {} finite samples (tails: emp {:.3}, ref {:.3})",
            tv.tv_truncated, tv.n_conditioned, tv.empirical_tail, tv.reference_tail
        ),
    );
    assert!(pass);
}

/// Exact probability that two or more root branches reach depth R, from the
/// independent branching oracle: the path layer reaches through exactly one
/// branch when the root is a source (prob θ); every other reach must come
/// from a branch's own critical cluster, independently with probability c_R.
fn two_disjoint_oracle(k: u32, theta_val: f64, r: u32) -> f64 {
    let c = (1.0 / (k - 1) as f64) * critical_reach_prob(k, r - 1);
    let m = (k - 1) as i32;
    theta_val * (1.0 - (1.0 - c).powi(m))
        + (1.0 - theta_val)
            * (1.0 - (1.0 - c).powi(k as i32) - k as f64 * c * (1.0 - c).powi(m))
}

/// Criterion 8 — one-endedness proxy: the empirical probability of two
/// edge-disjoint root-to-depth-R open paths is decreasing in R and below
/// 1e-2 at R = 30, n = 1e6. The exact value at R = 30 is 0.0697 (the
/// critical dressing of the non-path branches reaches depth 30 with
/// probability ≈ 0.057 each; 1e-2 is first reached near R = 240), so the
/// threshold half fails as specified. The test also verifies the sampler
/// against the exact oracle, which passes.
#[test]
fn criterion_08_one_endedness_proxy() {
    let n = 1_000_000u64;
    let params = Params::new(3, 2.0).unwrap();
    let theta_exact = theta(&params).unwrap();
    let mut freqs = Vec::new();
    let mut oracle_ok = true;
    for r in [10u32, 20, 30] {
        let sampler = LimitSampler::new(params, r, 0x5eed_0008).unwrap();
        let hits = (0..n).filter(|&s| sampler.probe(s).reaching_branch_count() >= 2).count();
        let freq = hits as f64 / n as f64;
        let exact = two_disjoint_oracle(3, theta_exact, r);
        let sd = (exact * (1.0 - exact) / n as f64).sqrt();
        oracle_ok &= (freq - exact).abs() <= 4.0 * sd;
        freqs.push(freq);
    }
    let decreasing = freqs[0] > freqs[1] && freqs[1] > freqs[2];
    let pass = decreasing && freqs[2] < 1e-2;
    report(
        8,
        pass,
        &format!(
            "one-endedness proxy: {:.4} > {:.4} > {:.4} (decreasing: {decreasing}), P(R=30) = {:.4} vs stated 1e-2; sampler matches exact oracle {:.4}: {oracle_ok}",
            freqs[0], freqs[1], freqs[2], freqs[2],
            two_disjoint_oracle(3, theta_exact, 30)
        ),
    );
    assert!(oracle_ok, "sampler should match the independent oracle");
    assert!(
        pass,
        "the exact two-disjoint-path probability at R=30 is 0.0697; it first drops below 1e-2 near R=240"
    );
}

/// Criterion 9 — coupling monotonicity: the subset relation holds in all of
/// 1e5 coupled samples for betas (0.5, 2, ∞) and for the conditional-edge
/// coupling, and mixing the conditional layers with weights
/// (P(e∈ω), 1-P(e∈ω)) reproduces unconditional single-edge marginals
/// within 3σ at n = 1e6.
#[test]
fn criterion_09_coupling_monotonicity() {
    let n_cfg = 100_000u64;
    let coupled = CoupledSampler::new(3, &[0.5, 2.0, f64::INFINITY], 6, 0x5eed_0009).unwrap();
    let mut subset_ok = true;
    for s in 0..n_cfg {
        let v = coupled.sample(s).unwrap();
        subset_ok &= v[0].is_subset_of(&v[1]).unwrap() && v[1].is_subset_of(&v[2]).unwrap();
    }
    let params = Params::new(3, 2.0).unwrap();
    let cond = ConditionalEdgeSampler::new(params, 6, &root_edge(0), 0x5eed_0019).unwrap();
    let mut cond_subset_ok = true;
    for s in 0..n_cfg {
        let (open, closed) = cond.sample_pair(s).unwrap();
        cond_subset_ok &= open.is_subset_of(&closed).unwrap();
    }
    // mixture reproduces the unconditional marginal of another root edge
    let n = 1_000_000u64;
    let cond30 = ConditionalEdgeSampler::new(params, 30, &root_edge(0), 0x5eed_0029).unwrap();
    let mut f_open = 0u64;
    let mut f_closed = 0u64;
    for s in 0..n {
        let (mo, mc) = cond30.root_star_pair(s);
        if mo >> 1 & 1 == 1 {
            f_open += 1;
        }
        if mc >> 1 & 1 == 1 {
            f_closed += 1;
        }
    }
    let spec_e = CylinderSpec::new(3, vec![(root_edge(0), true)]).unwrap();
    let w = limit_cylinder_prob(&params, &spec_e).unwrap(); // P(e ∈ ω) = 3/5
    let p1 = f_open as f64 / n as f64;
    let p2 = f_closed as f64 / n as f64;
    let mix = w * p1 + (1.0 - w) * p2;
    let var = w * w * p1 * (1.0 - p1) / n as f64 + (1.0 - w) * (1.0 - w) * p2 * (1.0 - p2) / n as f64;
    let target = 0.6; // unconditional single-edge marginal
    let z = (mix - target).abs() / var.sqrt();
    let mix_ok = z <= 3.0;
    let pass = subset_ok && cond_subset_ok && mix_ok;
    report(
        9,
        pass,
        &format!(
            "coupling: beta-chain subsets {n_cfg}/{n_cfg}: {subset_ok}; conditional subsets: {cond_subset_ok}; mixture {mix:.5} vs 0.6 (z = {z:.2})"
        ),
    );
    assert!(pass);
}

/// Criterion 10 — restriction exactness: the sampled law on the depth-2
/// ball is the same at R = 10 and R = 40 (chi-squared p > 1e-4 at n = 1e6
/// each over the 512 configurations of its 9 edges).
#[test]
fn criterion_10_restriction_exactness() {
    let n = 1_000_000u64;
    let params = Params::new(3, 2.0).unwrap();
    let s10 = LimitSampler::new(params, 10, 0x5eed_0010).unwrap();
    let s40 = LimitSampler::new(params, 40, 0x5eed_0040).unwrap();
    let mut c10 = vec![0u64; 512];
    let mut c40 = vec![0u64; 512];
    for s in 0..n {
        c10[s10.probe(s).restriction_mask(2).unwrap() as usize] += 1;
        c40[s40.probe(s).restriction_mask(2).unwrap() as usize] += 1;
    }
    let p = chi2_two_sample_pvalue(&c10, &c40).unwrap();
    let pass = p > 1e-4;
    report(10, pass, &format!("restriction exactness: chi² p-value {p:.4} between R=10 and R=40"));
    assert!(pass);
}
