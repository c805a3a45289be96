//! Estimators, reference laws and statistical reports.

use crate::cylinder::CylinderSpec;
use crate::dp::exact_cylinder_prob;
use crate::error::{Error, Result};
use crate::limit::{limit_cylinder_prob, restricted_finiteness_prob};
use crate::params::Params;
use crate::sampler::LimitSampler;
use crate::ball::WiredBall;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::BTreeMap;

/// A Monte Carlo indicator estimate with exact binomial error bars.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub value: f64,
    /// `sqrt(value (1 - value) / n)`.
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
    /// `value ± 1.96 stderr`.
    pub ci95: (f64, f64),
    successes: u64,
}

impl Estimate {
    fn from_counts(successes: u64, n: u64, seed: u64) -> Estimate {
        let value = successes as f64 / n as f64;
        let stderr = (value * (1.0 - value) / n as f64).sqrt();
        Estimate {
            value,
            stderr,
            n,
            seed,
            ci95: (value - 1.96 * stderr, value + 1.96 * stderr),
            successes,
        }
    }

    pub fn successes(&self) -> u64 {
        self.successes
    }

    /// Pooled estimate of two disjoint batches; associative and
    /// order-independent, so any work partition merges to the same result.
    pub fn merge(&self, other: &Estimate) -> Estimate {
        Estimate::from_counts(self.successes + other.successes, self.n + other.n, self.seed)
    }
}

/// Monte Carlo mean of an indicator over sample indices `0..n`. The
/// predicate is expected to be a pure function of the sample index (all
/// samplers here are), which makes the estimate deterministic given `seed`.
pub fn mc_estimate(pred: impl FnMut(u64) -> bool, n: u64, seed: u64) -> Result<Estimate> {
    mc_estimate_range(pred, 0, n, seed)
}

/// Same over the index range `start..end`, for batch fan-out.
pub fn mc_estimate_range(
    mut pred: impl FnMut(u64) -> bool,
    start: u64,
    end: u64,
    seed: u64,
) -> Result<Estimate> {
    if end <= start {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let mut successes = 0u64;
    for s in start..end {
        if pred(s) {
            successes += 1;
        }
    }
    Ok(Estimate::from_counts(successes, end - start, seed))
}

/// Exact cluster-size law of critical bond percolation on the tree,
/// truncated with explicit tail mass.
#[derive(Debug, Clone)]
pub struct ClusterLaw {
    /// `masses[m]` = P(|K_o| = m) for `m = 1..=max_size`; index 0 unused.
    pub masses: Vec<f64>,
    /// Mass beyond `max_size` (strictly positive at criticality: the cluster
    /// is almost surely finite but heavy-tailed).
    pub tail: f64,
    pub max_size: u32,
}

fn binom_pmf(n: u32, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n as usize + 1];
    for (j, slot) in pmf.iter_mut().enumerate() {
        let mut c = 1.0;
        for i in 0..j {
            c = c * (n - i as u32) as f64 / (i + 1) as f64;
        }
        *slot = c * p.powi(j as i32) * (1.0 - p).powi((n as usize - j) as i32);
    }
    pmf
}

fn convolve(a: &[f64], b: &[f64], cap: usize) -> Vec<f64> {
    let mut out = vec![0.0; cap + 1];
    for (i, &x) in a.iter().enumerate().take(cap + 1) {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(cap + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `P_{p_c}(|K_o| = m)` for `m = 1..=max_size`, from the independent
/// branching recursion: away from the root the subtree cluster size of a
/// vertex satisfies `S = 1 + Σ_{j<=J} S_j` with offspring
/// `J ~ Binomial(k-1, p_c)`; the root has offspring `Binomial(root_degree,
/// p_c)`. Masses up to `max_size` are exact after `max_size` sweeps because
/// a size-`m` cluster has depth below `m`.
pub fn critical_cluster_law_rooted(k: u32, root_degree: u32, max_size: u32) -> Result<ClusterLaw> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!("k must be >= 3, got {k}")));
    }
    if max_size < 1 {
        return Err(Error::InvalidParameter("max_size must be >= 1".into()));
    }
    if root_degree < 1 || root_degree > k {
        return Err(Error::InvalidParameter(format!("root degree {root_degree} out of range")));
    }
    let p_c = 1.0 / (k - 1) as f64;
    let cap = max_size as usize;
    let offspring = binom_pmf(k - 1, p_c);
    let mut nu = vec![0.0; cap + 1];
    for _ in 0..max_size {
        let mut powers: Vec<Vec<f64>> = vec![{
            let mut d = vec![0.0; cap + 1];
            d[0] = 1.0;
            d
        }];
        for j in 1..k as usize {
            let next = convolve(&powers[j - 1], &nu, cap);
            powers.push(next);
        }
        let mut new = vec![0.0; cap + 1];
        for (j, &pj) in offspring.iter().enumerate() {
            for s in 0..cap {
                new[s + 1] += pj * powers[j][s];
            }
        }
        nu = new;
    }
    let root_offspring = binom_pmf(root_degree, p_c);
    let mut powers: Vec<Vec<f64>> = vec![{
        let mut d = vec![0.0; cap + 1];
        d[0] = 1.0;
        d
    }];
    for j in 1..=root_degree as usize {
        let next = convolve(&powers[j - 1], &nu, cap);
        powers.push(next);
    }
    let mut masses = vec![0.0; cap + 1];
    for (j, &pj) in root_offspring.iter().enumerate() {
        for s in 0..cap {
            masses[s + 1] += pj * powers[j][s];
        }
    }
    let total: f64 = masses.iter().sum();
    Ok(ClusterLaw { masses, tail: 1.0 - total, max_size })
}

/// The reference law for the root of the k-regular tree.
pub fn critical_cluster_law(k: u32, max_size: u32) -> Result<ClusterLaw> {
    critical_cluster_law_rooted(k, k, max_size)
}

/// Survival probability to depth `depth` of the critical branching process
/// with offspring `Binomial(k-1, p_c)`, by iterating the generating
/// function. Independent of the sampler machinery; used to bound truncation
/// bias in survival statistics.
pub fn critical_reach_prob(k: u32, depth: u32) -> f64 {
    let p_c = 1.0 / (k - 1) as f64;
    let mut extinct = 0.0f64;
    for _ in 0..depth {
        extinct = (1.0 - p_c + p_c * extinct).powi(k as i32 - 1);
    }
    1.0 - extinct
}

/// Cluster statistics from `n` samples of a wired-limit sampler: histogram
/// of root-cluster sizes over the samples whose cluster stays inside the
/// ball, plus the count of samples reaching depth `radius`. Histogram counts
/// and the survival count sum to `n_samples`.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterStats {
    pub size_histogram: BTreeMap<u64, u64>,
    pub survival_count: u64,
    pub n_samples: u64,
}

pub fn collect_cluster_stats(sampler: &LimitSampler, n: u64) -> ClusterStats {
    let mut size_histogram = BTreeMap::new();
    let mut survival_count = 0u64;
    for s in 0..n {
        let outcome = sampler.probe(s).cluster();
        if outcome.reached {
            survival_count += 1;
        } else {
            *size_histogram.entry(outcome.size).or_insert(0) += 1;
        }
    }
    ClusterStats { size_histogram, survival_count, n_samples: n }
}

/// Distributional distance of the conditioned-finite cluster sizes against a
/// reference law: total variation on the truncated support `1..=max_size`
/// (both sides renormalized to that support) plus the two tail masses,
/// reported separately because the critical tail is heavy.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TvReport {
    pub tv_truncated: f64,
    pub empirical_tail: f64,
    pub reference_tail: f64,
    pub n_conditioned: u64,
}

pub fn conditioned_tv_against_law(stats: &ClusterStats, law: &ClusterLaw) -> Result<TvReport> {
    let n_finite = stats.n_samples - stats.survival_count;
    if n_finite == 0 {
        return Err(Error::InvalidParameter("no finite-cluster samples to condition on".into()));
    }
    let mut emp = vec![0.0; law.max_size as usize + 1];
    let mut emp_in = 0.0;
    for (&size, &count) in &stats.size_histogram {
        let p = count as f64 / n_finite as f64;
        if size >= 1 && size <= law.max_size as u64 {
            emp[size as usize] = p;
            emp_in += p;
        }
    }
    let ref_in: f64 = law.masses[1..].iter().sum();
    let mut tv = 0.0;
    for m in 1..=law.max_size as usize {
        tv += (emp[m] / emp_in - law.masses[m] / ref_in).abs();
    }
    Ok(TvReport {
        tv_truncated: 0.5 * tv,
        empirical_tail: 1.0 - emp_in,
        reference_tail: law.tail,
        n_conditioned: n_finite,
    })
}

/// One row of a finite-volume-to-limit convergence table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvergenceRow {
    pub radius: u32,
    pub exact: f64,
    pub limit: f64,
    pub gap: f64,
}

/// Pairs the exact ball probability of a cylinder event with its limit value
/// over a range of radii.
pub fn convergence_report(
    params: &Params,
    spec: &CylinderSpec,
    radii: &[u32],
) -> Result<Vec<ConvergenceRow>> {
    let limit = limit_cylinder_prob(params, spec)?;
    radii
        .iter()
        .map(|&r| {
            if r <= spec.max_depth() {
                return Err(Error::InvalidSpec(format!(
                    "radius {r} does not contain the pinned set (depth {})",
                    spec.max_depth()
                )));
            }
            let ball = WiredBall::new(params.k(), r)?;
            let exact = exact_cylinder_prob(&ball, params.beta(), spec)?;
            Ok(ConvergenceRow { radius: r, exact, limit, gap: (exact - limit).abs() })
        })
        .collect()
}

/// Goodness-of-fit chi-squared p-value of observed counts against exact cell
/// probabilities (cells with zero expected probability must have zero
/// counts and are excluded).
pub fn chi2_gof_pvalue(observed: &[u64], expected_probs: &[f64], n: u64) -> Result<f64> {
    if observed.len() != expected_probs.len() {
        return Err(Error::InvalidParameter("cell count mismatch".into()));
    }
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&obs, &p) in observed.iter().zip(expected_probs) {
        if p <= 0.0 {
            if obs > 0 {
                return Err(Error::InvalidParameter(
                    "observed counts in a zero-probability cell".into(),
                ));
            }
            continue;
        }
        let expect = n as f64 * p;
        stat += (obs as f64 - expect).powi(2) / expect;
        cells += 1;
    }
    chi2_upper_tail(stat, cells as f64 - 1.0)
}

/// Two-sample chi-squared p-value for equal-size samples over shared cells:
/// `Σ (a_i - b_i)^2 / (a_i + b_i)` on cells with any mass.
pub fn chi2_two_sample_pvalue(a: &[u64], b: &[u64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter("cell count mismatch".into()));
    }
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        if x + y > 0 {
            stat += (x as f64 - y as f64).powi(2) / (x + y) as f64;
            cells += 1;
        }
    }
    chi2_upper_tail(stat, cells as f64 - 1.0)
}

fn chi2_upper_tail(stat: f64, df: f64) -> Result<f64> {
    if df < 1.0 {
        return Err(Error::InvalidParameter("need at least two populated cells".into()));
    }
    let dist = ChiSquared::new(df)
        .map_err(|e| Error::InvalidParameter(format!("chi-squared df: {e}")))?;
    Ok(1.0 - dist.cdf(stat))
}

/// Report of the restricted-independence check: split the root's edges into
/// `E1` (first `size_e1` slots) and `E2` (the rest), condition on the root
/// cluster inside the `E2` subtrees staying within the ball, and compare the
/// joint frequency of an `E1`-side event and an `E2`-side event against the
/// product of marginals. Also compares the conditioned `E2`-cluster sizes
/// against the critical branching law with root offspring
/// `Binomial(|E2|, p_c)`.
#[derive(Debug, Clone, Serialize)]
pub struct IndependenceReport {
    pub n: u64,
    pub n_conditioned: u64,
    /// Frequency of the conditioning event and its closed-form value.
    pub conditioning_freq: f64,
    pub conditioning_exact: f64,
    /// `A` = first `E1` edge open; `B` = the `E2`-side cluster is just the
    /// root. Frequencies conditioned on the finiteness event.
    pub joint: f64,
    pub marginal_a: f64,
    pub marginal_b: f64,
    pub product: f64,
    pub discrepancy: f64,
    /// Conservative standard error of the discrepancy statistic.
    pub sigma: f64,
    pub cluster_tv: TvReport,
}

pub fn independence_test(
    params: &Params,
    size_e1: u32,
    size_e2: u32,
    radius: u32,
    n: u64,
    seed: u64,
) -> Result<IndependenceReport> {
    if size_e2 == 0 || size_e1 == 0 || size_e1 + size_e2 != params.k() {
        return Err(Error::InvalidParameter(format!(
            "need |E1| >= 1, |E2| >= 1, |E1| + |E2| = k; got {size_e1}, {size_e2}"
        )));
    }
    let conditioning_exact = restricted_finiteness_prob(params, size_e1, size_e2)?;
    let sampler = LimitSampler::new(*params, radius, seed)?;
    let in_e2 = |slot: u32| slot >= size_e1;
    let mut n_fin = 0u64;
    let mut count_a = 0u64;
    let mut count_b = 0u64;
    let mut count_ab = 0u64;
    let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
    for s in 0..n {
        let probe = sampler.probe(s);
        let outcome = probe.cluster_in_root_slots(in_e2);
        if outcome.reached {
            continue;
        }
        n_fin += 1;
        *hist.entry(outcome.size).or_insert(0) += 1;
        let a = probe.root_star_mask() & 1 == 1; // first E1 edge
        let b = outcome.size == 1;
        if a {
            count_a += 1;
        }
        if b {
            count_b += 1;
        }
        if a && b {
            count_ab += 1;
        }
    }
    if n_fin == 0 {
        return Err(Error::InvalidParameter("conditioning event never occurred".into()));
    }
    let nf = n_fin as f64;
    let (pa, pb, pab) = (count_a as f64 / nf, count_b as f64 / nf, count_ab as f64 / nf);
    let sigma = ((pab * (1.0 - pab) + pa * pa * pb * (1.0 - pb) + pb * pb * pa * (1.0 - pa)) / nf)
        .sqrt();
    let law = critical_cluster_law_rooted(params.k(), size_e2, 10)?;
    let stats = ClusterStats {
        size_histogram: hist,
        survival_count: n - n_fin,
        n_samples: n,
    };
    let cluster_tv = conditioned_tv_against_law(&stats, &law)?;
    Ok(IndependenceReport {
        n,
        n_conditioned: n_fin,
        conditioning_freq: nf / n as f64,
        conditioning_exact,
        joint: pab,
        marginal_a: pa,
        marginal_b: pb,
        product: pa * pb,
        discrepancy: (pab - pa * pb).abs(),
        sigma,
        cluster_tv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_extremes() {
        let e = mc_estimate(|_| true, 1000, 1).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.stderr, 0.0);
        let e = mc_estimate(|_| false, 1000, 1).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.stderr, 0.0);
        assert!(mc_estimate(|_| true, 0, 1).is_err());
    }

    #[test]
    fn estimates_merge_additively() {
        let pred = |s: u64| s % 3 == 0;
        let whole = mc_estimate(pred, 1000, 9).unwrap();
        let left = mc_estimate_range(pred, 0, 400, 9).unwrap();
        let right = mc_estimate_range(pred, 400, 1000, 9).unwrap();
        let merged = left.merge(&right);
        assert_eq!(whole.value, merged.value);
        assert_eq!(whole.n, merged.n);
        assert_eq!(whole.successes(), merged.successes());
        // order independence
        let merged_rev = right.merge(&left);
        assert_eq!(merged.value, merged_rev.value);
    }

    #[test]
    fn critical_law_small_values() {
        // P(1) = (1-p_c)^k = 1/8 and P(2) = 3 p_c (1-p_c)^4 = 3/32 at k = 3
        let law = critical_cluster_law(3, 10).unwrap();
        assert!((law.masses[1] - 0.125).abs() < 1e-12);
        assert!((law.masses[2] - 3.0 / 32.0).abs() < 1e-12);
        // heavy tail: truncated mass strictly below 1
        let total: f64 = law.masses[1..].iter().sum();
        assert!(total < 1.0);
        assert!(law.tail > 0.0);
        assert!(critical_cluster_law(3, 0).is_err());
    }

    /// Independent oracle: count the connected m-vertex subtrees containing
    /// the root by composing per-slot shape counts. On the k-regular tree a
    /// cluster of size m has exactly `km - 2(m-1)` closed boundary edges, so
    /// `P(|K| = m) = N_m p^{m-1} (1-p)^{km-2m+2}` at `p = p_c`.
    fn count_shapes(k: u32, max: usize) -> Vec<u64> {
        // t[m] = shapes of size m hanging below one slot; t[0] = 1 (absent)
        let mut t = vec![0u64; max + 1];
        t[0] = 1;
        for m in 1..=max {
            // the vertex itself plus m-1 vertices split over k-1 ordered slots
            let mut conv = vec![0u64; m];
            conv[0] = 1;
            for _ in 0..k - 1 {
                let mut next = vec![0u64; m];
                for (i, &a) in conv.iter().enumerate() {
                    if a == 0 {
                        continue;
                    }
                    for (j, &b) in t.iter().enumerate().take(m - i) {
                        next[i + j] += a * b;
                    }
                }
                conv = next;
            }
            t[m] = conv[m - 1];
        }
        let mut conv = vec![0u64; max + 1];
        conv[0] = 1;
        for _ in 0..k {
            let mut next = vec![0u64; max + 1];
            for (i, &a) in conv.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (j, &b) in t.iter().enumerate().take(max + 1 - i) {
                    next[i + j] += a * b;
                }
            }
            conv = next;
        }
        let mut n = vec![0u64; max + 1];
        for m in 1..=max {
            n[m] = conv[m - 1];
        }
        n
    }

    #[test]
    fn critical_law_matches_shape_enumeration() {
        let k = 3u32;
        let p = 0.5f64;
        let shapes = count_shapes(k, 6);
        assert_eq!(shapes[1], 1);
        assert_eq!(shapes[2], 3);
        let law = critical_cluster_law(k, 6).unwrap();
        for m in 1..=6usize {
            let boundary = k as usize * m - 2 * (m - 1);
            let direct =
                shapes[m] as f64 * p.powi(m as i32 - 1) * (1.0 - p).powi(boundary as i32);
            assert!(
                (law.masses[m] - direct).abs() < 1e-10,
                "m={m}: {} vs {direct}",
                law.masses[m]
            );
        }
    }

    #[test]
    fn reach_prob_decreases() {
        let mut prev = 1.0;
        for depth in [1u32, 2, 5, 10, 20, 40] {
            let s = critical_reach_prob(3, depth);
            assert!(s < prev && s > 0.0);
            prev = s;
        }
    }

    #[test]
    fn chi2_helpers_behave() {
        // identical samples: statistic 0, p-value 1
        let p = chi2_two_sample_pvalue(&[50, 50, 100], &[50, 50, 100]).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        // grossly different: p-value near 0
        let p = chi2_two_sample_pvalue(&[1000, 0], &[0, 1000]).unwrap();
        assert!(p < 1e-10);
        let p = chi2_gof_pvalue(&[480, 520], &[0.5, 0.5], 1000).unwrap();
        assert!(p > 0.05);
        assert!(chi2_gof_pvalue(&[5, 5], &[1.0, 0.0], 10).is_err());
    }
}
