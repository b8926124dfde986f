//! Scale-free symmetric two-buyer mechanisms represented as step allocations.
//!
//! Buyer 1 receives `x₁(r) = #{k : r >= γ_k} / n` at value ratio `r = v₁ / v₂`,
//! paying `γ_k v₂` for every step it clears; buyer 2 is treated symmetrically.

use crate::dist::ValueDistribution;
use crate::error::{invalid, precondition, Result};
use crate::estimation::{draw_profile, estimate_revenue, McConfig, Mechanism, RevenueEstimate};
use crate::instances::Instance;
use crate::mechanisms::ThresholdSpec;
use crate::rng::CounterStream;

/// Perturbation applied to unit thresholds so embeddings are strictly feasible.
pub const UNIT_PERTURBATION: f64 = 1e-9;

/// Default number of points in the candidate threshold grid.
pub const DEFAULT_GRID_POINTS: usize = 200;

/// Equal-weight steps `γ₁ >= γ₂ >= ... >= γ_n` with `n` even.
#[derive(Debug, Clone, PartialEq)]
pub struct StepAllocation {
    gammas: Vec<f64>,
}

impl StepAllocation {
    pub fn new(gammas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || !gammas.len().is_multiple_of(2) {
            return Err(invalid(format!("step count must be positive and even, got {}", gammas.len())));
        }
        if let Some(g) = gammas.iter().find(|g| g.is_nan() || **g <= 0.0) {
            return Err(invalid(format!("step thresholds must be positive, got {g}")));
        }
        if gammas.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid("step thresholds must be nonincreasing"));
        }
        Ok(Self { gammas })
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn steps(&self) -> usize {
        self.gammas.len()
    }

    /// `γ_k · γ_{n+1-k} > 1` for every `k`.
    pub fn is_feasible(&self) -> bool {
        let n = self.gammas.len();
        (0..n).all(|k| self.gammas[k] * self.gammas[n - 1 - k] > 1.0)
    }
}

/// Allocation probability of buyer 1 at value ratio `r`.
pub fn step_alloc(sa: &StepAllocation, r: f64) -> f64 {
    sa.gammas.iter().filter(|&&g| r >= g).count() as f64 / sa.steps() as f64
}

pub fn check_feasible(sa: &StepAllocation) -> bool {
    sa.is_feasible()
}

/// Buyer 1's payment at profile `(v1, v2)`: `Σ_k γ_k v₂ 1[v₁ >= γ_k v₂] / n`.
pub fn step_payment(sa: &StepAllocation, v1: f64, v2: f64) -> f64 {
    let total: f64 = sa.gammas.iter().filter(|&&g| v1 >= g * v2).map(|&g| g * v2).sum();
    total / sa.steps() as f64
}

/// Buyer 1's payment from the envelope formula `v₁ x₁(v₁/v₂) - ∫₀^{v₁} x₁(t/v₂) dt`,
/// integrating each step exactly.
pub fn envelope_payment(sa: &StepAllocation, v1: f64, v2: f64) -> f64 {
    let n = sa.steps() as f64;
    let allocation = sa.gammas.iter().filter(|&&g| v1 >= g * v2).count() as f64 / n;
    let area: f64 = sa.gammas.iter().map(|&g| (v1 - g * v2).max(0.0)).sum::<f64>() / n;
    v1 * allocation - area
}

/// Revenue from both buyers at one profile.
pub fn step_profile_revenue(sa: &StepAllocation, v1: f64, v2: f64) -> f64 {
    step_payment(sa, v1, v2) + step_payment(sa, v2, v1)
}

fn pair_instance(d1: &ValueDistribution, d2: &ValueDistribution) -> Result<Instance> {
    Instance::single_item(vec![d1.clone(), d2.clone()])
}

/// Monte-Carlo revenue of a feasible step allocation.
pub fn step_revenue(
    sa: &StepAllocation,
    d1: &ValueDistribution,
    d2: &ValueDistribution,
    cfg: &McConfig,
) -> Result<RevenueEstimate> {
    if !sa.is_feasible() {
        return Err(precondition("step thresholds violate feasibility"));
    }
    estimate_revenue(&pair_instance(d1, d2)?, &Mechanism::Step { gammas: sa.gammas.clone() }, cfg)
}

/// Equal-weight embedding of a threshold menu whose weights are multiples of `1/steps`:
/// each threshold is repeated in proportion to its weight, unit thresholds become `1 + 1e-9`.
pub fn embed_threshold_spec(spec: &ThresholdSpec, steps: usize) -> Result<StepAllocation> {
    let mut gammas = Vec::with_capacity(steps);
    for e in spec.entries() {
        let copies = e.weight * steps as f64;
        let rounded = copies.round();
        if (copies - rounded).abs() > 1e-9 {
            return Err(invalid(format!("weight {} is not a multiple of 1/{steps}", e.weight)));
        }
        let gamma = if e.lambda == 1.0 { 1.0 + UNIT_PERTURBATION } else { e.lambda };
        gammas.extend(std::iter::repeat_n(gamma, rounded as usize));
    }
    if gammas.len() != steps {
        return Err(invalid("menu weights do not fill the step count"));
    }
    gammas.sort_by(|a, b| b.total_cmp(a));
    StepAllocation::new(gammas)
}

/// The geometric menu with parameters `(α, c)` as `2c` equal-weight steps.
pub fn gtm_step_embedding(alpha: f64, c: u32) -> Result<StepAllocation> {
    let spec = crate::mechanisms::gtm_spec(alpha, c)?;
    let steps = if spec.entries().len() == 1 { 2 } else { 2 * c as usize };
    embed_threshold_spec(&spec, steps)
}

/// Logarithmically spaced grid of `points` thresholds on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && points >= 1) {
        return Err(invalid("grid needs 0 < lo <= hi and at least one point"));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| if i == points - 1 { hi } else { (a + (b - a) * i as f64 / (points - 1) as f64).exp() })
        .collect())
}

/// Default candidate grid: 200 log-spaced points on `[1 + 1e-6, 1000]`.
pub fn default_gamma_grid() -> Vec<f64> {
    log_grid(1.0 + 1e-6, 1e3, DEFAULT_GRID_POINTS).expect("valid bounds")
}

/// Best two-step allocation found by [`best_single_pair`].
#[derive(Debug, Clone, PartialEq)]
pub struct PairOptimum {
    /// Larger threshold.
    pub gamma: f64,
    /// Smaller threshold; may lie below 1 as long as the product exceeds 1.
    pub gamma_pair: f64,
    pub revenue: RevenueEstimate,
}

/// Exhaustive search over two-step allocations `(γ, γ')` with `γ >= γ'` and `γγ' > 1`.
///
/// Larger thresholds come from `grid`; smaller ones from `grid` and the reciprocals of its
/// points. All candidates are scored on common random profiles; ties go to the
/// lexicographically smallest pair.
pub fn best_single_pair(
    d1: &ValueDistribution,
    d2: &ValueDistribution,
    grid: &[f64],
    cfg: &McConfig,
) -> Result<PairOptimum> {
    if grid.is_empty() {
        return Err(invalid("the threshold grid is empty"));
    }
    if let Some(g) = grid.iter().find(|g| !(g.is_finite() && **g >= 1.0)) {
        return Err(invalid(format!("grid thresholds must be finite and >= 1, got {g}")));
    }
    if cfg.replicates < 2 {
        return Err(invalid("at least two replicates are needed"));
    }
    let inst = pair_instance(d1, d2)?;
    let mut hi: Vec<f64> = grid.to_vec();
    hi.sort_by(f64::total_cmp);
    hi.dedup();
    let mut lo: Vec<f64> = hi.iter().chain(hi.iter().map(|g| 1.0 / g).collect::<Vec<_>>().iter()).copied().collect();
    lo.sort_by(f64::total_cmp);
    lo.dedup();

    // Each profile contributes two (ratio, base) events: buyer 1 at ratio v1/v2 paying γ·v2,
    // and buyer 2 at ratio v2/v1 paying γ·v1.
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(2 * cfg.replicates as usize);
    let mut values = Vec::with_capacity(2);
    for r in 0..cfg.replicates {
        draw_profile(&inst, &CounterStream::new(cfg.seed, r), &mut values);
        let (v1, v2) = (values[0], values[1]);
        events.push((ratio(v1, v2), v2));
        events.push((ratio(v2, v1), v1));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut suffix = vec![0.0; events.len() + 1];
    for i in (0..events.len()).rev() {
        suffix[i] = suffix[i + 1] + events[i].1;
    }
    let per_step = |g: f64| -> f64 {
        let first = events.partition_point(|e| e.0 < g);
        g * suffix[first] / cfg.replicates as f64
    };
    let hi_rev: Vec<f64> = hi.iter().map(|&g| per_step(g)).collect();
    let lo_rev: Vec<f64> = lo.iter().map(|&g| per_step(g)).collect();

    let mut best: Option<(f64, f64, f64)> = None;
    for (&g_lo, &r_lo) in lo.iter().zip(&lo_rev) {
        for (&g_hi, &r_hi) in hi.iter().zip(&hi_rev) {
            if g_hi < g_lo || g_hi * g_lo <= 1.0 {
                continue;
            }
            let value = 0.5 * (r_hi + r_lo);
            let better = match best {
                None => true,
                Some((bh, bl, bv)) => value > bv || (value == bv && (g_hi, g_lo) < (bh, bl)),
            };
            if better {
                best = Some((g_hi, g_lo, value));
            }
        }
    }
    let (gamma, gamma_pair, _) = best.ok_or_else(|| precondition("no feasible threshold pair in the grid"))?;
    let revenue = step_revenue(&StepAllocation::new(vec![gamma, gamma_pair])?, d1, d2, cfg)?;
    Ok(PairOptimum { gamma, gamma_pair, revenue })
}

/// Value ratio; a zero opponent clears every step at price zero.
fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::make_equal_revenue_pair;
    use std::f64::consts::E;

    fn sa(g: &[f64]) -> StepAllocation {
        StepAllocation::new(g.to_vec()).unwrap()
    }

    #[test]
    fn step_alloc_examples() {
        let s = sa(&[2.0, 0.6]);
        assert_eq!(step_alloc(&s, 1.0), 0.5);
        assert_eq!(step_alloc(&s, 3.0), 1.0);
        assert_eq!(step_alloc(&s, 0.5), 0.0);
    }

    #[test]
    fn feasibility_examples() {
        assert!(check_feasible(&sa(&[2.0, 0.6])));
        assert!(!check_feasible(&sa(&[1.0, 1.0])));
        assert!(check_feasible(&gtm_step_embedding(E, 1).unwrap()));
        assert!(StepAllocation::new(vec![1.0]).is_err());
        assert!(StepAllocation::new(vec![0.5, 2.0]).is_err());
        assert!(StepAllocation::new(vec![]).is_err());
    }

    #[test]
    fn feasibility_matches_allocation_bound() {
        for g in [[2.0, 0.6], [1.5, 0.6], [3.0, 0.34], [3.0, 0.3]] {
            let s = sa(&g);
            let mut r = 1e-3;
            let mut ok = true;
            while r < 1e3 {
                // Probe both at grid points and at the reciprocal breakpoints.
                for x in [r, 1.0 / g[0], 1.0 / g[1], g[0], g[1]] {
                    ok &= step_alloc(&s, x) + step_alloc(&s, 1.0 / x) <= 1.0;
                }
                r *= 1.01;
            }
            assert_eq!(ok, s.is_feasible(), "{g:?}");
        }
    }

    #[test]
    fn payment_examples() {
        let s = sa(&[2.0, 0.6]);
        assert!((step_profile_revenue(&s, 3.0, 1.0) - 1.3).abs() < 1e-15);
        let far = sa(&[1e300, 1e300]);
        assert_eq!(step_profile_revenue(&far, 3.0, 1.0), 0.0);
    }

    #[test]
    fn gtm_embeddings() {
        let s = gtm_step_embedding(E, 1).unwrap();
        assert_eq!(s.gammas(), &[E, 1.0 + UNIT_PERTURBATION]);
        let s = gtm_step_embedding(E * E, 2).unwrap();
        assert_eq!(s.steps(), 4);
        assert_eq!(s.gammas()[0], E * E);
        assert_eq!(&s.gammas()[2..], &[1.0 + UNIT_PERTURBATION; 2]);
        assert!(s.is_feasible());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = default_gamma_grid();
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 1.0 + 1e-6);
        assert_eq!(g[199], 1e3);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn best_pair_on_point_buyers_approaches_one() {
        let p = ValueDistribution::point(1.0).unwrap();
        let best = best_single_pair(&p, &p, &default_gamma_grid(), &McConfig::new(10, 0)).unwrap();
        assert!(best.gamma * best.gamma_pair > 1.0);
        assert!(best.revenue.mean > 0.999 && best.revenue.mean < 1.0, "{best:?}");
        assert!(best_single_pair(&p, &p, &[], &McConfig::new(10, 0)).is_err());
    }

    #[test]
    fn best_pair_on_equal_revenue_beats_second_price() {
        let inst = make_equal_revenue_pair(3.0).unwrap();
        let d = &inst.buyers()[0];
        let best = best_single_pair(d, d, &default_gamma_grid(), &McConfig::new(100_000, 1)).unwrap();
        assert!(best.revenue.mean >= 0.75 * (1.0 - 0.02), "{best:?}");
    }
}
