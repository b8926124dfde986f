//! Executable checks of the revenue guarantees, counting bounds and arithmetic
//! constructions, each reporting both sides of its inequality.

use std::f64::consts::{E, LN_2};
use std::fmt;

use crate::characterization::{envelope_payment, gtm_step_embedding, step_payment, step_revenue, StepAllocation};
use crate::dist::{Family, ValueDistribution};
use crate::error::{invalid, precondition, Error, Result};
use crate::estimation::{
    closed_form_revenue, estimate_order_stat_mean, estimate_order_stats, estimate_revenue, myerson_upper_lower_bracket,
    order_by_tail_mass, McConfig, Mechanism,
};
use crate::instances::{make_geometric_point_family, make_mixture_instance, two_buyer_point_opponent_opt, Instance};
use crate::mechanisms::{alpha_for_tau, alpha_for_tau_multi, mgtm_config};
use crate::rng::SeededRng;

/// Multiplicative slack applied to Monte-Carlo-backed checks unless overridden.
pub const DEFAULT_SLACK: f64 = 0.02;

/// Tolerance on the calibrated `Pr[Σ >= k] = 1/2`.
pub const CALIBRATION_TOLERANCE: f64 = 1e-9;

/// Longest Bernoulli vector the exact convolution accepts.
pub const MAX_BERNOULLI_LEN: usize = 40;

/// `1 + 2 ln 2`, the median-to-optimum ratio.
pub const MEDIAN_FACTOR: f64 = 1.0 + 2.0 * LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    /// A hypothesis of the statement is not satisfied, so nothing is asserted.
    ConditionsNotMet,
}

/// Direction of the compared inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Relation {
    /// `lhs >= rhs (1 - slack)`.
    AtLeast,
    /// `lhs <= rhs (1 + slack)`.
    AtMost,
    /// `lhs > rhs`, exact.
    Exceeds,
    /// `lower (1 - slack) <= lhs <= rhs (1 + slack)`.
    Within { lower: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub verdict: Verdict,
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub slack_used: f64,
    pub details: String,
}

impl CheckReport {
    pub fn evaluate(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        relation: Relation,
        slack: f64,
        details: impl Into<String>,
    ) -> Self {
        let holds = match relation {
            Relation::AtLeast => lhs >= rhs * (1.0 - slack),
            Relation::AtMost => lhs <= rhs * (1.0 + slack),
            Relation::Exceeds => lhs > rhs,
            Relation::Within { lower } => lower * (1.0 - slack) <= lhs && lhs <= rhs * (1.0 + slack),
        };
        Self {
            name: name.into(),
            verdict: if holds { Verdict::Holds } else { Verdict::Fails },
            holds,
            lhs,
            rhs,
            relation,
            slack_used: slack,
            details: details.into(),
        }
    }

    pub fn conditions_not_met(name: impl Into<String>, details: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            verdict: Verdict::ConditionsNotMet,
            holds: false,
            lhs: f64::NAN,
            rhs: f64::NAN,
            relation: Relation::AtLeast,
            slack_used: 0.0,
            details: details.into(),
        }
    }

    /// Requires `extra` to hold as well, appending its reason when it does not.
    fn and(mut self, extra: bool, reason: &str) -> Self {
        if !extra && self.verdict == Verdict::Holds {
            self.verdict = Verdict::Fails;
            self.holds = false;
            self.details = format!("{}; {reason}", self.details);
        }
        self
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match self.verdict {
            Verdict::Holds => "HOLDS",
            Verdict::Fails => "FAILS",
            Verdict::ConditionsNotMet => "CONDITIONS NOT MET",
        };
        match self.relation {
            _ if self.verdict == Verdict::ConditionsNotMet => write!(f, "{}: {status}", self.name)?,
            Relation::AtLeast => write!(f, "{}: {status} {} >= {}", self.name, self.lhs, self.rhs)?,
            Relation::AtMost => write!(f, "{}: {status} {} <= {}", self.name, self.lhs, self.rhs)?,
            Relation::Exceeds => write!(f, "{}: {status} {} > {}", self.name, self.lhs, self.rhs)?,
            Relation::Within { lower } => {
                write!(f, "{}: {status} {} <= {} <= {}", self.name, lower, self.lhs, self.rhs)?
            }
        }
        if self.slack_used > 0.0 {
            write!(f, " (slack {})", self.slack_used)?;
        }
        if !self.details.is_empty() {
            write!(f, " [{}]", self.details)?;
        }
        Ok(())
    }
}

/// Monte-Carlo settings plus the multiplicative slack applied to the comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub mc: McConfig,
    pub slack: f64,
}

impl CheckConfig {
    pub fn new(mc: McConfig) -> Self {
        Self { mc, slack: DEFAULT_SLACK }
    }

    pub fn with_slack(self, slack: f64) -> Self {
        Self { slack, ..self }
    }
}

/// A revenue figure and whether it is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Figure {
    pub value: f64,
    pub stderr: f64,
    pub exact: bool,
}

/// Closed form when catalogued, Monte-Carlo otherwise.
pub fn revenue_figure(instance: &Instance, mechanism: &Mechanism, mc: &McConfig) -> Result<Figure> {
    if let Some(value) = closed_form_revenue(instance, mechanism) {
        return Ok(Figure { value, stderr: 0.0, exact: true });
    }
    let e = estimate_revenue(instance, mechanism, mc)?;
    Ok(Figure { value: e.mean, stderr: e.stderr, exact: false })
}

fn require_single_item(instance: &Instance) -> Result<()> {
    if instance.items() != 1 {
        return Err(precondition(format!("expected a single-item instance, got {} items", instance.items())));
    }
    Ok(())
}

/// Revenue of the geometric-threshold mechanism against the smaller of the optimal-revenue
/// and second-price terms, for each `τ`. Benchmarks are computed once and shared.
pub fn check_main_guarantee_sweep(instance: &Instance, taus: &[f64], cfg: &CheckConfig) -> Result<Vec<CheckReport>> {
    require_single_item(instance)?;
    if instance.n() < 2 {
        return Err(precondition("the guarantee compares against a second price and needs two buyers"));
    }
    let params = taus.iter().map(|&t| alpha_for_tau(t)).collect::<Result<Vec<_>>>()?;
    let myerson = revenue_figure(instance, &Mechanism::Myerson, &cfg.mc)?;
    let spa = revenue_figure(instance, &Mechanism::Spa, &cfg.mc)?;
    taus.iter()
        .zip(params)
        .map(|(&tau, p)| {
            let gtm = revenue_figure(instance, &Mechanism::Gtm { alpha: p.alpha, c: p.c }, &cfg.mc)?;
            let c = f64::from(p.c);
            let myerson_term = myerson.value / (192.0 * MEDIAN_FACTOR * c);
            let spa_term = p.alpha / (256.0 * c * c) * spa.value;
            let binding = if myerson_term <= spa_term { "optimal-revenue" } else { "second-price" };
            Ok(CheckReport::evaluate(
                format!("main_guarantee tau={tau}"),
                gtm.value,
                myerson_term.min(spa_term),
                Relation::AtLeast,
                cfg.slack,
                format!(
                    "alpha=e^{} gtm={} myerson={} spa={} myerson_term={myerson_term} spa_term={spa_term} binding={binding}",
                    p.c, gtm.value, myerson.value, spa.value
                ),
            ))
        })
        .collect()
}

/// `GTM(α, c) >= min(Myerson / (192 (1 + 2 ln 2) c), α SPA / (256 c²))` with `(α, c)` from `τ`.
pub fn check_main_guarantee(instance: &Instance, tau: f64, cfg: &CheckConfig) -> Result<CheckReport> {
    Ok(check_main_guarantee_sweep(instance, &[tau], cfg)?.remove(0))
}

/// Capacity-`t` guarantee: `GTM_t(α, c) >= min(t ŝ_t / (192 (1 + 2 ln 2) c), α t E[v^(t+1)] / (512 c²))`.
///
/// The variant without the factor `t` on the first term is evaluated as well and reported
/// in the details.
pub fn check_multi_core(instance: &Instance, t: usize, tau_prime: f64, cfg: &CheckConfig) -> Result<CheckReport> {
    if t == 0 {
        return Err(invalid("capacity must be positive"));
    }
    if instance.n() < t + 1 {
        return Err(precondition(format!("capacity {t} needs at least {} buyers, got {}", t + 1, instance.n())));
    }
    let p = alpha_for_tau_multi(tau_prime)?;
    let gtm = revenue_figure(instance, &Mechanism::GtmT { alpha: p.alpha, c: p.c, t }, &cfg.mc)?;
    let s_t = estimate_order_stats(instance, &[t], None, &cfg.mc)?.s[0];
    let next = match instance.point_profile() {
        Some(mut v) => {
            v.sort_by(|a, b| b.total_cmp(a));
            v[t]
        }
        None => estimate_order_stat_mean(instance, t + 1, &cfg.mc)?.mean,
    };
    let c = f64::from(p.c);
    let tf = t as f64;
    let median_term = tf * s_t / (192.0 * MEDIAN_FACTOR * c);
    let plain_median_term = s_t / (192.0 * MEDIAN_FACTOR * c);
    let tail_term = p.alpha / (512.0 * c * c) * tf * next;
    let rhs = median_term.min(tail_term);
    let plain_rhs = plain_median_term.min(tail_term);
    let plain_holds = gtm.value >= plain_rhs * (1.0 - cfg.slack);
    Ok(CheckReport::evaluate(
        format!("multi_core t={t} tau'={tau_prime}"),
        gtm.value,
        rhs,
        Relation::AtLeast,
        cfg.slack,
        format!(
            "alpha=e^{} s_t={s_t} mean_next={next} median_term={median_term} tail_term={tail_term} \
             without_t_factor: rhs={plain_rhs} holds={plain_holds}",
            p.c
        ),
    ))
}

/// `MGTM(τ) >= min(U / (12 · 192 (1 + 2 ln 2) c (1 + log₂ k)), τ VCG)` with `U` the
/// median-based upper bracket on optimal revenue.
pub fn check_mgtm_guarantee(instance: &Instance, tau: f64, cfg: &CheckConfig) -> Result<CheckReport> {
    let k = instance.items();
    let config = mgtm_config(tau, k)?;
    if instance.n() < k + 1 {
        return Err(precondition(format!("{k} items need at least {} buyers, got {}", k + 1, instance.n())));
    }
    let mgtm = revenue_figure(instance, &Mechanism::Mgtm { tau }, &cfg.mc)?;
    let vcg = revenue_figure(instance, &Mechanism::Vcg { k }, &cfg.mc)?;
    let bracket = myerson_upper_lower_bracket(instance, &cfg.mc)?;
    let levels = 1.0 + f64::from(k.trailing_zeros());
    let c = f64::from(config.params.c);
    let myerson_term = bracket.upper / (12.0 * 192.0 * MEDIAN_FACTOR * c * levels);
    let vcg_term = tau * vcg.value;
    Ok(CheckReport::evaluate(
        format!("mgtm k={k} tau={tau}"),
        mgtm.value,
        myerson_term.min(vcg_term),
        Relation::AtLeast,
        cfg.slack,
        format!(
            "alpha=e^{} mgtm={} vcg={} upper_bracket={} myerson_term={myerson_term} vcg_term={vcg_term}",
            config.params.c, mgtm.value, vcg.value, bracket.upper
        ),
    ))
}

/// VCG revenue against `k` times the mean `(k+1)`-th order statistic on the same profiles.
pub fn check_vcg_identity(instance: &Instance, cfg: &CheckConfig) -> Result<CheckReport> {
    let k = instance.items();
    let vcg = estimate_revenue(instance, &Mechanism::Vcg { k }, &cfg.mc)?;
    let next = estimate_order_stat_mean(instance, k + 1, &cfg.mc)?;
    Ok(CheckReport::evaluate(
        format!("vcg_identity k={k}"),
        (vcg.mean - k as f64 * next.mean).abs(),
        3.0 * vcg.stderr,
        Relation::AtMost,
        0.0,
        format!("vcg={} order_stat_mean={}", vcg.mean, next.mean),
    ))
}

/// Optimal revenue inside the median bracket: `½ ŝ₁` below, and above either
/// `(1 + 2 ln 2) ŝ₁` (one item) or `12 Σ_j 2^j ŝ_{2^j}` (`k` items).
pub fn check_myerson_bracket(instance: &Instance, cfg: &CheckConfig) -> Result<CheckReport> {
    let bracket = myerson_upper_lower_bracket(instance, &cfg.mc)?;
    let myerson = revenue_figure(instance, &Mechanism::Myerson, &cfg.mc)?;
    Ok(CheckReport::evaluate(
        format!("myerson_bracket k={}", instance.items()),
        myerson.value,
        bracket.upper,
        Relation::Within { lower: bracket.lower },
        cfg.slack,
        format!("medians={:?}", bracket.medians),
    ))
}

/// `½ ŝ₁ <= Myerson <= (1 + 2 ln 2) ŝ₁`.
pub fn check_median_sandwich(instance: &Instance, cfg: &CheckConfig) -> Result<CheckReport> {
    require_single_item(instance)?;
    let s1 = estimate_order_stats(instance, &[1], None, &cfg.mc)?.s[0];
    let myerson = revenue_figure(instance, &Mechanism::Myerson, &cfg.mc)?;
    Ok(CheckReport::evaluate(
        "median_sandwich",
        myerson.value,
        MEDIAN_FACTOR * s1,
        Relation::Within { lower: 0.5 * s1 },
        cfg.slack,
        format!("s1={s1} myerson_exact={}", myerson.exact),
    ))
}

/// Independent Bernoulli variables with nonincreasing means and a rank `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliVector {
    probabilities: Vec<f64>,
    k: usize,
}

impl BernoulliVector {
    pub fn new(probabilities: Vec<f64>, k: usize) -> Result<Self> {
        if let Some(p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(invalid(format!("{p} is not a probability")));
        }
        if k == 0 || k >= probabilities.len() {
            return Err(invalid(format!("k = {k} must lie in 1..{}", probabilities.len())));
        }
        if probabilities.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid("probabilities must be nonincreasing"));
        }
        Ok(Self { probabilities, k })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `dist[j] = Pr[Σ X_i = j]` by exact convolution.
    pub fn sum_distribution(&self) -> Vec<f64> {
        let mut dist = vec![0.0; self.probabilities.len() + 1];
        dist[0] = 1.0;
        for (i, &p) in self.probabilities.iter().enumerate() {
            for j in (0..=i + 1).rev() {
                let stay = dist[j] * (1.0 - p);
                let step = if j > 0 { dist[j - 1] * p } else { 0.0 };
                dist[j] = stay + step;
            }
        }
        dist
    }

    pub fn prob_sum_at_least(&self, m: usize) -> f64 {
        self.sum_distribution().iter().skip(m).sum()
    }

    /// `Pr[X₁ = ... = X_k = 1]`.
    pub fn prob_first_k_all_one(&self) -> f64 {
        self.probabilities[..self.k].iter().product()
    }

    /// Rescales `raw` through `p ↦ 1 - (1 - p)^θ`, which keeps the order, choosing `θ` by
    /// bisection so that `Pr[Σ >= k] = ½`. Returns the vector and the residual.
    pub fn calibrate(raw: &[f64], k: usize) -> Result<(Self, f64)> {
        let mut sorted = raw.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        if let Some(p) = sorted.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(invalid(format!("raw probabilities must lie strictly inside (0,1), got {p}")));
        }
        let at = |log_theta: f64| -> Result<Self> {
            let theta = log_theta.exp();
            Self::new(sorted.iter().map(|&p| -(theta * (-p).ln_1p()).exp_m1()).collect(), k)
        };
        let (mut lo, mut hi) = (-60.0f64, 60.0f64);
        let target = 0.5;
        let mut best = at(0.0)?;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            best = at(mid)?;
            let g = best.prob_sum_at_least(k);
            if (g - target).abs() <= CALIBRATION_TOLERANCE * 0.1 {
                break;
            }
            if g < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let residual = best.prob_sum_at_least(k) - target;
        Ok((best, residual))
    }
}

/// `Pr[Σ X_i >= k + 1] > 0.01` whenever `Pr[Σ >= k] = ½` and `Pr[X₁ = ... = X_k = 1] <= ¼`.
pub fn check_anti_concentration(bv: &BernoulliVector) -> Result<CheckReport> {
    let n = bv.probabilities.len();
    if n > MAX_BERNOULLI_LEN {
        return Err(invalid(format!("exact convolution is limited to {MAX_BERNOULLI_LEN} variables, got {n}")));
    }
    let dist = bv.sum_distribution();
    let at_least_k: f64 = dist[bv.k..].iter().sum();
    let above_k: f64 = dist[bv.k + 1..].iter().sum();
    let first_k = bv.prob_first_k_all_one();
    let name = format!("anti_concentration n={n} k={}", bv.k);
    let residual = at_least_k - 0.5;
    if residual.abs() > CALIBRATION_TOLERANCE || first_k > 0.25 {
        return Ok(CheckReport::conditions_not_met(
            name,
            format!("Pr[sum>=k]={at_least_k} Pr[first k all one]={first_k}"),
        ));
    }
    Ok(CheckReport::evaluate(
        name,
        above_k,
        0.01,
        Relation::Exceeds,
        0.0,
        format!("calibration_residual={residual:e} Pr[first k all one]={first_k}"),
    ))
}

/// Draws raw probabilities of random length and shape, calibrates them, and retries
/// until the hypotheses of [`check_anti_concentration`] hold.
pub fn random_calibrated_vector(rng: &mut SeededRng, min_len: usize, max_len: usize) -> Result<BernoulliVector> {
    if min_len < 2 || max_len < min_len || max_len > MAX_BERNOULLI_LEN {
        return Err(invalid(format!("lengths must satisfy 2 <= min <= max <= {MAX_BERNOULLI_LEN}")));
    }
    loop {
        let n = rng.int(min_len, max_len);
        let k = rng.int(1, n - 1);
        let shape = rng.range(0.2, 4.0);
        let raw: Vec<f64> = (0..n).map(|_| rng.uniform().powf(shape).clamp(1e-6, 1.0 - 1e-6)).collect();
        let (bv, residual) = BernoulliVector::calibrate(&raw, k)?;
        if residual.abs() <= CALIBRATION_TOLERANCE && bv.prob_first_k_all_one() <= 0.25 {
            return Ok(bv);
        }
    }
}

/// `n` log-spaced points on `[1.01 ŝ, 100 ŝ]` for the tail check.
pub fn tail_grid(s_t: f64, points: usize) -> Vec<f64> {
    crate::characterization::log_grid(1.01 * s_t, 100.0 * s_t, points).unwrap_or_default()
}

/// Estimated `ŝ_t`, reported alongside the tail check.
pub fn estimate_median_rank(instance: &Instance, t: usize, mc: &McConfig) -> Result<f64> {
    Ok(estimate_order_stats(instance, &[t], None, mc)?.s[0])
}

/// `Π_{i <= t} Pr[v_i >= x] <= (8/e) ŝ_t / x` for every `x` in the grid, buyers ranked by
/// `Pr[v_i >= ŝ_t]`. Reports the grid point with the largest ratio.
pub fn check_regular_tail(instance: &Instance, t: usize, x_grid: &[f64], cfg: &CheckConfig) -> Result<CheckReport> {
    let s_t = estimate_median_rank(instance, t, &cfg.mc)?;
    regular_tail_with_median(instance, t, x_grid, s_t, cfg.slack)
}

/// [`check_regular_tail`] with a precomputed `ŝ_t`.
pub fn regular_tail_with_median(
    instance: &Instance,
    t: usize,
    x_grid: &[f64],
    s_t: f64,
    slack: f64,
) -> Result<CheckReport> {
    if t == 0 || t > instance.n() {
        return Err(invalid(format!("t = {t} must lie in 1..={}", instance.n())));
    }
    if x_grid.is_empty() {
        return Err(invalid("the x grid is empty"));
    }
    if let Some(x) = x_grid.iter().find(|&&x| x.is_nan() || x <= s_t) {
        return Err(precondition(format!("grid point {x} does not exceed the estimated median {s_t}")));
    }
    let order = order_by_tail_mass(instance, s_t);
    let top = &order[..t];
    let mut worst = (f64::NEG_INFINITY, 0.0, 0.0, 0.0);
    for &x in x_grid {
        let product: f64 = top.iter().map(|&i| instance.buyers()[i].prob_at_least(x)).product();
        let bound = 8.0 / E * s_t / x;
        let ratio = product / bound;
        if ratio > worst.0 {
            worst = (ratio, product, bound, x);
        }
    }
    Ok(CheckReport::evaluate(
        format!("regular_tail t={t}"),
        worst.1,
        worst.2,
        Relation::AtMost,
        slack,
        format!("s_t={s_t} worst_x={} grid_points={}", worst.3, x_grid.len()),
    ))
}

/// Bucket sizes `n_j <= 12 · 2^j` for `j < log₂ k` and `Σ_{B_{log₂ k}} Pr[v_i >= ŝ_k] <= 3k`.
///
/// Buyers are bucketed by their own median against `ŝ_{2^j}`; a median above `ŝ₁`
/// (possible only through estimation noise) counts toward bucket 0. The report's `lhs` is
/// the largest ratio of a count to its bound.
pub fn check_bucket_counts(instance: &Instance, k_items: usize, cfg: &CheckConfig) -> Result<CheckReport> {
    if k_items < 2 || !k_items.is_power_of_two() {
        return Err(precondition(format!("bucket counting needs k >= 2 a power of two, got {k_items}")));
    }
    let levels = k_items.trailing_zeros() as usize;
    let ranks: Vec<usize> = (0..=levels).map(|j| 1usize << j).filter(|&r| r <= instance.n()).collect();
    let summary = estimate_order_stats(instance, &ranks, None, &cfg.mc)?;
    let s = |j: usize| summary.median(1 << j).unwrap_or(0.0);
    let mut counts = vec![0usize; levels + 1];
    let mut last_bucket = Vec::new();
    for (i, d) in instance.buyers().iter().enumerate() {
        let m = d.left_median();
        let bucket = if m <= s(levels) { levels } else { (0..levels).rev().find(|&j| m <= s(j)).unwrap_or(0) };
        counts[bucket] += 1;
        if bucket == levels {
            last_bucket.push(i);
        }
    }
    let s_k = s(levels);
    let tail_mass: f64 = last_bucket.iter().map(|&i| instance.buyers()[i].prob_at_least(s_k)).sum();
    let mut worst: f64 = tail_mass / (3.0 * k_items as f64);
    for (j, &n_j) in counts.iter().enumerate().take(levels) {
        worst = worst.max(n_j as f64 / (12.0 * (1u64 << j) as f64));
    }
    Ok(CheckReport::evaluate(
        format!("bucket_counts k={k_items}"),
        worst,
        1.0,
        Relation::AtMost,
        cfg.slack,
        format!("counts={counts:?} tail_mass={tail_mass} s_k={s_k}"),
    ))
}

/// Exponent `m` with `2^m + 1 <= τ < 2^{m+1} + 1`.
pub fn lower_bound_exponent(tau: f64) -> Result<u32> {
    if !(tau.is_finite() && tau >= 3.0) {
        return Err(invalid(format!("tau must be at least 3, got {tau}")));
    }
    let mut m = 1u32;
    while 2f64.powi(m as i32 + 1) + 1.0 <= tau {
        m += 1;
    }
    Ok(m)
}

/// Mixture weights `p_j = 2^{-j} 2^m / (2^m - 1)` for `j = 1..=m`.
pub fn lower_bound_weights(m: u32) -> Vec<f64> {
    let norm = 2f64.powi(m as i32) / (2f64.powi(m as i32) - 1.0);
    (1..=m).map(|j| 2f64.powi(-(j as i32)) * norm).collect()
}

/// `2.5 m / ln τ · 2^m / (2^m - 1) > 3`.
pub fn check_lower_bound_arithmetic(tau: f64) -> Result<CheckReport> {
    let m = lower_bound_exponent(tau)?;
    let pm = 2f64.powi(m as i32);
    let value = 2.5 * f64::from(m) / tau.ln() * pm / (pm - 1.0);
    let family = make_geometric_point_family(m as usize)?;
    let weight_total: f64 = lower_bound_weights(m).iter().sum();
    Ok(CheckReport::evaluate(
        format!("lower_arithmetic tau={tau}"),
        value,
        3.0,
        Relation::Exceeds,
        0.0,
        format!("m={m} instances={} weight_total={weight_total}", family.len()),
    )
    .and((weight_total - 1.0).abs() <= 1e-12, "mixture weights do not sum to 1"))
}

/// Exact optimal revenue on the collapsed mixture is at most `1 + 2/√k`, while each
/// component alone allows at least `√k`.
pub fn check_mixture_upper_bound(k: usize) -> Result<CheckReport> {
    let mix = make_mixture_instance(k)?;
    let collapsed = two_buyer_point_opponent_opt(&mix.collapsed.buyers()[0], 1.0)?;
    let root = (k as f64).sqrt();
    let component_min = mix
        .mixed
        .components()
        .iter()
        .map(|(inst, _)| two_buyer_point_opponent_opt(&inst.buyers()[0], 1.0).map(|o| o.revenue))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(CheckReport::evaluate(
        format!("mixture_bound k={k}"),
        collapsed.revenue,
        1.0 + 2.0 / root,
        Relation::AtMost,
        0.0,
        format!("price={} min_component_optimum={component_min} sqrt_k={root}", collapsed.price),
    )
    .and(component_min >= root, "a component optimum is below sqrt(k)"))
}

/// Concavity of revenue in quantile space, the reserve and median relations and
/// monotone virtual values, on grids.
pub fn check_regularity(d: &ValueDistribution) -> Result<CheckReport> {
    if matches!(d.family(), Family::FiniteSupport { .. }) {
        return Ok(CheckReport::conditions_not_met(
            "regularity",
            "finite supports are screened by the discrete revenue-curve test",
        ));
    }
    let revenue = |q: f64| if q > 0.0 { q * d.price_at_quantile(q) } else { 0.0 };
    let mut worst_chord: f64 = 0.0;
    for i in 1..100 {
        let (a, b, c) = (i as f64 / 100.0 - 0.01, i as f64 / 100.0, i as f64 / 100.0 + 0.01);
        worst_chord = worst_chord.max(0.5 * (revenue(a) + revenue(c)) - revenue(b));
    }
    let summary = d.regular_summary()?;
    let reserve_ok = summary.reserve_revenue <= summary.median + 1e-12;
    let mut between_ok = true;
    if summary.median <= summary.reserve {
        for i in 0..=100 {
            let l = (summary.median + (summary.reserve - summary.median) * i as f64 / 100.0).min(summary.reserve);
            between_ok &= summary.reserve_revenue <= 2.0 * l * d.prob_at_least(l) + 1e-9;
        }
    }
    let mut monotone = true;
    if d.is_continuous() {
        let (lo, hi) = (d.support_lower(), d.support_upper().min(d.support_lower() + 50.0 * summary.median.max(1e-9)));
        let mut last = f64::NEG_INFINITY;
        for i in 0..200 {
            let v = lo + (hi - lo) * i as f64 / 200.0;
            if let Ok(phi) = d.virtual_value(v) {
                monotone &= phi >= last - 1e-12;
                last = phi;
            }
        }
    }
    Ok(CheckReport::evaluate(
        "regularity",
        worst_chord,
        1e-9,
        Relation::AtMost,
        0.0,
        format!("reserve={} reserve_revenue={} median={}", summary.reserve, summary.reserve_revenue, summary.median),
    )
    .and(reserve_ok, "reserve revenue exceeds the median")
    .and(between_ok, "reserve revenue exceeds twice the revenue between median and reserve")
    .and(monotone, "virtual value decreases"))
}

/// Revenue of the step embedding of `GTM(α, c)` against the direct estimate on the same
/// profiles; agreement within three standard errors.
pub fn check_characterization_oracle(instance: &Instance, alpha: f64, c: u32, mc: &McConfig) -> Result<CheckReport> {
    if instance.n() != 2 || instance.items() != 1 {
        return Err(precondition("the step family is defined for two buyers and one item"));
    }
    let sa = gtm_step_embedding(alpha, c)?;
    let b = instance.buyers();
    let step = step_revenue(&sa, &b[0], &b[1], mc)?;
    let direct = estimate_revenue(instance, &Mechanism::Gtm { alpha, c }, mc)?;
    Ok(CheckReport::evaluate(
        format!("characterization_oracle alpha={alpha} c={c}"),
        (step.mean - direct.mean).abs(),
        3.0 * step.stderr.max(direct.stderr),
        Relation::AtMost,
        0.0,
        format!("step={} direct={} stderr={}", step.mean, direct.mean, direct.stderr),
    ))
}

/// Largest gap between the per-step payment and the envelope integral over random profiles.
pub fn check_step_envelope(sa: &StepAllocation, profiles: usize, seed: u64) -> Result<CheckReport> {
    if profiles == 0 {
        return Err(invalid("at least one profile is required"));
    }
    let mut rng = SeededRng::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..profiles {
        let v1 = 10f64.powf(rng.range(-1.0, 1.0));
        let v2 = 10f64.powf(rng.range(-1.0, 1.0));
        worst = worst.max((step_payment(sa, v1, v2) - envelope_payment(sa, v1, v2)).abs());
    }
    Ok(CheckReport::evaluate(
        "step_envelope",
        worst,
        1e-12,
        Relation::AtMost,
        0.0,
        format!("profiles={profiles} steps={}", sa.steps()),
    ))
}

/// Turns an estimation error into a report that records the unmet precondition.
pub fn report_or_conditions(name: &str, result: Result<CheckReport>) -> Result<CheckReport> {
    match result {
        Err(Error::Precondition(msg)) => Ok(CheckReport::conditions_not_met(name, msg)),
        other => other,
    }
}
