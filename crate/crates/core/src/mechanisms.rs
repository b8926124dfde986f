//! Auction mechanisms as outcome functions of a reported value profile.
//!
//! Ties are broken toward the lowest buyer index at every rank comparison.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::f64::consts::E;

use crate::error::{invalid, precondition, Result};
use crate::instances::Instance;
use crate::rng::UniformSource;

/// Tolerance on the total weight of a [`ThresholdSpec`].
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Reported values, one per buyer.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueProfile(Vec<f64>);

impl ValueProfile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(invalid(format!("values must be finite and nonnegative, got {v}")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Buyer indices from highest to lowest value, lowest index first among equals.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.0.len()).collect();
        idx.sort_by(|&a, &b| self.0[b].total_cmp(&self.0[a]).then(a.cmp(&b)));
        idx
    }

    /// `v^(rank)`, the `rank`-th largest value (1-based).
    pub fn order_stat(&self, rank: usize) -> f64 {
        let mut sorted = self.0.clone();
        sort_desc(&mut sorted);
        sorted[rank - 1]
    }
}

pub(crate) fn sort_desc(values: &mut [f64]) {
    values.sort_unstable_by(|a, b| b.total_cmp(a));
}

/// One menu entry of a randomized threshold mechanism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdEntry {
    pub lambda: f64,
    pub weight: f64,
}

/// Finite menu of multiplicative thresholds with selection probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSpec {
    entries: Vec<ThresholdEntry>,
}

impl ThresholdSpec {
    pub fn new(entries: Vec<ThresholdEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("a threshold menu needs at least one entry"));
        }
        let mut total = 0.0;
        for (i, e) in entries.iter().enumerate() {
            if !(e.lambda.is_finite() && e.lambda >= 1.0) {
                return Err(invalid(format!("threshold {} must be >= 1", e.lambda)));
            }
            if !(e.weight.is_finite() && (0.0..=1.0).contains(&e.weight)) {
                return Err(invalid(format!("weight {} is not a probability", e.weight)));
            }
            if i > 0 && e.lambda <= entries[i - 1].lambda {
                return Err(invalid("thresholds must be strictly increasing"));
            }
            total += e.weight;
        }
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(invalid(format!("threshold weights sum to {total}, expected 1")));
        }
        Ok(Self { entries })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(lambda, weight)| ThresholdEntry { lambda, weight }).collect())
    }

    pub fn entries(&self) -> &[ThresholdEntry] {
        &self.entries
    }

    /// Entry selected by a uniform draw, by CDF inversion in menu order.
    pub fn select(&self, u: f64) -> &ThresholdEntry {
        let mut cum = 0.0;
        for e in &self.entries {
            cum += e.weight;
            if u < cum {
                return e;
            }
        }
        self.entries.last().expect("nonempty menu")
    }
}

/// Winners and per-buyer payments of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub winners: BTreeSet<usize>,
    pub payments: Vec<f64>,
}

impl Outcome {
    fn empty(n: usize) -> Self {
        Self { winners: BTreeSet::new(), payments: vec![0.0; n] }
    }

    pub fn revenue(&self) -> f64 {
        self.payments.iter().sum()
    }

    pub fn utility(&self, buyer: usize, value: f64) -> f64 {
        if self.winners.contains(&buyer) {
            value - self.payments[buyer]
        } else {
            0.0
        }
    }
}

/// Second-price auction for one item.
pub fn spa(profile: &ValueProfile) -> Result<Outcome> {
    if profile.len() < 2 {
        return Err(precondition("the second-price auction needs at least two buyers"));
    }
    vcg_k(profile, 1)
}

/// VCG with `k` identical items and unit demand: the top `k` pay `v^(k+1)` each.
pub fn vcg_k(profile: &ValueProfile, k: usize) -> Result<Outcome> {
    if k == 0 {
        return Err(invalid("VCG needs at least one item"));
    }
    if profile.len() <= k {
        return Err(precondition(format!("VCG with {k} items needs more than {k} buyers")));
    }
    let ranking = profile.ranking();
    let price = profile.values()[ranking[k]];
    let mut out = Outcome::empty(profile.len());
    for &i in &ranking[..k] {
        out.winners.insert(i);
        out.payments[i] = price;
    }
    Ok(out)
}

/// Capacity-`t` threshold mechanism with a fixed threshold: each of the top `t`
/// buyers wins at price `λ·v^(t+1)` iff its value reaches that price.
pub fn threshold_outcome(profile: &ValueProfile, lambda: f64, t: usize) -> Result<Outcome> {
    if !(lambda.is_finite() && lambda >= 1.0) {
        return Err(invalid(format!("threshold must be >= 1, got {lambda}")));
    }
    if t == 0 {
        return Err(invalid("capacity must be positive"));
    }
    if profile.len() <= t {
        return Err(precondition(format!("capacity {t} needs more than {t} buyers")));
    }
    let ranking = profile.ranking();
    let v = profile.values();
    let price = lambda * v[ranking[t]];
    let mut out = Outcome::empty(profile.len());
    for &i in &ranking[..t] {
        if v[i] >= price {
            out.winners.insert(i);
            out.payments[i] = price;
        }
    }
    Ok(out)
}

/// Menu `{(1, 1/2)} ∪ {(α^((i-1)/c), 1/(2c)) : i = 2..=c+1}`; the top threshold is `α` exactly.
pub fn gtm_spec(alpha: f64, c: u32) -> Result<ThresholdSpec> {
    if !(alpha.is_finite() && alpha >= 1.0) {
        return Err(invalid(format!("alpha must be >= 1, got {alpha}")));
    }
    if c == 0 {
        return Err(invalid("the number of geometric steps must be positive"));
    }
    if alpha == 1.0 {
        return ThresholdSpec::from_pairs(&[(1.0, 1.0)]);
    }
    let step_weight = 1.0 / (2.0 * f64::from(c));
    let mut entries = vec![ThresholdEntry { lambda: 1.0, weight: 0.5 }];
    for i in 2..=c + 1 {
        let lambda = if i == c + 1 { alpha } else { alpha.powf(f64::from(i - 1) / f64::from(c)) };
        entries.push(ThresholdEntry { lambda, weight: step_weight });
    }
    ThresholdSpec::new(entries)
}

/// Draws one threshold with a single uniform, then runs [`threshold_outcome`].
pub fn run_randomized_threshold<S: UniformSource + ?Sized>(
    profile: &ValueProfile,
    spec: &ThresholdSpec,
    t: usize,
    stream: &mut S,
) -> Result<Outcome> {
    let entry = spec.select(stream.next_uniform());
    threshold_outcome(profile, entry.lambda, t)
}

/// Revenue averaged over the threshold draw.
pub fn expected_revenue_over_thresholds(profile: &ValueProfile, spec: &ThresholdSpec, t: usize) -> Result<f64> {
    if t == 0 {
        return Err(invalid("capacity must be positive"));
    }
    if profile.len() <= t {
        return Err(precondition(format!("capacity {t} needs more than {t} buyers")));
    }
    let mut sorted = profile.values().to_vec();
    sort_desc(&mut sorted);
    Ok(expected_threshold_revenue_sorted(&sorted, spec, t))
}

/// Revenue of a fixed threshold on values sorted in decreasing order.
#[inline]
pub(crate) fn threshold_revenue_sorted(sorted: &[f64], lambda: f64, t: usize) -> f64 {
    let price = lambda * sorted[t];
    let sold = sorted[..t].iter().take_while(|&&v| v >= price).count();
    sold as f64 * price
}

#[inline]
pub(crate) fn expected_threshold_revenue_sorted(sorted: &[f64], spec: &ThresholdSpec, t: usize) -> f64 {
    spec.entries.iter().map(|e| e.weight * threshold_revenue_sorted(sorted, e.lambda, t)).sum()
}

/// Parameters `(α, c)` of a geometric-threshold mechanism with `ln α = c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtmParams {
    pub alpha: f64,
    pub c: u32,
}

impl GtmParams {
    pub fn spec(&self) -> ThresholdSpec {
        gtm_spec(self.alpha, self.c).expect("alpha = e^c with c >= 1")
    }
}

fn integral_log_alpha(tau: f64, offset: f64, small_c: u32) -> Result<GtmParams> {
    if !(tau.is_finite() && tau > 1.0) {
        return Err(invalid(format!("tau must exceed 1, got {tau}")));
    }
    if tau <= E {
        return Ok(GtmParams { alpha: f64::from(small_c).exp(), c: small_c });
    }
    let ln_tau = tau.ln();
    let c = (offset + (tau * ln_tau * ln_tau).ln()).ceil() as u32;
    Ok(GtmParams { alpha: f64::from(c).exp(), c })
}

/// Single-item rule: `(e^12, 12)` when `τ <= e`, otherwise `c = ⌈11 + ln(τ ln²τ)⌉`, `α = e^c`.
pub fn alpha_for_tau(tau: f64) -> Result<GtmParams> {
    integral_log_alpha(tau, 11.0, 12)
}

/// Capacity-`t` rule: `(e^20, 20)` when `τ' <= e`, otherwise `c = ⌈19 + ln(τ' ln²τ')⌉`.
pub fn alpha_for_tau_multi(tau_prime: f64) -> Result<GtmParams> {
    integral_log_alpha(tau_prime, 19.0, 20)
}

/// Configuration of the multi-item mixture over capacities `1, 2, 4, ..., k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MgtmConfig {
    pub tau: f64,
    pub tau_prime: f64,
    pub params: GtmParams,
    pub capacities: Vec<usize>,
}

pub fn mgtm_config(tau: f64, k_items: usize) -> Result<MgtmConfig> {
    if k_items == 0 || !k_items.is_power_of_two() {
        return Err(invalid(format!("item count {k_items} must be a power of two")));
    }
    let tau_prime = (k_items * k_items) as f64 * tau;
    let params = alpha_for_tau_multi(tau_prime)?;
    let capacities = (0..=k_items.trailing_zeros()).map(|j| 1usize << j).collect();
    Ok(MgtmConfig { tau, tau_prime, params, capacities })
}

/// Scratch buffers for the optimal auction's inner loop.
#[derive(Debug, Default, Clone)]
pub(crate) struct MyersonScratch {
    marginal: Vec<f64>,
    order: Vec<usize>,
    pub(crate) winners: Vec<usize>,
    pub(crate) payments: Vec<f64>,
}

/// Allocates to the up-to-`k` highest strictly positive marginal revenues and charges
/// each winner its critical bid.
pub(crate) fn myerson_allocate(instance: &Instance, values: &[f64], s: &mut MyersonScratch) -> Result<()> {
    let k = instance.items();
    s.marginal.clear();
    for (d, &v) in instance.buyers().iter().zip(values) {
        s.marginal.push(d.marginal_revenue(v)?);
    }
    s.order.clear();
    s.order.extend(0..values.len());
    let m = &s.marginal;
    s.order.sort_unstable_by(|&a, &b| m[b].partial_cmp(&m[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    s.winners.clear();
    s.payments.clear();
    let slots = k.min(values.len());
    let competitor = s.order.get(k).map(|&j| m[j]).unwrap_or(f64::NEG_INFINITY);
    let level = competitor.max(0.0);
    for &i in &s.order[..slots] {
        if m[i] <= 0.0 {
            break;
        }
        let critical = instance.buyers()[i].min_bid_reaching(level);
        s.winners.push(i);
        s.payments.push(critical.min(values[i]));
    }
    Ok(())
}

/// Revenue-optimal auction for the instance's regular priors.
pub fn myerson_outcome(instance: &Instance, profile: &ValueProfile) -> Result<Outcome> {
    if profile.len() != instance.n() {
        return Err(invalid(format!("profile has {} values for {} buyers", profile.len(), instance.n())));
    }
    let mut scratch = MyersonScratch::default();
    myerson_allocate(instance, profile.values(), &mut scratch)?;
    let mut out = Outcome::empty(profile.len());
    for (&i, &p) in scratch.winners.iter().zip(&scratch.payments) {
        out.winners.insert(i);
        out.payments[i] = p;
    }
    Ok(out)
}

/// `Σ` over the top `k` buyers of `max(0, marginal revenue)`.
pub fn clipped_virtual_welfare(instance: &Instance, values: &[f64]) -> Result<f64> {
    let mut m = instance
        .buyers()
        .iter()
        .zip(values)
        .map(|(d, &v)| d.marginal_revenue(v).map(|x| x.max(0.0)))
        .collect::<Result<Vec<_>>>()?;
    sort_desc(&mut m);
    Ok(m.iter().take(instance.items()).sum())
}
