//! Reproducible Monte-Carlo estimation of revenues and order-statistic medians.
//!
//! Replicate `r` draws its profile from a counter-based stream keyed by the seed,
//! so results do not depend on how replicates are split across workers. Moments
//! are accumulated per fixed-size block and merged in block order.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rayon::prelude::*;

use crate::characterization::{step_profile_revenue, StepAllocation};
use crate::dist::Family;
use crate::error::{invalid, precondition, Error, Result};
use crate::instances::{two_buyer_point_opponent_opt, Instance, MixedInstance};
use crate::mechanisms::{
    expected_threshold_revenue_sorted, gtm_spec, mgtm_config, myerson_allocate, sort_desc, threshold_revenue_sorted,
    MyersonScratch, ThresholdEntry, ThresholdSpec,
};
use crate::rng::CounterStream;

/// Replicates per accumulation block; fixed so merges are independent of the worker count.
pub const BLOCK_SIZE: u64 = 4096;

/// Smallest replicate count accepted for median estimation.
pub const MIN_MEDIAN_REPLICATES: u64 = 1000;

/// Mechanisms the estimator can evaluate.
#[derive(Debug, Clone, PartialEq)]
pub enum Mechanism {
    Spa,
    Vcg { k: usize },
    Myerson,
    Gtm { alpha: f64, c: u32 },
    GtmT { alpha: f64, c: u32, t: usize },
    Mgtm { tau: f64 },
    Threshold { spec: ThresholdSpec, t: usize },
    Step { gammas: Vec<f64> },
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mechanism::Spa => write!(f, "spa"),
            Mechanism::Vcg { k } => write!(f, "vcg:{k}"),
            Mechanism::Myerson => write!(f, "myerson"),
            Mechanism::Gtm { alpha, c } => write!(f, "gtm:{alpha}:{c}"),
            Mechanism::GtmT { alpha, c, t } => write!(f, "gtm_t:{alpha}:{c}:{t}"),
            Mechanism::Mgtm { tau } => write!(f, "mgtm:{tau}"),
            Mechanism::Threshold { spec, t } => {
                let menu: Vec<String> = spec.entries().iter().map(|e| format!("{}@{}", e.lambda, e.weight)).collect();
                write!(f, "threshold:{t}:{}", menu.join(","))
            }
            Mechanism::Step { gammas } => {
                let g: Vec<String> = gammas.iter().map(f64::to_string).collect();
                write!(f, "step:{}", g.join(","))
            }
        }
    }
}

fn parse_num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("cannot read {what} from {s:?}")))
}

impl FromStr for Mechanism {
    type Err = Error;

    /// Accepts `spa`, `vcg:K`, `myerson`, `gtm:ALPHA:C`, `gtm_t:ALPHA:C:T`, `mgtm:TAU`,
    /// `threshold:T:L@W,L@W,...` and `step:G1,G2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().splitn(2, ':').collect();
        let name = parts[0].to_ascii_lowercase();
        let rest = parts.get(1).copied();
        let fields = |n: usize| -> Result<Vec<&str>> {
            let f: Vec<&str> = rest.map(|r| r.split(':').collect()).unwrap_or_default();
            if f.len() != n {
                return Err(Error::Parse(format!("mechanism {name:?} takes {n} ':'-separated parameters")));
            }
            Ok(f)
        };
        match name.as_str() {
            "spa" => {
                fields(0)?;
                Ok(Mechanism::Spa)
            }
            "myerson" => {
                fields(0)?;
                Ok(Mechanism::Myerson)
            }
            "vcg" => Ok(Mechanism::Vcg { k: parse_num(fields(1)?[0], "item count")? }),
            "gtm" => {
                let f = fields(2)?;
                Ok(Mechanism::Gtm { alpha: parse_num(f[0], "alpha")?, c: parse_num(f[1], "c")? })
            }
            "gtm_t" => {
                let f = fields(3)?;
                Ok(Mechanism::GtmT {
                    alpha: parse_num(f[0], "alpha")?,
                    c: parse_num(f[1], "c")?,
                    t: parse_num(f[2], "capacity")?,
                })
            }
            "mgtm" => Ok(Mechanism::Mgtm { tau: parse_num(fields(1)?[0], "tau")? }),
            "threshold" => {
                let rest = rest.ok_or_else(|| Error::Parse("threshold needs a capacity and a menu".into()))?;
                let (t, menu) = rest.split_once(':').ok_or_else(|| Error::Parse("threshold takes T:L@W,...".into()))?;
                let entries = menu
                    .split(',')
                    .map(|item| {
                        let (l, w) = item
                            .split_once('@')
                            .ok_or_else(|| Error::Parse(format!("menu entry {item:?} is not L@W")))?;
                        Ok(ThresholdEntry { lambda: parse_num(l, "threshold")?, weight: parse_num(w, "weight")? })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Mechanism::Threshold { spec: ThresholdSpec::new(entries)?, t: parse_num(t, "capacity")? })
            }
            "step" => {
                let rest = rest.ok_or_else(|| Error::Parse("step needs a list of thresholds".into()))?;
                let gammas = rest.split(',').map(|g| parse_num(g, "step threshold")).collect::<Result<Vec<f64>>>()?;
                StepAllocation::new(gammas.clone())?;
                Ok(Mechanism::Step { gammas })
            }
            _ => Err(Error::Parse(format!("unknown mechanism {s:?}"))),
        }
    }
}

/// Replicate count, seed and worker count for one Monte-Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub replicates: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn new(replicates: u64, seed: u64) -> Self {
        Self { replicates, seed, workers: 1 }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        Self { workers, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevenueEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub replicates: u64,
    pub seed: u64,
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / total as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.count as f64 * w;
        self.count = total;
    }

    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        (self.m2.max(0.0) / (n - 1.0) / n).sqrt()
    }
}

fn block_ranges(range: Range<u64>) -> Vec<Range<u64>> {
    let mut out = Vec::new();
    let mut start = range.start;
    while start < range.end {
        let end = (start + BLOCK_SIZE).min(range.end);
        out.push(start..end);
        start = end;
    }
    out
}

/// Maps `f` over the fixed blocks of `range`, returning results in block order.
pub(crate) fn map_blocks<T, F>(range: Range<u64>, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Range<u64>) -> Result<T> + Sync,
{
    if workers == 0 {
        return Err(invalid("worker count must be positive"));
    }
    let blocks = block_ranges(range);
    if workers == 1 {
        return blocks.into_iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| blocks.into_par_iter().map(&f).collect())
}

/// Mean and standard error of `f(replicate)` over `range`.
pub(crate) fn mean_over<F>(range: Range<u64>, workers: usize, f: F) -> Result<Moments>
where
    F: Fn(u64, &mut Scratch) -> Result<f64> + Sync,
{
    let blocks = map_blocks(range, workers, |block| {
        let mut scratch = Scratch::default();
        let mut m = Moments::default();
        for r in block {
            m.push(f(r, &mut scratch)?);
        }
        Ok(m)
    })?;
    let mut total = Moments::default();
    for b in &blocks {
        total.merge(b);
    }
    Ok(total)
}

/// Per-worker buffers reused across replicates.
#[derive(Debug, Default)]
pub(crate) struct Scratch {
    pub(crate) values: Vec<f64>,
    pub(crate) sorted: Vec<f64>,
    myerson: MyersonScratch,
}

/// Fills `values` with one profile of `instance` drawn from `stream`.
pub(crate) fn draw_profile(instance: &Instance, stream: &CounterStream, values: &mut Vec<f64>) {
    values.clear();
    for (i, d) in instance.buyers().iter().enumerate() {
        values.push(d.quantile_unchecked(stream.uniform_at(i as u64 + 1)));
    }
}

/// Anything that yields one value profile per replicate.
pub trait ProfileSource: Sync {
    fn n(&self) -> usize;
    fn items(&self) -> usize;
    /// Every instance a profile can come from.
    fn component_instances(&self) -> Vec<&Instance>;
    /// Draws a profile into `values` and returns the instance it came from.
    fn draw<'a>(&'a self, stream: &CounterStream, values: &mut Vec<f64>) -> &'a Instance;
}

impl ProfileSource for Instance {
    fn n(&self) -> usize {
        Instance::n(self)
    }

    fn items(&self) -> usize {
        Instance::items(self)
    }

    fn component_instances(&self) -> Vec<&Instance> {
        vec![self]
    }

    fn draw<'a>(&'a self, stream: &CounterStream, values: &mut Vec<f64>) -> &'a Instance {
        draw_profile(self, stream, values);
        self
    }
}

impl ProfileSource for MixedInstance {
    fn n(&self) -> usize {
        MixedInstance::n(self)
    }

    fn items(&self) -> usize {
        MixedInstance::items(self)
    }

    fn component_instances(&self) -> Vec<&Instance> {
        self.components().iter().map(|c| &c.0).collect()
    }

    /// The component is chosen by the uniform at position `n + 1`.
    fn draw<'a>(&'a self, stream: &CounterStream, values: &mut Vec<f64>) -> &'a Instance {
        let j = self.component_for(stream.uniform_at(self.n() as u64 + 1));
        let inst = &self.components()[j].0;
        draw_profile(inst, stream, values);
        inst
    }
}

/// A mechanism with its menus precomputed for repeated evaluation.
#[derive(Debug, Clone)]
enum Prepared {
    Spa,
    Vcg(usize),
    Myerson,
    Threshold { spec: ThresholdSpec, capacities: Vec<usize> },
    Step(StepAllocation),
}

impl Mechanism {
    /// Checks preconditions against `n` buyers and `k` items, and builds the evaluator.
    fn prepare(&self, source: &dyn ProfileSource) -> Result<Prepared> {
        let n = source.n();
        let need = |min: usize, what: &str| -> Result<()> {
            if n < min {
                Err(precondition(format!("{what} needs at least {min} buyers, instance has {n}")))
            } else {
                Ok(())
            }
        };
        let capacity = |t: usize| -> Result<()> {
            if t == 0 {
                return Err(invalid("capacity must be positive"));
            }
            need(t + 1, &format!("capacity {t}"))
        };
        Ok(match self {
            Mechanism::Spa => {
                need(2, "the second-price auction")?;
                Prepared::Spa
            }
            Mechanism::Vcg { k } => {
                if *k == 0 {
                    return Err(invalid("VCG needs at least one item"));
                }
                need(k + 1, &format!("VCG with {k} items"))?;
                Prepared::Vcg(*k)
            }
            Mechanism::Myerson => {
                let comps = source.component_instances();
                if comps.len() > 1 {
                    return Err(Error::Unsupported(
                        "the optimal auction of a mixture is not the per-component optimum".into(),
                    ));
                }
                for d in comps[0].buyers() {
                    if matches!(d.family(), Family::FiniteSupport { .. }) {
                        return Err(Error::Unsupported(
                            "optimal auction needs analytic regular priors; use the closed form or discrete optimum"
                                .into(),
                        ));
                    }
                }
                Prepared::Myerson
            }
            Mechanism::Gtm { alpha, c } => {
                need(2, "the single-item threshold mechanism")?;
                Prepared::Threshold { spec: gtm_spec(*alpha, *c)?, capacities: vec![1] }
            }
            Mechanism::GtmT { alpha, c, t } => {
                capacity(*t)?;
                Prepared::Threshold { spec: gtm_spec(*alpha, *c)?, capacities: vec![*t] }
            }
            Mechanism::Mgtm { tau } => {
                let cfg = mgtm_config(*tau, source.items())?;
                need(source.items() + 1, &format!("the mixture over capacities up to {}", source.items()))?;
                Prepared::Threshold { spec: cfg.params.spec(), capacities: cfg.capacities }
            }
            Mechanism::Threshold { spec, t } => {
                capacity(*t)?;
                Prepared::Threshold { spec: spec.clone(), capacities: vec![*t] }
            }
            Mechanism::Step { gammas } => {
                if n != 2 {
                    return Err(precondition(format!("step mechanisms are defined for two buyers, got {n}")));
                }
                let sa = StepAllocation::new(gammas.clone())?;
                if !sa.is_feasible() {
                    return Err(precondition("step thresholds violate feasibility"));
                }
                Prepared::Step(sa)
            }
        })
    }
}

impl Prepared {
    /// Revenue on one profile; `u` is the mechanism's own uniform when thresholds are sampled.
    fn revenue(&self, instance: &Instance, scratch: &mut Scratch, sampled_uniform: Option<f64>) -> Result<f64> {
        let Scratch { values, sorted, myerson } = scratch;
        let sort = |sorted: &mut Vec<f64>| {
            sorted.clear();
            sorted.extend_from_slice(values);
            sort_desc(sorted);
        };
        Ok(match self {
            Prepared::Spa => {
                sort(sorted);
                sorted[1]
            }
            Prepared::Vcg(k) => {
                sort(sorted);
                *k as f64 * sorted[*k]
            }
            Prepared::Myerson => {
                myerson_allocate(instance, values, myerson)?;
                myerson.payments.iter().sum()
            }
            Prepared::Threshold { spec, capacities } => {
                sort(sorted);
                match sampled_uniform {
                    None => {
                        let total: f64 =
                            capacities.iter().map(|&t| expected_threshold_revenue_sorted(sorted, spec, t)).sum();
                        total / capacities.len() as f64
                    }
                    Some(u) => {
                        let scaled = u * capacities.len() as f64;
                        let j = (scaled.floor() as usize).min(capacities.len() - 1);
                        let entry = spec.select(scaled - j as f64);
                        threshold_revenue_sorted(sorted, entry.lambda, capacities[j])
                    }
                }
            }
            Prepared::Step(sa) => step_profile_revenue(sa, values[0], values[1]),
        })
    }
}

/// How mechanism randomness enters the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdDraw {
    /// Average over the threshold menu exactly on every profile.
    #[default]
    Integrated,
    /// Draw the threshold from the replicate's mechanism uniform.
    Sampled,
}

/// Monte-Carlo revenue of `mechanism` on an instance or mixture.
pub fn estimate_revenue<S: ProfileSource>(
    source: &S,
    mechanism: &Mechanism,
    cfg: &McConfig,
) -> Result<RevenueEstimate> {
    estimate_revenue_with(source, mechanism, cfg, ThresholdDraw::Integrated)
}

pub fn estimate_revenue_with<S: ProfileSource>(
    source: &S,
    mechanism: &Mechanism,
    cfg: &McConfig,
    draw: ThresholdDraw,
) -> Result<RevenueEstimate> {
    if cfg.replicates < 2 {
        return Err(invalid("at least two replicates are needed for a standard error"));
    }
    let prepared = mechanism.prepare(source)?;
    let m = mean_over(0..cfg.replicates, cfg.workers, |r, scratch| {
        let stream = CounterStream::new(cfg.seed, r);
        let mut values = std::mem::take(&mut scratch.values);
        let instance = source.draw(&stream, &mut values);
        scratch.values = values;
        let u = match draw {
            ThresholdDraw::Integrated => None,
            ThresholdDraw::Sampled => Some(stream.uniform_at(0)),
        };
        prepared.revenue(instance, scratch, u)
    })?;
    Ok(RevenueEstimate { mean: m.mean, stderr: m.stderr(), replicates: cfg.replicates, seed: cfg.seed })
}

/// Monte-Carlo mean of the `rank`-th largest value (1-based).
pub fn estimate_order_stat_mean(instance: &Instance, rank: usize, cfg: &McConfig) -> Result<RevenueEstimate> {
    if rank == 0 || rank > instance.n() {
        return Err(invalid(format!("rank {rank} outside 1..={}", instance.n())));
    }
    if cfg.replicates < 2 {
        return Err(invalid("at least two replicates are needed for a standard error"));
    }
    let m = mean_over(0..cfg.replicates, cfg.workers, |r, scratch| {
        let stream = CounterStream::new(cfg.seed, r);
        draw_profile(instance, &stream, &mut scratch.values);
        scratch.sorted.clear();
        scratch.sorted.extend_from_slice(&scratch.values);
        sort_desc(&mut scratch.sorted);
        Ok(scratch.sorted[rank - 1])
    })?;
    Ok(RevenueEstimate { mean: m.mean, stderr: m.stderr(), replicates: cfg.replicates, seed: cfg.seed })
}

/// Exact revenue where a closed form is catalogued, else `None`.
///
/// Covered: second-price and optimal revenue of two i.i.d. truncated equal-revenue buyers,
/// any mechanism on all-point-mass instances, and the optimal auction for a finite-support
/// first buyer against a point-valued second buyer.
pub fn closed_form_revenue(instance: &Instance, mechanism: &Mechanism) -> Option<f64> {
    if let Some(values) = instance.point_profile() {
        let prepared = mechanism.prepare(instance).ok()?;
        let mut scratch = Scratch { values, ..Scratch::default() };
        return prepared.revenue(instance, &mut scratch, None).ok();
    }
    let buyers = instance.buyers();
    if instance.n() != 2 || instance.items() != 1 {
        return None;
    }
    match (buyers[0].family(), buyers[1].family(), mechanism) {
        (Family::EqualRevenueTruncated { a }, Family::EqualRevenueTruncated { a: b }, m) if a == b => match m {
            Mechanism::Spa => Some(a / (a + 1.0)),
            Mechanism::Myerson => Some(a * (2.0 * a + 1.0) / ((a + 1.0) * (a + 1.0))),
            _ => None,
        },
        (Family::FiniteSupport { .. }, Family::PointMass { value }, Mechanism::Myerson) => {
            two_buyer_point_opponent_opt(&buyers[0], *value).ok().map(|o| o.revenue)
        }
        _ => None,
    }
}

/// Empirical medians of order statistics, and of the top value among the buyers
/// outside the first `t` after reindexing.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStatSummary {
    /// Requested ranks (1-based), ascending.
    pub ranks: Vec<usize>,
    /// `s[i]` is the median of the `ranks[i]`-th largest value.
    pub s: Vec<f64>,
    /// Median of `max` over reindexed buyers `t+1..n`, when `t` was given.
    pub u_next: Option<f64>,
    /// Buyer indices in nonincreasing order of `Pr[v_i >= s_t]`, when `t` was given.
    pub buyer_order: Option<Vec<usize>>,
    pub replicates: u64,
    pub seed: u64,
}

impl OrderStatSummary {
    /// Median for `rank`, if it was requested.
    pub fn median(&self, rank: usize) -> Option<f64> {
        self.ranks.iter().position(|&r| r == rank).map(|i| self.s[i])
    }
}

/// Lower median: the `⌊(len-1)/2⌋`-th smallest sample.
pub fn lower_median(samples: &mut [f64]) -> f64 {
    let mid = (samples.len() - 1) / 2;
    *samples.select_nth_unstable_by(mid, f64::total_cmp).1
}

/// Samples `f(replicate)` into one column per output slot, replicate-ordered.
fn collect_columns<F>(range: Range<u64>, width: usize, workers: usize, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(u64, &mut Scratch, &mut [f64]) + Sync,
{
    let blocks = map_blocks(range.clone(), workers, |block| {
        let mut scratch = Scratch::default();
        let mut row = vec![0.0; width];
        let mut cols = vec![Vec::with_capacity((block.end - block.start) as usize); width];
        for r in block {
            f(r, &mut scratch, &mut row);
            for (c, &x) in cols.iter_mut().zip(&row) {
                c.push(x);
            }
        }
        Ok(cols)
    })?;
    let mut out = vec![Vec::with_capacity((range.end - range.start) as usize); width];
    for b in blocks {
        for (o, c) in out.iter_mut().zip(b) {
            o.extend(c);
        }
    }
    Ok(out)
}

/// Medians of the requested order statistics and, if `t` is given, of the largest value
/// among buyers ranked after the first `t` by `Pr[v_i >= ŝ_t]`.
///
/// With `t`, the first half of the replicates estimates the medians and the second
/// half, after reindexing, estimates the tail maximum.
pub fn estimate_order_stats(
    instance: &Instance,
    ranks: &[usize],
    t: Option<usize>,
    cfg: &McConfig,
) -> Result<OrderStatSummary> {
    let n = instance.n();
    if ranks.is_empty() {
        return Err(invalid("at least one rank is required"));
    }
    if let Some(&r) = ranks.iter().find(|&&r| r == 0 || r > n) {
        return Err(invalid(format!("rank {r} outside 1..={n}")));
    }
    if cfg.replicates < MIN_MEDIAN_REPLICATES {
        return Err(invalid(format!("median estimation needs at least {MIN_MEDIAN_REPLICATES} replicates")));
    }
    if let Some(t) = t {
        if t == 0 || t >= n {
            return Err(precondition(format!("t = {t} must lie in 1..{n}")));
        }
    }
    let mut wanted: Vec<usize> = ranks.to_vec();
    if let Some(t) = t {
        wanted.push(t);
    }
    wanted.sort_unstable();
    wanted.dedup();

    let first_end = if t.is_some() { cfg.replicates / 2 } else { cfg.replicates };
    let mut cols = collect_columns(0..first_end, wanted.len(), cfg.workers, |r, scratch, row| {
        let stream = CounterStream::new(cfg.seed, r);
        draw_profile(instance, &stream, &mut scratch.values);
        sort_desc(&mut scratch.values);
        for (slot, &rank) in row.iter_mut().zip(&wanted) {
            *slot = scratch.values[rank - 1];
        }
    })?;
    let medians: Vec<f64> = cols.iter_mut().map(|c| lower_median(c)).collect();
    let lookup = |rank: usize| medians[wanted.iter().position(|&w| w == rank).expect("rank requested")];

    let mut sorted_ranks = ranks.to_vec();
    sorted_ranks.sort_unstable();
    sorted_ranks.dedup();
    let s: Vec<f64> = sorted_ranks.iter().map(|&r| lookup(r)).collect();

    let (u_next, buyer_order) = match t {
        None => (None, None),
        Some(t) => {
            let order = order_by_tail_mass(instance, lookup(t));
            let tail: Vec<usize> = order[t..].to_vec();
            let mut col = collect_columns(first_end..cfg.replicates, 1, cfg.workers, |r, scratch, row| {
                let stream = CounterStream::new(cfg.seed, r);
                draw_profile(instance, &stream, &mut scratch.values);
                row[0] = tail.iter().map(|&i| scratch.values[i]).fold(0.0, f64::max);
            })?;
            (Some(lower_median(&mut col[0])), Some(order))
        }
    };
    Ok(OrderStatSummary { ranks: sorted_ranks, s, u_next, buyer_order, replicates: cfg.replicates, seed: cfg.seed })
}

/// Buyer indices in nonincreasing order of `Pr[v_i >= x]`, lowest index first among equals.
pub fn order_by_tail_mass(instance: &Instance, x: f64) -> Vec<usize> {
    let mass: Vec<f64> = instance.buyers().iter().map(|d| d.prob_at_least(x)).collect();
    let mut order: Vec<usize> = (0..instance.n()).collect();
    order.sort_by(|&a, &b| mass[b].total_cmp(&mass[a]).then(a.cmp(&b)));
    order
}

/// Bracket on optimal revenue from estimated order-statistic medians.
#[derive(Debug, Clone, PartialEq)]
pub struct MyersonBracket {
    pub lower: f64,
    pub upper: f64,
    /// `(rank, ŝ_rank)` for ranks `1, 2, 4, ..., k`; ranks above `n` have median 0.
    pub medians: Vec<(usize, f64)>,
}

/// `(½ŝ₁, (1 + 2 ln 2)ŝ₁)` for one item; for `k > 1` items the upper end is `12 Σ_j 2^j ŝ_{2^j}`.
pub fn myerson_upper_lower_bracket(instance: &Instance, cfg: &McConfig) -> Result<MyersonBracket> {
    let k = instance.items();
    if !k.is_power_of_two() {
        return Err(invalid(format!("item count {k} must be a power of two")));
    }
    let ranks: Vec<usize> = (0..=k.trailing_zeros()).map(|j| 1usize << j).collect();
    let present: Vec<usize> = ranks.iter().copied().filter(|&r| r <= instance.n()).collect();
    let summary = estimate_order_stats(instance, &present, None, cfg)?;
    let medians: Vec<(usize, f64)> = ranks.iter().map(|&r| (r, summary.median(r).unwrap_or(0.0))).collect();
    let s1 = medians[0].1;
    let upper = if k == 1 {
        (1.0 + 2.0 * std::f64::consts::LN_2) * s1
    } else {
        12.0 * medians.iter().map(|&(r, s)| r as f64 * s).sum::<f64>()
    };
    Ok(MyersonBracket { lower: 0.5 * s1, upper, medians })
}
