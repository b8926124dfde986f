//! Verification suites behind `auctions verify`.

use std::f64::consts::E;

use auctions_core::bounds::{
    check_anti_concentration, check_bucket_counts, check_characterization_oracle, check_lower_bound_arithmetic,
    check_main_guarantee_sweep, check_median_sandwich, check_mgtm_guarantee, check_mixture_upper_bound,
    check_multi_core, check_myerson_bracket, check_regularity, check_step_envelope, check_vcg_identity,
    estimate_median_rank, random_calibrated_vector, regular_tail_with_median, tail_grid, BernoulliVector, CheckConfig,
    CheckReport,
};
use auctions_core::characterization::{gtm_step_embedding, StepAllocation};
use auctions_core::instances::regular_corpus;
use auctions_core::rng::SeededRng;
use auctions_core::{Instance, McConfig};
use clap::ValueEnum;

use crate::error::{CliError, CliResult};

/// Replicates used by Monte-Carlo suites when none are given.
pub const DEFAULT_REPLICATES: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    #[value(name = "regularity")]
    Regularity,
    #[value(name = "median_sandwich")]
    MedianSandwich,
    #[value(name = "main_guarantee")]
    MainGuarantee,
    #[value(name = "multi_core")]
    MultiCore,
    #[value(name = "mgtm")]
    Mgtm,
    #[value(name = "anti_concentration")]
    AntiConcentration,
    #[value(name = "regular_tail")]
    RegularTail,
    #[value(name = "buckets")]
    Buckets,
    #[value(name = "lower_arithmetic")]
    LowerArithmetic,
    #[value(name = "mixture_bound")]
    MixtureBound,
    #[value(name = "characterization_oracle")]
    CharacterizationOracle,
}

impl Suite {
    /// Whether the suite draws anything at random: samples, a default corpus or random vectors.
    pub fn needs_seed(self, has_instance: bool) -> bool {
        match self {
            Suite::LowerArithmetic | Suite::MixtureBound => false,
            Suite::Regularity => !has_instance,
            _ => true,
        }
    }
}

/// Inputs shared by all suites.
#[derive(Debug, Clone)]
pub struct SuiteInput {
    /// A single instance from `--instance`; `None` selects the suite's default corpus.
    pub instance: Option<Instance>,
    pub taus: Vec<f64>,
    pub ks: Vec<usize>,
    pub t: Option<usize>,
    pub count: Option<usize>,
    pub replicates: u64,
    pub seed: u64,
    pub workers: usize,
    pub slack: f64,
}

impl SuiteInput {
    fn check_config(&self, offset: usize) -> CheckConfig {
        let mc = McConfig::new(self.replicates, self.seed.wrapping_add(offset as u64)).with_workers(self.workers);
        CheckConfig::new(mc).with_slack(self.slack)
    }

    /// The given instance, or `count` corpus instances with `min..=max` buyers and `items` items.
    fn instances(&self, count: usize, min: usize, max: usize, items: usize) -> Vec<Instance> {
        match &self.instance {
            Some(inst) => vec![inst.clone()],
            None => regular_corpus(self.seed, self.count.unwrap_or(count), min, max, items),
        }
    }

    fn taus_or(&self, default: &[f64]) -> Vec<f64> {
        if self.taus.is_empty() {
            default.to_vec()
        } else {
            self.taus.clone()
        }
    }

    fn ks_or(&self, default: &[usize]) -> Vec<usize> {
        if self.ks.is_empty() {
            default.to_vec()
        } else {
            self.ks.clone()
        }
    }

    /// Item counts to test: the instance's own when one is given.
    fn item_counts(&self, default: &[usize]) -> Vec<usize> {
        match &self.instance {
            Some(inst) if self.ks.is_empty() => vec![inst.items()],
            _ => self.ks_or(default),
        }
    }

    fn with_items(&self, inst: &Instance, k: usize) -> CliResult<Instance> {
        Ok(if inst.items() == k { inst.clone() } else { inst.with_items(k)? })
    }
}

pub fn run_suite(suite: Suite, input: &SuiteInput) -> CliResult<Vec<CheckReport>> {
    let mut reports = Vec::new();
    match suite {
        Suite::Regularity => {
            for inst in input.instances(20, 2, 6, 1) {
                for d in inst.buyers() {
                    reports.push(check_regularity(d)?);
                }
            }
        }
        Suite::MedianSandwich => {
            for (i, inst) in input.instances(20, 2, 6, 1).iter().enumerate() {
                reports.push(check_median_sandwich(inst, &input.check_config(i))?);
            }
        }
        Suite::MainGuarantee => {
            let taus = input.taus_or(&[1.5, 2.0, 4.0]);
            for (i, inst) in input.instances(20, 2, 6, 1).iter().enumerate() {
                reports.extend(check_main_guarantee_sweep(inst, &taus, &input.check_config(i))?);
            }
        }
        Suite::MultiCore => {
            let t = input.t.unwrap_or(2);
            let taus = input.taus_or(&[8.0]);
            for (i, inst) in input.instances(10, t + 1, t + 5, 1).iter().enumerate() {
                for &tau in &taus {
                    reports.push(check_multi_core(inst, t, tau, &input.check_config(i))?);
                }
            }
        }
        Suite::Mgtm => {
            let taus = input.taus_or(&[2.0]);
            for k in input.item_counts(&[2, 4]) {
                for (i, inst) in input.instances(10, k + 1, k + 6, k).iter().enumerate() {
                    let inst = input.with_items(inst, k)?;
                    let cfg = input.check_config(i);
                    reports.push(check_vcg_identity(&inst, &cfg)?);
                    reports.push(check_myerson_bracket(&inst, &cfg)?);
                    for &tau in &taus {
                        reports.push(check_mgtm_guarantee(&inst, tau, &cfg)?);
                    }
                }
            }
        }
        Suite::AntiConcentration => {
            let p = 1.0 - 2f64.powf(-1.0 / 3.0);
            reports.push(check_anti_concentration(&BernoulliVector::new(vec![p; 3], 1)?)?);
            let mut rng = SeededRng::new(input.seed);
            for _ in 0..input.count.unwrap_or(100) {
                reports.push(check_anti_concentration(&random_calibrated_vector(&mut rng, 2, 40)?)?);
            }
        }
        Suite::RegularTail => {
            for (i, inst) in input.instances(10, 2, 6, 1).iter().enumerate() {
                let t = input.t.unwrap_or(1 + i % inst.n());
                let cfg = input.check_config(i);
                let s_t = estimate_median_rank(inst, t, &cfg.mc)?;
                reports.push(regular_tail_with_median(inst, t, &tail_grid(s_t, 50), s_t, cfg.slack)?);
            }
        }
        Suite::Buckets => {
            for k in input.item_counts(&[2, 4]) {
                for (i, inst) in input.instances(10, k + 1, 8 * k, k).iter().enumerate() {
                    reports.push(check_bucket_counts(inst, k, &input.check_config(i))?);
                }
            }
        }
        Suite::LowerArithmetic => {
            for tau in input.taus_or(&[3.0, 4.0, 8.0, 100.0]) {
                reports.push(check_lower_bound_arithmetic(tau)?);
            }
        }
        Suite::MixtureBound => {
            for k in input.ks_or(&[2, 4, 9, 16, 100]) {
                reports.push(check_mixture_upper_bound(k)?);
            }
        }
        Suite::CharacterizationOracle => {
            let corpus = input.instances(10, 2, 2, 1);
            for (alpha, c) in [(E, 1), (E * E, 2)] {
                for (i, inst) in corpus.iter().enumerate() {
                    reports.push(check_characterization_oracle(inst, alpha, c, &input.check_config(i).mc)?);
                }
                reports.push(check_step_envelope(&gtm_step_embedding(alpha, c)?, 1000, input.seed)?);
            }
            reports.push(check_step_envelope(&StepAllocation::new(vec![2.0, 0.6])?, 1000, input.seed)?);
        }
    }
    if reports.is_empty() {
        return Err(CliError::Usage("the suite produced no checks".into()));
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input() -> SuiteInput {
        SuiteInput {
            instance: None,
            taus: Vec::new(),
            ks: Vec::new(),
            t: None,
            count: None,
            replicates: 2000,
            seed: 1,
            workers: 1,
            slack: 0.02,
        }
    }

    #[test]
    fn exact_suites_need_no_seed() {
        assert!(!Suite::LowerArithmetic.needs_seed(false));
        assert!(!Suite::MixtureBound.needs_seed(false));
        assert!(!Suite::Regularity.needs_seed(true));
        assert!(Suite::Regularity.needs_seed(false));
        assert!(Suite::MainGuarantee.needs_seed(true));
    }

    #[test]
    fn default_lists() {
        let reports = run_suite(Suite::MixtureBound, &input()).unwrap();
        assert_eq!(reports.len(), 5);
        let reports = run_suite(Suite::LowerArithmetic, &input()).unwrap();
        assert_eq!(reports.len(), 4);
        assert!(reports.iter().all(|r| r.holds));
    }

    #[test]
    fn count_overrides_corpus_size() {
        let small = SuiteInput { count: Some(3), ..input() };
        assert_eq!(run_suite(Suite::MedianSandwich, &small).unwrap().len(), 3);
        let vectors = SuiteInput { count: Some(7), ..input() };
        assert_eq!(run_suite(Suite::AntiConcentration, &vectors).unwrap().len(), 8);
    }
}
