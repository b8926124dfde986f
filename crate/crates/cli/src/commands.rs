//! The four subcommands.

use std::fs;
use std::io::Write;
use std::path::Path;

use auctions_core::bounds::{revenue_figure, CheckReport, Relation, Verdict};
use auctions_core::estimation::estimate_revenue;
use auctions_core::instances::{
    make_equal_revenue_pair, make_geometric_point_family, make_mixture_instance, regular_corpus,
};
use auctions_core::mechanisms::{alpha_for_tau, mgtm_config};
use auctions_core::{Instance, McConfig, Mechanism, MixedInstance};
use clap::ValueEnum;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::format::{fmt_g, fmt_opt};
use crate::suites::{run_suite, Suite, SuiteInput, DEFAULT_REPLICATES};

pub const ESTIMATE_HEADER: [&str; 9] =
    ["instance", "mechanism", "tau", "alpha", "c", "replicates", "seed", "mean", "stderr"];
pub const FRONTIER_HEADER: [&str; 9] =
    ["tau", "alpha", "c", "gtm", "myerson", "spa", "gtm_over_myerson", "gtm_over_spa", "seed"];
pub const VERIFY_HEADER: [&str; 6] = ["check", "verdict", "lhs", "rhs", "slack", "details"];

/// Either kind of instance document.
enum Loaded {
    Plain(Instance),
    Mixed(MixedInstance),
}

impl Loaded {
    fn items(&self) -> usize {
        match self {
            Loaded::Plain(i) => i.items(),
            Loaded::Mixed(m) => m.items(),
        }
    }
}

fn load_any(path: &Path) -> CliResult<Loaded> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read instance {}: {e}", path.display())))?;
    match Instance::from_toml(&text) {
        Ok(inst) => Ok(Loaded::Plain(inst)),
        Err(plain) => MixedInstance::from_toml(&text)
            .map(Loaded::Mixed)
            .map_err(|_| CliError::Usage(format!("instance {}: {plain}", path.display()))),
    }
}

fn load_instance(path: &Path) -> CliResult<Instance> {
    Ok(Instance::load(path)?)
}

/// Writes CSV rows to `--out`, or to `stdout` when no path is set.
fn write_csv(out: Option<&Path>, stdout: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    match out {
        Some(path) => fs::write(path, buf)?,
        None => stdout.write_all(&buf)?,
    }
    Ok(())
}

/// A mechanism name resolved against `--tau` and the instance's item count.
struct Resolved {
    mechanism: Mechanism,
    tau: Option<f64>,
    alpha: Option<f64>,
    c: Option<u32>,
}

fn resolve_mechanism(name: &str, tau: Option<f64>, items: usize) -> CliResult<Resolved> {
    let plain = |mechanism| Resolved { mechanism, tau: None, alpha: None, c: None };
    let need_tau = || tau.ok_or_else(|| CliError::Usage(format!("mechanism {name:?} needs --tau")));
    match name.trim().to_ascii_lowercase().as_str() {
        "gtm" => {
            let tau = need_tau()?;
            let p = alpha_for_tau(tau)?;
            Ok(Resolved {
                mechanism: Mechanism::Gtm { alpha: p.alpha, c: p.c },
                tau: Some(tau),
                alpha: Some(p.alpha),
                c: Some(p.c),
            })
        }
        "mgtm" => {
            let tau = need_tau()?;
            let p = mgtm_config(tau, items)?.params;
            Ok(Resolved { mechanism: Mechanism::Mgtm { tau }, tau: Some(tau), alpha: Some(p.alpha), c: Some(p.c) })
        }
        "vcg" => Ok(plain(Mechanism::Vcg { k: items })),
        _ => {
            let mechanism: Mechanism = name.parse()?;
            Ok(match mechanism {
                Mechanism::Gtm { alpha, c } | Mechanism::GtmT { alpha, c, .. } => {
                    Resolved { mechanism, tau: None, alpha: Some(alpha), c: Some(c) }
                }
                Mechanism::Mgtm { tau } => {
                    let p = mgtm_config(tau, items)?.params;
                    Resolved { mechanism, tau: Some(tau), alpha: Some(p.alpha), c: Some(p.c) }
                }
                other => plain(other),
            })
        }
    }
}

fn single_tau(cfg: &ExperimentConfig) -> CliResult<Option<f64>> {
    match cfg.taus.as_slice() {
        [] => Ok(None),
        [t] => Ok(Some(*t)),
        _ => Err(CliError::Usage("estimate takes a single --tau".into())),
    }
}

fn mc_config(cfg: &ExperimentConfig, seed: u64) -> McConfig {
    McConfig::new(cfg.replicates_or(DEFAULT_REPLICATES), seed).with_workers(cfg.workers)
}

pub fn estimate(cfg: &ExperimentConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let path = cfg.require_instance()?;
    let name = cfg.mechanism.as_deref().ok_or_else(|| CliError::Usage("--mechanism is required".into()))?;
    let seed = cfg.require_seed()?;
    let loaded = load_any(path)?;
    let resolved = resolve_mechanism(name, single_tau(cfg)?, loaded.items())?;
    let mc = mc_config(cfg, seed);
    let est = match &loaded {
        Loaded::Plain(inst) => estimate_revenue(inst, &resolved.mechanism, &mc)?,
        Loaded::Mixed(mixed) => estimate_revenue(mixed, &resolved.mechanism, &mc)?,
    };
    let row = vec![
        path.display().to_string(),
        resolved.mechanism.to_string(),
        fmt_opt(resolved.tau),
        fmt_opt(resolved.alpha),
        resolved.c.map(|c| c.to_string()).unwrap_or_default(),
        est.replicates.to_string(),
        est.seed.to_string(),
        fmt_g(est.mean),
        fmt_g(est.stderr),
    ];
    write_csv(cfg.output_path.as_deref(), stdout, &ESTIMATE_HEADER, &[row])
}

/// Extra verify flags that have no place in the shared experiment settings.
#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub ks: Vec<usize>,
    pub t: Option<usize>,
    pub count: Option<usize>,
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Fails => "fails",
        Verdict::ConditionsNotMet => "conditions_not_met",
    }
}

fn relation_symbol(r: Relation) -> &'static str {
    match r {
        Relation::AtLeast => ">=",
        Relation::AtMost => "<=",
        Relation::Exceeds => ">",
        Relation::Within { .. } => "within",
    }
}

fn report_row(r: &CheckReport) -> Vec<String> {
    let details = match r.relation {
        Relation::Within { lower } => format!("lower={}; {}", fmt_g(lower), r.details),
        rel => format!("{} {}", relation_symbol(rel), r.details),
    };
    vec![
        r.name.clone(),
        verdict_name(r.verdict).into(),
        fmt_g(r.lhs),
        fmt_g(r.rhs),
        fmt_g(r.slack_used),
        details.trim_end().to_string(),
    ]
}

/// Runs a suite and returns whether every check holds.
pub fn verify(suite: Suite, opts: &VerifyOptions, cfg: &ExperimentConfig, stdout: &mut dyn Write) -> CliResult<bool> {
    let instance = cfg.instance_path.as_deref().map(load_instance).transpose()?;
    let seed = if suite.needs_seed(instance.is_some()) { cfg.require_seed()? } else { cfg.seed.unwrap_or(0) };
    let input = SuiteInput {
        instance,
        taus: cfg.taus.clone(),
        ks: opts.ks.clone(),
        t: opts.t,
        count: opts.count,
        replicates: cfg.replicates_or(DEFAULT_REPLICATES),
        seed,
        workers: cfg.workers,
        slack: cfg.slack,
    };
    let reports = run_suite(suite, &input)?;
    for r in &reports {
        writeln!(stdout, "{r}")?;
    }
    let holds = reports.iter().filter(|r| r.verdict == Verdict::Holds).count();
    let fails = reports.iter().filter(|r| r.verdict == Verdict::Fails).count();
    let unmet = reports.len() - holds - fails;
    let name = suite.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    writeln!(stdout, "{name}: {} checks, {holds} hold, {fails} fail, {unmet} conditions not met", reports.len())?;
    if let Some(path) = cfg.output_path.as_deref() {
        let rows: Vec<Vec<String>> = reports.iter().map(report_row).collect();
        write_csv(Some(path), stdout, &VERIFY_HEADER, &rows)?;
    }
    Ok(holds == reports.len())
}

pub fn frontier(cfg: &ExperimentConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let path = cfg.require_instance()?;
    if cfg.taus.is_empty() {
        return Err(CliError::Usage("frontier needs a nonempty --tau list".into()));
    }
    let instance = load_instance(path)?;
    if instance.items() != 1 {
        return Err(CliError::Precondition(format!(
            "frontier needs a single-item instance, got {} items",
            instance.items()
        )));
    }
    // Point-mass instances are evaluated exactly and need no seed.
    let seed = if instance.point_profile().is_some() { cfg.seed } else { Some(cfg.require_seed()?) };
    let mc = mc_config(cfg, seed.unwrap_or(0));
    let myerson = revenue_figure(&instance, &Mechanism::Myerson, &mc)?;
    let spa = revenue_figure(&instance, &Mechanism::Spa, &mc)?;
    let mut rows = Vec::with_capacity(cfg.taus.len());
    for &tau in &cfg.taus {
        let p = alpha_for_tau(tau)?;
        let gtm = revenue_figure(&instance, &Mechanism::Gtm { alpha: p.alpha, c: p.c }, &mc)?;
        let exact = gtm.exact && myerson.exact && spa.exact;
        rows.push(vec![
            fmt_g(tau),
            fmt_g(p.alpha),
            p.c.to_string(),
            fmt_g(gtm.value),
            fmt_g(myerson.value),
            fmt_g(spa.value),
            fmt_g(gtm.value / myerson.value),
            fmt_g(gtm.value / spa.value),
            if exact { String::new() } else { seed.map(|s| s.to_string()).unwrap_or_default() },
        ]);
    }
    write_csv(cfg.output_path.as_deref(), stdout, &FRONTIER_HEADER, &rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InstanceKind {
    #[value(name = "equal_revenue_pair")]
    EqualRevenuePair,
    #[value(name = "geometric")]
    Geometric,
    #[value(name = "mixture")]
    Mixture,
    #[value(name = "corpus")]
    Corpus,
}

#[derive(Debug, Clone)]
pub struct InstanceOptions {
    pub a: f64,
    pub m: usize,
    pub k: usize,
    pub count: usize,
    pub min_buyers: usize,
    pub max_buyers: usize,
    pub items: usize,
    pub seed: Option<u64>,
}

fn write_text(out: Option<&Path>, stdout: &mut dyn Write, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn write_dir(out: Option<&Path>, stdout: &mut dyn Write, prefix: &str, instances: &[Instance]) -> CliResult<()> {
    let dir = out.ok_or_else(|| CliError::Usage("this kind writes several files; give --out DIR".into()))?;
    fs::create_dir_all(dir)?;
    for (i, inst) in instances.iter().enumerate() {
        let path = dir.join(format!("{prefix}_{:02}.toml", i + 1));
        fs::write(&path, inst.to_toml())?;
        writeln!(stdout, "{}", path.display())?;
    }
    Ok(())
}

pub fn instances(
    kind: InstanceKind,
    opts: &InstanceOptions,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    match kind {
        InstanceKind::EqualRevenuePair => write_text(out, stdout, &make_equal_revenue_pair(opts.a)?.to_toml()),
        InstanceKind::Mixture => write_text(out, stdout, &make_mixture_instance(opts.k)?.mixed.to_toml()),
        InstanceKind::Geometric => write_dir(out, stdout, "geometric", &make_geometric_point_family(opts.m)?),
        InstanceKind::Corpus => {
            let seed = opts.seed.ok_or_else(|| CliError::Usage("corpus generation needs --seed".into()))?;
            if opts.min_buyers < 1 || opts.min_buyers > opts.max_buyers {
                return Err(CliError::Usage("need 1 <= --min-buyers <= --max-buyers".into()));
            }
            if opts.items == 0 || opts.items >= opts.min_buyers {
                return Err(CliError::Usage("need 1 <= --items < --min-buyers".into()));
            }
            let corpus = regular_corpus(seed, opts.count, opts.min_buyers, opts.max_buyers, opts.items);
            write_dir(out, stdout, "regular", &corpus)
        }
    }
}
