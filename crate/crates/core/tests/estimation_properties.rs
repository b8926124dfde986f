use auctions_core::estimation::{
    closed_form_revenue, estimate_order_stat_mean, estimate_order_stats, estimate_revenue, estimate_revenue_with,
    ThresholdDraw,
};
use auctions_core::instances::{make_equal_revenue_pair, make_mixture_instance, regular_corpus};
use auctions_core::mechanisms::{alpha_for_tau, mgtm_config};
use auctions_core::{Instance, McConfig, Mechanism, MixedInstance, ValueDistribution};

fn within(estimate: f64, truth: f64, stderr: f64, k: f64) -> bool {
    (estimate - truth).abs() <= k * stderr
}

#[test]
fn equal_revenue_pair_matches_closed_forms() {
    let inst = make_equal_revenue_pair(3.0).unwrap();
    let cfg = McConfig::new(1_000_000, 2024);
    for m in [Mechanism::Spa, Mechanism::Myerson] {
        let truth = closed_form_revenue(&inst, &m).unwrap();
        let e = estimate_revenue(&inst, &m, &cfg).unwrap();
        assert!(within(e.mean, truth, e.stderr, 3.0), "{m}: {e:?} vs {truth}");
        assert!(e.stderr < 0.002);
    }
}

/// Optimal revenue for two U[0,1] buyers by midpoint quadrature: the high bidder pays
/// `max(v^(2), 1/2)` whenever `v^(1) >= 1/2`.
fn uniform_pair_optimum_by_quadrature() -> f64 {
    let n = 2000;
    let h = 1.0 / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (a, b) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
            if hi >= 0.5 {
                total += lo.max(0.5);
            }
        }
    }
    total * h * h
}

#[test]
fn uniform_pair_against_integrals() {
    let u = ValueDistribution::uniform(0.0, 1.0).unwrap();
    let inst = Instance::single_item(vec![u.clone(), u]).unwrap();
    let cfg = McConfig::new(1_000_000, 77);
    let spa = estimate_revenue(&inst, &Mechanism::Spa, &cfg).unwrap();
    assert!(within(spa.mean, 1.0 / 3.0, spa.stderr, 3.0), "{spa:?}");
    let optimum = uniform_pair_optimum_by_quadrature();
    assert!((optimum - 5.0 / 12.0).abs() < 1e-6);
    let m = estimate_revenue(&inst, &Mechanism::Myerson, &cfg).unwrap();
    assert!(within(m.mean, optimum, m.stderr, 3.0), "{m:?}");
    assert_eq!(closed_form_revenue(&inst, &Mechanism::Myerson), None);
}

#[test]
fn point_instances_match_closed_forms_for_every_mechanism() {
    let inst =
        Instance::new([1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|&v| ValueDistribution::point(v).unwrap()).collect(), 2)
            .unwrap();
    let cfg = McConfig::new(1000, 1);
    for m in [
        Mechanism::Spa,
        Mechanism::Vcg { k: 2 },
        Mechanism::Myerson,
        Mechanism::Gtm { alpha: std::f64::consts::E, c: 1 },
        Mechanism::GtmT { alpha: 8f64.exp(), c: 8, t: 3 },
        Mechanism::Mgtm { tau: 2.0 },
    ] {
        let truth = closed_form_revenue(&inst, &m).unwrap();
        let e = estimate_revenue(&inst, &m, &cfg).unwrap();
        assert_eq!(e.mean, truth, "{m}");
        assert_eq!(e.stderr, 0.0);
    }
    assert_eq!(closed_form_revenue(&inst, &Mechanism::Vcg { k: 2 }), Some(8.0));
    assert_eq!(closed_form_revenue(&inst, &Mechanism::Myerson), Some(24.0));
}

#[test]
fn integrated_and_sampled_thresholds_agree() {
    for inst in regular_corpus(8, 5, 2, 6, 1) {
        let p = alpha_for_tau(2.0).unwrap();
        let m = Mechanism::Gtm { alpha: p.alpha, c: p.c };
        let cfg = McConfig::new(400_000, 3);
        let a = estimate_revenue_with(&inst, &m, &cfg, ThresholdDraw::Integrated).unwrap();
        let b = estimate_revenue_with(&inst, &m, &cfg, ThresholdDraw::Sampled).unwrap();
        // The sampled estimate carries the larger variance.
        assert!(within(a.mean, b.mean, b.stderr, 3.0), "{a:?} vs {b:?}");
        assert!(a.stderr <= b.stderr);
    }
    let inst = Instance::new(vec![ValueDistribution::exponential(1.0).unwrap(); 5], 4).unwrap();
    let cfg = McConfig::new(400_000, 4);
    let a = estimate_revenue_with(&inst, &Mechanism::Mgtm { tau: 2.0 }, &cfg, ThresholdDraw::Integrated).unwrap();
    let b = estimate_revenue_with(&inst, &Mechanism::Mgtm { tau: 2.0 }, &cfg, ThresholdDraw::Sampled).unwrap();
    assert!(within(a.mean, b.mean, b.stderr, 3.0), "{a:?} vs {b:?}");
}

#[test]
fn vcg_is_k_times_next_order_statistic() {
    for (k, inst) in [(2usize, 5usize), (4, 7), (1, 3)]
        .iter()
        .map(|&(k, n)| (k, Instance::new(vec![ValueDistribution::exponential(0.5).unwrap(); n], k).unwrap()))
    {
        let cfg = McConfig::new(300_000, 13);
        let vcg = estimate_revenue(&inst, &Mechanism::Vcg { k }, &cfg).unwrap();
        // Different seed: an independent estimate of E[v^(k+1)].
        let next = estimate_order_stat_mean(&inst, k + 1, &cfg.with_seed(14)).unwrap();
        let se = (vcg.stderr.powi(2) + (k as f64 * next.stderr).powi(2)).sqrt();
        assert!(within(vcg.mean, k as f64 * next.mean, se, 3.0), "k={k}: {vcg:?} {next:?}");
    }
}

#[test]
fn mixture_revenue_is_weighted_component_revenue() {
    let mix = make_mixture_instance(4).unwrap().mixed;
    let cfg = McConfig::new(400_000, 5);
    for m in [Mechanism::Spa, Mechanism::Gtm { alpha: std::f64::consts::E, c: 1 }] {
        let e = estimate_revenue(&mix, &m, &cfg).unwrap();
        let mut truth = 0.0;
        for (inst, w) in mix.components() {
            let part = estimate_revenue(inst, &m, &McConfig::new(400_000, 6)).unwrap();
            truth += w * part.mean;
        }
        assert!(within(e.mean, truth, e.stderr, 3.5), "{m}: {e:?} vs {truth}");
    }
    let continuous = MixedInstance::new(vec![
        (Instance::single_item(vec![ValueDistribution::uniform(0.0, 1.0).unwrap(); 2]).unwrap(), 0.25),
        (Instance::single_item(vec![ValueDistribution::exponential(1.0).unwrap(); 2]).unwrap(), 0.75),
    ])
    .unwrap();
    let e = estimate_revenue(&continuous, &Mechanism::Spa, &McConfig::new(1_000_000, 9)).unwrap();
    // E[min] = 1/3 for uniforms and 1/2 for unit exponentials.
    assert!(within(e.mean, 0.25 / 3.0 + 0.75 * 0.5, e.stderr, 3.0), "{e:?}");
}

#[test]
fn estimates_are_bit_identical_across_workers() {
    let inst = regular_corpus(4, 1, 5, 5, 2).remove(0);
    let cfg = McConfig::new(50_000, 99);
    for m in [Mechanism::Spa, Mechanism::Myerson, Mechanism::Mgtm { tau: 2.0 }, Mechanism::Vcg { k: 2 }] {
        let base = estimate_revenue(&inst, &m, &cfg).unwrap();
        for w in [2, 8] {
            let other = estimate_revenue(&inst, &m, &cfg.with_workers(w)).unwrap();
            assert_eq!(format!("{base:?}"), format!("{other:?}"));
        }
    }
    let base = estimate_order_stats(&inst, &[1, 2, 3], Some(2), &cfg).unwrap();
    let other = estimate_order_stats(&inst, &[1, 2, 3], Some(2), &cfg.with_workers(8)).unwrap();
    assert_eq!(base, other);
}

#[test]
fn order_statistic_medians_decrease_in_rank() {
    for (i, inst) in regular_corpus(31, 10, 2, 6, 1).iter().enumerate() {
        let ranks: Vec<usize> = (1..=inst.n()).collect();
        let s = estimate_order_stats(inst, &ranks, None, &McConfig::new(20_000, i as u64)).unwrap();
        assert!(s.s.windows(2).all(|w| w[0] >= w[1]), "{:?}", s.s);
    }
}

#[test]
fn mgtm_single_item_is_gtm_with_wider_menu() {
    let inst = Instance::single_item(vec![ValueDistribution::exponential(1.0).unwrap(); 3]).unwrap();
    let cfg = McConfig::new(50_000, 8);
    let p = mgtm_config(2.0, 1).unwrap().params;
    let a = estimate_revenue(&inst, &Mechanism::Mgtm { tau: 2.0 }, &cfg).unwrap();
    let b = estimate_revenue(&inst, &Mechanism::Gtm { alpha: p.alpha, c: p.c }, &cfg).unwrap();
    assert_eq!(a, b);
}
