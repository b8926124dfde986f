use auctions_core::instances::random_regular_instance;
use auctions_core::mechanisms::{
    clipped_virtual_welfare, myerson_outcome, spa, threshold_outcome, vcg_k, Outcome, ValueProfile,
};
use auctions_core::rng::{CounterStream, SeededRng};
use auctions_core::{Instance, ValueDistribution};
use proptest::prelude::*;

fn profile_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..100.0, 2..8)
}

fn run(kind: usize, values: &[f64], lambda: f64, t: usize) -> Outcome {
    let p = ValueProfile::new(values.to_vec()).unwrap();
    match kind {
        0 => spa(&p).unwrap(),
        1 => vcg_k(&p, t).unwrap(),
        _ => threshold_outcome(&p, lambda, t).unwrap(),
    }
}

proptest! {
    #[test]
    fn prior_free_mechanisms_are_truthful(
        values in profile_strategy(),
        kind in 0usize..3,
        lambda in 1.0f64..20.0,
        t_raw in 1usize..8,
        who_raw in 0usize..8,
        report in 0.0f64..200.0,
    ) {
        let n = values.len();
        let t = 1 + t_raw % (n - 1);
        let who = who_raw % n;
        let truthful = run(kind, &values, lambda, t).utility(who, values[who]);
        let mut lie = values.clone();
        lie[who] = report;
        let deviated = run(kind, &lie, lambda, t).utility(who, values[who]);
        prop_assert!(truthful >= deviated - 1e-12, "truthful {truthful} < deviated {deviated}");
    }

    #[test]
    fn outcomes_are_individually_rational(values in profile_strategy(), kind in 0usize..3, lambda in 1.0f64..20.0, t_raw in 1usize..8) {
        let t = 1 + t_raw % (values.len() - 1);
        let o = run(kind, &values, lambda, t);
        for (i, &p) in o.payments.iter().enumerate() {
            if o.winners.contains(&i) {
                prop_assert!(p <= values[i] && p >= 0.0);
            } else {
                prop_assert_eq!(p, 0.0);
            }
        }
        let cap = if kind == 0 { 1 } else { t };
        prop_assert!(o.winners.len() <= cap);
    }

    #[test]
    fn threshold_mechanisms_are_scale_free(
        values in profile_strategy(),
        kind in 0usize..3,
        lambda in 1.0f64..20.0,
        t_raw in 1usize..8,
        theta in prop::sample::select(vec![0.125, 0.5, 2.0, 4.0, 1024.0]),
    ) {
        let t = 1 + t_raw % (values.len() - 1);
        let base = run(kind, &values, lambda, t);
        let scaled_values: Vec<f64> = values.iter().map(|v| v * theta).collect();
        let scaled = run(kind, &scaled_values, lambda, t);
        prop_assert_eq!(&base.winners, &scaled.winners);
        for (a, b) in base.payments.iter().zip(&scaled.payments) {
            prop_assert_eq!(a * theta, *b);
        }
    }

    #[test]
    fn permuting_buyers_permutes_outcomes(values in profile_strategy(), kind in 0usize..3, lambda in 1.0f64..20.0, t_raw in 1usize..8, shift in 0usize..8) {
        let n = values.len();
        let t = 1 + t_raw % (n - 1);
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let permuted: Vec<f64> = perm.iter().map(|&i| values[i]).collect();
        let base = run(kind, &values, lambda, t);
        let moved = run(kind, &permuted, lambda, t);
        // Random continuous values are distinct, so tie-breaking plays no role.
        for (new_idx, &old_idx) in perm.iter().enumerate() {
            prop_assert_eq!(base.payments[old_idx], moved.payments[new_idx]);
            prop_assert_eq!(base.winners.contains(&old_idx), moved.winners.contains(&new_idx));
        }
    }

    #[test]
    fn capacity_one_reductions(values in profile_strategy()) {
        let p = ValueProfile::new(values).unwrap();
        let s = spa(&p).unwrap();
        prop_assert_eq!(&threshold_outcome(&p, 1.0, 1).unwrap(), &s);
        prop_assert_eq!(&vcg_k(&p, 1).unwrap(), &s);
    }
}

fn draw(instance: &Instance, rng: &mut SeededRng) -> Vec<f64> {
    instance.buyers().iter().map(|d| d.sample(rng)).collect()
}

#[test]
fn optimal_auction_is_truthful_and_rational() {
    let mut rng = SeededRng::new(21);
    for trial in 0..1000 {
        let items = 1 + trial % 3;
        let inst = random_regular_instance(&mut rng, items.max(2), 6, items);
        let values = draw(&inst, &mut rng);
        let who = rng.int(0, inst.n() - 1);
        let truth = myerson_outcome(&inst, &ValueProfile::new(values.clone()).unwrap()).unwrap();
        let mut lie = values.clone();
        lie[who] = inst.buyers()[who].sample(&mut rng);
        let dev = myerson_outcome(&inst, &ValueProfile::new(lie).unwrap()).unwrap();
        assert!(truth.utility(who, values[who]) >= dev.utility(who, values[who]) - 1e-12, "trial {trial}");
        assert!(truth.winners.len() <= items);
        for &w in &truth.winners {
            assert!(truth.payments[w] <= values[w]);
        }
    }
}

#[test]
fn optimal_revenue_equals_clipped_virtual_welfare() {
    let instances = [
        Instance::single_item(vec![
            ValueDistribution::uniform(0.0, 1.0).unwrap(),
            ValueDistribution::exponential(2.0).unwrap(),
            ValueDistribution::uniform(0.2, 0.9).unwrap(),
        ])
        .unwrap(),
        Instance::new(vec![ValueDistribution::exponential(1.0).unwrap(); 4], 2).unwrap(),
    ];
    for inst in &instances {
        let r = 200_000u64;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for rep in 0..r {
            let mut stream = CounterStream::new(5, rep);
            stream.seek(1);
            let values: Vec<f64> = inst.buyers().iter().map(|d| d.sample(&mut stream)).collect();
            let revenue = myerson_outcome(inst, &ValueProfile::new(values.clone()).unwrap()).unwrap().revenue();
            let welfare = clipped_virtual_welfare(inst, &values).unwrap();
            let diff = revenue - welfare;
            sum += diff;
            sum_sq += diff * diff;
        }
        let mean = sum / r as f64;
        let stderr = ((sum_sq / r as f64 - mean * mean) / (r as f64 - 1.0)).sqrt();
        assert!(mean.abs() <= 3.0 * stderr, "mean difference {mean}, stderr {stderr}");
    }
}
