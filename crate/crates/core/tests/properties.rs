mod common;

use proptest::prelude::*;

use hvlb_core::graph::{derive_structure, generate_random, validate, GeneratorParams};
use hvlb_core::imprecise::find_all_holes;
use hvlb_core::scheduler::{schedule_once, schedule_sweep};
use hvlb_core::{
    fixtures, metrics, verify, AlphaGrid, Error, Network, Schedule, TaskGraph, Variant,
};

fn instance(n: usize, seed: u64, perm: usize, ccr: f64, constrained: bool) -> (TaskGraph, Network) {
    let net =
        Network::new(fixtures::example_topology().with_rates(&fixtures::rate_permutations()[perm]))
            .unwrap();
    let params = GeneratorParams {
        task_count: n,
        seed,
        ccr,
        constrain_outdegree: constrained,
        ..Default::default()
    };
    (generate_random(&params, &net).unwrap(), net)
}

fn variant() -> impl Strategy<Value = Variant> {
    prop::sample::select(Variant::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn generated_graphs_are_valid_and_reproducible(
        n in 4usize..60, seed in any::<u64>(), constrained in any::<bool>(),
    ) {
        let (a, net) = instance(n, seed, 0, 1.0, constrained);
        prop_assert!(validate(&a).is_ok());
        let s = derive_structure(&a).unwrap();
        for t in 0..a.len() {
            prop_assert!(s.in_degree(t) <= 2 && s.out_degree(t) <= 3);
        }
        let b = generate_random(
            &GeneratorParams { task_count: n, seed, constrain_outdegree: constrained, ..Default::default() },
            &net,
        ).unwrap();
        prop_assert_eq!(hvlb_core::graph::to_json(&a), hvlb_core::graph::to_json(&b));
    }

    #[test]
    fn schedules_are_valid_and_replayable(
        n in 4usize..40, seed in any::<u64>(), perm in 0usize..6,
        ccr in prop::sample::select(vec![0.1, 1.0, 5.0, 10.0]),
        v in variant(), alpha in 0.0f64..10.0,
    ) {
        let (g, net) = instance(n, seed, perm, ccr, true);
        let s = match schedule_once(&g, &net, v, alpha) {
            Ok(s) => s,
            Err(Error::SchedulingFailure { .. }) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let report = verify::verify(&s, &g, net.topology());
        prop_assert!(report.is_ok(), "{}", report);
        // the schedule is exactly what its own plan implies
        let replay = common::simulate(&common::plan_of(&s, &g, net.topology()), &g, net.topology());
        prop_assert!(!common::disturbed(&s, &replay, ""));
        let m = metrics::report(&s, &g, &net).unwrap();
        prop_assert!(m.lb >= 1.0 - 1e-12);
        prop_assert!(m.speedup <= 3.0 + 1e-12);
        prop_assert!(m.slr >= 1.0 - 1e-12);
        // holes never go negative and never reach past the makespan
        for h in find_all_holes(&s, &g, &net).unwrap().holes {
            prop_assert!(h.hole >= 0.0 && h.finish + h.hole <= s.makespan + 1e-9);
        }
    }

    #[test]
    fn schedule_files_round_trip(n in 4usize..30, seed in any::<u64>(), v in variant()) {
        let (g, net) = instance(n, seed, 2, 1.0, true);
        if let Ok(s) = schedule_once(&g, &net, v, 1.0) {
            let text = s.to_json();
            let back = Schedule::from_json(&text).unwrap();
            prop_assert_eq!(back.to_json(), text);
        }
    }

    #[test]
    fn alpha_zero_is_the_baseline(n in 4usize..50, seed in any::<u64>(), perm in 0usize..6) {
        let (g, net) = instance(n, seed, perm, 1.0, true);
        let a = schedule_once(&g, &net, Variant::HvlbCcA, 0.0).map(|s| s.to_json());
        let h = schedule_once(&g, &net, Variant::HsvCc, 0.0).map(|s| s.to_json());
        prop_assert_eq!(a.map_err(|e| e.to_string()), h.map_err(|e| e.to_string()));
    }

    #[test]
    fn sweep_keeps_the_best_grid_point(n in 4usize..30, seed in any::<u64>(), v in variant()) {
        let (g, net) = instance(n, seed, 4, 1.0, true);
        let grid = AlphaGrid::new(0.0, 4.0, 0.25).unwrap();
        let Ok(sweep) = schedule_sweep(&g, &net, v, &grid) else { return Ok(()) };
        let best = sweep.curve.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(sweep.best.makespan, best);
        let first = sweep.curve.iter().find(|c| c.1 == best).unwrap().0;
        prop_assert_eq!(sweep.best.alpha, first);
        // the materialised schedule agrees with a fresh run at that alpha
        let again = schedule_once(&g, &net, v, sweep.best.alpha).unwrap();
        prop_assert_eq!(again.to_json(), sweep.best.to_json());
    }

    #[test]
    fn failure_rate_ignores_order(mut flags in prop::collection::vec(any::<bool>(), 1..200), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let before = metrics::sfr(&flags).unwrap();
        flags.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(metrics::sfr(&flags).unwrap(), before);
    }

    #[test]
    fn critical_path_ignores_volumes(n in 4usize..30, seed in any::<u64>(), scale in 0.01f64..100.0) {
        let (g, net) = instance(n, seed, 1, 1.0, true);
        let mut heavier = g.clone();
        for e in &mut heavier.edges {
            e.volume *= scale;
        }
        prop_assert_eq!(
            metrics::critical_path(&g, &net).unwrap(),
            metrics::critical_path(&heavier, &net).unwrap()
        );
    }
}
