use ipl_core::domain::{
    discretize_state, Belief, DiscreteIndex, Interval, ScenarioConfig, ScenarioKind, StateBins, Variant, WorldState,
};
use ipl_core::harness::{read_csv, report_rows, scenario_to_toml, to_csv, CellReport, MetricsReport};
use ipl_core::planner::{expected_belief_change, PolicyKind};
use ipl_core::simulator::{step_dynamics, tmtc, TrafficState};
use proptest::prelude::*;

fn dist() -> impl Strategy<Value = [f64; 3]> {
    (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64)
        .prop_filter("non-degenerate", |(a, b, c)| a + b + c > 1e-6)
        .prop_map(|(a, b, c)| {
            let z = a + b + c;
            [a / z, b / z, c / z]
        })
}

fn kind() -> impl Strategy<Value = ScenarioKind> {
    prop::sample::select(ScenarioKind::ALL.to_vec())
}

fn variant() -> impl Strategy<Value = Variant> {
    prop::sample::select(Variant::ALL.to_vec())
}

proptest! {
    #[test]
    fn posterior_is_a_distribution(p in 0.0..=1.0f64, la in 1e-6..1.0f64, lc in 1e-6..1.0f64) {
        let b = Belief::new(p).unwrap().posterior([la, lc]).unwrap();
        prop_assert!((0.0..=1.0).contains(&b.p_conservative()));
        let [x, y] = b.as_array();
        prop_assert!((x + y - 1.0).abs() < 1e-12);
        // Equal likelihoods leave the belief alone.
        let same = Belief::new(p).unwrap().posterior([la, la]).unwrap();
        prop_assert!((same.p_conservative() - p).abs() < 1e-12);
    }

    #[test]
    fn bonus_vanishes_at_vertices_and_is_bounded(p in 0.0..=1.0f64, a in dist(), c in dist()) {
        let rows = [a, c];
        let v = expected_belief_change(Belief::new(p).unwrap(), &rows, &rows).unwrap();
        prop_assert!(v >= -1e-12 && v <= 2.0 + 1e-12);
        for end in [0.0, 1.0] {
            let v = expected_belief_change(Belief::new(end).unwrap(), &rows, &rows).unwrap();
            prop_assert!(v.abs() < 1e-12);
        }
        let same = expected_belief_change(Belief::new(p).unwrap(), &[a, a], &[a, a]).unwrap();
        prop_assert!(same.abs() < 1e-12);
    }

    #[test]
    fn discrete_ordinals_round_trip(o in 0..6561usize) {
        let idx = DiscreteIndex::from_ordinal(o, 2).unwrap();
        prop_assert_eq!(idx.ordinal(), o);
        let rep = idx.state.representative();
        prop_assert_eq!(discretize_state(&rep).unwrap(), idx.state);
        prop_assert_eq!(StateBins::from_ordinal(idx.state.ordinal()).unwrap(), idx.state);
    }

    #[test]
    fn dynamics_keep_speed_in_range(
        d_h in 0.0..60.0f64, d_r in 0.0..60.0f64, v_h in 0.0..15.0f64, v_r in 0.0..15.0f64,
        a_r in -6.0..6.0f64, a_h in -6.0..6.0f64, dt in 0.05..1.0f64,
    ) {
        let v_max = 15.0;
        let x = WorldState { d_h, d_r, v_h, v_r };
        let n = step_dynamics(&x, a_r, a_h, dt, v_max).unwrap();
        prop_assert!((0.0..=v_max).contains(&n.v_h) && (0.0..=v_max).contains(&n.v_r));
        prop_assert!(n.d_h >= 0.0 && n.d_r >= 0.0 && n.d_h <= d_h && n.d_r <= d_r);
    }

    #[test]
    fn tmtc_is_non_negative(k in kind(), v in variant(), seed in any::<u64>()) {
        use rand::SeedableRng;
        let cfg = ScenarioConfig::preset(k, v);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let s = TrafficState::sample(&cfg, &mut rng);
        let t = tmtc(&s, cfg.geometry.vehicle_length);
        prop_assert!(t >= 0.0 || t.is_infinite());
        prop_assert!(!t.is_nan());
    }

    #[test]
    fn metric_csv_round_trips(
        means in prop::collection::vec(0.0..100.0f64, 2),
        rates in prop::collection::vec(0.0..=1.0f64, 2),
        runs in 2..500usize,
    ) {
        let cells = means
            .iter()
            .zip(&rates)
            .zip([PolicyKind::Ipl, PolicyKind::HeuristicK(3)])
            .map(|((&m, &r), policy)| CellReport {
                kind: ScenarioKind::LaneMerge,
                variant: Variant::Unsafe,
                policy,
                runs,
                seeds: vec![1; runs],
                mean_time_s: m,
                se_time_s: m / 7.0,
                near_misses: (r * runs as f64) as usize,
                near_miss_rate: r,
                collision_rate: r / 3.0,
                timeouts: 0,
                timeout_seeds: vec![],
                p_conservative: vec![0.5],
                p_correct: vec![0.5],
                d_goal: vec![1.0],
            })
            .collect();
        let report = MetricsReport {
            master_seed: 1,
            runs,
            near_miss_tmtc: 1.0,
            near_miss_reference: 0.35,
            beta: 1.0,
            cells,
            flags: vec![],
        };
        prop_assert_eq!(read_csv(&to_csv(&report)).unwrap(), report_rows(&report));
    }

    #[test]
    fn scenario_toml_round_trips(
        k in kind(), v in variant(), lo in 0.0..30.0f64, w in 0.1..20.0f64,
        dt in 0.05..1.0f64, steps in 1..500usize,
    ) {
        let mut cfg = ScenarioConfig::preset(k, v);
        cfg.d_h = Interval::new(lo, lo + w);
        cfg.dt = dt;
        cfg.timeout_steps = steps;
        let text = scenario_to_toml(&cfg);
        let back: ScenarioConfig = toml::from_str(&text).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
