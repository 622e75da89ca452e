use proptest::prelude::*;
use thrust_core::events::{balance, generate_dijet_event, GeneratorConfig};
use thrust_core::shapes::{
    default_max_iter, iterative_thrust, sphericity, thrust_brute_force, thrust_exact, thrust_of_axis,
    thrust_of_partition,
};
use thrust_core::{Event, Momentum3, Partition};

fn small_event() -> impl Strategy<Value = Event> {
    let momentum = (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64)
        .prop_filter("nonzero momentum", |(x, y, z)| x * x + y * y + z * z > 1e-6);
    prop::collection::vec(momentum, 2..11).prop_map(|ps| {
        balance(&Event::new(0, ps.into_iter().map(|(x, y, z)| Momentum3::new(x, y, z))).unwrap())
    })
    .prop_filter("no particle at rest after balancing", |e| e.momenta().all(|p| p.norm() > 1e-6))
}

fn dijet(seed: u64, id: u64, n_min: usize, n_max: usize) -> Event {
    let cfg = GeneratorConfig { n_min, n_max, rng_seed: seed, ..Default::default() };
    generate_dijet_event(&cfg, id).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_matches_brute_force(e in small_event()) {
        let a = thrust_exact(&e).unwrap();
        let b = thrust_brute_force(&e).unwrap();
        prop_assert!((a.thrust - b.thrust).abs() <= 1e-9 * b.thrust);
        prop_assert!(a.thrust >= 0.5 - 1e-12 && a.thrust <= 1.0 + 1e-12);
    }

    #[test]
    fn result_invariants(seed in any::<u64>(), id in 0u64..100) {
        let e = dijet(seed, id, 4, 30);
        let r = thrust_exact(&e).unwrap();
        prop_assert!((r.axis.norm() - 1.0).abs() <= 1e-12);
        prop_assert!((thrust_of_partition(&e, &r.partition).unwrap() - r.thrust).abs() <= 1e-12);
        prop_assert!((r.jet_momentum - r.partition.jet_momentum(&e).unwrap()).norm() <= 1e-9 * e.scalar_sum());
        prop_assert!(r.partition.is_canonical());
        prop_assert!((r.one_minus_t - (1.0 - r.thrust)).abs() <= 1e-15);
        // The axis form agrees at the optimum.
        let (t_axis, _) = thrust_of_axis(&e, &r.axis).unwrap();
        prop_assert!((t_axis - r.thrust).abs() <= 1e-9);
    }

    #[test]
    fn no_partition_beats_exact(seed in any::<u64>(), bits in prop::collection::vec(any::<bool>(), 40)) {
        let e = dijet(seed, 0, 5, 40);
        let x = Partition::from_fn(e.len(), |k| bits[k]);
        let t = thrust_of_partition(&e, &x).unwrap();
        prop_assert!(t <= thrust_exact(&e).unwrap().thrust + 1e-12);
        // Complement symmetry on balanced events.
        prop_assert!((t - thrust_of_partition(&e, &x.complement()).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn iteration_is_monotone(seed in any::<u64>(), ax in -1.0..1.0f64, ay in -1.0..1.0f64, az in -1.0..1.0f64) {
        prop_assume!(ax * ax + ay * ay + az * az > 1e-6);
        let e = dijet(seed, 1, 10, 40);
        let it = iterative_thrust(&e, &Momentum3::new(ax, ay, az), default_max_iter(e.len())).unwrap();
        prop_assert!(it.momentum_history.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(it.momentum_history.len() <= it.iterations + 1);
        prop_assert!(it.result.thrust <= thrust_exact(&e).unwrap().thrust + 1e-12);
    }

    #[test]
    fn sphericity_invariants(seed in any::<u64>(), r in 1u32..=2) {
        let e = dijet(seed, 2, 3, 40);
        let s = sphericity(&e, r).unwrap();
        let [l1, l2, l3] = s.eigenvalues;
        prop_assert!((l1 + l2 + l3 - 1.0).abs() <= 1e-9);
        prop_assert!(l1 >= l2 && l2 >= l3 && l3 >= 0.0);
        prop_assert!((s.sphericity - 1.5 * (l2 + l3)).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&s.sphericity));
        prop_assert!((s.axis.norm() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn known_values() {
    let pair = Event::new(0, [Momentum3::new(1.0, 2.0, 3.0), Momentum3::new(-1.0, -2.0, -3.0)]).unwrap();
    assert!((thrust_exact(&pair).unwrap().thrust - 1.0).abs() < 1e-15);

    let ring = |k: usize| {
        Event::new(
            0,
            (0..k).map(|i| {
                let phi = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                Momentum3::new(phi.cos(), phi.sin(), 0.0)
            }),
        )
        .unwrap()
    };
    for (k, want) in [(3, 2.0 / 3.0), (4, std::f64::consts::FRAC_1_SQRT_2)] {
        let e = ring(k);
        assert!((thrust_exact(&e).unwrap().thrust - want).abs() < 1e-12);
        assert!((thrust_brute_force(&e).unwrap().thrust - want).abs() < 1e-12);
    }
}

#[test]
fn unbalanced_events_are_rejected() {
    let e = Event::new(7, [Momentum3::new(1.0, 0.0, 0.0), Momentum3::new(0.0, 1.0, 0.0)]).unwrap();
    assert!(matches!(thrust_exact(&e), Err(thrust_core::Error::Unbalanced { id: 7, .. })));
    assert!(thrust_brute_force(&e).is_err());
    assert!(thrust_exact(&balance(&e)).is_ok());
}

#[test]
fn exact_axis_needs_no_iteration() {
    for id in 0..50 {
        let e = dijet(9, id, 17, 40);
        let ex = thrust_exact(&e).unwrap();
        let it = iterative_thrust(&e, &ex.axis, default_max_iter(e.len())).unwrap();
        assert_eq!(it.iterations, 0);
        assert_eq!(it.result.partition, ex.partition);
    }
}

#[test]
fn equal_optima_pick_smallest_canonical_partition() {
    // Six equal momenta on a hexagon: three optimal splits, all with T = 2/3.
    let e = Event::new(
        0,
        (0..6).map(|i| {
            let phi = std::f64::consts::PI * i as f64 / 3.0;
            Momentum3::new(phi.cos(), phi.sin(), 0.0)
        }),
    )
    .unwrap();
    let a = thrust_exact(&e).unwrap();
    let b = thrust_brute_force(&e).unwrap();
    assert_eq!(a.partition, b.partition);
    assert_eq!(a.partition.to_string(), "000111");
}
