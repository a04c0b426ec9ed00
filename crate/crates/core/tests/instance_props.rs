mod common;

use common::{arb_instance, PATTERNS};
use inroute_core::{
    generate_instance, parse_instance, write_instance, CoordinateSource, DemandPattern,
    GeneratorSpec,
};
use proptest::prelude::*;

fn arb_spec() -> impl Strategy<Value = GeneratorSpec> {
    (
        1usize..40,
        1usize..80,
        1u64..500,
        0usize..3,
        any::<u64>(),
        1.0..1e4f64,
    )
        .prop_map(
            |(customers, periods, capacity, pattern, seed, side)| GeneratorSpec {
                name: "gen".into(),
                customers,
                periods,
                capacity,
                pattern: PATTERNS[pattern],
                seed,
                coordinates: CoordinateSource::RandomSquare { side },
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn write_then_parse_is_identity(inst in arb_instance(12, 20)) {
        let text = write_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(write_instance(&back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn generator_output_is_valid(spec in arb_spec()) {
        let inst = generate_instance(&spec).unwrap();
        inst.validate().unwrap();
        prop_assert_eq!(inst.num_customers(), spec.customers);
        prop_assert_eq!(inst.periods, spec.periods);
        prop_assert_eq!(inst.capacity, spec.capacity);
        let CoordinateSource::RandomSquare { side } = spec.coordinates else { unreachable!() };
        for node in 0..=inst.num_customers() {
            let p = inst.location(node);
            prop_assert!((0.0..=side).contains(&p.x) && (0.0..=side).contains(&p.y));
        }
        for c in &inst.customers {
            prop_assert!(c.initial_inventory <= c.max_level);
            prop_assert!(c.demands.iter().all(|&d| d <= c.max_level));
            prop_assert!(c.max_level >= 3 * c.peak_demand());
        }
        // the file format carries the instance exactly
        prop_assert_eq!(parse_instance(&write_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn generator_is_deterministic(spec in arb_spec()) {
        prop_assert_eq!(generate_instance(&spec).unwrap(), generate_instance(&spec).unwrap());
    }
}

#[test]
fn patterns_have_expected_shape() {
    let p = 60;
    let constant: Vec<u64> = (1..=p)
        .map(|t| DemandPattern::Constant.demand(10, t, p))
        .collect();
    assert!(constant.iter().all(|&d| d == 10));
    let increasing: Vec<u64> = (1..=p)
        .map(|t| DemandPattern::Increasing.demand(10, t, p))
        .collect();
    assert_eq!((increasing[0], increasing[p - 1]), (10, 20));
    assert!(increasing.windows(2).all(|w| w[0] <= w[1]));
    let sinusoid: Vec<u64> = (1..=p)
        .map(|t| DemandPattern::Sinusoid.demand(10, t, p))
        .collect();
    assert_eq!(*sinusoid.iter().max().unwrap(), 15);
    assert_eq!(*sinusoid.iter().min().unwrap(), 5);
}

#[test]
fn different_seeds_differ() {
    let spec = |seed| GeneratorSpec {
        name: "s".into(),
        customers: 10,
        periods: 10,
        capacity: 50,
        pattern: DemandPattern::Constant,
        seed,
        coordinates: CoordinateSource::RandomSquare { side: 100.0 },
    };
    assert_ne!(
        generate_instance(&spec(1)).unwrap(),
        generate_instance(&spec(2)).unwrap()
    );
}
