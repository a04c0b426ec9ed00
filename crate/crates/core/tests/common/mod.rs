#![allow(dead_code)]

use inroute_core::{
    generate_instance, CoordinateSource, Customer, DemandPattern, GeneratorSpec, Instance, Point,
};
use proptest::prelude::*;

pub const PATTERNS: [DemandPattern; 3] = [
    DemandPattern::Constant,
    DemandPattern::Increasing,
    DemandPattern::Sinusoid,
];

pub fn generated(
    customers: usize,
    periods: usize,
    capacity: u64,
    pattern: DemandPattern,
    seed: u64,
) -> Instance {
    generate_instance(&GeneratorSpec {
        name: format!("g{seed}"),
        customers,
        periods,
        capacity,
        pattern,
        seed,
        coordinates: CoordinateSource::RandomSquare { side: 100.0 },
    })
    .unwrap()
}

/// The seeded instance family used by the policy checks: all three patterns,
/// n <= 30, p <= 60.
pub fn policy_family(count: usize) -> Vec<Instance> {
    (0..count as u64)
        .map(|seed| {
            let n = 1 + (seed as usize * 7) % 30;
            let p = 1 + (seed as usize * 13) % 60;
            generated(n, p, 40 + seed * 3, PATTERNS[seed as usize % 3], seed)
        })
        .collect()
}

fn arb_customer(periods: usize) -> impl Strategy<Value = (Point, u64, u64, Vec<u64>)> {
    (1u64..200).prop_flat_map(move |max_level| {
        (
            (-1e3..1e3f64, -1e3..1e3f64).prop_map(|(x, y)| Point::new(x, y)),
            Just(max_level),
            0..=max_level,
            prop::collection::vec(0..=max_level, periods),
        )
    })
}

/// Arbitrary valid instances, coordinates included.
pub fn arb_instance(max_customers: usize, max_periods: usize) -> impl Strategy<Value = Instance> {
    (1..=max_customers, 1..=max_periods, 1u64..300).prop_flat_map(|(n, p, k)| {
        (
            "[A-Za-z][A-Za-z0-9_.-]{0,11}",
            (-1e3..1e3f64, -1e3..1e3f64),
            prop::collection::vec(arb_customer(p), n),
        )
            .prop_map(move |(name, (dx, dy), rows)| {
                let customers = rows
                    .into_iter()
                    .enumerate()
                    .map(
                        |(idx, (location, max_level, initial_inventory, demands))| Customer {
                            id: idx + 1,
                            location,
                            max_level,
                            initial_inventory,
                            demands,
                        },
                    )
                    .collect();
                Instance::new(name, p, k, Point::new(dx, dy), customers).unwrap()
            })
    })
}
