//! Shared fixtures for the criterion benches.

use inroute_core::{generate_instance, CoordinateSource, DemandPattern, GeneratorSpec, Instance};

pub fn instance(
    customers: usize,
    periods: usize,
    capacity: u64,
    pattern: DemandPattern,
) -> Instance {
    generate_instance(&GeneratorSpec {
        name: format!("bench-{customers}x{periods}"),
        customers,
        periods,
        capacity,
        pattern,
        seed: 42,
        coordinates: CoordinateSource::RandomSquare { side: 100.0 },
    })
    .expect("valid generator spec")
}
