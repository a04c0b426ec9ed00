//! Bi-objective inventory routing.
//!
//! A single product is shipped from an uncapacitated depot to customers with
//! bounded storage over a finite horizon. Replenishment policies (day-to-day,
//! order-up-to-level, per-customer delivery frequencies) turn an [`Instance`]
//! into a [`DeliveryPlan`]; each period's deliveries are routed with a
//! Clarke-Wright savings construction optionally improved by record-to-record
//! travel. Every evaluated policy is an [`Alternative`] scored on two
//! objectives, total routing length and total end-of-period inventory, and the
//! non-dominated set is reported.

pub mod error;
pub mod experiment;
pub mod instance;
pub mod inventory;
pub mod pareto;
pub mod policies;
pub mod routing;
mod seed;

pub use error::{Error, Result};
pub use experiment::{
    evaluate_alternative, export_results, read_results_json, run_experiment,
    run_experiment_with_progress, write_csv, Alternative, ExperimentConfig, ExperimentResult,
    ExportFormat, CSV_HEADER,
};
pub use instance::{
    generate_instance, parse_instance, read_instance, write_instance, CoordinateSource, Customer,
    DemandPattern, GeneratorSpec, Instance, Point,
};
pub use inventory::{
    inventory_cost, simulate, simulate_feasible, DeliveryPlan, InventoryTrajectory, Violation,
    ViolationKind,
};
pub use pareto::{dominates, pareto_filter, ObjectivePoint};
pub use policies::{
    day_to_day_plan, frequency_plan, gen_controlled_random, gen_random, gen_uniform,
    max_feasible_frequency, order_up_to_plan, FrequencyLadder, FrequencyVector, PolicyKind,
    PolicyLabel, PolicySpec,
};
pub use routing::{
    build_distance_matrix, route_period, rtr_improve, savings_routes, split_oversize,
    DistanceMatrix, Route, RoutePlan, RtrParams,
};
