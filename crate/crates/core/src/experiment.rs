//! Builds the alternative set, evaluates both objectives for each alternative
//! and marks the non-dominated front.
//!
//! The alternative set is, in id order: day-to-day, order-up-to, one uniform
//! vector per ladder rung, `random_count` random vectors and
//! `controlled_per_gap` controlled-random vectors per rung gap.
//!
//! Routing seeds are derived from the master seed and the content of the
//! period's delivery set, so equal delivery sets route identically whichever
//! alternative they belong to and in whatever order alternatives are
//! evaluated. Routed periods are memoized on that basis.

use std::collections::HashMap;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::inventory::{simulate_feasible, DeliveryPlan};
use crate::pareto::{pareto_filter, ObjectivePoint};
use crate::policies::{
    gen_controlled_random, gen_random, gen_uniform, FrequencyLadder, PolicyLabel, PolicySpec,
};
use crate::routing::{build_distance_matrix, route_period, DistanceMatrix, RoutePlan, RtrParams};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Frequency ladder; `None` means the divisors of the horizon.
    pub ladder: Option<Vec<usize>>,
    pub random_count: usize,
    pub controlled_per_gap: usize,
    /// Savings only when off; savings followed by record-to-record travel when on.
    pub improve_routing: bool,
    /// Record-to-record parameters. The per-period seed is derived from
    /// `seed`, `rtr.seed` and the delivery set.
    pub rtr: RtrParams,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            ladder: None,
            random_count: 200,
            controlled_per_gap: 20,
            improve_routing: false,
            rtr: RtrParams::default(),
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn ladder_for(&self, inst: &Instance) -> Result<FrequencyLadder> {
        match &self.ladder {
            None => Ok(FrequencyLadder::divisors(inst.periods)),
            Some(rungs) => FrequencyLadder::new(rungs.clone(), inst.periods),
        }
    }

    pub fn validate(&self, inst: &Instance) -> Result<()> {
        self.ladder_for(inst)?;
        self.rtr.validate()
    }

    /// Policies in alternative-id order.
    pub fn policies(&self, inst: &Instance) -> Result<Vec<PolicySpec>> {
        self.validate(inst)?;
        let ladder = self.ladder_for(inst)?;
        let mut specs = vec![PolicySpec::day_to_day(), PolicySpec::order_up_to()];
        specs.extend(
            ladder
                .rungs()
                .iter()
                .zip(gen_uniform(inst, &ladder))
                .map(|(&rung, f)| PolicySpec::frequency(f, PolicyLabel::Ladder { rung })),
        );
        specs.extend(
            gen_random(inst, self.random_count, seed::combine(self.seed, 1))
                .into_iter()
                .map(|f| PolicySpec::frequency(f, PolicyLabel::Random)),
        );
        specs.extend(
            gen_controlled_random(
                inst,
                &ladder,
                self.controlled_per_gap,
                seed::combine(self.seed, 2),
            )
            .into_iter()
            .map(|(label, f)| PolicySpec::frequency(f, label)),
        );
        Ok(specs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alternative {
    pub id: usize,
    pub spec: PolicySpec,
    pub plan: DeliveryPlan,
    /// Routes for periods 1..=p, in order.
    pub period_routes: Vec<RoutePlan>,
    pub objectives: ObjectivePoint,
    pub on_front: bool,
}

impl Alternative {
    pub fn policy_label(&self) -> String {
        self.spec.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub instance: String,
    pub config: ExperimentConfig,
    pub alternatives: Vec<Alternative>,
    /// Ids of the non-dominated alternatives by ascending routing cost.
    pub front: Vec<usize>,
    pub duration_secs: f64,
}

type RouteCache = Mutex<HashMap<Vec<(usize, u64)>, RoutePlan>>;

struct Evaluator<'a> {
    inst: &'a Instance,
    matrix: DistanceMatrix,
    config: &'a ExperimentConfig,
    cache: RouteCache,
}

impl<'a> Evaluator<'a> {
    fn new(inst: &'a Instance, config: &'a ExperimentConfig) -> Self {
        Self {
            inst,
            matrix: build_distance_matrix(inst),
            config,
            cache: Mutex::default(),
        }
    }

    fn route(&self, deliveries: Vec<(usize, u64)>) -> Result<RoutePlan> {
        if deliveries.is_empty() {
            return Ok(RoutePlan::empty());
        }
        if let Some(plan) = self.cache.lock().unwrap().get(&deliveries) {
            return Ok(plan.clone());
        }
        let content = deliveries.iter().flat_map(|&(c, q)| [c as u64, q]);
        let params = RtrParams {
            seed: seed::derive(
                self.config.seed,
                std::iter::once(self.config.rtr.seed).chain(content),
            ),
            ..self.config.rtr
        };
        let plan = route_period(
            self.inst,
            &self.matrix,
            &deliveries,
            &params,
            self.config.improve_routing,
        )?;
        self.cache.lock().unwrap().insert(deliveries, plan.clone());
        Ok(plan)
    }

    fn evaluate(&self, id: usize, spec: &PolicySpec) -> Result<Alternative> {
        let plan = spec.build_plan(self.inst)?;
        let trajectory = simulate_feasible(self.inst, &plan)
            .map_err(|e| Error::Internal(format!("policy {spec}: {e}")))?;
        let period_routes = (1..=self.inst.periods)
            .map(|t| self.route(plan.deliveries(t)))
            .collect::<Result<Vec<_>>>()?;
        let routing_cost = period_routes.iter().map(|r| r.total_length).sum();
        Ok(Alternative {
            id,
            spec: spec.clone(),
            plan,
            period_routes,
            objectives: ObjectivePoint::new(routing_cost, trajectory.inventory_cost as f64, id),
            on_front: false,
        })
    }
}

/// Evaluates a single policy. The result has id 0 and is not marked on the front.
pub fn evaluate_alternative(
    inst: &Instance,
    spec: &PolicySpec,
    config: &ExperimentConfig,
) -> Result<Alternative> {
    config.rtr.validate()?;
    Evaluator::new(inst, config).evaluate(0, spec)
}

pub fn run_experiment(inst: &Instance, config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_with_progress(inst, config, &|_, _| {})
}

/// Like [`run_experiment`], calling `progress(done, total)` after each
/// alternative is evaluated.
pub fn run_experiment_with_progress(
    inst: &Instance,
    config: &ExperimentConfig,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<ExperimentResult> {
    let started = Instant::now();
    let specs = config.policies(inst)?;
    let total = specs.len();
    let evaluator = Evaluator::new(inst, config);
    let done = AtomicUsize::new(0);

    let mut alternatives = specs
        .par_iter()
        .enumerate()
        .map(|(id, spec)| {
            let alt = evaluator.evaluate(id, spec);
            progress(done.fetch_add(1, Ordering::Relaxed) + 1, total);
            alt
        })
        .collect::<Result<Vec<_>>>()?;

    let points: Vec<ObjectivePoint> = alternatives.iter().map(|a| a.objectives).collect();
    let (front, _) = pareto_filter(&points);
    for p in &front {
        alternatives[p.id].on_front = true;
    }

    Ok(ExperimentResult {
        instance: inst.name.clone(),
        config: config.clone(),
        alternatives,
        front: front.iter().map(|p| p.id).collect(),
        duration_secs: started.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

pub const CSV_HEADER: &str = "alt_id,policy_label,routing_cost,inventory_cost,on_front";

pub fn write_csv<W: Write>(result: &ExperimentResult, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for alt in &result.alternatives {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{}",
            alt.id,
            alt.policy_label(),
            alt.objectives.routing_cost,
            alt.objectives.inventory_cost,
            alt.on_front
        )?;
    }
    Ok(())
}

pub fn export_results(result: &ExperimentResult, format: ExportFormat, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    match format {
        ExportFormat::Csv => write_csv(result, &mut out).map_err(|e| Error::io(path, e))?,
        ExportFormat::Json => serde_json::to_writer(&mut out, result)?,
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_results_json(path: &Path) -> Result<ExperimentResult> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}
