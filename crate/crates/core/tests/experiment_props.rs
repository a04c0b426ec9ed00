mod common;

use common::{generated, PATTERNS};
use inroute_core::{
    evaluate_alternative, export_results, pareto_filter, read_results_json, run_experiment,
    simulate_feasible, ExperimentConfig, ExportFormat, ObjectivePoint, PolicySpec, CSV_HEADER,
};

fn config(improve: bool, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        random_count: 15,
        controlled_per_gap: 3,
        improve_routing: improve,
        seed,
        ..ExperimentConfig::default()
    }
}

#[test]
fn improved_routing_never_costs_more() {
    for seed in 0..6u64 {
        let inst = generated(
            12 + seed as usize * 3,
            12,
            60,
            PATTERNS[seed as usize % 3],
            seed,
        );
        let off = run_experiment(&inst, &config(false, seed)).unwrap();
        let on = run_experiment(&inst, &config(true, seed)).unwrap();
        assert_eq!(off.alternatives.len(), on.alternatives.len());
        for (a, b) in off.alternatives.iter().zip(&on.alternatives) {
            assert_eq!(a.spec, b.spec);
            assert_eq!(a.plan, b.plan);
            assert_eq!(a.objectives.inventory_cost, b.objectives.inventory_cost);
            assert!(
                b.objectives.routing_cost <= a.objectives.routing_cost + 1e-9,
                "alt {}",
                a.id
            );
        }
    }
}

#[test]
fn alternatives_are_consistent() {
    let inst = generated(15, 20, 80, PATTERNS[2], 11);
    let result = run_experiment(&inst, &config(true, 3)).unwrap();
    let ladder = ExperimentConfig::default().ladder_for(&inst).unwrap();
    assert_eq!(
        result.alternatives.len(),
        2 + ladder.rungs().len() + 15 + 3 * (ladder.rungs().len() - 1)
    );

    let min_inventory = result
        .alternatives
        .iter()
        .map(|a| a.objectives.inventory_cost)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(
        result.alternatives[0].objectives.inventory_cost,
        min_inventory
    );
    assert_eq!(result.alternatives[0].spec, PolicySpec::day_to_day());

    for (idx, alt) in result.alternatives.iter().enumerate() {
        assert_eq!(alt.id, idx);
        assert_eq!(alt.objectives.id, idx);
        assert_eq!(alt.period_routes.len(), inst.periods);
        let routing: f64 = alt.period_routes.iter().map(|r| r.total_length).sum();
        assert!((routing - alt.objectives.routing_cost).abs() <= 1e-9 * routing.max(1.0));
        let traj = simulate_feasible(&inst, &alt.plan).unwrap();
        assert_eq!(traj.inventory_cost as f64, alt.objectives.inventory_cost);
        for (t, plan) in alt.period_routes.iter().enumerate() {
            let mut expected = alt.plan.deliveries(t + 1);
            expected.sort_unstable();
            assert_eq!(plan.delivered(), expected);
        }
    }

    let points: Vec<ObjectivePoint> = result.alternatives.iter().map(|a| a.objectives).collect();
    let (front, _) = pareto_filter(&points);
    assert_eq!(result.front, front.iter().map(|p| p.id).collect::<Vec<_>>());
    for alt in &result.alternatives {
        assert_eq!(alt.on_front, result.front.contains(&alt.id));
    }
}

#[test]
fn evaluate_matches_experiment_entry() {
    let inst = generated(10, 8, 50, PATTERNS[0], 4);
    let cfg = config(true, 8);
    let result = run_experiment(&inst, &cfg).unwrap();
    for alt in result.alternatives.iter().step_by(5) {
        let single = evaluate_alternative(&inst, &alt.spec, &cfg).unwrap();
        assert_eq!(single.plan, alt.plan);
        assert_eq!(single.period_routes, alt.period_routes);
    }
}

#[test]
fn runs_are_deterministic_and_round_trip() {
    let inst = generated(14, 10, 70, PATTERNS[1], 6);
    let a = run_experiment(&inst, &config(true, 21)).unwrap();
    let b = run_experiment(&inst, &config(true, 21)).unwrap();
    assert_eq!(a.alternatives, b.alternatives);
    assert_eq!(a.front, b.front);

    let dir = tempfile::tempdir().unwrap();
    let (csv_a, csv_b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    export_results(&a, ExportFormat::Csv, &csv_a).unwrap();
    export_results(&b, ExportFormat::Csv, &csv_b).unwrap();
    let text = std::fs::read_to_string(&csv_a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&csv_b).unwrap());
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    assert_eq!(text.lines().count(), a.alternatives.len() + 1);
    for (line, alt) in text.lines().skip(1).zip(&a.alternatives) {
        let on_front = line.rsplit(',').next().unwrap();
        assert_eq!(on_front, alt.on_front.to_string());
    }

    let json = dir.path().join("a.json");
    export_results(&a, ExportFormat::Json, &json).unwrap();
    assert_eq!(read_results_json(&json).unwrap(), a);
}

#[test]
fn unwritable_export_path_errors() {
    let inst = generated(3, 3, 50, PATTERNS[0], 1);
    let cfg = ExperimentConfig {
        random_count: 0,
        controlled_per_gap: 0,
        ..ExperimentConfig::default()
    };
    let result = run_experiment(&inst, &cfg).unwrap();
    let path = std::path::Path::new("/nonexistent-dir/x/results.csv");
    assert!(export_results(&result, ExportFormat::Csv, path).is_err());
}
