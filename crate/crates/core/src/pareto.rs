//! Dominance and non-dominated filtering for two minimized objectives.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectivePoint {
    pub routing_cost: f64,
    pub inventory_cost: f64,
    /// Identifier of the alternative the point belongs to.
    #[serde(rename = "ref")]
    pub id: usize,
}

impl ObjectivePoint {
    pub fn new(routing_cost: f64, inventory_cost: f64, id: usize) -> Self {
        Self {
            routing_cost,
            inventory_cost,
            id,
        }
    }
}

/// `a` is no worse than `b` in both objectives and strictly better in one.
/// Comparisons are exact.
pub fn dominates(a: &ObjectivePoint, b: &ObjectivePoint) -> bool {
    a.routing_cost <= b.routing_cost
        && a.inventory_cost <= b.inventory_cost
        && (a.routing_cost < b.routing_cost || a.inventory_cost < b.inventory_cost)
}

/// Splits `points` into the non-dominated front, sorted by ascending routing
/// cost (then inventory cost, then input order), and the dominated rest in
/// input order. Exact duplicates of a front point stay on the front.
pub fn pareto_filter(points: &[ObjectivePoint]) -> (Vec<ObjectivePoint>, Vec<ObjectivePoint>) {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&points[a], &points[b]);
        pa.routing_cost
            .total_cmp(&pb.routing_cost)
            .then(pa.inventory_cost.total_cmp(&pb.inventory_cost))
            .then(a.cmp(&b))
    });

    let mut on_front = vec![false; points.len()];
    // lowest inventory among points with strictly smaller routing cost
    let mut best_before = f64::INFINITY;
    let mut start = 0;
    while start < order.len() {
        let routing = points[order[start]].routing_cost;
        let end = start
            + order[start..]
                .iter()
                .take_while(|&&i| points[i].routing_cost == routing)
                .count();
        // sorted by inventory within the group, so the first entry is its minimum
        let group_min = points[order[start]].inventory_cost;
        for &i in &order[start..end] {
            let inv = points[i].inventory_cost;
            on_front[i] = inv == group_min && inv < best_before;
        }
        best_before = best_before.min(group_min);
        start = end;
    }

    let front = order
        .iter()
        .filter(|&&i| on_front[i])
        .map(|&i| points[i])
        .collect();
    let dominated = (0..points.len())
        .filter(|&i| !on_front[i])
        .map(|i| points[i])
        .collect();
    (front, dominated)
}
