//! Per-period capacitated routing.
//!
//! Oversize deliveries are split into dedicated full-load round trips plus a
//! pooled remainder; the pooled deliveries are routed with parallel
//! Clarke-Wright savings and optionally improved by record-to-record travel.

mod rtr;
mod savings;

use serde::{Deserialize, Serialize};

pub use rtr::rtr_improve;
pub use savings::savings_routes;

use crate::error::{Error, Result};
use crate::instance::Instance;

/// Symmetric Euclidean distances between all nodes, node 0 being the depot.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    dist: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_points(points: &[crate::instance::Point]) -> Self {
        let size = points.len();
        let mut dist = vec![0.0; size * size];
        for a in 0..size {
            for b in (a + 1)..size {
                let d = points[a].distance(&points[b]);
                dist[a * size + b] = d;
                dist[b * size + a] = d;
            }
        }
        Self { size, dist }
    }

    /// Number of nodes including the depot.
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.size + b]
    }
}

pub fn build_distance_matrix(inst: &Instance) -> DistanceMatrix {
    let points: Vec<_> = (0..=inst.num_customers())
        .map(|node| inst.location(node))
        .collect();
    DistanceMatrix::from_points(&points)
}

/// One vehicle tour; the depot is implicit at both ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub stops: Vec<usize>,
    /// Quantity dropped at each stop, parallel to `stops`.
    pub quantities: Vec<u64>,
    pub load: u64,
}

impl Route {
    pub fn new(stops: Vec<usize>, quantities: Vec<u64>) -> Self {
        debug_assert_eq!(stops.len(), quantities.len());
        let load = quantities.iter().sum();
        Self {
            stops,
            quantities,
            load,
        }
    }

    pub fn round_trip(customer: usize, quantity: u64) -> Self {
        Self::new(vec![customer], vec![quantity])
    }

    pub fn length(&self, m: &DistanceMatrix) -> f64 {
        route_length(&self.stops, m)
    }
}

pub(crate) fn route_length(stops: &[usize], m: &DistanceMatrix) -> f64 {
    let (Some(&first), Some(&last)) = (stops.first(), stops.last()) else {
        return 0.0;
    };
    let inner: f64 = stops.windows(2).map(|w| m.get(w[0], w[1])).sum();
    m.get(0, first) + inner + m.get(last, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub routes: Vec<Route>,
    pub total_length: f64,
}

impl RoutePlan {
    pub fn empty() -> Self {
        Self {
            routes: Vec::new(),
            total_length: 0.0,
        }
    }

    pub fn from_routes(routes: Vec<Route>, m: &DistanceMatrix) -> Self {
        let total_length = routes.iter().map(|r| r.length(m)).sum();
        Self {
            routes,
            total_length,
        }
    }

    pub fn recompute_length(&self, m: &DistanceMatrix) -> f64 {
        self.routes.iter().map(|r| r.length(m)).sum()
    }

    pub fn vehicles(&self) -> usize {
        self.routes.len()
    }

    /// Total quantity dropped at each customer, as sorted `(id, quantity)`.
    pub fn delivered(&self) -> Vec<(usize, u64)> {
        let mut out: Vec<(usize, u64)> = Vec::new();
        let mut pairs: Vec<(usize, u64)> = self
            .routes
            .iter()
            .flat_map(|r| r.stops.iter().copied().zip(r.quantities.iter().copied()))
            .collect();
        pairs.sort_unstable();
        for (id, q) in pairs {
            match out.last_mut() {
                Some((last, total)) if *last == id => *total += q,
                _ => out.push((id, q)),
            }
        }
        out
    }

    /// Checks route loads against `capacity` and that no customer repeats
    /// within a route. Returns a description of the first problem found.
    pub fn check(&self, capacity: u64, m: &DistanceMatrix) -> std::result::Result<(), String> {
        for (idx, r) in self.routes.iter().enumerate() {
            if r.stops.is_empty() {
                return Err(format!("route {idx} is empty"));
            }
            if r.stops.len() != r.quantities.len() {
                return Err(format!("route {idx} has mismatched stops and quantities"));
            }
            if r.load != r.quantities.iter().sum::<u64>() {
                return Err(format!(
                    "route {idx} load {} disagrees with its quantities",
                    r.load
                ));
            }
            if r.load > capacity {
                return Err(format!(
                    "route {idx} load {} exceeds capacity {capacity}",
                    r.load
                ));
            }
            let mut seen = r.stops.clone();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(format!("route {idx} visits a customer twice"));
            }
        }
        let recomputed = self.recompute_length(m);
        if (recomputed - self.total_length).abs() > 1e-6 * recomputed.max(1.0) {
            return Err(format!(
                "reported length {} differs from recomputed {}",
                self.total_length, recomputed
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtrParams {
    /// Fraction of the record a move may exceed it by.
    pub deviation_factor: f64,
    /// Improvement sweeps.
    pub loops: usize,
    pub seed: u64,
}

impl Default for RtrParams {
    fn default() -> Self {
        Self {
            deviation_factor: 0.01,
            loops: 30,
            seed: 0,
        }
    }
}

impl RtrParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.deviation_factor.is_finite() && self.deviation_factor >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "deviation factor must be finite and >= 0, got {}",
                self.deviation_factor
            )));
        }
        Ok(())
    }
}

/// Splits `quantity` into full loads and a pooled remainder in `[1, capacity]`;
/// zero stays `(0, 0)`.
pub fn split_oversize(quantity: u64, capacity: u64) -> (u64, u64) {
    assert!(capacity >= 1, "capacity must be positive");
    if quantity == 0 {
        return (0, 0);
    }
    let full_trips = (quantity - 1) / capacity;
    (full_trips, quantity - full_trips * capacity)
}

/// Routes one period's deliveries `(customer id, quantity)`.
///
/// Dedicated full-load trips are appended after the pooled routes.
pub fn route_period(
    inst: &Instance,
    m: &DistanceMatrix,
    deliveries: &[(usize, u64)],
    params: &RtrParams,
    improve: bool,
) -> Result<RoutePlan> {
    let capacity = inst.capacity;
    let mut pooled = Vec::with_capacity(deliveries.len());
    let mut dedicated = Vec::new();
    for &(customer, quantity) in deliveries {
        let (full, rest) = split_oversize(quantity, capacity);
        dedicated.extend((0..full).map(|_| Route::round_trip(customer, capacity)));
        if rest > 0 {
            pooled.push((customer, rest));
        }
    }

    let mut plan = savings_routes(&pooled, capacity, m)?;
    if improve {
        plan = rtr_improve(&plan, m, capacity, params);
    }
    if !dedicated.is_empty() {
        plan.total_length += dedicated.iter().map(|r| r.length(m)).sum::<f64>();
        plan.routes.extend(dedicated);
    }
    Ok(plan)
}
