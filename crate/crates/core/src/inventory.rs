//! Inventory dynamics under a delivery plan.
//!
//! Within a period the delivery arrives first, then demand is consumed, then
//! the end-of-period level is recorded. Storage is checked after delivery and
//! before consumption; a negative end-of-period level is a stockout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;

/// Quantity delivered to each customer in each period, `quantities[i][t]`
/// for 0-based customer index `i` and 0-based period index `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeliveryPlan {
    pub quantities: Vec<Vec<u64>>,
}

impl DeliveryPlan {
    pub fn zeros(customers: usize, periods: usize) -> Self {
        Self {
            quantities: vec![vec![0; periods]; customers],
        }
    }

    pub fn from_rows(quantities: Vec<Vec<u64>>) -> Self {
        Self { quantities }
    }

    /// Delivered quantity for 1-based customer id and 1-based period.
    pub fn get(&self, customer: usize, period: usize) -> u64 {
        self.quantities[customer - 1][period - 1]
    }

    pub fn customers(&self) -> usize {
        self.quantities.len()
    }

    /// `(customer id, quantity)` for every positive delivery in 1-based `period`.
    pub fn deliveries(&self, period: usize) -> Vec<(usize, u64)> {
        self.quantities
            .iter()
            .enumerate()
            .filter_map(|(i, row)| {
                let q = row[period - 1];
                (q > 0).then_some((i + 1, q))
            })
            .collect()
    }

    /// Periods (1-based) with at least one delivery.
    pub fn active_periods(&self) -> Vec<usize> {
        let periods = self.quantities.first().map_or(0, Vec::len);
        (1..=periods)
            .filter(|&t| self.quantities.iter().any(|row| row[t - 1] > 0))
            .collect()
    }

    pub fn check_dimensions(&self, inst: &Instance) -> Result<()> {
        if self.quantities.len() != inst.num_customers() {
            return Err(Error::DimensionMismatch(format!(
                "plan has {} customer rows, instance has {}",
                self.quantities.len(),
                inst.num_customers()
            )));
        }
        if let Some((i, row)) = self
            .quantities
            .iter()
            .enumerate()
            .find(|(_, row)| row.len() != inst.periods)
        {
            return Err(Error::DimensionMismatch(format!(
                "plan row for customer {} has {} periods, instance has {}",
                i + 1,
                row.len(),
                inst.periods
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InventoryTrajectory {
    /// End-of-period levels, `levels[i][t]` for period `t + 1`.
    pub levels: Vec<Vec<u64>>,
    pub inventory_cost: u64,
}

impl InventoryTrajectory {
    /// Total stock over all customers at the end of each period.
    pub fn period_totals(&self) -> Vec<u64> {
        let periods = self.levels.first().map_or(0, Vec::len);
        (0..periods)
            .map(|t| self.levels.iter().map(|row| row[t]).sum())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Stockout,
    Overfill,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub customer: usize,
    pub period: usize,
    pub amount: u64,
}

/// Simulates `plan` on `inst`.
///
/// The outer error is reserved for dimension mismatches; the inner result
/// carries either the trajectory or every feasibility violation found. After a
/// stockout the level is floored at zero so later periods are still checked.
pub fn simulate(
    inst: &Instance,
    plan: &DeliveryPlan,
) -> Result<std::result::Result<InventoryTrajectory, Vec<Violation>>> {
    plan.check_dimensions(inst)?;
    let mut violations = Vec::new();
    let mut levels = Vec::with_capacity(inst.num_customers());

    for (c, row) in inst.customers.iter().zip(&plan.quantities) {
        let mut on_hand = c.initial_inventory as i64;
        let mut trace = Vec::with_capacity(inst.periods);
        for (t, (&q, &d)) in row.iter().zip(&c.demands).enumerate() {
            let stocked = on_hand + q as i64;
            if stocked > c.max_level as i64 {
                violations.push(Violation {
                    kind: ViolationKind::Overfill,
                    customer: c.id,
                    period: t + 1,
                    amount: (stocked - c.max_level as i64) as u64,
                });
            }
            let end = stocked - d as i64;
            if end < 0 {
                violations.push(Violation {
                    kind: ViolationKind::Stockout,
                    customer: c.id,
                    period: t + 1,
                    amount: (-end) as u64,
                });
            }
            on_hand = end.max(0);
            trace.push(on_hand as u64);
        }
        levels.push(trace);
    }

    if !violations.is_empty() {
        return Ok(Err(violations));
    }
    let inventory_cost = levels.iter().flatten().sum();
    Ok(Ok(InventoryTrajectory {
        levels,
        inventory_cost,
    }))
}

/// Sum of end-of-period levels over customers and periods 1..p.
pub fn inventory_cost(traj: &InventoryTrajectory) -> u64 {
    traj.levels.iter().flatten().sum()
}

/// Like [`simulate`], but any violation becomes an error.
pub fn simulate_feasible(inst: &Instance, plan: &DeliveryPlan) -> Result<InventoryTrajectory> {
    simulate(inst, plan)?.map_err(|v| {
        Error::Internal(format!(
            "plan is infeasible: {} violation(s), first {:?}",
            v.len(),
            v[0]
        ))
    })
}
