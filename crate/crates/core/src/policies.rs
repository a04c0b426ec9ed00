//! Replenishment policies and frequency-vector generators.
//!
//! Every policy starts lazily: a customer is first served in the period where
//! its initial stock no longer covers cumulative demand.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Customer, Instance};
use crate::inventory::DeliveryPlan;

/// Per-customer delivery frequency: customer `i + 1` is scheduled every
/// `frequencies[i]` periods.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrequencyVector(pub Vec<usize>);

impl FrequencyVector {
    pub fn uniform(customers: usize, frequency: usize) -> Self {
        Self(vec![frequency; customers])
    }

    pub fn validate(&self, inst: &Instance) -> Result<()> {
        if self.0.len() != inst.num_customers() {
            return Err(Error::InvalidFrequency(format!(
                "{} entries for {} customers",
                self.0.len(),
                inst.num_customers()
            )));
        }
        if let Some((i, f)) = self
            .0
            .iter()
            .enumerate()
            .find(|(_, &f)| f == 0 || f > inst.periods)
        {
            return Err(Error::InvalidFrequency(format!(
                "customer {}: frequency {f} outside [1, {}]",
                i + 1,
                inst.periods
            )));
        }
        Ok(())
    }
}

/// Strictly increasing frequency values starting at 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrequencyLadder(Vec<usize>);

impl FrequencyLadder {
    pub fn new(rungs: Vec<usize>, periods: usize) -> Result<Self> {
        if rungs.first() != Some(&1) {
            return Err(Error::InvalidConfig(
                "frequency ladder must start at 1".into(),
            ));
        }
        if rungs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "frequency ladder must be strictly increasing".into(),
            ));
        }
        if let Some(&last) = rungs.last().filter(|&&r| r > periods) {
            return Err(Error::InvalidConfig(format!(
                "ladder rung {last} exceeds the horizon of {periods} periods"
            )));
        }
        Ok(Self(rungs))
    }

    /// Sorted divisors of `periods`.
    pub fn divisors(periods: usize) -> Self {
        Self((1..=periods).filter(|d| periods.is_multiple_of(*d)).collect())
    }

    pub fn rungs(&self) -> &[usize] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    DayToDay,
    OrderUpTo,
    Frequency,
}

/// Where a policy came from in the alternative set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum PolicyLabel {
    Extreme,
    Ladder { rung: usize },
    Random,
    ControlledRandom { low: usize, high: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<FrequencyVector>,
    pub label: PolicyLabel,
}

impl PolicySpec {
    pub fn day_to_day() -> Self {
        Self {
            kind: PolicyKind::DayToDay,
            frequencies: None,
            label: PolicyLabel::Extreme,
        }
    }

    pub fn order_up_to() -> Self {
        Self {
            kind: PolicyKind::OrderUpTo,
            frequencies: None,
            label: PolicyLabel::Extreme,
        }
    }

    pub fn frequency(frequencies: FrequencyVector, label: PolicyLabel) -> Self {
        Self {
            kind: PolicyKind::Frequency,
            frequencies: Some(frequencies),
            label,
        }
    }

    pub fn validate(&self, inst: &Instance) -> Result<()> {
        match (self.kind, &self.frequencies) {
            (PolicyKind::Frequency, Some(f)) => f.validate(inst),
            (PolicyKind::Frequency, None) => Err(Error::InvalidFrequency(
                "frequency policy without frequencies".into(),
            )),
            (_, Some(_)) => Err(Error::InvalidFrequency(
                "frequencies given for a non-frequency policy".into(),
            )),
            (_, None) => Ok(()),
        }
    }

    pub fn build_plan(&self, inst: &Instance) -> Result<DeliveryPlan> {
        self.validate(inst)?;
        Ok(match (self.kind, &self.frequencies) {
            (PolicyKind::DayToDay, _) => day_to_day_plan(inst),
            (PolicyKind::OrderUpTo, _) => order_up_to_plan(inst),
            (PolicyKind::Frequency, Some(f)) => frequency_plan(inst, f)?,
            (PolicyKind::Frequency, None) => unreachable!("validated above"),
        })
    }
}

/// Short label used in CSV exports, e.g. `day_to_day`, `ladder:4`,
/// `controlled_random:2-3`.
impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.label) {
            (PolicyKind::DayToDay, _) => f.write_str("day_to_day"),
            (PolicyKind::OrderUpTo, _) => f.write_str("order_up_to"),
            (PolicyKind::Frequency, PolicyLabel::Ladder { rung }) => write!(f, "ladder:{rung}"),
            (PolicyKind::Frequency, PolicyLabel::Random) => f.write_str("random"),
            (PolicyKind::Frequency, PolicyLabel::ControlledRandom { low, high }) => {
                write!(f, "controlled_random:{low}-{high}")
            }
            (PolicyKind::Frequency, PolicyLabel::Extreme) => f.write_str("frequency"),
        }
    }
}

pub fn day_to_day_plan(inst: &Instance) -> DeliveryPlan {
    let rows = inst
        .customers
        .iter()
        .map(|c| {
            let mut on_hand = c.initial_inventory;
            c.demands
                .iter()
                .map(|&d| {
                    let q = d.saturating_sub(on_hand);
                    on_hand = on_hand + q - d;
                    q
                })
                .collect()
        })
        .collect();
    DeliveryPlan::from_rows(rows)
}

pub fn order_up_to_plan(inst: &Instance) -> DeliveryPlan {
    let rows = inst
        .customers
        .iter()
        .map(|c| {
            let mut on_hand = c.initial_inventory;
            c.demands
                .iter()
                .map(|&d| {
                    let q = if on_hand < d {
                        c.max_level - on_hand
                    } else {
                        0
                    };
                    on_hand = on_hand + q - d;
                    q
                })
                .collect()
        })
        .collect();
    DeliveryPlan::from_rows(rows)
}

/// Frequency schedule for one customer, 0-based periods.
#[allow(clippy::needless_range_loop)]
fn frequency_row(c: &Customer, frequency: usize) -> Vec<u64> {
    let p = c.demands.len();
    let mut row = vec![0; p];

    // first period whose cumulative demand exceeds the initial stock
    let mut cumulative = 0;
    let Some(first) = c.demands.iter().position(|&d| {
        cumulative += d;
        cumulative > c.initial_inventory
    }) else {
        return row;
    };

    let window_demand =
        |from: usize, to_exclusive: usize| -> u64 { c.demands[from..to_exclusive].iter().sum() };
    let next_scheduled = |t: usize| -> usize {
        // smallest first + k*f strictly greater than t, or p if none
        let k = (t - first) / frequency + 1;
        (first + k * frequency).min(p)
    };

    let mut on_hand = c.initial_inventory - window_demand(0, first);
    for t in first..p {
        let scheduled = (t - first) % frequency == 0;
        let window_end = if scheduled {
            Some((t + frequency).min(p))
        } else if on_hand < c.demands[t] {
            // the U cap truncated the last scheduled delivery
            Some(next_scheduled(t))
        } else {
            None
        };
        if let Some(end) = window_end {
            let need = window_demand(t, end).saturating_sub(on_hand);
            let q = need.min(c.max_level - on_hand);
            row[t] = q;
            on_hand += q;
        }
        on_hand -= c.demands[t];
    }
    row
}

/// Each customer is scheduled every `f_i` periods from its first needed
/// period; a scheduled delivery covers demand up to the next scheduled visit
/// without exceeding storage. When storage truncates a delivery, an extra
/// visit is made in the first period that would otherwise stock out.
pub fn frequency_plan(inst: &Instance, f: &FrequencyVector) -> Result<DeliveryPlan> {
    f.validate(inst)?;
    let rows = inst
        .customers
        .iter()
        .zip(&f.0)
        .map(|(c, &fi)| frequency_row(c, fi))
        .collect();
    Ok(DeliveryPlan::from_rows(rows))
}

/// Largest `f <= p` such that every window of `f` consecutive periods fits in
/// storage.
pub fn max_feasible_frequency(inst: &Instance, customer: usize) -> usize {
    let c = inst.customer(customer).expect("customer id out of range");
    customer_frequency_cap(c)
}

fn customer_frequency_cap(c: &Customer) -> usize {
    let p = c.demands.len();
    let mut prefix = Vec::with_capacity(p + 1);
    prefix.push(0u64);
    for &d in &c.demands {
        prefix.push(prefix.last().unwrap() + d);
    }
    let fits = |f: usize| (0..=p - f).all(|s| prefix[s + f] - prefix[s] <= c.max_level);
    // window sums are monotone in f, so the feasible set is a prefix of 1..=p
    let (mut lo, mut hi) = (1, p);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

fn frequency_caps(inst: &Instance) -> Vec<usize> {
    inst.customers.iter().map(customer_frequency_cap).collect()
}

/// One vector per ladder rung, each entry clamped to the customer's cap.
pub fn gen_uniform(inst: &Instance, ladder: &FrequencyLadder) -> Vec<FrequencyVector> {
    let caps = frequency_caps(inst);
    ladder
        .rungs()
        .iter()
        .map(|&rung| FrequencyVector(caps.iter().map(|&cap| rung.min(cap)).collect()))
        .collect()
}

/// `count` vectors with each entry uniform in `[1, cap_i]`.
pub fn gen_random(inst: &Instance, count: usize, seed: u64) -> Vec<FrequencyVector> {
    let caps = frequency_caps(inst);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| FrequencyVector(caps.iter().map(|&cap| rng.random_range(1..=cap)).collect()))
        .collect()
}

/// For every pair of consecutive rungs `(low, high)`, `count_per_gap` vectors
/// with each entry uniform in `[min(low, cap_i), min(high, cap_i)]`.
pub fn gen_controlled_random(
    inst: &Instance,
    ladder: &FrequencyLadder,
    count_per_gap: usize,
    seed: u64,
) -> Vec<(PolicyLabel, FrequencyVector)> {
    let caps = frequency_caps(inst);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for gap in ladder.rungs().windows(2) {
        let (low, high) = (gap[0], gap[1]);
        for _ in 0..count_per_gap {
            let v = caps
                .iter()
                .map(|&cap| rng.random_range(low.min(cap)..=high.min(cap)))
                .collect();
            out.push((
                PolicyLabel::ControlledRandom { low, high },
                FrequencyVector(v),
            ));
        }
    }
    out
}
