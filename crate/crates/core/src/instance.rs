//! Problem instances: types, the line-based text format and a seeded generator.
//!
//! Text format, one record per line, fields separated by whitespace, anything
//! after `#` ignored:
//!
//! ```text
//! NAME <token>
//! N <int>
//! P <int>
//! K <int>
//! DEPOT <float> <float>
//! CUSTOMER <id> <x> <y> <U> <I0> <d_1> ... <d_P>
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Customer {
    /// 1-based; the depot is node 0.
    pub id: usize,
    pub location: Point,
    pub max_level: u64,
    pub initial_inventory: u64,
    pub demands: Vec<u64>,
}

impl Customer {
    pub fn peak_demand(&self) -> u64 {
        self.demands.iter().copied().max().unwrap_or(0)
    }

    pub fn total_demand(&self) -> u64 {
        self.demands.iter().sum()
    }
}

/// Validated problem instance. Construct through [`Instance::new`],
/// [`parse_instance`] or [`generate_instance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    pub periods: usize,
    pub capacity: u64,
    pub depot: Point,
    pub customers: Vec<Customer>,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        periods: usize,
        capacity: u64,
        depot: Point,
        customers: Vec<Customer>,
    ) -> Result<Self> {
        let inst = Self {
            name: name.into(),
            periods,
            capacity,
            depot,
            customers,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn num_customers(&self) -> usize {
        self.customers.len()
    }

    /// Customer by 1-based id.
    pub fn customer(&self, id: usize) -> Option<&Customer> {
        id.checked_sub(1).and_then(|i| self.customers.get(i))
    }

    /// Location of node `node`, 0 being the depot.
    pub fn location(&self, node: usize) -> Point {
        if node == 0 {
            self.depot
        } else {
            self.customers[node - 1].location
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidInstance(format!(
                "name must be a single non-empty token, got {:?}",
                self.name
            )));
        }
        if self.customers.is_empty() {
            return Err(Error::InvalidInstance(
                "at least one customer is required".into(),
            ));
        }
        if self.periods == 0 {
            return Err(Error::InvalidInstance(
                "at least one period is required".into(),
            ));
        }
        if self.capacity == 0 {
            return Err(Error::InvalidInstance(
                "vehicle capacity must be positive".into(),
            ));
        }
        if !(self.depot.x.is_finite() && self.depot.y.is_finite()) {
            return Err(Error::InvalidInstance(
                "depot coordinates must be finite".into(),
            ));
        }
        for (idx, c) in self.customers.iter().enumerate() {
            let fail = |message: String| Error::InvalidCustomer {
                customer: c.id,
                message,
            };
            if c.id != idx + 1 {
                return Err(fail(format!("expected id {}", idx + 1)));
            }
            if !(c.location.x.is_finite() && c.location.y.is_finite()) {
                return Err(fail("coordinates must be finite".into()));
            }
            if c.demands.len() != self.periods {
                return Err(fail(format!(
                    "has {} demand entries, expected {}",
                    c.demands.len(),
                    self.periods
                )));
            }
            if c.initial_inventory > c.max_level {
                return Err(fail(format!(
                    "initial inventory {} exceeds max level {}",
                    c.initial_inventory, c.max_level
                )));
            }
            if let Some((t, d)) = c.demands.iter().enumerate().find(|(_, &d)| d > c.max_level) {
                return Err(fail(format!(
                    "demand {} in period {} exceeds max level {}",
                    d,
                    t + 1,
                    c.max_level
                )));
            }
        }
        Ok(())
    }
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| syntax(line, format!("invalid {what} {tok:?}")))
}

fn set_once<T>(slot: &mut Option<T>, value: T, line: usize, key: &str) -> Result<()> {
    if slot.is_some() {
        return Err(syntax(line, format!("duplicate {key} record")));
    }
    *slot = Some(value);
    Ok(())
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut name = None;
    let mut n: Option<usize> = None;
    let mut p: Option<usize> = None;
    let mut k: Option<u64> = None;
    let mut depot = None;
    // (line number, raw fields) kept until P is known
    let mut rows: Vec<(usize, Vec<&str>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        let Some(key) = toks.next() else { continue };
        match key {
            "NAME" => {
                let v: String = field(toks.next(), line, "name")?;
                set_once(&mut name, v, line, key)?;
            }
            "N" => set_once(
                &mut n,
                field(toks.next(), line, "customer count")?,
                line,
                key,
            )?,
            "P" => set_once(&mut p, field(toks.next(), line, "period count")?, line, key)?,
            "K" => set_once(&mut k, field(toks.next(), line, "capacity")?, line, key)?,
            "DEPOT" => {
                let x: f64 = field(toks.next(), line, "depot x")?;
                let y: f64 = field(toks.next(), line, "depot y")?;
                set_once(&mut depot, Point::new(x, y), line, key)?;
            }
            "CUSTOMER" => {
                rows.push((line, toks.by_ref().collect()));
                continue;
            }
            other => return Err(syntax(line, format!("unknown record {other:?}"))),
        }
        if let Some(extra) = toks.next() {
            return Err(syntax(line, format!("unexpected trailing field {extra:?}")));
        }
    }

    let name = name.ok_or_else(|| syntax(0, "missing NAME record"))?;
    let n = n.ok_or_else(|| syntax(0, "missing N record"))?;
    let p = p.ok_or_else(|| syntax(0, "missing P record"))?;
    let k = k.ok_or_else(|| syntax(0, "missing K record"))?;
    let depot = depot.ok_or_else(|| syntax(0, "missing DEPOT record"))?;

    if rows.len() != n {
        return Err(Error::CountMismatch(format!(
            "N declares {n} customers but {} CUSTOMER rows found",
            rows.len()
        )));
    }

    let mut customers = Vec::with_capacity(n);
    for (expected_id, (line, fields)) in (1..).zip(rows) {
        if fields.len() != 5 + p {
            return Err(Error::CountMismatch(format!(
                "line {line}: CUSTOMER row has {} fields, expected {} (id x y U I0 and {p} demands)",
                fields.len(),
                5 + p
            )));
        }
        let id: usize = field(Some(fields[0]), line, "customer id")?;
        if id != expected_id {
            return Err(syntax(
                line,
                format!("customer id {id} out of order, expected {expected_id}"),
            ));
        }
        let x: f64 = field(Some(fields[1]), line, "x coordinate")?;
        let y: f64 = field(Some(fields[2]), line, "y coordinate")?;
        let max_level: u64 = field(Some(fields[3]), line, "max level")?;
        let initial_inventory: u64 = field(Some(fields[4]), line, "initial inventory")?;
        let demands = fields[5..]
            .iter()
            .map(|tok| field(Some(tok), line, "demand"))
            .collect::<Result<Vec<u64>>>()?;
        customers.push(Customer {
            id,
            location: Point::new(x, y),
            max_level,
            initial_inventory,
            demands,
        });
    }

    Instance::new(name, p, k, depot, customers)
}

/// Canonical serialization; floats use the shortest representation that
/// round-trips.
pub fn write_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME {}", inst.name);
    let _ = writeln!(out, "N {}", inst.num_customers());
    let _ = writeln!(out, "P {}", inst.periods);
    let _ = writeln!(out, "K {}", inst.capacity);
    let _ = writeln!(out, "DEPOT {} {}", inst.depot.x, inst.depot.y);
    for c in &inst.customers {
        let _ = write!(
            out,
            "CUSTOMER {} {} {} {} {}",
            c.id, c.location.x, c.location.y, c.max_level, c.initial_inventory
        );
        for d in &c.demands {
            let _ = write!(out, " {d}");
        }
        out.push('\n');
    }
    out
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    parse_instance(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandPattern {
    Constant,
    Increasing,
    Sinusoid,
}

impl std::str::FromStr for DemandPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Self::Constant),
            "increasing" => Ok(Self::Increasing),
            "sinusoid" => Ok(Self::Sinusoid),
            other => Err(Error::InvalidGenerator(format!(
                "unknown demand pattern {other:?}"
            ))),
        }
    }
}

impl DemandPattern {
    /// Demand in period `t` (1-based) of a customer with base rate `base`.
    pub fn demand(self, base: u64, t: usize, periods: usize) -> u64 {
        let b = base as f64;
        match self {
            Self::Constant => base,
            Self::Increasing if periods == 1 => base,
            Self::Increasing => (b * (1.0 + (t - 1) as f64 / (periods - 1) as f64)).round() as u64,
            Self::Sinusoid => {
                let phase = 2.0 * std::f64::consts::PI * t as f64 / 60.0;
                (b * (1.0 + 0.5 * phase.sin())).round().max(0.0) as u64
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoordinateSource {
    RandomSquare {
        side: f64,
    },
    /// Depot first, then one point per customer.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub name: String,
    pub customers: usize,
    pub periods: usize,
    pub capacity: u64,
    pub pattern: DemandPattern,
    pub seed: u64,
    pub coordinates: CoordinateSource,
}

const BASE_RATE: std::ops::RangeInclusive<u64> = 5..=25;
const STORAGE_MULTIPLE: std::ops::RangeInclusive<u64> = 3..=8;

fn read_points(path: &Path) -> Result<Vec<Point>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        let Some(first) = toks.next() else { continue };
        let line = idx + 1;
        let x: f64 = field(Some(first), line, "x coordinate")?;
        let y: f64 = field(toks.next(), line, "y coordinate")?;
        points.push(Point::new(x, y));
    }
    Ok(points)
}

pub fn generate_instance(spec: &GeneratorSpec) -> Result<Instance> {
    if spec.customers == 0 || spec.periods == 0 {
        return Err(Error::InvalidGenerator(
            "n and p must both be at least 1".into(),
        ));
    }
    if spec.capacity == 0 {
        return Err(Error::InvalidGenerator("capacity must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let points = match &spec.coordinates {
        CoordinateSource::RandomSquare { side } => {
            if !(side.is_finite() && *side > 0.0) {
                return Err(Error::InvalidGenerator(format!(
                    "side length must be > 0, got {side}"
                )));
            }
            (0..=spec.customers)
                .map(|_| Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side))
                .collect()
        }
        CoordinateSource::File(path) => {
            let mut pts = read_points(path)?;
            if pts.len() < spec.customers + 1 {
                return Err(Error::InvalidGenerator(format!(
                    "{} holds {} points, need {} (depot + {} customers)",
                    path.display(),
                    pts.len(),
                    spec.customers + 1,
                    spec.customers
                )));
            }
            pts.truncate(spec.customers + 1);
            pts
        }
    };

    let customers = points[1..]
        .iter()
        .enumerate()
        .map(|(idx, &location)| {
            let base = rng.random_range(BASE_RATE);
            let demands: Vec<u64> = (1..=spec.periods)
                .map(|t| spec.pattern.demand(base, t, spec.periods))
                .collect();
            let peak = demands.iter().copied().max().unwrap_or(0);
            let max_level = rng.random_range(STORAGE_MULTIPLE) * peak;
            let initial_inventory = rng.random_range(0..=max_level / 2);
            Customer {
                id: idx + 1,
                location,
                max_level,
                initial_inventory,
                demands,
            }
        })
        .collect();

    Instance::new(
        spec.name.clone(),
        spec.periods,
        spec.capacity,
        points[0],
        customers,
    )
}
