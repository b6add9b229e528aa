//! Domain types for the multi-LSP pickup-and-delivery problem and the
//! evaluation primitives shared by every solver in the crate.
//!
//! All times, distances and amounts of money are fixed-point integers with
//! [`SCALE`] sub-units per whole unit, so profit comparisons (and therefore
//! individual-rationality checks) are exact.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::path::Path;
use thiserror::Error;

/// Fixed-point sub-units per whole unit of time, distance or money.
pub const SCALE: i64 = 100;

/// Version tag written into every instance document.
pub const INSTANCE_SCHEMA_VERSION: u32 = 1;

/// Fixed-point time (abstract units times [`SCALE`]).
pub type Time = i64;
/// Fixed-point distance (abstract units times [`SCALE`]).
pub type Distance = i64;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("location index {index} out of range (matrix has {len} locations)")]
    UnknownLocation { index: usize, len: usize },
    #[error("unknown order {0}")]
    UnknownOrder(OrderId),
    #[error("unknown vehicle {0}")]
    UnknownVehicle(VehicleId),
    #[error("unknown LSP {0}")]
    UnknownLsp(LspId),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed instance JSON: {0}")]
    Json(#[from] serde_json::Error),
}

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(
            Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }

            #[inline]
            pub fn from_index(index: usize) -> Self {
                Self(index as u32)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(
    /// Index into the location set of a [`TimeDistanceMatrix`].
    LocationId,
    "L"
);
id_type!(OrderId, "o");
id_type!(VehicleId, "V");
id_type!(LspId, "LSP");

/// Fixed-point amount of money.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Money(pub i64);

impl Money {
    pub const ZERO: Money = Money(0);

    /// Converts whole units to fixed point, rounding to the nearest sub-unit.
    pub fn from_units(units: f64) -> Money {
        Money((units * SCALE as f64).round() as i64)
    }

    pub fn as_units(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let scale = SCALE as u64;
        write!(f, "{sign}{}.{:02}", abs / scale, abs % scale)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        Money(iter.map(|m| m.0).sum())
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.copied().sum()
    }
}

/// Integer division rounding half away from zero.
pub(crate) fn round_div(num: i128, den: i128) -> i64 {
    debug_assert!(den > 0);
    let q = if num >= 0 { (num + den / 2) / den } else { -((-num + den / 2) / den) };
    q as i64
}

/// Pairwise travel times and distances over a location set.
///
/// Entries are non-negative and the diagonal is zero. Asymmetric matrices
/// are allowed and nothing assumes the triangle inequality.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct TimeDistanceMatrix {
    n: usize,
    times: Vec<Time>,
    distances: Vec<Distance>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    times: Vec<Vec<Time>>,
    distances: Vec<Vec<Distance>>,
}

impl TryFrom<MatrixRepr> for TimeDistanceMatrix {
    type Error = ModelError;
    fn try_from(repr: MatrixRepr) -> Result<Self, ModelError> {
        TimeDistanceMatrix::new(repr.times, repr.distances)
    }
}

impl From<TimeDistanceMatrix> for MatrixRepr {
    fn from(m: TimeDistanceMatrix) -> Self {
        MatrixRepr {
            times: m.times.chunks(m.n.max(1)).map(<[_]>::to_vec).collect(),
            distances: m.distances.chunks(m.n.max(1)).map(<[_]>::to_vec).collect(),
        }
    }
}

impl TimeDistanceMatrix {
    pub fn new(times: Vec<Vec<Time>>, distances: Vec<Vec<Distance>>) -> Result<Self, ModelError> {
        let n = times.len();
        if distances.len() != n {
            return Err(ModelError::InvalidMatrix(format!(
                "time matrix has {n} rows, distance matrix has {}",
                distances.len()
            )));
        }
        let mut flat_t = Vec::with_capacity(n * n);
        let mut flat_d = Vec::with_capacity(n * n);
        for (i, (trow, drow)) in times.iter().zip(&distances).enumerate() {
            if trow.len() != n || drow.len() != n {
                return Err(ModelError::InvalidMatrix(format!("row {i} is not of length {n}")));
            }
            flat_t.extend_from_slice(trow);
            flat_d.extend_from_slice(drow);
        }
        Self::from_flat(n, flat_t, flat_d)
    }

    /// Builds an `n x n` matrix from a function returning `(time, distance)`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> (Time, Distance)) -> Result<Self, ModelError> {
        let mut times = Vec::with_capacity(n * n);
        let mut distances = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (t, d) = if i == j { (0, 0) } else { f(i, j) };
                times.push(t);
                distances.push(d);
            }
        }
        Self::from_flat(n, times, distances)
    }

    fn from_flat(n: usize, times: Vec<Time>, distances: Vec<Distance>) -> Result<Self, ModelError> {
        for i in 0..n {
            for j in 0..n {
                let (t, d) = (times[i * n + j], distances[i * n + j]);
                if t < 0 || d < 0 {
                    return Err(ModelError::InvalidMatrix(format!("negative entry at ({i}, {j})")));
                }
                if i == j && (t != 0 || d != 0) {
                    return Err(ModelError::InvalidMatrix(format!("non-zero diagonal at {i}")));
                }
            }
        }
        Ok(TimeDistanceMatrix { n, times, distances })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn time(&self, from: LocationId, to: LocationId) -> Time {
        self.times[from.index() * self.n + to.index()]
    }

    #[inline]
    pub fn distance(&self, from: LocationId, to: LocationId) -> Distance {
        self.distances[from.index() * self.n + to.index()]
    }

    pub fn check_location(&self, loc: LocationId) -> Result<(), ModelError> {
        if loc.index() < self.n {
            Ok(())
        } else {
            Err(ModelError::UnknownLocation { index: loc.index(), len: self.n })
        }
    }
}

/// A stop a vehicle must make: location, time window, service time and the
/// signed change in load. Depot waypoints carry no order and no volume.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Waypoint {
    pub loc: LocationId,
    pub st: Time,
    pub et: Time,
    #[serde(default)]
    pub service: Time,
    #[serde(default)]
    pub vol: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<OrderId>,
}

impl Waypoint {
    pub fn depot(loc: LocationId, st: Time, et: Time) -> Waypoint {
        Waypoint { loc, st, et, service: 0, vol: 0, order: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    pub id: OrderId,
    /// The LSP that originally holds the order.
    pub owner: LspId,
    pub rev: Money,
    pub pickup: Waypoint,
    pub dropoff: Waypoint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: VehicleId,
    pub lspid: LspId,
    pub cap: i64,
    pub depot: Waypoint,
}

/// Cost parameters and fleet of one logistics service provider.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LspParams {
    pub id: LspId,
    /// Money per whole distance unit travelled.
    pub alpha: Money,
    /// Fixed cost of a vehicle that serves at least one order.
    pub beta: Money,
    pub fleet: Vec<VehicleId>,
}

impl LspParams {
    /// Cost of one vehicle route of the given length. Unused vehicles cost nothing.
    pub fn vehicle_cost(&self, distance: Distance, used: bool) -> Money {
        if !used {
            return Money::ZERO;
        }
        let variable = round_div(self.alpha.0 as i128 * distance as i128, SCALE as i128);
        self.beta + Money(variable)
    }
}

/// Planar coordinates, only used by instance generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub id: LocationId,
    pub x: f64,
    pub y: f64,
}

fn default_schema_version() -> u32 {
    INSTANCE_SCHEMA_VERSION
}

fn default_scale() -> i64 {
    SCALE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    /// Sub-units per whole unit for every time, distance and money field.
    #[serde(default = "default_scale")]
    pub scale: i64,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub locations: Vec<Location>,
    pub matrix: TimeDistanceMatrix,
    pub orders: Vec<Order>,
    pub vehicles: Vec<Vehicle>,
    pub lsps: Vec<LspParams>,
}

impl Instance {
    pub fn order(&self, id: OrderId) -> Result<&Order, ModelError> {
        self.orders.get(id.index()).ok_or(ModelError::UnknownOrder(id))
    }

    pub fn vehicle(&self, id: VehicleId) -> Result<&Vehicle, ModelError> {
        self.vehicles.get(id.index()).ok_or(ModelError::UnknownVehicle(id))
    }

    pub fn lsp(&self, id: LspId) -> Result<&LspParams, ModelError> {
        self.lsps.get(id.index()).ok_or(ModelError::UnknownLsp(id))
    }

    /// Cost parameters of the LSP owning `vehicle`.
    pub fn params_of(&self, vehicle: VehicleId) -> Result<&LspParams, ModelError> {
        self.lsp(self.vehicle(vehicle)?.lspid)
    }

    pub fn all_revenue_zero(&self) -> bool {
        self.orders.iter().all(|o| o.rev == Money::ZERO)
    }

    pub fn orders_of(&self, lsp: LspId) -> impl Iterator<Item = &Order> {
        self.orders.iter().filter(move |o| o.owner == lsp)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidInstance(msg));
        if self.scale != SCALE {
            return bad(format!("unsupported scale {} (expected {SCALE})", self.scale));
        }
        for (i, lsp) in self.lsps.iter().enumerate() {
            if lsp.id.index() != i {
                return bad(format!("LSP at position {i} has id {}", lsp.id));
            }
            if lsp.alpha < Money::ZERO || lsp.beta < Money::ZERO {
                return bad(format!("{} has negative cost parameters", lsp.id));
            }
            for v in &lsp.fleet {
                let vehicle = self.vehicle(*v)?;
                if vehicle.lspid != lsp.id {
                    return bad(format!("{v} listed in fleet of {} but owned by {}", lsp.id, vehicle.lspid));
                }
            }
        }
        for (i, v) in self.vehicles.iter().enumerate() {
            if v.id.index() != i {
                return bad(format!("vehicle at position {i} has id {}", v.id));
            }
            let lsp = self.lsp(v.lspid)?;
            if !lsp.fleet.contains(&v.id) {
                return bad(format!("{} missing from the fleet of {}", v.id, v.lspid));
            }
            if v.cap <= 0 {
                return bad(format!("{} has non-positive capacity", v.id));
            }
            self.check_waypoint(&v.depot)?;
            if v.depot.vol != 0 || v.depot.order.is_some() {
                return bad(format!("depot of {} carries load or an order", v.id));
            }
        }
        for (i, o) in self.orders.iter().enumerate() {
            if o.id.index() != i {
                return bad(format!("order at position {i} has id {}", o.id));
            }
            self.lsp(o.owner)?;
            if o.rev < Money::ZERO {
                return bad(format!("{} has negative revenue", o.id));
            }
            self.check_waypoint(&o.pickup)?;
            self.check_waypoint(&o.dropoff)?;
            if o.pickup.vol <= 0 || o.dropoff.vol != -o.pickup.vol {
                return bad(format!("{} has inconsistent volumes", o.id));
            }
            if o.pickup.order != Some(o.id) || o.dropoff.order != Some(o.id) {
                return bad(format!("waypoints of {} reference another order", o.id));
            }
        }
        Ok(())
    }

    fn check_waypoint(&self, w: &Waypoint) -> Result<(), ModelError> {
        self.matrix.check_location(w.loc)?;
        if w.st > w.et || w.service < 0 {
            return Err(ModelError::InvalidInstance(format!(
                "waypoint at {} has window [{}, {}] and service {}",
                w.loc, w.st, w.et, w.service
            )));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Instance, ModelError> {
        let inst: Instance = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Instance, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ModelError::Io { path: path.display().to_string(), source })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization cannot fail")
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string())
            .map_err(|source| ModelError::Io { path: path.display().to_string(), source })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StopKind {
    Pickup,
    Dropoff,
}

/// One interior waypoint of a schedule: the pickup or drop-off of an order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Stop {
    pub order: OrderId,
    pub kind: StopKind,
}

impl Stop {
    pub fn pickup(order: OrderId) -> Stop {
        Stop { order, kind: StopKind::Pickup }
    }

    pub fn dropoff(order: OrderId) -> Stop {
        Stop { order, kind: StopKind::Dropoff }
    }

    pub fn is_pickup(self) -> bool {
        self.kind == StopKind::Pickup
    }

    pub fn waypoint(self, order: &Order) -> &Waypoint {
        match self.kind {
            StopKind::Pickup => &order.pickup,
            StopKind::Dropoff => &order.dropoff,
        }
    }
}

impl fmt::Display for Stop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.is_pickup() { 'P' } else { 'D' };
        write!(f, "{tag}{}", self.order.0)
    }
}

impl From<Stop> for String {
    fn from(s: Stop) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for Stop {
    type Error = String;
    fn try_from(s: String) -> Result<Stop, String> {
        let (kind, rest) = match s.split_at_checked(1) {
            Some(("P", rest)) => (StopKind::Pickup, rest),
            Some(("D", rest)) => (StopKind::Dropoff, rest),
            _ => return Err(format!("bad stop `{s}`")),
        };
        let id = rest.parse::<u32>().map_err(|_| format!("bad stop `{s}`"))?;
        Ok(Stop { order: OrderId(id), kind })
    }
}

/// The route of one vehicle. The depot at both ends is implicit; `stops`
/// holds the interior waypoints in visiting order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VehicleSchedule {
    pub vehicle: VehicleId,
    pub stops: Vec<Stop>,
}

impl VehicleSchedule {
    pub fn depot_only(vehicle: VehicleId) -> VehicleSchedule {
        VehicleSchedule { vehicle, stops: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.stops.is_empty()
    }

    /// Orders served, in pickup order.
    pub fn orders(&self) -> impl Iterator<Item = OrderId> + '_ {
        self.stops.iter().filter(|s| s.is_pickup()).map(|s| s.order)
    }

    /// Full waypoint list including both depot visits.
    pub fn waypoints<'a>(&'a self, inst: &'a Instance) -> Result<Vec<&'a Waypoint>, ModelError> {
        let depot = &inst.vehicle(self.vehicle)?.depot;
        let mut out = Vec::with_capacity(self.stops.len() + 2);
        out.push(depot);
        for s in &self.stops {
            out.push(s.waypoint(inst.order(s.order)?));
        }
        out.push(depot);
        Ok(out)
    }
}

/// Why a schedule failed evaluation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// Service at waypoint `position` (0 = start depot) cannot start before its window closes.
    TimeWindow { position: usize },
    /// Load exceeds capacity (or goes negative) after waypoint `position`.
    Capacity { position: usize },
    /// Drop-off visited without a preceding pickup.
    Precedence { order: OrderId },
    /// The same waypoint appears twice.
    Duplicate { order: OrderId },
    /// Pickup without matching drop-off.
    MissingDropoff { order: OrderId },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleEval {
    pub feasible: bool,
    pub violation: Option<Violation>,
    pub distance: Distance,
    pub cost: Money,
    pub revenue: Money,
    /// Service start time at each waypoint, depots included. Truncated at
    /// the first time-window violation.
    pub times: Vec<Time>,
}

impl ScheduleEval {
    pub fn profit(&self) -> Money {
        self.revenue - self.cost
    }
}

/// Evaluates a schedule: inferred times (early arrivals wait for the window
/// to open), feasibility, route distance, cost and revenue.
pub fn evaluate_schedule(schedule: &VehicleSchedule, inst: &Instance) -> Result<ScheduleEval, ModelError> {
    let vehicle = inst.vehicle(schedule.vehicle)?;
    let params = inst.lsp(vehicle.lspid)?;
    let matrix = &inst.matrix;
    let depot = &vehicle.depot;
    matrix.check_location(depot.loc)?;

    let mut violation = None;
    let mut seen_pickup = BTreeSet::new();
    let mut seen_dropoff = BTreeSet::new();
    let mut revenue = Money::ZERO;
    let mut load = 0i64;
    let mut distance: Distance = 0;
    let mut times = Vec::with_capacity(schedule.stops.len() + 2);
    let mut time_ok = depot.st <= depot.et;
    let mut t = depot.st;
    times.push(t);
    let mut prev = depot;

    let n = schedule.stops.len();
    for (i, stop) in schedule.stops.iter().enumerate() {
        let position = i + 1;
        let order = inst.order(stop.order)?;
        let w = stop.waypoint(order);
        matrix.check_location(w.loc)?;
        match stop.kind {
            StopKind::Pickup => {
                if !seen_pickup.insert(stop.order) && violation.is_none() {
                    violation = Some(Violation::Duplicate { order: stop.order });
                }
                revenue += order.rev;
            }
            StopKind::Dropoff => {
                if !seen_dropoff.insert(stop.order) && violation.is_none() {
                    violation = Some(Violation::Duplicate { order: stop.order });
                }
                if !seen_pickup.contains(&stop.order) && violation.is_none() {
                    violation = Some(Violation::Precedence { order: stop.order });
                }
            }
        }
        distance += matrix.distance(prev.loc, w.loc);
        if time_ok {
            t = (t + prev.service + matrix.time(prev.loc, w.loc)).max(w.st);
            if t > w.et {
                time_ok = false;
                if violation.is_none() {
                    violation = Some(Violation::TimeWindow { position });
                }
            } else {
                times.push(t);
            }
        }
        load += w.vol;
        if (load > vehicle.cap || load < 0) && violation.is_none() {
            violation = Some(Violation::Capacity { position });
        }
        prev = w;
    }
    distance += matrix.distance(prev.loc, depot.loc);
    if time_ok {
        // Only the arrival at the closing depot is checked.
        t = (t + prev.service + matrix.time(prev.loc, depot.loc)).max(depot.st);
        if t > depot.et {
            if violation.is_none() {
                violation = Some(Violation::TimeWindow { position: n + 1 });
            }
        } else {
            times.push(t);
        }
    } else if violation.is_none() {
        violation = Some(Violation::TimeWindow { position: 0 });
    }
    if violation.is_none() {
        if let Some(missing) = seen_pickup.difference(&seen_dropoff).next() {
            violation = Some(Violation::MissingDropoff { order: *missing });
        }
    }

    let used = n > 0;
    Ok(ScheduleEval {
        feasible: violation.is_none(),
        violation,
        distance: if used { distance } else { 0 },
        cost: params.vehicle_cost(distance, used),
        revenue,
        times,
    })
}

/// One schedule per vehicle plus the no-collaboration baseline each LSP is
/// protected against.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub schedules: Vec<VehicleSchedule>,
    /// `Init` profit per LSP, indexed by LSP id.
    pub baseline: Vec<Money>,
    /// Total route distance of the baseline solution.
    pub baseline_distance: Distance,
}

impl Solution {
    /// Builds a solution from schedules and records it as its own baseline.
    pub fn with_own_baseline(schedules: Vec<VehicleSchedule>, inst: &Instance) -> Result<Solution, ModelError> {
        let mut sol = Solution { schedules, baseline: Vec::new(), baseline_distance: 0 };
        sol.baseline = lsp_profits(&sol, inst)?;
        sol.baseline_distance = total_distance(&sol, inst)?;
        Ok(sol)
    }

    pub fn schedule(&self, v: VehicleId) -> &VehicleSchedule {
        &self.schedules[v.index()]
    }

    /// Every order appears exactly once across all schedules (pickup and drop-off).
    pub fn check_conservation(&self, inst: &Instance) -> Result<(), ModelError> {
        let mut pick = vec![0u32; inst.orders.len()];
        let mut drop = vec![0u32; inst.orders.len()];
        for s in &self.schedules {
            for stop in &s.stops {
                let slot = match stop.kind {
                    StopKind::Pickup => pick.get_mut(stop.order.index()),
                    StopKind::Dropoff => drop.get_mut(stop.order.index()),
                };
                *slot.ok_or(ModelError::UnknownOrder(stop.order))? += 1;
            }
        }
        for (i, (p, d)) in pick.iter().zip(&drop).enumerate() {
            if *p != 1 || *d != 1 {
                return Err(ModelError::InvalidInstance(format!(
                    "order {} appears {p}/{d} times (pickup/drop-off)",
                    OrderId::from_index(i)
                )));
            }
        }
        Ok(())
    }

    /// Structural and feasibility check of the whole solution.
    pub fn validate(&self, inst: &Instance) -> Result<(), ModelError> {
        if self.schedules.len() != inst.vehicles.len() {
            return Err(ModelError::InvalidInstance(format!(
                "{} schedules for {} vehicles",
                self.schedules.len(),
                inst.vehicles.len()
            )));
        }
        for (i, s) in self.schedules.iter().enumerate() {
            if s.vehicle.index() != i {
                return Err(ModelError::InvalidInstance(format!("schedule {i} belongs to {}", s.vehicle)));
            }
            let eval = evaluate_schedule(s, inst)?;
            if !eval.feasible {
                return Err(ModelError::InvalidInstance(format!(
                    "schedule of {} infeasible: {:?}",
                    s.vehicle, eval.violation
                )));
            }
        }
        self.check_conservation(inst)
    }
}

/// Profit of one LSP: revenue minus cost over its fleet.
pub fn lsp_profit(sol: &Solution, inst: &Instance, lsp: LspId) -> Result<Money, ModelError> {
    let params = inst.lsp(lsp)?;
    let mut total = Money::ZERO;
    for v in &params.fleet {
        let sched = sol.schedules.get(v.index()).ok_or(ModelError::UnknownVehicle(*v))?;
        total += evaluate_schedule(sched, inst)?.profit();
    }
    Ok(total)
}

/// Profit of every LSP, indexed by LSP id.
pub fn lsp_profits(sol: &Solution, inst: &Instance) -> Result<Vec<Money>, ModelError> {
    let mut out = vec![Money::ZERO; inst.lsps.len()];
    for s in &sol.schedules {
        let lsp = inst.vehicle(s.vehicle)?.lspid;
        out[lsp.index()] += evaluate_schedule(s, inst)?.profit();
    }
    Ok(out)
}

pub fn total_distance(sol: &Solution, inst: &Instance) -> Result<Distance, ModelError> {
    let mut total = 0;
    for s in &sol.schedules {
        total += evaluate_schedule(s, inst)?.distance;
    }
    Ok(total)
}

/// What social welfare is measured on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WelfareBasis {
    /// Zero-revenue instances: reduction of total distance.
    Distance,
    /// Reduction of total profit otherwise.
    Profit,
}

impl WelfareBasis {
    pub fn of(inst: &Instance) -> WelfareBasis {
        if inst.all_revenue_zero() {
            WelfareBasis::Distance
        } else {
            WelfareBasis::Profit
        }
    }
}

/// Exact quantity whose growth social welfare measures: negative total
/// distance or total profit, depending on the basis.
pub fn welfare_objective(sol: &Solution, inst: &Instance) -> Result<i64, ModelError> {
    Ok(match WelfareBasis::of(inst) {
        WelfareBasis::Distance => -total_distance(sol, inst)?,
        WelfareBasis::Profit => lsp_profits(sol, inst)?.iter().sum::<Money>().0,
    })
}

/// Percentage improvement over the baseline; `None` when the baseline
/// denominator is zero.
pub fn social_welfare(sol: &Solution, inst: &Instance) -> Result<Option<f64>, ModelError> {
    Ok(match WelfareBasis::of(inst) {
        WelfareBasis::Distance => {
            let now = total_distance(sol, inst)?;
            percent_change(sol.baseline_distance - now, sol.baseline_distance)
        }
        WelfareBasis::Profit => {
            let init: Money = sol.baseline.iter().sum();
            let now: Money = lsp_profits(sol, inst)?.iter().sum();
            percent_change((now - init).0, init.0.abs())
        }
    })
}

fn percent_change(gain: i64, base: i64) -> Option<f64> {
    if base == 0 {
        None
    } else {
        Some(100.0 * gain as f64 / base as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Locations on a line, distances `|i - j|` scaled; one LSP, one vehicle.
    fn line_instance(points: &[i64], alpha: i64, beta: i64, rev: i64) -> Instance {
        let n = points.len();
        let matrix = TimeDistanceMatrix::from_fn(n, |i, j| {
            let d = (points[i] - points[j]).abs() * SCALE;
            (d, d)
        })
        .unwrap();
        let wp = |loc: usize, vol: i64| Waypoint {
            loc: LocationId::from_index(loc),
            st: 0,
            et: 1000 * SCALE,
            service: 0,
            vol,
            order: Some(OrderId(0)),
        };
        Instance {
            schema_version: INSTANCE_SCHEMA_VERSION,
            scale: SCALE,
            name: "line".into(),
            locations: vec![],
            matrix,
            orders: vec![Order {
                id: OrderId(0),
                owner: LspId(0),
                rev: Money::from_units(rev as f64),
                pickup: wp(1, 1),
                dropoff: wp(2, -1),
            }],
            vehicles: vec![
                Vehicle {
                    id: VehicleId(0),
                    lspid: LspId(0),
                    cap: 1,
                    depot: Waypoint::depot(LocationId(0), 0, 1000 * SCALE),
                },
                Vehicle {
                    id: VehicleId(1),
                    lspid: LspId(0),
                    cap: 1,
                    depot: Waypoint::depot(LocationId(0), 0, 1000 * SCALE),
                },
            ],
            lsps: vec![LspParams {
                id: LspId(0),
                alpha: Money::from_units(alpha as f64),
                beta: Money::from_units(beta as f64),
                fleet: vec![VehicleId(0), VehicleId(1)],
            }],
        }
    }

    fn pd() -> VehicleSchedule {
        VehicleSchedule { vehicle: VehicleId(0), stops: vec![Stop::pickup(OrderId(0)), Stop::dropoff(OrderId(0))] }
    }

    #[test]
    fn depot_only_schedule_is_free() {
        let inst = line_instance(&[0, 3, 7], 1, 5, 30);
        let eval = evaluate_schedule(&VehicleSchedule::depot_only(VehicleId(0)), &inst).unwrap();
        assert!(eval.feasible);
        assert_eq!(eval.cost, Money::ZERO);
        assert_eq!(eval.revenue, Money::ZERO);
    }

    #[test]
    fn cost_and_revenue_of_single_order() {
        let mut inst = line_instance(&[0, 3, 7], 2, 5, 30);
        // legs depot->P = 3, P->D = 4, D->depot = 3
        inst.matrix = TimeDistanceMatrix::new(
            vec![vec![0, 300, 300], vec![300, 0, 400], vec![300, 400, 0]],
            vec![vec![0, 300, 300], vec![300, 0, 400], vec![300, 400, 0]],
        )
        .unwrap();
        let eval = evaluate_schedule(&pd(), &inst).unwrap();
        assert!(eval.feasible);
        assert_eq!(eval.distance, 1000);
        assert_eq!(eval.cost, Money::from_units(25.0));
        assert_eq!(eval.revenue, Money::from_units(30.0));
        assert_eq!(eval.times, vec![0, 300, 700, 1000]);
    }

    #[test]
    fn dropoff_before_pickup_is_infeasible() {
        let inst = line_instance(&[0, 3, 7], 1, 5, 30);
        let s =
            VehicleSchedule { vehicle: VehicleId(0), stops: vec![Stop::dropoff(OrderId(0)), Stop::pickup(OrderId(0))] };
        let eval = evaluate_schedule(&s, &inst).unwrap();
        assert!(!eval.feasible);
        assert_eq!(eval.violation, Some(Violation::Precedence { order: OrderId(0) }));
    }

    #[test]
    fn late_arrival_is_infeasible() {
        let mut inst = line_instance(&[0, 3, 50], 1, 5, 30);
        // Drop-off window closes before the 47-unit leg from the pickup can finish.
        inst.orders[0].dropoff.et = 40 * SCALE;
        let eval = evaluate_schedule(&pd(), &inst).unwrap();
        assert!(!eval.feasible);
        assert_eq!(eval.violation, Some(Violation::TimeWindow { position: 2 }));
    }

    #[test]
    fn early_arrival_waits_for_window() {
        let mut inst = line_instance(&[0, 3, 7], 1, 0, 0);
        inst.orders[0].pickup.st = 10 * SCALE;
        let eval = evaluate_schedule(&pd(), &inst).unwrap();
        assert!(eval.feasible);
        assert_eq!(eval.times, vec![0, 1000, 1400, 2100]);
    }

    #[test]
    fn capacity_and_missing_dropoff() {
        let mut inst = line_instance(&[0, 3, 7], 1, 0, 0);
        inst.orders[0].pickup.vol = 2;
        inst.orders[0].dropoff.vol = -2;
        let eval = evaluate_schedule(&pd(), &inst).unwrap();
        assert_eq!(eval.violation, Some(Violation::Capacity { position: 1 }));

        let inst = line_instance(&[0, 3, 7], 1, 0, 0);
        let s = VehicleSchedule { vehicle: VehicleId(0), stops: vec![Stop::pickup(OrderId(0))] };
        let eval = evaluate_schedule(&s, &inst).unwrap();
        assert_eq!(eval.violation, Some(Violation::MissingDropoff { order: OrderId(0) }));
    }

    #[test]
    fn unknown_location_is_structural_error() {
        let mut inst = line_instance(&[0, 3, 7], 1, 0, 0);
        inst.orders[0].dropoff.loc = LocationId(9);
        assert!(matches!(evaluate_schedule(&pd(), &inst), Err(ModelError::UnknownLocation { index: 9, .. })));
    }

    #[test]
    fn profit_examples() {
        let mut inst = line_instance(&[0, 3, 7], 2, 5, 30);
        inst.matrix = TimeDistanceMatrix::new(
            vec![vec![0, 300, 300], vec![300, 0, 400], vec![300, 400, 0]],
            vec![vec![0, 300, 300], vec![300, 0, 400], vec![300, 400, 0]],
        )
        .unwrap();
        let idle = Solution::with_own_baseline(
            vec![VehicleSchedule::depot_only(VehicleId(0)), VehicleSchedule::depot_only(VehicleId(1))],
            &inst,
        )
        .unwrap();
        assert_eq!(lsp_profit(&idle, &inst, LspId(0)).unwrap(), Money::ZERO);

        let busy = Solution::with_own_baseline(vec![pd(), VehicleSchedule::depot_only(VehicleId(1))], &inst).unwrap();
        assert_eq!(lsp_profit(&busy, &inst, LspId(0)).unwrap(), Money::from_units(5.0));
        assert!(lsp_profit(&busy, &inst, LspId(3)).is_err());

        inst.orders[0].rev = Money::ZERO;
        assert_eq!(lsp_profit(&busy, &inst, LspId(0)).unwrap(), Money::from_units(-25.0));
    }

    #[test]
    fn cost_is_affine_in_alpha() {
        let mut inst = line_instance(&[0, 3, 7], 0, 5, 0);
        let mut costs = vec![];
        for alpha in 0..3 {
            inst.lsps[0].alpha = Money::from_units(alpha as f64);
            costs.push(evaluate_schedule(&pd(), &inst).unwrap().cost);
        }
        // 0 -> 3 -> 7 -> 0 is 14 units long.
        assert_eq!(costs[1] - costs[0], Money::from_units(14.0));
        assert_eq!(costs[2] - costs[1], Money::from_units(14.0));
    }

    #[test]
    fn welfare_on_both_bases() {
        let inst = line_instance(&[0, 3, 7], 1, 0, 0);
        let mut sol =
            Solution::with_own_baseline(vec![pd(), VehicleSchedule::depot_only(VehicleId(1))], &inst).unwrap();
        assert_eq!(social_welfare(&sol, &inst).unwrap(), Some(0.0));
        // the route is 14 units long
        sol.baseline_distance = 1000 * SCALE;
        assert_eq!(social_welfare(&sol, &inst).unwrap(), Some(98.6));
        assert_eq!(percent_change(1000 - 880, 1000), Some(12.0));
        assert_eq!(percent_change(1432, 10000), Some(14.32));
        assert_eq!(percent_change(5, 0), None);
    }

    #[test]
    fn stop_string_roundtrip() {
        let s = Stop::dropoff(OrderId(17));
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "\"D17\"");
        assert_eq!(serde_json::from_str::<Stop>(&json).unwrap(), s);
        assert!(serde_json::from_str::<Stop>("\"X1\"").is_err());
    }

    #[test]
    fn money_display_and_rounding() {
        assert_eq!(Money(-1234).to_string(), "-12.34");
        assert_eq!(Money(5).to_string(), "0.05");
        assert_eq!(round_div(250, 100), 3);
        assert_eq!(round_div(-250, 100), -3);
        assert_eq!(round_div(249, 100), 2);
    }
}
