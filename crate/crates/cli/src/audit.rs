//! Independent check of a solution against its instance.
//!
//! Nothing here goes through the engine's schedule evaluator: every route is
//! re-walked from the raw waypoints, and costs are recomputed from the LSP
//! parameters. A report is only trusted when this agrees.

use gatx_core::model::{Instance, LspId, Money, Order, Solution, StopKind, Vehicle, VehicleSchedule};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Outcome of auditing one solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Audit {
    /// Every route respects windows, capacity and pickup-before-drop-off.
    pub feasible: bool,
    /// Every order is picked up and dropped off exactly once, by one vehicle.
    pub conserved: bool,
    /// Every LSP ends at or above its recorded baseline.
    pub individually_rational: bool,
    /// The recorded baseline is what the no-collaboration routes earn.
    pub baseline_consistent: bool,
    /// Recomputed profit per LSP, indexed by LSP id.
    pub profits: Vec<Money>,
    pub total_distance: i64,
    pub issues: Vec<String>,
}

impl Audit {
    pub fn passed(&self) -> bool {
        self.feasible && self.conserved && self.individually_rational && self.baseline_consistent
    }
}

struct Walk {
    distance: i64,
    revenue: Money,
    used: bool,
}

fn half_away_div(num: i128, den: i128) -> i128 {
    let q = (num.abs() + den / 2) / den;
    if num < 0 {
        -q
    } else {
        q
    }
}

fn route_cost(inst: &Instance, vehicle: &Vehicle, walk: &Walk) -> Result<Money, String> {
    if !walk.used {
        return Ok(Money::ZERO);
    }
    let params = inst
        .lsps
        .iter()
        .find(|p| p.id == vehicle.lspid)
        .ok_or_else(|| format!("vehicle {} belongs to unknown {}", vehicle.id, vehicle.lspid))?;
    let variable = half_away_div(params.alpha.0 as i128 * walk.distance as i128, inst.scale as i128);
    Ok(params.beta + Money(variable as i64))
}

/// Walks one route: depot, stops, depot. Arrivals before a window opens
/// wait; the closing depot visit only needs to be reached in time.
fn walk(inst: &Instance, vehicle: &Vehicle, sched: &VehicleSchedule, issues: &mut Vec<String>) -> Result<Walk, String> {
    let n_loc = inst.matrix.len();
    let in_range = |loc: usize| -> Result<(), String> {
        if loc < n_loc {
            Ok(())
        } else {
            Err(format!("location {loc} outside the matrix"))
        }
    };
    let depot = &vehicle.depot;
    in_range(depot.loc.index())?;
    let mut ok = true;
    let mut fail = |msg: String| {
        issues.push(format!("{}: {msg}", vehicle.id));
        ok = false;
    };
    if depot.st > depot.et {
        fail("depot window is empty".into());
    }
    let mut t = depot.st;
    let mut at = depot.loc;
    let mut service = depot.service;
    let mut load = 0i64;
    let mut distance = 0i64;
    let mut revenue = Money::ZERO;
    let mut picked: BTreeMap<u32, bool> = BTreeMap::new();
    for (k, stop) in sched.stops.iter().enumerate() {
        let order: &Order =
            inst.orders.iter().find(|o| o.id == stop.order).ok_or_else(|| format!("unknown order {}", stop.order))?;
        let w = match stop.kind {
            StopKind::Pickup => &order.pickup,
            StopKind::Dropoff => &order.dropoff,
        };
        in_range(w.loc.index())?;
        distance += inst.matrix.distance(at, w.loc);
        let start = (t + service + inst.matrix.time(at, w.loc)).max(w.st);
        if start > w.et {
            fail(format!("stop {k} ({stop}) starts at {start}, after its window closes at {}", w.et));
        }
        t = start;
        at = w.loc;
        service = w.service;
        load += w.vol;
        if load < 0 || load > vehicle.cap {
            fail(format!("load {load} after stop {k} outside [0, {}]", vehicle.cap));
        }
        match stop.kind {
            StopKind::Pickup => {
                if picked.insert(order.id.0, false).is_some() {
                    fail(format!("{} picked up twice", order.id));
                }
                revenue += order.rev;
            }
            StopKind::Dropoff => match picked.get_mut(&order.id.0) {
                Some(done @ false) => *done = true,
                Some(true) => fail(format!("{} dropped off twice", order.id)),
                None => fail(format!("{} dropped off before pickup", order.id)),
            },
        }
    }
    distance += inst.matrix.distance(at, depot.loc);
    let back = (t + service + inst.matrix.time(at, depot.loc)).max(depot.st);
    if back > depot.et {
        fail(format!("returns to depot at {back}, after {}", depot.et));
    }
    for (o, done) in &picked {
        if !done {
            fail(format!("order {o} never dropped off"));
        }
    }
    let used = !sched.stops.is_empty();
    if !ok {
        return Err(format!("{}: infeasible route", vehicle.id));
    }
    Ok(Walk { distance: if used { distance } else { 0 }, revenue, used })
}

/// Per-LSP profit and total distance, or the problems found.
fn tally(inst: &Instance, sol: &Solution, issues: &mut Vec<String>) -> (bool, bool, Vec<Money>, i64) {
    let mut feasible = true;
    let mut conserved = true;
    let mut profits = vec![Money::ZERO; inst.lsps.len()];
    let mut total_distance = 0;
    if sol.schedules.len() != inst.vehicles.len() {
        issues.push(format!("{} schedules for {} vehicles", sol.schedules.len(), inst.vehicles.len()));
        conserved = false;
    }
    let mut served: BTreeMap<u32, usize> = BTreeMap::new();
    let mut seen_vehicles = BTreeMap::new();
    for sched in &sol.schedules {
        if seen_vehicles.insert(sched.vehicle, ()).is_some() {
            issues.push(format!("{} has two schedules", sched.vehicle));
            conserved = false;
        }
        let Some(vehicle) = inst.vehicles.iter().find(|v| v.id == sched.vehicle) else {
            issues.push(format!("schedule for unknown {}", sched.vehicle));
            feasible = false;
            continue;
        };
        for stop in &sched.stops {
            if stop.kind == StopKind::Pickup {
                *served.entry(stop.order.0).or_default() += 1;
            }
        }
        match walk(inst, vehicle, sched, issues) {
            Ok(w) => {
                total_distance += w.distance;
                match route_cost(inst, vehicle, &w) {
                    Ok(cost) => {
                        let slot = profits.iter_mut().zip(&inst.lsps).find(|(_, p)| p.id == vehicle.lspid);
                        match slot {
                            Some((acc, _)) => *acc += w.revenue - cost,
                            None => {
                                issues.push(format!("{} belongs to unknown {}", vehicle.id, vehicle.lspid));
                                feasible = false;
                            }
                        }
                    }
                    Err(e) => {
                        issues.push(e);
                        feasible = false;
                    }
                }
            }
            Err(e) => {
                issues.push(e);
                feasible = false;
            }
        }
    }
    for order in &inst.orders {
        match served.get(&order.id.0) {
            Some(1) => {}
            Some(k) => {
                issues.push(format!("{} served {k} times", order.id));
                conserved = false;
            }
            None => {
                issues.push(format!("{} not served", order.id));
                conserved = false;
            }
        }
    }
    (feasible, conserved, profits, total_distance)
}

/// Audits `solution` and, when given, the no-collaboration `initial`
/// solution its baseline is supposed to come from: `initial` must be
/// feasible, route every order with its owner's fleet, and earn exactly the
/// recorded baseline.
pub fn audit(inst: &Instance, solution: &Solution, initial: Option<&Solution>) -> Audit {
    let mut issues = Vec::new();
    let (feasible, conserved, profits, total_distance) = tally(inst, solution, &mut issues);

    let mut individually_rational = solution.baseline.len() == inst.lsps.len();
    if !individually_rational {
        issues.push(format!("baseline has {} entries for {} LSPs", solution.baseline.len(), inst.lsps.len()));
    }
    for (l, (now, init)) in profits.iter().zip(&solution.baseline).enumerate() {
        if now < init {
            issues.push(format!("{}: profit {now} below baseline {init}", LspId(l as u32)));
            individually_rational = false;
        }
    }

    let mut baseline_consistent = true;
    if let Some(initial) = initial {
        let mut sub = Vec::new();
        let (f, c, base, base_dist) = tally(inst, initial, &mut sub);
        issues.extend(sub.into_iter().map(|s| format!("baseline solution: {s}")));
        baseline_consistent = f && c;
        for sched in &initial.schedules {
            let owner = inst.vehicles.iter().find(|v| v.id == sched.vehicle).map(|v| v.lspid);
            for stop in &sched.stops {
                let order_owner = inst.orders.iter().find(|o| o.id == stop.order).map(|o| o.owner);
                if order_owner != owner {
                    issues.push(format!("baseline solution: {} carried outside its owner's fleet", stop.order));
                    baseline_consistent = false;
                }
            }
        }
        if base != solution.baseline || base != initial.baseline {
            issues.push(format!("recorded baseline {:?} differs from recomputed {base:?}", solution.baseline));
            baseline_consistent = false;
        }
        if base_dist != solution.baseline_distance {
            issues.push(format!(
                "recorded baseline distance {} differs from recomputed {base_dist}",
                solution.baseline_distance
            ));
            baseline_consistent = false;
        }
    }

    Audit { feasible, conserved, individually_rational, baseline_consistent, profits, total_distance, issues }
}
