//! Order-package exchange, the baseline that GAT is compared against.
//!
//! A package is a set of orders whose stops form one consecutive block of a
//! route. Each iteration lists every package, prices moving it to every
//! other vehicle (a one-vehicle routing solve on the receiver), and
//! combines those one-to-one exchanges under two rules: a vehicle either
//! donates or receives, and a receiver takes at most one package. Donor
//! savings are estimated per package, so the combined plan is re-checked
//! after the donor routes are actually rebuilt.

use crate::combiner::{self, Candidate, ConflictProblem};
use crate::gat::{self, check_ir, slack, GatConfig, GatError, IterationRecord, RunOutcome};
use crate::model::{
    evaluate_schedule, lsp_profits, social_welfare, welfare_objective, Instance, LspId, ModelError, Money, OrderId,
    Solution, VehicleId, VehicleSchedule, Waypoint,
};
use crate::pdptw::{self, VrpRequest};
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;
use std::time::{Duration, Instant};

/// Orders occupying `stops[span]` of the source vehicle's route.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrderPackage {
    pub source_vehicle: VehicleId,
    /// Ascending.
    pub orders: Vec<OrderId>,
    pub span: Range<usize>,
}

impl OrderPackage {
    fn overlaps(&self, other: &OrderPackage) -> bool {
        self.source_vehicle == other.source_vehicle
            && self.span.start < other.span.end
            && other.span.start < self.span.end
    }
}

/// Moving one package to one receiver, priced as if nothing else changed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneToOneExchange {
    pub package: OrderPackage,
    pub receiver: VehicleId,
    pub donor_lsp: LspId,
    pub receiver_lsp: LspId,
    pub donor_delta: Money,
    pub receiver_delta: Money,
    /// Receiver route with the package orders routed in.
    pub receiver_schedule: VehicleSchedule,
}

impl OneToOneExchange {
    pub fn total_delta(&self) -> Money {
        self.donor_delta + self.receiver_delta
    }

    fn lsp_deltas(&self) -> Vec<(LspId, Money)> {
        if self.donor_lsp == self.receiver_lsp {
            vec![(self.donor_lsp, self.total_delta())]
        } else {
            vec![(self.donor_lsp, self.donor_delta), (self.receiver_lsp, self.receiver_delta)]
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExchangeStats {
    pub packages: usize,
    /// Package/receiver pairs ruled out by capacity or time windows alone.
    pub screened_out: usize,
    pub solves: usize,
    pub infeasible: usize,
    /// Feasible exchanges discarded for a non-positive estimated total.
    pub unprofitable: usize,
}

/// Every block of consecutive stops that contains both stops of each of
/// its orders, ordered by (start, end).
pub fn enumerate_packages(schedule: &VehicleSchedule) -> Vec<OrderPackage> {
    let stops = &schedule.stops;
    let mut out = Vec::new();
    for start in 0..stops.len() {
        if !stops[start].is_pickup() {
            continue;
        }
        let mut open = BTreeSet::new();
        let mut orders = Vec::new();
        for (end, s) in stops.iter().enumerate().skip(start) {
            if s.is_pickup() {
                open.insert(s.order);
                orders.push(s.order);
            } else if !open.remove(&s.order) {
                // Its pickup lies before `start`; no longer block works.
                break;
            }
            if open.is_empty() {
                let mut sorted = orders.clone();
                sorted.sort_unstable();
                out.push(OrderPackage { source_vehicle: schedule.vehicle, orders: sorted, span: start..end + 1 });
            }
        }
    }
    out
}

/// The donor's route without the given blocks.
fn remove_spans(schedule: &VehicleSchedule, spans: &[&Range<usize>]) -> VehicleSchedule {
    let stops = schedule
        .stops
        .iter()
        .enumerate()
        .filter(|(i, _)| !spans.iter().any(|r| r.contains(i)))
        .map(|(_, s)| *s)
        .collect();
    VehicleSchedule { vehicle: schedule.vehicle, stops }
}

/// Cheap necessary conditions for the receiver to serve the package: total
/// volume within capacity, and every order servable on a direct trip from
/// and back to the receiver's depot.
fn screen(inst: &Instance, package: &OrderPackage, receiver: VehicleId) -> bool {
    let veh = &inst.vehicles[receiver.index()];
    let volume: i64 = package.orders.iter().map(|o| inst.orders[o.index()].pickup.vol).sum();
    if volume > veh.cap {
        return false;
    }
    let depot = &veh.depot;
    let m = &inst.matrix;
    let leg = |t: i64, from: &Waypoint, to: &Waypoint| (t + from.service + m.time(from.loc, to.loc)).max(to.st);
    package.orders.iter().all(|o| {
        let order = &inst.orders[o.index()];
        let at_p = leg(depot.st, depot, &order.pickup);
        let at_d = leg(at_p, &order.pickup, &order.dropoff);
        let back = at_d + order.dropoff.service + m.time(order.dropoff.loc, depot.loc);
        at_p <= order.pickup.et && at_d <= order.dropoff.et && back <= depot.et
    })
}

/// Receivers for packages of the `rank`-th busy vehicle: every other busy
/// vehicle plus one idle vehicle per interchangeable class.
fn receivers(sol: &Solution, inst: &Instance) -> Vec<Vec<VehicleId>> {
    let busy: Vec<VehicleId> = sol.schedules.iter().filter(|s| !s.is_empty()).map(|s| s.vehicle).collect();
    let idle_classes = gat::idle_classes(sol, inst);
    let mut per_vehicle = vec![Vec::new(); sol.schedules.len()];
    for (rank, &donor) in busy.iter().enumerate() {
        let mut list: Vec<VehicleId> = busy.iter().copied().filter(|&v| v != donor).collect();
        list.extend(idle_classes.iter().map(|idle| idle[rank % idle.len()]));
        list.sort_unstable();
        per_vehicle[donor.index()] = list;
    }
    per_vehicle
}

fn exchange_seed(seed: u64, donor: VehicleId, span: &Range<usize>, receiver: VehicleId) -> u64 {
    let mut z = seed
        ^ (donor.0 as u64).rotate_left(48)
        ^ (span.start as u64).rotate_left(32)
        ^ (span.end as u64).rotate_left(16)
        ^ receiver.0 as u64;
    z = (z ^ (z >> 33)).wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    z = (z ^ (z >> 33)).wrapping_mul(0xC4CE_B9FE_1A85_EC53);
    z ^ (z >> 33)
}

enum Priced {
    Screened,
    Infeasible,
    Unprofitable,
    Exchange(Box<OneToOneExchange>),
}

fn price(
    sol: &Solution,
    inst: &Instance,
    cfg: &GatConfig,
    package: &OrderPackage,
    donor_delta: Money,
    receiver: VehicleId,
) -> Result<Priced, GatError> {
    if !screen(inst, package, receiver) {
        return Ok(Priced::Screened);
    }
    let current = sol.schedule(receiver);
    let req = VrpRequest {
        instance: inst,
        vehicles: vec![receiver],
        orders: current.orders().chain(package.orders.iter().copied()).collect(),
        seed_routes: Some(vec![current.stops.clone()]),
        time_limit: cfg.pair_time_limit,
        seed: exchange_seed(cfg.seed, package.source_vehicle, &package.span, receiver),
    };
    let res = pdptw::solve(&req)?;
    if !res.unassigned.is_empty() {
        return Ok(Priced::Infeasible);
    }
    let receiver_schedule = res.schedules.into_iter().next().expect("one schedule");
    let receiver_delta =
        evaluate_schedule(&receiver_schedule, inst)?.profit() - evaluate_schedule(current, inst)?.profit();
    if donor_delta + receiver_delta <= Money::ZERO {
        return Ok(Priced::Unprofitable);
    }
    Ok(Priced::Exchange(Box::new(OneToOneExchange {
        package: package.clone(),
        receiver,
        donor_lsp: inst.vehicles[package.source_vehicle.index()].lspid,
        receiver_lsp: inst.vehicles[receiver.index()].lspid,
        donor_delta,
        receiver_delta,
        receiver_schedule,
    })))
}

/// Prices every package against every candidate receiver. Only exchanges
/// with a positive estimated total are returned, ordered by (donor,
/// span, receiver).
pub fn generate_exchanges(
    sol: &Solution,
    inst: &Instance,
    cfg: &GatConfig,
) -> Result<(Vec<OneToOneExchange>, ExchangeStats), GatError> {
    let recv = receivers(sol, inst);
    let mut jobs: Vec<(OrderPackage, Money, VehicleId)> = Vec::new();
    let mut stats = ExchangeStats::default();
    for s in sol.schedules.iter().filter(|s| !s.is_empty()) {
        let before = evaluate_schedule(s, inst)?;
        for package in enumerate_packages(s) {
            stats.packages += 1;
            let after = evaluate_schedule(&remove_spans(s, &[&package.span]), inst)?;
            if !after.feasible {
                continue;
            }
            let donor_delta = after.profit() - before.profit();
            for &r in &recv[s.vehicle.index()] {
                jobs.push((package.clone(), donor_delta, r));
            }
        }
    }
    let priced: Vec<Priced> = in_pool(cfg.threads, || {
        jobs.par_iter().map(|(p, d, r)| price(sol, inst, cfg, p, *d, *r)).collect::<Result<_, _>>()
    })?;
    let mut out = Vec::new();
    for p in priced {
        match p {
            Priced::Screened => stats.screened_out += 1,
            Priced::Infeasible => {
                stats.solves += 1;
                stats.infeasible += 1;
            }
            Priced::Unprofitable => {
                stats.solves += 1;
                stats.unprofitable += 1;
            }
            Priced::Exchange(e) => {
                stats.solves += 1;
                out.push(*e);
            }
        }
    }
    Ok((out, stats))
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Result of combining one-to-one exchanges into a full exchange.
#[derive(Clone, Debug)]
pub struct FullExchange {
    /// Indices into the exchange list, ascending.
    pub selected: Vec<usize>,
    /// Selected exchanges dropped after rebuilding the routes.
    pub dropped: Vec<usize>,
    pub estimated_delta: Money,
    pub realized_delta: Money,
    pub solution: Solution,
    /// Whether the selection search finished within its limits.
    pub proven_optimal: bool,
}

fn conflict_problem(exchanges: &[OneToOneExchange], lsp_slack: &BTreeMap<LspId, Money>) -> ConflictProblem {
    let candidates = exchanges
        .iter()
        .map(|e| Candidate { gain: e.total_delta(), lsp_deltas: e.lsp_deltas(), exclusive: vec![e.receiver.0] })
        .collect();
    let mut donating: BTreeMap<VehicleId, Vec<usize>> = BTreeMap::new();
    let mut receiving: BTreeMap<VehicleId, Vec<usize>> = BTreeMap::new();
    for (i, e) in exchanges.iter().enumerate() {
        donating.entry(e.package.source_vehicle).or_default().push(i);
        receiving.entry(e.receiver).or_default().push(i);
    }
    let mut extra = Vec::new();
    for (v, given) in &donating {
        for &a in given {
            for &b in receiving.get(v).map_or(&[][..], |r| r) {
                extra.push((a, b));
            }
        }
        for (k, &a) in given.iter().enumerate() {
            for &b in &given[k + 1..] {
                if exchanges[a].package.overlaps(&exchanges[b].package) {
                    extra.push((a, b));
                }
            }
        }
    }
    ConflictProblem { candidates, slack: lsp_slack.clone(), extra_conflicts: extra }
}

/// Applies the chosen exchanges by rebuilding donor routes and installing
/// receiver routes; `None` if a rebuilt route is infeasible.
fn realize(
    sol: &Solution,
    inst: &Instance,
    exchanges: &[OneToOneExchange],
    chosen: &[usize],
) -> Result<Option<Solution>, ModelError> {
    let mut next = sol.clone();
    let mut spans: BTreeMap<VehicleId, Vec<&Range<usize>>> = BTreeMap::new();
    for &i in chosen {
        let e = &exchanges[i];
        spans.entry(e.package.source_vehicle).or_default().push(&e.package.span);
        next.schedules[e.receiver.index()] = e.receiver_schedule.clone();
    }
    for (v, s) in spans {
        let rebuilt = remove_spans(sol.schedule(v), &s);
        if !evaluate_schedule(&rebuilt, inst)?.feasible {
            return Ok(None);
        }
        next.schedules[v.index()] = rebuilt;
    }
    Ok(Some(next))
}

/// Picks the best donor/receiver-consistent, IR-respecting set of
/// exchanges on estimated deltas, applies it, and drops exchanges
/// (smallest estimated total first) until the rebuilt solution is feasible,
/// every LSP is at or above its baseline, and the realized total gain is
/// positive. Estimates can overstate the gain when one donor gives
/// back-to-back packages, so the last condition is not implied by the
/// selection.
pub fn combine_full_exchange(
    sol: &Solution,
    inst: &Instance,
    exchanges: &[OneToOneExchange],
    lsp_slack: &BTreeMap<LspId, Money>,
) -> Result<FullExchange, GatError> {
    let selection = combiner::solve(&conflict_problem(exchanges, lsp_slack));
    let mut kept = selection.indices.clone();
    let mut dropped = Vec::new();
    let before: Money = lsp_profits(sol, inst)?.into_iter().sum();
    loop {
        if let Some(next) = realize(sol, inst, exchanges, &kept)? {
            let after: Money = lsp_profits(&next, inst)?.into_iter().sum();
            if check_ir(&next, inst).is_ok() && (after > before || kept.is_empty()) {
                return Ok(FullExchange {
                    estimated_delta: kept.iter().map(|&i| exchanges[i].total_delta()).sum(),
                    realized_delta: after - before,
                    selected: kept,
                    dropped,
                    solution: next,
                    proven_optimal: selection.proven_optimal,
                });
            }
        }
        let worst = *kept
            .iter()
            .min_by_key(|&&i| (exchanges[i].total_delta(), std::cmp::Reverse(i)))
            .expect("the empty selection always realizes");
        kept.retain(|&i| i != worst);
        dropped.push(worst);
    }
}

/// Builds the no-collaboration baseline, then iterates.
pub fn run(inst: &Instance, cfg: &GatConfig) -> Result<RunOutcome, GatError> {
    cfg.validate()?;
    let t0 = Instant::now();
    let initial = pdptw::initial_solution(inst, &cfg.init)?;
    let init_time = t0.elapsed();
    let mut out = run_from(inst, initial, cfg)?;
    out.init_time = init_time;
    Ok(out)
}

/// Iterates from a given solution, whose baseline is the IR reference.
pub fn run_from(inst: &Instance, initial: Solution, cfg: &GatConfig) -> Result<RunOutcome, GatError> {
    cfg.validate()?;
    let t0 = Instant::now();
    let mut current = initial.clone();
    let mut history = Vec::new();
    for iteration in 1..=cfg.max_iterations {
        let t_gen = Instant::now();
        let (exchanges, stats) = generate_exchanges(&current, inst, cfg)?;
        let generate_s = t_gen.elapsed().as_secs_f64();
        let t_sel = Instant::now();
        let full = combine_full_exchange(&current, inst, &exchanges, &slack(&current, inst)?)?;
        let select_s = t_sel.elapsed().as_secs_f64();
        current = full.solution;
        let profits = check_ir(&current, inst)?;
        let counters = BTreeMap::from([
            ("packages".to_string(), stats.packages),
            ("solves".to_string(), stats.solves),
            ("infeasible".to_string(), stats.infeasible),
            ("unprofitable".to_string(), stats.unprofitable),
            ("dropped_after_rebuild".to_string(), full.dropped.len()),
            ("selection_proven_optimal".to_string(), usize::from(full.proven_optimal)),
        ]);
        history.push(IterationRecord {
            iteration,
            candidates: exchanges.len(),
            pruned: stats.screened_out,
            selected: full.selected.len(),
            plan_delta: full.realized_delta,
            profits,
            objective: welfare_objective(&current, inst)?,
            welfare_pct: social_welfare(&current, inst)?,
            counters,
            generate_s,
            select_s,
            wall_time_s: t0.elapsed().as_secs_f64(),
        });
        if full.selected.is_empty() {
            break;
        }
    }
    Ok(RunOutcome { initial, solution: current, history, init_time: Duration::ZERO, wall_time: t0.elapsed() })
}
