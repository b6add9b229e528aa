//! k-vehicle pickup-and-delivery solver with time windows and capacities.
//!
//! Construction is cheapest insertion on top of whatever seed routes the
//! caller supplies, followed by first-improvement local search (relocate,
//! exchange, route elimination) until a local optimum or the time limit.
//! Subproblems with at most [`EXACT_MAX_ORDERS`] orders on at most two
//! vehicles are instead solved to optimality by depth-first enumeration.
//!
//! The objective is total route cost only; revenue and individual
//! rationality are the callers' business.

use crate::model::{
    evaluate_schedule, Distance, Instance, LspId, LspParams, ModelError, Money, OrderId, Solution, Stop, Time,
    VehicleId, VehicleSchedule, Waypoint,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Largest order count solved exactly (two vehicles at most).
pub const EXACT_MAX_ORDERS: usize = 5;

/// Default wall-clock budget for one 2-vehicle subproblem.
pub const DEFAULT_PAIR_TIME_LIMIT: Duration = Duration::from_millis(500);

#[derive(Debug, Error)]
pub enum VrpError {
    #[error("request has no vehicles")]
    NoVehicles,
    #[error("time limit must be positive")]
    NonPositiveTimeLimit,
    #[error("bad seed routes: {0}")]
    BadSeed(String),
    #[error("order {0} requested twice")]
    DuplicateOrder(OrderId),
    #[error("{lsp}: orders {orders:?} cannot be routed by its own fleet")]
    Unroutable { lsp: LspId, orders: Vec<OrderId> },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug)]
pub struct VrpRequest<'a> {
    pub instance: &'a Instance,
    pub vehicles: Vec<VehicleId>,
    pub orders: Vec<OrderId>,
    /// Starting routes, one per entry of `vehicles`. Orders not covered are
    /// inserted by the construction heuristic.
    pub seed_routes: Option<Vec<Vec<Stop>>>,
    pub time_limit: Duration,
    pub seed: u64,
}

#[derive(Clone, Debug, Default)]
pub struct SolveStats {
    pub exact: bool,
    pub passes: usize,
    pub moves: usize,
    pub timed_out: bool,
    /// Total cost after construction and after every local-search pass.
    pub objective_trace: Vec<Money>,
}

#[derive(Clone, Debug)]
pub struct VrpResult {
    /// One schedule per requested vehicle, in request order.
    pub schedules: Vec<VehicleSchedule>,
    pub unassigned: Vec<OrderId>,
    pub total_cost: Money,
    pub stats: SolveStats,
}

struct VehInfo<'a> {
    id: VehicleId,
    depot: &'a Waypoint,
    cap: i64,
    params: &'a LspParams,
    /// Vehicles with equal class are interchangeable when empty.
    class: usize,
}

struct Ctx<'a> {
    inst: &'a Instance,
    vehicles: Vec<VehInfo<'a>>,
}

impl<'a> Ctx<'a> {
    fn new(inst: &'a Instance, ids: &[VehicleId]) -> Result<Ctx<'a>, VrpError> {
        let mut classes: Vec<(LspId, &Waypoint, i64)> = Vec::new();
        let mut vehicles = Vec::with_capacity(ids.len());
        for &id in ids {
            let v = inst.vehicle(id)?;
            let params = inst.lsp(v.lspid)?;
            inst.matrix.check_location(v.depot.loc)?;
            let key = (v.lspid, &v.depot, v.cap);
            let class = match classes.iter().position(|c| *c == key) {
                Some(c) => c,
                None => {
                    classes.push(key);
                    classes.len() - 1
                }
            };
            vehicles.push(VehInfo { id, depot: &v.depot, cap: v.cap, params, class });
        }
        Ok(Ctx { inst, vehicles })
    }

    #[inline]
    fn wp(&self, s: Stop) -> &'a Waypoint {
        s.waypoint(&self.inst.orders[s.order.index()])
    }
}

/// A route with cached forward start times, backward latest start times
/// and running loads, indexed by node (0 = start depot, k + 1 = end depot).
#[derive(Clone, Debug)]
struct Route {
    veh: usize,
    stops: Vec<Stop>,
    start: Vec<Time>,
    latest: Vec<Time>,
    load: Vec<i64>,
    dist: Distance,
    cost: Money,
}

impl Route {
    fn new(veh: usize, stops: Vec<Stop>, ctx: &Ctx) -> (Route, bool) {
        let mut r =
            Route { veh, stops, start: Vec::new(), latest: Vec::new(), load: Vec::new(), dist: 0, cost: Money::ZERO };
        let ok = r.rebuild(ctx);
        (r, ok)
    }

    #[inline]
    fn node<'a>(&self, ctx: &Ctx<'a>, p: usize) -> &'a Waypoint {
        if p == 0 || p == self.stops.len() + 1 {
            ctx.vehicles[self.veh].depot
        } else {
            ctx.wp(self.stops[p - 1])
        }
    }

    fn rebuild(&mut self, ctx: &Ctx) -> bool {
        let veh = &ctx.vehicles[self.veh];
        let m = &ctx.inst.matrix;
        let depot = veh.depot;
        let k = self.stops.len();
        self.start.clear();
        self.load.clear();
        let mut feasible = depot.st <= depot.et;
        let (mut t, mut load, mut dist) = (depot.st, 0i64, 0 as Distance);
        self.start.push(t);
        self.load.push(0);
        let mut prev = depot;
        for &s in &self.stops {
            let w = ctx.wp(s);
            t = (t + prev.service + m.time(prev.loc, w.loc)).max(w.st);
            feasible &= t <= w.et;
            load += w.vol;
            feasible &= load <= veh.cap && load >= 0;
            dist += m.distance(prev.loc, w.loc);
            self.start.push(t);
            self.load.push(load);
            prev = w;
        }
        t = (t + prev.service + m.time(prev.loc, depot.loc)).max(depot.st);
        feasible &= t <= depot.et;
        dist += m.distance(prev.loc, depot.loc);
        self.start.push(t);
        self.load.push(0);

        self.latest.clear();
        self.latest.resize(k + 2, 0);
        self.latest[k + 1] = depot.et;
        for p in (0..=k).rev() {
            let w = self.node(ctx, p);
            let next = self.node(ctx, p + 1);
            self.latest[p] = w.et.min(self.latest[p + 1] - w.service - m.time(w.loc, next.loc));
        }
        let used = k > 0;
        self.dist = if used { dist } else { 0 };
        self.cost = veh.params.vehicle_cost(dist, used);
        feasible
    }

    /// Cheapest feasible insertion of `order`: pickup after node `p`,
    /// drop-off after node `q` (`q == p` means right after the pickup).
    /// Ties go to the lowest `(p, q)`.
    fn best_insertion(&self, ctx: &Ctx, order: OrderId) -> Option<(usize, usize, Money)> {
        let m = &ctx.inst.matrix;
        let o = &ctx.inst.orders[order.index()];
        let (pw, dw) = (&o.pickup, &o.dropoff);
        let vol = pw.vol;
        let veh = &ctx.vehicles[self.veh];
        let cap = veh.cap;
        let k = self.stops.len();
        let mut best: Option<(usize, usize, Money)> = None;
        let mut consider = |p: usize, q: usize, delta: Distance| {
            let cost = veh.params.vehicle_cost(self.dist + delta, true);
            if best.is_none_or(|(_, _, c)| cost < c) {
                best = Some((p, q, cost));
            }
        };
        for p in 0..=k {
            if self.load[p] + vol > cap {
                continue;
            }
            let a = self.node(ctx, p);
            let tp = (self.start[p] + a.service + m.time(a.loc, pw.loc)).max(pw.st);
            if tp > pw.et {
                continue;
            }
            let b = self.node(ctx, p + 1);
            let td = (tp + pw.service + m.time(pw.loc, dw.loc)).max(dw.st);
            if td <= dw.et {
                let tn = (td + dw.service + m.time(dw.loc, b.loc)).max(b.st);
                if tn <= self.latest[p + 1] {
                    let delta = m.distance(a.loc, pw.loc) + m.distance(pw.loc, dw.loc) + m.distance(dw.loc, b.loc)
                        - m.distance(a.loc, b.loc);
                    consider(p, p, delta);
                }
            }
            let base = m.distance(a.loc, pw.loc) + m.distance(pw.loc, b.loc) - m.distance(a.loc, b.loc);
            let mut t = (tp + pw.service + m.time(pw.loc, b.loc)).max(b.st);
            for q in p + 1..=k {
                let wq = self.node(ctx, q);
                if t > wq.et || self.load[q] + vol > cap {
                    break;
                }
                let c = self.node(ctx, q + 1);
                let td = (t + wq.service + m.time(wq.loc, dw.loc)).max(dw.st);
                if td <= dw.et {
                    let tn = (td + dw.service + m.time(dw.loc, c.loc)).max(c.st);
                    if tn <= self.latest[q + 1] {
                        let delta =
                            base + m.distance(wq.loc, dw.loc) + m.distance(dw.loc, c.loc) - m.distance(wq.loc, c.loc);
                        consider(p, q, delta);
                    }
                }
                t = (t + wq.service + m.time(wq.loc, c.loc)).max(c.st);
            }
        }
        best
    }

    fn insert(&mut self, ctx: &Ctx, order: OrderId, p: usize, q: usize) {
        self.stops.insert(p, Stop::pickup(order));
        self.stops.insert(q + 1, Stop::dropoff(order));
        let ok = self.rebuild(ctx);
        debug_assert!(ok, "insertion produced an infeasible route");
    }

    /// The route with `order` removed, if still feasible.
    fn without(&self, ctx: &Ctx, order: OrderId) -> Option<Route> {
        let stops = self.stops.iter().copied().filter(|s| s.order != order).collect();
        let (r, ok) = Route::new(self.veh, stops, ctx);
        ok.then_some(r)
    }

    fn orders(&self) -> impl Iterator<Item = OrderId> + '_ {
        self.stops.iter().filter(|s| s.is_pickup()).map(|s| s.order)
    }
}

struct Search<'a> {
    ctx: Ctx<'a>,
    routes: Vec<Route>,
    route_of: HashMap<OrderId, usize>,
    scan: Vec<OrderId>,
    deadline: Instant,
    stats: SolveStats,
}

impl<'a> Search<'a> {
    fn total(&self) -> Money {
        self.routes.iter().map(|r| r.cost).sum()
    }

    fn out_of_time(&mut self) -> bool {
        if Instant::now() >= self.deadline {
            self.stats.timed_out = true;
        }
        self.stats.timed_out
    }

    /// Cheapest insertion of `order` over routes, skipping `exclude` and
    /// empty routes whose class was already tried. Returns
    /// `(route, p, q, cost delta)`.
    fn best_route_for(&self, order: OrderId, exclude: Option<usize>) -> Option<(usize, usize, usize, Money)> {
        let mut best: Option<(usize, usize, usize, Money)> = None;
        let mut empty_classes_seen: Vec<usize> = Vec::new();
        for (ri, route) in self.routes.iter().enumerate() {
            if Some(ri) == exclude {
                continue;
            }
            if route.stops.is_empty() {
                let class = self.ctx.vehicles[route.veh].class;
                if empty_classes_seen.contains(&class) {
                    continue;
                }
                empty_classes_seen.push(class);
            }
            if let Some((p, q, cost)) = route.best_insertion(&self.ctx, order) {
                let delta = cost - route.cost;
                if best.is_none_or(|b| delta < b.3) {
                    best = Some((ri, p, q, delta));
                }
            }
        }
        best
    }

    /// Sequential cheapest insertion; returns the orders that did not fit.
    fn construct(&mut self, mut pending: Vec<OrderId>) -> Vec<OrderId> {
        let inst = self.ctx.inst;
        pending.sort_by_key(|o| (inst.orders[o.index()].pickup.st, *o));
        let mut unassigned = Vec::new();
        for order in pending {
            match self.best_route_for(order, None) {
                Some((ri, p, q, _)) => {
                    self.routes[ri].insert(&self.ctx, order, p, q);
                    self.route_of.insert(order, ri);
                }
                None => unassigned.push(order),
            }
        }
        unassigned
    }

    fn relocate_pass(&mut self) -> bool {
        let mut improved = false;
        for idx in 0..self.scan.len() {
            if self.out_of_time() {
                break;
            }
            let order = self.scan[idx];
            let Some(&ri) = self.route_of.get(&order) else { continue };
            let Some(removed) = self.routes[ri].without(&self.ctx, order) else { continue };
            let removal = removed.cost - self.routes[ri].cost;
            let mut best: Option<(usize, usize, usize, Money)> = None;
            if let Some((p, q, cost)) = removed.best_insertion(&self.ctx, order) {
                best = Some((ri, p, q, cost - self.routes[ri].cost));
            }
            if let Some((rj, p, q, delta)) = self.best_route_for(order, Some(ri)) {
                let delta = removal + delta;
                // lower route index wins ties
                if best.is_none_or(|b| delta < b.3 || (delta == b.3 && rj < b.0)) {
                    best = Some((rj, p, q, delta));
                }
            }
            if let Some((rj, p, q, delta)) = best {
                if delta < Money::ZERO {
                    if rj == ri {
                        let mut r = removed;
                        r.insert(&self.ctx, order, p, q);
                        self.routes[ri] = r;
                    } else {
                        self.routes[ri] = removed;
                        self.routes[rj].insert(&self.ctx, order, p, q);
                        self.route_of.insert(order, rj);
                    }
                    self.stats.moves += 1;
                    improved = true;
                }
            }
        }
        improved
    }

    fn exchange_pass(&mut self) -> bool {
        let mut improved = false;
        let n = self.scan.len();
        'outer: for a in 0..n {
            let oa = self.scan[a];
            let Some(&ra) = self.route_of.get(&oa) else { continue };
            let Some(ra_without) = self.routes[ra].without(&self.ctx, oa) else { continue };
            for b in a + 1..n {
                if self.out_of_time() {
                    break 'outer;
                }
                let ob = self.scan[b];
                let Some(&rb) = self.route_of.get(&ob) else { continue };
                if rb == ra {
                    continue;
                }
                let Some(rb_without) = self.routes[rb].without(&self.ctx, ob) else { continue };
                let Some((pa, qa, cost_a)) = ra_without.best_insertion(&self.ctx, ob) else {
                    continue;
                };
                let Some((pb, qb, cost_b)) = rb_without.best_insertion(&self.ctx, oa) else {
                    continue;
                };
                let delta = cost_a + cost_b - self.routes[ra].cost - self.routes[rb].cost;
                if delta < Money::ZERO {
                    let mut new_a = ra_without;
                    new_a.insert(&self.ctx, ob, pa, qa);
                    let mut new_b = rb_without;
                    new_b.insert(&self.ctx, oa, pb, qb);
                    self.routes[ra] = new_a;
                    self.routes[rb] = new_b;
                    self.route_of.insert(oa, rb);
                    self.route_of.insert(ob, ra);
                    self.stats.moves += 1;
                    improved = true;
                    continue 'outer;
                }
            }
        }
        improved
    }

    /// Tries to empty each route by inserting its orders elsewhere.
    fn eliminate_pass(&mut self) -> bool {
        let mut improved = false;
        for ri in 0..self.routes.len() {
            if self.routes[ri].stops.is_empty() || self.routes.len() < 2 {
                continue;
            }
            if self.out_of_time() {
                break;
            }
            let orders: Vec<OrderId> = self.routes[ri].orders().collect();
            let mut trial = self.routes.clone();
            let before = self.total();
            trial[ri] = Route::new(self.routes[ri].veh, Vec::new(), &self.ctx).0;
            let mut moved = Vec::with_capacity(orders.len());
            let saved = std::mem::replace(&mut self.routes, trial);
            let mut ok = true;
            for &o in &orders {
                match self.best_route_for(o, Some(ri)) {
                    Some((rj, p, q, _)) => {
                        self.routes[rj].insert(&self.ctx, o, p, q);
                        moved.push((o, rj));
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && self.total() < before {
                for (o, rj) in moved {
                    self.route_of.insert(o, rj);
                }
                self.stats.moves += 1;
                improved = true;
            } else {
                self.routes = saved;
            }
        }
        improved
    }

    fn local_search(&mut self) {
        self.stats.objective_trace.push(self.total());
        loop {
            self.stats.passes += 1;
            let mut improved = self.relocate_pass();
            improved |= self.exchange_pass();
            improved |= self.eliminate_pass();
            self.stats.objective_trace.push(self.total());
            if !improved || self.stats.timed_out {
                break;
            }
        }
    }
}

/// Depth-first enumeration of every feasible assignment and sequence.
struct Exact<'c, 'a> {
    ctx: &'c Ctx<'a>,
    orders: Vec<OrderId>,
    best_cost: Money,
    best: Option<Vec<Vec<Stop>>>,
    routes: Vec<Vec<Stop>>,
    closed_cost: Money,
}

#[derive(Clone, Copy)]
struct Cursor<'a> {
    at: &'a Waypoint,
    start: Time,
    load: i64,
    dist: Distance,
    picked: u32,
    dropped: u32,
    onboard: u32,
}

impl<'c, 'a> Exact<'c, 'a> {
    fn run(ctx: &'c Ctx<'a>, orders: Vec<OrderId>, bound: Money) -> Option<(Vec<Vec<Stop>>, Money)> {
        let mut e = Exact {
            ctx,
            orders,
            best_cost: bound,
            best: None,
            routes: vec![Vec::new(); ctx.vehicles.len()],
            closed_cost: Money::ZERO,
        };
        e.open_vehicle(0, 0, 0);
        let cost = e.best_cost;
        e.best.map(|b| (b, cost))
    }

    fn open_vehicle(&mut self, v: usize, picked: u32, dropped: u32) {
        let depot = self.ctx.vehicles[v].depot;
        let cur = Cursor { at: depot, start: depot.st, load: 0, dist: 0, picked, dropped, onboard: 0 };
        if depot.st <= depot.et {
            self.extend(v, cur);
        }
    }

    fn extend(&mut self, v: usize, cur: Cursor<'a>) {
        let veh = &self.ctx.vehicles[v];
        let m = &self.ctx.inst.matrix;
        let used = !self.routes[v].is_empty();
        if self.closed_cost + veh.params.vehicle_cost(cur.dist, used) >= self.best_cost {
            return;
        }
        let n = self.orders.len();
        let all = (1u32 << n) - 1;
        for i in 0..n {
            let bit = 1u32 << i;
            let order = &self.ctx.inst.orders[self.orders[i].index()];
            let (w, stop) = if cur.picked & bit == 0 {
                (&order.pickup, Stop::pickup(order.id))
            } else if cur.onboard & bit != 0 {
                (&order.dropoff, Stop::dropoff(order.id))
            } else {
                continue;
            };
            let t = (cur.start + cur.at.service + m.time(cur.at.loc, w.loc)).max(w.st);
            let load = cur.load + w.vol;
            if t > w.et || load > veh.cap {
                continue;
            }
            let next = Cursor {
                at: w,
                start: t,
                load,
                dist: cur.dist + m.distance(cur.at.loc, w.loc),
                picked: cur.picked | bit,
                dropped: if stop.is_pickup() { cur.dropped } else { cur.dropped | bit },
                onboard: cur.onboard ^ bit,
            };
            self.routes[v].push(stop);
            self.extend(v, next);
            self.routes[v].pop();
        }
        if cur.onboard != 0 {
            return;
        }
        let depot = veh.depot;
        let back = cur.start + cur.at.service + m.time(cur.at.loc, depot.loc);
        if used && back > depot.et {
            return;
        }
        let cost = veh.params.vehicle_cost(cur.dist + m.distance(cur.at.loc, depot.loc), used);
        if v + 1 == self.ctx.vehicles.len() {
            let total = self.closed_cost + cost;
            if cur.dropped == all && total < self.best_cost {
                self.best_cost = total;
                self.best = Some(self.routes.clone());
            }
        } else {
            self.closed_cost += cost;
            self.open_vehicle(v + 1, cur.picked, cur.dropped);
            self.closed_cost -= cost;
        }
    }
}

/// Solves a PDPTW over the requested vehicles and orders.
///
/// The result never costs more than the seed routes, and every order the
/// seed covered stays assigned.
pub fn solve(req: &VrpRequest) -> Result<VrpResult, VrpError> {
    if req.vehicles.is_empty() {
        return Err(VrpError::NoVehicles);
    }
    if req.time_limit.is_zero() {
        return Err(VrpError::NonPositiveTimeLimit);
    }
    let inst = req.instance;
    let ctx = Ctx::new(inst, &req.vehicles)?;
    let mut requested = HashMap::with_capacity(req.orders.len());
    for &o in &req.orders {
        inst.order(o)?;
        if requested.insert(o, false).is_some() {
            return Err(VrpError::DuplicateOrder(o));
        }
    }

    let mut routes = Vec::with_capacity(ctx.vehicles.len());
    let mut route_of = HashMap::new();
    match &req.seed_routes {
        Some(seed) => {
            if seed.len() != ctx.vehicles.len() {
                return Err(VrpError::BadSeed(format!(
                    "{} seed routes for {} vehicles",
                    seed.len(),
                    ctx.vehicles.len()
                )));
            }
            for (vi, stops) in seed.iter().enumerate() {
                for s in stops.iter().filter(|s| s.is_pickup()) {
                    match requested.get_mut(&s.order) {
                        Some(seen @ false) => *seen = true,
                        Some(true) => return Err(VrpError::DuplicateOrder(s.order)),
                        None => return Err(VrpError::BadSeed(format!("{} was not requested", s.order))),
                    }
                    route_of.insert(s.order, vi);
                }
                let sched = VehicleSchedule { vehicle: ctx.vehicles[vi].id, stops: stops.clone() };
                if !evaluate_schedule(&sched, inst)?.feasible {
                    return Err(VrpError::BadSeed(format!("route of {} is infeasible", sched.vehicle)));
                }
                routes.push(Route::new(vi, stops.clone(), &ctx).0);
            }
        }
        None => {
            for vi in 0..ctx.vehicles.len() {
                routes.push(Route::new(vi, Vec::new(), &ctx).0);
            }
        }
    }
    let pending: Vec<OrderId> = req.orders.iter().copied().filter(|o| !requested[o]).collect();
    let seed_cost: Option<Money> = pending.is_empty().then(|| routes.iter().map(|r| r.cost).sum());

    let mut stats = SolveStats::default();
    if ctx.vehicles.len() <= 2 && req.orders.len() <= EXACT_MAX_ORDERS {
        stats.exact = true;
        let bound = seed_cost.unwrap_or(Money(i64::MAX));
        match Exact::run(&ctx, req.orders.clone(), bound) {
            Some((best, cost)) => {
                stats.objective_trace = vec![cost];
                return Ok(finish(&ctx, best, Vec::new(), stats));
            }
            None if seed_cost.is_some() => {
                let cost = seed_cost.unwrap_or_default();
                stats.objective_trace = vec![cost];
                let stops = routes.into_iter().map(|r| r.stops).collect();
                return Ok(finish(&ctx, stops, Vec::new(), stats));
            }
            // Nothing routes every order; fall back to the heuristic, which
            // reports what it cannot place.
            None => stats.exact = false,
        }
    }

    let mut scan = req.orders.clone();
    scan.sort();
    scan.shuffle(&mut ChaCha8Rng::seed_from_u64(req.seed));
    let mut search = Search { ctx, routes, route_of, scan, deadline: Instant::now() + req.time_limit, stats };
    let unassigned = search.construct(pending);
    search.local_search();
    let Search { ctx, routes, stats, .. } = search;
    let stops = routes.into_iter().map(|r| r.stops).collect();
    Ok(finish(&ctx, stops, unassigned, stats))
}

fn finish(ctx: &Ctx, stops: Vec<Vec<Stop>>, unassigned: Vec<OrderId>, stats: SolveStats) -> VrpResult {
    let mut schedules = Vec::with_capacity(stops.len());
    let mut total_cost = Money::ZERO;
    for (vi, stops) in stops.into_iter().enumerate() {
        let (route, ok) = Route::new(vi, stops, ctx);
        debug_assert!(ok);
        total_cost += route.cost;
        schedules.push(VehicleSchedule { vehicle: ctx.vehicles[vi].id, stops: route.stops });
    }
    VrpResult { schedules, unassigned, total_cost, stats }
}

/// Settings for building the no-collaboration baseline.
#[derive(Clone, Debug)]
pub struct InitConfig {
    pub time_limit: Duration,
    pub seed: u64,
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig { time_limit: Duration::from_secs(30), seed: 0 }
    }
}

/// Routes every LSP's own orders with its own fleet and records the
/// resulting profits as the individual-rationality baseline.
pub fn initial_solution(inst: &Instance, cfg: &InitConfig) -> Result<Solution, VrpError> {
    let mut schedules: Vec<VehicleSchedule> = inst.vehicles.iter().map(|v| VehicleSchedule::depot_only(v.id)).collect();
    for lsp in &inst.lsps {
        if lsp.fleet.is_empty() {
            let orders: Vec<OrderId> = inst.orders_of(lsp.id).map(|o| o.id).collect();
            if orders.is_empty() {
                continue;
            }
            return Err(VrpError::Unroutable { lsp: lsp.id, orders });
        }
        let req = VrpRequest {
            instance: inst,
            vehicles: lsp.fleet.clone(),
            orders: inst.orders_of(lsp.id).map(|o| o.id).collect(),
            seed_routes: None,
            time_limit: cfg.time_limit,
            seed: cfg.seed ^ lsp.id.0 as u64,
        };
        let res = solve(&req)?;
        if !res.unassigned.is_empty() {
            return Err(VrpError::Unroutable { lsp: lsp.id, orders: res.unassigned });
        }
        for s in res.schedules {
            let idx = s.vehicle.index();
            schedules[idx] = s;
        }
    }
    Ok(Solution::with_own_baseline(schedules, inst)?)
}
