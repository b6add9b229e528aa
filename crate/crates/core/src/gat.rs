//! Give-and-take order exchange.
//!
//! Every iteration solves a 2-vehicle routing problem for each vehicle pair
//! over the union of their orders, offers both the result and the result
//! with the two routes swapped between the vehicles as actions, picks the
//! best vehicle-disjoint and individually rational subset with the
//! [`combiner`](crate::combiner), and applies it without re-solving.

use crate::combiner::{self, ExchangePlan, SelectionProblem};
use crate::model::{
    evaluate_schedule, lsp_profits, social_welfare, welfare_objective, Instance, LspId, ModelError, Money, Solution,
    VehicleId, VehicleSchedule, Waypoint,
};
use crate::pdptw::{self, InitConfig, VrpError, VrpRequest, DEFAULT_PAIR_TIME_LIMIT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GatError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("plan uses {0} in more than one action")]
    PlanConflict(VehicleId),
    #[error("{lsp} profit {profit} fell below its baseline {init}")]
    IrViolation { lsp: LspId, profit: Money, init: Money },
    #[error(transparent)]
    Vrp(#[from] VrpError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    /// The 2-vehicle solution as solved.
    Pair,
    /// The same two routes handed to the other vehicle.
    SwappedPair,
}

/// Replacement of the schedules of vehicles `i < j`, with its exact effect
/// on every LSP involved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub kind: ActionKind,
    pub vehicles: (VehicleId, VehicleId),
    pub new_schedules: (VehicleSchedule, VehicleSchedule),
    pub delta_profit: BTreeMap<LspId, Money>,
    pub delta_total: Money,
}

#[derive(Clone, Debug)]
pub struct GatConfig {
    pub max_iterations: usize,
    pub pair_time_limit: Duration,
    pub seed: u64,
    /// Worker threads for pair solving; `None` uses the global pool.
    pub threads: Option<usize>,
    pub init: InitConfig,
}

impl Default for GatConfig {
    fn default() -> Self {
        GatConfig {
            max_iterations: 5,
            pair_time_limit: DEFAULT_PAIR_TIME_LIMIT,
            seed: 0,
            threads: None,
            init: InitConfig::default(),
        }
    }
}

impl GatConfig {
    pub fn validate(&self) -> Result<(), GatError> {
        if self.max_iterations == 0 {
            return Err(GatError::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if self.pair_time_limit.is_zero() {
            return Err(GatError::InvalidConfig("pair time limit must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(GatError::InvalidConfig("thread count must be positive".into()));
        }
        Ok(())
    }
}

/// Counters from one round of action generation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GenerateStats {
    pub pairs_solved: usize,
    /// Pairs skipped: both vehicles idle, or an idle vehicle that is not
    /// the designated partner of the busy one.
    pub pairs_pruned: usize,
    pub pair_actions: usize,
    pub swap_actions: usize,
    pub swaps_infeasible: usize,
}

/// One line of the per-iteration diagnostics stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Candidate actions (GAT) or one-to-one exchanges (OPH).
    pub candidates: usize,
    pub pruned: usize,
    pub selected: usize,
    pub plan_delta: Money,
    pub profits: Vec<Money>,
    /// Exact welfare quantity: total profit, or minus total distance.
    pub objective: i64,
    pub welfare_pct: Option<f64>,
    pub counters: BTreeMap<String, usize>,
    /// Time spent producing candidates and choosing among them.
    pub generate_s: f64,
    pub select_s: f64,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub initial: Solution,
    pub solution: Solution,
    pub history: Vec<IterationRecord>,
    pub init_time: Duration,
    pub wall_time: Duration,
}

/// What makes two idle vehicles interchangeable.
type ClassKey<'a> = (LspId, &'a Waypoint, i64);

/// Idle vehicles grouped by (LSP, depot, capacity); groups in order of
/// first appearance.
pub(crate) fn idle_classes(sol: &Solution, inst: &Instance) -> Vec<Vec<VehicleId>> {
    let mut classes: Vec<(ClassKey, Vec<VehicleId>)> = Vec::new();
    for s in sol.schedules.iter().filter(|s| s.is_empty()) {
        let veh = &inst.vehicles[s.vehicle.index()];
        let key = (veh.lspid, &veh.depot, veh.cap);
        match classes.iter_mut().find(|(k, _)| *k == key) {
            Some((_, list)) => list.push(s.vehicle),
            None => classes.push((key, vec![s.vehicle])),
        }
    }
    classes.into_iter().map(|(_, list)| list).collect()
}

/// The vehicle pairs worth solving, plus the number skipped.
///
/// Idle vehicles of one class are interchangeable, so each busy vehicle is
/// paired with one idle vehicle per class, a different one for every busy
/// vehicle while the class has enough of them.
fn candidate_pairs(sol: &Solution, inst: &Instance) -> (Vec<(VehicleId, VehicleId)>, usize) {
    let busy: Vec<VehicleId> = sol.schedules.iter().filter(|s| !s.is_empty()).map(|s| s.vehicle).collect();
    let idle_classes = idle_classes(sol, inst);
    let mut pairs = Vec::new();
    for (a, &u) in busy.iter().enumerate() {
        for &w in &busy[a + 1..] {
            pairs.push((u, w));
        }
        for idle in &idle_classes {
            let partner = idle[a % idle.len()];
            pairs.push((u.min(partner), u.max(partner)));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let n = sol.schedules.len();
    let pruned = n * n.saturating_sub(1) / 2 - pairs.len();
    (pairs, pruned)
}

fn pair_seed(seed: u64, i: VehicleId, j: VehicleId) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ ((i.0 as u64) << 32 | j.0 as u64);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Exact per-LSP profit change of replacing `old` schedules by `new` ones.
fn profit_delta(
    inst: &Instance,
    old: [&VehicleSchedule; 2],
    new: [&VehicleSchedule; 2],
) -> Result<Option<BTreeMap<LspId, Money>>, ModelError> {
    let mut delta = BTreeMap::new();
    for (o, n) in old.into_iter().zip(new) {
        let lsp = inst.vehicle(o.vehicle)?.lspid;
        let new_eval = evaluate_schedule(n, inst)?;
        if !new_eval.feasible {
            return Ok(None);
        }
        let old_eval = evaluate_schedule(o, inst)?;
        *delta.entry(lsp).or_insert(Money::ZERO) += new_eval.profit() - old_eval.profit();
    }
    Ok(Some(delta))
}

struct PairOutcome {
    actions: Vec<Action>,
    swap_infeasible: bool,
}

fn solve_pair(
    sol: &Solution,
    inst: &Instance,
    cfg: &GatConfig,
    (i, j): (VehicleId, VehicleId),
) -> Result<PairOutcome, GatError> {
    let (si, sj) = (sol.schedule(i), sol.schedule(j));
    let req = VrpRequest {
        instance: inst,
        vehicles: vec![i, j],
        orders: si.orders().chain(sj.orders()).collect(),
        seed_routes: Some(vec![si.stops.clone(), sj.stops.clone()]),
        time_limit: cfg.pair_time_limit,
        seed: pair_seed(cfg.seed, i, j),
    };
    let res = pdptw::solve(&req)?;
    debug_assert!(res.unassigned.is_empty());
    let mut it = res.schedules.into_iter();
    let (ni, nj) = (it.next().expect("two schedules"), it.next().expect("two schedules"));

    let mut actions = Vec::with_capacity(2);
    let unchanged = |a: &VehicleSchedule, b: &VehicleSchedule| a.stops == si.stops && b.stops == sj.stops;
    if !unchanged(&ni, &nj) {
        if let Some(delta) = profit_delta(inst, [si, sj], [&ni, &nj])? {
            actions.push(Action {
                kind: ActionKind::Pair,
                vehicles: (i, j),
                delta_total: delta.values().sum(),
                delta_profit: delta,
                new_schedules: (ni.clone(), nj.clone()),
            });
        }
    }
    let swapped_i = VehicleSchedule { vehicle: i, stops: nj.stops };
    let swapped_j = VehicleSchedule { vehicle: j, stops: ni.stops };
    let mut swap_infeasible = false;
    if !unchanged(&swapped_i, &swapped_j) {
        match profit_delta(inst, [si, sj], [&swapped_i, &swapped_j])? {
            Some(delta) => actions.push(Action {
                kind: ActionKind::SwappedPair,
                vehicles: (i, j),
                delta_total: delta.values().sum(),
                delta_profit: delta,
                new_schedules: (swapped_i, swapped_j),
            }),
            None => swap_infeasible = true,
        }
    }
    Ok(PairOutcome { actions, swap_infeasible })
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Solves every candidate vehicle pair and returns the resulting actions,
/// ordered by `(i, j, kind)` regardless of completion order.
pub fn generate_actions(
    sol: &Solution,
    inst: &Instance,
    cfg: &GatConfig,
) -> Result<(Vec<Action>, GenerateStats), GatError> {
    let (pairs, pruned) = candidate_pairs(sol, inst);
    let outcomes: Vec<PairOutcome> = in_pool(cfg.threads, || {
        pairs.par_iter().map(|&pair| solve_pair(sol, inst, cfg, pair)).collect::<Result<_, _>>()
    })?;
    let mut stats = GenerateStats { pairs_solved: pairs.len(), pairs_pruned: pruned, ..Default::default() };
    let mut actions = Vec::new();
    for out in outcomes {
        stats.swaps_infeasible += out.swap_infeasible as usize;
        for a in out.actions {
            match a.kind {
                ActionKind::Pair => stats.pair_actions += 1,
                ActionKind::SwappedPair => stats.swap_actions += 1,
            }
            actions.push(a);
        }
    }
    Ok((actions, stats))
}

/// Replaces the schedules named by the plan's actions. Nothing is re-solved.
pub fn apply_plan(sol: &Solution, plan: &ExchangePlan) -> Result<Solution, GatError> {
    let mut used = std::collections::BTreeSet::new();
    for a in &plan.actions {
        for v in [a.vehicles.0, a.vehicles.1] {
            if !used.insert(v) {
                return Err(GatError::PlanConflict(v));
            }
        }
    }
    let mut next = sol.clone();
    for a in &plan.actions {
        next.schedules[a.vehicles.0.index()] = a.new_schedules.0.clone();
        next.schedules[a.vehicles.1.index()] = a.new_schedules.1.clone();
    }
    Ok(next)
}

/// Per-LSP `current - Init`.
pub fn slack(sol: &Solution, inst: &Instance) -> Result<BTreeMap<LspId, Money>, ModelError> {
    let profits = lsp_profits(sol, inst)?;
    Ok(profits.iter().zip(&sol.baseline).enumerate().map(|(l, (p, b))| (LspId::from_index(l), *p - *b)).collect())
}

/// Fails if any LSP earns less than its baseline.
pub fn check_ir(sol: &Solution, inst: &Instance) -> Result<Vec<Money>, GatError> {
    let profits = lsp_profits(sol, inst)?;
    for (l, (p, b)) in profits.iter().zip(&sol.baseline).enumerate() {
        if p < b {
            return Err(GatError::IrViolation { lsp: LspId::from_index(l), profit: *p, init: *b });
        }
    }
    Ok(profits)
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
        let (actions, stats) = generate_actions(&current, inst, cfg)?;
        let generate_s = t_gen.elapsed().as_secs_f64();
        let t_sel = Instant::now();
        let problem = SelectionProblem {
            lsp_slack: slack(&current, inst)?,
            vehicles: inst.vehicles.iter().map(|v| v.id).collect(),
            actions,
        };
        let plan = combiner::select(&problem);
        let select_s = t_sel.elapsed().as_secs_f64();
        current = apply_plan(&current, &plan)?;
        let profits = check_ir(&current, inst)?;
        let counters = BTreeMap::from([
            ("pairs_solved".to_string(), stats.pairs_solved),
            ("pair_actions".to_string(), stats.pair_actions),
            ("swap_actions".to_string(), stats.swap_actions),
            ("swaps_infeasible".to_string(), stats.swaps_infeasible),
            ("selection_proven_optimal".to_string(), usize::from(plan.proven_optimal)),
        ]);
        history.push(IterationRecord {
            iteration,
            candidates: problem.actions.len(),
            pruned: stats.pairs_pruned,
            selected: plan.selected.len(),
            plan_delta: plan.total_delta,
            profits,
            objective: welfare_objective(&current, inst)?,
            welfare_pct: social_welfare(&current, inst)?,
            counters,
            generate_s,
            select_s,
            wall_time_s: t0.elapsed().as_secs_f64(),
        });
        if plan.is_empty() {
            break;
        }
    }
    Ok(RunOutcome { initial, solution: current, history, init_time: Duration::ZERO, wall_time: t0.elapsed() })
}
