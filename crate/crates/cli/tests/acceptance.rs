//! Acceptance run: one PASS/FAIL line per criterion, then a summary.
//!
//! Runs sequentially in a single process so that the timing criteria are
//! measured without competing test threads. Progress goes to stderr; the
//! verdict lines go to stdout in criterion order.

use gatx::audit::audit;
use gatx::report::{self, SolveReport};
use gatx_core::bench::{self, MockParams};
use gatx_core::combiner::{self, SelectionProblem};
use gatx_core::gat::{Action, ActionKind, GatConfig};
use gatx_core::model::{
    Instance, LocationId, LspId, LspParams, Money, Order, OrderId, Stop, TimeDistanceMatrix, Vehicle, VehicleId,
    VehicleSchedule, Waypoint, INSTANCE_SCHEMA_VERSION, SCALE,
};
use gatx_core::oph;
use gatx_core::pdptw::{self, VrpRequest};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::time::{Duration, Instant};

// Pinned thresholds.
const TOY_TIME_LIMIT: Duration = Duration::from_secs(5);
const IR_MOCK_SEEDS: u64 = 100;
const COMBINER_CASES: usize = 1000;
const COMBINER_MAX_ACTIONS: usize = 20;
const COMBINER_TIME_LIMIT: Duration = Duration::from_secs(60);
const PDPTW_CASES: usize = 200;
const PDPTW_TIME_LIMIT: Duration = Duration::from_secs(120);
const TABLE1_MIN_WINS: usize = 8;
const TABLE1_CONFIG_TIME_LIMIT: Duration = Duration::from_secs(600);
const GAT_ITERATIONS: usize = 5;
const MOCK_SUITE_SEEDS: u64 = 5;

struct Verdict {
    id: u8,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn progress(msg: impl AsRef<str>) {
    eprintln!("[acceptance] {}", msg.as_ref());
}

fn cfg(iters: usize) -> GatConfig {
    GatConfig { max_iterations: iters, ..GatConfig::default() }
}

/// Non-decreasing exact objective over the history, capped length.
fn monotone(r: &SolveReport) -> bool {
    let objs: Vec<i64> = r.iterations.iter().map(|h| h.objective).collect();
    objs.windows(2).all(|w| w[0] <= w[1]) && r.iterations.len() <= r.params.iters
}

// ---------------------------------------------------------------------------
// 1. Toy separation

fn toy_separation() -> Verdict {
    let t0 = Instant::now();
    let inst = bench::toy_instance();
    let (row, o, g) = report::compare(&inst, &cfg(1), &cfg(1)).expect("toy runs");
    let elapsed = t0.elapsed();
    let gat_w = g.welfare_pct.unwrap_or(f64::NAN);
    let oph_w = o.welfare_pct.unwrap_or(f64::NAN);
    let lsps_ok = g.lsps.iter().all(|l| l.final_profit >= l.init);
    let oph_zero = o.final_distance == o.init_distance && oph_w == 0.0;
    let pass = gat_w > 0.0 && g.ir_verified && lsps_ok && oph_zero && row.ir_verified && elapsed < TOY_TIME_LIMIT;
    Verdict {
        id: 1,
        name: "toy separation",
        pass,
        detail: format!(
            "GAT welfare {gat_w:.2}% (>0), LSP deltas {:?}, OPH welfare {oph_w:.2}% (=0), {:.2}s (<{}s)",
            g.lsps.iter().map(|l| l.delta.0).collect::<Vec<_>>(),
            elapsed.as_secs_f64(),
            TOY_TIME_LIMIT.as_secs()
        ),
    }
}

// ---------------------------------------------------------------------------
// 3. Combiner oracle

fn random_selection_problem(rng: &mut ChaCha8Rng) -> SelectionProblem {
    let n_vehicles = rng.gen_range(2..=8u32);
    let n_lsps = rng.gen_range(1..=3u32);
    let n_actions = rng.gen_range(0..=COMBINER_MAX_ACTIONS);
    let actions = (0..n_actions)
        .map(|_| {
            let a = rng.gen_range(0..n_vehicles);
            let b = (a + rng.gen_range(1..n_vehicles)) % n_vehicles;
            let mut deltas = BTreeMap::new();
            for l in 0..n_lsps {
                if rng.gen_bool(0.7) {
                    deltas.insert(LspId(l), Money(rng.gen_range(-8i64..=10) * 10));
                }
            }
            Action {
                kind: if rng.gen_bool(0.5) { ActionKind::Pair } else { ActionKind::SwappedPair },
                vehicles: (VehicleId(a.min(b)), VehicleId(a.max(b))),
                new_schedules: (
                    VehicleSchedule::depot_only(VehicleId(a.min(b))),
                    VehicleSchedule::depot_only(VehicleId(a.max(b))),
                ),
                delta_total: deltas.values().copied().sum(),
                delta_profit: deltas,
            }
        })
        .collect();
    SelectionProblem {
        actions,
        lsp_slack: (0..n_lsps).map(|l| (LspId(l), Money(rng.gen_range(0..=6) * 10))).collect(),
        vehicles: (0..n_vehicles).map(VehicleId).collect(),
    }
}

fn combiner_oracle() -> Verdict {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0B1);
    let mut mismatches = 0;
    let mut nonempty = 0;
    for _ in 0..COMBINER_CASES {
        let p = random_selection_problem(&mut rng);
        let fast = combiner::select(&p);
        let brute = combiner::select_bruteforce(&p).expect("at most 20 actions");
        if fast.total_delta != brute.total_delta || fast.selected != brute.selected {
            mismatches += 1;
        }
        nonempty += usize::from(!brute.selected.is_empty());
    }
    let elapsed = t0.elapsed();
    Verdict {
        id: 3,
        name: "combiner oracle equivalence",
        pass: mismatches == 0 && elapsed < COMBINER_TIME_LIMIT,
        detail: format!(
            "{COMBINER_CASES} problems (<= {COMBINER_MAX_ACTIONS} actions, {nonempty} with non-empty optimum): {mismatches} mismatches, {:.2}s (<{}s)",
            elapsed.as_secs_f64(),
            COMBINER_TIME_LIMIT.as_secs()
        ),
    }
}

// ---------------------------------------------------------------------------
// 4. PDPTW oracle

struct Tiny {
    inst: Instance,
    /// Integer grid points; the matrix is Manhattan distance, time = distance.
    points: Vec<(i64, i64)>,
}

fn manhattan(a: (i64, i64), b: (i64, i64)) -> i64 {
    ((a.0 - b.0).abs() + (a.1 - b.1).abs()) * SCALE
}

fn tiny_instance(rng: &mut ChaCha8Rng) -> Tiny {
    let n_orders = rng.gen_range(1..=4usize);
    let n_vehicles = rng.gen_range(1..=2usize);
    let mut points: Vec<(i64, i64)> = Vec::new();
    let mut pt = |rng: &mut ChaCha8Rng| {
        points.push((rng.gen_range(0..=20), rng.gen_range(0..=20)));
        LocationId::from_index(points.len() - 1)
    };
    let horizon = 200 * SCALE;
    let depots: Vec<LocationId> = (0..n_vehicles).map(|_| pt(rng)).collect();
    let mut orders = Vec::new();
    for k in 0..n_orders {
        let id = OrderId::from_index(k);
        let (pl, dl) = (pt(rng), pt(rng));
        let vol = rng.gen_range(1..=4);
        let open = rng.gen_range(0..=60) * SCALE;
        let width = rng.gen_range(10..=120) * SCALE;
        let wp = |loc, st, et, vol| Waypoint { loc, st, et, service: rng_free_service(k), vol, order: Some(id) };
        orders.push(Order {
            id,
            owner: LspId(0),
            rev: Money(0),
            pickup: wp(pl, open, open + width, vol),
            dropoff: wp(dl, 0, horizon, -vol),
        });
    }
    let vehicles = depots
        .iter()
        .enumerate()
        .map(|(v, &loc)| Vehicle {
            id: VehicleId::from_index(v),
            lspid: LspId(0),
            cap: rng.gen_range(4..=8),
            depot: Waypoint::depot(loc, 0, horizon),
        })
        .collect();
    let lsps = vec![LspParams {
        id: LspId(0),
        alpha: Money(rng.gen_range(50..=150)),
        beta: Money(rng.gen_range(0..=30) * SCALE),
        fleet: (0..n_vehicles).map(VehicleId::from_index).collect(),
    }];
    let pts = points.clone();
    let matrix = TimeDistanceMatrix::from_fn(pts.len(), |i, j| {
        let d = manhattan(pts[i], pts[j]);
        (d, d)
    })
    .unwrap();
    let inst = Instance {
        schema_version: INSTANCE_SCHEMA_VERSION,
        scale: SCALE,
        name: "tiny".into(),
        locations: Vec::new(),
        matrix,
        orders,
        vehicles,
        lsps,
    };
    inst.validate().expect("tiny instance is well formed");
    Tiny { inst, points }
}

/// Service times derived from the order index so they vary without an
/// extra random draw.
fn rng_free_service(k: usize) -> i64 {
    (k as i64 % 3) * SCALE
}

/// Cheapest feasible route over exactly `orders` for one vehicle, by
/// enumerating every pickup/drop-off interleaving. Own arithmetic only.
fn best_route_cost(t: &Tiny, v: usize, orders: &[usize]) -> Option<i64> {
    if orders.is_empty() {
        return Some(0);
    }
    let inst = &t.inst;
    let veh = &inst.vehicles[v];
    let params = &inst.lsps[0];
    let loc = |w: &Waypoint| t.points[w.loc.index()];
    let mut best: Option<i64> = None;
    // state: position, time, pending service, load, distance, picked, dropped
    #[allow(clippy::too_many_arguments)]
    fn rec(
        t: &Tiny,
        veh: &Vehicle,
        orders: &[usize],
        at: (i64, i64),
        time: i64,
        service: i64,
        load: i64,
        dist: i64,
        picked: u32,
        dropped: u32,
        best: &mut Option<i64>,
        alpha: i64,
        beta: i64,
    ) {
        let all = (1u32 << orders.len()) - 1;
        if dropped == all {
            let depot = t.points[veh.depot.loc.index()];
            let back = time + service + manhattan(at, depot);
            if back <= veh.depot.et {
                let d = dist + manhattan(at, depot);
                let variable = (alpha as i128 * d as i128 + SCALE as i128 / 2) / SCALE as i128;
                let cost = beta + variable as i64;
                if best.is_none_or(|b| cost < b) {
                    *best = Some(cost);
                }
            }
            return;
        }
        for (k, &o) in orders.iter().enumerate() {
            let bit = 1u32 << k;
            let order = &t.inst.orders[o];
            let (w, pick) = if picked & bit == 0 {
                (&order.pickup, true)
            } else if dropped & bit == 0 {
                (&order.dropoff, false)
            } else {
                continue;
            };
            let p = t.points[w.loc.index()];
            let start = (time + service + manhattan(at, p)).max(w.st);
            let new_load = load + w.vol;
            if start > w.et || new_load > veh.cap {
                continue;
            }
            let (np, nd) = if pick { (picked | bit, dropped) } else { (picked, dropped | bit) };
            rec(t, veh, orders, p, start, w.service, new_load, dist + manhattan(at, p), np, nd, best, alpha, beta);
        }
    }
    let depot = loc(&veh.depot);
    rec(t, veh, orders, depot, veh.depot.st, veh.depot.service, 0, 0, 0, 0, &mut best, params.alpha.0, params.beta.0);
    best
}

/// Minimum total cost serving every order, over all order-to-vehicle
/// assignments.
fn enumerate_optimum(t: &Tiny) -> Option<i64> {
    let n = t.inst.orders.len();
    let m = t.inst.vehicles.len();
    let mut best: Option<i64> = None;
    for code in 0..m.pow(n as u32) {
        let mut groups = vec![Vec::new(); m];
        let mut c = code;
        for o in 0..n {
            groups[c % m].push(o);
            c /= m;
        }
        let mut total = 0;
        let mut ok = true;
        for (v, g) in groups.iter().enumerate() {
            match best_route_cost(t, v, g) {
                Some(cost) => total += cost,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && best.is_none_or(|b| total < b) {
            best = Some(total);
        }
    }
    best
}

fn pdptw_oracle() -> Verdict {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x9D97);
    let mut checked = 0;
    let mut drawn = 0;
    let mut mismatches = Vec::new();
    while checked < PDPTW_CASES {
        drawn += 1;
        let t = tiny_instance(&mut rng);
        // Only instances where serving every order is possible have a
        // comparable optimum.
        let Some(opt) = enumerate_optimum(&t) else { continue };
        checked += 1;
        let req = VrpRequest {
            instance: &t.inst,
            vehicles: t.inst.vehicles.iter().map(|v| v.id).collect(),
            orders: t.inst.orders.iter().map(|o| o.id).collect(),
            seed_routes: None,
            time_limit: Duration::from_secs(10),
            seed: drawn,
        };
        let res = pdptw::solve(&req).expect("solver runs");
        let audited = {
            let sol = gatx_core::model::Solution {
                schedules: res.schedules.clone(),
                baseline: vec![Money::ZERO],
                baseline_distance: 0,
            };
            audit(&t.inst, &sol, None)
        };
        let cost = -audited.profits[0].0;
        if !res.unassigned.is_empty()
            || res.total_cost.0 != opt
            || cost != opt
            || !audited.feasible
            || !audited.conserved
        {
            mismatches.push((drawn, opt, res.total_cost.0, res.unassigned.len()));
        }
    }
    let elapsed = t0.elapsed();
    Verdict {
        id: 4,
        name: "PDPTW oracle equivalence",
        pass: mismatches.is_empty() && elapsed < PDPTW_TIME_LIMIT,
        detail: format!(
            "{checked} instances (<= 4 orders, <= 2 vehicles; {} drawn infeasible skipped): {} mismatches {:?}, {:.2}s (<{}s)",
            drawn as usize - checked,
            mismatches.len(),
            &mismatches[..mismatches.len().min(3)],
            elapsed.as_secs_f64(),
            PDPTW_TIME_LIMIT.as_secs()
        ),
    }
}

// ---------------------------------------------------------------------------
// 8. Package golden tests

fn package_goldens() -> Verdict {
    let p = |o: u32| Stop::pickup(OrderId(o));
    let d = |o: u32| Stop::dropoff(OrderId(o));
    let sets = |stops: Vec<Stop>| -> BTreeSet<Vec<u32>> {
        let s = VehicleSchedule { vehicle: VehicleId(0), stops };
        oph::enumerate_packages(&s).iter().map(|p| p.orders.iter().map(|o| o.0).collect()).collect()
    };
    let seq = sets(vec![p(1), d(1), p(2), d(2)]);
    let inter = sets(vec![p(1), p(2), d(1), d(2)]);
    let empty = sets(vec![]);
    let want_seq: BTreeSet<Vec<u32>> = [vec![1], vec![2], vec![1, 2]].into();
    let want_inter: BTreeSet<Vec<u32>> = [vec![1, 2]].into();
    Verdict {
        id: 8,
        name: "order-package golden sets",
        pass: seq == want_seq && inter == want_inter && empty.is_empty(),
        detail: format!("(P1,D1,P2,D2) -> {seq:?}; (P1,P2,D1,D2) -> {inter:?}; depot-only -> {empty:?}"),
    }
}

// ---------------------------------------------------------------------------
// 9. Determinism of `gatx solve`

fn determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_gatx");
    let dir = tempfile::tempdir().expect("temp dir");
    let mut cases = Vec::new();
    for (name, args) in [("toy", vec!["toy"]), ("mock", vec!["mock", "--seed", "3"])] {
        let path = dir.path().join(format!("{name}.json"));
        let status =
            Command::new(bin).arg("generate").args(&args).arg("--out").arg(&path).status().expect("run gatx generate");
        assert!(status.success(), "gatx generate {name} failed");
        for algo in ["gat", "oph"] {
            let mut outputs = Vec::new();
            for rep in 0..2 {
                let out = dir.path().join(format!("{name}-{algo}-{rep}.json"));
                let status = Command::new(bin)
                    .args(["solve", path.to_str().unwrap(), "--algo", algo, "--iters", "3", "--seed", "11", "--out"])
                    .arg(&out)
                    .stderr(std::process::Stdio::null())
                    .status()
                    .expect("run gatx solve");
                let mut v: serde_json::Value =
                    serde_json::from_str(&std::fs::read_to_string(&out).expect("report written"))
                        .expect("report parses");
                report::strip_timing(&mut v);
                outputs.push((status.success(), serde_json::to_string(&v).unwrap()));
            }
            let same = outputs[0].1 == outputs[1].1;
            cases.push((format!("{name}/{algo}"), same, outputs[0].0 && outputs[1].0));
        }
    }
    let pass = cases.iter().all(|(_, same, ok)| *same && *ok);
    Verdict {
        id: 9,
        name: "determinism",
        pass,
        detail: cases
            .iter()
            .map(|(c, same, ok)| {
                format!("{c}: {} (exit {})", if *same { "identical" } else { "DIFFERENT" }, if *ok { 0 } else { 1 })
            })
            .collect::<Vec<_>>()
            .join(", "),
    }
}

// ---------------------------------------------------------------------------

fn main() {
    // The harness is a plain binary; ignore libtest flags such as
    // `--nocapture` or a name filter.
    let mut verdicts = Vec::new();

    progress("8: package goldens");
    verdicts.push(package_goldens());
    progress("1: toy");
    verdicts.push(toy_separation());
    progress("3: combiner oracle");
    verdicts.push(combiner_oracle());
    progress("4: PDPTW oracle");
    verdicts.push(pdptw_oracle());
    progress("9: determinism");
    verdicts.push(determinism());

    // Mock instances: 100 seeds for IR, the first five also form the
    // Table 3 analogue.
    let mut ir_failures = Vec::new();
    let mut monotone_failures = Vec::new();
    let mut runs = 0;
    let mut suite = Vec::new();
    for seed in 0..IR_MOCK_SEEDS {
        if seed % 10 == 0 {
            progress(format!("2: mock seeds {seed}.."));
        }
        let inst = bench::generate_mock_small(seed, MockParams::default()).expect("mock instance");
        let (_, o, g) = report::compare(&inst, &cfg(GAT_ITERATIONS), &cfg(GAT_ITERATIONS)).expect("mock runs");
        for r in [&o, &g] {
            runs += 1;
            if !r.ir_verified {
                ir_failures.push(format!("mock{seed}/{:?}", r.algo));
            }
            if seed < MOCK_SUITE_SEEDS && !monotone(r) {
                monotone_failures.push(format!("mock{seed}/{:?}", r.algo));
            }
        }
        if seed < MOCK_SUITE_SEEDS {
            suite.push((o, g));
        }
    }

    // Table 1 configurations.
    let mut t1_lines = Vec::new();
    let mut wins = 0;
    let mut gat_positive = 0;
    let mut slowest = Duration::ZERO;
    let specs = bench::table1_specs();
    for (k, spec) in specs.iter().enumerate() {
        progress(format!("5: Table 1 row {k}: {}", spec.label()));
        let t0 = Instant::now();
        let inst = spec.build(None).expect("merge builds");
        let (row, o, g) = report::compare(&inst, &cfg(GAT_ITERATIONS), &cfg(1)).expect("table 1 runs");
        slowest = slowest.max(t0.elapsed());
        for r in [&o, &g] {
            runs += 1;
            if !r.ir_verified {
                ir_failures.push(format!("t1-{k}/{:?}", r.algo));
            }
            if !monotone(r) {
                monotone_failures.push(format!("t1-{k}/{:?}", r.algo));
            }
        }
        let gw = row.gat_welfare_pct.unwrap_or(f64::NEG_INFINITY);
        let ow = row.oph_welfare_pct.unwrap_or(f64::NEG_INFINITY);
        gat_positive += usize::from(gw > 0.0);
        wins += usize::from(gw >= ow);
        t1_lines.push(format!("{k}: GAT {gw:.2}% vs OPH {ow:.2}%"));
    }

    verdicts.push(Verdict {
        id: 2,
        name: "IR invariant suite",
        pass: ir_failures.is_empty(),
        detail: format!(
            "{runs} runs ({IR_MOCK_SEEDS} mock seeds + {} Table 1 configs, GAT and OPH each) audited independently; violations: {ir_failures:?}",
            specs.len()
        ),
    });
    verdicts.push(Verdict {
        id: 5,
        name: "Table 1 directional reproduction",
        pass: gat_positive == specs.len() && wins >= TABLE1_MIN_WINS && slowest <= TABLE1_CONFIG_TIME_LIMIT,
        detail: format!(
            "GAT > 0 on {gat_positive}/{n}, GAT >= OPH(1 iter) on {wins}/{n} (need {TABLE1_MIN_WINS}), slowest config {:.1}s (<= {}s) [{}]",
            slowest.as_secs_f64(),
            TABLE1_CONFIG_TIME_LIMIT.as_secs(),
            t1_lines.join("; "),
            n = specs.len()
        ),
    });
    verdicts.push(Verdict {
        id: 6,
        name: "welfare monotonicity",
        pass: monotone_failures.is_empty(),
        detail: format!(
            "{} benchmark runs (Table 1 and mock suite), non-decreasing exact objective within the iteration cap; failures: {monotone_failures:?}",
            2 * (specs.len() + MOCK_SUITE_SEEDS as usize)
        ),
    });

    let both_positive = suite
        .iter()
        .filter(|(o, g)| o.welfare_pct.is_some_and(|w| w > 0.0) && g.welfare_pct.is_some_and(|w| w > 0.0))
        .count();
    let gat_time: f64 = suite.iter().map(|(_, g)| g.run_time_s).sum();
    let oph_time: f64 = suite.iter().map(|(o, _)| o.run_time_s).sum();
    let oph_better = suite.iter().filter(|(o, g)| o.welfare_pct > g.welfare_pct).count();
    verdicts.push(Verdict {
        id: 7,
        name: "mock-small suite",
        pass: both_positive == suite.len() && gat_time < oph_time,
        detail: format!(
            "both positive on {both_positive}/{}; GAT total {gat_time:.2}s < OPH total {oph_time:.2}s; OPH ahead on {oph_better}/{} (informational)",
            suite.len(),
            suite.len()
        ),
    });

    verdicts.sort_by_key(|v| v.id);
    let mut failed = 0;
    for v in &verdicts {
        println!("{} [{}] {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.id, v.name, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {}/{} criteria passed", verdicts.len() - failed, verdicts.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
