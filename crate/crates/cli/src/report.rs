//! Solve reports and comparison tables.

use crate::audit::{audit, Audit};
use anyhow::{Context, Result};
use clap::ValueEnum;
use gatx_core::gat::{self, GatConfig, IterationRecord, RunOutcome};
use gatx_core::model::{self, Instance, LspId, Money, Solution, WelfareBasis};
use gatx_core::{oph, pdptw};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::time::Instant;

/// Bumped whenever a field changes meaning or disappears.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Gat,
    Oph,
}

impl Algo {
    /// Iteration count used when none is given: GAT runs up to five
    /// rounds, OPH a single full exchange.
    pub fn default_iterations(self) -> usize {
        match self {
            Algo::Gat => 5,
            Algo::Oph => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub name: String,
    pub orders: usize,
    pub vehicles: usize,
    pub lsps: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveParams {
    pub iters: usize,
    pub pair_time_limit_ms: u64,
    pub seed: u64,
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LspLine {
    pub lsp: LspId,
    pub init: Money,
    #[serde(rename = "final")]
    pub final_profit: Money,
    pub delta: Money,
}

/// Everything `gatx solve` writes. Keys ending in `_s` hold wall-clock
/// seconds; all other fields are reproducible from the inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema_version: u32,
    pub instance: InstanceSummary,
    pub algo: Algo,
    pub params: SolveParams,
    pub welfare_basis: WelfareBasis,
    /// `None` when the baseline it is relative to is zero.
    pub welfare_pct: Option<f64>,
    pub lsps: Vec<LspLine>,
    pub init_distance: i64,
    pub final_distance: i64,
    pub iterations: Vec<IterationRecord>,
    pub audit: Audit,
    pub ir_verified: bool,
    pub solution: Solution,
    pub init_time_s: f64,
    pub run_time_s: f64,
}

impl SolveReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    /// One-screen summary for the terminal.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} on {}: welfare {} ({} basis), {} iteration(s), {:.2}s",
            match self.algo {
                Algo::Gat => "GAT",
                Algo::Oph => "OPH",
            },
            self.instance.name,
            fmt_pct(self.welfare_pct),
            match self.welfare_basis {
                WelfareBasis::Distance => "distance",
                WelfareBasis::Profit => "profit",
            },
            self.iterations.len(),
            self.run_time_s
        );
        for l in &self.lsps {
            let _ =
                writeln!(out, "  {}: init {} -> final {} ({:+})", l.lsp, l.init, l.final_profit, l.delta.as_units());
        }
        let _ = write!(out, "  audit: {}", if self.audit.passed() { "passed" } else { "FAILED" });
        for issue in &self.audit.issues {
            let _ = write!(out, "\n    {issue}");
        }
        out
    }
}

pub fn fmt_pct(p: Option<f64>) -> String {
    match p {
        Some(v) => format!("{v:.2}%"),
        None => "n/a".into(),
    }
}

pub fn summarize(inst: &Instance) -> InstanceSummary {
    InstanceSummary {
        name: inst.name.clone(),
        orders: inst.orders.len(),
        vehicles: inst.vehicles.len(),
        lsps: inst.lsps.len(),
    }
}

pub fn params_of(cfg: &GatConfig) -> SolveParams {
    SolveParams {
        iters: cfg.max_iterations,
        pair_time_limit_ms: cfg.pair_time_limit.as_millis() as u64,
        seed: cfg.seed,
        threads: cfg.threads,
    }
}

/// Builds the no-collaboration baseline for `cfg`.
pub fn baseline(inst: &Instance, cfg: &GatConfig) -> Result<(Solution, f64)> {
    let t0 = Instant::now();
    let init = pdptw::initial_solution(inst, &cfg.init).context("routing each LSP on its own")?;
    Ok((init, t0.elapsed().as_secs_f64()))
}

/// Runs `algo` from an already built baseline and audits the result.
pub fn solve_from(
    inst: &Instance,
    algo: Algo,
    cfg: &GatConfig,
    initial: Solution,
    init_time_s: f64,
) -> Result<SolveReport> {
    let RunOutcome { initial, solution, history, wall_time, .. } = match algo {
        Algo::Gat => gat::run_from(inst, initial, cfg),
        Algo::Oph => oph::run_from(inst, initial, cfg),
    }
    .context("running the exchange algorithm")?;
    let audit = audit(inst, &solution, Some(&initial));
    let lsps = audit
        .profits
        .iter()
        .zip(&solution.baseline)
        .enumerate()
        .map(|(l, (&now, &init))| LspLine { lsp: LspId(l as u32), init, final_profit: now, delta: now - init })
        .collect();
    Ok(SolveReport {
        schema_version: REPORT_SCHEMA_VERSION,
        instance: summarize(inst),
        algo,
        params: params_of(cfg),
        welfare_basis: WelfareBasis::of(inst),
        welfare_pct: model::social_welfare(&solution, inst)?,
        lsps,
        init_distance: solution.baseline_distance,
        final_distance: audit.total_distance,
        iterations: history,
        ir_verified: audit.passed(),
        audit,
        solution,
        init_time_s,
        run_time_s: wall_time.as_secs_f64(),
    })
}

pub fn solve(inst: &Instance, algo: Algo, cfg: &GatConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let (initial, t) = baseline(inst, cfg)?;
    solve_from(inst, algo, cfg, initial, t)
}

/// Removes every wall-clock field (keys ending in `_s`), leaving the part
/// of a report that must be identical across repeated runs.
pub fn strip_timing(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Object(map) => {
            map.retain(|k, _| !k.ends_with("_s"));
            for v in map.values_mut() {
                strip_timing(v);
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

/// One row of a side-by-side comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub instance: String,
    pub oph_welfare_pct: Option<f64>,
    pub oph_time_s: f64,
    pub gat_welfare_pct: Option<f64>,
    pub gat_time_s: f64,
    pub ir_verified: bool,
}

/// Runs both algorithms from one shared baseline. Times exclude building
/// that baseline.
pub fn compare(
    inst: &Instance,
    gat_cfg: &GatConfig,
    oph_cfg: &GatConfig,
) -> Result<(CompareRow, SolveReport, SolveReport)> {
    gat_cfg.validate()?;
    oph_cfg.validate()?;
    let (initial, t) = baseline(inst, gat_cfg)?;
    let o = solve_from(inst, Algo::Oph, oph_cfg, initial.clone(), t)?;
    let g = solve_from(inst, Algo::Gat, gat_cfg, initial, t)?;
    let row = CompareRow {
        instance: inst.name.clone(),
        oph_welfare_pct: o.welfare_pct,
        oph_time_s: o.run_time_s,
        gat_welfare_pct: g.welfare_pct,
        gat_time_s: g.run_time_s,
        ir_verified: o.ir_verified && g.ir_verified,
    };
    Ok((row, o, g))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Markdown,
    Csv,
}

const HEADER: [&str; 5] = ["Instance", "OPH Soc. Welf.", "OPH Time(s)", "GAT Soc. Welf.", "GAT Time(s)"];

pub fn render_table(rows: &[CompareRow], format: TableFormat) -> String {
    let cells = |r: &CompareRow| {
        [
            r.instance.clone(),
            fmt_pct(r.oph_welfare_pct),
            format!("{:.2}", r.oph_time_s),
            fmt_pct(r.gat_welfare_pct),
            format!("{:.2}", r.gat_time_s),
        ]
    };
    let mut out = String::new();
    match format {
        TableFormat::Markdown => {
            let _ = writeln!(out, "| {} |", HEADER.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(HEADER.len()));
            for r in rows {
                let _ = writeln!(out, "| {} |", cells(r).join(" | "));
            }
        }
        TableFormat::Csv => {
            let _ = writeln!(out, "{}", HEADER.join(","));
            for r in rows {
                let quoted: Vec<String> = cells(r)
                    .into_iter()
                    .map(|c| if c.contains([',', '"']) { format!("\"{}\"", c.replace('"', "\"\"")) } else { c })
                    .collect();
                let _ = writeln!(out, "{}", quoted.join(","));
            }
        }
    }
    out
}
