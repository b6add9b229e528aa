//! Argument parsing and the subcommands behind the `gatx` binary.

use crate::report::{self, Algo, CompareRow, TableFormat};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gatx_core::bench::{self, MergeSpec, MergeSuite, MockParams};
use gatx_core::gat::GatConfig;
use gatx_core::model::Instance;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

/// Exit status of a run whose output failed the independent audit.
pub const EXIT_AUDIT_FAILED: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "gatx", version, about = "Collaborative pickup-and-delivery routing across logistics providers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an instance JSON file.
    Generate {
        #[command(subcommand)]
        source: Source,
        /// Output file; stdout when omitted.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Run one algorithm on an instance and write a JSON report.
    Solve(SolveArgs),
    /// Run both algorithms on each instance and print a comparison table.
    Compare(CompareArgs),
    /// Run a built-in benchmark suite and print its comparison table.
    Suite(SuiteArgs),
}

#[derive(Debug, Subcommand)]
pub enum Source {
    /// Small many-LSP instance with more vehicles than orders.
    Mock {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        lsps: usize,
        #[arg(long, default_value_t = 10)]
        vehicles_per_lsp: usize,
        #[arg(long, default_value_t = 40)]
        orders: usize,
    },
    /// Two Li & Lim files merged with an offset, from a TOML or JSON spec.
    Merge {
        /// A single merge spec, or a suite file with `[[merge]]` entries.
        spec: PathBuf,
        /// Which entry of a suite file to build.
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[command(flatten)]
        data: DataDir,
    },
    /// One of the ten built-in Table 1 merge configurations (0-9).
    Table1 {
        row: usize,
        #[command(flatten)]
        data: DataDir,
    },
    /// The two-LSP toy instance where exchanging orders pays.
    Toy,
}

#[derive(Debug, Args)]
pub struct DataDir {
    /// Directory holding the Li & Lim files. Without it, deterministic
    /// surrogates with the same shape are generated.
    #[arg(long, env = "GATX_LILIM_DIR")]
    pub data_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Per pair-solve time limit in milliseconds.
    #[arg(long = "pair-time-limit", default_value_t = 500)]
    pub pair_time_limit_ms: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for pair solving.
    #[arg(long, env = "GATX_THREADS")]
    pub threads: Option<usize>,
}

impl RunArgs {
    pub fn config(&self, iters: usize) -> Result<GatConfig> {
        let mut cfg = GatConfig {
            max_iterations: iters,
            pair_time_limit: Duration::from_millis(self.pair_time_limit_ms),
            seed: self.seed,
            threads: self.threads,
            ..GatConfig::default()
        };
        cfg.init.seed = self.seed;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Gat)]
    pub algo: Algo,
    /// Iteration cap; 5 for GAT and 1 for OPH when omitted.
    #[arg(long)]
    pub iters: Option<usize>,
    #[command(flatten)]
    pub run: RunArgs,
    /// Report file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(required = true)]
    pub instances: Vec<PathBuf>,
    /// Iteration cap for both algorithms.
    #[arg(long, default_value_t = 5)]
    pub iters: usize,
    /// Separate iteration cap for OPH.
    #[arg(long)]
    pub oph_iters: Option<usize>,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum, default_value_t = TableFormat::Markdown)]
    pub format: TableFormat,
    /// Also write every per-run report into this directory.
    #[arg(long)]
    pub reports: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SuiteName {
    /// The ten offset-merge configurations; GAT up to 5 iterations, OPH 1.
    Table1,
    /// Five seeded mock instances; both algorithms up to 5 iterations.
    Mock,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[arg(value_enum)]
    pub suite: SuiteName,
    /// Merge configurations to use instead of the built-in Table 1 rows.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataDir,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum, default_value_t = TableFormat::Markdown)]
    pub format: TableFormat,
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    let inst = Instance::read_json(path).with_context(|| format!("reading instance {}", path.display()))?;
    inst.validate().with_context(|| format!("validating instance {}", path.display()))?;
    Ok(inst)
}

pub fn generate(source: &Source) -> Result<Instance> {
    Ok(match source {
        Source::Mock { seed, lsps, vehicles_per_lsp, orders } => bench::generate_mock_small(
            *seed,
            MockParams { lsps: *lsps, vehicles_per_lsp: *vehicles_per_lsp, orders: *orders },
        )?,
        Source::Merge { spec, index, data } => {
            let text = std::fs::read_to_string(spec).with_context(|| format!("reading {}", spec.display()))?;
            let chosen = match MergeSuite::from_toml(&text) {
                Ok(suite) if !suite.merge.is_empty() => suite
                    .merge
                    .get(*index)
                    .cloned()
                    .with_context(|| format!("{} has {} entries", spec.display(), suite.merge.len()))?,
                _ => bench::parse_merge_spec(&text)?,
            };
            chosen.build(data.data_dir.as_deref())?
        }
        Source::Table1 { row, data } => {
            let specs = bench::table1_specs();
            let Some(spec) = specs.get(*row) else {
                bail!("Table 1 has rows 0-{}", specs.len() - 1);
            };
            spec.build(data.data_dir.as_deref())?
        }
        Source::Toy => bench::toy_instance(),
    })
}

/// Prints the audit outcome and maps it to the process status.
fn audit_status(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: output failed the independent audit (individual rationality or feasibility)");
        ExitCode::from(EXIT_AUDIT_FAILED)
    }
}

fn solve(args: &SolveArgs) -> Result<ExitCode> {
    let iters = args.iters.unwrap_or(args.algo.default_iterations());
    let cfg = args.run.config(iters)?;
    let inst = load_instance(&args.instance)?;
    let report = report::solve(&inst, args.algo, &cfg)?;
    write_or_print(args.out.as_deref(), &report.to_json())?;
    eprintln!("{}", report.summary());
    Ok(audit_status(report.ir_verified))
}

fn compare_all(
    instances: impl IntoIterator<Item = Result<Instance>>,
    gat_cfg: &GatConfig,
    oph_cfg: &GatConfig,
    reports: Option<&Path>,
) -> Result<(Vec<CompareRow>, bool)> {
    let mut rows = Vec::new();
    let mut ok = true;
    for (k, inst) in instances.into_iter().enumerate() {
        let inst = inst?;
        let (row, o, g) = report::compare(&inst, gat_cfg, oph_cfg)?;
        eprintln!("{}\n{}", o.summary(), g.summary());
        if let Some(dir) = reports {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{k:02}-oph.json")), o.to_json())?;
            std::fs::write(dir.join(format!("{k:02}-gat.json")), g.to_json())?;
        }
        ok &= row.ir_verified;
        rows.push(row);
    }
    Ok((rows, ok))
}

fn compare(args: &CompareArgs) -> Result<ExitCode> {
    let gat_cfg = args.run.config(args.iters)?;
    let oph_cfg = args.run.config(args.oph_iters.unwrap_or(args.iters))?;
    let instances = args.instances.iter().map(|p| load_instance(p));
    let (rows, ok) = compare_all(instances, &gat_cfg, &oph_cfg, args.reports.as_deref())?;
    print!("{}", report::render_table(&rows, args.format));
    Ok(audit_status(ok))
}

fn suite(args: &SuiteArgs) -> Result<ExitCode> {
    let (instances, gat_cfg, oph_cfg): (Vec<Result<Instance>>, _, _) = match args.suite {
        SuiteName::Table1 => {
            let specs: Vec<MergeSpec> = match &args.config {
                Some(p) => MergeSuite::from_toml(&std::fs::read_to_string(p)?)?.merge,
                None => bench::table1_specs(),
            };
            let dir = args.data.data_dir.clone();
            let insts = specs.iter().map(|s| s.build(dir.as_deref()).map_err(Into::into)).collect();
            (insts, args.run.config(5)?, args.run.config(1)?)
        }
        SuiteName::Mock => {
            let insts =
                (0..5).map(|s| bench::generate_mock_small(s, MockParams::default()).map_err(Into::into)).collect();
            (insts, args.run.config(5)?, args.run.config(5)?)
        }
    };
    let (rows, ok) = compare_all(instances, &gat_cfg, &oph_cfg, None)?;
    print!("{}", report::render_table(&rows, args.format));
    Ok(audit_status(ok))
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Generate { source, out } => {
            let inst = generate(source)?;
            write_or_print(out.as_deref(), &(inst.to_json_string() + "\n"))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve(args) => solve(args),
        Command::Compare(args) => compare(args),
        Command::Suite(args) => suite(args),
    }
}
