use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use telecert_core::certification::{certify_all, discrepancy_from_reports, transition_points_all};
use telecert_core::entanglement::negativity_normalizer;
use telecert_core::mpp::classical_threshold_with;
use telecert_core::protocol::{average_distance, simulate_protocol};
use telecert_core::quadrature::QuadOptions;
use telecert_core::{
    negativity, negativity_closed_form, sweep, BellIndex, Measure, ResourceFamily, StrategyRule,
    SweepRow,
};

mod output;

use output::{json_num, Cell, Format, Table};

const EXIT_ARGS: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_CHECK: u8 = 4;

const MIN_MC_SAMPLES: usize = 1000;
const MC_SIGMAS: f64 = 4.0;
const NEGATIVITY_AGREEMENT: f64 = 1e-10;

#[derive(Parser)]
#[command(
    name = "telecert",
    version,
    about = "Classical thresholds and certification of noisy teleportation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal measure-and-prepare thresholds
    Thresholds {
        #[command(flatten)]
        common: Common,
    },
    /// Averages and verdicts over a grid of p
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        resource: ResourceArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Values of p where a verdict flips
    Transitions {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        resource: ResourceArgs,
    },
    /// Verdicts at a single p
    Certify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        resource: ResourceArgs,
        #[arg(long)]
        p: f64,
    },
    /// Negativity curve of a resource family
    Negativity {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        resource: ResourceArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Compare sphere quadrature with a Monte-Carlo estimate
    McCheck {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        resource: ResourceArgs,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    /// Comma-separated measure ids, or "all"
    #[arg(long, default_value = "all")]
    measures: String,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Output file (standard output when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Quadrature tolerance for thresholds, bisection tolerance for transitions
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct ResourceArgs {
    #[arg(long, default_value = "werner")]
    resource: String,
    /// Bell state of a Werner resource (1..=4)
    #[arg(long)]
    bell_index: Option<usize>,
    #[arg(long, default_value = "optimal-fidelity")]
    strategy: String,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 0.0)]
    p_min: f64,
    #[arg(long, default_value_t = 1.0)]
    p_max: f64,
    #[arg(long, default_value_t = 101)]
    steps: usize,
}

#[derive(Debug)]
enum Failure {
    Args(String),
    Io(String),
    Compute(String),
    Check(String),
}

impl From<telecert_core::Error> for Failure {
    fn from(e: telecert_core::Error) -> Self {
        use telecert_core::Error::*;
        match e {
            QuadratureNotConverged { .. } | EigenNotConverged(_) | NonFinite(_) => {
                Failure::Compute(e.to_string())
            }
            _ => Failure::Args(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn parse_measures(s: &str) -> Result<Vec<Measure>, Failure> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(Measure::ALL.to_vec());
    }
    let ms = s
        .split(',')
        .map(|m| m.parse::<Measure>())
        .collect::<Result<Vec<_>, _>>()?;
    if ms.is_empty() {
        return Err(Failure::Args("no measures given".into()));
    }
    Ok(ms)
}

impl ResourceArgs {
    fn family(&self) -> Result<ResourceFamily, Failure> {
        let fam: ResourceFamily = self.resource.parse()?;
        match (fam, self.bell_index) {
            (ResourceFamily::Werner(_), Some(k)) => Ok(ResourceFamily::Werner(BellIndex::new(k)?)),
            (_, Some(_)) => Err(Failure::Args(format!(
                "--bell-index only applies to werner, not {fam}"
            ))),
            (fam, None) => Ok(fam),
        }
    }

    fn rule(&self) -> Result<StrategyRule, Failure> {
        Ok(self.strategy.parse()?)
    }
}

fn emit(table: &Table, common: &Common) -> Outcome {
    match &common.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            table
                .write(common.format, &mut w)
                .and_then(|_| w.flush())
                .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let stdout = io::stdout();
            table
                .write(common.format, stdout.lock())
                .map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

fn row_cells(r: &SweepRow) -> Vec<Cell> {
    vec![
        r.resource.id().into(),
        r.measure.id().into(),
        r.p.into(),
        r.average.into(),
        r.threshold.into(),
        r.verdict.id().into(),
        r.negativity_normalized.into(),
    ]
}

const ROW_COLUMNS: [&str; 7] = [
    "resource",
    "measure",
    "p",
    "average",
    "threshold",
    "verdict",
    "negativity_normalized",
];

fn thresholds(common: &Common) -> Outcome {
    let measures = parse_measures(&common.measures)?;
    let mut opts = QuadOptions::from_env();
    if let Some(tol) = common.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Failure::Args(format!("--tol must be positive, got {tol}")));
        }
        opts = opts.with_tol(tol);
    }
    let mut table = Table::new(&["measure", "r_opt", "threshold"]);
    for m in measures {
        let t = classical_threshold_with(m, &opts)?;
        table.push(vec![m.id().into(), t.r_opt.into(), t.threshold.into()]);
    }
    emit(&table, common)
}

fn run_sweep(common: &Common, resource: &ResourceArgs, grid: &GridArgs) -> Outcome {
    let measures = parse_measures(&common.measures)?;
    let rows = sweep(
        resource.family()?,
        &measures,
        grid.p_min,
        grid.p_max,
        grid.steps,
        &resource.rule()?,
    )?;
    let mut table = Table::new(&ROW_COLUMNS);
    rows.iter().for_each(|r| table.push(row_cells(r)));
    emit(&table, common)?;
    let quantum = rows
        .iter()
        .filter(|r| r.verdict == telecert_core::Verdict::Quantum)
        .count();
    let summary = format!(
        "{} rows: {quantum} quantum, {} classical",
        rows.len(),
        rows.len() - quantum
    );
    // keep standard output clean when it carries the data
    if common.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn transitions(common: &Common, resource: &ResourceArgs) -> Outcome {
    let measures = parse_measures(&common.measures)?;
    let tol = common.tol.unwrap_or(1e-6);
    let reports = transition_points_all(&measures, resource.family()?, &resource.rule()?, tol)?;
    let mut table = Table::new(&["measure", "p", "to"]);
    for r in &reports {
        for t in &r.transitions {
            table.push(vec![r.measure.id().into(), t.p.into(), t.to.id().into()]);
        }
    }
    if measures.len() >= 2 {
        let d = discrepancy_from_reports(reports);
        let interval = d.interval.map(json_num).unwrap_or(Value::Null);
        let pair = d
            .pair
            .map(|(a, b)| Value::from(vec![a.id(), b.id()]))
            .unwrap_or(Value::Null);
        let excluded: Vec<&str> = d.excluded.iter().map(|m| m.id()).collect();
        table.extra.push(("discrepancy", interval));
        table.extra.push(("discrepancy_measures", pair));
        table.extra.push(("excluded", Value::from(excluded)));
    }
    emit(&table, common)
}

fn run_certify(common: &Common, resource: &ResourceArgs, p: f64) -> Outcome {
    let measures = parse_measures(&common.measures)?;
    let fam = resource.family()?;
    let verdicts = certify_all(&measures, fam, p, &resource.rule()?)?;
    let neg = telecert_core::normalized_negativity(fam, p)?;
    let mut table = Table::new(&ROW_COLUMNS);
    for v in verdicts {
        table.push(row_cells(&SweepRow {
            resource: fam,
            measure: v.measure,
            p: v.p,
            average: v.average,
            threshold: v.threshold,
            verdict: v.verdict,
            negativity_normalized: neg,
        }));
    }
    emit(&table, common)
}

fn run_negativity(common: &Common, resource: &ResourceArgs, grid: &GridArgs) -> Outcome {
    let fam = resource.family()?;
    let ps = telecert_core::certification::p_grid(grid.p_min, grid.p_max, grid.steps)?;
    let max = negativity_normalizer(fam)?;
    let mut table = Table::new(&["p", "negativity", "closed_form", "normalized"]);
    let mut worst: f64 = 0.0;
    for p in ps {
        let n = negativity(&fam.build(p)?)?;
        let closed = negativity_closed_form(fam, p)?;
        worst = worst.max((n - closed).abs());
        let normalized = if max > 0.0 { n / max } else { 0.0 };
        table.push(vec![p.into(), n.into(), closed.into(), normalized.into()]);
    }
    emit(&table, common)?;
    if worst > NEGATIVITY_AGREEMENT {
        return Err(Failure::Check(format!(
            "numeric and closed-form negativity differ by {worst:e}"
        )));
    }
    Ok(())
}

fn mc_check(
    common: &Common,
    resource: &ResourceArgs,
    p: f64,
    samples: usize,
    seed: u64,
) -> Outcome {
    if samples < MIN_MC_SAMPLES {
        return Err(Failure::Args(format!(
            "--samples must be at least {MIN_MC_SAMPLES}, got {samples}"
        )));
    }
    let measures = parse_measures(&common.measures)?;
    let fam = resource.family()?;
    let res = fam.build(p)?;
    let strategy = resource.rule()?.resolve(fam, &res)?;
    let mut table = Table::new(&["measure", "quadrature", "mc_mean", "mc_std_error", "pass"]);
    let mut failed = Vec::new();
    for m in measures {
        let quad = average_distance(m, &res, &strategy)?;
        let est = simulate_protocol(m, &res, &strategy, samples, seed)?;
        let pass = (est.mean - quad).abs() <= MC_SIGMAS * est.std_error + 1e-9;
        if !pass {
            failed.push(m.id());
        }
        table.push(vec![
            m.id().into(),
            quad.into(),
            est.mean.into(),
            est.std_error.into(),
            pass.into(),
        ]);
    }
    emit(&table, common)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "Monte-Carlo estimate outside {MC_SIGMAS} sigma for {}",
            failed.join(", ")
        )))
    }
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Thresholds { common } => thresholds(common),
        Command::Sweep {
            common,
            resource,
            grid,
        } => run_sweep(common, resource, grid),
        Command::Transitions { common, resource } => transitions(common, resource),
        Command::Certify {
            common,
            resource,
            p,
        } => run_certify(common, resource, *p),
        Command::Negativity {
            common,
            resource,
            grid,
        } => run_negativity(common, resource, grid),
        Command::McCheck {
            common,
            resource,
            p,
            samples,
            seed,
        } => mc_check(common, resource, *p, *samples, *seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Args(m) => (EXIT_ARGS, m),
                Failure::Io(m) => (EXIT_IO, m),
                Failure::Compute(m) => (1, m),
                Failure::Check(m) => (EXIT_CHECK, m),
            };
            eprintln!("telecert: {msg}");
            ExitCode::from(code)
        }
    }
}
