//! Command implementations behind the `groundstate` binary.
//!
//! Every command writes its report to the given sinks and returns the process
//! exit status: 0 clean, 1 violations (or a failed check), 2 usage or input
//! error.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use groundstate::asymptotics::{pair_specific_model, residuals, AsymptoticModel, ModelFamily};
use groundstate::audit::{
    brute_force_prop1_check, monotonicity_audit, pair_count, scaled_bound, AuditReport, Tolerance,
    PROP1_RESTARTS_PER_POINT,
};
use groundstate::optimizer::{build_table, OptimizerSettings};
use groundstate::table::{parse_table, save_table};
use groundstate::{DomainSpec, EnergyTable, PotentialSpec};
use serde::Serialize;

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "groundstate",
    version,
    about = "Audit and generate N-point ground-state energy tables"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a table for pair-specific monotonicity violations
    Audit(AuditArgs),
    /// Generate a table of candidate ground-state energies
    Optimize(OptimizeArgs),
    /// Write data and model columns for plotting against an asymptotic expansion
    Asymptote(AsymptoteArgs),
    /// Brute-force monotonicity check for small N
    #[command(name = "prop1-check")]
    Prop1Check(Prop1Args),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Records,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub input: PathBuf,

    /// Violation threshold factor; relative to max(1, |eps(N)|) unless --absolute
    #[arg(long)]
    pub tolerance: Option<f64>,

    /// Use --tolerance as an absolute threshold on delta eps
    #[arg(long, requires = "tolerance")]
    pub absolute: bool,

    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// sphere, torus:<ratio> or free3
    #[arg(long)]
    pub domain: DomainSpec,

    /// log, riesz:<s>, coulomb:<D> or lj
    #[arg(long)]
    pub potential: PotentialSpec,

    /// Sizes, e.g. `2-6,12`
    #[arg(long, value_parser = parse_sizes)]
    pub n: Sizes,

    #[arg(long, default_value_t = 50)]
    pub restarts: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Stop a local search once every tangent gradient is below this
    #[arg(long, default_value_t = 1e-10)]
    pub gradient_tolerance: f64,

    /// Iteration cap per local search (default 50 N)
    #[arg(long)]
    pub max_iterations: Option<usize>,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AsymptoteArgs {
    #[arg(long, value_parser = parse_model)]
    pub model: ModelFamily,

    /// Table to compare; without it only the model column is written
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Extra sizes for the model column
    #[arg(long, value_parser = parse_sizes)]
    pub n: Option<Sizes>,

    /// Writes `<prefix>-data.dat` and `<prefix>-model.dat`
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Prop1Args {
    #[arg(long)]
    pub domain: DomainSpec,

    #[arg(long)]
    pub potential: PotentialSpec,

    #[arg(long)]
    pub n_max: usize,

    /// Restarts per N (default and minimum 100 N_max)
    #[arg(long)]
    pub restarts: Option<usize>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// A sorted, duplicate-free list of sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sizes(pub Vec<usize>);

/// Parses comma-separated sizes and inclusive `a-b` ranges.
pub fn parse_sizes(s: &str) -> Result<Sizes, String> {
    let mut out = BTreeSet::new();
    for part in s.split(',').map(str::trim) {
        let number = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("malformed size `{t}` in `{s}`"))
        };
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (number(a)?, number(b)?);
                if a > b {
                    return Err(format!("empty range `{part}`"));
                }
                out.extend(a..=b);
            }
            None => {
                out.insert(number(part)?);
            }
        }
    }
    if let Some(&n) = out.iter().next() {
        if n < 2 {
            return Err(format!("sizes must be at least 2, got {n}"));
        }
    }
    Ok(Sizes(out.into_iter().collect()))
}

fn parse_model(s: &str) -> Result<ModelFamily, String> {
    s.parse().map_err(|e: groundstate::Error| e.to_string())
}

/// One line of `--format records` output.
#[derive(Debug, Serialize, PartialEq)]
pub struct ReportRecord {
    #[serde(rename = "type")]
    pub kind: &'static str,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub n: usize,
    pub delta_eps: Option<f64>,
    pub bound: f64,
    pub witness_n: usize,
    pub table_digest: String,
}

/// Violation records in `(N, n)` order, then one bound record per flagged N.
pub fn report_records(t: &EnergyTable, r: &AuditReport) -> Vec<ReportRecord> {
    let mut records: Vec<ReportRecord> = r
        .violations
        .iter()
        .map(|v| {
            let m = v.comparison_n();
            ReportRecord {
                kind: "violation",
                big_n: v.n,
                n: v.order,
                delta_eps: Some(v.delta_eps),
                bound: scaled_bound(
                    v.n,
                    m,
                    t.energy(m).expect("violation refers to a table row"),
                ),
                witness_n: v.order,
                table_digest: r.table_digest.clone(),
            }
        })
        .collect();
    records.extend(r.improved_bounds.iter().map(|(&n, b)| ReportRecord {
        kind: "bound",
        big_n: n,
        n: b.witness_order,
        delta_eps: None,
        bound: b.bound,
        witness_n: b.witness_order,
        table_digest: r.table_digest.clone(),
    }));
    records
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Audit(a) => run_audit(&a, out),
        Command::Optimize(a) => run_optimize(&a, out),
        Command::Asymptote(a) => run_asymptote(&a, out),
        Command::Prop1Check(a) => run_prop1(&a, out),
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {e}");
        EXIT_ERROR
    })
}

type CmdResult = Result<i32, Box<dyn std::error::Error>>;

pub fn run_audit(a: &AuditArgs, out: &mut dyn Write) -> CmdResult {
    let tolerance = match (a.tolerance, a.absolute) {
        (None, _) => Tolerance::default(),
        (Some(v), false) => Tolerance::Relative(v),
        (Some(v), true) => Tolerance::Absolute(v),
    };
    let table = parse_table(&a.input)?;
    let report = monotonicity_audit(&table, tolerance)?;
    match a.format {
        ReportFormat::Records => {
            for record in report_records(&table, &report) {
                writeln!(out, "{}", serde_json::to_string(&record)?)?;
            }
        }
        ReportFormat::Text => {
            for r in report_records(&table, &report) {
                if let Some(delta_eps) = r.delta_eps {
                    writeln!(
                        out,
                        "N={} fails n={}: Δε={:.9}; improved bound {:.4}",
                        r.big_n, r.n, delta_eps, r.bound
                    )?;
                }
            }
            for (n, b) in &report.improved_bounds {
                writeln!(
                    out,
                    "best bound E_g({n}) <= {:.4} (witness N={})",
                    b.bound,
                    n + b.witness_order
                )?;
            }
            writeln!(
                out,
                "{} rows, {} violations, tolerance {}, table {}",
                table.len(),
                report.violations.len(),
                report.tolerance,
                report.table_digest
            )?;
        }
    }
    Ok(if report.is_clean() {
        EXIT_CLEAN
    } else {
        EXIT_VIOLATIONS
    })
}

pub fn run_optimize(a: &OptimizeArgs, out: &mut dyn Write) -> CmdResult {
    let settings = OptimizerSettings {
        restarts: a.restarts,
        max_iterations: a.max_iterations,
        gradient_tolerance: a.gradient_tolerance,
        initial_step: None,
        seed: a.seed,
    };
    let table = build_table(a.domain, a.potential, &a.n.0, &settings)?;
    save_table(&a.out, &table)?;
    writeln!(out, "wrote {} rows to {}", table.len(), a.out.display())?;
    Ok(EXIT_CLEAN)
}

fn prefixed(prefix: &std::path::Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

pub fn run_asymptote(a: &AsymptoteArgs, out: &mut dyn Write) -> CmdResult {
    let model = AsymptoticModel::for_family(a.model);
    let mut sizes: BTreeSet<usize> = a.n.iter().flat_map(|s| s.0.iter().copied()).collect();
    let mut data = String::new();
    if let Some(input) = &a.input {
        let table = parse_table(input)?;
        for (n, r) in residuals(&table, &model)? {
            log::debug!("N={n} residual {r}");
        }
        for (n, entry) in table.iter() {
            writeln!(data, "{n}\t{}", entry.energy / pair_count(n))?;
        }
        sizes.extend(table.sizes());
    } else if sizes.is_empty() {
        return Err("asymptote needs --input, --n or both".into());
    }
    let mut model_text = String::new();
    for &n in &sizes {
        writeln!(model_text, "{n}\t{}", pair_specific_model(&model, n)?)?;
    }
    let data_path = prefixed(&a.out, "-data.dat");
    let model_path = prefixed(&a.out, "-model.dat");
    std::fs::write(&data_path, data)?;
    std::fs::write(&model_path, model_text)?;
    writeln!(
        out,
        "wrote {} and {}",
        data_path.display(),
        model_path.display()
    )?;
    Ok(EXIT_CLEAN)
}

pub fn run_prop1(a: &Prop1Args, out: &mut dyn Write) -> CmdResult {
    let settings = OptimizerSettings {
        restarts: a.restarts.unwrap_or(PROP1_RESTARTS_PER_POINT * a.n_max),
        seed: a.seed,
        ..OptimizerSettings::default()
    };
    let report = brute_force_prop1_check(a.domain, a.potential, a.n_max, &settings)?;
    for row in &report.rows {
        writeln!(
            out,
            "N={} E={} eps={:.5}{}",
            row.n,
            row.energy,
            row.eps,
            if row.converged {
                ""
            } else {
                " (not converged)"
            }
        )?;
    }
    for s in &report.steps {
        writeln!(
            out,
            "N={}->{}: eps increasing {}; E({}) >= {:.10} {}",
            s.n,
            s.n + 1,
            s.eps_increasing,
            s.n + 1,
            s.required_min,
            s.chain_holds
        )?;
    }
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    writeln!(out, "eps monotone: {}", verdict(report.eps_monotone()))?;
    writeln!(
        out,
        "per-step inequality: {}",
        verdict(report.proof_chain_holds())
    )?;
    Ok(if report.passed() {
        EXIT_CLEAN
    } else {
        EXIT_VIOLATIONS
    })
}
