use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use noninf::analysis::{analyze_method, AnalysisOptions};
use noninf::exact::{ExactOptions, NuisanceMode};
use noninf::oc::{
    exact_power, fm_sample_size_with, summarize, table_sweep, RegionOptions, Rounding, SampleSizeSpec, SummaryStats,
    SweepResult, SweepRow,
};
use noninf::reference::TABLE3_ROWS;
use noninf::{Conventions, Method, MethodResult, NoninfSpec, Shape, TwoArmData};

use crate::config::{parse_methods, Resolved, SweepConfig, SweepEntry};
use crate::format::Precision;
use crate::reproduce::{self, Cell};
use crate::{exit, REPORT_SCHEMA};

/// ES needs an explicit override above this arm size.
pub const ES_MAX_N: u32 = 150;

#[derive(Debug, Parser)]
#[command(name = "noninf", version, about = "Non-inferiority tests and confidence intervals for two binomial proportions")]
pub struct Cli {
    /// Worker threads for the enumeration (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tests and intervals of every method on one study.
    Analyze(AnalyzeArgs),
    /// Exact type I errors over a sweep config.
    Type1(Type1Args),
    /// Exact power of each method at one design.
    Power(PowerArgs),
    /// Farrington–Manning sample size and the exact power it achieves.
    Samplesize(SampleSizeArgs),
    /// Recompute the bundled published tables and report differences.
    Tables(TablesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum ConventionsArg {
    /// Unbiased HA variance, plain restricted score variance.
    #[default]
    Default,
    /// Variants behind the published type I error tables.
    Published,
}

impl ConventionsArg {
    fn get(self) -> Conventions {
        match self {
            ConventionsArg::Default => Conventions::default(),
            ConventionsArg::Published => Conventions::PUBLISHED_TABLES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum NuisanceArg {
    #[default]
    Reestimate,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundingArg {
    #[default]
    Ceil,
    Nearest,
}

impl From<RoundingArg> for Rounding {
    fn from(r: RoundingArg) -> Self {
        match r {
            RoundingArg::Ceil => Rounding::Ceil,
            RoundingArg::Nearest => Rounding::Nearest,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Emit a JSON document instead of text.
    #[arg(long)]
    pub json: bool,
    /// `full` prints raw proportions with 12 significant digits.
    #[arg(long, value_enum, default_value_t)]
    pub precision: Precision,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub xt: u32,
    #[arg(long)]
    pub nt: u32,
    #[arg(long)]
    pub xc: u32,
    #[arg(long)]
    pub nc: u32,
    /// Non-inferiority margin δ₀ as a proportion.
    #[arg(long)]
    pub margin: f64,
    /// Two-sided confidence level.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Comma-separated methods (default: all; ES only up to 150 per arm).
    #[arg(long)]
    pub methods: Option<String>,
    /// Allow ES when both arms exceed 150 subjects.
    #[arg(long)]
    pub allow_large_es: bool,
    #[arg(long, value_enum, default_value_t)]
    pub conventions: ConventionsArg,
    /// Nuisance handling while solving for ELS bounds.
    #[arg(long, value_enum, default_value_t)]
    pub nuisance: NuisanceArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Type1Args {
    /// Sweep config (`.csv` or `.toml`).
    pub config: PathBuf,
    /// Comma-separated methods (default: the seven tabulated methods).
    #[arg(long)]
    pub methods: Option<String>,
    #[arg(long, value_enum)]
    pub conventions: Option<ConventionsArg>,
    /// Rounding of Farrington–Manning sizes for rows without `n_test`.
    #[arg(long, value_enum)]
    pub rounding: Option<RoundingArg>,
    /// Write the CSV here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub format: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PowerArgs {
    #[arg(long)]
    pub nt: u32,
    #[arg(long)]
    pub nc: u32,
    #[arg(long)]
    pub margin: f64,
    /// True test proportion.
    #[arg(long)]
    pub pt: f64,
    /// True control proportion.
    #[arg(long)]
    pub pc: f64,
    /// One-sided test size.
    #[arg(long, default_value_t = 0.025)]
    pub alpha: f64,
    #[arg(long)]
    pub methods: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SampleSizeArgs {
    #[arg(long)]
    pub margin: f64,
    /// Allocation `N_T:N_C`.
    #[arg(long, default_value = "1:1")]
    pub ratio: String,
    #[arg(long)]
    pub pc: f64,
    /// Test proportion under the alternative (default: equal to `--pc`).
    #[arg(long)]
    pub pt: Option<f64>,
    #[arg(long, default_value_t = 0.8)]
    pub power: f64,
    /// One-sided test size.
    #[arg(long, default_value_t = 0.025)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t)]
    pub rounding: RoundingArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TablesArgs {
    /// Only rows with N_T at most this size; skips the summary statistics.
    #[arg(long)]
    pub max_n: Option<u32>,
    /// List every compared cell, not only the differences.
    #[arg(long)]
    pub verbose: bool,
    #[arg(long)]
    pub json: bool,
}

fn invalid(name: &'static str, reason: impl Into<String>) -> anyhow::Error {
    noninf::Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
    .into()
}

fn emit_json(value: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze(a) => analyze(&a),
        Command::Type1(a) => type1(&a),
        Command::Power(a) => power(&a),
        Command::Samplesize(a) => samplesize(&a),
        Command::Tables(a) => tables(&a),
    }
}

/// One analysed method with its wall-clock time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisRow {
    #[serde(flatten)]
    pub result: MethodResult,
    pub elapsed_seconds: f64,
}

fn check_counts(a: &AnalyzeArgs) -> Result<TwoArmData> {
    for (name, n) in [("nt", a.nt), ("nc", a.nc)] {
        if n == 0 {
            bail!(invalid(name, format!("--{name} must be at least 1")));
        }
    }
    for (name, x, total, n) in [("xt", a.xt, "nt", a.nt), ("xc", a.xc, "nc", a.nc)] {
        if x > n {
            bail!(invalid(name, format!("--{name} = {x} exceeds --{total} = {n}")));
        }
    }
    Ok(TwoArmData::from_counts(a.xt, a.nt, a.xc, a.nc)?)
}

fn analysis_methods(a: &AnalyzeArgs, data: &TwoArmData) -> Result<Vec<Method>> {
    let large = data.test.trials().min(data.control.trials()) > ES_MAX_N;
    match &a.methods {
        Some(list) => {
            let methods = parse_methods(list)?;
            if large && methods.contains(&Method::Es) && !a.allow_large_es {
                bail!(invalid(
                    "methods",
                    format!("ES with both arms above {ES_MAX_N} needs --allow-large-es"),
                ));
            }
            Ok(methods)
        }
        None => Ok(Method::ALL
            .into_iter()
            .filter(|&m| m != Method::Es || !large || a.allow_large_es)
            .collect()),
    }
}

fn analyze(a: &AnalyzeArgs) -> Result<u8> {
    let data = check_counts(a)?;
    let spec = NoninfSpec::new(a.margin, a.level)?;
    let methods = analysis_methods(a, &data)?;
    let opts = AnalysisOptions {
        exact: ExactOptions {
            nuisance: match a.nuisance {
                NuisanceArg::Reestimate => NuisanceMode::Reestimate,
                NuisanceArg::Fixed => NuisanceMode::Fixed,
            },
            ..ExactOptions::default()
        },
        conventions: a.conventions.get(),
    };
    let rows = methods
        .iter()
        .map(|&m| {
            let start = Instant::now();
            let result = analyze_method(&data, &spec, m, &opts)?;
            Ok(AnalysisRow {
                result,
                elapsed_seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    if a.output.json {
        emit_json(&json!({
            "schema": REPORT_SCHEMA,
            "command": "analyze",
            "data": { "x_test": a.xt, "n_test": a.nt, "x_control": a.xc, "n_control": a.nc },
            "margin": a.margin,
            "two_sided_level": a.level,
            "conventions": opts.conventions,
            "results": rows,
        }))?;
        return Ok(exit::SUCCESS);
    }

    let p = a.output.precision;
    let unit = if p == Precision::Full { "" } else { "%" };
    println!(
        "test {}/{}, control {}/{}, observed difference {}{unit}",
        a.xt,
        a.nt,
        a.xc,
        a.nc,
        p.proportion(data.observed_difference())
    );
    println!(
        "H0: P_T - P_C <= -{}{unit}, {}% two-sided intervals, one-sided alpha {:.4}",
        p.proportion(a.margin),
        100.0 * a.level,
        spec.one_sided_alpha()
    );
    println!();
    println!(
        "{:<6} {:>15} {:>15} {:>15}  {:<8} {:<10} time",
        "method", "lower", "upper", "p-value", "CI", "p-value"
    );
    for r in &rows {
        let m = r.result.method;
        let (lo, hi) = match r.result.interval {
            Some(ci) => (p.proportion(ci.lower), p.proportion(ci.upper)),
            None => ("-".into(), "-".into()),
        };
        let pv = r.result.p_value.map_or("-".into(), |v| p.p_value(v));
        let ci_decision = if m.has_interval() { r.result.decision.to_string() } else { "-".into() };
        let p_decision = r.result.p_value_decision.map_or("-".into(), |d| d.to_string());
        let time = if matches!(m, Method::Els | Method::Es) {
            format!("{:.2} s", r.elapsed_seconds)
        } else {
            String::new()
        };
        println!("{:<6} {lo:>15} {hi:>15} {pv:>15}  {ci_decision:<8} {p_decision:<10} {time}", m.label());
    }
    Ok(exit::SUCCESS)
}

/// Type I errors of a sweep: rows in config order, skipped rows by index.
#[derive(Debug, Clone)]
pub struct Type1Outcome {
    pub entries: Vec<SweepEntry>,
    pub methods: Vec<Method>,
    pub results: Vec<Option<SweepResult>>,
}

pub fn run_sweep(cfg: &SweepConfig, a: &Type1Args) -> Result<Type1Outcome> {
    let methods = match (&a.methods, &cfg.methods) {
        (Some(list), _) => parse_methods(list)?,
        (None, Some(list)) => parse_methods(&list.join(","))?,
        (None, None) => Method::OPERATING.to_vec(),
    };
    if methods.contains(&Method::Es) || methods.contains(&Method::Fm) {
        bail!(invalid("methods", "type I errors are available for Wald, AC, HA, NC, NCC, ALS and ELS"));
    }
    let conventions = match (a.conventions, cfg.conventions.as_deref()) {
        (Some(c), _) => c,
        (None, Some(name)) => ConventionsArg::from_str(name, true).map_err(|e| invalid("conventions", e))?,
        (None, None) => ConventionsArg::Default,
    };
    let rounding = match (a.rounding, cfg.rounding.as_deref()) {
        (Some(r), _) => r,
        (None, Some(name)) => RoundingArg::from_str(name, true).map_err(|e| invalid("rounding", e))?,
        (None, None) => RoundingArg::Ceil,
    };
    let resolved = cfg
        .rows
        .iter()
        .enumerate()
        .map(|(k, e)| e.resolve(rounding.into()).with_context(|| format!("config row {}", k + 1)))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<SweepRow> = resolved
        .iter()
        .filter_map(|r| match r {
            Resolved::Ready(s) => Some(SweepRow {
                scenario: *s,
                methods: methods.clone(),
            }),
            Resolved::Infeasible => None,
        })
        .collect();
    let opts = RegionOptions {
        conventions: conventions.get(),
        ..RegionOptions::default()
    };
    let mut swept = table_sweep(&rows, &opts)?.into_iter();
    let results = resolved
        .iter()
        .map(|r| match r {
            Resolved::Ready(_) => swept.next(),
            Resolved::Infeasible => None,
        })
        .collect();
    Ok(Type1Outcome {
        entries: cfg.rows.clone(),
        methods,
        results,
    })
}

impl Type1Outcome {
    pub fn csv(&self, precision: Precision) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = ["delta0", "ratio", "p_control", "n_test", "n_control"].map(String::from).to_vec();
        header.extend(self.methods.iter().map(|m| m.label().to_string()));
        w.write_record(&header)?;
        for (e, r) in self.entries.iter().zip(&self.results) {
            let Some(r) = r else { continue };
            let s = &r.scenario;
            let mut rec = vec![
                e.delta0.to_string(),
                e.ratio_label(),
                e.p_control.to_string(),
                s.n_test.to_string(),
                s.n_control.to_string(),
            ];
            rec.extend(r.type1.iter().map(|(_, v)| precision.proportion(*v)));
            w.write_record(&rec)?;
        }
        Ok(w.into_inner()?)
    }

    /// Nominal level in percent, when every row shares one.
    pub fn nominal_percent(&self) -> Option<f64> {
        let mut alphas = self.results.iter().flatten().map(|r| r.scenario.one_sided_alpha);
        let first = alphas.next()?;
        alphas.all(|a| a == first).then_some(100.0 * first)
    }

    /// Table 3 statistics per method, over the values as printed.
    pub fn summary(&self, precision: Precision) -> Option<Vec<(Method, SummaryStats)>> {
        let nominal = self.nominal_percent()?;
        let shown = |v: f64| match precision {
            Precision::Rounded => (10000.0 * v).round() / 100.0,
            Precision::Full => 100.0 * v,
        };
        self.methods
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                let col: Vec<f64> = self.results.iter().flatten().map(|r| shown(r.type1[k].1)).collect();
                summarize(&col, nominal).map(|s| (m, s))
            })
            .collect()
    }

    pub fn skipped(&self) -> Vec<usize> {
        self.results
            .iter()
            .enumerate()
            .filter_map(|(k, r)| r.is_none().then_some(k + 1))
            .collect()
    }
}

fn summary_block(stats: &[(Method, SummaryStats)], nominal: f64, precision: Precision) -> String {
    let mut s = format!("summary over {} rows, nominal {nominal:.2}%\n", stats.first().map_or(0, |x| x.1.count));
    s.push_str(&format!("{:<24}", "statistic"));
    for (m, _) in stats {
        s.push_str(&format!("{:>9}", m.label()));
    }
    s.push('\n');
    for (row, name) in TABLE3_ROWS.iter().enumerate() {
        s.push_str(&format!("{name:<24}"));
        for (_, st) in stats {
            let cell = match reproduce::summary_statistic(st, row) {
                None => "--".to_string(),
                Some(v) if precision == Precision::Full => crate::format::significant(v),
                Some(v) if row == 1 => format!("{v:.3}"),
                Some(v) => format!("{v:.2}"),
            };
            s.push_str(&format!("{cell:>9}"));
        }
        s.push('\n');
    }
    s
}

fn type1(a: &Type1Args) -> Result<u8> {
    let cfg = SweepConfig::load(&a.config)?;
    let outcome = run_sweep(&cfg, a)?;
    let precision = a.format.precision;
    let skipped = outcome.skipped();
    for k in &skipped {
        let e = &outcome.entries[k - 1];
        eprintln!(
            "warning: row {k} (delta0={}, ratio={}, p_control={}) skipped: P_C < delta0 leaves no null test proportion",
            e.delta0,
            e.ratio_label(),
            e.p_control
        );
    }
    let summary = outcome.summary(precision);
    let code = if skipped.is_empty() { exit::SUCCESS } else { exit::VALIDATION };

    if a.format.json {
        let rows: Vec<_> = outcome
            .entries
            .iter()
            .zip(&outcome.results)
            .map(|(e, r)| {
                json!({
                    "config": e,
                    "skipped": r.is_none(),
                    "scenario": r.as_ref().map(|r| r.scenario),
                    "type1": r.as_ref().map(|r| r.type1.iter().map(|(m, v)| json!({"method": m, "value": v})).collect::<Vec<_>>()),
                })
            })
            .collect();
        let doc = json!({
            "schema": REPORT_SCHEMA,
            "command": "type1",
            "methods": outcome.methods,
            "rows": rows,
            "nominal_percent": outcome.nominal_percent(),
            "summary": summary.as_ref().map(|s| s.iter().map(|(m, st)| json!({"method": m, "stats": st})).collect::<Vec<_>>()),
        });
        match &a.output {
            Some(path) => fs::write(path, serde_json::to_vec_pretty(&doc)?)?,
            None => emit_json(&doc)?,
        }
        return Ok(code);
    }

    let csv = outcome.csv(precision)?;
    let block = match (&summary, outcome.nominal_percent()) {
        (Some(s), Some(nominal)) => summary_block(s, nominal, precision),
        _ => "no summary: rows differ in alpha or none were evaluated\n".into(),
    };
    match &a.output {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("cannot write {}", path.display()))?;
            print!("{block}");
        }
        None => {
            std::io::stdout().write_all(&csv)?;
            eprint!("{block}");
        }
    }
    Ok(code)
}

fn power(a: &PowerArgs) -> Result<u8> {
    let shape = Shape::new(a.nt, a.nc)?;
    let methods = match &a.methods {
        Some(list) => parse_methods(list)?,
        None => Method::OPERATING.to_vec(),
    };
    if methods.contains(&Method::Es) || methods.contains(&Method::Fm) {
        bail!(invalid("methods", "exact power is available for Wald, AC, HA, NC, NCC, ALS and ELS"));
    }
    let values = methods
        .iter()
        .map(|&m| Ok((m, exact_power(m, shape, a.margin, a.alpha, a.pt, a.pc)?)))
        .collect::<Result<Vec<_>>>()?;
    let under_null = a.pt - a.pc <= -a.margin * (1.0 - 1e-9);
    if a.output.json {
        emit_json(&json!({
            "schema": REPORT_SCHEMA,
            "command": "power",
            "n_test": a.nt, "n_control": a.nc, "margin": a.margin,
            "p_test": a.pt, "p_control": a.pc, "one_sided_alpha": a.alpha,
            "under_null": under_null,
            "power": values.iter().map(|(m, v)| json!({"method": m, "value": v})).collect::<Vec<_>>(),
        }))?;
        return Ok(exit::SUCCESS);
    }
    if under_null {
        eprintln!("note: P_T - P_C lies in the null; the values are rejection rates, not power");
    }
    println!("N_T={} N_C={} P_T={} P_C={} delta0={} alpha={}", a.nt, a.nc, a.pt, a.pc, a.margin, a.alpha);
    for (m, v) in values {
        println!("{:<6} {:>15}", m.label(), a.output.precision.proportion(v));
    }
    Ok(exit::SUCCESS)
}

fn parse_ratio(s: &str) -> Result<(u32, u32)> {
    let bad = || invalid("ratio", format!("`{s}` is not of the form a:b with positive integers"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || b == 0 {
        return Err(bad());
    }
    Ok((a, b))
}

fn samplesize(a: &SampleSizeArgs) -> Result<u8> {
    let (ratio_test, ratio_control) = parse_ratio(&a.ratio)?;
    let p_test = a.pt.unwrap_or(a.pc);
    let spec = SampleSizeSpec {
        margin: a.margin,
        ratio_test,
        ratio_control,
        p_control: a.pc,
        p_test,
        power: a.power,
        one_sided_alpha: a.alpha,
    };
    let n = fm_sample_size_with(&spec, a.rounding.into())?;
    let shape = Shape::new(n.n_test, n.n_control)?;
    let achieved = [Method::Als, Method::Els]
        .iter()
        .map(|&m| Ok((m, exact_power(m, shape, a.margin, a.alpha, p_test, a.pc)?)))
        .collect::<Result<Vec<_>>>()?;
    if a.output.json {
        emit_json(&json!({
            "schema": REPORT_SCHEMA,
            "command": "samplesize",
            "spec": spec,
            "rounding": a.rounding,
            "n_test": n.n_test, "n_control": n.n_control, "raw_n_test": n.raw_n_test,
            "exact_power": achieved.iter().map(|(m, v)| json!({"method": m, "value": v})).collect::<Vec<_>>(),
        }))?;
        return Ok(exit::SUCCESS);
    }
    println!("N_T = {}  N_C = {}  (unrounded N_T {:.3})", n.n_test, n.n_control, n.raw_n_test);
    for (m, v) in achieved {
        println!("exact {} power {}", m.label(), a.output.precision.proportion(v));
    }
    Ok(exit::SUCCESS)
}

fn print_cells(title: &str, cells: &[Cell], verbose: bool) -> usize {
    let failed = cells.iter().filter(|c| !c.ok()).count();
    println!("{title}: {} cells, {failed} outside tolerance", cells.len());
    for c in cells.iter().filter(|c| verbose || !c.ok()) {
        println!(
            "  {} {:<48} computed {:>10.4} printed {:>8} (tolerance {})",
            if c.ok() { "ok  " } else { "DIFF" },
            c.label,
            c.computed,
            c.printed,
            c.tolerance
        );
    }
    failed
}

fn tables(a: &TablesArgs) -> Result<u8> {
    let t4 = reproduce::table4()?;
    let printed = reproduce::printed_tables(a.max_n)?;
    let failed = t4.iter().chain(&printed.cells).chain(printed.summary.iter().flatten()).filter(|c| !c.ok()).count();
    let code = if failed == 0 { exit::SUCCESS } else { exit::REPRODUCTION };
    if a.json {
        emit_json(&json!({
            "schema": REPORT_SCHEMA,
            "command": "tables",
            "table4": t4,
            "tables12": printed.cells,
            "excluded": printed.excluded,
            "table3": printed.summary,
            "table3_other": printed.summary_other,
            "failed": failed,
        }))?;
        return Ok(code);
    }
    print_cells("Table 4", &t4, a.verbose);
    print_cells("Tables 1-2", &printed.cells, a.verbose);
    for e in &printed.excluded {
        println!("  excluded {e}");
    }
    if let Some(s) = &printed.summary {
        print_cells("Table 3 (ALS, ELS)", s, a.verbose);
    }
    if let Some(s) = &printed.summary_other {
        let off = s.iter().filter(|c| !c.ok()).count();
        println!("Table 3 (other statistics, not compared): {} cells, {off} differ by more than {}", s.len(), reproduce::SUMMARY_TOL);
    }
    println!("{}", if failed == 0 { "all compared cells reproduced" } else { "reproduction differences found" });
    Ok(code)
}
