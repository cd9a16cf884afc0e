//! Recomputes the bundled published tables and compares cell by cell.

use std::collections::HashMap;

use anyhow::Result;
use serde::Serialize;

use noninf::analysis::{analyze, AnalysisOptions};
use noninf::oc::{summarize, table_sweep, OcScenario, RegionOptions, SummaryStats, SweepRow};
use noninf::reference::{self, PrintedRow, RowStatus, NOMINAL_PERCENT, TABLE3, TABLE3_ROWS, TABLE_METHODS};
use noninf::{Method, NoninfSpec, TwoArmData};

/// Tolerance for interval bounds and type I errors, in percentage points.
pub const PERCENT_TOL: f64 = 0.01;
/// Tolerance for four-decimal p-values.
pub const P_VALUE_TOL: f64 = 0.00005;
/// Tolerance for the ALS/ELS summary statistics.
pub const SUMMARY_TOL: f64 = 0.02;
/// Slack for printed decimals that are not exact in binary.
const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub label: String,
    pub computed: f64,
    pub printed: f64,
    pub tolerance: f64,
}

impl Cell {
    fn new(label: String, computed: f64, printed: f64, tolerance: f64) -> Self {
        Self {
            label,
            computed,
            printed,
            tolerance,
        }
    }

    pub fn ok(&self) -> bool {
        (self.computed - self.printed).abs() <= self.tolerance + SLACK
    }
}

pub fn table4() -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    for (k, ex) in reference::TABLE4.iter().enumerate() {
        let (xt, nt, xc, nc) = ex.counts;
        let data = TwoArmData::from_counts(xt, nt, xc, nc)?;
        let spec = NoninfSpec::new(ex.margin, 0.95)?;
        let methods: Vec<Method> = ex.intervals.iter().map(|i| i.0).collect();
        let results = analyze(&data, &spec, &methods, &AnalysisOptions::default())?;
        for ((m, lo, hi), r) in ex.intervals.iter().zip(&results) {
            let ci = r.interval.expect("tabulated methods have intervals");
            cells.push(Cell::new(format!("T4 ex{} {m} lower", k + 1), 100.0 * ci.lower, *lo, PERCENT_TOL));
            cells.push(Cell::new(format!("T4 ex{} {m} upper", k + 1), 100.0 * ci.upper, *hi, PERCENT_TOL));
            let printed_p = match m {
                Method::Als => Some(ex.als_p),
                Method::Els => Some(ex.els_p),
                _ => None,
            };
            if let (Some(p), Some(printed)) = (r.p_value, printed_p) {
                cells.push(Cell::new(format!("T4 ex{} {m} p", k + 1), p, printed, P_VALUE_TOL));
            }
        }
    }
    Ok(cells)
}

fn row_label(r: &PrintedRow) -> String {
    format!(
        "T{} d0={:.2} {}:{} Pc={:.2} Nt={}",
        r.table, r.margin, r.ratio.0, r.ratio.1, r.p_control, r.n_test
    )
}

fn key(s: &OcScenario) -> (u32, u32, u64, u64) {
    (s.n_test, s.n_control, s.margin.to_bits(), s.p_control.to_bits())
}

#[derive(Debug, Clone, Serialize)]
pub struct PrintedTables {
    /// Cells of the rows whose labels describe them.
    pub cells: Vec<Cell>,
    /// Rows left out of the comparison and why.
    pub excluded: Vec<String>,
    /// ALS/ELS summary statistics (`None` when rows were filtered by size).
    pub summary: Option<Vec<Cell>>,
    /// The remaining summary statistics, for information.
    pub summary_other: Option<Vec<Cell>>,
}

/// Type I errors in percent of every scenario behind Tables 1–3, under the
/// conventions of the published tables.
fn sweep(scenarios: &[OcScenario]) -> Result<HashMap<(u32, u32, u64, u64), Vec<f64>>> {
    let rows: Vec<SweepRow> = scenarios
        .iter()
        .map(|&scenario| SweepRow {
            scenario,
            methods: TABLE_METHODS.to_vec(),
        })
        .collect();
    let results = table_sweep(&rows, &RegionOptions::published_tables())?;
    Ok(results
        .iter()
        .map(|r| (key(&r.scenario), r.type1.iter().map(|(_, v)| 100.0 * v).collect()))
        .collect())
}

/// Compares the printed rows with `N_T ≤ max_n` (all rows when `None`).
pub fn printed_tables(max_n: Option<u32>) -> Result<PrintedTables> {
    let selected: Vec<&PrintedRow> = reference::printed_rows()
        .filter(|r| max_n.map_or(true, |n| r.n_test <= n))
        .collect();
    let full = max_n.is_none();
    let mut scenarios: Vec<OcScenario> = selected.iter().map(|r| r.scenario()).collect();
    if full {
        scenarios.extend(
            reference::summary_scenarios()
                .iter()
                .map(|(_, d, n)| reference::scenario(d, *n)),
        );
    }
    scenarios.sort_by_key(key);
    scenarios.dedup_by_key(|s| key(s));
    let values = sweep(&scenarios)?;

    let mut cells = Vec::new();
    let mut excluded = Vec::new();
    for r in &selected {
        if !r.is_as_labelled() {
            let why = match r.status {
                RowStatus::Moved(_) => "values belong to another design",
                RowStatus::Copy(_) => "copy of another printed row",
                RowStatus::Repeats(_) => "repeats another row's values",
                RowStatus::AsLabelled => unreachable!(),
            };
            excluded.push(format!("{}: {why}", row_label(r)));
            continue;
        }
        let v = &values[&key(&r.scenario())];
        for (k, m) in TABLE_METHODS.iter().enumerate() {
            cells.push(Cell::new(format!("{} {m}", row_label(r)), v[k], r.percent[k], PERCENT_TOL));
        }
    }

    let (summary, summary_other) = if full {
        let (a, b) = summary_cells(&values)?;
        (Some(a), Some(b))
    } else {
        (None, None)
    };
    Ok(PrintedTables {
        cells,
        excluded,
        summary,
        summary_other,
    })
}

/// Table 3 statistics recomputed from values rounded to two decimals.
pub fn recomputed_summary(values_percent: &[Vec<f64>]) -> Vec<SummaryStats> {
    (0..TABLE_METHODS.len())
        .map(|k| {
            let col: Vec<f64> = values_percent.iter().map(|v| (v[k] * 100.0).round() / 100.0).collect();
            summarize(&col, NOMINAL_PERCENT).expect("at least one scenario")
        })
        .collect()
}

pub fn summary_statistic(s: &SummaryStats, row: usize) -> Option<f64> {
    match row {
        0 => Some(s.percent_above),
        1 => Some(s.mean_distance),
        2 => Some(s.range),
        3 => Some(s.min),
        4 => Some(s.max),
        5 => s.mean_at_or_below,
        6 => s.mean_above,
        _ => None,
    }
}

/// Rows of Table 3 that are compared for ALS and ELS.
pub const CHECKED_SUMMARY_ROWS: [usize; 4] = [0, 1, 3, 4];

fn summary_cells(values: &HashMap<(u32, u32, u64, u64), Vec<f64>>) -> Result<(Vec<Cell>, Vec<Cell>)> {
    let per_scenario: Vec<Vec<f64>> = reference::summary_scenarios()
        .iter()
        .map(|(_, d, n)| values[&key(&reference::scenario(d, *n))].clone())
        .collect();
    let stats = recomputed_summary(&per_scenario);
    let (mut checked, mut other) = (Vec::new(), Vec::new());
    for (k, m) in TABLE_METHODS.iter().enumerate() {
        for (row, name) in TABLE3_ROWS.iter().enumerate() {
            let (Some(computed), Some(printed)) = (summary_statistic(&stats[k], row), TABLE3[row][k]) else {
                continue;
            };
            // Percentages above nominal are printed as whole numbers.
            let computed = if row == 0 { computed.round() } else { computed };
            let cell = Cell::new(format!("T3 {m} {name}"), computed, printed, SUMMARY_TOL);
            if matches!(m, Method::Als | Method::Els) && CHECKED_SUMMARY_ROWS.contains(&row) {
                checked.push(cell);
            } else {
                other.push(cell);
            }
        }
    }
    Ok((checked, other))
}
