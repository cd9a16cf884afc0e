//! Type I error over many scenarios and the summary statistics of a sweep.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exact::GridCache;
use crate::intervals::Method;
use crate::oc::{exact_type1_with, OcScenario, RegionOptions};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scenario: OcScenario,
    pub methods: Vec<Method>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub scenario: OcScenario,
    /// Type I error per requested method, in request order.
    pub type1: Vec<(Method, f64)>,
}

impl SweepResult {
    pub fn get(&self, method: Method) -> Option<f64> {
        self.type1.iter().find(|(m, _)| *m == method).map(|(_, v)| *v)
    }
}

/// Type I errors of every row; rows are evaluated in parallel and returned in
/// input order.
pub fn table_sweep(rows: &[SweepRow], opts: &RegionOptions) -> Result<Vec<SweepResult>> {
    par::map_slice(rows, |row| {
        // ALS and ELS share one score grid per row.
        let cache = GridCache::new();
        let type1 = row
            .methods
            .iter()
            .map(|&m| Ok((m, exact_type1_with(m, &row.scenario, opts, Some(&cache))?.type1_error)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepResult {
            scenario: row.scenario,
            type1,
        })
    })
    .into_iter()
    .collect()
}

/// Distribution of a set of type I errors around a nominal level, all in the
/// same units (the tables use percent).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub count: usize,
    /// Percentage of entries above the nominal level.
    pub percent_above: f64,
    /// Mean of `|entry − nominal|`.
    pub mean_distance: f64,
    pub min: f64,
    pub max: f64,
    pub range: f64,
    pub mean_at_or_below: Option<f64>,
    pub mean_above: Option<f64>,
}

pub fn summarize(values: &[f64], nominal: f64) -> Option<SummaryStats> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    let (above, below): (Vec<f64>, Vec<f64>) = values.iter().partition(|&&v| v > nominal);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(SummaryStats {
        count: values.len(),
        percent_above: 100.0 * above.len() as f64 / n,
        mean_distance: values.iter().map(|v| (v - nominal).abs()).sum::<f64>() / n,
        min,
        max,
        range: max - min,
        mean_at_or_below: mean(&below),
        mean_above: mean(&above),
    })
}
