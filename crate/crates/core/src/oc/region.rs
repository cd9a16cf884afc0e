//! Rejection regions of level-α/2 non-inferiority tests over the sample space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{els_tail_on_grid, ExactOptions, GridCache, RowSet, TableGrid, TableSet, Tail};
use crate::foundation::normal;
use crate::foundation::types::{Shape, TwoArmData};
use crate::intervals::{asymptotic_ci_with, margin_constraint, Conventions, Method};
use crate::par;

/// How ELS rows are searched for their rejection boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ElsSearch {
    /// Binary search for the boundary in each row, checked on a sample of
    /// off-boundary tables; a row that fails the check is evaluated in full.
    #[default]
    Boundary,
    /// Evaluate the p-value of every table.
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionOptions {
    pub exact: ExactOptions,
    pub conventions: Conventions,
    pub els_search: ElsSearch,
}

impl Default for RegionOptions {
    fn default() -> Self {
        Self {
            exact: ExactOptions::default(),
            conventions: Conventions::default(),
            els_search: ElsSearch::default(),
        }
    }
}

impl RegionOptions {
    /// Options reproducing the published type I error tables.
    pub fn published_tables() -> Self {
        Self {
            conventions: Conventions::PUBLISHED_TABLES,
            ..Self::default()
        }
    }
}

/// Tables for which a method rejects `H0: P_T − P_C ≤ −δ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionRegion {
    pub method: Method,
    pub margin: f64,
    pub one_sided_alpha: f64,
    pub members: TableSet,
    /// ELS rows whose boundary search was replaced by full evaluation.
    pub exhaustive_rows: usize,
}

impl RejectionRegion {
    pub fn shape(&self) -> Shape {
        self.members.shape()
    }

    pub fn contains(&self, i: u32, j: u32) -> bool {
        self.members.contains(i, j)
    }
}

pub fn rejection_region(method: Method, shape: Shape, margin: f64, one_sided_alpha: f64) -> Result<RejectionRegion> {
    rejection_region_with(method, shape, margin, one_sided_alpha, &RegionOptions::default(), None)
}

/// Rejection region with explicit options; `cache` shares score grids between
/// calls on the same shape and margin.
pub fn rejection_region_with(
    method: Method,
    shape: Shape,
    margin: f64,
    one_sided_alpha: f64,
    opts: &RegionOptions,
    cache: Option<&GridCache>,
) -> Result<RejectionRegion> {
    let constraint = margin_constraint(margin)?;
    if !(0.0..0.5).contains(&one_sided_alpha) {
        return Err(Error::invalid(
            "alpha",
            format!("one-sided level {one_sided_alpha} is outside [0, 0.5)"),
        ));
    }
    let region = |members, exhaustive_rows| RejectionRegion {
        method,
        margin,
        one_sided_alpha,
        members,
        exhaustive_rows,
    };
    if one_sided_alpha == 0.0 {
        return Ok(region(TableSet::empty(shape), 0));
    }
    let level = 1.0 - 2.0 * one_sided_alpha;
    let grid = || match cache {
        Some(c) => c.get_or_build(shape, constraint),
        None => std::sync::Arc::new(TableGrid::new(shape, constraint)),
    };
    match method {
        Method::Als => {
            let scale = opts.conventions.score_variance.z_scale(shape.n_test, shape.n_control);
            let z = normal::two_sided_critical(level)? / scale;
            Ok(region(grid().tail_set(Tail::Upper, z), 0))
        }
        Method::Els => {
            let g = grid();
            let (set, n) = els_region(&g, one_sided_alpha, opts);
            Ok(region(set, n))
        }
        Method::Es => Err(Error::invalid(
            "method",
            "operating characteristics are not computed for ES",
        )),
        _ => {
            // Validate once so the per-table closures cannot fail.
            normal::two_sided_critical(level)?;
            let rows = par::map_indices(shape.rows(), |i| {
                RowSet::from_flags((0..=shape.n_control).map(|j| {
                    let d = TwoArmData::from_counts(i as u32, shape.n_test, j, shape.n_control)
                        .expect("table inside the sample space");
                    let ci = asymptotic_ci_with(method, &d, level, margin, &opts.conventions).expect("level validated");
                    ci.lower > -margin
                }))
            });
            Ok(region(TableSet::from_rows(shape, rows), 0))
        }
    }
}

fn els_region(grid: &TableGrid, half_alpha: f64, opts: &RegionOptions) -> (TableSet, usize) {
    let shape = grid.shape();
    let nc = shape.n_control;
    let pruning = opts.exact.pruning;
    let rows = par::map_indices(shape.rows(), |i| {
        let i = i as u32;
        let reject = |j: u32| els_tail_on_grid(grid, i, j, Tail::Upper, pruning) <= half_alpha;
        let full = || RowSet::from_flags((0..=nc).map(reject));
        if opts.els_search == ElsSearch::Exhaustive {
            return (full(), true);
        }
        // First j that does not reject, assuming the rejecting tables form a prefix.
        let (mut lo, mut hi) = (0u32, nc + 1);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if reject(mid) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let k = lo;
        if verification_points(k, nc).all(|j| reject(j) == (j < k)) {
            (RowSet::prefix(k), false)
        } else {
            (full(), true)
        }
    });
    let exhaustive = rows.iter().filter(|(_, f)| *f).count();
    (TableSet::from_rows(shape, rows.into_iter().map(|(r, _)| r).collect()), exhaustive)
}

/// Tables near the boundary `k` plus an even spread over the row.
fn verification_points(k: u32, nc: u32) -> impl Iterator<Item = u32> {
    const NEAR: u32 = 3;
    const SPREAD: u32 = 8;
    let near = k.saturating_sub(NEAR)..(k + NEAR).min(nc + 1);
    let spread = (0..=SPREAD).map(move |s| s * nc / SPREAD);
    near.chain(spread)
}
