//! Exact likelihood score (ELS) and exact score (ES) p-values, and the ELS
//! test-based confidence interval.

pub mod grid;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foundation::pmf::{ArmDistribution, Pruning};
use crate::foundation::types::{DifferenceConstraint, Shape, TwoArmData};
use crate::foundation::{normal, restricted_mle};
use crate::intervals::{als_ci_with_z, margin_constraint, ConfidenceInterval, ScoreVariance};
use crate::par;

pub use grid::{GridCache, RowSet, TableGrid, TableSet, Tail, TIE_TOLERANCE};

/// How the nuisance proportion is chosen while solving for an ELS bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NuisanceMode {
    /// Restricted MLE of the observed table at each candidate δ.
    #[default]
    Reestimate,
    /// `P̃_T` frozen at its value at the asymptotic bound; `P_C = P̃_T − δ`.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactOptions {
    pub pruning: Pruning,
    pub nuisance: NuisanceMode,
    /// Number of equal subintervals of the nuisance domain searched by ES.
    pub es_subintervals: usize,
    /// Bisection tolerance in δ for ELS bounds.
    pub ci_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            pruning: Pruning::default(),
            nuisance: NuisanceMode::default(),
            es_subintervals: 1000,
            ci_tolerance: 1e-10,
            max_iterations: 200,
        }
    }
}

/// Distributions of both arms, each given half of the pruning budget.
pub(crate) fn arm_distributions(shape: Shape, p_test: f64, p_control: f64, pruning: Pruning) -> (ArmDistribution, ArmDistribution) {
    let budget = match pruning {
        Pruning::Off => None,
        Pruning::Certified { budget } => Some(budget / 2.0),
    };
    (
        ArmDistribution::new(shape.n_test, p_test, budget),
        ArmDistribution::new(shape.n_control, p_control, budget),
    )
}

/// ELS tail probability of table `(i, j)` on a precomputed grid: the mass of
/// the tail through `z(i, j)` under the table's own restricted MLE.
pub fn els_tail_on_grid(grid: &TableGrid, i: u32, j: u32, tail: Tail, pruning: Pruning) -> f64 {
    let (pt, pc) = grid.mle(i, j);
    let (t, c) = arm_distributions(grid.shape(), pt, pc, pruning);
    let thr = tail.threshold(grid.z(i, j));
    grid.tail_mass(tail, thr, &t, &c).min(1.0)
}

/// ELS p-value for `H0: P_T − P_C ≤ −δ₀`.
pub fn els_pvalue(data: &TwoArmData, margin: f64) -> Result<f64> {
    els_pvalue_with(data, margin, &ExactOptions::default())
}

pub fn els_pvalue_with(data: &TwoArmData, margin: f64, opts: &ExactOptions) -> Result<f64> {
    Ok(els_tail(data, margin_constraint(margin)?, Tail::Upper, opts))
}

/// ELS tail probability at an arbitrary constraint. `Tail::Upper` gives the
/// p-value against alternatives with a larger difference, `Tail::Lower`
/// against a smaller one.
pub fn els_tail(data: &TwoArmData, constraint: DifferenceConstraint, tail: Tail, opts: &ExactOptions) -> f64 {
    let grid = TableGrid::new(data.shape(), constraint);
    els_tail_on_grid(&grid, data.test.successes(), data.control.successes(), tail, opts.pruning)
}

/// ES p-value: the tail probability maximised over the nuisance domain.
pub fn es_pvalue(data: &TwoArmData, margin: f64) -> Result<f64> {
    es_pvalue_with(data, margin, &ExactOptions::default())
}

pub fn es_pvalue_with(data: &TwoArmData, margin: f64, opts: &ExactOptions) -> Result<f64> {
    let constraint = margin_constraint(margin)?;
    if opts.es_subintervals == 0 {
        return Err(Error::invalid("es_subintervals", "must be at least 1"));
    }
    let grid = TableGrid::new(data.shape(), constraint);
    let (i, j) = (data.test.successes(), data.control.successes());
    let thr = Tail::Upper.threshold(grid.z(i, j));
    let top = 1.0 - margin;
    let k = opts.es_subintervals;
    let mut points: Vec<f64> = (0..=k).map(|m| top * m as f64 / k as f64).collect();
    points.push(grid.mle(i, j).0);
    let tails = par::map_slice(&points, |&p| {
        let (t, c) = arm_distributions(grid.shape(), p, (p + margin).min(1.0), opts.pruning);
        grid.tail_mass(Tail::Upper, thr, &t, &c)
    });
    Ok(tails.into_iter().fold(0.0, f64::max).min(1.0))
}

/// Rejection sets of the ELS interval, fixed at the asymptotic score bounds.
#[derive(Debug, Clone)]
pub struct ExactCiState {
    pub als_lower: f64,
    pub als_upper: f64,
    /// `{z(·; δ_LSC) ≥ z_obs(δ_LSC)}`
    pub lower_rejection_set: TableSet,
    /// `{z(·; δ_USC) ≤ z_obs(δ_USC)}`
    pub upper_rejection_set: TableSet,
}

const DELTA_LIMIT: f64 = 1.0 - 1e-9;

fn interior(delta: f64) -> DifferenceConstraint {
    DifferenceConstraint::new(delta.clamp(-DELTA_LIMIT, DELTA_LIMIT)).expect("clamped into (-1, 1)")
}

impl ExactCiState {
    pub fn new(data: &TwoArmData, level: f64) -> Result<Self> {
        let z = normal::two_sided_critical(level)?;
        let als = als_ci_with_z(data, z, level, ScoreVariance::Restricted);
        let (i, j) = (data.test.successes(), data.control.successes());
        let set = |delta: f64, tail: Tail| {
            let grid = TableGrid::new(data.shape(), interior(delta));
            grid.tail_set(tail, tail.threshold(grid.z(i, j)))
        };
        Ok(Self {
            als_lower: als.lower,
            als_upper: als.upper,
            lower_rejection_set: set(als.lower, Tail::Upper),
            upper_rejection_set: set(als.upper, Tail::Lower),
        })
    }
}

/// ELS interval with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElsInterval {
    pub interval: ConfidenceInterval,
    pub als: ConfidenceInterval,
    /// No solution of `g_L = α/2` in (−1, 1); the lower bound is −1.
    pub lower_degenerate: bool,
    /// No solution of `g_U = α/2` in (−1, 1); the upper bound is 1.
    pub upper_degenerate: bool,
}

/// ELS test-based confidence interval.
pub fn els_confidence_interval(data: &TwoArmData, level: f64) -> Result<ConfidenceInterval> {
    Ok(els_confidence_interval_with(data, level, &ExactOptions::default())?.interval)
}

pub fn els_confidence_interval_with(data: &TwoArmData, level: f64, opts: &ExactOptions) -> Result<ElsInterval> {
    let state = ExactCiState::new(data, level)?;
    els_interval_from_state(data, level, &state, opts)
}

/// Probability of `set` at the nuisance implied by δ.
pub fn g_function(data: &TwoArmData, set: &TableSet, seed: f64, delta: f64, opts: &ExactOptions) -> f64 {
    let c = interior(delta);
    let (pt, pc) = match opts.nuisance {
        NuisanceMode::Reestimate => {
            let m = restricted_mle(data, c);
            (m.p_test, m.p_control)
        }
        NuisanceMode::Fixed => {
            let pt = restricted_mle(data, interior(seed)).p_test;
            (pt, (pt - c.delta()).clamp(0.0, 1.0))
        }
    };
    let (t, cd) = arm_distributions(data.shape(), pt, pc, opts.pruning);
    set.mass(&t, &cd)
}

pub fn els_interval_from_state(
    data: &TwoArmData,
    level: f64,
    state: &ExactCiState,
    opts: &ExactOptions,
) -> Result<ElsInterval> {
    let half_alpha = (1.0 - level) / 2.0;
    let lower = solve_bound(
        |d| g_function(data, &state.lower_rejection_set, state.als_lower, d, opts) - half_alpha,
        state.als_lower,
        opts,
    )?;
    let upper = solve_bound(
        |d| g_function(data, &state.upper_rejection_set, state.als_upper, d, opts) - half_alpha,
        state.als_upper,
        opts,
    )?;
    let (lo, hi) = (lower.unwrap_or(-1.0), upper.unwrap_or(1.0));
    Ok(ElsInterval {
        interval: ConfidenceInterval {
            lower: lo.min(hi),
            upper: hi.max(lo),
            two_sided_level: level,
        },
        als: ConfidenceInterval {
            lower: state.als_lower,
            upper: state.als_upper,
            two_sided_level: level,
        },
        lower_degenerate: lower.is_none(),
        upper_degenerate: upper.is_none(),
    })
}

/// Root of `h` nearest to `seed`, or `None` when `h` keeps one sign on (−1, 1).
fn solve_bound(h: impl Fn(f64) -> f64, seed: f64, opts: &ExactOptions) -> Result<Option<f64>> {
    let seed = seed.clamp(-DELTA_LIMIT, DELTA_LIMIT);
    let h0 = h(seed);
    if h0 == 0.0 {
        return Ok(Some(seed));
    }
    let (mut left, mut hl) = (seed, h0);
    let (mut right, mut hr) = (seed, h0);
    let mut width = 1e-4;
    let mut brackets = Vec::with_capacity(2);
    while brackets.is_empty() {
        let a = (seed - width).max(-DELTA_LIMIT);
        let b = (seed + width).min(DELTA_LIMIT);
        if a < left {
            let ha = h(a);
            if ha.signum() != hl.signum() || ha == 0.0 {
                brackets.push((a, left, ha));
            }
            left = a;
            hl = ha;
        }
        if b > right {
            let hb = h(b);
            if hb.signum() != hr.signum() || hb == 0.0 {
                brackets.push((right, b, hr));
            }
            right = b;
            hr = hb;
        }
        if brackets.is_empty() && a <= -DELTA_LIMIT && b >= DELTA_LIMIT {
            return Ok(None);
        }
        width *= 2.0;
    }
    let mut best: Option<f64> = None;
    for (a, b, ha) in brackets {
        let root = bisect(&h, a, b, ha, opts)?;
        best = match best {
            Some(r) if (r - seed).abs() <= (root - seed).abs() => Some(r),
            _ => Some(root),
        };
    }
    Ok(best)
}

fn bisect(h: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, ha: f64, opts: &ExactOptions) -> Result<f64> {
    if ha == 0.0 {
        return Ok(a);
    }
    let sa = ha.signum();
    for _ in 0..opts.max_iterations {
        let mid = 0.5 * (a + b);
        if b - a <= opts.ci_tolerance || mid == a || mid == b {
            return Ok(mid);
        }
        let hm = h(mid);
        if hm == 0.0 {
            return Ok(mid);
        }
        if hm.signum() == sa {
            a = mid;
        } else {
            b = mid;
        }
    }
    Err(Error::NoConvergence {
        what: "ELS bound bisection",
        iterations: opts.max_iterations,
    })
}
