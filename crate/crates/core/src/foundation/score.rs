use crate::foundation::mle::{constrained_pair, ArmWeights};
use crate::foundation::types::{DifferenceConstraint, ScoreResult, TwoArmData};

/// Score statistic `(P̂_T − P̂_C − Δ) / √ṽ` with ṽ evaluated at the restricted MLE.
///
/// For the non-inferiority null use `Δ = −δ₀`.
pub fn score_statistic(data: &TwoArmData, constraint: DifferenceConstraint) -> ScoreResult {
    score_from_counts(
        data.test.successes(),
        data.test.trials(),
        data.control.successes(),
        data.control.trials(),
        constraint.delta(),
    )
}

/// Score statistic from raw counts; also returns the restricted MLE of P_T.
#[inline]
pub(crate) fn score_with_mle(x_t: u32, n_t: u32, x_c: u32, n_c: u32, delta: f64) -> (ScoreResult, f64) {
    let w = ArmWeights::from_counts(x_t, n_t, x_c, n_c);
    let (pt, pc) = constrained_pair(&w, delta);
    let (nt, nc) = (f64::from(n_t), f64::from(n_c));
    let numerator = f64::from(x_t) / nt - f64::from(x_c) / nc - delta;
    let variance = pt * (1.0 - pt) / nt + pc * (1.0 - pc) / nc;
    (
        ScoreResult {
            z: standardize(numerator, variance),
            numerator,
            variance,
        },
        pt,
    )
}

#[inline]
pub(crate) fn score_from_counts(x_t: u32, n_t: u32, x_c: u32, n_c: u32, delta: f64) -> ScoreResult {
    score_with_mle(x_t, n_t, x_c, n_c, delta).0
}

/// `numerator / √variance`, with ±∞ or 0 when the variance vanishes.
#[inline]
pub(crate) fn standardize(numerator: f64, variance: f64) -> f64 {
    if variance > 0.0 {
        numerator / variance.sqrt()
    } else if numerator > 0.0 {
        f64::INFINITY
    } else if numerator < 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    }
}
