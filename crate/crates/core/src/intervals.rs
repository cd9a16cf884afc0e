//! Asymptotic confidence intervals for P_T − P_C and the asymptotic score test.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foundation::normal;
use crate::foundation::score::score_from_counts;
use crate::foundation::types::{BinomialArm, DifferenceConstraint, TwoArmData};
use crate::foundation::{restricted_mle, score_statistic};

/// Inference methods known to the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    Wald,
    #[serde(rename = "AC")]
    AgrestiCaffo,
    #[serde(rename = "HA")]
    HauckAnderson,
    #[serde(rename = "NC")]
    Newcombe,
    #[serde(rename = "NCC")]
    NewcombeCc,
    #[serde(rename = "ALS")]
    Als,
    #[serde(rename = "FM")]
    Fm,
    #[serde(rename = "ELS")]
    Els,
    #[serde(rename = "ES")]
    Es,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Wald,
        Method::AgrestiCaffo,
        Method::HauckAnderson,
        Method::Newcombe,
        Method::NewcombeCc,
        Method::Als,
        Method::Fm,
        Method::Els,
        Method::Es,
    ];

    /// The seven methods whose type I error is tabulated.
    pub const OPERATING: [Method; 7] = [
        Method::Wald,
        Method::AgrestiCaffo,
        Method::HauckAnderson,
        Method::NewcombeCc,
        Method::Newcombe,
        Method::Als,
        Method::Els,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Wald => "Wald",
            Method::AgrestiCaffo => "AC",
            Method::HauckAnderson => "HA",
            Method::Newcombe => "NC",
            Method::NewcombeCc => "NCC",
            Method::Als => "ALS",
            Method::Fm => "FM",
            Method::Els => "ELS",
            Method::Es => "ES",
        }
    }

    pub fn has_p_value(self) -> bool {
        matches!(self, Method::Als | Method::Els | Method::Es)
    }

    pub fn has_interval(self) -> bool {
        self != Method::Es
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let m = match s.to_ascii_lowercase().as_str() {
            "wald" => Method::Wald,
            "ac" | "agresti-caffo" => Method::AgrestiCaffo,
            "ha" | "hauck-anderson" => Method::HauckAnderson,
            "nc" | "newcombe" => Method::Newcombe,
            "ncc" | "newcombe-cc" => Method::NewcombeCc,
            "als" => Method::Als,
            "fm" | "farrington-manning" => Method::Fm,
            "els" => Method::Els,
            "es" => Method::Es,
            _ => return Err(Error::invalid("method", format!("unknown method `{s}`"))),
        };
        Ok(m)
    }
}

/// Two-sided confidence interval `(δ_L, δ_U)` for P_T − P_C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub two_sided_level: f64,
}

impl ConfidenceInterval {
    fn clamped(lower: f64, upper: f64, two_sided_level: f64) -> Self {
        Self {
            lower: lower.clamp(-1.0, 1.0),
            upper: upper.clamp(-1.0, 1.0),
            two_sided_level,
        }
    }

    pub fn contains(&self, delta: f64) -> bool {
        self.lower <= delta && delta <= self.upper
    }

    /// Whether `other` lies inside this interval.
    pub fn covers(&self, other: &ConfidenceInterval) -> bool {
        self.lower <= other.lower && other.upper <= self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arm {
    Test,
    Control,
}

/// Per-arm score interval limits `(l, u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilsonLimits {
    pub lower: f64,
    pub upper: f64,
    pub for_arm: Arm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    RejectInferiority,
    FailToReject,
}

impl Decision {
    pub fn from_bool(reject: bool) -> Self {
        if reject {
            Decision::RejectInferiority
        } else {
            Decision::FailToReject
        }
    }

    pub fn rejects(self) -> bool {
        self == Decision::RejectInferiority
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::RejectInferiority => "reject",
            Decision::FailToReject => "fail",
        })
    }
}

/// Outcome of one method on one data set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    pub interval: Option<ConfidenceInterval>,
    pub p_value: Option<f64>,
    /// Decision from the interval (`δ_L > −δ₀`), or from the p-value for ES.
    pub decision: Decision,
    /// Decision from the p-value (`p ≤ α/2`) for methods that have one.
    pub p_value_decision: Option<Decision>,
}

fn proportions(data: &TwoArmData) -> (f64, f64, f64, f64) {
    (
        data.test.proportion(),
        f64::from(data.test.trials()),
        data.control.proportion(),
        f64::from(data.control.trials()),
    )
}

fn wald_half_width(pt: f64, nt: f64, pc: f64, nc: f64, z: f64) -> f64 {
    z * (pt * (1.0 - pt) / nt + pc * (1.0 - pc) / nc).sqrt()
}

/// Wald interval.
pub fn wald_ci(data: &TwoArmData, level: f64) -> Result<ConfidenceInterval> {
    let z = normal::two_sided_critical(level)?;
    let (pt, nt, pc, nc) = proportions(data);
    let w = wald_half_width(pt, nt, pc, nc, z);
    Ok(ConfidenceInterval::clamped(pt - pc - w, pt - pc + w, level))
}

/// Agresti–Caffo interval: Wald on counts augmented by one success and one
/// failure per arm.
pub fn agresti_caffo_ci(data: &TwoArmData, level: f64) -> Result<ConfidenceInterval> {
    let z = normal::two_sided_critical(level)?;
    let nt = f64::from(data.test.trials()) + 2.0;
    let nc = f64::from(data.control.trials()) + 2.0;
    let pt = (f64::from(data.test.successes()) + 1.0) / nt;
    let pc = (f64::from(data.control.successes()) + 1.0) / nc;
    let w = wald_half_width(pt, nt, pc, nc, z);
    Ok(ConfidenceInterval::clamped(pt - pc - w, pt - pc + w, level))
}

/// Variance denominators used by the Hauck–Anderson interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum HaVariance {
    /// `P̂(1 − P̂)/N`, as in the Wald interval.
    Binomial,
    /// `P̂(1 − P̂)/(N − 1)`, the original Hauck–Anderson form.
    #[default]
    Unbiased,
}

/// Variance used by the asymptotic score test and interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ScoreVariance {
    /// Restricted-MLE variance.
    #[default]
    Restricted,
    /// Restricted-MLE variance times `N/(N − 1)` with `N = N_T + N_C`.
    BiasCorrected,
}

impl ScoreVariance {
    /// Factor applied to the plain score statistic.
    pub(crate) fn z_scale(self, n_test: u32, n_control: u32) -> f64 {
        match self {
            ScoreVariance::Restricted => 1.0,
            ScoreVariance::BiasCorrected => {
                let n = f64::from(n_test) + f64::from(n_control);
                ((n - 1.0) / n).sqrt()
            }
        }
    }
}

/// Formula variants of the asymptotic methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Conventions {
    pub ha_variance: HaVariance,
    pub score_variance: ScoreVariance,
}

impl Conventions {
    /// The variants behind the published type I error tables.
    pub const PUBLISHED_TABLES: Conventions = Conventions {
        ha_variance: HaVariance::Unbiased,
        score_variance: ScoreVariance::BiasCorrected,
    };
}

/// Hauck–Anderson interval: Wald-type interval widened by
/// `1/(2·min(N_T, N_C))` per side, with `N − 1` variance denominators.
pub fn hauck_anderson_ci(data: &TwoArmData, level: f64) -> Result<ConfidenceInterval> {
    hauck_anderson_ci_with(data, level, HaVariance::default())
}

pub fn hauck_anderson_ci_with(
    data: &TwoArmData,
    level: f64,
    variance: HaVariance,
) -> Result<ConfidenceInterval> {
    let z = normal::two_sided_critical(level)?;
    let (pt, nt, pc, nc) = proportions(data);
    let (vt, vc) = match variance {
        HaVariance::Binomial => (nt, nc),
        // A single-trial arm has no unbiased variance; keep the binomial form.
        HaVariance::Unbiased => ((nt - 1.0).max(1.0), (nc - 1.0).max(1.0)),
    };
    let cc = 0.5 / nt.min(nc);
    let w = wald_half_width(pt, vt, pc, vc, z) + cc;
    Ok(ConfidenceInterval::clamped(pt - pc - w, pt - pc + w, level))
}

/// Roots of `|P − P̂| = z·√(P(1 − P)/N)`.
pub fn wilson_limits(arm: &BinomialArm, level: f64, for_arm: Arm) -> Result<WilsonLimits> {
    let z = normal::two_sided_critical(level)?;
    Ok(wilson_with_z(arm.successes(), arm.trials(), z, for_arm))
}

fn wilson_with_z(x: u32, n: u32, z: f64, for_arm: Arm) -> WilsonLimits {
    let (xf, nf) = (f64::from(x), f64::from(n));
    let z2 = z * z;
    let centre = 2.0 * xf + z2;
    let root = z * (z2 + 4.0 * xf * (nf - xf) / nf).sqrt();
    let denom = 2.0 * (nf + z2);
    let lower = if x == 0 { 0.0 } else { (centre - root) / denom };
    let upper = if x == n { 1.0 } else { (centre + root) / denom };
    WilsonLimits {
        lower: lower.clamp(0.0, 1.0),
        upper: upper.clamp(0.0, 1.0),
        for_arm,
    }
}

/// Continuity-corrected limits: roots of `|P − P̂| − 1/(2N) = z·√(P(1 − P)/N)`.
pub fn wilson_cc_limits(arm: &BinomialArm, level: f64, for_arm: Arm) -> Result<WilsonLimits> {
    let z = normal::two_sided_critical(level)?;
    Ok(wilson_cc_with_z(arm.successes(), arm.trials(), z, for_arm))
}

fn wilson_cc_with_z(x: u32, n: u32, z: f64, for_arm: Arm) -> WilsonLimits {
    let (xf, nf) = (f64::from(x), f64::from(n));
    let p = xf / nf;
    let q = 1.0 - p;
    let z2 = z * z;
    let denom = 2.0 * (nf + z2);
    let lower = if x == 0 {
        0.0
    } else {
        let disc = (z2 - 2.0 - 1.0 / nf + 4.0 * p * (nf * q + 1.0)).max(0.0);
        (2.0 * nf * p + z2 - 1.0 - z * disc.sqrt()) / denom
    };
    let upper = if x == n {
        1.0
    } else {
        let disc = (z2 + 2.0 - 1.0 / nf + 4.0 * p * (nf * q - 1.0)).max(0.0);
        (2.0 * nf * p + z2 + 1.0 + z * disc.sqrt()) / denom
    };
    WilsonLimits {
        lower: lower.clamp(0.0, 1.0),
        upper: upper.clamp(0.0, 1.0),
        for_arm,
    }
}

fn hybrid(pt: f64, pc: f64, t: WilsonLimits, c: WilsonLimits, level: f64) -> ConfidenceInterval {
    let d = pt - pc;
    let lower = d - ((pt - t.lower).powi(2) + (c.upper - pc).powi(2)).sqrt();
    let upper = d + ((t.upper - pt).powi(2) + (pc - c.lower).powi(2)).sqrt();
    ConfidenceInterval::clamped(lower, upper, level)
}

/// Newcombe hybrid score interval.
pub fn newcombe_ci(data: &TwoArmData, level: f64) -> Result<ConfidenceInterval> {
    let z = normal::two_sided_critical(level)?;
    let t = wilson_with_z(data.test.successes(), data.test.trials(), z, Arm::Test);
    let c = wilson_with_z(data.control.successes(), data.control.trials(), z, Arm::Control);
    Ok(hybrid(data.test.proportion(), data.control.proportion(), t, c, level))
}

/// Newcombe hybrid score interval with continuity-corrected per-arm limits.
pub fn newcombe_cc_ci(data: &TwoArmData, level: f64) -> Result<ConfidenceInterval> {
    let z = normal::two_sided_critical(level)?;
    let t = wilson_cc_with_z(data.test.successes(), data.test.trials(), z, Arm::Test);
    let c = wilson_cc_with_z(data.control.successes(), data.control.trials(), z, Arm::Control);
    Ok(hybrid(data.test.proportion(), data.control.proportion(), t, c, level))
}

/// Smallest representable offset from ±1 at which the score is evaluated.
const EDGE: f64 = 1e-12;
const ALS_TOL: f64 = 1e-12;

fn score_z(data: &TwoArmData, delta: f64, scale: f64) -> f64 {
    scale
        * score_from_counts(
            data.test.successes(),
            data.test.trials(),
            data.control.successes(),
            data.control.trials(),
            delta,
        )
        .z
}

/// Root in Δ of `z(Δ) = target` on the side of the observed difference given
/// by `downward`. Returns the parameter-space endpoint when no sign change
/// exists.
fn invert_score(data: &TwoArmData, target: f64, downward: bool, scale: f64) -> f64 {
    let d = data.observed_difference().clamp(-1.0 + EDGE, 1.0 - EDGE);
    // f > 0 on the near side of the root and < 0 beyond it.
    let f = |delta: f64| {
        let z = score_z(data, delta, scale);
        if downward {
            target - z
        } else {
            z - target
        }
    };
    let limit = if downward { -1.0 + EDGE } else { 1.0 - EDGE };
    let mut near = d;
    let mut width = 1e-3;
    let far = loop {
        let cand = if downward { (d - width).max(limit) } else { (d + width).min(limit) };
        if f(cand) <= 0.0 {
            break cand;
        }
        if cand == limit {
            return if downward { -1.0 } else { 1.0 };
        }
        near = cand;
        width *= 2.0;
    };
    let (mut a, mut b) = (near, far);
    while (b - a).abs() > ALS_TOL {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if f(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Asymptotic likelihood score interval: the set of Δ with `|z(Δ)| ≤ z_{α/2}`.
pub fn als_ci(data: &TwoArmData, level: f64) -> Result<ConfidenceInterval> {
    als_ci_with(data, level, ScoreVariance::default())
}

pub fn als_ci_with(data: &TwoArmData, level: f64, variance: ScoreVariance) -> Result<ConfidenceInterval> {
    let z = normal::two_sided_critical(level)?;
    Ok(als_ci_with_z(data, z, level, variance))
}

pub(crate) fn als_ci_with_z(data: &TwoArmData, z: f64, level: f64, variance: ScoreVariance) -> ConfidenceInterval {
    let scale = variance.z_scale(data.test.trials(), data.control.trials());
    let lower = invert_score(data, z, true, scale);
    let upper = invert_score(data, -z, false, scale);
    ConfidenceInterval::clamped(lower, upper, level)
}

/// One-sided asymptotic score p-value `1 − Φ(z)` at `Δ = −δ₀`.
pub fn als_pvalue(data: &TwoArmData, margin: f64) -> Result<f64> {
    als_pvalue_with(data, margin, ScoreVariance::default())
}

pub fn als_pvalue_with(data: &TwoArmData, margin: f64, variance: ScoreVariance) -> Result<f64> {
    let c = margin_constraint(margin)?;
    let scale = variance.z_scale(data.test.trials(), data.control.trials());
    Ok(normal::upper_tail(scale * score_statistic(data, c).z))
}

pub(crate) fn margin_constraint(margin: f64) -> Result<DifferenceConstraint> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::invalid("margin", format!("{margin} is outside (0, 1)")));
    }
    DifferenceConstraint::new(-margin)
}

/// Farrington–Manning interval: Wald form with the variance evaluated at the
/// restricted MLE under `Δ = −δ₀`.
pub fn fm_ci(data: &TwoArmData, level: f64, margin: f64) -> Result<ConfidenceInterval> {
    let z = normal::two_sided_critical(level)?;
    let m = restricted_mle(data, margin_constraint(margin)?);
    let (nt, nc) = (f64::from(data.test.trials()), f64::from(data.control.trials()));
    let w = wald_half_width(m.p_test, nt, m.p_control, nc, z);
    let d = data.observed_difference();
    Ok(ConfidenceInterval::clamped(d - w, d + w, level))
}

/// Interval of an asymptotic method. `margin` is used only by FM.
pub fn asymptotic_ci(method: Method, data: &TwoArmData, level: f64, margin: f64) -> Result<ConfidenceInterval> {
    asymptotic_ci_with(method, data, level, margin, &Conventions::default())
}

pub fn asymptotic_ci_with(
    method: Method,
    data: &TwoArmData,
    level: f64,
    margin: f64,
    conventions: &Conventions,
) -> Result<ConfidenceInterval> {
    match method {
        Method::Wald => wald_ci(data, level),
        Method::AgrestiCaffo => agresti_caffo_ci(data, level),
        Method::HauckAnderson => hauck_anderson_ci_with(data, level, conventions.ha_variance),
        Method::Newcombe => newcombe_ci(data, level),
        Method::NewcombeCc => newcombe_cc_ci(data, level),
        Method::Als => als_ci_with(data, level, conventions.score_variance),
        Method::Fm => fm_ci(data, level, margin),
        Method::Els | Method::Es => Err(Error::invalid(
            "method",
            format!("{method} is not an asymptotic interval"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(xt: u32, nt: u32, xc: u32, nc: u32) -> TwoArmData {
        TwoArmData::from_counts(xt, nt, xc, nc).unwrap()
    }

    #[test]
    fn wald_zero_standard_error() {
        let ci = wald_ci(&data(10, 10, 10, 10), 0.95).unwrap();
        assert_eq!((ci.lower, ci.upper), (0.0, 0.0));
        let ha = hauck_anderson_ci_with(&data(10, 10, 10, 10), 0.95, HaVariance::Binomial).unwrap();
        assert!((ha.lower + 0.05).abs() < 1e-15 && (ha.upper - 0.05).abs() < 1e-15);
    }

    #[test]
    fn wilson_boundaries() {
        let arm = BinomialArm::new(0, 10).unwrap();
        assert_eq!(wilson_limits(&arm, 0.95, Arm::Test).unwrap().lower, 0.0);
        assert_eq!(wilson_cc_limits(&arm, 0.95, Arm::Test).unwrap().lower, 0.0);
        let arm = BinomialArm::new(10, 10).unwrap();
        assert_eq!(wilson_limits(&arm, 0.95, Arm::Test).unwrap().upper, 1.0);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.label().parse::<Method>().unwrap(), m);
        }
        assert!("bogus".parse::<Method>().is_err());
    }

    #[test]
    fn als_pvalue_at_the_margin() {
        let p = als_pvalue(&data(4, 10, 5, 10), 0.1).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }
}
