//! Restricted maximum likelihood of (P_T, P_C) under P_T − P_C = Δ.
//!
//! With P_C = P_T − Δ the log-likelihood in P_T is
//! `a ln p + b ln(1−p) + c ln(p−Δ) + d ln(1−p+Δ)`, a sum of concave terms, so
//! its derivative is strictly decreasing on the nuisance domain. The maximiser
//! is located by bisection on the sign of that derivative; when the derivative
//! keeps one sign the maximiser is the corresponding endpoint.

use crate::foundation::types::{ConstrainedMle, DifferenceConstraint, TwoArmData};

/// Success/failure weights of the two arms. Weights may be fractional, which
/// lets sample-size code evaluate the estimator at expected counts.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ArmWeights {
    pub test_success: f64,
    pub test_failure: f64,
    pub control_success: f64,
    pub control_failure: f64,
}

impl ArmWeights {
    pub fn from_counts(x_test: u32, n_test: u32, x_control: u32, n_control: u32) -> Self {
        Self {
            test_success: f64::from(x_test),
            test_failure: f64::from(n_test - x_test),
            control_success: f64::from(x_control),
            control_failure: f64::from(n_control - x_control),
        }
    }

    /// Weights for proportions `p_test`, `p_control` with arm sizes `n_test`, `n_control`.
    pub fn from_proportions(p_test: f64, n_test: f64, p_control: f64, n_control: f64) -> Self {
        Self {
            test_success: p_test * n_test,
            test_failure: (1.0 - p_test) * n_test,
            control_success: p_control * n_control,
            control_failure: (1.0 - p_control) * n_control,
        }
    }

    #[inline]
    fn score(&self, p: f64, delta: f64) -> f64 {
        let pc = p - delta;
        let mut s = 0.0;
        if self.test_success > 0.0 {
            s += self.test_success / p;
        }
        if self.test_failure > 0.0 {
            s -= self.test_failure / (1.0 - p);
        }
        if self.control_success > 0.0 {
            s += self.control_success / pc;
        }
        if self.control_failure > 0.0 {
            s -= self.control_failure / (1.0 - pc);
        }
        s
    }
}

const MAX_BISECTIONS: usize = 200;

/// Restricted MLE of P_T; P̃_C is `P̃_T − Δ`.
pub(crate) fn constrained_p_test(w: &ArmWeights, delta: f64) -> f64 {
    let (lo0, hi0) = (delta.max(0.0), (1.0 + delta).min(1.0));
    let (mut lo, mut hi) = (lo0, hi0);
    let mut moved_lo = false;
    let mut moved_hi = false;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if w.score(mid, delta) > 0.0 {
            lo = mid;
            moved_lo = true;
        } else {
            hi = mid;
            moved_hi = true;
        }
    }
    match (moved_lo, moved_hi) {
        (false, _) => lo0,
        (_, false) => hi0,
        _ => 0.5 * (lo + hi),
    }
}

pub(crate) fn constrained_pair(w: &ArmWeights, delta: f64) -> (f64, f64) {
    let pt = constrained_p_test(w, delta);
    (pt, (pt - delta).clamp(0.0, 1.0))
}

/// Maximiser of the joint binomial likelihood subject to `P_T − P_C = Δ`.
pub fn restricted_mle(data: &TwoArmData, constraint: DifferenceConstraint) -> ConstrainedMle {
    let w = ArmWeights::from_counts(
        data.test.successes(),
        data.test.trials(),
        data.control.successes(),
        data.control.trials(),
    );
    let (p_test, p_control) = constrained_pair(&w, constraint.delta());
    ConstrainedMle {
        p_test,
        p_control,
        constraint,
    }
}

/// Log-likelihood of the observed table at `(p_test, p_test − Δ)`, without the
/// binomial coefficients.
pub fn constrained_log_likelihood(data: &TwoArmData, delta: f64, p_test: f64) -> f64 {
    let w = ArmWeights::from_counts(
        data.test.successes(),
        data.test.trials(),
        data.control.successes(),
        data.control.trials(),
    );
    let pc = p_test - delta;
    let term = |weight: f64, p: f64| if weight > 0.0 { weight * p.ln() } else { 0.0 };
    term(w.test_success, p_test)
        + term(w.test_failure, 1.0 - p_test)
        + term(w.control_success, pc)
        + term(w.control_failure, 1.0 - pc)
}
