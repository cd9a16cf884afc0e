use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observed successes out of a number of trials in one arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinomialArm {
    successes: u32,
    trials: u32,
}

impl BinomialArm {
    pub fn new(successes: u32, trials: u32) -> Result<Self> {
        if trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if successes > trials {
            return Err(Error::invalid(
                "successes",
                format!("{successes} exceeds the number of trials ({trials})"),
            ));
        }
        Ok(Self { successes, trials })
    }

    pub fn successes(&self) -> u32 {
        self.successes
    }

    pub fn trials(&self) -> u32 {
        self.trials
    }

    /// Observed proportion x/N.
    pub fn proportion(&self) -> f64 {
        f64::from(self.successes) / f64::from(self.trials)
    }
}

/// The observed 2x2 table: a test arm and a control arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwoArmData {
    pub test: BinomialArm,
    pub control: BinomialArm,
}

impl TwoArmData {
    pub fn new(test: BinomialArm, control: BinomialArm) -> Self {
        Self { test, control }
    }

    /// Convenience constructor from raw counts `(x_T, N_T, x_C, N_C)`.
    pub fn from_counts(x_test: u32, n_test: u32, x_control: u32, n_control: u32) -> Result<Self> {
        Ok(Self {
            test: BinomialArm::new(x_test, n_test)?,
            control: BinomialArm::new(x_control, n_control)?,
        })
    }

    pub fn shape(&self) -> Shape {
        Shape {
            n_test: self.test.trials,
            n_control: self.control.trials,
        }
    }

    /// Observed difference P̂_T − P̂_C.
    pub fn observed_difference(&self) -> f64 {
        self.test.proportion() - self.control.proportion()
    }

    /// The same table with the arm labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            test: self.control,
            control: self.test,
        }
    }
}

/// Arm sizes `(N_T, N_C)` of a sample space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub n_test: u32,
    pub n_control: u32,
}

impl Shape {
    pub fn new(n_test: u32, n_control: u32) -> Result<Self> {
        if n_test == 0 {
            return Err(Error::invalid("n_test", "must be at least 1"));
        }
        if n_control == 0 {
            return Err(Error::invalid("n_control", "must be at least 1"));
        }
        Ok(Self { n_test, n_control })
    }

    /// Number of tables in the sample space, (N_T + 1)(N_C + 1).
    pub fn len(&self) -> usize {
        (self.n_test as usize + 1) * (self.n_control as usize + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub(crate) fn row_len(&self) -> usize {
        self.n_control as usize + 1
    }

    pub(crate) fn rows(&self) -> usize {
        self.n_test as usize + 1
    }

    pub(crate) fn contains(&self, i: u32, j: u32) -> bool {
        i <= self.n_test && j <= self.n_control
    }
}

/// Non-inferiority design: margin δ₀ and two-sided confidence level 1 − α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoninfSpec {
    margin: f64,
    two_sided_level: f64,
}

impl NoninfSpec {
    pub fn new(margin: f64, two_sided_level: f64) -> Result<Self> {
        if !(margin > 0.0 && margin < 1.0) {
            return Err(Error::invalid("margin", format!("{margin} is outside (0, 1)")));
        }
        if !(two_sided_level > 0.0 && two_sided_level < 1.0) {
            return Err(Error::invalid(
                "level",
                format!("{two_sided_level} is outside (0, 1)"),
            ));
        }
        Ok(Self {
            margin,
            two_sided_level,
        })
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn two_sided_level(&self) -> f64 {
        self.two_sided_level
    }

    /// Size of the one-sided test, α/2.
    pub fn one_sided_alpha(&self) -> f64 {
        (1.0 - self.two_sided_level) / 2.0
    }

    /// The null constraint P_T − P_C = −δ₀.
    pub fn null_constraint(&self) -> DifferenceConstraint {
        DifferenceConstraint { delta: -self.margin }
    }
}

/// The hypothesis P_T − P_C = Δ with Δ ∈ (−1, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifferenceConstraint {
    delta: f64,
}

impl DifferenceConstraint {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > -1.0 && delta < 1.0) {
            return Err(Error::invalid("delta", format!("{delta} is outside (-1, 1)")));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Range of P_T compatible with the constraint, `[max(0, Δ), min(1, 1 + Δ)]`.
    pub fn nuisance_domain(&self) -> (f64, f64) {
        (self.delta.max(0.0), (1.0 + self.delta).min(1.0))
    }
}

/// Restricted maximum likelihood estimates under a difference constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedMle {
    pub p_test: f64,
    pub p_control: f64,
    pub constraint: DifferenceConstraint,
}

/// Score statistic with its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreResult {
    pub z: f64,
    pub numerator: f64,
    pub variance: f64,
}
