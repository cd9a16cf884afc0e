//! Exact type I error, exact power, Farrington–Manning sample sizes and table sweeps.

pub mod region;
pub mod sample_size;
pub mod sweep;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{arm_distributions, GridCache};
use crate::foundation::types::Shape;
use crate::intervals::Method;

pub use region::{rejection_region, rejection_region_with, ElsSearch, RegionOptions, RejectionRegion};
pub use sample_size::{fm_sample_size, fm_sample_size_with, Rounding, SampleSize, SampleSizeSpec};
pub use sweep::{summarize, table_sweep, SummaryStats, SweepResult, SweepRow};

/// A null scenario: sample sizes, margin, control proportion and test size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcScenario {
    pub n_test: u32,
    pub n_control: u32,
    pub margin: f64,
    pub p_control: f64,
    pub one_sided_alpha: f64,
}

impl OcScenario {
    pub fn new(n_test: u32, n_control: u32, margin: f64, p_control: f64, one_sided_alpha: f64) -> Result<Self> {
        let s = Self {
            n_test,
            n_control,
            margin,
            p_control,
            one_sided_alpha,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        Shape::new(self.n_test, self.n_control)?;
        if !(self.margin > 0.0 && self.margin < 1.0) {
            return Err(Error::invalid("margin", format!("{} is outside (0, 1)", self.margin)));
        }
        if !(0.0..=1.0).contains(&self.p_control) || self.p_control < self.margin {
            return Err(Error::invalid(
                "p_control",
                format!(
                    "{} leaves no valid null test proportion P_C − δ₀ for margin {}",
                    self.p_control, self.margin
                ),
            ));
        }
        if !(0.0..0.5).contains(&self.one_sided_alpha) {
            return Err(Error::invalid(
                "alpha",
                format!("one-sided level {} is outside [0, 0.5)", self.one_sided_alpha),
            ));
        }
        Ok(())
    }

    pub fn shape(&self) -> Shape {
        Shape {
            n_test: self.n_test,
            n_control: self.n_control,
        }
    }

    /// Test proportion on the null boundary, `P_C − δ₀`.
    pub fn null_p_test(&self) -> f64 {
        (self.p_control - self.margin).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcResult {
    pub scenario: OcScenario,
    pub method: Method,
    pub type1_error: f64,
    pub power: Option<f64>,
}

/// Exact type I error on the null boundary `P_T = P_C − δ₀`.
pub fn exact_type1(method: Method, scenario: &OcScenario) -> Result<OcResult> {
    exact_type1_with(method, scenario, &RegionOptions::default(), None)
}

pub fn exact_type1_with(
    method: Method,
    scenario: &OcScenario,
    opts: &RegionOptions,
    cache: Option<&GridCache>,
) -> Result<OcResult> {
    scenario.validate()?;
    let region = rejection_region_with(
        method,
        scenario.shape(),
        scenario.margin,
        scenario.one_sided_alpha,
        opts,
        cache,
    )?;
    Ok(OcResult {
        scenario: *scenario,
        method,
        type1_error: region_probability(&region, scenario.null_p_test(), scenario.p_control, opts),
        power: None,
    })
}

/// Probability of a rejection region at `(P_T, P_C)`.
pub fn region_probability(region: &RejectionRegion, p_test: f64, p_control: f64, opts: &RegionOptions) -> f64 {
    let (t, c) = arm_distributions(region.shape(), p_test, p_control, opts.exact.pruning);
    region.members.mass(&t, &c).clamp(0.0, 1.0)
}

/// Exact power at `(P_T, P_C)`.
pub fn exact_power(
    method: Method,
    shape: Shape,
    margin: f64,
    one_sided_alpha: f64,
    p_test: f64,
    p_control: f64,
) -> Result<f64> {
    for (name, p) in [("p_test", p_test), ("p_control", p_control)] {
        crate::foundation::pmf::check_probability(name, p)?;
    }
    let opts = RegionOptions::default();
    let region = rejection_region_with(method, shape, margin, one_sided_alpha, &opts, None)?;
    Ok(region_probability(&region, p_test, p_control, &opts))
}
