//! Farrington–Manning sample size for the non-inferiority score test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foundation::mle::{constrained_pair, ArmWeights};
use crate::foundation::normal;

/// Design inputs. The allocation is `N_T : N_C = ratio_test : ratio_control`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeSpec {
    pub margin: f64,
    pub ratio_test: u32,
    pub ratio_control: u32,
    pub p_control: f64,
    pub p_test: f64,
    pub power: f64,
    pub one_sided_alpha: f64,
}

/// How the continuous solution is turned into whole subjects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Rounding {
    /// `N_T = ⌈n⌉`, `N_C = ⌈N_T · ratio_control / ratio_test⌉`.
    #[default]
    Ceil,
    /// Nearest whole multiple of the allocation ratio.
    Nearest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSize {
    pub n_test: u32,
    pub n_control: u32,
    /// Unrounded test-arm size.
    pub raw_n_test: f64,
}

impl SampleSizeSpec {
    fn validate(&self) -> Result<()> {
        if !(self.margin > 0.0 && self.margin < 1.0) {
            return Err(Error::invalid("margin", format!("{} is outside (0, 1)", self.margin)));
        }
        if self.ratio_test == 0 || self.ratio_control == 0 {
            return Err(Error::invalid("ratio", "both allocation parts must be positive"));
        }
        for (name, p) in [("p_control", self.p_control), ("p_test", self.p_test)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(name, format!("{p} is not a probability")));
            }
        }
        if !(self.power > 0.0 && self.power < 1.0) {
            return Err(Error::invalid("power", format!("{} is outside (0, 1)", self.power)));
        }
        if !(self.one_sided_alpha > 0.0 && self.one_sided_alpha < 0.5) {
            return Err(Error::invalid(
                "alpha",
                format!("one-sided level {} is outside (0, 0.5)", self.one_sided_alpha),
            ));
        }
        if self.p_test - self.p_control <= -self.margin {
            return Err(Error::invalid(
                "p_test",
                format!(
                    "the alternative P_T − P_C = {} lies inside the null (≤ −{})",
                    self.p_test - self.p_control,
                    self.margin
                ),
            ));
        }
        Ok(())
    }
}

pub fn fm_sample_size(spec: &SampleSizeSpec) -> Result<SampleSize> {
    fm_sample_size_with(spec, Rounding::default())
}

pub fn fm_sample_size_with(spec: &SampleSizeSpec, rounding: Rounding) -> Result<SampleSize> {
    spec.validate()?;
    let r = f64::from(spec.ratio_control) / f64::from(spec.ratio_test);
    let (pt, pc) = (spec.p_test, spec.p_control);
    let var = |t: f64, c: f64| t * (1.0 - t) + c * (1.0 - c) / r;
    // Null variance at the restricted MLE of the design proportions, with the
    // arms weighted by their share of subjects.
    let weights = ArmWeights::from_proportions(pt, 1.0, pc, r);
    let (t0, c0) = constrained_pair(&weights, -spec.margin);
    let z_alpha = normal::quantile(1.0 - spec.one_sided_alpha)?;
    let z_beta = normal::quantile(spec.power)?;
    let effect = pt - pc + spec.margin;
    let raw = ((z_alpha * var(t0, c0).sqrt() + z_beta * var(pt, pc).sqrt()) / effect).powi(2);
    let too_large = || Error::Domain(format!("sample size {raw} exceeds the supported range"));
    let (a, b) = (f64::from(spec.ratio_test), f64::from(spec.ratio_control));
    let (n_test, n_control) = match rounding {
        Rounding::Ceil => {
            let nt = raw.ceil().max(1.0);
            (nt, (nt * b / a).ceil())
        }
        Rounding::Nearest => {
            let k = (raw / a).round().max(1.0);
            (a * k, b * k)
        }
    };
    if n_control > f64::from(u32::MAX) || n_test > f64::from(u32::MAX) {
        return Err(too_large());
    }
    Ok(SampleSize {
        n_test: n_test as u32,
        n_control: n_control as u32,
        raw_n_test: raw,
    })
}
