//! Sweep configuration: a flat CSV or a TOML file.
//!
//! CSV header: `delta0,ratio_t,ratio_c,p_control,power,alpha` with an optional
//! `n_test` column. `alpha` is the one-sided size. A row with `n_test` uses it
//! as given; otherwise N_T comes from the Farrington–Manning sample size at
//! `power` with `P_T = P_C`.
//!
//! TOML files hold the same rows as `[[row]]` tables, plus optional top-level
//! `methods`, `conventions` and `rounding` keys.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use noninf::oc::{fm_sample_size_with, OcScenario, Rounding, SampleSizeSpec};
use noninf::Method;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub delta0: f64,
    pub ratio_t: u32,
    pub ratio_c: u32,
    pub p_control: f64,
    #[serde(default)]
    pub power: Option<f64>,
    pub alpha: f64,
    #[serde(default)]
    pub n_test: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub methods: Option<Vec<String>>,
    #[serde(default)]
    pub conventions: Option<String>,
    #[serde(default)]
    pub rounding: Option<String>,
    #[serde(default, rename = "row")]
    pub rows: Vec<SweepEntry>,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        let cfg = if toml {
            toml::from_str(&text).with_context(|| format!("{}: invalid TOML config", path.display()))?
        } else {
            Self {
                rows: parse_csv(&text).with_context(|| format!("{}: invalid sweep CSV", path.display()))?,
                ..Self::default()
            }
        };
        if cfg.rows.is_empty() {
            bail!("{}: the config has no rows", path.display());
        }
        Ok(cfg)
    }
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepEntry>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    for required in ["delta0", "ratio_t", "ratio_c", "p_control", "power", "alpha"] {
        if !headers.iter().any(|h| h == required) {
            bail!("missing column `{required}`");
        }
    }
    rdr.deserialize()
        .enumerate()
        .map(|(k, r)| r.with_context(|| format!("row {}", k + 1)))
        .collect()
}

pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let methods = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Method>().map_err(anyhow::Error::from))
        .collect::<Result<Vec<_>>>()?;
    if methods.is_empty() {
        return Err(noninf::Error::InvalidArgument {
            name: "methods",
            reason: "the method set is empty".into(),
        }
        .into());
    }
    Ok(methods)
}

/// A config row after sample-size resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolved {
    Ready(OcScenario),
    /// `P_C < δ₀`: no null test proportion exists.
    Infeasible,
}

impl SweepEntry {
    pub fn ratio_label(&self) -> String {
        format!("{}:{}", self.ratio_t, self.ratio_c)
    }

    pub fn resolve(&self, rounding: Rounding) -> Result<Resolved> {
        if self.ratio_t == 0 || self.ratio_c == 0 {
            bail!(invalid("ratio", "both allocation parts must be positive"));
        }
        if self.p_control < self.delta0 && (0.0..=1.0).contains(&self.p_control) {
            return Ok(Resolved::Infeasible);
        }
        let (n_test, n_control) = match (self.n_test, self.power) {
            (Some(nt), _) => {
                let nc = (u64::from(nt) * u64::from(self.ratio_c)).div_ceil(u64::from(self.ratio_t));
                (nt, u32::try_from(nc).map_err(|_| invalid("n_test", "N_C overflows"))?)
            }
            (None, Some(power)) => {
                let spec = SampleSizeSpec {
                    margin: self.delta0,
                    ratio_test: self.ratio_t,
                    ratio_control: self.ratio_c,
                    p_control: self.p_control,
                    p_test: self.p_control,
                    power,
                    one_sided_alpha: self.alpha,
                };
                let n = fm_sample_size_with(&spec, rounding)?;
                (n.n_test, n.n_control)
            }
            (None, None) => bail!(invalid("power", "each row needs `power` or `n_test`")),
        };
        Ok(Resolved::Ready(OcScenario::new(
            n_test,
            n_control,
            self.delta0,
            self.p_control,
            self.alpha,
        )?))
    }
}

fn invalid(name: &'static str, reason: &str) -> noninf::Error {
    noninf::Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
