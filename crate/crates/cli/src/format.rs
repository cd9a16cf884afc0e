//! Presentation of numbers: percent with two decimals and four-decimal
//! p-values by default, or raw proportions with 12 significant digits.

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Precision {
    #[default]
    Rounded,
    Full,
}

/// 12 significant digits, no exponent.
pub fn significant(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

impl Precision {
    /// A proportion, as percent or raw.
    pub fn proportion(self, v: f64) -> String {
        match self {
            Precision::Rounded => format!("{:.2}", 100.0 * v),
            Precision::Full => significant(v),
        }
    }

    pub fn p_value(self, p: f64) -> String {
        match self {
            Precision::Rounded => format!("{p:.4}"),
            Precision::Full => significant(p),
        }
    }

    /// Statistic already in percent.
    pub fn percent(self, v: f64) -> String {
        match self {
            Precision::Rounded => format!("{v:.2}"),
            Precision::Full => significant(v),
        }
    }
}
