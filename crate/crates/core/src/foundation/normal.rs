//! Standard normal distribution function and its inverse.
//!
//! `Φ(x) = erfc(−x/√2)/2` with the musl `erfc` (rational minimax fits, about
//! one ulp). `Φ⁻¹(p) = −√2 · erfc⁻¹(2p)` starts from the `statrs` inverse and
//! takes one Newton step against `Φ`, which brings it to full precision.

use libm::erfc;
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};

/// Φ(x).
pub fn cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// 1 − Φ(x), without cancellation for large x.
pub fn upper_tail(x: f64) -> f64 {
    cdf(-x)
}

/// Φ⁻¹(p) for p ∈ (0, 1).
pub fn quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("normal quantile requires p in (0, 1), got {p}")));
    }
    let x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if density > 0.0 {
        // Residual Φ(x) − p, taken in the smaller tail; 1 − p is exact for p ≥ ½.
        let r = if p < 0.5 { cdf(x) - p } else { (1.0 - p) - upper_tail(x) };
        Ok(x - r / density)
    } else {
        Ok(x)
    }
}

/// The critical value z_{α/2} for a two-sided level `1 − α`.
pub fn two_sided_critical(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("level", format!("{level} is outside (0, 1)")));
    }
    quantile(1.0 - (1.0 - level) / 2.0)
}
