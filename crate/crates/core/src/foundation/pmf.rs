//! Binomial probabilities in log space.
//!
//! Log-densities use the saddle-point form of the binomial pmf (Loader, 2000):
//! `ln C(n,k) p^k q^(n-k)` is rewritten through the Stirling-series remainders
//! `stirlerr(m) = ln m! − ln(√(2πm) (m/e)^m)` and the deviance term
//! `bd0(k, np) = k ln(k/np) + np − k`. Every term stays O(1) in magnitude, so
//! there is no cancellation between large log-factorials and the result keeps
//! near full relative precision even for n in the thousands. The remainders for
//! m ≤ [`STIRLING_TABLE_LEN`] are tabulated once per process.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::foundation::sum::CompensatedSum;
use crate::foundation::types::Shape;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Number of precomputed Stirling remainders.
pub const STIRLING_TABLE_LEN: usize = 1 << 14;

fn stirling_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| (0..STIRLING_TABLE_LEN).map(|m| stirlerr_direct(m as u32)).collect())
}

fn stirlerr_direct(m: u32) -> f64 {
    if m == 0 {
        return 0.0;
    }
    if m <= 15 {
        // m! is exact in f64 up to 15! ≈ 1.3e12.
        let fact: f64 = (1..=m).map(f64::from).product();
        let m = f64::from(m);
        return fact.ln() - (m + 0.5) * m.ln() + m - LN_SQRT_2PI;
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let m = f64::from(m);
    let mm = m * m;
    if m > 500.0 {
        (S0 - S1 / mm) / m
    } else if m > 80.0 {
        (S0 - (S1 - S2 / mm) / mm) / m
    } else if m > 35.0 {
        (S0 - (S1 - (S2 - S3 / mm) / mm) / mm) / m
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / mm) / mm) / mm) / mm) / m
    }
}

#[inline]
fn stirlerr(m: u32) -> f64 {
    match stirling_table().get(m as usize) {
        Some(v) => *v,
        None => stirlerr_direct(m),
    }
}

/// `x ln(x/np) + np − x`, evaluated without cancellation when x ≈ np.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        if s.abs() < f64::MIN_POSITIVE {
            return s;
        }
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / f64::from(2 * j + 1);
            if s1 == s {
                return s1;
            }
            s = s1;
        }
    }
    x * (x / np).ln() + np - x
}

/// `ln P(X = k)` for `X ~ Binomial(n, p)`, with 0⁰ = 1 and ln 0 = −∞.
///
/// Callers guarantee `k ≤ n` and `p ∈ [0, 1]`.
pub fn ln_binomial_pmf(k: u32, n: u32, p: f64) -> f64 {
    debug_assert!(k <= n && (0.0..=1.0).contains(&p));
    let q = 1.0 - p;
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let nf = f64::from(n);
    if k == 0 {
        return if p < 0.1 { -bd0(nf, nf * q) - nf * p } else { nf * q.ln() };
    }
    if k == n {
        return if q < 0.1 { -bd0(nf, nf * p) - nf * q } else { nf * p.ln() };
    }
    let kf = f64::from(k);
    let lc = stirlerr(n)
        - stirlerr(k)
        - stirlerr(n - k)
        - bd0(kf, nf * p)
        - bd0(nf - kf, nf * q);
    let lf = LN_2PI + kf.ln() + (-kf / nf).ln_1p();
    lc - 0.5 * lf
}

/// Log of the product of two independent binomial probabilities,
/// `ln[C(N_T,i) C(N_C,j) p_T^i (1−p_T)^(N_T−i) p_C^j (1−p_C)^(N_C−j)]`.
pub fn joint_log_pmf(i: u32, j: u32, shape: Shape, p_test: f64, p_control: f64) -> Result<f64> {
    if i > shape.n_test {
        return Err(Error::invalid("i", format!("{i} exceeds N_T = {}", shape.n_test)));
    }
    if j > shape.n_control {
        return Err(Error::invalid("j", format!("{j} exceeds N_C = {}", shape.n_control)));
    }
    check_probability("p_test", p_test)?;
    check_probability("p_control", p_control)?;
    Ok(ln_binomial_pmf(i, shape.n_test, p_test) + ln_binomial_pmf(j, shape.n_control, p_control))
}

pub(crate) fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{p} is not a probability")))
    }
}

/// How binomial supports are truncated before summation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pruning {
    /// Sum over the whole support.
    Off,
    /// Keep the central window of each arm whose excluded tail mass is
    /// certified (Chernoff bound) to total at most `budget` across both arms.
    Certified { budget: f64 },
}

impl Default for Pruning {
    fn default() -> Self {
        Pruning::Certified { budget: 1e-12 }
    }
}

/// Chernoff bound `exp(−n·KL(k/n ‖ p))` on `P(X ≤ k)` (for k < np) or
/// `P(X ≥ k)` (for k > np). Returns 1 when `k` is on the wrong side of the mean.
fn chernoff_tail(k: u32, n: u32, p: f64, upper: bool) -> f64 {
    let a = f64::from(k) / f64::from(n);
    if (upper && a <= p) || (!upper && a >= p) {
        return 1.0;
    }
    let mut kl = 0.0;
    if a > 0.0 {
        kl += a * (a / p).ln();
    }
    if a < 1.0 {
        kl += (1.0 - a) * ((1.0 - a) / (1.0 - p)).ln();
    }
    (-f64::from(n) * kl).exp()
}

/// Smallest central window `[lo, hi]` (grown from ±10 standard deviations)
/// whose excluded mass is certified below `budget`. Returns the window and the
/// certified bound on the excluded mass.
pub fn certified_window(n: u32, p: f64, budget: f64) -> (u32, u32, f64) {
    let mean = f64::from(n) * p;
    let sd = (mean * (1.0 - p)).max(0.0).sqrt();
    let mut width = 10.0 * sd + 1.0;
    loop {
        let lo = (mean - width).floor().max(0.0) as u32;
        let hi = ((mean + width).ceil().min(f64::from(n))) as u32;
        let left = if lo == 0 { 0.0 } else { chernoff_tail(lo - 1, n, p, false) };
        let right = if hi == n { 0.0 } else { chernoff_tail(hi + 1, n, p, true) };
        if left + right <= budget || (lo == 0 && hi == n) {
            return (lo, hi, left + right);
        }
        width = width * 1.5 + 1.0;
    }
}

/// Probabilities of one binomial arm over a contiguous window of its support,
/// with prefix and suffix sums for range queries.
#[derive(Debug, Clone)]
pub struct ArmDistribution {
    start: u32,
    probs: Vec<f64>,
    /// `prefix[k] = Σ_{m<k} probs[m]`
    prefix: Vec<f64>,
    /// `suffix[k] = Σ_{m≥k} probs[m]`
    suffix: Vec<f64>,
    omitted: f64,
}

impl ArmDistribution {
    pub fn new(n: u32, p: f64, budget: Option<f64>) -> Self {
        let (lo, hi, omitted) = match budget {
            Some(b) => certified_window(n, p, b),
            None => (0, n, 0.0),
        };
        let probs: Vec<f64> = (lo..=hi).map(|k| ln_binomial_pmf(k, n, p).exp()).collect();
        let len = probs.len();
        let mut prefix = vec![0.0; len + 1];
        let mut suffix = vec![0.0; len + 1];
        let mut acc = CompensatedSum::default();
        for (k, &v) in probs.iter().enumerate() {
            acc.add(v);
            prefix[k + 1] = acc.value();
        }
        let mut acc = CompensatedSum::default();
        for (k, &v) in probs.iter().enumerate().rev() {
            acc.add(v);
            suffix[k] = acc.value();
        }
        Self {
            start: lo,
            probs,
            prefix,
            suffix,
            omitted,
        }
    }

    /// Indices covered by the window.
    pub fn window(&self) -> (u32, u32) {
        (self.start, self.start + self.probs.len() as u32 - 1)
    }

    /// Certified upper bound on the mass outside the window.
    pub fn omitted_mass(&self) -> f64 {
        self.omitted
    }

    #[inline]
    pub fn prob(&self, k: u32) -> f64 {
        k.checked_sub(self.start)
            .and_then(|o| self.probs.get(o as usize))
            .copied()
            .unwrap_or(0.0)
    }

    #[inline]
    fn offset(&self, k: u32) -> usize {
        (k.saturating_sub(self.start) as usize).min(self.probs.len())
    }

    /// Windowed mass of the index range `[lo, hi)`.
    #[inline]
    pub fn range_mass(&self, lo: u32, hi: u32) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let a = self.offset(lo);
        let b = self.offset(hi);
        if a >= b {
            return 0.0;
        }
        // Difference the smaller of the two accumulations so that tails are
        // never formed as a difference of numbers close to 1.
        if self.prefix[a] <= self.suffix[b] {
            self.prefix[b] - self.prefix[a]
        } else {
            self.suffix[a] - self.suffix[b]
        }
    }

    /// Windowed total mass.
    pub fn total(&self) -> f64 {
        self.prefix[self.probs.len()]
    }
}
