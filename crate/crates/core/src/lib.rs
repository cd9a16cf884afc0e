//! Non-inferiority inference for the difference of two independent binomial
//! proportions: asymptotic intervals, exact likelihood score tests and
//! intervals, and exact operating characteristics by full enumeration.
//!
//! Differences are always `Δ = P_T − P_C`; the non-inferiority null with
//! margin δ₀ is `Δ ≤ −δ₀`.

pub mod analysis;
pub mod error;
pub mod exact;
pub mod foundation;
pub mod intervals;
pub mod oc;
pub mod par;
pub mod reference;

pub use error::{Error, Result};
pub use foundation::*;
pub use intervals::{ConfidenceInterval, Conventions, Decision, Method, MethodResult, WilsonLimits};
