//! All requested methods on one data set.

use crate::error::Result;
use crate::exact::{els_confidence_interval_with, els_pvalue_with, es_pvalue_with, ExactOptions};
use crate::foundation::types::{NoninfSpec, TwoArmData};
use crate::intervals::{als_pvalue_with, asymptotic_ci_with, Conventions, Decision, Method, MethodResult};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnalysisOptions {
    pub exact: ExactOptions,
    pub conventions: Conventions,
}

/// Runs one method. Interval methods decide by `δ_L > −δ₀`; methods with a
/// p-value also report the decision `p ≤ α/2`.
pub fn analyze_method(data: &TwoArmData, spec: &NoninfSpec, method: Method, opts: &AnalysisOptions) -> Result<MethodResult> {
    let level = spec.two_sided_level();
    let margin = spec.margin();
    let interval = match method {
        Method::Es => None,
        Method::Els => Some(els_confidence_interval_with(data, level, &opts.exact)?.interval),
        _ => Some(asymptotic_ci_with(method, data, level, margin, &opts.conventions)?),
    };
    let p_value = match method {
        Method::Als => Some(als_pvalue_with(data, margin, opts.conventions.score_variance)?),
        Method::Els => Some(els_pvalue_with(data, margin, &opts.exact)?),
        Method::Es => Some(es_pvalue_with(data, margin, &opts.exact)?),
        _ => None,
    };
    let p_value_decision = p_value.map(|p| Decision::from_bool(p <= spec.one_sided_alpha()));
    let decision = match interval {
        Some(ci) => Decision::from_bool(ci.lower > -margin),
        None => p_value_decision.expect("ES has a p-value"),
    };
    Ok(MethodResult {
        method,
        interval,
        p_value,
        decision,
        p_value_decision,
    })
}

pub fn analyze(data: &TwoArmData, spec: &NoninfSpec, methods: &[Method], opts: &AnalysisOptions) -> Result<Vec<MethodResult>> {
    methods.iter().map(|&m| analyze_method(data, spec, m, opts)).collect()
}
