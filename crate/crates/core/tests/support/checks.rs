//! Exhaustive comparisons with the oracles over every table of every shape up
//! to 12×12, shared by the core tests and the acceptance runner.

use noninf::exact::{els_confidence_interval, els_pvalue, es_pvalue};
use noninf::intervals::{asymptotic_ci, Method};
use noninf::oc::{exact_type1, rejection_region, OcScenario};
use noninf::{restricted_mle, DifferenceConstraint, Shape, TwoArmData};

use super as oracle;

pub const MAX_N: u32 = 12;
pub const MARGINS: [f64; 2] = [0.1, 0.2];
pub const LEVEL: f64 = 0.95;
pub const P_VALUE_TOL: f64 = 1e-10;
pub const BOUND_TOL: f64 = 1e-8;

pub fn shapes() -> impl Iterator<Item = (u32, u32)> {
    (1..=MAX_N).flat_map(|a| (1..=MAX_N).map(move |b| (a, b)))
}

pub fn tables(nt: u32, nc: u32) -> impl Iterator<Item = (u32, u32)> {
    (0..=nt).flat_map(move |i| (0..=nc).map(move |j| (i, j)))
}

pub fn data(xt: u32, nt: u32, xc: u32, nc: u32) -> TwoArmData {
    TwoArmData::from_counts(xt, nt, xc, nc).unwrap()
}

/// Largest discrepancy seen by a check and where it occurred.
#[derive(Debug, Clone)]
pub struct Worst {
    pub what: String,
    pub tol: f64,
    pub err: f64,
    pub at: String,
}

impl Worst {
    pub fn new(what: impl Into<String>, tol: f64) -> Self {
        Self {
            what: what.into(),
            tol,
            err: 0.0,
            at: String::new(),
        }
    }

    pub fn record(&mut self, e: f64, at: impl FnOnce() -> String) {
        if e > self.err || e.is_nan() {
            self.err = if e.is_nan() { f64::INFINITY } else { e };
            self.at = at();
        }
    }

    pub fn ok(&self) -> bool {
        self.err <= self.tol
    }

    pub fn line(&self) -> String {
        format!("{}: worst {:.3e} (tol {:.0e}) {}", self.what, self.err, self.tol, self.at)
    }

    pub fn assert(&self) {
        println!("{}", self.line());
        assert!(self.ok(), "{}", self.line());
    }
}

pub fn restricted_mle_vs_cubic() -> Worst {
    let mut w = Worst::new("restricted MLE", 1e-12);
    for (nt, nc) in shapes() {
        for (xt, xc) in tables(nt, nc) {
            for delta in [-0.9, -0.2, -0.1, 0.0, 0.15, 0.6] {
                let m = restricted_mle(&data(xt, nt, xc, nc), DifferenceConstraint::new(delta).unwrap());
                let (pt, _) = oracle::mle(xt, nt, xc, nc, delta);
                w.record((pt - m.p_test).abs(), || format!("{xt}/{nt} {xc}/{nc} Δ={delta}"));
            }
        }
    }
    w
}

pub fn els_pvalues() -> Worst {
    let mut w = Worst::new("ELS p-value", P_VALUE_TOL);
    for (nt, nc) in shapes() {
        for margin in MARGINS {
            let zs = oracle::z_table(nt, nc, -margin);
            for (xt, xc) in tables(nt, nc) {
                let (pt, pc) = oracle::mle(xt, nt, xc, nc, -margin);
                let thr = oracle::upper_threshold(zs[xt as usize][xc as usize]);
                let expect = oracle::upper_mass(&zs, thr, pt, pc);
                let got = els_pvalue(&data(xt, nt, xc, nc), margin).unwrap();
                w.record((got - expect).abs(), || format!("{xt}/{nt} {xc}/{nc} δ₀={margin}"));
            }
        }
    }
    w
}

pub fn es_pvalues() -> Worst {
    let mut w = Worst::new("ES p-value", P_VALUE_TOL);
    for (nt, nc) in shapes() {
        for margin in MARGINS {
            let zs = oracle::z_table(nt, nc, -margin);
            // Arm pmfs on the 1001-point nuisance grid.
            let grid: Vec<(Vec<f64>, Vec<f64>)> = (0..=1000)
                .map(|k| {
                    let p = (1.0 - margin) * f64::from(k) / 1000.0;
                    let q = (p + margin).min(1.0);
                    (
                        (0..=nt).map(|i| oracle::binom(i, nt, p)).collect(),
                        (0..=nc).map(|j| oracle::binom(j, nc, q)).collect(),
                    )
                })
                .collect();
            for (xt, xc) in tables(nt, nc) {
                let thr = oracle::upper_threshold(zs[xt as usize][xc as usize]);
                let (pt, pc) = oracle::mle(xt, nt, xc, nc, -margin);
                let mut best = oracle::upper_mass(&zs, thr, pt, pc);
                for (ft, fc) in &grid {
                    let mut s = 0.0;
                    for i in 0..=nt as usize {
                        let row: f64 = (0..=nc as usize).filter(|&j| zs[i][j] >= thr).map(|j| fc[j]).sum();
                        s += ft[i] * row;
                    }
                    best = best.max(s);
                }
                let got = es_pvalue(&data(xt, nt, xc, nc), margin).unwrap();
                w.record((got - best.min(1.0)).abs(), || format!("{xt}/{nt} {xc}/{nc} δ₀={margin}"));
            }
        }
    }
    w
}

pub type IntervalOracle = fn(u32, u32, u32, u32, f64) -> (f64, f64);

pub const CLOSED_FORM: [(Method, IntervalOracle); 6] = [
    (Method::Wald, oracle::wald),
    (Method::AgrestiCaffo, oracle::agresti_caffo),
    (Method::HauckAnderson, oracle::hauck_anderson),
    (Method::Newcombe, oracle::newcombe),
    (Method::NewcombeCc, oracle::newcombe_cc),
    (Method::Als, oracle::als),
];

/// One entry per asymptotic interval method, FM last.
pub fn asymptotic_intervals() -> Vec<Worst> {
    let mut out = Vec::new();
    for (method, f) in CLOSED_FORM {
        let mut w = Worst::new(format!("{} interval", method.label()), BOUND_TOL);
        for (nt, nc) in shapes() {
            for (xt, xc) in tables(nt, nc) {
                let ci = asymptotic_ci(method, &data(xt, nt, xc, nc), LEVEL, 0.1).unwrap();
                let (lo, hi) = f(xt, nt, xc, nc, LEVEL);
                let e = (ci.lower - lo).abs().max((ci.upper - hi).abs());
                w.record(e, || format!("{xt}/{nt} {xc}/{nc}"));
            }
        }
        out.push(w);
    }
    let mut w = Worst::new("FM interval", BOUND_TOL);
    for (nt, nc) in shapes() {
        for margin in MARGINS {
            for (xt, xc) in tables(nt, nc) {
                let ci = asymptotic_ci(Method::Fm, &data(xt, nt, xc, nc), LEVEL, margin).unwrap();
                let (lo, hi) = oracle::fm(xt, nt, xc, nc, LEVEL, margin);
                let e = (ci.lower - lo).abs().max((ci.upper - hi).abs());
                w.record(e, || format!("{xt}/{nt} {xc}/{nc} δ₀={margin}"));
            }
        }
    }
    out.push(w);
    out
}

pub fn els_intervals() -> Worst {
    let mut w = Worst::new("ELS interval", BOUND_TOL);
    for (nt, nc) in shapes() {
        for (xt, xc) in tables(nt, nc) {
            let ci = els_confidence_interval(&data(xt, nt, xc, nc), LEVEL).unwrap();
            let (lo, hi) = oracle::els_ci(xt, nt, xc, nc, LEVEL);
            let e = (ci.lower - lo).abs().max((ci.upper - hi).abs());
            w.record(e, || format!("{xt}/{nt} {xc}/{nc}"));
        }
    }
    w
}

pub const REGION_METHODS: [Method; 7] = [
    Method::Wald,
    Method::AgrestiCaffo,
    Method::HauckAnderson,
    Method::NewcombeCc,
    Method::Newcombe,
    Method::Als,
    Method::Els,
];

/// Oracle membership of `(i, j)` in a method's rejection region, or `None`
/// when the deciding quantity is within 1e-9 of its threshold.
pub fn oracle_rejects(method: Method, i: u32, nt: u32, j: u32, nc: u32, margin: f64, half_alpha: f64) -> Option<bool> {
    let level = 1.0 - 2.0 * half_alpha;
    let (value, threshold, reject) = match method {
        Method::Els => {
            let p = oracle::els_pvalue(i, nt, j, nc, margin);
            (p, half_alpha, p <= half_alpha)
        }
        Method::Als => {
            let p = oracle::upper_tail(oracle::z(i, nt, j, nc, -margin));
            (p, half_alpha, p <= half_alpha)
        }
        _ => {
            let f = CLOSED_FORM.iter().find(|(m, _)| *m == method).unwrap().1;
            let lo = f(i, nt, j, nc, level).0;
            (lo, -margin, lo > -margin)
        }
    };
    ((value - threshold).abs() > 1e-9).then_some(reject)
}

/// Region membership mismatches, tables skipped as threshold ties, and the
/// type I error discrepancy at three control proportions.
pub struct RegionCheck {
    pub mismatches: Vec<String>,
    pub ties: usize,
    pub type1: Worst,
}

pub fn regions_and_type1() -> RegionCheck {
    let mut out = RegionCheck {
        mismatches: Vec::new(),
        ties: 0,
        type1: Worst::new("exact type I error", P_VALUE_TOL),
    };
    for (nt, nc) in shapes() {
        for margin in MARGINS {
            for method in REGION_METHODS {
                let region = rejection_region(method, Shape::new(nt, nc).unwrap(), margin, 0.025).unwrap();
                let mut members = Vec::new();
                for (i, j) in tables(nt, nc) {
                    let inside = region.contains(i, j);
                    match oracle_rejects(method, i, nt, j, nc, margin, 0.025) {
                        Some(r) if r != inside => {
                            out.mismatches.push(format!("{method} {i}/{nt} {j}/{nc} δ₀={margin}"));
                        }
                        Some(_) => {}
                        None => out.ties += 1,
                    }
                    if inside {
                        members.push((i, j));
                    }
                }
                for pc in [0.3, 0.55, 0.9] {
                    let s = OcScenario::new(nt, nc, margin, pc, 0.025).unwrap();
                    let got = exact_type1(method, &s).unwrap().type1_error;
                    let pt = pc - margin;
                    let expect: f64 = members
                        .iter()
                        .map(|&(i, j)| oracle::binom(i, nt, pt) * oracle::binom(j, nc, pc))
                        .sum();
                    out.type1
                        .record((got - expect).abs(), || format!("{method} {nt}x{nc} δ₀={margin} P_C={pc}"));
                }
            }
        }
    }
    out
}
