mod support;

use num_bigint::BigUint;
use num_traits::{Float, One, ToPrimitive};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use noninf::foundation::normal;
use noninf::{
    constrained_log_likelihood, joint_log_pmf, ln_binomial_pmf, restricted_mle, score_statistic, DifferenceConstraint,
    Shape, TwoArmData,
};

fn data(xt: u32, nt: u32, xc: u32, nc: u32) -> TwoArmData {
    TwoArmData::from_counts(xt, nt, xc, nc).unwrap()
}

fn constraint(delta: f64) -> DifferenceConstraint {
    DifferenceConstraint::new(delta).unwrap()
}

#[test]
fn pmf_failure_terms_only() {
    let shape = Shape::new(2, 2).unwrap();
    let v = joint_log_pmf(0, 0, shape, 0.0, 0.1).unwrap();
    assert!((v - 0.81f64.ln()).abs() < 1e-15);
}

#[test]
fn pmf_matches_direct_product() {
    let shape = Shape::new(5, 4).unwrap();
    let v = joint_log_pmf(3, 2, shape, 0.6, 0.5).unwrap().exp();
    let expect = support::binom(3, 5, 0.6) * support::binom(2, 4, 0.5);
    assert!((v / expect - 1.0).abs() < 1e-14, "{v} {expect}");
}

#[test]
fn pmf_rejects_out_of_range_arguments() {
    let shape = Shape::new(5, 4).unwrap();
    assert!(joint_log_pmf(6, 0, shape, 0.5, 0.5).is_err());
    assert!(joint_log_pmf(0, 5, shape, 0.5, 0.5).is_err());
    assert!(joint_log_pmf(0, 0, shape, 1.5, 0.5).is_err());
    assert!(joint_log_pmf(0, 0, shape, 0.5, f64::NAN).is_err());
}

#[test]
fn pmf_zero_probability_conventions() {
    let shape = Shape::new(3, 3).unwrap();
    assert_eq!(joint_log_pmf(0, 3, shape, 0.0, 1.0).unwrap(), 0.0);
    assert_eq!(joint_log_pmf(1, 3, shape, 0.0, 1.0).unwrap(), f64::NEG_INFINITY);
}

#[test]
fn pmf_normalizes_up_to_200() {
    let sizes = [1, 2, 7, 31, 64, 113, 150, 200];
    let probs = [0.0, 1e-9, 0.013, 0.37, 0.5, 0.81, 0.999, 1.0];
    let mut worst: f64 = 0.0;
    for &nt in &sizes {
        for &nc in &sizes {
            let shape = Shape::new(nt, nc).unwrap();
            for (k, &pt) in probs.iter().enumerate() {
                let pc = probs[(k * 3 + nt as usize) % probs.len()];
                let mut total = 0.0;
                for i in 0..=nt {
                    for j in 0..=nc {
                        total += joint_log_pmf(i, j, shape, pt, pc).unwrap().exp();
                    }
                }
                worst = worst.max((total - 1.0).abs());
            }
        }
    }
    assert!(worst <= 1e-12, "{worst:e}");
}

/// `C(n, k) p^k (1 − p)^(n−k)` computed exactly from the dyadic value of `p`,
/// rounded once to f64.
fn exact_pmf(k: u32, n: u32, p: f64) -> f64 {
    let (mantissa, exponent, _) = p.integer_decode();
    let e = u32::try_from(-i32::from(exponent)).expect("p < 1");
    let m = BigUint::from(mantissa);
    let one = BigUint::one() << e;
    let q = &one - &m;
    let mut choose = BigUint::one();
    for t in 0..k {
        choose = choose * BigUint::from(n - t) / BigUint::from(t + 1);
    }
    let num = choose * m.pow(k) * q.pow(n - k);
    let bits = num.bits();
    let shift = bits.saturating_sub(64);
    let top = (num >> shift).to_u64().unwrap() as f64;
    libm::ldexp(top, shift as i32 - (e * n) as i32)
}

#[test]
fn pmf_relative_accuracy_up_to_5000() {
    let mut worst: f64 = 0.0;
    for n in [1, 10, 137, 1000, 2500, 5000] {
        for p in [0.5, 0.3, 0.01, 0.9, 0.123456, 0.999] {
            let mean = f64::from(n) * p;
            let sd = (mean * (1.0 - p)).sqrt();
            for off in [-8.0, -6.0, -2.0, -0.5, 0.0, 1.0, 3.0, 7.0] {
                let k = (mean + off * sd).round().clamp(0.0, f64::from(n)) as u32;
                let expect = exact_pmf(k, n, p);
                if expect < 1e-300 {
                    continue;
                }
                let got = ln_binomial_pmf(k, n, p).exp();
                worst = worst.max((got / expect - 1.0).abs());
            }
            for k in [0, n] {
                let expect = exact_pmf(k, n, p);
                if expect > 1e-300 {
                    worst = worst.max((ln_binomial_pmf(k, n, p).exp() / expect - 1.0).abs());
                }
            }
        }
    }
    assert!(worst <= 1e-12, "{worst:e}");
}

#[test]
fn mle_examples() {
    let m = restricted_mle(&data(4, 10, 5, 10), constraint(-0.1));
    assert!((m.p_test - 0.4).abs() < 1e-12 && (m.p_control - 0.5).abs() < 1e-12);
    let m = restricted_mle(&data(5, 10, 7, 10), constraint(0.0));
    assert!((m.p_test - 0.6).abs() < 1e-12 && (m.p_control - 0.6).abs() < 1e-12);
}

#[test]
fn mle_matches_golden_section_oracle() {
    let d = data(264, 328, 268, 317);
    let f = |p: f64| constrained_log_likelihood(&d, -0.1, p);
    let (mut a, mut b) = (0.0, 0.9);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-11 {
        let c = b - r * (b - a);
        let e = a + r * (b - a);
        if f(c) >= f(e) {
            b = e;
        } else {
            a = c;
        }
    }
    let m = restricted_mle(&d, constraint(-0.1));
    // The likelihood is flat to ~1e-16 within 1e-8 of the maximum, so the
    // golden-section bracket is only resolved to ~√ε there.
    assert!((m.p_test - 0.5 * (a + b)).abs() < 1e-7, "{} {}", m.p_test, 0.5 * (a + b));
    let p = normal::upper_tail(score_statistic(&d, constraint(-0.1)).z);
    assert!((p - 0.0238).abs() <= 5e-5, "{p}");
}

#[test]
fn mle_at_zero_is_pooled_up_to_50() {
    let mut worst: f64 = 0.0;
    for nt in 1..=50u32 {
        for nc in 1..=50u32 {
            for xt in 0..=nt {
                for xc in 0..=nc {
                    let m = restricted_mle(&data(xt, nt, xc, nc), constraint(0.0));
                    let pooled = f64::from(xt + xc) / f64::from(nt + nc);
                    worst = worst.max((m.p_test - pooled).abs());
                }
            }
        }
    }
    assert!(worst <= 1e-12, "{worst:e}");
}

fn table() -> impl Strategy<Value = (u32, u32, u32, u32)> {
    (1u32..=400, 1u32..=400).prop_flat_map(|(nt, nc)| (0..=nt, Just(nt), 0..=nc, Just(nc)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn mle_satisfies_constraint_and_is_local_max((xt, nt, xc, nc) in table(), delta in -0.99f64..0.99) {
        let d = data(xt, nt, xc, nc);
        let m = restricted_mle(&d, constraint(delta));
        let (lo, hi) = constraint(delta).nuisance_domain();
        prop_assert!(m.p_test >= lo && m.p_test <= hi);
        prop_assert!((m.p_test - m.p_control - delta).abs() <= 1e-12);
        let best = constrained_log_likelihood(&d, delta, m.p_test);
        for h in [-1e-6, 1e-6] {
            let q = (m.p_test + h).clamp(lo, hi);
            prop_assert!(best >= constrained_log_likelihood(&d, delta, q));
        }
    }

    #[test]
    fn score_is_antisymmetric_under_arm_swap((xt, nt, xc, nc) in table(), delta in -0.95f64..0.95) {
        let d = data(xt, nt, xc, nc);
        let z = score_statistic(&d, constraint(delta)).z;
        let zs = score_statistic(&d.swapped(), constraint(-delta)).z;
        if z.is_finite() {
            prop_assert!((z + zs).abs() <= 1e-10 * z.abs().max(1.0), "{z} {zs}");
        } else {
            prop_assert_eq!(z, -zs);
        }
    }
}

#[test]
fn score_matches_direct_transcription() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..1000 {
        let nt = rng.gen_range(1..=500);
        let nc = rng.gen_range(1..=500);
        let xt = rng.gen_range(0..=nt);
        let xc = rng.gen_range(0..=nc);
        let margin = rng.gen_range(0.01..0.5);
        let got = score_statistic(&data(xt, nt, xc, nc), constraint(-margin));
        let expect = support::z(xt, nt, xc, nc, -margin);
        assert!(
            (got.z - expect).abs() <= 1e-9 * expect.abs().max(1.0),
            "{xt}/{nt} {xc}/{nc} δ₀={margin}: {} vs {expect}",
            got.z
        );
    }
}

#[test]
fn score_examples() {
    let s = score_statistic(&data(4, 10, 5, 10), constraint(-0.1));
    assert!(s.z.abs() < 1e-12);
    let s = score_statistic(&data(2, 2, 0, 2), constraint(-0.5));
    let (pt, pc) = support::mle(2, 2, 0, 2, -0.5);
    let v = pt * (1.0 - pt) / 2.0 + pc * (1.0 - pc) / 2.0;
    assert!((s.z - 1.5 / v.sqrt()).abs() < 1e-12);
}

#[test]
fn normal_reference_values() {
    assert_eq!(normal::cdf(0.0), 0.5);
    // High-precision reference values of Φ.
    for (x, phi) in [
        (1.96, 0.975_002_104_851_780_1),
        (1.0, 0.841_344_746_068_542_9),
        (-3.0, 0.001_349_898_031_630_094_6),
        (-5.0, 2.866_515_718_791_939e-7),
        (2.5, 0.993_790_334_674_223_8),
    ] {
        assert!((normal::cdf(x) - phi).abs() <= 1e-10, "{x}");
    }
    assert!((normal::quantile(0.975).unwrap() - 1.959964).abs() <= 1e-5);
    for p in [0.01, 0.025, 0.5, 0.975] {
        assert!((normal::cdf(normal::quantile(p).unwrap()) - p).abs() <= 1e-9);
    }
    assert!(normal::quantile(0.0).is_err());
    assert!(normal::quantile(1.0).is_err());
}
