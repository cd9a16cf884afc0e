//! Brute-force reference implementations shared by the integration tests.
//! Nothing here calls into the library's numerical code; only the normal
//! critical value is taken from `statrs`.

#![allow(dead_code)]

use statrs::distribution::{ContinuousCDF, Normal};

pub const TIE: f64 = 1e-9;

pub fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}

/// `z_{α/2}` for a two-sided level.
pub fn critical(level: f64) -> f64 {
    std_normal().inverse_cdf(0.5 + level / 2.0)
}

pub fn upper_tail(z: f64) -> f64 {
    if z == f64::INFINITY {
        0.0
    } else if z == f64::NEG_INFINITY {
        1.0
    } else {
        0.5 * statrs::function::erf::erfc(z / std::f64::consts::SQRT_2)
    }
}

fn choose(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for t in 0..k {
        c = c * u128::from(n - t) / u128::from(t + 1);
    }
    c as f64
}

/// Binomial pmf by direct multiplication (small N only).
pub fn binom(k: u32, n: u32, p: f64) -> f64 {
    choose(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

fn log_lik(xt: u32, nt: u32, xc: u32, nc: u32, delta: f64, p: f64) -> f64 {
    let term = |x: u32, n: u32, q: f64| {
        let s = if x > 0 { f64::from(x) * q.ln() } else { 0.0 };
        let f = if n > x { f64::from(n - x) * (1.0 - q).ln() } else { 0.0 };
        s + f
    };
    term(xt, nt, p) + term(xc, nc, p - delta)
}

/// Restricted MLE `(P̃_T, P̃_C)` under `P_T − P_C = Δ` from the closed-form
/// cubic root, with a golden-section search when the trigonometric form is
/// unusable.
pub fn mle(xt: u32, nt: u32, xc: u32, nc: u32, delta: f64) -> (f64, f64) {
    let lo = delta.max(0.0);
    let hi = (1.0 + delta).min(1.0);
    let p1 = f64::from(xt) / f64::from(nt);
    let p2 = f64::from(xc) / f64::from(nc);
    let theta = f64::from(nc) / f64::from(nt);
    let d = delta;
    let a = 1.0 + theta;
    let b = -(1.0 + theta + p1 + theta * p2 + d * (theta + 2.0));
    let c = d * d + d * (2.0 * p1 + theta + 1.0) + p1 + theta * p2;
    let e = -p1 * d * (1.0 + d);
    let v = b.powi(3) / (27.0 * a.powi(3)) - b * c / (6.0 * a * a) + e / (2.0 * a);
    let u2 = b * b / (9.0 * a * a) - c / (3.0 * a);
    let mut p = f64::NAN;
    if u2 > 1e-300 {
        let u = v.signum() * u2.sqrt();
        let arg = (v / u.powi(3)).clamp(-1.0, 1.0);
        let w = (std::f64::consts::PI + arg.acos()) / 3.0;
        p = 2.0 * u * w.cos() - b / (3.0 * a);
    }
    if !p.is_finite() || v == 0.0 {
        p = golden(|q| log_lik(xt, nt, xc, nc, delta, q), lo, hi);
    }
    // acos near ±1 costs half the digits; polish on the likelihood score,
    // whose root is simple.
    let (ft, fc) = (f64::from(xt), f64::from(xc));
    let (gt, gc) = (f64::from(nt - xt), f64::from(nc - xc));
    for _ in 0..4 {
        if !(p > lo && p < hi) {
            break;
        }
        let (q, r) = (p - delta, 1.0 - p + delta);
        let s = ft / p - gt / (1.0 - p) + fc / q - gc / r;
        let ds = -ft / (p * p) - gt / (1.0 - p).powi(2) - fc / (q * q) - gc / (r * r);
        let next = p - s / ds;
        if !next.is_finite() {
            break;
        }
        p = next;
    }
    // The trigonometric root is only ~1e-8 accurate at a double root on the
    // boundary of D, so endpoints compete on likelihood.
    let ll = |q: f64| log_lik(xt, nt, xc, nc, delta, q);
    let p = [lo, hi]
        .into_iter()
        .fold(p.clamp(lo, hi), |best, q| if ll(q) > ll(best) { q } else { best });
    (p, (p - delta).clamp(0.0, 1.0))
}

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) >= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// Score z at Δ with the degenerate-variance rule.
pub fn z(xt: u32, nt: u32, xc: u32, nc: u32, delta: f64) -> f64 {
    let (pt, pc) = mle(xt, nt, xc, nc, delta);
    let num = f64::from(xt) / f64::from(nt) - f64::from(xc) / f64::from(nc) - delta;
    let var = pt * (1.0 - pt) / f64::from(nt) + pc * (1.0 - pc) / f64::from(nc);
    if var > 0.0 {
        num / var.sqrt()
    } else if num > 0.0 {
        f64::INFINITY
    } else if num < 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    }
}

pub fn upper_threshold(z_obs: f64) -> f64 {
    if z_obs.is_infinite() {
        z_obs
    } else {
        z_obs - TIE * z_obs.abs().max(1.0)
    }
}

pub fn lower_threshold(z_obs: f64) -> f64 {
    if z_obs.is_infinite() {
        z_obs
    } else {
        z_obs + TIE * z_obs.abs().max(1.0)
    }
}

/// All z-values of the sample space at Δ, indexed `[i][j]`.
pub fn z_table(nt: u32, nc: u32, delta: f64) -> Vec<Vec<f64>> {
    (0..=nt)
        .map(|i| (0..=nc).map(|j| z(i, nt, j, nc, delta)).collect())
        .collect()
}

/// Probability of `{z ≥ thr}` at `(pt, pc)`.
pub fn upper_mass(zs: &[Vec<f64>], thr: f64, pt: f64, pc: f64) -> f64 {
    let nt = (zs.len() - 1) as u32;
    let nc = (zs[0].len() - 1) as u32;
    let mut s = 0.0;
    for i in 0..=nt {
        for j in 0..=nc {
            if zs[i as usize][j as usize] >= thr {
                s += binom(i, nt, pt) * binom(j, nc, pc);
            }
        }
    }
    s
}

pub fn els_pvalue(xt: u32, nt: u32, xc: u32, nc: u32, margin: f64) -> f64 {
    let zs = z_table(nt, nc, -margin);
    let thr = upper_threshold(zs[xt as usize][xc as usize]);
    let (pt, pc) = mle(xt, nt, xc, nc, -margin);
    upper_mass(&zs, thr, pt, pc)
}

/// ES p-value over `points + 1` equally spaced nuisance values plus P̃_T.
pub fn es_pvalue(xt: u32, nt: u32, xc: u32, nc: u32, margin: f64, points: u32) -> f64 {
    let zs = z_table(nt, nc, -margin);
    let thr = upper_threshold(zs[xt as usize][xc as usize]);
    let top = 1.0 - margin;
    let mut best = upper_mass(&zs, thr, mle(xt, nt, xc, nc, -margin).0, mle(xt, nt, xc, nc, -margin).1);
    for k in 0..=points {
        let p = top * f64::from(k) / f64::from(points);
        best = best.max(upper_mass(&zs, thr, p, (p + margin).min(1.0)));
    }
    best
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    // f(a) and f(b) have opposite signs.
    let fa = f(a) > 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if (f(m) > 0.0) == fa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Wilson limits by bisection on `(P − c)² = z² P(1 − P)/N` on each side of
/// `c`; `cc` shifts `c` away from P̂ for the continuity-corrected form.
pub fn wilson(x: u32, n: u32, level: f64, cc: f64) -> (f64, f64) {
    let z = critical(level);
    let ph = f64::from(x) / f64::from(n);
    let nf = f64::from(n);
    let g = |c: f64| move |p: f64| (p - c).powi(2) - z * z * p * (1.0 - p) / nf;
    let lo = if x == 0 {
        0.0
    } else {
        let c = ph - cc / nf;
        if c <= 0.0 { 0.0 } else { bisect(g(c), 0.0, c) }
    };
    let hi = if x == n {
        1.0
    } else {
        let c = ph + cc / nf;
        if c >= 1.0 { 1.0 } else { bisect(g(c), c, 1.0) }
    };
    (lo, hi)
}

fn clamp_ci(lo: f64, hi: f64) -> (f64, f64) {
    (lo.clamp(-1.0, 1.0), hi.clamp(-1.0, 1.0))
}

pub fn wald(xt: u32, nt: u32, xc: u32, nc: u32, level: f64) -> (f64, f64) {
    let z = critical(level);
    let (a, b) = (f64::from(xt) / f64::from(nt), f64::from(xc) / f64::from(nc));
    let se = (a * (1.0 - a) / f64::from(nt) + b * (1.0 - b) / f64::from(nc)).sqrt();
    clamp_ci(a - b - z * se, a - b + z * se)
}

pub fn agresti_caffo(xt: u32, nt: u32, xc: u32, nc: u32, level: f64) -> (f64, f64) {
    let z = critical(level);
    let (mt, mc) = (f64::from(nt + 2), f64::from(nc + 2));
    let (a, b) = (f64::from(xt + 1) / mt, f64::from(xc + 1) / mc);
    let se = (a * (1.0 - a) / mt + b * (1.0 - b) / mc).sqrt();
    clamp_ci(a - b - z * se, a - b + z * se)
}

/// Hauck–Anderson with `N − 1` denominators (`N` for a single-trial arm).
pub fn hauck_anderson(xt: u32, nt: u32, xc: u32, nc: u32, level: f64) -> (f64, f64) {
    let z = critical(level);
    let (a, b) = (f64::from(xt) / f64::from(nt), f64::from(xc) / f64::from(nc));
    let dt = f64::from(nt.saturating_sub(1).max(1));
    let dc = f64::from(nc.saturating_sub(1).max(1));
    let w = z * (a * (1.0 - a) / dt + b * (1.0 - b) / dc).sqrt() + 0.5 / f64::from(nt.min(nc));
    clamp_ci(a - b - w, a - b + w)
}

fn newcombe_from(xt: u32, nt: u32, xc: u32, nc: u32, level: f64, cc: f64) -> (f64, f64) {
    let (lt, ut) = wilson(xt, nt, level, cc);
    let (lc, uc) = wilson(xc, nc, level, cc);
    let (a, b) = (f64::from(xt) / f64::from(nt), f64::from(xc) / f64::from(nc));
    let lo = a - b - ((a - lt).powi(2) + (uc - b).powi(2)).sqrt();
    let hi = a - b + ((ut - a).powi(2) + (b - lc).powi(2)).sqrt();
    (lo, hi)
}

pub fn newcombe(xt: u32, nt: u32, xc: u32, nc: u32, level: f64) -> (f64, f64) {
    newcombe_from(xt, nt, xc, nc, level, 0.0)
}

pub fn newcombe_cc(xt: u32, nt: u32, xc: u32, nc: u32, level: f64) -> (f64, f64) {
    newcombe_from(xt, nt, xc, nc, level, 0.5)
}

pub fn fm(xt: u32, nt: u32, xc: u32, nc: u32, level: f64, margin: f64) -> (f64, f64) {
    let z = critical(level);
    let (pt, pc) = mle(xt, nt, xc, nc, -margin);
    let d = f64::from(xt) / f64::from(nt) - f64::from(xc) / f64::from(nc);
    let w = z * (pt * (1.0 - pt) / f64::from(nt) + pc * (1.0 - pc) / f64::from(nc)).sqrt();
    clamp_ci(d - w, d + w)
}

const EDGE: f64 = 1e-12;

/// Score interval: roots of `z(Δ) = ±z_{α/2}`, or ±1 when the score never
/// reaches the critical value inside (−1, 1).
pub fn als(xt: u32, nt: u32, xc: u32, nc: u32, level: f64) -> (f64, f64) {
    let zc = critical(level);
    let d = (f64::from(xt) / f64::from(nt) - f64::from(xc) / f64::from(nc)).clamp(-1.0 + EDGE, 1.0 - EDGE);
    let zf = |delta: f64| z(xt, nt, xc, nc, delta);
    let lo = if zf(-1.0 + EDGE) < zc {
        -1.0
    } else {
        bisect(|x| zf(x) - zc, -1.0 + EDGE, d)
    };
    let hi = if zf(1.0 - EDGE) > -zc {
        1.0
    } else {
        bisect(|x| zf(x) + zc, d, 1.0 - EDGE)
    };
    (lo, hi)
}

/// ELS interval with rejection sets fixed at the score bounds and the nuisance
/// re-estimated at every δ. Roots are located by scanning outward from the
/// seed in steps of `1e-3` and then bisecting.
pub fn els_ci(xt: u32, nt: u32, xc: u32, nc: u32, level: f64) -> (f64, f64) {
    let half = (1.0 - level) / 2.0;
    let (s_lo, s_hi) = als(xt, nt, xc, nc, level);
    let lim = 1.0 - 1e-9;
    let solve = |seed: f64, upper: bool| -> f64 {
        let seed = seed.clamp(-lim, lim);
        let zs = z_table(nt, nc, seed);
        let z_obs = zs[xt as usize][xc as usize];
        let members: Vec<(u32, u32)> = (0..=nt)
            .flat_map(|i| (0..=nc).map(move |j| (i, j)))
            .filter(|&(i, j)| {
                let v = zs[i as usize][j as usize];
                if upper {
                    v <= lower_threshold(z_obs)
                } else {
                    v >= upper_threshold(z_obs)
                }
            })
            .collect();
        let g = |delta: f64| {
            let (pt, pc) = mle(xt, nt, xc, nc, delta);
            members
                .iter()
                .map(|&(i, j)| binom(i, nt, pt) * binom(j, nc, pc))
                .sum::<f64>()
                - half
        };
        let g0 = g(seed);
        if g0 == 0.0 {
            return seed;
        }
        let mut best: Option<f64> = None;
        for dir in [-1.0, 1.0] {
            let mut prev = seed;
            let mut k = 1;
            loop {
                let cand = (seed + dir * 1e-3 * f64::from(k)).clamp(-lim, lim);
                if (g(cand) > 0.0) != (g0 > 0.0) {
                    let r = bisect(g, prev, cand);
                    if best.map_or(true, |b| (r - seed).abs() < (b - seed).abs()) {
                        best = Some(r);
                    }
                    break;
                }
                if cand == -lim || cand == lim {
                    break;
                }
                prev = cand;
                k += 1;
            }
        }
        best.unwrap_or(if upper { 1.0 } else { -1.0 })
    };
    let lo = solve(s_lo, false);
    let hi = solve(s_hi, true);
    (lo.min(hi), lo.max(hi))
}

pub mod checks;
