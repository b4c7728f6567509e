//! Cylindrical Bessel functions of integer order and their zeros.
//!
//! `J_n` uses three regimes: the ascending series for `x < 1`, Miller's
//! backward recurrence (normalized by `J_0 + 2 Σ J_2k = 1`) for moderate
//! arguments, and the Hankel expansion of `J_0`, `J_1` followed by upward
//! recurrence once `x > max(30, 2n)`. `Y_0`, `Y_1` come from the Neumann series
//! over the Miller sequence below 30 and from the Hankel expansion above.
#![allow(clippy::excessive_precision)]

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_PI, PI};

use serde::{Deserialize, Serialize};

use crate::error::{MpsError, Result};

pub const MAX_ORDER: usize = 200;
pub const MAX_ARGUMENT: f64 = 1.0e5;
pub const MAX_ZERO_INDEX: usize = 500;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const ASYMPTOTIC_THRESHOLD: f64 = 30.0;
const RESCALE_ABOVE: f64 = 1.0e250;

/// A Bessel function value together with its derivative in the argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselEval {
    pub value: f64,
    pub derivative: f64,
}

fn check_j_args(n: usize, x: f64) -> Result<()> {
    if n > MAX_ORDER {
        return Err(MpsError::SpecialFunctionDomain(format!(
            "order {n} exceeds {MAX_ORDER}"
        )));
    }
    if !x.is_finite() || !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(MpsError::SpecialFunctionDomain(format!(
            "argument {x} outside [0, {MAX_ARGUMENT}]"
        )));
    }
    Ok(())
}

/// `J_n(x)` and `J_n'(x)`.
pub fn bessel_j(n: usize, x: f64) -> Result<BesselEval> {
    check_j_args(n, x)?;
    let seq = j_sequence(n + 1, x);
    Ok(eval_from_sequence(&seq, n))
}

/// `J_0(x), …, J_nmax(x)` in one pass.
pub fn bessel_j_orders(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_j_args(nmax, x)?;
    let mut seq = j_sequence(nmax, x);
    seq.truncate(nmax + 1);
    Ok(seq)
}

/// Value and derivative of `J_n` from a sequence holding orders `0..=n+1`.
pub(crate) fn eval_from_sequence(seq: &[f64], n: usize) -> BesselEval {
    let below = if n == 0 { -seq[1] } else { seq[n - 1] };
    BesselEval {
        value: seq[n],
        derivative: 0.5 * (below - seq[n + 1]),
    }
}

/// Unchecked `J_0..=J_nmax` (the returned vector may be longer).
pub(crate) fn j_sequence(nmax: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut out = vec![0.0; nmax + 1];
        out[0] = 1.0;
        return out;
    }
    if x < 1.0 {
        return (0..=nmax).map(|n| j_series(n, x)).collect();
    }
    if x > ASYMPTOTIC_THRESHOLD && x > 2.0 * nmax as f64 {
        let (j0, j1, _, _) = hankel01(x);
        let mut out = Vec::with_capacity(nmax + 2);
        out.push(j0);
        out.push(j1);
        for k in 1..nmax {
            let next = 2.0 * k as f64 / x * out[k] - out[k - 1];
            out.push(next);
        }
        return out;
    }
    miller(x, nmax)
}

/// Ascending series `Σ (-1)^k (x/2)^(2k+n) / (k! (n+k)!)`.
fn j_series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut lead = 1.0;
    for k in 1..=n {
        lead *= half / k as f64;
        if lead == 0.0 {
            return 0.0;
        }
    }
    let q = -half * half;
    let mut term = lead;
    let mut sum = lead;
    for k in 1..60 {
        term *= q / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn miller_start(x: f64, nmax: usize) -> usize {
    let top = x.max(nmax as f64);
    let m = (top + 25.0 + 10.0 * top.cbrt()).ceil() as usize;
    m + (m & 1)
}

/// Normalized backward recurrence; returns orders `0..=max(nmax, start)`.
fn miller(x: f64, nmax: usize) -> Vec<f64> {
    let start = miller_start(x, nmax);
    let mut vals = vec![0.0; start + 2];
    vals[start] = 1.0e-30;
    let two_over_x = 2.0 / x;
    for k in (1..=start).rev() {
        let prev = k as f64 * two_over_x * vals[k] - vals[k + 1];
        vals[k - 1] = prev;
        if prev.abs() > RESCALE_ABOVE {
            for v in &mut vals[k - 1..=start] {
                *v /= RESCALE_ABOVE;
            }
        }
    }
    let mut norm = vals[0];
    for k in (2..=start).step_by(2) {
        norm += 2.0 * vals[k];
    }
    vals.truncate(start + 1);
    for v in &mut vals {
        *v /= norm;
    }
    if vals.len() < nmax + 2 {
        vals.resize(nmax + 2, 0.0);
    }
    vals
}

/// Hankel expansion for orders 0 and 1: `(J_0, J_1, Y_0, Y_1)`.
fn hankel01(x: f64) -> (f64, f64, f64, f64) {
    let (p0, q0) = hankel_pq(0.0, x);
    let (p1, q1) = hankel_pq(4.0, x);
    let (s, c) = x.sin_cos();
    // x - π/4 and x - 3π/4 without rounding x - const.
    let c0 = FRAC_1_SQRT_2 * (c + s);
    let s0 = FRAC_1_SQRT_2 * (s - c);
    let c1 = FRAC_1_SQRT_2 * (s - c);
    let s1 = -FRAC_1_SQRT_2 * (s + c);
    let amp = (FRAC_2_PI / x).sqrt();
    (
        amp * (p0 * c0 - q0 * s0),
        amp * (p1 * c1 - q1 * s1),
        amp * (p0 * s0 + q0 * c0),
        amp * (p1 * s1 + q1 * c1),
    )
}

/// `P` and `Q` series for `mu = 4ν²`, truncated at the smallest term.
fn hankel_pq(mu: f64, x: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        let mag = term.abs();
        if mag > last {
            break;
        }
        last = mag;
        // a_k / x^k enters P (even k) or Q (odd k) with alternating sign.
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if mag < 1e-18 {
            break;
        }
    }
    (p, q)
}

/// `(Y_0(x), Y_1(x))` for `x > 0`, unchecked.
pub(crate) fn y01(x: f64) -> (f64, f64) {
    if x > ASYMPTOTIC_THRESHOLD {
        let (_, _, y0, y1) = hankel01(x);
        return (y0, y1);
    }
    let js = miller(x, 2);
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut even_sum = 0.0;
    let mut diff_sum = 0.0;
    let mut sign = -1.0;
    let mut k = 1;
    while 2 * k + 1 < js.len() {
        let kf = k as f64;
        even_sum += sign * js[2 * k] / kf;
        diff_sum += sign * (js[2 * k - 1] - js[2 * k + 1]) / kf;
        sign = -sign;
        k += 1;
    }
    let y0 = FRAC_2_PI * (log_term * js[0] - 2.0 * even_sum);
    let y1 = FRAC_2_PI * (-js[0] / x + log_term * js[1] + diff_sum);
    (y0, y1)
}

/// `Y_n(x)` and `Y_n'(x)` for `n ∈ {0, 1}`.
pub fn bessel_y(n: usize, x: f64) -> Result<BesselEval> {
    if n > 1 {
        return Err(MpsError::SpecialFunctionDomain(format!(
            "Y_n supplied only for n = 0, 1 (got {n})"
        )));
    }
    if !x.is_finite() || x <= 0.0 || x > MAX_ARGUMENT {
        return Err(MpsError::SpecialFunctionDomain(format!(
            "Y_{n} needs 0 < x <= {MAX_ARGUMENT}, got {x}"
        )));
    }
    let (y0, y1) = y01(x);
    Ok(if n == 0 {
        BesselEval {
            value: y0,
            derivative: -y1,
        }
    } else {
        BesselEval {
            value: y1,
            derivative: y0 - y1 / x,
        }
    })
}

#[derive(Clone, Copy)]
enum ZeroKind {
    Value,
    Derivative,
}

/// `(f, f')` where `f` is `J_n` or `J_n'`.
fn zero_target(kind: ZeroKind, n: usize, x: f64) -> (f64, f64) {
    let seq = j_sequence(n + 1, x);
    let e = eval_from_sequence(&seq, n);
    match kind {
        ZeroKind::Value => (e.value, e.derivative),
        ZeroKind::Derivative => {
            let nf = n as f64;
            let second = -e.derivative / x - (1.0 - nf * nf / (x * x)) * e.value;
            (e.derivative, second)
        }
    }
}

/// Safeguarded Newton inside a sign-change bracket.
fn refine_root(kind: ZeroKind, n: usize, mut lo: f64, mut hi: f64, guess: f64) -> f64 {
    let (mut f_lo, _) = zero_target(kind, n, lo);
    let mut x = guess.clamp(lo, hi);
    for _ in 0..100 {
        let (f, df) = zero_target(kind, n, x);
        if f == 0.0 {
            return x;
        }
        if (f < 0.0) == (f_lo < 0.0) {
            lo = x;
            f_lo = f;
        } else {
            hi = x;
        }
        let newton = x - f / df;
        let next = if df != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs() || hi - lo <= 4.0 * f64::EPSILON * x {
            return next;
        }
        x = next;
    }
    x
}

/// First-zero estimates (`n^{1/3}` expansions) and McMahon's expansion for
/// higher zeros; used only as Newton starting points inside a bracket.
fn asymptotic_guess(kind: ZeroKind, n: usize, l: usize) -> f64 {
    let nf = n as f64;
    let mu = 4.0 * nf * nf;
    if l == 1 && n > 0 {
        let c = nf.cbrt();
        return match kind {
            ZeroKind::Value => nf + 1.855_757_1 * c + 1.033_150 / c,
            ZeroKind::Derivative => nf + 0.808_616_5 * c + 0.072_490 / c,
        };
    }
    match kind {
        ZeroKind::Value => {
            let b = (l as f64 + 0.5 * nf - 0.25) * PI;
            b - (mu - 1.0) / (8.0 * b)
                - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * (8.0 * b).powi(3))
        }
        ZeroKind::Derivative => {
            let lp = if n == 0 { l + 1 } else { l };
            let b = (lp as f64 + 0.5 * nf - 0.75) * PI;
            b - (mu + 3.0) / (8.0 * b)
                - 4.0 * (7.0 * mu * mu + 82.0 * mu - 9.0) / (3.0 * (8.0 * b).powi(3))
        }
    }
}

/// Zeros of `J_n` (or `J_n'`) in `(0, x_max]`, ascending. The scan step is
/// below the minimum zero spacing π, so no sign change is skipped.
fn zeros_up_to(kind: ZeroKind, n: usize, x_max: f64, limit: usize) -> Vec<f64> {
    const STEP: f64 = 1.0;
    let mut roots = Vec::new();
    // J_n and J_n' (n >= 1) have no positive zeros below n; J_0' has none
    // in (0, 3.8).
    let mut a = match (kind, n) {
        (_, 0) => 1.0,
        _ => n as f64,
    };
    let (mut fa, _) = zero_target(kind, n, a);
    while roots.len() < limit && a < x_max + STEP {
        let b = a + STEP;
        let (fb, _) = zero_target(kind, n, b);
        if fa == 0.0 {
            roots.push(a);
        } else if (fa < 0.0) != (fb < 0.0) && fb != 0.0 {
            let guess = asymptotic_guess(kind, n, roots.len() + 1);
            let guess = if guess > a && guess < b {
                guess
            } else {
                0.5 * (a + b)
            };
            roots.push(refine_root(kind, n, a, b, guess));
        }
        a = b;
        fa = fb;
    }
    roots.retain(|&r| r <= x_max);
    roots.truncate(limit);
    roots
}

fn check_zero_args(n: usize, l: usize) -> Result<()> {
    if n > MAX_ORDER || l == 0 || l > MAX_ZERO_INDEX {
        return Err(MpsError::SpecialFunctionDomain(format!(
            "zero index (n={n}, l={l}) outside n <= {MAX_ORDER}, 1 <= l <= {MAX_ZERO_INDEX}"
        )));
    }
    Ok(())
}

fn nth_zero(kind: ZeroKind, n: usize, l: usize) -> f64 {
    // Zeros are spaced by more than π and the l-th lies below
    // n + (l + 2) π + 2 n^{1/3}.
    let bound = n as f64 + (l as f64 + 2.0) * PI + 2.0 * (n as f64).cbrt() + 4.0;
    zeros_up_to(kind, n, bound, l)[l - 1]
}

/// The `l`-th positive zero `j_{n,l}` of `J_n`.
pub fn bessel_j_zero(n: usize, l: usize) -> Result<f64> {
    check_zero_args(n, l)?;
    Ok(nth_zero(ZeroKind::Value, n, l))
}

/// The `l`-th positive zero `μ_{n,l}` of `J_n'` (the zero at the origin is
/// never counted).
pub fn bessel_jprime_zero(n: usize, l: usize) -> Result<f64> {
    check_zero_args(n, l)?;
    Ok(nth_zero(ZeroKind::Derivative, n, l))
}

/// All positive zeros of `J_n` not exceeding `x_max`.
pub fn bessel_j_zeros_below(n: usize, x_max: f64) -> Result<Vec<f64>> {
    check_j_args(n, x_max)?;
    Ok(zeros_up_to(ZeroKind::Value, n, x_max, usize::MAX))
}

/// All positive zeros of `J_n'` not exceeding `x_max`.
pub fn bessel_jprime_zeros_below(n: usize, x_max: f64) -> Result<Vec<f64>> {
    check_j_args(n, x_max)?;
    Ok(zeros_up_to(ZeroKind::Derivative, n, x_max, usize::MAX))
}

#[cfg(test)]
mod tests {
    use super::*;

    // (n, x, J_n(x), J_n'(x)) from 30-digit reference evaluations.
    const J_TABLE: &[(usize, f64, f64, f64)] = &[
        (0, 0.5, 0.938469807240812904, -0.242268457674873886),
        (1, 0.5, 0.242268457674873886, 0.453932891891065131),
        (0, 3.0, -0.260051954901933438, -0.339058958525936459),
        (5, 2.5, 0.0195016251345032199, 0.0347786297852487929),
        (20, 15.0, 0.00736023407922348526, 0.00675986098861627266),
        (40, 7.0, 5.25838181145063534e-27, 2.9595771368765608e-26),
        (0, 45.0, 0.115818670673256324, -0.0283488543764245275),
        (3, 100.0, 0.0762842017203319434, -0.0238172833961153239),
        (150, 120.0, 3.5782869977666015e-8, 2.70933377296899173e-8),
        (200, 250.0, -0.00590216791523396927, -0.03889762471858861),
        (7, 100000.0, -0.00184634490143135432, 0.0017196627519824769),
        (
            100,
            10000.0,
            -0.00797651631139337417,
            0.000201257009943793774,
        ),
        (60, 59.5, 0.101058965390464579, 0.0262040557507599247),
        (2, 29.0, 0.148326985687071309, -0.00329524272949828732),
        (10, 31.0, -0.134419840857917826, 0.0593961825258891454),
    ];

    const Y_TABLE: &[(usize, f64, f64)] = &[
        (0, 0.5, -0.444518733506706557),
        (1, 0.5, -1.47147239267024307),
        (0, 3.0, 0.376850010012790382),
        (1, 7.5, -0.259128510486116252),
        (0, 17.0, -0.0926371984423236925),
        (1, 25.0, -0.0988299647832374101),
        (0, 29.9, -0.108266517021775514),
        (0, 31.0, -0.133832660503644325),
        (1, 80.0, 0.0693959137845880473),
        (0, 0.001, -4.47141661137592327),
        (1, 0.001, -636.622167231139428),
        (0, 12.0, -0.225237312634361434),
        (1, 19.0, -0.149560113862653292),
        (0, 250.0, -0.0432168454403662677),
    ];

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn j_matches_reference_table() {
        for &(n, x, v, d) in J_TABLE {
            let e = bessel_j(n, x).unwrap();
            assert!(rel(e.value, v) < 1e-12, "J_{n}({x}) = {} vs {v}", e.value);
            assert!(
                rel(e.derivative, d) < 1e-12,
                "J_{n}'({x}) = {} vs {d}",
                e.derivative
            );
        }
    }

    #[test]
    fn y_matches_reference_table() {
        for &(n, x, v) in Y_TABLE {
            let e = bessel_y(n, x).unwrap();
            assert!(rel(e.value, v) < 1e-12, "Y_{n}({x}) = {} vs {v}", e.value);
        }
    }

    #[test]
    fn values_at_origin() {
        let j0 = bessel_j(0, 0.0).unwrap();
        assert_eq!((j0.value, j0.derivative), (1.0, 0.0));
        let j1 = bessel_j(1, 0.0).unwrap();
        assert_eq!(j1.value, 0.0);
        assert!((j1.derivative - 0.5).abs() < 1e-16);
    }

    #[test]
    fn y0_derivative_is_minus_y1() {
        for x in [1.0, 2.0, 5.0] {
            let y0 = bessel_y(0, x).unwrap();
            let y1 = bessel_y(1, x).unwrap();
            assert!((y0.derivative + y1.value).abs() < 1e-12 * y1.value.abs());
        }
    }

    #[test]
    fn wronskian() {
        for x in [0.5, 3.0, 20.0] {
            let j0 = bessel_j(0, x).unwrap().value;
            let j1 = bessel_j(1, x).unwrap().value;
            let y0 = bessel_y(0, x).unwrap().value;
            let y1 = bessel_y(1, x).unwrap().value;
            let w = j1 * y0 - j0 * y1;
            let want = 2.0 / (PI * x);
            assert!(rel(w, want) < 1e-11, "x={x}: {w} vs {want}");
        }
    }

    #[test]
    fn y0_regular_part_matches_ascending_series() {
        // Y_0 - (2/π)(ln(x/2)+γ) J_0 = (2/π) Σ_{k>=1} (-1)^{k+1} H_k (x²/4)^k / (k!)²
        let x: f64 = 0.5;
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut harmonic = 0.0;
        let mut series = 0.0;
        for k in 1..=40 {
            let kf = k as f64;
            term *= q / (kf * kf);
            harmonic += 1.0 / kf;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series += sign * harmonic * term;
        }
        let oracle = FRAC_2_PI * series;
        let j0 = bessel_j(0, x).unwrap().value;
        let got = bessel_y(0, x).unwrap().value - FRAC_2_PI * ((0.5 * x).ln() + EULER_GAMMA) * j0;
        assert!((got - oracle).abs() < 1e-14, "{got} vs {oracle}");
    }

    /// Plain ascending series with `terms` terms; independent of the
    /// implementation's regime selection.
    fn series_j0(x: f64, terms: usize) -> f64 {
        let q = -0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..terms {
            term *= q / ((k * k) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn first_zero_of_j0_by_bisection_oracle() {
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if series_j0(mid, 50) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!((oracle - 2.404825557695773).abs() < 1e-14);
        let z = bessel_j_zero(0, 1).unwrap();
        assert!(rel(z, oracle) < 1e-12);
        assert!(bessel_j(0, z).unwrap().value.abs() < 1e-12);
        assert!(series_j0(z, 50).abs() < 1e-12);
    }

    #[test]
    fn first_zero_of_j1_prime_by_bisection_oracle() {
        // J_1' = J_0 - J_1 / x.
        let f = |x: f64| {
            let s = j_sequence(2, x);
            s[0] - s[1] / x
        };
        let (mut lo, mut hi) = (1.5, 2.5);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (f(lo) > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!((oracle - 1.841183781340659).abs() < 1e-14);
        assert!(rel(bessel_jprime_zero(1, 1).unwrap(), oracle) < 1e-12);
    }

    #[test]
    fn reference_zeros() {
        assert!(rel(bessel_j_zero(0, 5).unwrap(), 14.9309177084877859) < 1e-13);
        assert!(rel(bessel_jprime_zero(5, 2).unwrap(), 10.5198608737723081) < 1e-13);
        assert!(rel(bessel_jprime_zero(20, 1).unwrap(), 22.2191464829013010) < 1e-13);
        assert!(rel(bessel_jprime_zero(0, 3).unwrap(), 10.1734681350627220) < 1e-13);
    }

    #[test]
    fn zeros_are_zeros() {
        assert!(
            bessel_j(0, bessel_j_zero(0, 5).unwrap())
                .unwrap()
                .value
                .abs()
                < 1e-12
        );
        for (n, l) in [(0, 3), (5, 2), (20, 1)] {
            let mu = bessel_jprime_zero(n, l).unwrap();
            assert!(
                bessel_j(n, mu).unwrap().derivative.abs() < 1e-12,
                "({n},{l})"
            );
        }
    }

    #[test]
    fn zero_spacing_exceeds_pi() {
        // For n = 0 the gaps approach π from below (j_{0,2} - j_{0,1} ≈ 3.115).
        for n in [0, 1, 7, 30, 120] {
            let zs = bessel_j_zeros_below(n, 400.0).unwrap();
            assert!(zs.len() > 5);
            let min_gap = if n == 0 { 3.1 } else { PI };
            for w in zs.windows(2) {
                assert!(w[1] - w[0] > min_gap, "n={n}: {w:?}");
            }
            let ds = bessel_jprime_zeros_below(n, 400.0).unwrap();
            for w in ds.windows(2) {
                assert!(w[1] - w[0] > PI, "n={n}: {w:?}");
            }
        }
    }

    #[test]
    fn whispering_gallery_derivative_zero_growth() {
        for n in 5..=60 {
            let mu = bessel_jprime_zero(n, 1).unwrap();
            let nf = n as f64;
            let excess = (mu - nf) / nf.cbrt();
            assert!((0.5..=1.5).contains(&excess), "n={n}: {excess}");
        }
        let big = bessel_jprime_zero(200, 1).unwrap();
        assert!((big / 200.0 - 1.0) < 0.03);
    }

    #[test]
    fn zero_interlacing() {
        for n in 0..12 {
            for l in 1..6 {
                let j = bessel_j_zero(n, l).unwrap();
                let j_next_order = bessel_j_zero(n + 1, l).unwrap();
                let j_next_index = bessel_j_zero(n, l + 1).unwrap();
                assert!(j < j_next_order && j_next_order < j_next_index);
                // The excluded zero of J_0' at the origin shifts the index for n = 0.
                let (mu, mu_next) = if n == 0 {
                    let below = if l == 1 {
                        0.0
                    } else {
                        bessel_jprime_zero(0, l - 1).unwrap()
                    };
                    (below, bessel_jprime_zero(0, l).unwrap())
                } else {
                    (
                        bessel_jprime_zero(n, l).unwrap(),
                        bessel_jprime_zero(n, l + 1).unwrap(),
                    )
                };
                assert!(mu < j && j < mu_next, "n={n} l={l}");
            }
        }
    }

    #[test]
    fn high_index_zero() {
        let z = bessel_j_zero(3, 500).unwrap();
        assert!(bessel_j(3, z).unwrap().value.abs() < 1e-12);
        let approx = (500.0 + 1.5 - 0.25) * PI;
        assert!((z - approx).abs() < 0.01);
    }

    #[test]
    fn out_of_range_arguments_are_rejected() {
        assert!(bessel_j(201, 1.0).is_err());
        assert!(bessel_j(0, -1.0).is_err());
        assert!(bessel_j(0, 2.0e5).is_err());
        assert!(bessel_y(0, 0.0).is_err());
        assert!(bessel_y(2, 1.0).is_err());
        assert!(bessel_j_zero(0, 0).is_err());
        assert!(bessel_jprime_zero(0, 501).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn three_term_recurrence(n in 1usize..150, x in 0.05f64..500.0) {
                let s = bessel_j_orders(n + 1, x).unwrap();
                let lhs = s[n - 1] + s[n + 1];
                let rhs = 2.0 * n as f64 / x * s[n];
                let scale = s[n - 1].abs().max(s[n + 1].abs()).max(1e-300);
                prop_assert!((lhs - rhs).abs() <= 1e-10 * scale,
                    "n={} x={} lhs={} rhs={}", n, x, lhs, rhs);
            }

            #[test]
            fn j_bounded_by_one(n in 0usize..200, x in 0.0f64..1.0e4) {
                prop_assert!(bessel_j(n, x).unwrap().value.abs() <= 1.0);
            }
        }
    }
}
