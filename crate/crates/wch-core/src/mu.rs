//! Power-series coefficients of the odd solution of the degenerate
//! fourth-order tilt equation
//!
//!   (z^4-4)^2 P'''' + 12 z^3 (z^4-4) P''' + 2 z^2 (13 z^4 - 28) P''
//!     - 16 z (z^4-2) P' + (48 - 20 z^4) P = -144 z + 54 z^5,
//!
//! written as P(z) = sum_j mu_j z^(2j+1). Collecting the coefficient of
//! z^(2n+1) yields a three-term recursion in the mu_j with two free
//! parameters mu_0, mu_1; decay of P at the double characteristic points
//! z = +/- sqrt(2) forces a unique pair, computed here in closed form.
//!
//! Three independent evaluation paths are provided and cross-checked:
//! the collapsed floating-point recursion, Gamma-function closed forms,
//! and an exact-rational oracle that multiplies out the equation term by
//! term with big-rational arithmetic and never sees the collapsed
//! coefficient formulas.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use libm::{exp, log, sqrt};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::specfun::{gamma_fn, gamma_ln};

/// Gamma(3/4); pinned for use in derived constants and verified against the
/// Lanczos evaluation in the tests.
pub const GAMMA_3_4: f64 = 1.2254167024651776;

/// The unique odd-series slope mu_1 = pi^2 / (8 Gamma(3/4)^4) for which the
/// series decays at the characteristic points.
pub fn mu1_closed() -> f64 {
    let g = GAMMA_3_4;
    PI * PI / (8.0 * g * g * g * g)
}

/// Scale of the even-index coefficient family, 3 pi sqrt(2) / (32 Gamma(3/4)^2).
pub fn even_family_scale() -> f64 {
    3.0 * PI * sqrt(2.0) / (32.0 * GAMMA_3_4 * GAMMA_3_4)
}

/// Scale of the odd-index coefficient family, 3 sqrt(2) Gamma(3/4)^2 / (8 pi).
pub fn odd_family_scale() -> f64 {
    3.0 * sqrt(2.0) * GAMMA_3_4 * GAMMA_3_4 / (8.0 * PI)
}

fn fall1(j: i64) -> i64 {
    2 * j + 1
}
fn fall2(j: i64) -> i64 {
    (2 * j + 1) * (2 * j)
}
fn fall3(j: i64) -> i64 {
    (2 * j + 1) * (2 * j) * (2 * j - 1)
}
fn fall4(j: i64) -> i64 {
    (2 * j + 1) * (2 * j) * (2 * j - 1) * (2 * j - 2)
}

/// Weight of mu_j two steps below the diagonal in the collected recursion.
pub fn coeff_low(j: i64) -> f64 {
    (fall4(j) + 12 * fall3(j) + 26 * fall2(j) - 16 * fall1(j) - 20) as f64
}

/// Weight of mu_j on the diagonal.
pub fn coeff_mid(j: i64) -> f64 {
    (-8 * fall4(j) - 48 * fall3(j) - 56 * fall2(j) + 32 * fall1(j) + 48) as f64
}

/// Weight of mu_j two steps above the diagonal (the pivot of the recursion).
pub fn coeff_high(j: i64) -> f64 {
    (16 * fall4(j)) as f64
}

fn rhs_at(n: i64) -> f64 {
    match n {
        0 => -144.0,
        2 => 54.0,
        _ => 0.0,
    }
}

/// Floating-point three-term recursion seeded with (mu_0, mu_1); returns
/// mu_0 ..= mu_{n_max}.
pub fn recurrence_sequence(n_max: usize, mu0: f64, mu1: f64) -> Vec<f64> {
    let mut mus = vec![0.0; n_max + 1];
    mus[0] = mu0;
    if n_max >= 1 {
        mus[1] = mu1;
    }
    for n in 0..=(n_max as i64 - 2).max(-1) {
        let low = if n >= 2 { coeff_low(n - 2) * mus[(n - 2) as usize] } else { 0.0 };
        let mid = coeff_mid(n) * mus[n as usize];
        mus[(n + 2) as usize] = (rhs_at(n) - low - mid) / coeff_high(n + 2);
    }
    mus
}

/// Closed form for mu_{2m}, m >= 1 (the m = 0 member, mu_0, vanishes).
pub fn even_closed(m: usize) -> f64 {
    let m = m as f64;
    -even_family_scale()
        * exp(gamma_ln(m - 0.25) - gamma_ln(m + 1.25) - m * log(4.0))
}

/// Closed form for mu_{2m+1}, m >= 0, proportional to mu_1.
pub fn odd_closed(m: usize, mu1: f64) -> f64 {
    let m = m as f64;
    odd_family_scale() * mu1
        * exp(gamma_ln(m + 0.25) - gamma_ln(m + 1.75) - m * log(4.0))
}

/// Closed-form sequence mu_0 ..= mu_{n_max} at the decaying parameter pair,
/// built with running Gamma-ratio products (no special-function calls).
pub fn closed_sequence(n_max: usize) -> Vec<f64> {
    let mut mus = vec![0.0; n_max + 1];
    if n_max >= 1 {
        mus[1] = mu1_closed();
    }
    // Even family: mu_{2m} = -ce * Gamma(m-1/4) / (4^m Gamma(m+5/4)).
    let ce = even_family_scale();
    let mut r = exp(gamma_ln(0.75) - gamma_ln(2.25)) / 4.0;
    let mut m = 1usize;
    while 2 * m <= n_max {
        mus[2 * m] = -ce * r;
        r *= (m as f64 - 0.25) / (m as f64 + 1.25) / 4.0;
        m += 1;
    }
    // Odd family: mu_{2m+1} = co * mu_1 * Gamma(m+1/4) / (4^m Gamma(m+7/4));
    // the m = 0 member reduces to mu_1 itself because
    // co * Gamma(1/4)/Gamma(7/4) = 1 by the reflection formula.
    let co = odd_family_scale() * mu1_closed();
    let mut r = exp(gamma_ln(0.25) - gamma_ln(1.75));
    let mut m = 0usize;
    while 2 * m + 1 <= n_max {
        mus[2 * m + 1] = co * r;
        r *= (m as f64 + 0.25) / (m as f64 + 1.75) / 4.0;
        m += 1;
    }
    mus
}

/// Exact coefficient as a linear form p*mu_0 + q*mu_1 + r over the rationals.
#[derive(Clone, PartialEq)]
pub struct LinearForm {
    pub p: BigRational,
    pub q: BigRational,
    pub r: BigRational,
}

impl LinearForm {
    fn zero() -> Self {
        LinearForm { p: BigRational::zero(), q: BigRational::zero(), r: BigRational::zero() }
    }

    fn scaled_add(&mut self, c: i64, other: &LinearForm) {
        let c = BigRational::from_integer(BigInt::from(c));
        self.p += &c * &other.p;
        self.q += &c * &other.q;
        self.r += &c * &other.r;
    }

    fn div_assign_int(&mut self, c: i64) {
        let c = BigRational::from_integer(BigInt::from(c));
        self.p /= &c;
        self.q /= &c;
        self.r /= &c;
    }

    pub fn eval(&self, mu0: f64, mu1: f64) -> f64 {
        self.p.to_f64().unwrap() * mu0 + self.q.to_f64().unwrap() * mu1
            + self.r.to_f64().unwrap()
    }
}

fn conv_int(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// The five polynomial coefficients of the tilt equation, multiplied out
/// literally, paired with the derivative order they act on.
pub fn term_polynomials() -> [(Vec<i64>, u32); 5] {
    let quart = vec![-4i64, 0, 0, 0, 1]; // z^4 - 4
    [
        (conv_int(&quart, &quart), 4),                       // (z^4-4)^2 P''''
        (conv_int(&[0, 0, 0, 12], &quart), 3),               // 12 z^3 (z^4-4) P'''
        (conv_int(&[0, 0, 2], &[-28, 0, 0, 0, 13]), 2),      // 2 z^2 (13z^4-28) P''
        (conv_int(&[0, -16], &[-2, 0, 0, 0, 1]), 1),         // -16 z (z^4-2) P'
        (vec![48, 0, 0, 0, -20], 0),                         // (48-20z^4) P
    ]
}

fn falling(p: i64, d: u32) -> i64 {
    (0..d as i64).map(|i| p - i).product()
}

/// Exact coefficient of z^e of the equation's left side, using the series
/// coefficients supplied (entries beyond the slice contribute nothing).
fn lhs_coefficient(e: usize, mus: &[LinearForm], terms: &[(Vec<i64>, u32)]) -> LinearForm {
    let mut acc = LinearForm::zero();
    for (tp, d) in terms {
        for (a, &ta) in tp.iter().enumerate() {
            if ta == 0 || a > e {
                continue;
            }
            // Exponent in the d-th derivative of the series: 2j+1-d = e-a.
            let target = (e - a) as i64 + *d as i64 - 1;
            if target < 0 || target % 2 != 0 {
                continue;
            }
            let j = (target / 2) as usize;
            if j >= mus.len() {
                continue;
            }
            let w = falling(2 * j as i64 + 1, *d);
            if w != 0 {
                acc.scaled_add(ta * w, &mus[j]);
            }
        }
    }
    acc
}

fn rhs_rational(e: usize) -> BigRational {
    let v: i64 = match e {
        1 => -144,
        5 => 54,
        _ => 0,
    };
    BigRational::from_integer(BigInt::from(v))
}

/// Exact-rational series oracle: mu_0 ..= mu_{j_max} as linear forms in
/// (mu_0, mu_1), produced by multiplying out the equation polynomial by
/// polynomial and then re-verified against every collected coefficient.
/// Returns an error if any equation fails to close exactly.
pub fn exact_series(j_max: usize) -> Result<Vec<LinearForm>, &'static str> {
    assert!(j_max >= 2);
    let terms = term_polynomials();
    let mut mus: Vec<LinearForm> = Vec::with_capacity(j_max + 1);
    let one = BigRational::from_integer(BigInt::from(1));
    mus.push(LinearForm { p: one.clone(), q: BigRational::zero(), r: BigRational::zero() });
    mus.push(LinearForm { p: BigRational::zero(), q: one, r: BigRational::zero() });

    for n in 0..=(j_max - 2) {
        let e = 2 * n + 1;
        // Everything except the not-yet-known mu_{n+2}; its multiplier is the
        // constant term of the quartic-squared polynomial times the falling
        // factorial of the fourth derivative.
        let known = lhs_coefficient(e, &mus, &terms);
        let pivot = terms[0].0[0] * falling(2 * (n + 2) as i64 + 1, 4);
        if pivot == 0 {
            return Err("vanishing pivot in series recursion");
        }
        let mut next = LinearForm::zero();
        next.r = rhs_rational(e);
        next.scaled_add(-1, &known);
        next.div_assign_int(pivot);
        mus.push(next);
    }

    for n in 0..=(j_max - 2) {
        let e = 2 * n + 1;
        let lhs = lhs_coefficient(e, &mus, &terms);
        if lhs.p != BigRational::zero()
            || lhs.q != BigRational::zero()
            || lhs.r != rhs_rational(e)
        {
            return Err("series coefficients do not satisfy the defining equation");
        }
    }
    Ok(mus)
}

/// Solution of the two decay conditions at the characteristic points.
pub struct EndpointSolution {
    pub mu0: f64,
    pub mu1: f64,
    /// Determinant of the 2x2 system; bounded away from zero, so the
    /// decaying parameter pair is unique.
    pub det: f64,
}

/// Imposing decay of the resummed series at z = sqrt(2) kills, order by
/// order, a simple pole and its derivative; the two resulting linear
/// conditions on (mu_0, mu_1) are solved here by Cramer's rule.
pub fn solve_endpoint_system() -> EndpointSolution {
    let g2 = GAMMA_3_4 * GAMMA_3_4;
    let sp = sqrt(PI);
    let s2 = sqrt(2.0);
    // a1 + b1 mu0 + c1 mu1 = 0 and a2 + b2 mu0 + c2 mu1 = 0.
    let a1 = -3.0 * PI * s2 / (8.0 * g2);
    let b1 = -1.0 / sp;
    let c1 = 3.0 * s2 * g2 / PI;
    let a2 = 9.0 * PI * s2 / (16.0 * g2);
    let b2 = 2.0 / sp;
    let c2 = -9.0 * s2 * g2 / (2.0 * PI);
    let det = b1 * c2 - b2 * c1;
    EndpointSolution {
        mu0: (-a1 * c2 + a2 * c1) / det,
        mu1: (-b1 * a2 + b2 * a1) / det,
        det,
    }
}

/// Gap Gamma(m+1/4)/Gamma(m+7/4) - Gamma(m+3/4)/Gamma(m+9/4), nonnegative
/// for every m >= 0; this is what makes consecutive coefficient pairs of the
/// resummed series partial sums one-signed and hence the tilt one-signed
/// against the curvature.
pub fn summand_gap(m: usize) -> f64 {
    let m = m as f64;
    exp(gamma_ln(m + 0.25) - gamma_ln(m + 1.75)) - exp(gamma_ln(m + 0.75) - gamma_ln(m + 2.25))
}

/// Alternative normalization (37 - 40 mu_0)/960 of the quintic coefficient
/// that circulates alongside the equation; it does not agree with mu_2 and
/// is reported for comparison only, never used downstream.
pub fn quintic_coeff_alt(mu0: f64) -> f64 {
    (37.0 - 40.0 * mu0) / 960.0
}

/// Convenience: Gamma(3/4) via the Lanczos path (for cross-checks).
pub fn gamma_three_quarters_runtime() -> f64 {
    gamma_fn(0.75)
}
