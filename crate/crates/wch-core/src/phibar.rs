//! High-accuracy evaluator for the periodic tilt profile: the unique
//! symmetric periodic solution of
//!
//!   L0 phibar = gbar,   gbar = (9/8) k^5 - 9 k (k')^2,
//!
//! where L0 is the linearized operator of [`crate::linwill`] and k the
//! periodic curvature. The tilt is the composition of the curvature with
//! the decaying power series of [`crate::mu`]; the series converges slowly
//! near the curvature extrema (the argument approaches the radius of
//! convergence there), so the evaluator is hybrid:
//!
//! * away from the extrema, the resummed power series in |k|/sqrt(2),
//!   with term count chosen adaptively from the distance to the radius;
//! * within 0.42 of an extremum, a local Taylor solution of the ODE
//!   matched to the series at the seam.
//!
//! The jet carries derivatives through order four, so the defining ODE can
//! be checked pointwise with no differentiation noise.

use alloc::vec;
use alloc::vec::Vec;
use libm::{exp, fabs, log, round, sqrt};

use crate::curve::quarter_period;
use crate::mu;
use crate::specfun::{gamma_ln, jacobi_sn_cn_dn};

/// Length of the coefficient family used for the resummed series.
const MARR: usize = 2000;
/// Hard cap on adaptive term count (well below MARR so the tail that the
/// adaptive rule ignores is itself fully resolved).
const MCAP_EVAL: usize = MARR - 700;
/// Order of the local Taylor solution at the curvature extrema.
const NLOC: usize = 64;
/// Half-width of the window around each extremum served by the local jet.
const LOCAL_WINDOW: f64 = 0.42;
/// Seam offset (from the extremum) where local and series evaluations are
/// matched to determine the two free local coefficients.
const MATCH_OFFSET: f64 = -0.5;

/// Right-hand side of the tilt equation from pointwise curvature data.
pub fn gbar(k: f64, kp: f64) -> f64 {
    1.125 * k * k * k * k * k - 9.0 * k * kp * kp
}

fn d_dx(c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; c.len()];
    for i in 1..c.len() {
        out[i - 1] = c[i] * i as f64;
    }
    out
}

fn shift_up(c: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; c.len()];
    for i in n..c.len() {
        out[i] = c[i - n];
    }
    out
}

/// First n+1 coefficients of the product of two power series.
fn conv_trunc(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for i in 0..=n.min(a.len() - 1) {
        if a[i] == 0.0 {
            continue;
        }
        for j in 0..=(n - i).min(b.len() - 1) {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

fn horner(c: &[f64], x: f64) -> f64 {
    let mut s = 0.0;
    for &ci in c.iter().rev() {
        s = s * x + ci;
    }
    s
}

pub struct TiltEvaluator {
    period: f64,
    quarter: f64,
    /// (A, B) coefficient pairs per derivative level: level l evaluates the
    /// l-th s-derivative as sgn*A(x) + k' * B(x) with x = |k|/sqrt(2).
    levels: Vec<(Vec<f64>, Vec<f64>)>,
    /// Taylor coefficients (and derivative series) of the solution around a
    /// curvature extremum.
    local: [Vec<f64>; 5],
    /// Value at the extremum s = T/4 (most negative point of the profile).
    pub flat_value: f64,
    /// Second derivative at the extremum.
    pub flat_second: f64,
    /// Condition estimate of the 2x2 seam-matching system.
    pub match_condition: f64,
}

impl TiltEvaluator {
    pub fn new() -> Self {
        let quarter = quarter_period();
        let period = 4.0 * quarter;
        let levels = build_levels();
        let (local, flat_value, flat_second, match_condition) =
            build_local(&levels, quarter, period);
        TiltEvaluator { period, quarter, levels, local, flat_value, flat_second, match_condition }
    }

    /// Value and first four s-derivatives at arbitrary s.
    pub fn jet(&self, s: f64) -> [f64; 5] {
        let sr = s - round(s / self.period) * self.period;
        let u_plus = sr - self.quarter;
        if fabs(u_plus) <= LOCAL_WINDOW {
            return self.local_jet(u_plus, 1.0);
        }
        let u_minus = sr + self.quarter;
        if fabs(u_minus) <= LOCAL_WINDOW {
            // The profile is odd and the curvature even about each extremum,
            // so the jet at -T/4 + u is the negated jet at T/4 + u.
            return self.local_jet(u_minus, -1.0);
        }
        self.series_jet(sr)
    }

    pub fn value(&self, s: f64) -> f64 {
        self.jet(s)[0]
    }

    fn local_jet(&self, u: f64, sign: f64) -> [f64; 5] {
        let mut out = [0.0; 5];
        for (d, c) in self.local.iter().enumerate() {
            out[d] = sign * horner(c, u);
        }
        out
    }

    /// Resummed-series jet; valid (and accurate) away from the extrema.
    pub fn series_jet(&self, s: f64) -> [f64; 5] {
        let (sn, cn, dn) = jacobi_sn_cn_dn(s + self.quarter, 0.5);
        let kp = -sqrt(2.0) * sn * dn;
        let x = fabs(cn);
        let sgn = if cn >= 0.0 { 1.0 } else { -1.0 };
        let mut out = [0.0; 5];
        for (l, (a, b)) in self.levels.iter().enumerate() {
            out[l] = sgn * eval_adaptive(a, x) + kp * eval_adaptive(b, x);
        }
        out
    }
}

impl Default for TiltEvaluator {
    fn default() -> Self {
        Self::new()
    }
}

/// Evaluates a coefficient array at x in [0, 1) keeping only as many terms
/// as the geometric-envelope bound x^(4M) needs for full accuracy.
fn eval_adaptive(c: &[f64], x: f64) -> f64 {
    if c.len() < 2 || x < 1e-300 {
        return 0.0;
    }
    let m = if x < 1.0 {
        let lam4 = -4.0 * log(x);
        ((38.0 / lam4 + 8.0) as usize).clamp(32, MCAP_EVAL)
    } else {
        MCAP_EVAL
    };
    let p = (4 * m + 3).min(c.len() - 1);
    horner(&c[..=p], x)
}

/// Coefficient families for the tilt and its first four s-derivatives.
///
/// Level 0 is the decaying series composed with the curvature, written in
/// x = |k|/sqrt(2): nonzero entries sit at exponents 1 mod 4 (even-index
/// family) and 3 mod 4 (odd-index family), with the 4^m rescaling absorbed.
/// Each further level applies d/ds using dk/ds = k', dk'/ds = -k^3/2 and
/// the first integral (k')^2 = 1 - k^4/4, which closes the family in the
/// representation sgn*A(x) + k'*B(x).
fn build_levels() -> Vec<(Vec<f64>, Vec<f64>)> {
    let pmax = 4 * MARR + 8;
    let s2 = sqrt(2.0);
    let ce = mu::even_family_scale();
    let co = mu::odd_family_scale();
    let mu1 = mu::mu1_closed();

    let mut nu = vec![0.0; pmax + 1];
    let mut r = exp(gamma_ln(0.75) - gamma_ln(2.25));
    for j in 1..MARR {
        nu[4 * j + 1] = -ce * r * s2;
        r *= (j as f64 - 0.25) / (j as f64 + 1.25);
    }
    let mut r = exp(gamma_ln(0.25) - gamma_ln(1.75));
    for j in 0..MARR {
        nu[4 * j + 3] = co * mu1 * r * 2.0 * s2;
        r *= (j as f64 + 0.25) / (j as f64 + 1.75);
    }

    let zero = vec![0.0; pmax + 1];
    let mut levels: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(5);
    levels.push((nu, zero));
    for _ in 0..4 {
        let (a, b) = levels.last().unwrap();
        let bk = d_dx(b);
        let an: Vec<f64> = {
            let sb3 = shift_up(b, 3);
            let sbk4 = shift_up(&bk, 4);
            (0..=pmax).map(|i| -s2 * sb3[i] + (bk[i] - sbk4[i]) / s2).collect()
        };
        let bn: Vec<f64> = d_dx(a).iter().map(|v| v / s2).collect();
        levels.push((an, bn));
    }
    levels
}

/// Taylor solution of L0 phi = gbar around the curvature extremum, with the
/// two even free coefficients matched to the resummed series at the seam.
fn build_local(
    levels: &[(Vec<f64>, Vec<f64>)],
    quarter: f64,
    _period: f64,
) -> ([Vec<f64>; 5], f64, f64, f64) {
    // Curvature Taylor series at the extremum: K'' = -K^3/2, K(0) = -sqrt(2).
    let n = NLOC;
    let mut ks = vec![0.0; n + 1];
    ks[0] = -sqrt(2.0);
    for j in 0..n - 1 {
        let k2 = conv_trunc(&ks, &ks, j);
        let k3 = conv_trunc(&k2, &ks, j);
        ks[j + 2] = -0.5 * k3[j] / ((j + 2) as f64 * (j + 1) as f64);
    }
    let kps = d_dx(&ks);

    let p1: Vec<f64> = conv_trunc(&ks, &kps, n).iter().map(|v| 5.0 * v).collect();
    let k2 = conv_trunc(&ks, &ks, n);
    let p2: Vec<f64> = k2.iter().map(|v| 2.5 * v).collect();
    let k4 = conv_trunc(&k2, &k2, n);
    let mut p0: Vec<f64> = k4.iter().map(|v| -1.25 * v).collect();
    p0[0] += 3.0;
    let k5 = conv_trunc(&k4, &ks, n);
    let kp2 = conv_trunc(&kps, &kps, n);
    let kkp2 = conv_trunc(&ks, &kp2, n);
    let gs: Vec<f64> = (0..=n).map(|i| 1.125 * k5[i] - 9.0 * kkp2[i]).collect();

    let u0 = ode_series(1.0, 0.0, &vec![0.0; n + 1], &p0, &p1, &p2);
    let u2 = ode_series(0.0, 1.0, &vec![0.0; n + 1], &p0, &p1, &p2);
    let up = ode_series(0.0, 0.0, &gs, &p0, &p1, &p2);

    // Seam matching: equate value and second derivative with the series jet
    // at s = T/4 + MATCH_OFFSET.
    let sm = quarter + MATCH_OFFSET;
    let (snv, cnv, dnv) = jacobi_sn_cn_dn(sm + quarter, 0.5);
    let kp = -sqrt(2.0) * snv * dnv;
    let x = fabs(cnv);
    let sgn = if cnv >= 0.0 { 1.0 } else { -1.0 };
    let series_at = |lvl: usize| -> f64 {
        let (a, b) = &levels[lvl];
        sgn * eval_adaptive(a, x) + kp * eval_adaptive(b, x)
    };
    let val0 = series_at(0);
    let val2 = series_at(2);

    let jet2 = |c: &[f64]| -> (f64, f64) {
        let d2 = d_dx(&d_dx(c));
        (horner(c, MATCH_OFFSET), horner(&d2, MATCH_OFFSET))
    };
    let (a00, a10) = jet2(&u0);
    let (a01, a11) = jet2(&u2);
    let (b0, b1) = jet2(&up);
    let det = a00 * a11 - a01 * a10;
    let c0 = ((val0 - b0) * a11 - (val2 - b1) * a01) / det;
    let c2 = (a00 * (val2 - b1) - a10 * (val0 - b0)) / det;
    let norm = fabs(a00).max(fabs(a01)).max(fabs(a10)).max(fabs(a11));
    let inv_norm = (fabs(a11).max(fabs(a01)).max(fabs(a10)).max(fabs(a00))) / fabs(det);
    let cond = norm * inv_norm;

    let phi: Vec<f64> = (0..=n).map(|i| c0 * u0[i] + c2 * u2[i] + up[i]).collect();
    let mut local: [Vec<f64>; 5] = [phi.clone(), vec![], vec![], vec![], vec![]];
    for d in 1..5 {
        local[d] = d_dx(&local[d - 1]);
    }
    (local, c0, c2, cond)
}

/// Power-series solution of the fourth-order ODE
/// phi'''' + p1 phi' + p2 phi'' + p0 phi = rhs
/// with phi(0) = b0, phi''(0)/2! ... the even data (b0, b2) free and the odd
/// data zero (the symmetric subspace at the extremum).
fn ode_series(b0: f64, b2: f64, rhs: &[f64], p0: &[f64], p1: &[f64], p2: &[f64]) -> Vec<f64> {
    let n = NLOC;
    let mut b = vec![0.0; n + 1];
    b[0] = b0;
    b[2] = b2;
    for j in 0..n - 3 {
        let mut tot = rhs[j];
        for i in 0..=j {
            // p1 * phi'
            tot -= p1[j - i] * b[i + 1] * (i + 1) as f64;
            // p2 * phi''
            tot -= p2[j - i] * b[i + 2] * ((i + 2) * (i + 1)) as f64;
            // p0 * phi
            tot -= p0[j - i] * b[i];
        }
        b[j + 4] = tot / (((j + 4) * (j + 3) * (j + 2) * (j + 1)) as f64);
    }
    b
}
