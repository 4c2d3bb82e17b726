//! Special functions: complete elliptic integral via the arithmetic-geometric
//! mean, Jacobi elliptic functions by the descending Landen transformation,
//! the Gamma function (Lanczos approximation), log-space Gamma ratios, and
//! the real dilogarithm on (-inf, 1].

use alloc::vec::Vec;
use libm::{asin, cos, exp, fabs, log, pow, round, sin, sqrt};

use core::f64::consts::PI;

/// Complete elliptic integral of the first kind K(m), parameter convention
/// (m = modulus squared), computed by the arithmetic-geometric mean.
///
/// A fixed iteration count keeps the evaluation branch-free; the AGM
/// converges quadratically, so 12 iterations are far past double precision
/// for every m in [0, 1).
pub fn agm_elliptic_k(m: f64) -> f64 {
    assert!((0.0..1.0).contains(&m), "parameter m must lie in [0,1)");
    let mut a = 1.0;
    let mut b = sqrt(1.0 - m);
    for _ in 0..12 {
        let an = 0.5 * (a + b);
        let bn = sqrt(a * b);
        a = an;
        b = bn;
    }
    0.5 * PI / a
}

/// Jacobi elliptic functions (sn, cn, dn)(u | m) for 0 <= m < 1.
///
/// Descending-Landen / AGM method: build the AGM triples (a_n, b_n, c_n),
/// seed the amplitude phi_N = 2^N a_N u, and back-recurse
/// `phi_{n-1} = (phi_n + asin((c_n/a_n) sin phi_n)) / 2`.
/// The argument is first reduced modulo the real period 4K(m) so the seed
/// amplitude stays O(1) and no accuracy is lost to large-angle trigonometry.
pub fn jacobi_sn_cn_dn(u: f64, m: f64) -> (f64, f64, f64) {
    assert!((0.0..1.0).contains(&m), "parameter m must lie in [0,1)");
    if m < 1e-14 {
        // Degenerate limit: circular functions.
        return (sin(u), cos(u), 1.0);
    }

    let kk = agm_elliptic_k(m);
    let period = 4.0 * kk;
    let ur = u - period * round(u / period);

    // AGM ladder. 32 slots is far more than the ~10 levels double precision needs.
    let mut a = [0.0f64; 32];
    let mut c = [0.0f64; 32];
    a[0] = 1.0;
    c[0] = sqrt(m);
    let mut b = sqrt(1.0 - m);
    let mut n = 0;
    while c[n] > 1e-17 && n + 1 < 32 {
        let an = 0.5 * (a[n] + b);
        let cn1 = 0.5 * (a[n] - b);
        b = sqrt(a[n] * b);
        n += 1;
        a[n] = an;
        c[n] = cn1;
    }

    let mut phi = pow(2.0, n as f64) * a[n] * ur;
    let mut phi_prev = phi;
    for i in (1..=n).rev() {
        phi_prev = phi;
        let mut s = c[i] / a[i] * sin(phi);
        s = s.clamp(-1.0, 1.0);
        phi = 0.5 * (phi + asin(s));
    }
    let sn = sin(phi);
    let cn = cos(phi);
    let denom = cos(phi_prev - phi);
    let dn = if fabs(denom) > 1e-12 {
        cn / denom
    } else {
        sqrt(1.0 - m * sn * sn)
    };
    (sn, cn, dn)
}

/// cn(u | m); see [`jacobi_sn_cn_dn`].
pub fn jacobi_cn(u: f64, m: f64) -> f64 {
    jacobi_sn_cn_dn(u, m).1
}

// Lanczos approximation, g = 607/128, 15 terms (Godfrey's coefficient set).
// Relative accuracy ~1e-15 on the positive real axis.
const LANCZOS_G: f64 = 4.7421875;
const LANCZOS_COEF: [f64; 15] = [
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut s = LANCZOS_COEF[0];
    for (i, &ci) in LANCZOS_COEF.iter().enumerate().skip(1) {
        s += ci / (x - 1.0 + i as f64);
    }
    s
}

/// Natural log of the Gamma function for x > 0.
pub fn gamma_ln(x: f64) -> f64 {
    assert!(x > 0.0, "gamma_ln requires a positive argument");
    if x < 0.5 {
        // Reflection in log space keeps small arguments accurate.
        return log(PI / sin(PI * x)) - gamma_ln(1.0 - x);
    }
    let t = x + LANCZOS_G - 0.5;
    0.5 * log(2.0 * PI) + (x - 0.5) * log(t) - t + log(lanczos_sum(x))
}

/// Gamma function on the real line (poles at nonpositive integers excluded).
pub fn gamma_fn(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection formula Gamma(x)Gamma(1-x) = pi / sin(pi x).
        return PI / (sin(PI * x) * gamma_fn(1.0 - x));
    }
    let t = x + LANCZOS_G - 0.5;
    sqrt(2.0 * PI) * pow(t, x - 0.5) * exp(-t) * lanczos_sum(x)
}

/// The table `Gamma(j + a) / Gamma(j + b)` for j = 0..=j_max, computed in log
/// space so that large offsets neither overflow nor lose the leading digits.
///
/// By construction `gamma_ratio(a, b, n)[j] * gamma_ratio(b, a, n)[j] = 1` up
/// to roundoff.
pub fn gamma_ratio(a: f64, b: f64, j_max: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > 0.0, "gamma_ratio requires positive offsets");
    (0..=j_max)
        .map(|j| {
            let j = j as f64;
            exp(gamma_ln(j + a) - gamma_ln(j + b))
        })
        .collect()
}

/// Real dilogarithm Li2(x) for x <= 1.
///
/// Power series on |x| <= 1/2; the standard reflection and inversion
/// formulas map every other argument into that disc:
///   Li2(x) + Li2(1-x)    = pi^2/6 - ln(x)ln(1-x)            (0 < x < 1)
///   Li2(x) + Li2(x/(x-1)) = -ln(1-x)^2 / 2                  (x < 0)
///   Li2(x) + Li2(1/x)    = -pi^2/6 - ln(-x)^2 / 2           (x < -1)
pub fn dilog(x: f64) -> f64 {
    assert!(x <= 1.0, "dilog implemented on (-inf, 1]");
    if x == 1.0 {
        return PI * PI / 6.0;
    }
    if x == 0.0 {
        return 0.0;
    }
    if x > 0.5 {
        let y = 1.0 - x;
        return PI * PI / 6.0 - log(x) * log(y) - dilog_series(y);
    }
    if x < -1.0 {
        let l = log(-x);
        return -PI * PI / 6.0 - 0.5 * l * l - dilog(1.0 / x);
    }
    if x < -0.5 {
        // Landen: maps [-1, -1/2) into (1/3, 1/2].
        let y = x / (x - 1.0);
        let l = log(1.0 - x);
        return -dilog_series(y) - 0.5 * l * l;
    }
    dilog_series(x)
}

/// Power series for |x| <= 1/2 (converges geometrically; ~50 terms suffice).
fn dilog_series(x: f64) -> f64 {
    debug_assert!(fabs(x) <= 0.5 + 1e-15);
    let mut term = x;
    let mut sum = x;
    let mut k = 1.0f64;
    loop {
        k += 1.0;
        term *= x;
        let add = term / (k * k);
        sum += add;
        if fabs(add) < 1e-17 * (1.0 + fabs(sum)) || k > 200.0 {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    const K_HALF: f64 = 1.8540746773013719;

    #[test]
    fn agm_matches_reference_values() {
        assert!((agm_elliptic_k(0.5) - K_HALF).abs() < 1e-15);
        assert!((agm_elliptic_k(0.0) - PI / 2.0).abs() < 1e-15);
        // K(0.75) reference from the quadratically convergent exact AGM limit.
        assert!((agm_elliptic_k(0.75) - 2.156515647499643).abs() < 1e-14);
    }

    #[test]
    fn jacobi_matches_reference_values() {
        // (u, m, sn, cn, dn) frozen from a 40-digit multiprecision evaluation.
        let cases = [
            (0.3, 0.5, 0.2934127331684554, 0.9559858618277871, 0.9782405041743613),
            (1.0, 0.5, 0.8030018248956439, 0.5959765676721407, 0.8231610016315962),
            (2.5, 0.7, 0.9719403505817488, -0.23522745356575053, 0.5820071893350796),
            (-4.0, 0.25, 0.5802001198136741, -0.8144739535234986, 0.9569963193461349),
            (7.0, 0.5, -0.39907978209954037, 0.9169162052878024, 0.9593579435016378),
            (13.0, 0.5, -0.9998846751889595, 0.015186715321915612, 0.7071883187391704),
            (0.77, 0.02, 0.6951648816968882, 0.7188503232630222, 0.9951557243693607),
            (5.1, 0.93, 0.37556246967942175, -0.926797082088789, 0.9321084342352626),
        ];
        for (u, m, sn_ref, cn_ref, dn_ref) in cases {
            let (sn, cn, dn) = jacobi_sn_cn_dn(u, m);
            assert!((sn - sn_ref).abs() < 1e-12, "sn({u},{m}): {sn} vs {sn_ref}");
            assert!((cn - cn_ref).abs() < 1e-12, "cn({u},{m}): {cn} vs {cn_ref}");
            assert!((dn - dn_ref).abs() < 1e-12, "dn({u},{m}): {dn} vs {dn_ref}");
        }
    }

    #[test]
    fn jacobi_pythagorean_identity_on_a_grid() {
        for m in [0.1, 0.5, 0.9] {
            let kk = agm_elliptic_k(m);
            for i in 0..200 {
                let u = -8.0 * kk + 16.0 * kk * (i as f64) / 199.0;
                let (sn, cn, dn) = jacobi_sn_cn_dn(u, m);
                assert!((sn * sn + cn * cn - 1.0).abs() < 1e-10);
                assert!((dn * dn + m * sn * sn - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn jacobi_degenerate_parameters() {
        let (sn, cn, dn) = jacobi_sn_cn_dn(0.9, 0.0);
        assert!((sn - 0.9f64.sin()).abs() < 1e-15);
        assert!((cn - 0.9f64.cos()).abs() < 1e-15);
        assert!((dn - 1.0).abs() < 1e-15);
        // cn has a simple zero at K and flips sign at the half period.
        let kk = agm_elliptic_k(0.5);
        assert!(jacobi_cn(kk, 0.5).abs() < 1e-12);
        assert!((jacobi_cn(1.0 + 2.0 * kk, 0.5) + jacobi_cn(1.0, 0.5)).abs() < 1e-12);
    }

    #[test]
    fn gamma_reference_values_and_reflection() {
        assert!((gamma_fn(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma_fn(1.0) - 1.0).abs() < 1e-14);
        assert!((gamma_fn(5.0) - 24.0).abs() < 24.0 * 1e-14);
        assert!((gamma_fn(0.75) - 1.2254167024651776).abs() < 1e-13);
        assert!((gamma_fn(0.25) - 3.625609908221908).abs() < 1e-12);
        // Reflection product Gamma(3/4)Gamma(1/4) = pi*sqrt(2).
        let p = gamma_fn(0.75) * gamma_fn(0.25);
        assert!((p - PI * 2.0f64.sqrt()).abs() < 1e-12);
        // Gamma(9/4) = (5/16) Gamma(1/4).
        let r = gamma_fn(2.25) / gamma_fn(0.25);
        assert!((r - 5.0 / 16.0).abs() < 1e-13);
        // Small and moderate arguments stay at ~1e-13 relative accuracy.
        for x in [1e-3, 0.1, 1.5, 7.3, 30.0] {
            let direct = gamma_fn(x);
            let shifted = gamma_fn(x + 1.0) / x; // functional equation
            assert!(
                ((direct - shifted) / shifted).abs() < 1e-13,
                "functional equation at {x}"
            );
        }
    }

    #[test]
    fn gamma_ratio_log_space_table() {
        let r = gamma_ratio(0.75, 2.25, 64);
        // j = 0 entry: Gamma(3/4)/Gamma(9/4) = 16 Gamma(3/4)^2 / (5 pi sqrt(2)).
        let g34 = gamma_fn(0.75);
        let expect0 = 16.0 * g34 * g34 / (5.0 * PI * 2.0f64.sqrt());
        assert!(((r[0] - expect0) / expect0).abs() < 1e-13);
        // Frozen multiprecision check of a large-offset ratio.
        let r2 = gamma_ratio(12.3, 2.2, 0);
        assert!(((r2[0] - 75680867.1156592) / 75680867.1156592).abs() < 1e-12);
        let r3 = gamma_ratio(40.75, 42.25, 0);
        assert!(((r3[0] - 0.0038092931769436044) / 0.0038092931769436044).abs() < 1e-12);
        // Product-inverse invariant.
        let rinv = gamma_ratio(2.25, 0.75, 64);
        for j in 0..=64 {
            assert!((r[j] * rinv[j] - 1.0).abs() < 1e-12);
        }
        // Asymptotics: Gamma(j + 3/4)/Gamma(j + 9/4) ~ j^{-3/2}.
        let j = 40.0f64;
        let asym = j.powf(-1.5);
        assert!(((r[40] - asym) / asym).abs() < 0.05);
    }

    #[test]
    fn dilog_reference_values() {
        assert_eq!(dilog(0.0), 0.0);
        assert!((dilog(1.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((dilog(-1.0) + PI * PI / 12.0).abs() < 1e-14);
        let half_ref = PI * PI / 12.0 - 0.5 * 2.0f64.ln().powi(2);
        assert!((dilog(0.5) - half_ref).abs() < 1e-14);
        for (x, v) in [
            (-0.3, -0.2800743337595829),
            (0.9, 1.2997147230049588),
            (-7.5, -3.5457171042558464),
            (0.5, 0.5822405264650125),
        ] {
            assert!((dilog(x) - v).abs() < 1e-13, "Li2({x})");
        }
    }

    #[test]
    fn dilog_derivative_identity() {
        // d/dx Li2(-e^{-sqrt(2) x}) = sqrt(2) ln(1 + e^{-sqrt(2) x}),
        // checked by a central difference.
        let s2 = 2.0f64.sqrt();
        for x in [-0.7, 0.0, 0.4, 1.9] {
            let h = 1e-5;
            let f = |x: f64| dilog(-(-s2 * x).exp());
            let fd = (f(x + h) - f(x - h)) / (2.0 * h);
            let exact = s2 * (1.0 + (-s2 * x).exp()).ln();
            assert!((fd - exact).abs() < 1e-7, "derivative identity at {x}");
        }
    }
}
