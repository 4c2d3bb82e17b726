//! The periodic planar Willmore curve.
//!
//! Its curvature in arc length is k(s) = sqrt(2) cn(s + K | m = 1/2) with
//! K = K(1/2) the quarter period, so the full period is T = 4K. The
//! curvature satisfies k'' = -k^3/2 with first integral (k')^2 = 1 - k^4/4,
//! and every higher derivative closes as a polynomial in (k, k').
//!
//! The curve itself is reconstructed by quadrature: theta = int k,
//! gamma = int (-sin theta, cos theta). One coordinate drifts linearly (the
//! curve is periodic in x1 with a nonzero horizontal period); the other is
//! -k up to roundoff, which the tests use as a construction-independent
//! oracle.

use alloc::vec::Vec;
use libm::{cos, sin, sqrt};

use crate::fft::Spectral;
use crate::quad::cumulative_simpson;
use crate::specfun::{agm_elliptic_k, jacobi_sn_cn_dn};

/// Quarter period K(1/2) of the curvature.
pub fn quarter_period() -> f64 {
    agm_elliptic_k(0.5)
}

/// Full curvature period T = 4 K(1/2) ~ 7.4163.
pub fn period() -> f64 {
    4.0 * quarter_period()
}

/// Curvature and its arc-length derivative at s.
pub fn curvature_pair(s: f64) -> (f64, f64) {
    let u = s + quarter_period();
    let (sn, cn, dn) = jacobi_sn_cn_dn(u, 0.5);
    let s2 = sqrt(2.0);
    (s2 * cn, -s2 * sn * dn)
}

/// Curvature at s.
pub fn curvature(s: f64) -> f64 {
    curvature_pair(s).0
}

/// Derivatives k^(0..=6)(s), closed under the curvature ODE: every entry is
/// a polynomial in (k, k').
pub fn curvature_jet(s: f64) -> [f64; 7] {
    let (k, kp) = curvature_pair(s);
    curvature_jet_from_pair(k, kp)
}

/// Same closed forms, driven by an externally supplied (k, k') pair.
pub fn curvature_jet_from_pair(k: f64, kp: f64) -> [f64; 7] {
    let k2 = k * k;
    let k3 = k2 * k;
    let k4 = k2 * k2;
    let kp2 = kp * kp;
    [
        k,
        kp,
        -0.5 * k3,
        -1.5 * k2 * kp,
        -3.0 * k * kp2 + 0.75 * k4 * k,
        -3.0 * kp2 * kp + 6.75 * k4 * kp,
        31.5 * k3 * kp2 - 3.375 * k4 * k3,
    ]
}

/// Periodic field sampled on the curve grid, kept as a raw spectrum so it can
/// be evaluated off-grid by direct mode summation.
struct StoredSpectrum {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl StoredSpectrum {
    fn value_at(&self, s: f64, period: f64) -> f64 {
        let n = self.re.len();
        let omega = 2.0 * core::f64::consts::PI / period;
        let mut acc = 0.0;
        for k in 0..n {
            let m = if k <= n / 2 { k as i64 } else { k as i64 - n as i64 };
            let ang = omega * m as f64 * s;
            acc += self.re[k] * cos(ang) - self.im[k] * sin(ang);
        }
        acc / n as f64
    }
}

/// The Willmore curve sampled on n uniform arc-length points per period.
pub struct Curve {
    pub n: usize,
    pub period: f64,
    /// Curvature samples.
    pub k: Vec<f64>,
    /// Curvature derivative samples.
    pub kp: Vec<f64>,
    /// Tangent angle theta(s_j), gauged so theta(0) = 0.
    pub theta: Vec<f64>,
    /// First coordinate, gauged so gamma1(0) = 0; drifts by `drift` per unit s.
    pub gamma1: Vec<f64>,
    /// Second coordinate, gauged so gamma2(0) = 0. Equals -k up to roundoff.
    pub gamma2: Vec<f64>,
    /// Mean of gamma1' = k^2/2: the horizontal period is drift * period.
    pub drift: f64,
    theta_spec: StoredSpectrum,
    gamma1_per_spec: StoredSpectrum,
    gamma2_per_spec: StoredSpectrum,
    gamma1_per0: f64,
    gamma2_per0: f64,
}

impl Curve {
    /// Builds the curve by spectral quadrature. `n` must be a power of two
    /// (>= 64) so the antiderivatives are spectrally exact.
    pub fn build(n: usize) -> Curve {
        assert!(n.is_power_of_two() && n >= 64, "curve grid must be a power of two >= 64");
        let tbar = period();
        let sp = Spectral::new(n, tbar);
        let mut k = Vec::with_capacity(n);
        let mut kp = Vec::with_capacity(n);
        for j in 0..n {
            let s = tbar * j as f64 / n as f64;
            let (kj, kpj) = curvature_pair(s);
            k.push(kj);
            kp.push(kpj);
        }

        // theta = int k; k has zero mean over the period.
        let (k_mean, theta_per) = sp.antiderivative(&k);
        debug_assert!(libm::fabs(k_mean) < 1e-12);
        let theta0 = theta_per[0];
        let theta: Vec<f64> = theta_per.iter().map(|v| v - theta0).collect();

        let g1p: Vec<f64> = theta.iter().map(|t| -sin(*t)).collect();
        let g2p: Vec<f64> = theta.iter().map(|t| cos(*t)).collect();
        let (drift, per1) = sp.antiderivative(&g1p);
        let (drift2, per2) = sp.antiderivative(&g2p);
        debug_assert!(libm::fabs(drift2) < 1e-12);
        let per1_0 = per1[0];
        let per2_0 = per2[0];
        let mut gamma1 = Vec::with_capacity(n);
        let mut gamma2 = Vec::with_capacity(n);
        for j in 0..n {
            let s = tbar * j as f64 / n as f64;
            gamma1.push(drift * s + per1[j] - per1_0);
            gamma2.push(drift2 * s + per2[j] - per2_0);
        }

        let spec_of = |f: &[f64]| {
            let fft = crate::fft::Fft::new(n);
            let mut re = f.to_vec();
            let mut im = alloc::vec![0.0; n];
            fft.forward(&mut re, &mut im);
            StoredSpectrum { re, im }
        };

        Curve {
            n,
            period: tbar,
            k,
            kp,
            theta_spec: spec_of(&theta),
            gamma1_per_spec: spec_of(&per1),
            gamma2_per_spec: spec_of(&per2),
            gamma1_per0: per1_0,
            gamma2_per0: per2_0,
            theta,
            gamma1,
            gamma2,
            drift,
        }
    }

    /// Horizontal period of the curve (the x1-translation after one
    /// curvature period).
    pub fn horizontal_period(&self) -> f64 {
        self.drift * self.period
    }

    /// Off-grid curve point by direct evaluation of the stored spectra.
    pub fn gamma_at(&self, s: f64) -> (f64, f64) {
        let g1 = self.drift * s + self.gamma1_per_spec.value_at(s, self.period) - self.gamma1_per0;
        let g2 = self.gamma2_per_spec.value_at(s, self.period) - self.gamma2_per0;
        (g1, g2)
    }

    /// Off-grid tangent angle.
    pub fn theta_at(&self, s: f64) -> f64 {
        self.theta_spec.value_at(s, self.period)
    }

    /// Point of the rescaled curve gamma_T(sigma) = gamma(eps * sigma) / eps,
    /// whose horizontal period is horizontal_period() / eps.
    pub fn rescaled_at(&self, eps: f64, sigma: f64) -> (f64, f64) {
        let (g1, g2) = self.gamma_at(eps * sigma);
        (g1 / eps, g2 / eps)
    }
}

/// Curve samples on an arbitrary (odd-sized) uniform grid over one period by
/// cumulative Simpson quadrature; used by grid-based cross checks that do not
/// live on a power-of-two grid. Returns (s, gamma1, gamma2, theta).
pub fn dense_curve_by_quadrature(n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    assert!(n >= 3 && n % 2 == 1);
    let tbar = period();
    let h = tbar / (n - 1) as f64;
    let mut s = Vec::with_capacity(n);
    let mut k = Vec::with_capacity(n);
    for j in 0..n {
        let sj = j as f64 * h;
        s.push(sj);
        k.push(curvature(sj));
    }
    let theta = cumulative_simpson(&k, h);
    let g1p: Vec<f64> = theta.iter().map(|t| -sin(*t)).collect();
    let g2p: Vec<f64> = theta.iter().map(|t| cos(*t)).collect();
    let gamma1 = cumulative_simpson(&g1p, h);
    let gamma2 = cumulative_simpson(&g2p, h);
    (s, gamma1, gamma2, theta)
}
