//! Five-term approximate interface solution and its evaluation machinery:
//! the tubular chart around the rescaled elastic curve, Fourier smoothing of
//! the tilt, jet-based evaluation of the field and of the fourth-order
//! residual operator, and the globalized Cartesian evaluator.
//!
//! Geometry conventions: the closed curvature function k has period T,
//! gamma' = (k^2/2, -k') and the unit normal is n = (k', k^2/2). The curve is
//! rescaled by 1/eps, and the chart maps (sigma, z) -> gamma(sigma)/eps +
//! z n(sigma), where sigma is the arc-length parameter of the unrescaled
//! curve (so the rescaled arc length is s = sigma/eps). Jets treat s as the
//! slow variable: one unit of the jet's slow coordinate advances sigma by
//! eps.

use alloc::vec;
use alloc::vec::Vec;
use libm::{cos, exp, fabs, floor, sin, sqrt};

use crate::curve::{curvature_jet, curvature_pair, period, Curve};
use crate::fft::Spectral;
use crate::jet::{compose, pd_s, pd_z, pmul, powers, precip, sjet, JetBatch};
use crate::layer::{
    v0, v0p, v0pp, v0ppp, wpp_v0, wpp_v0_d1, wpp_v0_d2, LayerStacks, LayerSystem, ProfileStack,
};
use crate::phibar::TiltEvaluator;

/// Smooth plateau bump: 1 for r <= 1, 0 for r >= 2, C-infinity in between.
pub fn zeta_bump(r: f64) -> f64 {
    if r <= 1.0 {
        return 1.0;
    }
    if r >= 2.0 {
        return 0.0;
    }
    let psi = |u: f64| if u > 0.0 { exp(-1.0 / u) } else { 0.0 };
    let a = psi(2.0 - r);
    let b = psi(r - 1.0);
    a / (a + b)
}

/// Exact Fourier projection of a periodic grid onto modes with frequency
/// |m| * (2 pi / period) <= theta. Idempotent and parity-preserving.
pub fn smoothing_r(grid: &[f64], period: f64, theta: f64) -> Vec<f64> {
    let n = grid.len();
    let sp = Spectral::new(n, period);
    let omega = 2.0 * core::f64::consts::PI / period;
    let mcut = floor(theta / omega + 1e-9) as usize;
    sp.lowpass(grid, mcut)
}

/// Which correction terms enter the assembled field.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Variant {
    /// All five terms.
    Full,
    /// Base profile + tilt difference + quadratic correction only.
    V012,
    /// Full minus the quadratic (curvature^2) correction.
    NoV2,
    /// Full minus the cubic correction.
    NoV3,
    /// Full minus the quartic corrections.
    NoV4,
}

/// Normal-displacement mode of the interface.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TiltMode {
    Zero,
    /// eps * (d_star/c_star) * (closed-form tilt).
    Leading,
}

/// Everything expensive, built once: the closed-form tilt evaluator, the
/// curve, the layer profiles with derivative stacks, and the tilt's sine
/// spectrum on a fine periodic grid.
pub struct Engine {
    pub phibar: TiltEvaluator,
    pub curve: Curve,
    pub stacks: LayerStacks,
    pub c_star: f64,
    pub d_star: f64,
    /// d_star / c_star.
    pub ratio_dc: f64,
    pub period: f64,
    /// Sine coefficients of the closed-form tilt: phibar(s) = sum b_m sin(m w s).
    pub sine: Vec<f64>,
    pub omega: f64,
}

pub const ENGINE_GRID: usize = 512;

impl Engine {
    pub fn new() -> Engine {
        Engine::with_resolution(ENGINE_GRID, 20.0, 4001)
    }

    /// Build with explicit curve/sine grid size (power of two) and layer
    /// domain half-width / grid size (odd).
    pub fn with_resolution(curve_n: usize, half_width: f64, layer_n: usize) -> Engine {
        let phibar = TiltEvaluator::new();
        let curve = Curve::build(curve_n);
        let layer = LayerSystem::build(half_width, layer_n);
        let stacks = layer.stacks();
        let tbar = period();
        let sp = Spectral::new(curve_n, tbar);
        let grid: Vec<f64> = (0..curve_n)
            .map(|j| phibar.value(tbar * j as f64 / curve_n as f64))
            .collect();
        let sine = sp.sine_coefficients(&grid);
        Engine {
            phibar,
            curve,
            c_star: layer.c_star,
            d_star: layer.d_star,
            ratio_dc: layer.d_star / layer.c_star,
            period: tbar,
            stacks,
            sine,
            omega: 2.0 * core::f64::consts::PI / tbar,
        }
    }

    /// Tilt pair (full and mode-truncated) for one eps. The truncation keeps
    /// sine modes with index <= floor(1/eps).
    pub fn tilt(&self, eps: f64, mode: TiltMode) -> Tilt<'_> {
        let mut ms = Vec::new();
        let mut bs = Vec::new();
        if mode == TiltMode::Leading {
            let theta = floor(1.0 / eps + 1e-9) as usize;
            for (m, b) in self.sine.iter().enumerate().skip(1) {
                if m <= theta && *b != 0.0 {
                    ms.push(m as f64 * self.omega);
                    bs.push(b * eps * self.ratio_dc);
                }
            }
        }
        Tilt { eng: self, eps, mode, ms, bs }
    }
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new()
    }
}

/// The interface tilt at one eps: the full displacement phi and its
/// Fourier-truncated companion phi*.
pub struct Tilt<'a> {
    eng: &'a Engine,
    pub eps: f64,
    pub mode: TiltMode,
    ms: Vec<f64>,
    bs: Vec<f64>,
}

impl Tilt<'_> {
    /// Derivatives 0..nord-1 of the truncated tilt phi* at sigma.
    pub fn phistar_derivs(&self, sig: f64, nord: usize) -> Vec<f64> {
        let mut out = vec![0.0; nord];
        if self.bs.is_empty() {
            return out;
        }
        for (m, b) in self.ms.iter().zip(&self.bs) {
            let (s, c) = (sin(m * sig), cos(m * sig));
            let mut wpow = 1.0;
            for (r, slot) in out.iter_mut().enumerate() {
                let phase = match r % 4 {
                    0 => s,
                    1 => c,
                    2 => -s,
                    _ => -c,
                };
                *slot += b * wpow * phase;
                wpow *= m;
            }
        }
        out
    }

    pub fn phistar_value(&self, sig: f64) -> f64 {
        self.phistar_derivs(sig, 1)[0]
    }

    /// Derivatives 0..4 of the untruncated tilt phi at sigma.
    pub fn phi_derivs(&self, sig: f64) -> [f64; 5] {
        match self.mode {
            TiltMode::Zero => [0.0; 5],
            TiltMode::Leading => {
                let j = self.eng.phibar.jet(sig);
                let c = self.eps * self.eng.ratio_dc;
                [c * j[0], c * j[1], c * j[2], c * j[3], c * j[4]]
            }
        }
    }
}

/// Profile jet rows sampled at a vector of layer coordinates.
fn rows_at(stack: &ProfileStack, t: &[f64]) -> [Vec<f64>; 5] {
    let mut out: [Vec<f64>; 5] = Default::default();
    for (r, row) in out.iter_mut().enumerate() {
        *row = t.iter().map(|&tv| stack.eval(r, tv)).collect();
    }
    out
}

/// Residual values plus the auxiliary fields used by the monotonicity and
/// zero-set scans.
pub struct BatchResult {
    /// Fourth-order residual operator value at each z.
    pub f: Vec<f64>,
    /// Assembled field value at each z.
    pub v: Vec<f64>,
    /// Layer coordinate t = z - phi*(sigma).
    pub t0: Vec<f64>,
    /// Vertical Cartesian derivative of the field through the chart.
    pub dx2v: Vec<f64>,
    /// Vertical Cartesian coordinate of the point.
    pub x2: Vec<f64>,
}

impl Engine {
    /// Field value only (cheap path for bisection and finite differences).
    pub fn vtilde_val(
        &self,
        sig: f64,
        z0: &[f64],
        eps: f64,
        tilt: &Tilt<'_>,
        variant: Variant,
    ) -> Vec<f64> {
        let (k, kp) = curvature_pair(sig);
        let psd = tilt.phistar_derivs(sig, 3);
        let phd = tilt.phi_derivs(sig);
        let lps = -2.0 * k * psd[2] - 2.0 * k * k * k * psd[0];
        z0.iter()
            .map(|&z| {
                let t0 = z - psd[0];
                let tt0 = z - phd[0];
                let mut v = v0(tt0);
                if variant != Variant::NoV2 {
                    let eta = self.stacks.eta.eval(0, t0);
                    let etat = -t0 * v0p(t0) / 2.0;
                    v += eps * eps * (-k * k + eps * lps) * eta
                        + eps * eps * psd[1] * psd[1] * etat;
                }
                if variant != Variant::V012 && variant != Variant::NoV3 {
                    v += 1.5 * eps * eps * eps * k * k * k * self.stacks.eta1.eval(0, t0);
                }
                if variant != Variant::V012 && variant != Variant::NoV4 {
                    let e4 = eps * eps * eps * eps;
                    v += e4
                        * (k * k * k * k * self.stacks.eta2.eval(0, t0)
                            + kp * kp * self.stacks.eta3.eval(0, t0));
                }
                v
            })
            .collect()
    }

    /// Degree-4 jet of the assembled field at (sigma, z) for every z in the
    /// batch; the slow jet coordinate advances sigma by eps per unit.
    pub fn vtilde_jet(
        &self,
        sig: f64,
        z0: &[f64],
        eps: f64,
        tilt: &Tilt<'_>,
        variant: Variant,
    ) -> JetBatch {
        let nz = z0.len();
        let kd = curvature_jet(sig);
        let kj = sjet(&kd[0..5], eps);
        let kpj = sjet(&kd[1..6], eps);
        let psd = tilt.phistar_derivs(sig, 7);
        let phd = tilt.phi_derivs(sig);
        let psj = sjet(&psd[0..5], eps);
        let psj1 = sjet(&psd[1..6], eps);
        let psj2 = sjet(&psd[2..7], eps);
        let phj = sjet(&phd, eps);

        let mut zp = JetBatch::zeros(nz);
        zp.coeff_mut(0, 0).copy_from_slice(z0);
        for v in zp.coeff_mut(0, 1) {
            *v = 1.0;
        }
        let t0: Vec<f64> = z0.iter().map(|z| z - psd[0]).collect();
        let tt0: Vec<f64> = z0.iter().map(|z| z - phd[0]).collect();

        // Increment jets of the layer arguments; both vanish at the base.
        let mut qj = zp.clone();
        qj.axpy(-1.0, &psj);
        for v in qj.coeff_mut(0, 0) {
            *v = 0.0;
        }
        let mut qf = zp.clone();
        qf.axpy(-1.0, &phj);
        for v in qf.coeff_mut(0, 0) {
            *v = 0.0;
        }
        let qp = powers(&qj);
        let qfp = powers(&qf);

        let v0d: [Vec<f64>; 5] = [
            tt0.iter().map(|&t| v0(t)).collect(),
            tt0.iter().map(|&t| v0p(t)).collect(),
            tt0.iter().map(|&t| v0pp(t)).collect(),
            tt0.iter().map(|&t| v0ppp(t)).collect(),
            tt0.iter().map(|&t| wpp_v0_d1(t) * v0p(t) + wpp_v0(t) * v0pp(t)).collect(),
        ];
        let mut vj = compose(&v0d, &qfp);

        if variant != Variant::NoV2 {
            let etad = rows_at(&self.stacks.eta, &t0);
            let etatd = {
                let mut rows: [Vec<f64>; 5] = Default::default();
                for (r, row) in rows.iter_mut().enumerate() {
                    *row = t0
                        .iter()
                        .map(|&t| {
                            let p = v0p(t);
                            let pp = v0pp(t);
                            let p3 = v0ppp(t);
                            let p4 = wpp_v0_d1(t) * p + wpp_v0(t) * pp;
                            let p5 = wpp_v0_d2(t) * p + 2.0 * wpp_v0_d1(t) * pp + wpp_v0(t) * p3;
                            match r {
                                0 => -t * p / 2.0,
                                1 => -0.5 * (p + t * pp),
                                2 => -0.5 * (2.0 * pp + t * p3),
                                3 => -0.5 * (3.0 * p3 + t * p4),
                                _ => -0.5 * (4.0 * p4 + t * p5),
                            }
                        })
                        .collect();
                }
                rows
            };
            let etaj = compose(&etad, &qp);
            let etatj = compose(&etatd, &qp);
            let k2j = pmul(&kj, &kj);
            let mut lps = JetBatch::zeros(1);
            lps.axpy(-2.0, &pmul(&kj, &psj2));
            lps.axpy(-2.0, &pmul(&pmul(&k2j, &kj), &psj));
            let mut c2j = JetBatch::zeros(1);
            c2j.axpy(-1.0, &k2j);
            c2j.axpy(eps, &lps);
            c2j.scale(eps * eps);
            vj.axpy(1.0, &pmul(&c2j, &etaj));
            vj.axpy(eps * eps, &pmul(&pmul(&psj1, &psj1), &etatj));
        }
        if variant != Variant::V012 && variant != Variant::NoV3 {
            let eta1d = rows_at(&self.stacks.eta1, &t0);
            let k3j = pmul(&pmul(&kj, &kj), &kj);
            vj.axpy(1.5 * eps * eps * eps, &pmul(&k3j, &compose(&eta1d, &qp)));
        }
        if variant != Variant::V012 && variant != Variant::NoV4 {
            let eta2d = rows_at(&self.stacks.eta2, &t0);
            let eta3d = rows_at(&self.stacks.eta3, &t0);
            let k2j = pmul(&kj, &kj);
            let k4j = pmul(&k2j, &k2j);
            let kp2j = pmul(&kpj, &kpj);
            let e4 = eps * eps * eps * eps;
            vj.axpy(e4, &pmul(&k4j, &compose(&eta2d, &qp)));
            vj.axpy(e4, &pmul(&kp2j, &compose(&eta3d, &qp)));
        }
        vj
    }

    /// Residual of the fourth-order interface operator along one normal
    /// fiber: builds the field jet, applies the exact chart Laplacian twice
    /// with metric-coefficient jets, and assembles
    /// -Lap(g) + W''(v) g with g = -Lap(v) + W'(v).
    pub fn residual_batch(
        &self,
        sig: f64,
        z0: &[f64],
        eps: f64,
        tilt: &Tilt<'_>,
        variant: Variant,
    ) -> BatchResult {
        let nz = z0.len();
        let kd = curvature_jet(sig);
        let kj = sjet(&kd[0..5], eps);
        let kpj = sjet(&kd[1..6], eps);
        let psd = tilt.phistar_derivs(sig, 1);
        let vj = self.vtilde_jet(sig, z0, eps, tilt, variant);

        let mut zp = JetBatch::zeros(nz);
        zp.coeff_mut(0, 0).copy_from_slice(z0);
        for v in zp.coeff_mut(0, 1) {
            *v = 1.0;
        }

        // Metric-coefficient jets: with D = 1 - eps z k, the chart Laplacian
        // is (1/D^2) dss + (eps^2 z k'/D^3) ds + dzz - (eps k/D) dz.
        let mut dj = pmul(&zp, &kj);
        dj.scale(-eps);
        for v in dj.coeff_mut(0, 0) {
            *v += 1.0;
        }
        let rd = precip(&dj);
        let acoef = pmul(&rd, &rd);
        let mut bcoef = pmul(&pmul(&zp, &kpj), &pmul(&acoef, &rd));
        bcoef.scale(eps * eps);
        let mut ccoef = pmul(&kj, &rd);
        ccoef.scale(-eps);
        let lap = |u: &JetBatch| -> JetBatch {
            let mut out = pmul(&acoef, &pd_s(&pd_s(u)));
            out.axpy(1.0, &pmul(&bcoef, &pd_s(u)));
            out.axpy(1.0, &pd_z(&pd_z(u)));
            out.axpy(1.0, &pmul(&ccoef, &pd_z(u)));
            out
        };

        let mut g = pmul(&pmul(&vj, &vj), &vj);
        g.axpy(-1.0, &vj);
        g.axpy(-1.0, &lap(&vj));
        let gl = lap(&g);

        let v00 = vj.values();
        let g00 = g.values();
        let gl00 = gl.values();
        let vs = vj.coeff(1, 0);
        let vz = vj.coeff(0, 1);
        let k = kd[0];
        let kp = kd[1];
        let mut f = vec![0.0; nz];
        let mut dx2v = vec![0.0; nz];
        let mut x2 = vec![0.0; nz];
        for q in 0..nz {
            let vq = v00[q];
            f[q] = -gl00[q] + (3.0 * vq * vq - 1.0) * g00[q];
            dx2v[q] = -kp / (1.0 - eps * z0[q] * k) * vs[q] + 0.5 * k * k * vz[q];
            x2[q] = -k / eps + z0[q] * k * k / 2.0;
        }
        let t0 = z0.iter().map(|z| z - psd[0]).collect();
        BatchResult { f, v: v00.to_vec(), t0, dx2v, x2 }
    }
}

/// Tubular chart around the rescaled curve.
pub struct FermiChart<'a> {
    pub eps: f64,
    pub curve: &'a Curve,
}

impl FermiChart<'_> {
    pub fn new(curve: &Curve, eps: f64) -> FermiChart<'_> {
        FermiChart { eps, curve }
    }

    /// Cartesian point of (sigma, z): gamma(sigma)/eps + z n(sigma).
    pub fn forward(&self, sig: f64, z: f64) -> (f64, f64) {
        let (g1, g2) = self.curve.gamma_at(sig);
        let (k, kp) = curvature_pair(sig);
        (g1 / self.eps + z * kp, g2 / self.eps + z * 0.5 * k * k)
    }

    /// Tilted chart: the layer coordinate t sits at z = t + phistar(sigma).
    pub fn forward_tilted(&self, tilt: &Tilt<'_>, sig: f64, t: f64) -> (f64, f64) {
        self.forward(sig, t + tilt.phistar_value(sig))
    }

    /// Normalized chart determinant 1 - eps z k (the metric entry is its
    /// square).
    pub fn det_normalized(&self, sig: f64, z: f64) -> f64 {
        1.0 - self.eps * z * curvature_pair(sig).0
    }

    pub fn g_ss(&self, sig: f64, z: f64) -> f64 {
        let d = self.det_normalized(sig, z);
        d * d
    }

    /// Newton inverse from a caller-supplied seed; converges quadratically
    /// inside the tube where the Jacobian determinant is (1 - eps z k)/eps.
    pub fn inverse(&self, x1: f64, x2: f64, sig0: f64, z0: f64) -> Option<(f64, f64)> {
        let eps = self.eps;
        let mut sig = sig0;
        let mut z = z0;
        for _ in 0..30 {
            let (f1, f2) = self.forward(sig, z);
            let g1 = f1 - x1;
            let g2 = f2 - x2;
            let (k, kp) = curvature_pair(sig);
            let j11 = 0.5 * k * k / eps - 0.5 * z * k * k * k;
            let j12 = kp;
            let j21 = -kp / eps + z * k * kp;
            let j22 = 0.5 * k * k;
            let det = j11 * j22 - j12 * j21;
            if fabs(det) < 1e-14 {
                return None;
            }
            let dsig = (g1 * j22 - g2 * j12) / det;
            let dz = (j11 * g2 - j21 * g1) / det;
            sig -= dsig;
            z -= dz;
            if fabs(dsig).max(fabs(dz)) < 1e-14 {
                return Some((sig, z));
            }
        }
        let (f1, f2) = self.forward(sig, z);
        if fabs(f1 - x1).max(fabs(f2 - x2)) < 1e-10 {
            Some((sig, z))
        } else {
            None
        }
    }
}

/// Exact chart Laplacian from partial derivatives taken with respect to the
/// rescaled arc length s = sigma/eps and the normal coordinate z.
pub fn fermi_laplacian_exact(
    eps: f64,
    sig: f64,
    z: f64,
    u_s: f64,
    u_ss: f64,
    u_z: f64,
    u_zz: f64,
) -> f64 {
    let (k, kp) = curvature_pair(sig);
    let d = 1.0 - eps * z * k;
    u_ss / (d * d) + eps * eps * z * kp / (d * d * d) * u_s + u_zz - eps * k / d * u_z
}

/// Laplacian coefficients (A, B, C) of A dss + B ds + dzz + C dz in the
/// rescaled-arc-length variables, exact in the chart.
pub fn lap_coeffs_exact(eps: f64, sig: f64, z: f64) -> (f64, f64, f64) {
    let (k, kp) = curvature_pair(sig);
    let d = 1.0 - eps * z * k;
    (1.0 / (d * d), eps * eps * z * kp / (d * d * d), -eps * k / d)
}

/// The same coefficients with every geometric series truncated to explicit
/// eps-power <= order (the remainder dropped); used only for cross-checks
/// against the exact coefficients.
pub fn lap_coeffs_truncated(order: usize, eps: f64, sig: f64, z: f64) -> (f64, f64, f64) {
    let (k, kp) = curvature_pair(sig);
    let x = eps * z * k;
    let mut a = 0.0;
    let mut xp = 1.0;
    for p in 0..=order {
        a += (p + 1) as f64 * xp;
        xp *= x;
    }
    let mut b = 0.0;
    if order >= 2 {
        let mut xp = 1.0;
        for p in 0..=(order - 2) {
            b += ((p + 1) * (p + 2)) as f64 / 2.0 * xp;
            xp *= x;
        }
        b *= eps * eps * z * kp;
    }
    let mut c = 0.0;
    if order >= 1 {
        let mut xp = 1.0;
        for _ in 0..order {
            c += xp;
            xp *= x;
        }
        c *= -eps * k;
    }
    (a, b, c)
}

/// Globalized Cartesian evaluator: the assembled field inside the tube,
/// +-1 outside, blended by a smooth cutoff in the layer coordinate.
pub struct GlobalField<'a> {
    eng: &'a Engine,
    pub eps: f64,
    tilt: Tilt<'a>,
    chart: FermiChart<'a>,
    /// Horizontal period of the rescaled curve.
    pub x_period: f64,
    seeds: Vec<(f64, f64, f64)>, // (sigma, x1, x2) samples along one period
}

impl<'a> GlobalField<'a> {
    pub fn new(eng: &'a Engine, eps: f64, mode: TiltMode) -> GlobalField<'a> {
        let tilt = eng.tilt(eps, mode);
        let chart = FermiChart::new(&eng.curve, eps);
        let nseed = 1024;
        let mut seeds = Vec::with_capacity(nseed);
        for j in 0..nseed {
            let sig = eng.period * j as f64 / nseed as f64;
            let (x1, x2) = chart.forward(sig, 0.0);
            seeds.push((sig, x1, x2));
        }
        let x_period = eng.curve.horizontal_period() / eps;
        GlobalField { eng, eps, tilt, chart, x_period, seeds }
    }

    /// Outer edge of the cutoff support in the layer coordinate.
    pub fn cutoff_outer_edge(&self) -> f64 {
        1.0 / (8.0 * self.eps) + 7.0
    }

    fn nearest_seed(&self, x1r: f64, x2: f64) -> (f64, f64) {
        // Returns (sigma, squared distance) over the periodized samples; a
        // horizontal-period translate of the curve is one full parameter
        // period in sigma.
        let mut best_sig = 0.0;
        let mut best_d2 = f64::INFINITY;
        for shift in [-1.0f64, 0.0, 1.0] {
            for (sig, sx1, sx2) in &self.seeds {
                let dx = sx1 + shift * self.x_period - x1r;
                let dy = sx2 - x2;
                let d2 = dx * dx + dy * dy;
                if d2 < best_d2 {
                    best_d2 = d2;
                    best_sig = sig + shift * self.eng.period;
                }
            }
        }
        (best_sig, best_d2)
    }

    /// Side indicator (+1 above, -1 below) via the nearest-sample normal.
    fn side(&self, x1r: f64, x2: f64) -> f64 {
        let (sig, _) = self.nearest_seed(x1r, x2);
        let (sx1, sx2) = self.chart.forward(sig, 0.0);
        let (k, kp) = curvature_pair(sig);
        let dot = (x1r - sx1) * kp + (x2 - sx2) * 0.5 * k * k;
        if dot >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Chart coordinates of a Cartesian point, if inside the invertible tube.
    pub fn chart_coords(&self, x1: f64, x2: f64) -> Option<(f64, f64)> {
        let n = floor(x1 / self.x_period);
        let x1r = x1 - n * self.x_period;
        let (sig0, d2) = self.nearest_seed(x1r, x2);
        if sqrt(d2) > self.cutoff_outer_edge() + 4.0 {
            return None;
        }
        let (sx1, sx2) = self.chart.forward(sig0, 0.0);
        let (k, kp) = curvature_pair(sig0);
        let z0 = (x1r - sx1) * kp + (x2 - sx2) * 0.5 * k * k;
        let (sig, z) = self.chart.inverse(x1r, x2, sig0, z0)?;
        Some((sig + n * self.eng.period, z))
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        let n = floor(x1 / self.x_period);
        let x1r = x1 - n * self.x_period;
        match self.chart_coords(x1r, x2) {
            None => self.side(x1r, x2),
            Some((sig, z)) => {
                let t = z - self.tilt.phistar_value(sig);
                let h = if t >= 0.0 { 1.0 } else { -1.0 };
                let chi = zeta_bump(fabs(t) - 1.0 / (8.0 * self.eps) - 5.0);
                if chi == 0.0 {
                    h
                } else {
                    let v = self.eng.vtilde_val(sig, &[z], self.eps, &self.tilt, Variant::Full)[0];
                    chi * v + (1.0 - chi) * h
                }
            }
        }
    }
}

/// Shared engine for the test suite (expensive to build, immutable after).
#[cfg(test)]
pub(crate) fn test_engine() -> &'static Engine {
    static ENG: std::sync::OnceLock<Engine> = std::sync::OnceLock::new();
    ENG.get_or_init(Engine::new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residual::fit_slope;

    fn engine() -> &'static Engine {
        test_engine()
    }

    #[test]
    fn smoothing_keeps_low_and_kills_high_modes() {
        let n = 256;
        let tbar = period();
        let omega = 2.0 * core::f64::consts::PI / tbar;
        for (m, expect_kept) in [(3usize, true), (40usize, false)] {
            let grid: Vec<f64> =
                (0..n).map(|j| sin(m as f64 * omega * tbar * j as f64 / n as f64)).collect();
            let out = smoothing_r(&grid, tbar, 10.0 * omega);
            for (a, b) in out.iter().zip(&grid) {
                let want = if expect_kept { *b } else { 0.0 };
                assert!((a - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn smoothing_idempotent_and_parity_preserving() {
        let n = 256;
        let tbar = period();
        let grid: Vec<f64> = (0..n)
            .map(|j| {
                let s = tbar * j as f64 / n as f64;
                sin(2.0 * core::f64::consts::PI * s / tbar).powi(3) * 0.7
            })
            .collect();
        let theta = 6.0;
        let once = smoothing_r(&grid, tbar, theta);
        let twice = smoothing_r(&once, tbar, theta);
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).abs() < 1e-13);
        }
        // Odd input stays odd: f(-s) = -f(s) on the grid means
        // out[n-j] = -out[j].
        for j in 1..n {
            assert!((once[j] + once[n - j]).abs() < 1e-13);
        }
    }

    #[test]
    fn smoothing_tail_on_tilt_decays_fast() {
        let eng = engine();
        let n = ENGINE_GRID;
        let grid: Vec<f64> =
            (0..n).map(|j| eng.phibar.value(eng.period * j as f64 / n as f64)).collect();
        let sup_tail = |eps: f64| -> f64 {
            let theta = floor(1.0 / eps + 1e-9);
            // Mode-index cutoff as used by the tilt construction.
            let kept = smoothing_r(&grid, eng.period, theta * eng.omega);
            grid.iter().zip(&kept).map(|(a, b)| fabs(a - b)).fold(0.0f64, f64::max)
        };
        let t8 = sup_tail(1.0 / 8.0);
        let t16 = sup_tail(1.0 / 16.0);
        assert!(t8 < 1e-3, "tail at 1/8: {t8}");
        // Halving eps must shrink the tail by at least 2^3.
        assert!(t16 < t8 / 8.0, "tails {t8} -> {t16}");
    }

    #[test]
    fn chart_round_trip_and_determinant() {
        let eng = engine();
        let eps = 1.0 / 12.0;
        let chart = FermiChart::new(&eng.curve, eps);
        let zmax = 1.0 / (2.0 * sqrt(2.0) * eps);
        let mut worst = 0.0f64;
        for i in 0..24 {
            let sig = eng.period * i as f64 / 24.0;
            for jz in 0..9 {
                let z = -zmax + 2.0 * zmax * jz as f64 / 8.0;
                assert!(chart.det_normalized(sig, z) >= 0.25);
                let (x1, x2) = chart.forward(sig, z);
                let (sr, zr) = chart.inverse(x1, x2, sig + 0.05, z - 0.1).expect("invertible");
                let (x1b, x2b) = chart.forward(sr, zr);
                worst = worst.max(fabs(x1b - x1).max(fabs(x2b - x2)));
                assert!(fabs(sr - sig) < 1e-9 && fabs(zr - z) < 1e-9);
            }
        }
        assert!(worst < 1e-10, "round trip {worst}");
    }

    #[test]
    fn chart_laplacian_matches_cartesian_on_global_field() {
        // G(x) = sin(2 pi x1 / Lh) exp(-x2^2) pulled back through the chart;
        // the chart Laplacian must reproduce the Cartesian one identically.
        let eng = engine();
        let eps = 1.0 / 10.0;
        let chart = FermiChart::new(&eng.curve, eps);
        let lh = eng.curve.horizontal_period() / eps;
        let w = 2.0 * core::f64::consts::PI / lh;
        let g_and_derivs = |x1: f64, x2: f64| {
            let e = exp(-x2 * x2);
            let g = sin(w * x1) * e;
            let gx = w * cos(w * x1) * e;
            let gy = sin(w * x1) * e * (-2.0 * x2);
            let gxx = -w * w * g;
            let gxy = w * cos(w * x1) * e * (-2.0 * x2);
            let gyy = sin(w * x1) * e * (4.0 * x2 * x2 - 2.0);
            (g, gx, gy, gxx, gxy, gyy)
        };
        let mut worst = 0.0f64;
        for i in 0..7 {
            let sig = -0.25 + 0.5 * i as f64 / 6.0;
            for jz in 0..5 {
                let z = -2.0 + jz as f64;
                let (x1, x2) = chart.forward(sig, z);
                let (_, gx, gy, gxx, gxy, gyy) = g_and_derivs(x1, x2);
                let (k, kp) = curvature_pair(sig);
                let d = 1.0 - eps * z * k;
                // Chart derivative frames.
                let gp = (0.5 * k * k, -kp);
                let nv = (kp, 0.5 * k * k);
                let zs = (gp.0 * d / eps, gp.1 * d / eps);
                let zss = (
                    k * d / eps * nv.0 - z * kp * gp.0,
                    k * d / eps * nv.1 - z * kp * gp.1,
                );
                let hess = |a: (f64, f64), b: (f64, f64)| {
                    gxx * a.0 * b.0 + gxy * (a.0 * b.1 + a.1 * b.0) + gyy * a.1 * b.1
                };
                let u_sig = gx * zs.0 + gy * zs.1;
                let u_sigsig = hess(zs, zs) + gx * zss.0 + gy * zss.1;
                let u_z = gx * nv.0 + gy * nv.1;
                let u_zz = hess(nv, nv);
                let lap_chart = fermi_laplacian_exact(
                    eps,
                    sig,
                    z,
                    eps * u_sig,
                    eps * eps * u_sigsig,
                    u_z,
                    u_zz,
                );
                worst = worst.max(fabs(lap_chart - (gxx + gyy)));
            }
        }
        assert!(worst < 1e-6, "chart-vs-cartesian defect {worst}");
    }

    #[test]
    fn truncated_coefficients_converge_at_the_stated_orders() {
        // Differences (exact - truncated) applied to the flat layer profile,
        // measured across the eps sweep at fixed (sigma, z).
        let sig = 0.9;
        let z = 1.7;
        let epss = [1.0 / 8.0, 1.0 / 12.0, 1.0 / 16.0, 1.0 / 24.0, 1.0 / 32.0];
        for (order, want) in [(1usize, 2.0), (5usize, 6.0)] {
            let diffs: Vec<f64> = epss
                .iter()
                .map(|&eps| {
                    let (ae, be, ce) = lap_coeffs_exact(eps, sig, z);
                    let (at, bt, ct) = lap_coeffs_truncated(order, eps, sig, z);
                    // Apply to u = v0(z): only dz-terms act, plus a dss probe.
                    let probe_ss = 0.3;
                    fabs((ce - ct) * v0p(z)) + fabs((ae - at) * probe_ss) + fabs(be - bt)
                })
                .collect();
            let (slope, r2) = fit_slope(&epss, &diffs);
            assert!(
                (slope - want).abs() < 0.35 && r2 > 0.999,
                "order {order}: slope {slope} (R2 {r2})"
            );
        }
    }

    #[test]
    fn assembled_field_vanishes_at_the_symmetric_point() {
        let eng = engine();
        let tilt = eng.tilt(1.0 / 16.0, TiltMode::Zero);
        let v = eng.vtilde_val(0.0, &[0.0], 1.0 / 16.0, &tilt, Variant::Full)[0];
        assert!(fabs(v) < 1e-14, "center value {v}");
    }

    #[test]
    fn assembled_field_approaches_the_wells() {
        let eng = engine();
        for &eps in &[1.0 / 8.0, 1.0 / 32.0] {
            let tilt = eng.tilt(eps, TiltMode::Leading);
            for sig in [0.3, 2.0, 5.1] {
                let ps = tilt.phistar_value(sig);
                let v =
                    eng.vtilde_val(sig, &[15.0 + ps, -15.0 + ps], eps, &tilt, Variant::Full);
                assert!(fabs(v[0] - 1.0) < 1e-6, "upper well {}", v[0]);
                assert!(fabs(v[1] + 1.0) < 1e-6, "lower well {}", v[1]);
            }
        }
    }

    #[test]
    fn corrections_scale_quadratically() {
        let eng = engine();
        let epss = [1.0 / 8.0, 1.0 / 12.0, 1.0 / 16.0, 1.0 / 24.0, 1.0 / 32.0];
        let sups: Vec<f64> = epss
            .iter()
            .map(|&eps| {
                let tilt = eng.tilt(eps, TiltMode::Zero);
                let mut sup = 0.0f64;
                for i in 0..16 {
                    let sig = eng.period * (i as f64 + 0.5) / 16.0;
                    let ts: Vec<f64> = (0..41).map(|j| -4.0 + 0.2 * j as f64).collect();
                    let v = eng.vtilde_val(sig, &ts, eps, &tilt, Variant::Full);
                    for (vv, tv) in v.iter().zip(&ts) {
                        sup = sup.max(fabs(vv - v0(*tv)));
                    }
                }
                sup
            })
            .collect();
        let (slope, r2) = fit_slope(&epss, &sups);
        assert!((slope - 2.0).abs() < 0.2 && r2 > 0.999, "slope {slope} R2 {r2}");
    }

    #[test]
    fn truncated_tilt_agrees_with_full_at_high_cutoff() {
        let eng = engine();
        let tilt = eng.tilt(1.0 / 96.0, TiltMode::Leading);
        for sig in [0.21, 1.0, 3.33, 6.8] {
            let full = tilt.phi_derivs(sig)[0];
            let star = tilt.phistar_value(sig);
            assert!(fabs(full - star) < 1e-12, "at {sig}: {full} vs {star}");
        }
    }

    #[test]
    fn global_field_symmetries_and_far_field() {
        let eng = engine();
        let eps = 1.0 / 16.0;
        let field = GlobalField::new(eng, eps, TiltMode::Leading);
        let lh = field.x_period;
        let mut worst = 0.0f64;
        let pts = [
            (1.3, 2.0),
            (5.0, -6.0),
            (9.1, 11.0),
            (0.4, -0.9),
            (13.0, 4.5),
            (2.2, 17.0),
        ];
        for &(x1, x2) in &pts {
            let v = field.eval(x1, x2);
            let va = field.eval(-x1, -x2);
            let vb = field.eval(x1 + lh / 2.0, -x2);
            worst = worst.max(fabs(v + va)).max(fabs(v + vb));
            assert!(v.abs() <= 1.0 + 0.1);
        }
        assert!(worst < 1e-9, "symmetry defect {worst}");
        // Far away the field is exactly the side indicator.
        assert_eq!(field.eval(3.0, 40.0), 1.0);
        assert_eq!(field.eval(3.0, -40.0), -1.0);
    }

    #[test]
    fn global_field_continuous_across_the_cutoff() {
        let eng = engine();
        let eps = 1.0 / 64.0;
        let field = GlobalField::new(eng, eps, TiltMode::Leading);
        let chart = FermiChart::new(&eng.curve, eps);
        let tilt = eng.tilt(eps, TiltMode::Leading);
        let edge = field.cutoff_outer_edge();
        let mut worst_val = 0.0f64;
        let mut worst_grad = 0.0f64;
        for sig in [0.4, 1.9, 4.4] {
            for sgn in [1.0, -1.0] {
                let ps = tilt.phistar_value(sig);
                let probe = |t: f64| {
                    let (x1, x2) = chart.forward(sig, sgn * t + ps);
                    field.eval(x1, x2)
                };
                let h = 1e-3;
                let inner = probe(edge - 2.0 * h);
                let outer = probe(edge + 2.0 * h);
                worst_val = worst_val.max(fabs(inner - sgn)).max(fabs(outer - sgn));
                let g_in = (probe(edge - h) - probe(edge - 3.0 * h)) / (2.0 * h);
                let g_out = (probe(edge + 3.0 * h) - probe(edge + h)) / (2.0 * h);
                worst_grad = worst_grad.max(fabs(g_in - g_out));
            }
        }
        assert!(worst_val < 1e-6, "value defect at cutoff {worst_val}");
        assert!(worst_grad < 1e-6, "gradient defect at cutoff {worst_grad}");
    }

    #[test]
    fn overshoot_of_the_assembled_field_is_quadratically_small() {
        let eng = engine();
        let mut cmax = 0.0f64;
        for &eps in &[1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0] {
            let tilt = eng.tilt(eps, TiltMode::Leading);
            let mut over = 0.0f64;
            for i in 0..24 {
                let sig = eng.period * (i as f64 + 0.5) / 24.0;
                let ts: Vec<f64> = (0..161).map(|j| -8.0 + 0.1 * j as f64).collect();
                let v = eng.vtilde_val(sig, &ts, eps, &tilt, Variant::Full);
                for vv in v {
                    over = over.max(fabs(vv) - 1.0);
                }
            }
            cmax = cmax.max(over.max(0.0) / (eps * eps));
        }
        // The eta-corrections may overshoot the wells by O(eps^2) only.
        assert!(cmax < 1.0, "overshoot constant {cmax}");
    }
}
