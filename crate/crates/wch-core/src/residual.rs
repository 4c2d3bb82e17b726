//! Measurement harness for the fourth-order interface residual: eps-sweep
//! norms with convergence-slope fits, the kernel projection of the residual,
//! zero-set and monotonicity scans, localization measurements, symmetry
//! defects, and an independent Cartesian finite-difference cross-check of
//! the jet evaluator.

use alloc::vec;
use alloc::vec::Vec;
use libm::{exp, fabs, log, sqrt, tanh};

use crate::approx::{zeta_bump, Engine, FermiChart, TiltMode, Variant};
use crate::curve::curvature_pair;
use crate::layer::{v0, v0p, v0pp, wpp_v0, wpp_v0_d1, ProfileStack};
use crate::phibar::gbar;
use crate::quad::simpson_weights;

/// Resolutions used by every convergence sweep.
pub const EPS_SWEEP: [f64; 5] = [1.0 / 8.0, 1.0 / 12.0, 1.0 / 16.0, 1.0 / 24.0, 1.0 / 32.0];

/// Least-squares slope of log(val) against log(eps), with R^2.
pub fn fit_slope(epss: &[f64], vals: &[f64]) -> (f64, f64) {
    let n = epss.len() as f64;
    let xs: Vec<f64> = epss.iter().map(|&e| log(e)).collect();
    let ys: Vec<f64> = vals.iter().map(|&v| log(v)).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let b = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| {
        let d = y - (slope * x + b);
        d * d
    }).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (slope, r2)
}

/// Sup-norm weight: 1 on |t| <= 1, exponential decay exp(-delta |t|) beyond
/// |t| >= 2, smoothly blended in between.
pub fn psi_weight(t: f64, delta: f64) -> f64 {
    let r = fabs(t);
    let z = zeta_bump(r);
    z + (1.0 - z) * exp(-delta * r)
}

/// Midpoint sigma grid over one curvature period.
pub fn sigma_grid(n: usize, period: f64) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) * period / n as f64).collect()
}

fn stack_jet4(stack: &ProfileStack, t: f64) -> [f64; 4] {
    [stack.eval(0, t), stack.eval(1, t), stack.eval(2, t), stack.eval(3, t)]
}

/// Weighted sup norm and kernel projection of the residual across one
/// period.
pub struct SweepNorms {
    pub sup_weighted: f64,
    /// Kernel projection p(sigma_i) = int F(sigma_i, t) v0'(t) dt.
    pub projection: Vec<f64>,
    pub sigma: Vec<f64>,
}

/// Vertical-monotonicity scan of the assembled field.
pub struct MonotonicityScan {
    /// min over the tube of the vertical Cartesian derivative of the field.
    pub min_dx2v: f64,
    /// Same minimum restricted to |x2| > 1/(2 eps).
    pub min_outside: f64,
}

/// Interface zero-set scan.
pub struct ZeroSetScan {
    /// sup |z0(sigma)| over the located zero set (chart normal coordinate).
    pub sup_abs: f64,
    /// sup |z0(sigma) - phi(sigma)| against the full tilt.
    pub sup_dev: f64,
}

/// Residual symmetry defects (relative sup norms).
pub struct SymmetryDefect {
    /// F(sigma, t) + F(-sigma, -t).
    pub reflection: f64,
    /// F(sigma, t) + F(sigma + T/2, -t).
    pub half_shift: f64,
}

/// Cartesian finite-difference cross-check of the jet evaluator.
pub struct CartesianCheck {
    pub f_fd: f64,
    pub f_jet: f64,
    pub rel: f64,
    pub dx2_fd: f64,
    pub dx2_jet: f64,
    pub dx2_rel: f64,
}

const NS_NORM: usize = 64;

impl Engine {
    /// Pointwise fifth-order residual reference assembled from the layer
    /// profiles: k^5 A(t) + k k'^2 B(t).
    pub fn fifth_order_reference(&self, sig: f64, t: &[f64]) -> Vec<f64> {
        let (kv, kpv) = curvature_pair(sig);
        let k5 = kv * kv * kv * kv * kv;
        let kkp2 = kv * kpv * kpv;
        t.iter()
            .map(|&tv| {
                let eta = stack_jet4(&self.stacks.eta, tv);
                let eta1 = stack_jet4(&self.stacks.eta1, tv);
                let eta2 = stack_jet4(&self.stacks.eta2, tv);
                let eta3 = stack_jet4(&self.stacks.eta3, tv);
                let a = wpp_v0(tv);
                let ap = wpp_v0_d1(tv);
                let v = v0(tv);
                let p = v0p(tv);
                let pp = v0pp(tv);
                let w1v = a * eta1[0] - eta1[2];
                let w1p = ap * eta1[0] + a * eta1[1] - eta1[3];
                let w2p = ap * eta2[0] + a * eta2[1] - eta2[3];
                let w3p = ap * eta3[0] + a * eta3[1] - eta3[3];
                let qe1 = -(6.0
                    * (pp * eta[0] * eta1[0]
                        + 2.0 * p * (eta[1] * eta1[0] + eta[0] * eta1[1])
                        + v * (eta[2] * eta1[0] + 2.0 * eta[1] * eta1[1] + eta[0] * eta1[2])))
                    + a * 6.0 * v * eta[0] * eta1[0]
                    + 6.0 * v * (eta[0] * w1v + eta1[0] * (0.5 * tv * p));
                let agrp = -4.0 * tv * tv * p - 5.0 * tv * tv * tv * pp + 2.0 * tv * eta[2]
                    - 1.5 * qe1
                    + 3.0 * tv * w1p
                    + 12.0 * eta[0] * eta[1] * v
                    + 6.0 * eta[0] * eta[0] * p
                    - 1.5 * eta1[2]
                    + 4.5 * w1v
                    + 2.5 * eta[1]
                    + 2.0 * w2p;
                let bgrp = 2.0 * w3p - 9.0 * tv * tv * p - 4.0 * eta[1] - 18.0 * w1v;
                k5 * agrp + kkp2 * bgrp
            })
            .collect()
    }

    /// Target of the kernel projection at fifth order: d_star * gbar(sigma).
    pub fn projection_target(&self, sig: f64) -> f64 {
        let (k, kp) = curvature_pair(sig);
        self.d_star * gbar(k, kp)
    }

    /// Weighted sup norm of the residual and its kernel projection across a
    /// midpoint sigma grid, with t on a Simpson grid spanning the tube.
    /// Uses the pinned quadrature step 0.025 and weight rate 1.
    pub fn sweep_norms(&self, eps: f64, mode: TiltMode, variant: Variant) -> SweepNorms {
        self.sweep_norms_opt(eps, mode, variant, 0.025, 1.0)
    }

    /// `sweep_norms` with an explicit transverse quadrature step and
    /// weight decay rate.
    pub fn sweep_norms_opt(
        &self,
        eps: f64,
        mode: TiltMode,
        variant: Variant,
        t_step: f64,
        delta: f64,
    ) -> SweepNorms {
        let tilt = self.tilt(eps, mode);
        let r = 0.25 / eps - 0.15;
        let mut nq = (2.0 * r / t_step) as usize;
        if nq % 2 == 1 {
            nq += 1;
        }
        let h = 2.0 * r / nq as f64;
        let tq: Vec<f64> = (0..=nq).map(|i| -r + h * i as f64).collect();
        let ws = simpson_weights(nq + 1, h);
        let sigma = sigma_grid(NS_NORM, self.period);
        let mut sup_weighted = 0.0f64;
        let mut projection = vec![0.0; NS_NORM];
        for (i, &sg) in sigma.iter().enumerate() {
            let ps0 = tilt.phistar_value(sg);
            let z0: Vec<f64> = tq.iter().map(|t| t + ps0).collect();
            let res = self.residual_batch(sg, &z0, eps, &tilt, variant);
            let mut p = 0.0;
            for (q, &tv) in tq.iter().enumerate() {
                sup_weighted = sup_weighted.max(fabs(res.f[q]) * psi_weight(tv, delta));
                p += ws[q] * res.f[q] * v0p(tv);
            }
            projection[i] = p;
        }
        SweepNorms { sup_weighted, projection, sigma }
    }

    /// Minimum vertical derivative of the field over the tube (tilt-leading).
    pub fn monotonicity_scan(&self, eps: f64, refine: usize) -> MonotonicityScan {
        let tilt = self.tilt(eps, TiltMode::Leading);
        let ns = 96 * refine;
        let r = 0.25 / eps - 0.05;
        let step = 0.1 / refine as f64;
        let mut zq = Vec::new();
        let mut z = -r;
        while z <= r + 1e-9 {
            zq.push(z);
            z += step;
        }
        let mut min_dx2v = f64::INFINITY;
        let mut min_outside = f64::INFINITY;
        for sg in sigma_grid(ns, self.period) {
            let res = self.residual_batch(sg, &zq, eps, &tilt, Variant::Full);
            for q in 0..zq.len() {
                min_dx2v = min_dx2v.min(res.dx2v[q]);
                if fabs(res.x2[q]) > 0.5 / eps {
                    min_outside = min_outside.min(res.dx2v[q]);
                }
            }
        }
        MonotonicityScan { min_dx2v, min_outside }
    }

    /// Locate the zero set of the field by bisection along each normal
    /// fiber and compare it with the full tilt.
    pub fn zero_set_scan(&self, eps: f64) -> ZeroSetScan {
        let tilt = self.tilt(eps, TiltMode::Leading);
        let ns = 128;
        let sigs = sigma_grid(ns, self.period);
        let mut sup_abs = 0.0f64;
        let mut sup_dev = 0.0f64;
        for &sg in &sigs {
            let phi = tilt.phi_derivs(sg)[0];
            let mut lo = phi - 0.5;
            let mut hi = phi + 0.5;
            for _ in 0..52 {
                let mid = 0.5 * (lo + hi);
                let vm = self.vtilde_val(sg, &[mid], eps, &tilt, Variant::Full)[0];
                if vm < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let z0 = 0.5 * (lo + hi);
            sup_abs = sup_abs.max(fabs(z0));
            sup_dev = sup_dev.max(fabs(z0 - phi));
        }
        ZeroSetScan { sup_abs, sup_dev }
    }

    /// Relative effect on the kernel projection of truncating the residual
    /// by a bump supported in |t| <= 1/(8 eps) + 6 (evaluated deep in the
    /// asymptotic regime, eps = 1/96).
    pub fn localization_cutoff_effect(&self) -> f64 {
        let eps = 1.0 / 96.0;
        let tilt = self.tilt(eps, TiltMode::Leading);
        let r = 0.45 / eps;
        let mut nq = (2.0 * r / 0.05) as usize;
        nq += nq % 2;
        let h = 2.0 * r / nq as f64;
        let tq: Vec<f64> = (0..=nq).map(|i| -r + h * i as f64).collect();
        let ws = simpson_weights(nq + 1, h);
        let mut worst = 0.0f64;
        for sg in [0.5, self.period / 4.0, 2.0] {
            let ps0 = tilt.phistar_value(sg);
            let z0: Vec<f64> = tq.iter().map(|t| t + ps0).collect();
            let res = self.residual_batch(sg, &z0, eps, &tilt, Variant::Full);
            let mut pfull = 0.0;
            let mut pchi = 0.0;
            for (q, &tv) in tq.iter().enumerate() {
                let chi = zeta_bump(fabs(tv) - 1.0 / (8.0 * eps) - 4.0);
                pfull += ws[q] * res.f[q] * v0p(tv);
                pchi += ws[q] * chi * res.f[q] * v0p(tv);
            }
            worst = worst.max(fabs(pfull - pchi) / fabs(pfull).max(1e-300));
        }
        worst
    }

    /// Weighted residual magnitude outside the inner band |t| < 1/(8 eps):
    /// (absolute, relative to the overall weighted sup).
    pub fn band_tail(&self, eps: f64) -> (f64, f64) {
        let tilt = self.tilt(eps, TiltMode::Leading);
        let r = 0.25 / eps - 0.15;
        let mut tq = Vec::new();
        let mut t = -r;
        while t <= r + 1e-9 {
            tq.push(t);
            t += 0.05;
        }
        let mut wout = 0.0f64;
        let mut wtot = 0.0f64;
        for sg in [0.5, self.period / 4.0, 2.0] {
            let ps0 = tilt.phistar_value(sg);
            let z0: Vec<f64> = tq.iter().map(|t| t + ps0).collect();
            let res = self.residual_batch(sg, &z0, eps, &tilt, Variant::Full);
            for (q, &tv) in tq.iter().enumerate() {
                let wf = fabs(res.f[q]) * psi_weight(tv, 1.0);
                wtot = wtot.max(wf);
                if fabs(tv) >= 1.0 / (8.0 * eps) {
                    wout = wout.max(wf);
                }
            }
        }
        (wout, wout / wtot)
    }

    /// Sum of |sine coefficient| of the tilt beyond mode index theta.
    pub fn sine_tail(&self, theta: usize) -> f64 {
        self.sine.iter().skip(theta + 1).map(|b| fabs(*b)).sum()
    }

    /// Residual symmetry defects under (sigma, t) -> (-sigma, -t) and
    /// (sigma, t) -> (sigma + T/2, -t), both of which flip the sign of F.
    pub fn symmetry_defect(&self, eps: f64) -> SymmetryDefect {
        let tilt = self.tilt(eps, TiltMode::Leading);
        let tq: Vec<f64> = (0..61).map(|i| -3.0 + 0.1 * i as f64).collect();
        let mut reflection = 0.0f64;
        let mut half_shift = 0.0f64;
        for sg in [0.37, 1.1, 2.6] {
            let zs = |base: f64, sign: f64| -> Vec<f64> {
                tq.iter().map(|t| sign * t + base).collect()
            };
            let f1 = self
                .residual_batch(sg, &zs(tilt.phistar_value(sg), 1.0), eps, &tilt, Variant::Full)
                .f;
            let scale = f1.iter().fold(0.0f64, |m, v| m.max(fabs(*v)));
            let f2 = self
                .residual_batch(-sg, &zs(tilt.phistar_value(-sg), -1.0), eps, &tilt, Variant::Full)
                .f;
            let sgh = sg + self.period / 2.0;
            let f3 = self
                .residual_batch(sgh, &zs(tilt.phistar_value(sgh), -1.0), eps, &tilt, Variant::Full)
                .f;
            for q in 0..tq.len() {
                reflection = reflection.max(fabs(f1[q] + f2[q]) / scale);
                half_shift = half_shift.max(fabs(f1[q] + f3[q]) / scale);
            }
        }
        SymmetryDefect { reflection, half_shift }
    }

    /// Evaluate the residual at one Cartesian point by pure finite
    /// differences of field values (no jets), Richardson-extrapolated over
    /// two grids, and compare with the jet evaluator.
    pub fn cartesian_cross_check(&self) -> CartesianCheck {
        let eps = 1.0 / 12.0;
        let tilt = self.tilt(eps, TiltMode::Leading);
        let chart = FermiChart::new(&self.curve, eps);
        // Near the raw-residual argmax: best signal-to-roundoff for FD.
        let (sigc, zc) = (1.848, -2.2);
        let (xc1, xc2) = chart.forward(sigc, zc);
        let d2c = [
            1.0 / 90.0,
            -3.0 / 20.0,
            1.5,
            -49.0 / 18.0,
            1.5,
            -3.0 / 20.0,
            1.0 / 90.0,
        ];
        let d1c = [-1.0 / 60.0, 9.0 / 60.0, -45.0 / 60.0, 0.0, 45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0];
        let field = |x1: f64, x2: f64| -> f64 {
            let (sg, zz) = chart.inverse(x1, x2, sigc, zc).expect("inside the tube");
            self.vtilde_val(sg, &[zz], eps, &tilt, Variant::Full)[0]
        };
        let mut res_f = [0.0f64; 2];
        let mut res_d1 = [0.0f64; 2];
        for (ig, h) in [0.12, 0.06].into_iter().enumerate() {
            let mut u = [[0.0f64; 13]; 13];
            for (i, row) in u.iter_mut().enumerate() {
                for (j, val) in row.iter_mut().enumerate() {
                    *val = field(xc1 + (i as f64 - 6.0) * h, xc2 + (j as f64 - 6.0) * h);
                }
            }
            let mut gf = [[0.0f64; 7]; 7];
            for i in 0..7 {
                for j in 0..7 {
                    let mut lap = 0.0;
                    for m in 0..7 {
                        lap += d2c[m] * (u[i + m][j + 3] + u[i + 3][j + m]);
                    }
                    lap /= h * h;
                    let uc = u[i + 3][j + 3];
                    gf[i][j] = -lap + uc * uc * uc - uc;
                }
            }
            let mut lap_g = 0.0;
            for m in 0..7 {
                lap_g += d2c[m] * (gf[m][3] + gf[3][m]);
            }
            lap_g /= h * h;
            let u0 = u[6][6];
            res_f[ig] = -lap_g + (3.0 * u0 * u0 - 1.0) * gf[3][3];
            let mut d1 = 0.0;
            for m in 0..7 {
                d1 += d1c[m] * u[6][m + 3];
            }
            res_d1[ig] = d1 / h;
        }
        let f_fd = (64.0 * res_f[1] - res_f[0]) / 63.0;
        let dx2_fd = (64.0 * res_d1[1] - res_d1[0]) / 63.0;
        let reference = self.residual_batch(sigc, &[zc], eps, &tilt, Variant::Full);
        let f_jet = reference.f[0];
        let dx2_jet = reference.dx2v[0];
        CartesianCheck {
            f_fd,
            f_jet,
            rel: fabs(f_fd - f_jet) / fabs(f_jet),
            dx2_fd,
            dx2_jet,
            dx2_rel: fabs(dx2_fd - dx2_jet) / fabs(dx2_jet),
        }
    }
}

/// Residual of the flat profile tanh(x2/sqrt(2)) under the same Cartesian
/// finite-difference assembly; a sanity floor for the cross-check.
pub fn flat_interface_fd_residual() -> f64 {
    let h = 0.04;
    let s2 = sqrt(2.0);
    let d2c = [
        1.0 / 90.0,
        -3.0 / 20.0,
        1.5,
        -49.0 / 18.0,
        1.5,
        -3.0 / 20.0,
        1.0 / 90.0,
    ];
    let mut u = [[0.0f64; 13]; 13];
    for row in u.iter_mut() {
        for (j, val) in row.iter_mut().enumerate() {
            *val = tanh((1.7 + (j as f64 - 6.0) * h) / s2);
        }
    }
    let mut gf = [[0.0f64; 7]; 7];
    for i in 0..7 {
        for j in 0..7 {
            let mut lap = 0.0;
            for m in 0..7 {
                lap += d2c[m] * (u[i + m][j + 3] + u[i + 3][j + m]);
            }
            lap /= h * h;
            let uc = u[i + 3][j + 3];
            gf[i][j] = -lap + uc * uc * uc - uc;
        }
    }
    let mut lap_g = 0.0;
    for m in 0..7 {
        lap_g += d2c[m] * (gf[m][3] + gf[3][m]);
    }
    lap_g /= h * h;
    let u0 = u[6][6];
    fabs(-lap_g + (3.0 * u0 * u0 - 1.0) * gf[3][3])
}

/// Convenience: sup |projection| over the sigma grid.
pub fn sup_abs(vals: &[f64]) -> f64 {
    vals.iter().fold(0.0f64, |m, v| m.max(fabs(*v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::test_engine as engine;
    use crate::curve::period;

    #[test]
    fn slope_fit_recovers_power_laws() {
        let epss = [0.1, 0.05, 0.025, 0.0125];
        let vals: Vec<f64> = epss.iter().map(|&e| 3.7 * e * e * e).collect();
        let (slope, r2) = fit_slope(&epss, &vals);
        assert!((slope - 3.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weight_is_one_inside_and_decays_outside() {
        assert_eq!(psi_weight(0.5, 1.0), 1.0);
        assert_eq!(psi_weight(-1.0, 1.0), 1.0);
        let w3 = psi_weight(3.0, 1.0);
        assert!((w3 - exp(-3.0)).abs() < 1e-15);
        assert!(psi_weight(2.5, 1.0) < psi_weight(1.5, 1.0));
    }

    /// Relative and absolute defects of the rescaled residual against the
    /// fifth-order closed form, plus the three-term variant against its
    /// third-order closed form, with zero tilt.
    fn closed_form_defects(eps: f64) -> (f64, f64, f64) {
        let eng = engine();
        let zq: Vec<f64> = (0..81).map(|i| -8.0 + 0.2 * i as f64).collect();
        let tilt = eng.tilt(eps, TiltMode::Zero);
        let mut rel5 = 0.0f64;
        let mut abs5 = 0.0f64;
        let mut rel3 = 0.0f64;
        for sig in [0.31, 0.9, period() / 4.0, 2.2, 3.0] {
            let f = eng.residual_batch(sig, &zq, eps, &tilt, Variant::Full).f;
            let e5 = eng.fifth_order_reference(sig, &zq);
            let scale5 = sup_abs(&e5).max(1e-12);
            for q in 0..zq.len() {
                let d = fabs(f[q] - eps.powi(5) * e5[q]);
                abs5 = abs5.max(d);
                rel5 = rel5.max(d / eps.powi(5) / scale5);
            }
            let f3 = eng.residual_batch(sig, &zq, eps, &tilt, Variant::V012).f;
            let (k, _) = curvature_pair(sig);
            let ref3: Vec<f64> = zq
                .iter()
                .map(|&z| -1.5 * k * k * k * (2.0 * z * v0pp(z) + v0p(z)))
                .collect();
            let scale3 = sup_abs(&ref3).max(1e-12);
            for q in 0..zq.len() {
                rel3 = rel3.max(fabs(f3[q] / eps.powi(3) - ref3[q]) / scale3);
            }
        }
        (rel5, abs5, rel3)
    }

    #[test]
    fn jet_residual_matches_fifth_order_reference_at_tiny_eps() {
        // With zero tilt the residual divided by eps^5 approaches the
        // closed-form fifth-order profile, and the three-term variant
        // divided by eps^3 its own closed form. At eps = 1e-2 both rescaled
        // defects are genuine O(eps) truncation; at eps = 1e-3 the
        // fifth-order signal (~1e-15) sits at the double-precision floor,
        // so there we bound the absolute defect instead.
        let (rel5_a, _, rel3_a) = closed_form_defects(1e-2);
        assert!(rel5_a < 0.07, "rescaled fifth-order defect {rel5_a}");
        assert!(rel3_a < 0.22, "rescaled third-order defect {rel3_a}");
        let (rel5_b, _, _) = closed_form_defects(3e-3);
        assert!(
            rel5_b < 0.5 * rel5_a,
            "defect did not shrink with eps: {rel5_a} -> {rel5_b}"
        );
        let (_, abs5_c, rel3_c) = closed_form_defects(1e-3);
        assert!(abs5_c < 3e-14, "absolute fifth-order defect {abs5_c}");
        assert!(rel3_c < 0.022, "rescaled third-order defect {rel3_c}");
    }

    #[test]
    fn fifth_order_reference_projects_onto_the_target() {
        let eng = engine();
        let n = 1280;
        let h = 32.0 / n as f64;
        let tq: Vec<f64> = (0..=n).map(|i| -16.0 + h * i as f64).collect();
        let ws = simpson_weights(n + 1, h);
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for sg in sigma_grid(16, eng.period) {
            let e5 = eng.fifth_order_reference(sg, &tq);
            let p: f64 = (0..=n).map(|q| ws[q] * e5[q] * v0p(tq[q])).sum();
            let target = eng.projection_target(sg);
            scale = scale.max(fabs(target));
            worst = worst.max(fabs(p - target));
        }
        assert!(worst < 1e-5 * scale, "projection defect {worst} vs scale {scale}");
    }

    #[test]
    fn residual_is_antisymmetric_under_the_curve_symmetries() {
        let eng = engine();
        let d = eng.symmetry_defect(1.0 / 16.0);
        assert!(d.reflection < 1e-6, "reflection defect {}", d.reflection);
        assert!(d.half_shift < 1e-6, "half-shift defect {}", d.half_shift);
    }

    #[test]
    fn finite_difference_cross_check_agrees_with_jets() {
        let eng = engine();
        let c = eng.cartesian_cross_check();
        assert!(c.rel < 1e-4, "residual rel diff {} (fd {}, jet {})", c.rel, c.f_fd, c.f_jet);
        assert!(c.dx2_rel < 1e-8, "dx2 rel diff {}", c.dx2_rel);
        assert!(flat_interface_fd_residual() < 1e-6);
    }

    #[test]
    fn vertical_derivative_is_positive_in_the_tube() {
        let eng = engine();
        let scan = eng.monotonicity_scan(1.0 / 8.0, 1);
        assert!(scan.min_dx2v > 0.0, "min dx2v {}", scan.min_dx2v);
        assert!(scan.min_outside > 0.0, "min outside {}", scan.min_outside);
    }

    #[test]
    fn zero_set_stays_within_a_fraction_of_eps() {
        let eng = engine();
        let eps = 1.0 / 8.0;
        let scan = eng.zero_set_scan(eps);
        let ratio = scan.sup_abs / eps;
        assert!(ratio > 0.5 && ratio < 1.0, "sup|z0|/eps = {ratio}");
        assert!(scan.sup_dev < scan.sup_abs, "deviation {} vs abs {}", scan.sup_dev, scan.sup_abs);
    }

    #[test]
    fn cutoff_truncation_of_the_projection_is_negligible() {
        // Restricting the kernel projection to the bump-cutoff support
        // changes it by an exponentially small relative amount.
        let eng = engine();
        let effect = eng.localization_cutoff_effect();
        assert!(effect < 1e-8, "cutoff effect {effect}");
    }

    #[test]
    fn vertical_rate_of_the_normal_coordinate_near_the_axis() {
        // Near the vertical-tangent point of the curve, dz/dx2 through the
        // inverse chart follows (|k'(0)|/2) x2^2 eps^2.
        let eng = engine();
        for &eps in &[1.0 / 8.0, 1.0 / 32.0] {
            let chart = FermiChart::new(&eng.curve, eps);
            let (x1, x2) = (0.05, 1.0);
            let (sig, z) = chart
                .inverse(x1, x2, eps * x2, -x1)
                .expect("point lies in the tube");
            let (k, _) = curvature_pair(sig);
            let rate = 0.5 * k * k / (1.0 - eps * z * k);
            let predicted = 0.5 * x2 * x2 * eps * eps;
            let ratio = rate / predicted;
            assert!(ratio > 0.8 && ratio < 1.2, "eps {eps}: ratio {ratio}");
        }
    }

    #[test]
    fn truncation_tail_of_the_tilt_collapses_with_theta() {
        let eng = engine();
        let t8 = eng.sine_tail(8);
        let t16 = eng.sine_tail(16);
        let t32 = eng.sine_tail(32);
        assert!(t8 < 1e-3 && t8 > 1e-6, "tail(8) = {t8}");
        assert!(t16 < 1e-8, "tail(16) = {t16}");
        assert!(t32 < 1e-13, "tail(32) = {t32}");
    }
}
