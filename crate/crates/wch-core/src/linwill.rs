//! The linearized Willmore operator on curvature-period-periodic functions,
//!
//!   L0 f = f'''' + 5 k k' f' + (5/2) k^2 f'' + (3 - (5/4) k^4) f,
//!
//! discretized by Fourier collocation with a band-limited spectral derivative.
//! Its kernel on unrestricted periodic functions is spanned by four
//! geometrically generated fields (translations, rotation, dilation of the
//! underlying curve); restricting to the symmetry class of functions odd
//! under both reflection s -> -s and the half-period shift removes the kernel
//! and makes the collocation matrix solidly invertible.

use alloc::vec;
use alloc::vec::Vec;
use libm::fabs;

use crate::curve::{curvature_pair, period};
use crate::fft::Spectral;
use crate::linalg::DenseLu;

/// Band limit used for all spectral derivatives of the operator; keeps the
/// amplified roundoff of the fourth derivative far below the needed
/// tolerances while leaving plenty of resolved modes for analytic data.
pub const DEFAULT_MCUT: usize = 96;

pub struct LinearizedOperator {
    pub n: usize,
    pub period: f64,
    pub mcut: usize,
    sp: Spectral,
    /// Grid s_j = j T / n.
    pub s: Vec<f64>,
    pub k: Vec<f64>,
    pub kp: Vec<f64>,
}

/// Result of a restricted solve L0 phi = g.
pub struct SolveReport {
    pub phi: Vec<f64>,
    /// sup |L0 phi - g| via the spectral apply.
    pub residual_sup: f64,
    pub rhs_sup: f64,
    /// 1-norm condition number of the symmetry-restricted collocation matrix.
    pub condition: f64,
    /// Stability constant sup|phi| / sup|g|.
    pub stability: f64,
}

/// The four kernel fields with their numerically evaluated data.
pub struct KernelFields {
    /// Grid values of each field (secular fields evaluated as c0*s*u + v).
    pub values: [Vec<f64>; 4],
    /// sup |L0 psi_i| over the period.
    pub residual_sup: [f64; 4],
    /// sup |psi_i|.
    pub norm_sup: [f64; 4],
    /// Relative defect of each field from the solver's symmetry class
    /// (all are far from it; that is why the restricted solve is invertible).
    pub symmetry_defect: [f64; 4],
    /// Rows: fields; columns: (value at 0, value at T, f'' at 0, f'' at T),
    /// the endpoint data on one period including the secular jumps.
    pub boundary_table: [[f64; 4]; 4],
    pub boundary_det: f64,
    /// Horizontal period gamma1(T) = c0 * T of the curve.
    pub gamma1_t: f64,
}

impl LinearizedOperator {
    pub fn new(n: usize, mcut: usize) -> Self {
        assert!(n.is_power_of_two() && n >= 128);
        assert!(mcut < n / 2);
        let t = period();
        let mut s = Vec::with_capacity(n);
        let mut k = Vec::with_capacity(n);
        let mut kp = Vec::with_capacity(n);
        for j in 0..n {
            let sj = t * j as f64 / n as f64;
            let (kj, kpj) = curvature_pair(sj);
            s.push(sj);
            k.push(kj);
            kp.push(kpj);
        }
        LinearizedOperator { n, period: t, mcut, sp: Spectral::new(n, t), s, k, kp }
    }

    fn d(&self, f: &[f64], order: u32) -> Vec<f64> {
        self.sp.derivative(f, order, self.mcut)
    }

    /// L0 f with the conservation-law-reduced zeroth coefficient 3 - (5/4)k^4.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let d1 = self.d(f, 1);
        let d2 = self.d(f, 2);
        let d4 = self.d(f, 4);
        (0..self.n)
            .map(|j| {
                let k = self.k[j];
                let k2 = k * k;
                d4[j] + 5.0 * k * self.kp[j] * d1[j] + 2.5 * k2 * d2[j]
                    + (3.0 - 1.25 * k2 * k2) * f[j]
            })
            .collect()
    }

    /// Same operator with the zeroth coefficient written as 3(k')^2 - k^4/2;
    /// identical to [`Self::apply`] by the curvature first integral.
    pub fn apply_alternative_zeroth(&self, f: &[f64]) -> Vec<f64> {
        let d1 = self.d(f, 1);
        let d2 = self.d(f, 2);
        let d4 = self.d(f, 4);
        (0..self.n)
            .map(|j| {
                let k = self.k[j];
                let kp = self.kp[j];
                let k2 = k * k;
                d4[j] + 5.0 * k * kp * d1[j] + 2.5 * k2 * d2[j]
                    + (3.0 * kp * kp - 0.5 * k2 * k2) * f[j]
            })
            .collect()
    }

    /// L0 applied to the affine-in-s function s*u(s) + v(s) with u, v
    /// periodic: s L0(u) + [4u''' + 5k^2 u' + 5kk' u] + L0(v).
    pub fn apply_secular(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let lu = self.apply(u);
        let lv = self.apply(v);
        let u1 = self.d(u, 1);
        let u3 = self.d(u, 3);
        (0..self.n)
            .map(|j| {
                let k = self.k[j];
                self.s[j] * lu[j] + 4.0 * u3[j] + 5.0 * k * k * u1[j]
                    + 5.0 * k * self.kp[j] * u[j] + lv[j]
            })
            .collect()
    }

    fn refl(&self, i: usize) -> usize {
        (self.n - i) % self.n
    }

    fn half(&self, i: usize) -> usize {
        (i + self.n / 2) % self.n
    }

    /// Pointwise projector onto the symmetry class (odd under reflection and
    /// under the half-period shift): P = (I - R - H + RH)/4.
    pub fn sym_project(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                0.25 * (f[i] - f[self.refl(i)] - f[self.half(i)] + f[self.half(self.refl(i))])
            })
            .collect()
    }

    /// Relative distance of f from the symmetry class.
    pub fn symmetry_defect(&self, f: &[f64]) -> f64 {
        let p = self.sym_project(f);
        let num = f
            .iter()
            .zip(p.iter())
            .map(|(a, b)| fabs(a - b))
            .fold(0.0f64, f64::max);
        let den = f.iter().map(|a| fabs(*a)).fold(0.0f64, f64::max);
        num / den
    }

    /// Dense collocation matrix (columns = spectral apply of unit vectors).
    fn collocation_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.apply(&e);
            for i in 0..n {
                a[i * n + j] = col[i];
            }
        }
        a
    }

    /// In-place row combination B <- P B for the dense projector.
    fn project_rows(&self, a: &mut [f64]) {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            let (r, h, rh) = (self.refl(i), self.half(i), self.half(self.refl(i)));
            for j in 0..n {
                out[i * n + j] =
                    0.25 * (a[i * n + j] - a[r * n + j] - a[h * n + j] + a[rh * n + j]);
            }
        }
        a.copy_from_slice(&out);
    }

    /// In-place column combination B <- B P.
    fn project_cols(&self, a: &mut [f64]) {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (r, h, rh) = (self.refl(j), self.half(j), self.half(self.refl(j)));
                out[i * n + j] =
                    0.25 * (a[i * n + j] - a[i * n + r] - a[i * n + h] + a[i * n + rh]);
            }
        }
        a.copy_from_slice(&out);
    }

    /// Solves L0 phi = g on the symmetry class.
    ///
    /// The full-grid collocation matrix A is replaced by
    /// M = P A P + (I - P): on the class it acts as A, on the complement as
    /// the identity, so the kernel directions are simply frozen out. The
    /// right-hand side is projected, the LU solve is polished by iterative
    /// refinement, and the result is projected back.
    pub fn solve(&self, g: &[f64]) -> SolveReport {
        let n = self.n;
        let mut m = self.collocation_matrix();
        self.project_cols(&mut m);
        self.project_rows(&mut m);
        // + (I - P)
        for i in 0..n {
            let (r, h, rh) = (self.refl(i), self.half(i), self.half(self.refl(i)));
            m[i * n + i] += 1.0 - 0.25;
            m[i * n + r] += 0.25;
            m[i * n + h] += 0.25;
            m[i * n + rh] -= 0.25;
        }
        let gsym = self.sym_project(g);
        let lu = DenseLu::factor(&m, n).expect("restricted collocation matrix is invertible");
        let x = lu.solve_refined(&m, &gsym, 3);
        let phi = self.sym_project(&x);

        let lphi = self.apply(&phi);
        let residual_sup = lphi
            .iter()
            .zip(g.iter())
            .map(|(a, b)| fabs(a - b))
            .fold(0.0f64, f64::max);
        let rhs_sup = g.iter().map(|v| fabs(*v)).fold(0.0f64, f64::max);
        let phi_sup = phi.iter().map(|v| fabs(*v)).fold(0.0f64, f64::max);
        SolveReport {
            phi,
            residual_sup,
            rhs_sup,
            condition: lu.condition_1norm(&m),
            stability: if rhs_sup > 0.0 { phi_sup / rhs_sup } else { 0.0 },
        }
    }

    /// Builds the four kernel fields, their operator residuals, and the
    /// endpoint boundary table over one period.
    ///
    /// psi1 = k^2/2 and psi2 = -k' are periodic. The rotation/dilation fields
    /// involve the linearly drifting coordinate gamma1 = c0 s + g1per and are
    /// handled as s*u + v with u, v periodic; their endpoint values at s = T
    /// pick up the secular jumps T*u(0) (values) and T*u''(0) (second
    /// derivatives).
    pub fn kernel_fields(&self) -> KernelFields {
        let n = self.n;
        let t = self.period;

        let psi1: Vec<f64> = self.k.iter().map(|k| 0.5 * k * k).collect();
        let psi2: Vec<f64> = self.kp.iter().map(|kp| -kp).collect();

        // gamma1 = c0 s + g1per with g1per(0) = 0; gamma2 = -k.
        let (c0, mut g1per) = self.sp.antiderivative(&psi1);
        let g1per0 = g1per[0];
        g1per.iter_mut().for_each(|v| *v -= g1per0);
        let g2: Vec<f64> = self.k.iter().map(|k| -k).collect();

        let u3: Vec<f64> = psi1.iter().map(|v| c0 * v).collect();
        let v3: Vec<f64> = (0..n).map(|j| g1per[j] * psi1[j] + g2[j] * psi2[j]).collect();
        let u4: Vec<f64> = psi2.iter().map(|v| c0 * v).collect();
        let v4: Vec<f64> = (0..n).map(|j| g1per[j] * psi2[j] - g2[j] * psi1[j]).collect();

        let psi3: Vec<f64> = (0..n).map(|j| self.s[j] * u3[j] + v3[j]).collect();
        let psi4: Vec<f64> = (0..n).map(|j| self.s[j] * u4[j] + v4[j]).collect();

        let sup = |v: &[f64]| v.iter().map(|x| fabs(*x)).fold(0.0f64, f64::max);

        let r1 = sup(&self.apply(&psi1));
        let r2 = sup(&self.apply(&psi2));
        let r3 = sup(&self.apply_secular(&u3, &v3));
        let r4 = sup(&self.apply_secular(&u4, &v4));

        // Endpoint data. Periodic parts evaluated spectrally at s = 0; the
        // secular parts contribute 2u'(0) to f''(0) and the jumps T u(0),
        // T u''(0) at s = T.
        let p1dd = self.d(&psi1, 2);
        let p2dd = self.d(&psi2, 2);
        let u3d = self.d(&u3, 1);
        let u3dd = self.d(&u3, 2);
        let v3dd = self.d(&v3, 2);
        let u4d = self.d(&u4, 1);
        let u4dd = self.d(&u4, 2);
        let v4dd = self.d(&v4, 2);

        let p3dd0 = 2.0 * u3d[0] + v3dd[0];
        let p4dd0 = 2.0 * u4d[0] + v4dd[0];
        let boundary_table = [
            [psi1[0], psi1[0], p1dd[0], p1dd[0]],
            [psi2[0], psi2[0], p2dd[0], p2dd[0]],
            [psi3[0], psi3[0] + t * u3[0], p3dd0, p3dd0 + t * u3dd[0]],
            [psi4[0], psi4[0] + t * u4[0], p4dd0, p4dd0 + t * u4dd[0]],
        ];
        let boundary_det = det4(&boundary_table);

        let symmetry_defect = [
            self.symmetry_defect(&psi1),
            self.symmetry_defect(&psi2),
            self.symmetry_defect(&psi3),
            self.symmetry_defect(&psi4),
        ];
        let norm_sup = [sup(&psi1), sup(&psi2), sup(&psi3), sup(&psi4)];
        KernelFields {
            values: [psi1, psi2, psi3, psi4],
            residual_sup: [r1, r2, r3, r4],
            norm_sup,
            symmetry_defect,
            boundary_table,
            boundary_det,
            gamma1_t: c0 * t,
        }
    }
}

/// Determinant of a 4x4 matrix by cofactor expansion.
fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let det3 = |a: [[f64; 3]; 3]| -> f64 {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let mut d = 0.0;
    for c in 0..4 {
        let mut minor = [[0.0; 3]; 3];
        for i in 1..4 {
            let mut jj = 0;
            for j in 0..4 {
                if j != c {
                    minor[i - 1][jj] = m[i][j];
                    jj += 1;
                }
            }
        }
        let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
        d += sign * m[0][c] * det3(minor);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn op() -> LinearizedOperator {
        LinearizedOperator::new(512, DEFAULT_MCUT)
    }

    #[test]
    fn coefficient_forms_agree() {
        let o = op();
        let f: Vec<f64> = o.s.iter().map(|s| (2.0 * PI / o.period * s).sin() + 0.2).collect();
        let a = o.apply(&f);
        let b = o.apply_alternative_zeroth(&f);
        let mut d = 0.0f64;
        for j in 0..o.n {
            d = d.max((a[j] - b[j]).abs());
        }
        assert!(d < 1e-12, "coefficient identity violated by {d}");
    }

    #[test]
    fn kernel_fields_are_annihilated() {
        let o = op();
        let kf = o.kernel_fields();
        for i in 0..4 {
            let rel = kf.residual_sup[i] / kf.norm_sup[i];
            assert!(rel < 1e-6, "kernel field {} residual {rel}", i + 1);
        }
    }

    #[test]
    fn kernel_fields_leave_symmetry_class() {
        let o = op();
        let kf = o.kernel_fields();
        for i in 0..4 {
            assert!(kf.symmetry_defect[i] > 0.1, "field {} unexpectedly symmetric", i + 1);
        }
    }

    #[test]
    fn boundary_table_structure() {
        let o = op();
        let kf = o.kernel_fields();
        let a = kf.gamma1_t;
        assert!((a * a - 11.484320176738079).abs() < 1e-8);
        let expect = [
            [0.0, 0.0, 1.0, 1.0],
            [1.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, a],
            [0.0, a, 0.0, 0.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (kf.boundary_table[i][j] - expect[i][j]).abs() < 1e-8,
                    "entry ({i},{j}): {} vs {}",
                    kf.boundary_table[i][j],
                    expect[i][j]
                );
            }
        }
        assert!((kf.boundary_det.abs() - a * a).abs() < 1e-7);
    }

    #[test]
    fn projector_is_idempotent_and_annihilates_even_part() {
        let o = op();
        let f: Vec<f64> = o
            .s
            .iter()
            .map(|s| {
                let w = 2.0 * PI / o.period;
                (w * s).sin() + 0.7 * (2.0 * w * s).cos() + 0.1
            })
            .collect();
        let p1 = o.sym_project(&f);
        let p2 = o.sym_project(&p1);
        for j in 0..o.n {
            assert!((p1[j] - p2[j]).abs() < 1e-13);
        }
        // Only the odd-mode sine survives.
        for j in 0..o.n {
            let w = 2.0 * PI / o.period;
            assert!((p1[j] - (w * o.s[j]).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn restricted_solve_round_trip_manufactured() {
        let o = op();
        let w = 2.0 * PI / o.period;
        // Manufactured solution in the symmetry class (odd sine modes).
        let phi_m: Vec<f64> = o.s.iter().map(|s| (w * s).sin() + 0.3 * (3.0 * w * s).sin()).collect();
        let g = o.apply(&phi_m);
        let rep = o.solve(&g);
        let mut err = 0.0f64;
        for j in 0..o.n {
            err = err.max((rep.phi[j] - phi_m[j]).abs());
        }
        assert!(err < 1e-7, "manufactured round trip error {err}");
        assert!(rep.residual_sup < 1e-8 * rep.rhs_sup.max(1.0), "residual {}", rep.residual_sup);
        // Fourth-derivative collocation up to mode 96 has scale omega^4 ~ 5e7;
        // the refined solve still recovers the solution to ~1e-8.
        assert!(rep.condition > 1e4 && rep.condition < 1e13, "condition {}", rep.condition);
        assert!(rep.stability > 0.0);
    }

    #[test]
    fn sine_rhs_round_trip() {
        let o = op();
        let w = 2.0 * PI / o.period;
        let g: Vec<f64> = o.s.iter().map(|s| (w * s).sin()).collect();
        let rep = o.solve(&g);
        let back = o.apply(&rep.phi);
        let mut d = 0.0f64;
        for j in 0..o.n {
            d = d.max((back[j] - g[j]).abs());
        }
        assert!(d < 1e-7, "sine round trip {d}");
    }
}
