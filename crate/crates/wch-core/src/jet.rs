//! Bivariate truncated Taylor jets of total degree <= 4 in a (slow, fast)
//! coordinate pair, batched over a vector of fast-coordinate base points.
//!
//! A `JetBatch` stores coefficients c[i][j][q] of ds^i dz^j for each batch
//! point q; all algebra truncates products at total degree 4, which is
//! exactly the order needed to push a field through two Laplacians. Batch
//! size 1 acts as a scalar and broadcasts against any other size.

use alloc::vec;
use alloc::vec::Vec;
use libm::fabs;

/// Coefficients per direction (degrees 0..=4).
pub const DEG: usize = 5;

#[derive(Clone, Debug)]
pub struct JetBatch {
    pub nz: usize,
    c: Vec<f64>,
}

impl JetBatch {
    pub fn zeros(nz: usize) -> Self {
        JetBatch { nz, c: vec![0.0; DEG * DEG * nz] }
    }

    /// Constant jet (value only, no derivatives).
    pub fn constant(values: &[f64]) -> Self {
        let mut out = JetBatch::zeros(values.len());
        out.coeff_mut(0, 0).copy_from_slice(values);
        out
    }

    #[inline]
    fn base(&self, i: usize, j: usize) -> usize {
        (i * DEG + j) * self.nz
    }

    pub fn coeff(&self, i: usize, j: usize) -> &[f64] {
        let b = self.base(i, j);
        &self.c[b..b + self.nz]
    }

    pub fn coeff_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let b = self.base(i, j);
        let nz = self.nz;
        &mut self.c[b..b + nz]
    }

    /// The order-zero coefficients (point values).
    pub fn values(&self) -> &[f64] {
        self.coeff(0, 0)
    }

    #[inline]
    fn at(&self, i: usize, j: usize, q: usize) -> f64 {
        self.c[(i * DEG + j) * self.nz + if self.nz == 1 { 0 } else { q }]
    }

    pub fn scale(&mut self, f: f64) {
        for v in &mut self.c {
            *v *= f;
        }
    }

    /// self += f * other (other broadcasts if scalar-sized).
    pub fn axpy(&mut self, f: f64, other: &JetBatch) {
        assert!(other.nz == self.nz || other.nz == 1);
        if other.nz == self.nz {
            for (a, b) in self.c.iter_mut().zip(&other.c) {
                *a += f * b;
            }
        } else {
            for i in 0..DEG {
                for j in 0..DEG - i {
                    let b = other.at(i, j, 0);
                    if b != 0.0 {
                        for v in self.coeff_mut(i, j) {
                            *v += f * b;
                        }
                    }
                }
            }
        }
    }

    /// self += f * diag(w) * other: every coefficient scaled per batch point.
    pub fn axpy_weighted(&mut self, f: f64, w: &[f64], other: &JetBatch) {
        assert_eq!(w.len(), self.nz);
        assert!(other.nz == self.nz || other.nz == 1);
        for i in 0..DEG {
            for j in 0..DEG - i {
                let dst = self.base(i, j);
                for q in 0..self.nz {
                    self.c[dst + q] += f * w[q] * other.at(i, j, q);
                }
            }
        }
    }

    /// Evaluates the jet polynomial at offsets (ds, dz) for batch point q
    /// (testing helper — production paths read coefficients directly).
    pub fn eval(&self, q: usize, ds: f64, dz: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..DEG {
            for j in 0..DEG - i {
                let mut term = self.at(i, j, q);
                for _ in 0..i {
                    term *= ds;
                }
                for _ in 0..j {
                    term *= dz;
                }
                acc += term;
            }
        }
        acc
    }
}

/// Truncated product of two jets (total degree capped at 4).
pub fn pmul(a: &JetBatch, b: &JetBatch) -> JetBatch {
    assert!(a.nz == b.nz || a.nz == 1 || b.nz == 1);
    let nz = a.nz.max(b.nz);
    let mut out = JetBatch::zeros(nz);
    for ai in 0..DEG {
        for aj in 0..DEG - ai {
            let arow = a.coeff(ai, aj);
            if arow.iter().all(|v| *v == 0.0) {
                continue;
            }
            let cap = DEG - ai - aj;
            for bi in 0..cap {
                for bj in 0..cap - bi {
                    let dst = ((ai + bi) * DEG + (aj + bj)) * nz;
                    for q in 0..nz {
                        out.c[dst + q] += a.at(ai, aj, q) * b.at(bi, bj, q);
                    }
                }
            }
        }
    }
    out
}

/// Reciprocal jet 1/d via the geometric series around the point value,
/// exact through total degree 4. Point values must be bounded away from 0.
pub fn precip(d: &JetBatch) -> JetBatch {
    let nz = d.nz;
    let c0 = d.values().to_vec();
    debug_assert!(c0.iter().all(|v| fabs(*v) > 1e-12), "reciprocal of a vanishing jet");
    let mut q = d.clone();
    for i in 0..DEG {
        for j in 0..DEG - i {
            let row = q.coeff_mut(i, j);
            for (v, c) in row.iter_mut().zip(&c0) {
                *v /= c;
            }
        }
    }
    for v in q.coeff_mut(0, 0) {
        *v = 0.0;
    }
    let q2 = pmul(&q, &q);
    let q3 = pmul(&q2, &q);
    let q4 = pmul(&q3, &q);
    let mut r = JetBatch::zeros(nz);
    r.axpy(-1.0, &q);
    r.axpy(1.0, &q2);
    r.axpy(-1.0, &q3);
    r.axpy(1.0, &q4);
    for v in r.coeff_mut(0, 0) {
        *v += 1.0;
    }
    for i in 0..DEG {
        for j in 0..DEG - i {
            let row = r.coeff_mut(i, j);
            for (v, c) in row.iter_mut().zip(&c0) {
                *v /= c;
            }
        }
    }
    r
}

/// Derivative with respect to the slow coordinate.
pub fn pd_s(a: &JetBatch) -> JetBatch {
    let mut out = JetBatch::zeros(a.nz);
    for i in 1..DEG {
        for j in 0..DEG - i {
            let src = a.coeff(i, j);
            let dst = out.coeff_mut(i - 1, j);
            for (d, s) in dst.iter_mut().zip(src) {
                *d = i as f64 * s;
            }
        }
    }
    out
}

/// Derivative with respect to the fast coordinate.
pub fn pd_z(a: &JetBatch) -> JetBatch {
    let mut out = JetBatch::zeros(a.nz);
    for i in 0..DEG {
        for j in 1..DEG - i {
            let src = a.coeff(i, j);
            let dst = out.coeff_mut(i, j - 1);
            for (d, s) in dst.iter_mut().zip(src) {
                *d = j as f64 * s;
            }
        }
    }
    out
}

/// Scalar slow-direction jet from a derivative list at the base point: the
/// slow jet variable advances the argument by eps per unit, so coefficient
/// r is f^(r) eps^r / r!.
pub fn sjet(derivs: &[f64], eps: f64) -> JetBatch {
    let mut out = JetBatch::zeros(1);
    let mut fact = 1.0;
    let mut epr = 1.0;
    for (r, d) in derivs.iter().take(DEG).enumerate() {
        if r > 0 {
            fact *= r as f64;
            epr *= eps;
        }
        out.coeff_mut(r, 0)[0] = d * epr / fact;
    }
    out
}

/// Composition f(base + q) from outer derivatives f^(r) at the (per-batch)
/// base argument and precomputed powers of the inner increment jet q,
/// which must vanish at the base point (q.values() == 0).
pub fn compose(outer: &[Vec<f64>; 5], qpow: &[JetBatch; 4]) -> JetBatch {
    let nz = qpow[0].nz;
    let mut out = JetBatch::zeros(nz);
    out.coeff_mut(0, 0).copy_from_slice(&outer[0]);
    let mut fact = 1.0;
    for r in 1..5 {
        fact *= r as f64;
        out.axpy_weighted(1.0 / fact, &outer[r], &qpow[r - 1]);
    }
    out
}

/// The four powers q, q^2, q^3, q^4 used by `compose`.
pub fn powers(q: &JetBatch) -> [JetBatch; 4] {
    let q2 = pmul(q, q);
    let q3 = pmul(&q2, q);
    let q4 = pmul(&q3, q);
    [q.clone(), q2, q3, q4]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_mul(a: &JetBatch, b: &JetBatch, q: usize) -> Vec<Vec<f64>> {
        // Untruncated product, for comparison on the kept block.
        let mut out = vec![vec![0.0; 2 * DEG]; 2 * DEG];
        for ai in 0..DEG {
            for aj in 0..DEG - ai {
                for bi in 0..DEG {
                    for bj in 0..DEG - bi {
                        out[ai + bi][aj + bj] += a.at(ai, aj, q) * b.at(bi, bj, q);
                    }
                }
            }
        }
        out
    }

    fn filled(nz: usize, seed: f64) -> JetBatch {
        let mut j = JetBatch::zeros(nz);
        let mut x = seed;
        for i in 0..DEG {
            for jj in 0..DEG - i {
                for v in j.coeff_mut(i, jj) {
                    x = (x * 1.7 + 0.31).sin();
                    *v = x;
                }
            }
        }
        j
    }

    #[test]
    fn product_matches_dense_convolution() {
        let a = filled(3, 0.2);
        let b = filled(3, 0.9);
        let p = pmul(&a, &b);
        for q in 0..3 {
            let dense = dense_mul(&a, &b, q);
            for i in 0..DEG {
                for j in 0..DEG - i {
                    assert!(
                        (p.at(i, j, q) - dense[i][j]).abs() < 1e-14,
                        "({i},{j},{q})"
                    );
                }
            }
        }
    }

    #[test]
    fn product_broadcasts_scalars() {
        let a = filled(1, 0.4);
        let b = filled(4, 0.7);
        let p = pmul(&a, &b);
        assert_eq!(p.nz, 4);
        for q in 0..4 {
            let dense = dense_mul(&a, &b, q);
            for i in 0..DEG {
                for j in 0..DEG - i {
                    assert!((p.at(i, j, q) - dense[i][j]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn reciprocal_inverts_to_identity() {
        let mut d = filled(2, 0.5);
        for q in 0..2 {
            d.coeff_mut(0, 0)[q] = 1.5 + 0.3 * q as f64;
        }
        let r = precip(&d);
        let prod = pmul(&d, &r);
        for q in 0..2 {
            for i in 0..DEG {
                for j in 0..DEG - i {
                    let want = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                    assert!(
                        (prod.at(i, j, q) - want).abs() < 1e-13,
                        "({i},{j},{q}) -> {}",
                        prod.at(i, j, q)
                    );
                }
            }
        }
    }

    #[test]
    fn derivatives_shift_coefficients() {
        // p = 2 ds^2 dz + dz^3.
        let mut p = JetBatch::zeros(1);
        p.coeff_mut(2, 1)[0] = 2.0;
        p.coeff_mut(0, 3)[0] = 1.0;
        let ps = pd_s(&p);
        assert_eq!(ps.at(1, 1, 0), 4.0);
        let pz = pd_z(&p);
        assert_eq!(pz.at(2, 0, 0), 2.0);
        assert_eq!(pz.at(0, 2, 0), 3.0);
    }

    #[test]
    fn scalar_jet_reproduces_taylor_sum() {
        // f = exp: all derivatives 1 at 0; jet in the slow variable with
        // scale eps must reproduce the quartic Taylor value of exp(eps*ds).
        let eps = 0.25;
        let j = sjet(&[1.0, 1.0, 1.0, 1.0, 1.0], eps);
        let ds = 0.8;
        let x = eps * ds;
        let want = 1.0 + x + x * x / 2.0 + x * x * x / 6.0 + x * x * x * x / 24.0;
        assert!((j.eval(0, ds, 0.0) - want).abs() < 1e-15);
    }

    #[test]
    fn composition_is_fourth_order_accurate() {
        // f = sin composed with an increment jet q = a*ds + b*dz + c*ds*dz.
        let base = 0.6f64;
        let outer = [
            vec![base.sin()],
            vec![base.cos()],
            vec![-base.sin()],
            vec![-base.cos()],
            vec![base.sin()],
        ];
        let mut q = JetBatch::zeros(1);
        q.coeff_mut(1, 0)[0] = 0.7;
        q.coeff_mut(0, 1)[0] = -0.4;
        q.coeff_mut(1, 1)[0] = 0.2;
        let comp = compose(&outer, &powers(&q));
        let mut worst5 = 0.0f64;
        for &h in &[0.1, 0.05, 0.025] {
            let (ds, dz) = (h, -h);
            let arg = base + 0.7 * ds - 0.4 * dz + 0.2 * ds * dz;
            let err = (comp.eval(0, ds, dz) - arg.sin()).abs();
            worst5 = worst5.max(err / h.powi(5));
        }
        // Error must shrink like h^5 with a modest constant.
        assert!(worst5 < 1.0, "h^5 constant {worst5}");
    }
}
