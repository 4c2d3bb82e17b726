//! One-dimensional transition-layer machinery for the double-well potential
//! W(u) = (1-u^2)^2/4: the heteroclinic profile v0 = tanh(t/sqrt(2)), the
//! linearized operator
//!
//!   Lstar u = -u'' + W''(v0) u = -u'' + (3 v0^2 - 1) u,
//!
//! its Fredholm solver on decaying functions orthogonal to the kernel v0',
//! the correction profiles eta, eta1, eta2, eta3 entering the higher-order
//! interface expansion, the constants
//!
//!   c_star = int (v0')^2 = 2 sqrt(2)/3,
//!   d_star = int t^2 (v0')^2 = sqrt(2) (pi^2 - 6)/9,
//!
//! and the integral identities used to collapse the fifth-order residual to
//! d_star * gbar.
//!
//! Discretization: second-order tridiagonal finite differences with
//! Dirichlet-zero walls at |t| = 20 (profiles decay like e^{-sqrt(2)|t|},
//! so the wall error is ~1e-12), solved at two nested resolutions and
//! Richardson-extrapolated to fourth order. An integral constraint against
//! the kernel is carried as a dense border row/column so the factorization
//! never meets the Fredholm degeneracy.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use libm::{cosh, fabs, sqrt, tanh};

use crate::linalg::solve_tridiag_bordered;
use crate::quad::simpson_weights;

/// Heteroclinic profile between the wells.
pub fn v0(t: f64) -> f64 {
    tanh(t / sqrt(2.0))
}

/// Its derivative (spans the kernel of the linearized operator).
pub fn v0p(t: f64) -> f64 {
    let c = cosh(t / sqrt(2.0));
    1.0 / (sqrt(2.0) * c * c)
}

pub fn v0pp(t: f64) -> f64 {
    let v = v0(t);
    v * v * v - v
}

pub fn v0ppp(t: f64) -> f64 {
    let v = v0(t);
    (3.0 * v * v - 1.0) * v0p(t)
}

/// Second derivative of the well at the profile, W''(v0) = 3 v0^2 - 1.
pub fn wpp_v0(t: f64) -> f64 {
    let v = v0(t);
    3.0 * v * v - 1.0
}

/// First derivative of W''(v0).
pub fn wpp_v0_d1(t: f64) -> f64 {
    6.0 * v0(t) * v0p(t)
}

/// Second derivative of W''(v0).
pub fn wpp_v0_d2(t: f64) -> f64 {
    let p = v0p(t);
    let v = v0(t);
    6.0 * p * p - 6.0 * sqrt(2.0) * v * v * p
}

/// c_star = int (v0')^2 dt in closed form.
pub fn c_star_closed() -> f64 {
    2.0 * sqrt(2.0) / 3.0
}

/// d_star = int t^2 (v0')^2 dt in closed form.
pub fn d_star_closed() -> f64 {
    sqrt(2.0) * (PI * PI - 6.0) / 9.0
}

/// Sixth-order first derivative of grid data (lower order in the last three
/// cells on each side, where the profiles have already decayed to ~1e-12).
fn deriv6(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    let mut du = vec![0.0; n];
    for i in 3..n - 3 {
        du[i] = (-u[i - 3] + 9.0 * u[i - 2] - 45.0 * u[i - 1] + 45.0 * u[i + 1]
            - 9.0 * u[i + 2]
            + u[i + 3])
            / (60.0 * h);
    }
    du[0] = (u[1] - u[0]) / h;
    du[n - 1] = (u[n - 1] - u[n - 2]) / h;
    for i in [1usize, 2] {
        du[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
        du[n - 1 - i] = (u[n - i] - u[n - 2 - i]) / (2.0 * h);
    }
    du
}

/// Sixth-order second derivative (seven-point stencil) for applying the
/// operator to grid data; near the walls falls back to the second-order
/// stencil, where the data is numerically zero anyway.
fn second_deriv6(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    let h2 = h * h;
    let mut d2 = vec![0.0; n];
    for i in 3..n - 3 {
        d2[i] = (2.0 * u[i - 3] - 27.0 * u[i - 2] + 270.0 * u[i - 1] - 490.0 * u[i]
            + 270.0 * u[i + 1]
            - 27.0 * u[i + 2]
            + 2.0 * u[i + 3])
            / (180.0 * h2);
    }
    for i in [1usize, 2] {
        d2[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / h2;
        d2[n - 1 - i] = (u[n - i] - 2.0 * u[n - 1 - i] + u[n - 2 - i]) / h2;
    }
    d2[0] = d2[1];
    d2[n - 1] = d2[n - 2];
    d2
}

/// A right-hand side whose kernel overlap is too large to solve away.
#[derive(Debug, Clone, PartialEq)]
pub struct NotSolvable {
    /// |<f, v0'>| / (||f||_2 ||v0'||_2).
    pub overlap: f64,
}

impl core::fmt::Display for NotSolvable {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "right-hand side has kernel overlap {:.3e}; the layer operator is not solvable against it",
            self.overlap
        )
    }
}

/// One grid resolution: all solves happen here, extrapolation afterwards.
struct Pipe {
    t: Vec<f64>,
    h: f64,
    n: usize,
    w: Vec<f64>,
    k: Vec<f64>,
    a: Vec<f64>,
}

struct PipeRun {
    eta: Vec<f64>,
    w1: Vec<f64>,
    eta1: Vec<f64>,
    w3: Vec<f64>,
    eta3: Vec<f64>,
    rhs2: Vec<f64>,
    w2: Vec<f64>,
    eta2: Vec<f64>,
    mu_eta: f64,
}

impl Pipe {
    fn new(half_width: f64, n: usize) -> Self {
        assert!(n % 2 == 1, "layer grids must have a center point");
        let h = 2.0 * half_width / (n - 1) as f64;
        let t: Vec<f64> = (0..n).map(|i| -half_width + h * i as f64).collect();
        let w = simpson_weights(n, h);
        let k: Vec<f64> = t.iter().map(|&x| v0p(x)).collect();
        let a: Vec<f64> = t.iter().map(|&x| wpp_v0(x)).collect();
        Pipe { t, h, n, w, k, a }
    }

    fn integ(&self, v: &[f64]) -> f64 {
        self.w.iter().zip(v.iter()).map(|(a, b)| a * b).sum()
    }

    /// Bordered tridiagonal solve of Lstar u = f with Dirichlet walls and a
    /// kernel constraint; the returned multiplier measures the Fredholm
    /// defect of f. The solution is re-orthogonalized against the kernel
    /// with Simpson weights.
    fn solve(&self, f: &[f64]) -> (Vec<f64>, f64) {
        let n = self.n;
        let m = n - 2;
        let h2 = self.h * self.h;
        let mut dl = vec![-1.0 / h2; m];
        let mut du = vec![-1.0 / h2; m];
        dl[0] = 0.0;
        du[m - 1] = 0.0;
        let d: Vec<f64> = (1..n - 1).map(|i| 2.0 / h2 + self.a[i]).collect();
        let border: Vec<f64> = self.k[1..n - 1].to_vec();
        let rhs: Vec<f64> = f[1..n - 1].to_vec();
        let (u, mult) = solve_tridiag_bordered(&dl, &d, &du, &border, &border, &rhs, 0.0);
        let mut full = vec![0.0; n];
        full[1..n - 1].copy_from_slice(&u);
        let c = self.integ(&full.iter().zip(&self.k).map(|(x, k)| x * k).collect::<Vec<_>>())
            / self.integ(&self.k.iter().map(|k| k * k).collect::<Vec<_>>());
        for (x, k) in full.iter_mut().zip(&self.k) {
            *x -= c * k;
        }
        (full, mult)
    }

    fn run(&self) -> PipeRun {
        let t = &self.t;
        let k = &self.k;
        let a = &self.a;
        let n = self.n;

        let f_eta: Vec<f64> = (0..n).map(|i| 0.5 * t[i] * k[i]).collect();
        let (eta, mu_eta) = self.solve(&f_eta);

        let f_w1: Vec<f64> = (0..n).map(|i| 2.0 * t[i] * v0pp(t[i]) + k[i]).collect();
        let (w1, _) = self.solve(&f_w1);
        let (eta1, _) = self.solve(&w1);

        let f_w3: Vec<f64> = (0..n).map(|i| t[i] * k[i]).collect();
        let (w3, _) = self.solve(&f_w3);
        let (eta3, _) = self.solve(&w3);

        let eta_p = deriv6(&eta, self.h);
        let eta_pp: Vec<f64> = (0..n).map(|i| a[i] * eta[i] - 0.5 * t[i] * k[i]).collect();
        let w1_p = deriv6(&w1, self.h);

        // Q(eta, eta) assembled from the product rule plus the known
        // Lstar-image of eta.
        let mut rhs2 = vec![0.0; n];
        for i in 0..n {
            let v = v0(t[i]);
            let vw = eta[i] * eta[i];
            let vwp = 2.0 * eta[i] * eta_p[i];
            let vwpp = 2.0 * (eta_p[i] * eta_p[i] + eta[i] * eta_pp[i]);
            let prod = 6.0 * v * vw;
            let prod_pp = 6.0 * (v0pp(t[i]) * vw + 2.0 * k[i] * vwp + v * vwpp);
            let qee = -prod_pp + a[i] * prod + 12.0 * v * eta[i] * (0.5 * t[i] * k[i]);
            rhs2[i] = -3.0 * w1_p[i] + 4.0 * t[i] * t[i] * v0pp(t[i]) + 3.0 * t[i] * k[i]
                - eta_pp[i]
                - 0.5 * qee;
        }
        let (w2, _) = self.solve(&rhs2);
        let (eta2, _) = self.solve(&w2);

        PipeRun { eta, w1, eta1, w3, eta3, rhs2, w2, eta2, mu_eta }
    }
}

fn richardson(coarse: &[f64], fine: &[f64]) -> Vec<f64> {
    assert_eq!(fine.len(), 2 * coarse.len() - 1);
    coarse
        .iter()
        .enumerate()
        .map(|(i, c)| (4.0 * fine[2 * i] - c) / 3.0)
        .collect()
}

/// All layer profiles on the coarse grid after Richardson extrapolation,
/// together with the quadrature context to integrate against them.
pub struct LayerSystem {
    pub half_width: f64,
    pub n: usize,
    pub h: f64,
    pub t: Vec<f64>,
    weights: Vec<f64>,
    coarse: Pipe,
    fine: Pipe,
    /// Solves Lstar eta = t v0'/2 (equivalently Lstar^2 eta = -v0'').
    pub eta: Vec<f64>,
    /// Solves Lstar^2 eta1 = 2 t v0'' + v0'; even, eta1(0) > 0.
    pub eta1: Vec<f64>,
    /// Solves Lstar^2 eta2 = assembled quartic right-hand side; odd.
    pub eta2: Vec<f64>,
    /// Solves Lstar^2 eta3 = t v0'; Lstar eta3 = 2 eta.
    pub eta3: Vec<f64>,
    /// Lstar-images of eta1, eta2, eta3.
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub w3: Vec<f64>,
    /// Right-hand side of the eta2 equation (needed for jet closures).
    pub rhs2: Vec<f64>,
    /// Fredholm multiplier of the eta solve (should be ~0).
    pub fredholm_defect: f64,
    /// Quadrature values of the two layer constants.
    pub c_star: f64,
    pub d_star: f64,
}

impl LayerSystem {
    /// Two nested resolutions (n and 2n-1 points) on [-half_width, half_width].
    pub fn build(half_width: f64, n: usize) -> Self {
        let coarse = Pipe::new(half_width, n);
        let fine = Pipe::new(half_width, 2 * n - 1);
        let r1 = coarse.run();
        let r2 = fine.run();

        let eta = richardson(&r1.eta, &r2.eta);
        let w1 = richardson(&r1.w1, &r2.w1);
        let eta1 = richardson(&r1.eta1, &r2.eta1);
        let w3 = richardson(&r1.w3, &r2.w3);
        let eta3 = richardson(&r1.eta3, &r2.eta3);
        let rhs2 = richardson(&r1.rhs2, &r2.rhs2);
        let w2 = richardson(&r1.w2, &r2.w2);
        let eta2 = richardson(&r1.eta2, &r2.eta2);

        let t = coarse.t.clone();
        let weights = coarse.w.clone();
        let h = coarse.h;
        let kk: Vec<f64> = t.iter().map(|&x| v0p(x) * v0p(x)).collect();
        let c_star = weights.iter().zip(&kk).map(|(w, v)| w * v).sum();
        let d_star = weights
            .iter()
            .zip(t.iter().zip(&kk))
            .map(|(w, (x, v))| w * x * x * v)
            .sum();

        LayerSystem {
            half_width,
            n,
            h,
            t,
            weights,
            coarse,
            fine,
            eta,
            eta1,
            eta2,
            eta3,
            w1,
            w2,
            w3,
            rhs2,
            fredholm_defect: r1.mu_eta,
            c_star,
            d_star,
        }
    }

    pub fn integrate(&self, v: &[f64]) -> f64 {
        self.weights.iter().zip(v.iter()).map(|(a, b)| a * b).sum()
    }

    /// Applies Lstar to grid data with a sixth-order second derivative.
    pub fn apply_lstar(&self, u: &[f64]) -> Vec<f64> {
        let d2 = second_deriv6(u, self.h);
        (0..self.n).map(|i| -d2[i] + wpp_v0(self.t[i]) * u[i]).collect()
    }

    fn check_solvable(&self, f: &dyn Fn(f64) -> f64) -> Result<(), NotSolvable> {
        let pipe = &self.fine;
        let fv: Vec<f64> = pipe.t.iter().map(|&x| f(x)).collect();
        let fk: Vec<f64> = fv.iter().zip(&pipe.k).map(|(a, b)| a * b).collect();
        let overlap_raw = pipe.integ(&fk);
        let f2: Vec<f64> = fv.iter().map(|x| x * x).collect();
        let k2: Vec<f64> = pipe.k.iter().map(|x| x * x).collect();
        let denom = sqrt(pipe.integ(&f2).max(0.0)) * sqrt(pipe.integ(&k2).max(0.0));
        let overlap = fabs(overlap_raw) / denom.max(1e-300);
        if overlap > 1e-8 {
            return Err(NotSolvable { overlap });
        }
        Ok(())
    }

    /// Solves Lstar u = f for decaying u orthogonal to the kernel;
    /// rejects right-hand sides with a nonzero kernel component.
    pub fn solve_lstar(&self, f: &dyn Fn(f64) -> f64) -> Result<Vec<f64>, NotSolvable> {
        self.check_solvable(f)?;
        let c: Vec<f64> = self.coarse.t.iter().map(|&x| f(x)).collect();
        let fv: Vec<f64> = self.fine.t.iter().map(|&x| f(x)).collect();
        let (uc, _) = self.coarse.solve(&c);
        let (uf, _) = self.fine.solve(&fv);
        Ok(richardson(&uc, &uf))
    }

    /// Solves Lstar^2 u = f (two nested solves per resolution, one
    /// extrapolation at the end).
    pub fn solve_lstar2(&self, f: &dyn Fn(f64) -> f64) -> Result<Vec<f64>, NotSolvable> {
        self.check_solvable(f)?;
        let run = |pipe: &Pipe| -> Vec<f64> {
            let fv: Vec<f64> = pipe.t.iter().map(|&x| f(x)).collect();
            let (w, _) = pipe.solve(&fv);
            let (u, _) = pipe.solve(&w);
            u
        };
        Ok(richardson(&run(&self.coarse), &run(&self.fine)))
    }

    /// The quadratic form Q(v, w) = Lstar(6 v0 v w) + 6 v0 (v Lstar w + w Lstar v)
    /// from pointwise data (values, first and second derivatives, Lstar-images).
    #[allow(clippy::too_many_arguments)]
    pub fn q_form(
        &self,
        va: &[f64],
        vap: &[f64],
        vapp: &[f64],
        lva: &[f64],
        wa: &[f64],
        wap: &[f64],
        wapp: &[f64],
        lwa: &[f64],
    ) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let t = self.t[i];
                let v = v0(t);
                let vw = va[i] * wa[i];
                let vwp = vap[i] * wa[i] + va[i] * wap[i];
                let vwpp = vapp[i] * wa[i] + 2.0 * vap[i] * wap[i] + va[i] * wapp[i];
                let prod = 6.0 * v * vw;
                let prod_pp = 6.0 * (v0pp(t) * vw + 2.0 * v0p(t) * vwp + v * vwpp);
                -prod_pp + wpp_v0(t) * prod + 6.0 * v * (va[i] * lwa[i] + wa[i] * lva[i])
            })
            .collect()
    }

    /// eta from its explicit double-integral representation,
    /// eta = -v0' * int_0^t (v0'(s))^{-2} int_{-inf}^{s} x (v0'(x))^2/2 dx ds,
    /// with the inner integral taken from whichever infinity keeps it
    /// cancellation-free and the ratio formed before the exponentials
    /// underflow. Evaluated with per-cell Simpson rules (midpoints included)
    /// at the fine resolution.
    pub fn explicit_eta(&self) -> Vec<f64> {
        let th = &self.fine.t;
        let m = th.len();
        let hh = self.fine.h;
        let g = |x: f64| 0.5 * x * v0p(x) * v0p(x);
        let mut cell = vec![0.0; m - 1];
        for i in 0..m - 1 {
            let gm = g(th[i] + 0.5 * hh);
            cell[i] = hh / 6.0 * (g(th[i]) + 4.0 * gm + g(th[i + 1]));
        }
        let ctr = m / 2;
        let mut inner = vec![0.0; m];
        let mut acc = 0.0;
        for i in 0..ctr {
            acc += cell[i];
            inner[i + 1] = acc;
        }
        // Right half from the right wall, using that the integrand is odd so
        // the total integral vanishes.
        let mut acc = 0.0;
        inner[m - 1] = 0.0;
        for i in (ctr..m - 1).rev() {
            acc += cell[i];
            inner[i] = -acc;
        }
        let ratio: Vec<f64> = (0..m).map(|i| inner[i] / (v0p(th[i]) * v0p(th[i]))).collect();

        // Outer integral on the coarse grid using fine values as midpoints.
        let n = self.n;
        let h = self.h;
        let mut cell_j = vec![0.0; n - 1];
        for i in 0..n - 1 {
            cell_j[i] = h / 6.0 * (ratio[2 * i] + 4.0 * ratio[2 * i + 1] + ratio[2 * i + 2]);
        }
        let ctr2 = n / 2;
        let mut outer = vec![0.0; n];
        let mut acc = 0.0;
        for i in ctr2..n - 1 {
            acc += cell_j[i];
            outer[i + 1] = acc;
        }
        let mut acc = 0.0;
        for i in (0..ctr2).rev() {
            acc -= cell_j[i];
            outer[i] = acc;
        }
        (0..n).map(|i| -v0p(self.t[i]) * outer[i]).collect()
    }

    /// Pointwise residuals of the three closed-form operator identities
    /// (left sides assembled with hand-differentiated tanh algebra):
    ///   Lstar(t v0 v0'/sqrt2)            = v0''' + 3 t v0 (v0')^2
    ///   Lstar(t v0' (1 + sqrt2 t v0)/4)  = t v0''' + (3/2) t^2 v0 (v0')^2
    ///   Lstar(v0 v0'/(3 sqrt2))          = v0 (v0')^2
    pub fn lstar_identity_residuals(&self) -> [f64; 3] {
        let s2 = sqrt(2.0);
        let mut worst = [0.0f64; 3];
        for &t in &self.t {
            let v = v0(t);
            let p = v0p(t);
            let aa = 3.0 * v * v - 1.0;

            let u1 = t * v * p / s2;
            let u1pp = s2 * p * p - 2.0 * v * v * p + t * (-4.0 * v * p * p + s2 * v * v * v * p);
            let r1 = -u1pp + aa * u1 - (v0ppp(t) + 3.0 * t * v * p * p);
            worst[0] = worst[0].max(fabs(r1));

            let u2 = (t * p + s2 * t * t * v * p) / 4.0;
            let u2pp = (3.0 * s2 * t * p * p - 6.0 * t * v * v * p - 8.0 * t * t * v * p * p
                + 2.0 * s2 * t * t * v * v * v * p)
                / 4.0;
            let r2 = -u2pp + aa * u2 - (t * v0ppp(t) + 1.5 * t * t * v * p * p);
            worst[1] = worst[1].max(fabs(r2));

            let u3 = v * p / (3.0 * s2);
            let u3pp = (-4.0 * s2 * v * p * p + 2.0 * v * v * v * p) / (3.0 * s2);
            let r3 = -u3pp + aa * u3 - v * p * p;
            worst[2] = worst[2].max(fabs(r3));
        }
        worst
    }

    /// The integral-identity table: (label, quadrature value, target).
    pub fn identity_table(&self) -> Vec<(String, f64, f64)> {
        let t = &self.t;
        let n = self.n;
        let cs = self.c_star;
        let ds = self.d_star;
        let eta_p = deriv6(&self.eta, self.h);
        let eta1_v = &self.eta1;
        let w1_p = deriv6(&self.w1, self.h);
        let w3_p = deriv6(&self.w3, self.h);
        let kv: Vec<f64> = t.iter().map(|&x| v0p(x)).collect();

        let ig = |f: &dyn Fn(usize) -> f64| -> f64 {
            let v: Vec<f64> = (0..n).map(f).collect();
            self.integrate(&v)
        };

        let mut out: Vec<(String, f64, f64)> = Vec::new();
        out.push((
            format!("int t v0'' v0'"),
            ig(&|i| t[i] * v0pp(t[i]) * kv[i]),
            -cs / 2.0,
        ));
        out.push((
            format!("int t^3 v0'' v0'"),
            ig(&|i| t[i] * t[i] * t[i] * v0pp(t[i]) * kv[i]),
            -1.5 * ds,
        ));
        out.push((format!("int eta' v0'"), ig(&|i| eta_p[i] * kv[i]), ds / 4.0));
        out.push((
            format!("2 int (Lstar eta3)' v0'"),
            2.0 * ig(&|i| w3_p[i] * kv[i]),
            ds,
        ));
        out.push((
            format!("int t (Lstar eta1)' v0'"),
            ig(&|i| t[i] * w1_p[i] * kv[i]),
            -ds / 2.0,
        ));
        out.push((format!("int (Lstar eta1) v0'"), ig(&|i| self.w1[i] * kv[i]), 0.0));
        out.push((
            format!("int eta1 (v0''' + 3 t v0 (v0')^2)"),
            ig(&|i| eta1_v[i] * (v0ppp(t[i]) + 3.0 * t[i] * v0(t[i]) * kv[i] * kv[i])),
            -ds / 4.0,
        ));
        out.push((
            format!("int eta (t v0''' + 3/2 t^2 v0 (v0')^2)"),
            ig(&|i| {
                self.eta[i]
                    * (t[i] * v0ppp(t[i]) + 1.5 * t[i] * t[i] * v0(t[i]) * kv[i] * kv[i])
            }),
            5.0 * ds / 16.0,
        ));
        out.push((
            format!("int eta v0 (v0')^2"),
            ig(&|i| self.eta[i] * v0(t[i]) * kv[i] * kv[i]),
            1.0 / (18.0 * sqrt(2.0)),
        ));
        let quad_lhs = 12.0 * ig(&|i| self.eta[i] * eta_p[i] * kv[i] * v0(t[i]))
            + 6.0 * ig(&|i| self.eta[i] * self.eta[i] * kv[i] * kv[i]);
        let quad_rhs = -6.0 * ig(&|i| v0(t[i]) * v0pp(t[i]) * self.eta[i] * self.eta[i]);
        out.push((format!("quadratic eta identity"), quad_lhs, quad_rhs));
        out.push((
            format!("int rhs2 v0' (solvability)"),
            ig(&|i| self.rhs2[i] * kv[i]),
            0.0,
        ));
        out
    }

    /// The two curvature-coefficient groups of the fifth-order projection.
    /// The k^5 group must integrate to (9/8) d_star against the kernel; the
    /// k (k')^2 group is evaluated for both circulating readings of its
    /// leading term — `reading_a` (using Lstar eta3) lands on -9 d_star,
    /// `reading_b` (using t Lstar eta1) lands on -11 d_star.
    pub fn fifth_order_groups(&self) -> FifthOrderGroups {
        let t = &self.t;
        let n = self.n;
        let kv: Vec<f64> = t.iter().map(|&x| v0p(x)).collect();
        let a: Vec<f64> = t.iter().map(|&x| wpp_v0(x)).collect();

        let eta_p = deriv6(&self.eta, self.h);
        let eta_pp: Vec<f64> =
            (0..n).map(|i| a[i] * self.eta[i] - 0.5 * t[i] * kv[i]).collect();
        let eta1_p = deriv6(&self.eta1, self.h);
        let eta1_pp: Vec<f64> = (0..n).map(|i| a[i] * self.eta1[i] - self.w1[i]).collect();
        let w1_p = deriv6(&self.w1, self.h);
        let w2_p = deriv6(&self.w2, self.h);
        let w3_p = deriv6(&self.w3, self.h);

        let l_eta: Vec<f64> = (0..n).map(|i| 0.5 * t[i] * kv[i]).collect();
        let qe1 = self.q_form(
            &self.eta,
            &eta_p,
            &eta_pp,
            &l_eta,
            &self.eta1,
            &eta1_p,
            &eta1_pp,
            &self.w1,
        );

        let k5_group: Vec<f64> = (0..n)
            .map(|i| {
                -4.0 * t[i] * t[i] * kv[i] - 5.0 * t[i] * t[i] * t[i] * v0pp(t[i])
                    + 2.0 * t[i] * eta_pp[i]
                    - 1.5 * qe1[i]
                    + 3.0 * t[i] * w1_p[i]
                    + 12.0 * self.eta[i] * eta_p[i] * v0(t[i])
                    + 6.0 * self.eta[i] * self.eta[i] * kv[i]
                    - 1.5 * eta1_pp[i]
                    + 4.5 * self.w1[i]
                    + 2.5 * eta_p[i]
                    + 2.0 * w2_p[i]
            })
            .collect();
        let ra: Vec<f64> = (0..n)
            .map(|i| {
                2.0 * w3_p[i] - 9.0 * t[i] * t[i] * kv[i] - 4.0 * eta_p[i] - 18.0 * self.w1[i]
            })
            .collect();
        let rb: Vec<f64> = (0..n)
            .map(|i| {
                2.0 * t[i] * w1_p[i] - 9.0 * t[i] * t[i] * kv[i] - 4.0 * eta_p[i]
                    - 18.0 * self.w1[i]
            })
            .collect();

        let proj = |g: &[f64]| -> f64 {
            let v: Vec<f64> = (0..n).map(|i| g[i] * kv[i]).collect();
            self.integrate(&v)
        };
        FifthOrderGroups {
            k5: proj(&k5_group),
            kkp2_reading_a: proj(&ra),
            kkp2_reading_b: proj(&rb),
        }
    }

    /// Derivative stacks through order four for the solved profiles, with
    /// second/fourth derivatives closed through the defining equations
    /// (never by differencing grid data twice).
    pub fn stacks(&self) -> LayerStacks {
        let make = |u: &[f64], w: &[f64], f: &[f64]| -> ProfileStack {
            let n = self.n;
            let a: Vec<f64> = self.t.iter().map(|&x| wpp_v0(x)).collect();
            let ap: Vec<f64> = self.t.iter().map(|&x| wpp_v0_d1(x)).collect();
            let app: Vec<f64> = self.t.iter().map(|&x| wpp_v0_d2(x)).collect();
            let up = deriv6(u, self.h);
            let wp = deriv6(w, self.h);
            let upp: Vec<f64> = (0..n).map(|i| a[i] * u[i] - w[i]).collect();
            let uppp: Vec<f64> = (0..n).map(|i| ap[i] * u[i] + a[i] * up[i] - wp[i]).collect();
            let wpp: Vec<f64> = (0..n).map(|i| a[i] * w[i] - f[i]).collect();
            let upppp: Vec<f64> = (0..n)
                .map(|i| app[i] * u[i] + 2.0 * ap[i] * up[i] + a[i] * upp[i] - wpp[i])
                .collect();
            ProfileStack {
                rows: [u.to_vec(), up, upp, uppp, upppp],
                t0: self.t[0],
                h: self.h,
                clamp_beyond: self.half_width - 0.1,
            }
        };
        let t = &self.t;
        let n = self.n;
        let l_eta: Vec<f64> = (0..n).map(|i| 0.5 * t[i] * v0p(t[i])).collect();
        let f_eta: Vec<f64> = (0..n).map(|i| -v0pp(t[i])).collect();
        let f1: Vec<f64> = (0..n).map(|i| 2.0 * t[i] * v0pp(t[i]) + v0p(t[i])).collect();
        let f3: Vec<f64> = (0..n).map(|i| t[i] * v0p(t[i])).collect();
        LayerStacks {
            eta: make(&self.eta, &l_eta, &f_eta),
            eta1: make(&self.eta1, &self.w1, &f1),
            eta2: make(&self.eta2, &self.w2, &self.rhs2),
            eta3: make(&self.eta3, &self.w3, &f3),
        }
    }
}

pub struct FifthOrderGroups {
    pub k5: f64,
    pub kkp2_reading_a: f64,
    pub kkp2_reading_b: f64,
}

pub struct LayerStacks {
    pub eta: ProfileStack,
    pub eta1: ProfileStack,
    pub eta2: ProfileStack,
    pub eta3: ProfileStack,
}

/// Grid samples of a profile and its first four derivatives, with 8-point
/// polynomial interpolation off the grid; queries beyond the decay window
/// return exactly zero.
pub struct ProfileStack {
    pub rows: [Vec<f64>; 5],
    t0: f64,
    h: f64,
    clamp_beyond: f64,
}

impl ProfileStack {
    /// Interpolates the given derivative order at t.
    pub fn eval(&self, order: usize, t: f64) -> f64 {
        let n = self.rows[0].len();
        if fabs(t) > self.clamp_beyond {
            return 0.0;
        }
        let x = (t - self.t0) / self.h;
        let j0 = ((x as isize - 3).max(0) as usize).min(n - 8);
        let xi = x - j0 as f64;
        // Barycentric weights for 8 equispaced nodes 0..7:
        // w_i = (-1)^i / (i! (7-i)!) up to common scale -> [1,-7,21,-35,35,-21,7,-1].
        const WB: [f64; 8] = [1.0, -7.0, 21.0, -35.0, 35.0, -21.0, 7.0, -1.0];
        let row = &self.rows[order];
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &wi) in WB.iter().enumerate() {
            let d = xi - i as f64;
            if fabs(d) < 1e-12 {
                return row[j0 + i];
            }
            let l = wi / d;
            num += l * row[j0 + i];
            den += l;
        }
        num / den
    }

    /// All five derivative orders at once.
    pub fn jet(&self, t: f64) -> [f64; 5] {
        [
            self.eval(0, t),
            self.eval(1, t),
            self.eval(2, t),
            self.eval(3, t),
            self.eval(4, t),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn system() -> &'static LayerSystem {
        static SYS: OnceLock<LayerSystem> = OnceLock::new();
        SYS.get_or_init(|| LayerSystem::build(20.0, 4001))
    }

    fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0f64, f64::max)
    }

    #[test]
    fn constants_match_closed_forms() {
        let sys = system();
        assert!((sys.c_star - c_star_closed()).abs() < 1e-12, "c* {}", sys.c_star);
        assert!((sys.d_star - d_star_closed()).abs() < 1e-12, "d* {}", sys.d_star);
    }

    #[test]
    fn constants_stable_under_domain_doubling() {
        let sys = system();
        let wide = LayerSystem::build(40.0, 8001);
        assert!((sys.c_star - wide.c_star).abs() < 1e-12);
        assert!((sys.d_star - wide.d_star).abs() < 1e-12);
    }

    #[test]
    fn kernel_annihilated_and_rejected() {
        let sys = system();
        let kv: Vec<f64> = sys.t.iter().map(|&x| v0p(x)).collect();
        let lk = sys.apply_lstar(&kv);
        let sup = lk.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
        assert!(sup < 1e-9, "kernel residual {sup}");
        match sys.solve_lstar(&v0p) {
            Err(NotSolvable { overlap }) => assert!(overlap > 0.5),
            Ok(_) => panic!("kernel right-hand side must be rejected"),
        }
    }

    #[test]
    fn closed_form_image_of_eta_tilde() {
        let sys = system();
        // eta~ = -t v0'/2 maps to v0'' under the operator.
        let et: Vec<f64> = sys.t.iter().map(|&x| -0.5 * x * v0p(x)).collect();
        let img = sys.apply_lstar(&et);
        let target: Vec<f64> = sys.t.iter().map(|&x| v0pp(x)).collect();
        assert!(sup_diff(&img, &target) < 1e-9);
        // And the solver inverts that image back to eta~ (mod kernel; eta~
        // is already kernel-orthogonal by parity).
        let back = sys.solve_lstar(&v0pp).unwrap();
        assert!(sup_diff(&back, &et) < 1e-8, "{}", sup_diff(&back, &et));
    }

    #[test]
    fn double_solve_oracles() {
        let sys = system();
        let neg_v0pp = |t: f64| -v0pp(t);
        let eta_again = sys.solve_lstar2(&neg_v0pp).unwrap();
        assert!(sup_diff(&eta_again, &sys.eta) < 1e-7, "{}", sup_diff(&eta_again, &sys.eta));
        let tv0p = |t: f64| t * v0p(t);
        let eta3_again = sys.solve_lstar2(&tv0p).unwrap();
        assert!(sup_diff(&eta3_again, &sys.eta3) < 1e-7);
        // Lstar eta3 = 2 eta.
        let two_eta: Vec<f64> = sys.eta.iter().map(|v| 2.0 * v).collect();
        assert!(sup_diff(&sys.w3, &two_eta) < 1e-8, "{}", sup_diff(&sys.w3, &two_eta));
        // Forward: Lstar^2 eta = -v0'' with finite differences only. Two
        // stacked sixth-order stencils compound their truncation error, so
        // this sits a bit above the single-application level.
        let l1 = sys.apply_lstar(&sys.eta);
        let l2 = sys.apply_lstar(&l1);
        let target: Vec<f64> = sys.t.iter().map(|&x| -v0pp(x)).collect();
        assert!(sup_diff(&l2, &target) < 5e-7, "{}", sup_diff(&l2, &target));
    }

    #[test]
    fn closed_form_operator_identities() {
        let sys = system();
        let res = sys.lstar_identity_residuals();
        for (i, r) in res.iter().enumerate() {
            assert!(*r < 1e-9, "identity {} residual {r}", i + 1);
        }
    }

    #[test]
    fn integral_identity_table() {
        let sys = system();
        for (label, value, target) in sys.identity_table() {
            let err = (value - target).abs();
            assert!(err < 1e-8, "{label}: value {value} target {target} err {err}");
        }
    }

    #[test]
    fn explicit_eta_matches_solved() {
        let sys = system();
        let ex = sys.explicit_eta();
        let mut sup_inner = 0.0f64;
        let mut sup_all = 0.0f64;
        for i in 0..sys.n {
            let d = (ex[i] - sys.eta[i]).abs();
            sup_all = sup_all.max(d);
            if sys.t[i].abs() <= 15.0 {
                sup_inner = sup_inner.max(d);
            }
        }
        assert!(sup_inner < 1e-7, "interior mismatch {sup_inner}");
        assert!(sup_all < 1e-7, "full-range mismatch {sup_all}");
    }

    #[test]
    fn profile_shapes_and_orthogonality() {
        let sys = system();
        let kv: Vec<f64> = sys.t.iter().map(|&x| v0p(x)).collect();
        for (name, p) in [
            ("eta", &sys.eta),
            ("eta1", &sys.eta1),
            ("eta2", &sys.eta2),
            ("eta3", &sys.eta3),
        ] {
            let prod: Vec<f64> = p.iter().zip(&kv).map(|(a, b)| a * b).collect();
            let orth = sys.integrate(&prod).abs();
            assert!(orth < 1e-10, "{name} kernel overlap {orth}");
            let endl = p[0].abs().max(p[sys.n - 1].abs());
            assert!(endl < 1e-9, "{name} end decay {endl}");
        }
        assert!(sys.fredholm_defect.abs() < 1e-9);
        // Parities: eta1 even with pinned center value, eta2 odd.
        let n = sys.n;
        let mut even_defect = 0.0f64;
        let mut odd_defect = 0.0f64;
        for i in 0..n {
            even_defect = even_defect.max((sys.eta1[i] - sys.eta1[n - 1 - i]).abs());
            odd_defect = odd_defect.max((sys.eta2[i] + sys.eta2[n - 1 - i]).abs());
        }
        assert!(even_defect < 1e-10, "eta1 even defect {even_defect}");
        assert!(odd_defect < 1e-10, "eta2 odd defect {odd_defect}");
        assert!(
            (sys.eta1[n / 2] - 0.08496211850071418).abs() < 1e-9,
            "eta1 center {}",
            sys.eta1[n / 2]
        );
    }

    #[test]
    fn fifth_order_group_integrals() {
        let sys = system();
        let g = sys.fifth_order_groups();
        let ds = sys.d_star;
        assert!((g.k5 - 1.125 * ds).abs() < 1e-8, "k^5 group {}", g.k5);
        assert!(
            (g.kkp2_reading_a + 9.0 * ds).abs() < 1e-8,
            "reading A {} vs {}",
            g.kkp2_reading_a,
            -9.0 * ds
        );
        assert!(
            (g.kkp2_reading_b + 11.0 * ds).abs() < 1e-7,
            "reading B {} vs {}",
            g.kkp2_reading_b,
            -11.0 * ds
        );
    }

    #[test]
    fn stack_interpolation() {
        let sys = system();
        let stacks = sys.stacks();
        // On-grid queries reproduce the arrays exactly.
        let i = sys.n / 2 + 137;
        assert_eq!(stacks.eta.eval(0, sys.t[i]), sys.eta[i]);
        // Off-grid values agree with a closed-form profile evaluated the
        // same way: build a stack of v0' and compare with direct samples.
        let v: Vec<f64> = sys.t.iter().map(|&x| v0p(x)).collect();
        let vp: Vec<f64> = sys.t.iter().map(|&x| v0pp(x)).collect();
        let vpp: Vec<f64> = sys.t.iter().map(|&x| v0ppp(x)).collect();
        let st = ProfileStack {
            rows: [v.clone(), vp, vpp, v.clone(), v],
            t0: sys.t[0],
            h: sys.h,
            clamp_beyond: sys.half_width - 0.1,
        };
        for &tq in &[0.123456, -3.87654, 7.7777, 14.9] {
            assert!((st.eval(0, tq) - v0p(tq)).abs() < 1e-11);
            assert!((st.eval(1, tq) - v0pp(tq)).abs() < 1e-11);
        }
        // Clamped to zero beyond the decay window.
        assert_eq!(stacks.eta.eval(0, 19.95), 0.0);
        assert_eq!(stacks.eta.eval(3, -25.0), 0.0);
    }
}
