//! Quadrature: composite Simpson (plain, weighted, cumulative) and
//! Gauss-Legendre panels.

use alloc::vec;
use alloc::vec::Vec;
use libm::{cos, fabs};

use core::f64::consts::PI;

/// Composite Simpson rule on a uniform grid of odd length.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    assert!(n >= 3 && n % 2 == 1, "Simpson needs an odd number of samples");
    let mut s = values[0] + values[n - 1];
    for (i, &v) in values.iter().enumerate().take(n - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

/// Simpson weights as a vector, so inner products against a fixed grid
/// function become plain dot products.
pub fn simpson_weights(len: usize, h: f64) -> Vec<f64> {
    assert!(len >= 3 && len % 2 == 1, "Simpson needs an odd number of samples");
    let mut w = vec![0.0; len];
    w[0] = h / 3.0;
    w[len - 1] = h / 3.0;
    for (i, wi) in w.iter_mut().enumerate().take(len - 1).skip(1) {
        *wi = if i % 2 == 1 { 4.0 * h / 3.0 } else { 2.0 * h / 3.0 };
    }
    w
}

/// Cumulative integral on a uniform grid, fourth-order accurate: Simpson
/// pairs land on even indices, odd indices use the three-point half-panel
/// rule \int_0^h f = h(5f_0 + 8f_1 - f_2)/12.
pub fn cumulative_simpson(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 3);
    let mut c = vec![0.0; n];
    for i in (2..n).step_by(2) {
        c[i] = c[i - 2] + h / 3.0 * (values[i - 2] + 4.0 * values[i - 1] + values[i]);
    }
    for i in (1..n).step_by(2) {
        if i + 1 < n {
            c[i] = c[i - 1] + h / 12.0 * (5.0 * values[i - 1] + 8.0 * values[i] - values[i + 1]);
        } else {
            c[i] = c[i - 1] + h / 12.0 * (-values[i - 2] + 8.0 * values[i - 1] + 5.0 * values[i]);
        }
    }
    c
}

/// Gauss-Legendre rule on [-1, 1].
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on P_n with the Tricomi initial guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut x = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                // Legendre recurrence for P_n(x) and P_n'(x).
                let mut p0 = 1.0;
                let mut p1 = x;
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if fabs(dx) < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integral of f over [a, b] with a single panel.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(self.weights.iter()) {
            s += w * f(mid + half * x);
        }
        s * half
    }

    /// Integral of f over [a, b] split into equal panels.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        assert!(panels >= 1);
        let step = (b - a) / panels as f64;
        let mut s = 0.0;
        for p in 0..panels {
            s += self.integrate(a + p as f64 * step, a + (p + 1) as f64 * step, &mut f);
        }
        s
    }
}
