//! Radix-2 FFT and spectral calculus on uniform periodic grids.
//!
//! Everything downstream works on real T-periodic samples; this module
//! provides band-limited spectral derivatives, the periodic antiderivative
//! (mean split off), low-pass projection, and sine-series extraction.

use alloc::vec;
use alloc::vec::Vec;
use libm::{cos, sin};

use core::f64::consts::PI;

/// Precomputed radix-2 complex FFT plan for a fixed power-of-two length.
pub struct Fft {
    n: usize,
    cos_tab: Vec<f64>,
    sin_tab: Vec<f64>,
    rev: Vec<u32>,
}

impl Fft {
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two() && n >= 2, "FFT length must be a power of two");
        let half = n / 2;
        let mut cos_tab = vec![0.0; half];
        let mut sin_tab = vec![0.0; half];
        for k in 0..half {
            let ang = -2.0 * PI * (k as f64) / (n as f64);
            cos_tab[k] = cos(ang);
            sin_tab[k] = sin(ang);
        }
        let bits = n.trailing_zeros();
        let rev = (0..n as u32).map(|i| i.reverse_bits() >> (32 - bits)).collect();
        Fft { n, cos_tab, sin_tab, rev }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place forward transform, sign convention X_k = sum_j x_j e^{-2pi i jk/n}.
    pub fn forward(&self, re: &mut [f64], im: &mut [f64]) {
        let n = self.n;
        assert_eq!(re.len(), n);
        assert_eq!(im.len(), n);
        for i in 0..n {
            let j = self.rev[i] as usize;
            if j > i {
                re.swap(i, j);
                im.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            let mut base = 0;
            while base < n {
                for k in 0..half {
                    let wr = self.cos_tab[k * step];
                    let wi = self.sin_tab[k * step];
                    let i0 = base + k;
                    let i1 = i0 + half;
                    let tr = re[i1] * wr - im[i1] * wi;
                    let ti = re[i1] * wi + im[i1] * wr;
                    re[i1] = re[i0] - tr;
                    im[i1] = im[i0] - ti;
                    re[i0] += tr;
                    im[i0] += ti;
                }
                base += len;
            }
            len <<= 1;
        }
    }

    /// In-place inverse transform (unitary up to the 1/n factor applied here).
    pub fn inverse(&self, re: &mut [f64], im: &mut [f64]) {
        for v in im.iter_mut() {
            *v = -*v;
        }
        self.forward(re, im);
        let scale = 1.0 / self.n as f64;
        for (r, i) in re.iter_mut().zip(im.iter_mut()) {
            *r *= scale;
            *i *= -scale;
        }
    }
}

/// Spectral calculus on a uniform grid of a T-periodic function,
/// sample points s_j = j T / n.
pub struct Spectral {
    pub n: usize,
    pub period: f64,
    fft: Fft,
}

impl Spectral {
    pub fn new(n: usize, period: f64) -> Self {
        Spectral { n, period, fft: Fft::new(n) }
    }

    fn spectrum(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(f.len(), self.n);
        let mut re = f.to_vec();
        let mut im = vec![0.0; self.n];
        self.fft.forward(&mut re, &mut im);
        (re, im)
    }

    /// Signed mode index for bin k (k for k < n/2, k - n above).
    fn mode(&self, k: usize) -> i64 {
        if k <= self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Band-limited spectral derivative of the given order.
    ///
    /// Modes with |mode| > mcut are zeroed, as is the Nyquist bin whenever the
    /// order is odd (its sign is not determined by real samples).
    pub fn derivative(&self, f: &[f64], order: u32, mcut: usize) -> Vec<f64> {
        let (mut re, mut im) = self.spectrum(f);
        let omega = 2.0 * PI / self.period;
        for k in 0..self.n {
            let m = self.mode(k);
            let keep = m.unsigned_abs() as usize <= mcut
                && !(order % 2 == 1 && k == self.n / 2);
            if !keep {
                re[k] = 0.0;
                im[k] = 0.0;
                continue;
            }
            // multiply by (i omega m)^order
            let w = omega * m as f64;
            let mut pr = 1.0;
            let mut pi_ = 0.0;
            for _ in 0..order {
                let nr = -pi_ * w;
                let ni = pr * w;
                pr = nr;
                pi_ = ni;
            }
            let (r0, i0) = (re[k], im[k]);
            re[k] = r0 * pr - i0 * pi_;
            im[k] = r0 * pi_ + i0 * pr;
        }
        self.fft.inverse(&mut re, &mut im);
        re
    }

    /// Splits f into its mean and the zero-mean periodic antiderivative of
    /// (f - mean): returns (mean, g) with g' = f - mean and mean(g) = 0.
    pub fn antiderivative(&self, f: &[f64]) -> (f64, Vec<f64>) {
        let (mut re, mut im) = self.spectrum(f);
        let mean = re[0] / self.n as f64;
        let omega = 2.0 * PI / self.period;
        re[0] = 0.0;
        im[0] = 0.0;
        for k in 1..self.n {
            let m = self.mode(k);
            if k == self.n / 2 {
                // Nyquist: cosine-only content integrates to a sine the grid
                // cannot represent; drop it (input is expected band-limited).
                re[k] = 0.0;
                im[k] = 0.0;
                continue;
            }
            let w = omega * m as f64;
            // divide by i w  ==  multiply by -i/w
            let (r0, i0) = (re[k], im[k]);
            re[k] = i0 / w;
            im[k] = -r0 / w;
        }
        self.fft.inverse(&mut re, &mut im);
        (mean, re)
    }

    /// Projection onto modes |mode| <= mcut (Nyquist dropped when mcut < n/2).
    pub fn lowpass(&self, f: &[f64], mcut: usize) -> Vec<f64> {
        let (mut re, mut im) = self.spectrum(f);
        for k in 0..self.n {
            if self.mode(k).unsigned_abs() as usize > mcut {
                re[k] = 0.0;
                im[k] = 0.0;
            }
        }
        self.fft.inverse(&mut re, &mut im);
        re
    }

    /// Sine-series coefficients b_m, f(s) ~ sum_{m>=1} b_m sin(m omega s),
    /// valid for odd f; returns b[0]=0, b[1..n/2].
    pub fn sine_coefficients(&self, f: &[f64]) -> Vec<f64> {
        let (_, im) = self.spectrum(f);
        let mut b = vec![0.0; self.n / 2];
        for m in 1..self.n / 2 {
            b[m] = -2.0 * im[m] / self.n as f64;
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_inverse_round_trip() {
        let fft = Fft::new(64);
        let orig: Vec<f64> = (0..64).map(|i| ((i * i + 3) % 17) as f64 * 0.21 - 1.5).collect();
        let mut re = orig.clone();
        let mut im = vec![0.0; 64];
        fft.forward(&mut re, &mut im);
        fft.inverse(&mut re, &mut im);
        for i in 0..64 {
            assert!((re[i] - orig[i]).abs() < 1e-13);
            assert!(im[i].abs() < 1e-13);
        }
    }

    #[test]
    fn forward_matches_naive_dft() {
        let n = 16;
        let fft = Fft::new(n);
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 0.3).collect();
        let mut re = x.clone();
        let mut im = vec![0.0; n];
        fft.forward(&mut re, &mut im);
        for k in 0..n {
            let mut sr = 0.0;
            let mut si = 0.0;
            for j in 0..n {
                let ang = -2.0 * PI * (j * k) as f64 / n as f64;
                sr += x[j] * ang.cos();
                si += x[j] * ang.sin();
            }
            assert!((re[k] - sr).abs() < 1e-11);
            assert!((im[k] - si).abs() < 1e-11);
        }
    }

    #[test]
    fn spectral_derivative_of_trig_modes() {
        let n = 128;
        let period = 7.0;
        let sp = Spectral::new(n, period);
        let omega = 2.0 * PI / period;
        let f: Vec<f64> = (0..n)
            .map(|j| {
                let s = period * j as f64 / n as f64;
                (3.0 * omega * s).sin() + 0.5 * (5.0 * omega * s).cos()
            })
            .collect();
        let d1 = sp.derivative(&f, 1, n / 2 - 1);
        let d4 = sp.derivative(&f, 4, n / 2 - 1);
        for j in 0..n {
            let s = period * j as f64 / n as f64;
            let e1 = 3.0 * omega * (3.0 * omega * s).cos() - 2.5 * omega * (5.0 * omega * s).sin();
            let w3 = 3.0 * omega;
            let w5 = 5.0 * omega;
            let e4 = w3.powi(4) * (3.0 * omega * s).sin() + 0.5 * w5.powi(4) * (5.0 * omega * s).cos();
            assert!((d1[j] - e1).abs() < 1e-10);
            assert!((d4[j] - e4).abs() < 1e-7 * w5.powi(4));
        }
        // Band limit below mode 5 removes that component entirely.
        let d1cut = sp.derivative(&f, 1, 4);
        for j in 0..n {
            let s = period * j as f64 / n as f64;
            let e = 3.0 * omega * (3.0 * omega * s).cos();
            assert!((d1cut[j] - e).abs() < 1e-10);
        }
    }

    #[test]
    fn antiderivative_splits_mean_and_periodic_part() {
        let n = 64;
        let period = 3.0;
        let sp = Spectral::new(n, period);
        let omega = 2.0 * PI / period;
        let f: Vec<f64> = (0..n)
            .map(|j| {
                let s = period * j as f64 / n as f64;
                1.7 + (2.0 * omega * s).cos()
            })
            .collect();
        let (mean, g) = sp.antiderivative(&f);
        assert!((mean - 1.7).abs() < 1e-13);
        for j in 0..n {
            let s = period * j as f64 / n as f64;
            let e = (2.0 * omega * s).sin() / (2.0 * omega);
            assert!((g[j] - e).abs() < 1e-13);
        }
    }

    #[test]
    fn sine_coefficients_recover_odd_series() {
        let n = 64;
        let period = 11.0;
        let sp = Spectral::new(n, period);
        let omega = 2.0 * PI / period;
        let f: Vec<f64> = (0..n)
            .map(|j| {
                let s = period * j as f64 / n as f64;
                2.0 * (omega * s).sin() - 0.25 * (6.0 * omega * s).sin()
            })
            .collect();
        let b = sp.sine_coefficients(&f);
        assert!((b[1] - 2.0).abs() < 1e-13);
        assert!((b[6] + 0.25).abs() < 1e-13);
        for (m, &bm) in b.iter().enumerate() {
            if m != 1 && m != 6 {
                assert!(bm.abs() < 1e-13);
            }
        }
    }
}
