//! Fourier differentiation, integration and interpolation on a uniform periodic grid.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::Real;

#[derive(Clone)]
pub struct Spectral<T: Real> {
    n: usize,
    length: T,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    /// Signed wavenumbers `2πj/L`, Nyquist entry stored as positive.
    kappa: Vec<T>,
}

impl<T: Real> fmt::Debug for Spectral<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).field("length", &self.length).finish()
    }
}

impl<T: Real> Spectral<T> {
    pub fn new(n: usize, length: T) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let base = T::TAU() / length;
        let kappa = (0..n)
            .map(|j| {
                let signed = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
                base * T::from_i64(signed).unwrap()
            })
            .collect();
        Self { n, length, forward, inverse, kappa }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn wavenumbers(&self) -> &[T] {
        &self.kappa
    }

    pub fn nyquist(&self) -> usize {
        self.n / 2
    }

    pub fn forward(&self, data: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut buf = data.to_vec();
        self.forward.process(&mut buf);
        buf
    }

    /// Normalized inverse transform.
    pub fn inverse(&self, coeffs: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut buf = coeffs.to_vec();
        self.inverse.process(&mut buf);
        let scale = T::one() / T::from_usize(self.n).unwrap();
        for z in &mut buf {
            *z = *z * scale;
        }
        buf
    }

    pub fn forward_real(&self, data: &[T]) -> Vec<Complex<T>> {
        let buf: Vec<Complex<T>> = data.iter().map(|&x| Complex::new(x, T::zero())).collect();
        self.forward(&buf)
    }

    /// Multiplier of the `order`-th derivative at mode `j`.
    pub fn derivative_symbol(&self, j: usize, order: u32) -> Complex<T> {
        if order == 0 {
            return Complex::new(T::one(), T::zero());
        }
        if order % 2 == 1 && self.n % 2 == 0 && j == self.nyquist() {
            return Complex::new(T::zero(), T::zero());
        }
        let ik = Complex::new(T::zero(), self.kappa[j]);
        ik.powu(order)
    }

    /// Apply `∂^order` to Fourier coefficients in place.
    pub fn differentiate_coeffs(&self, coeffs: &mut [Complex<T>], order: u32) {
        for (j, c) in coeffs.iter_mut().enumerate() {
            *c = *c * self.derivative_symbol(j, order);
        }
    }

    pub fn derivative(&self, data: &[Complex<T>], order: u32) -> Vec<Complex<T>> {
        let mut c = self.forward(data);
        self.differentiate_coeffs(&mut c, order);
        self.inverse(&c)
    }

    pub fn derivative_real(&self, data: &[T], order: u32) -> Vec<T> {
        let mut c = self.forward_real(data);
        self.differentiate_coeffs(&mut c, order);
        self.inverse(&c).into_iter().map(|z| z.re).collect()
    }

    /// Derivative of `f` with `f(s + L) = −f(s)`: Fourier modes sit at half-integer wavenumbers.
    pub fn derivative_antiperiodic(&self, data: &[Complex<T>], order: u32) -> Vec<Complex<T>> {
        let half = T::PI() / self.length;
        let twist = |s: T| Complex::from_polar(T::one(), half * s);
        let h = self.length / T::from_usize(self.n).unwrap();
        let g: Vec<Complex<T>> = data
            .iter()
            .enumerate()
            .map(|(j, &f)| f * twist(-(h * T::from_usize(j).unwrap())))
            .collect();
        // ∂(g e^{iπs/L}) = (∂ + iπ/L) g · e^{iπs/L}
        let mut gc = self.forward(&g);
        for (j, c) in gc.iter_mut().enumerate() {
            let kappa = if j == self.nyquist() && self.n % 2 == 0 {
                // the ±N/2 mode pair is unresolved; use the shifted wavenumber symmetrically
                T::zero()
            } else {
                self.kappa[j]
            };
            *c = *c * Complex::new(T::zero(), kappa + half).powu(order);
        }
        self.inverse(&gc)
            .into_iter()
            .enumerate()
            .map(|(j, z)| z * twist(h * T::from_usize(j).unwrap()))
            .collect()
    }

    /// Splits `f` into its mean and the periodic antiderivative `F` of `f − mean`
    /// normalized so that `F(0) = 0`.
    pub fn integrate(&self, data: &[Complex<T>]) -> (Complex<T>, Vec<Complex<T>>) {
        let mut c = self.forward(data);
        let mean = c[0] / T::from_usize(self.n).unwrap();
        c[0] = Complex::new(T::zero(), T::zero());
        for (j, z) in c.iter_mut().enumerate().skip(1) {
            if self.n % 2 == 0 && j == self.nyquist() {
                *z = Complex::new(T::zero(), T::zero());
            } else {
                *z = *z / Complex::new(T::zero(), self.kappa[j]);
            }
        }
        let f = self.inverse(&c);
        let f0 = f[0];
        (mean, f.into_iter().map(|z| z - f0).collect())
    }

    /// Trapezoid (spectrally exact for band-limited periodic data) integral over one period.
    pub fn quadrature(&self, data: &[Complex<T>]) -> Complex<T> {
        let sum = data.iter().fold(Complex::new(T::zero(), T::zero()), |a, &b| a + b);
        sum * (self.length / T::from_usize(self.n).unwrap())
    }

    /// Samples of the trigonometric interpolant at `s_j + shift`.
    pub fn shifted(&self, data: &[Complex<T>], shift: T) -> Vec<Complex<T>> {
        let mut c = self.forward(data);
        let nyq = self.nyquist();
        for (j, z) in c.iter_mut().enumerate() {
            if self.n % 2 == 0 && j == nyq {
                // split the Nyquist mode evenly between ±N/2
                *z = *z * Complex::new((self.kappa[j] * shift).cos(), T::zero());
            } else {
                *z = *z * Complex::from_polar(T::one(), self.kappa[j] * shift);
            }
        }
        self.inverse(&c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize, l: f64) -> Vec<f64> {
        (0..n).map(|j| j as f64 * l / n as f64).collect()
    }

    #[test]
    fn derivatives_of_trig_polynomials() {
        let l = 3.0;
        let sp = Spectral::<f64>::new(32, l);
        let w = 2.0 * PI / l;
        let s = grid(32, l);
        let f: Vec<f64> = s.iter().map(|&x| (3.0 * w * x).sin() + 0.5 * (w * x).cos()).collect();
        let d3 = sp.derivative_real(&f, 3);
        for (j, &x) in s.iter().enumerate() {
            let exact = -(3.0 * w).powi(3) * (3.0 * w * x).cos() + 0.5 * w.powi(3) * (w * x).sin();
            assert!((d3[j] - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn antiperiodic_derivative() {
        let l = 2.0 * PI;
        let sp = Spectral::<f64>::new(32, l);
        let s = grid(32, l);
        let f: Vec<Complex<f64>> = s.iter().map(|&x| Complex::from_polar(1.0, 1.5 * x)).collect();
        let d = sp.derivative_antiperiodic(&f, 2);
        for (j, z) in d.iter().enumerate() {
            assert!((z + f[j] * 2.25).norm() < 1e-10);
        }
    }

    #[test]
    fn integrate_and_shift() {
        let l = 2.0 * PI;
        let sp = Spectral::<f64>::new(16, l);
        let s = grid(16, l);
        let f: Vec<Complex<f64>> = s.iter().map(|&x| Complex::new(2.0 + x.cos(), 0.0)).collect();
        let (mean, big_f) = sp.integrate(&f);
        assert!((mean.re - 2.0).abs() < 1e-14);
        for (j, &x) in s.iter().enumerate() {
            assert!((big_f[j].re - x.sin()).abs() < 1e-13);
        }
        let g = sp.shifted(&f, 0.3);
        for (j, &x) in s.iter().enumerate() {
            assert!((g[j].re - (2.0 + (x + 0.3).cos())).abs() < 1e-13);
        }
    }
}
