//! Complete elliptic integrals and Jacobi elliptic functions for a real
//! parameter `m = l²` in `[0, 1]`, all through the arithmetic-geometric mean.

use num_traits::{Float, FloatConst};

const MAX_AGM_STEPS: usize = 64;

/// AGM sequence `(a_n, b_n, c_n)` started from `(1, √(1−m), √m)`.
fn agm_sequence<T: Float>(m: T) -> Vec<(T, T, T)> {
    let mut a = T::one();
    let mut b = (T::one() - m).sqrt();
    let mut c = m.sqrt();
    let mut seq = vec![(a, b, c)];
    let tol = T::epsilon();
    for _ in 0..MAX_AGM_STEPS {
        if c.abs() <= tol * a {
            break;
        }
        let an = (a + b) / (T::one() + T::one());
        let bn = (a * b).sqrt();
        c = (a - b) / (T::one() + T::one());
        a = an;
        b = bn;
        seq.push((a, b, c));
    }
    seq
}

/// Arithmetic-geometric mean of `a` and `b`.
pub fn agm<T: Float>(mut a: T, mut b: T) -> T {
    let two = T::one() + T::one();
    for _ in 0..MAX_AGM_STEPS {
        if (a - b).abs() <= T::epsilon() * a.abs() {
            break;
        }
        let an = (a + b) / two;
        b = (a * b).sqrt();
        a = an;
    }
    a
}

/// `K(m) = ∫₀^{π/2} dθ / √(1 − m sin²θ)`; infinite at `m = 1`.
pub fn ellip_k<T: Float + FloatConst>(m: T) -> T {
    if m >= T::one() {
        return T::infinity();
    }
    T::FRAC_PI_2() / agm(T::one(), (T::one() - m).sqrt())
}

/// `E(m) = ∫₀^{π/2} √(1 − m sin²θ) dθ`.
pub fn ellip_e<T: Float + FloatConst>(m: T) -> T {
    if m >= T::one() {
        return T::one();
    }
    let seq = agm_sequence(m);
    let two = T::one() + T::one();
    let mut sum = T::zero();
    let mut pow = T::one() / two;
    for &(_, _, c) in &seq {
        sum = sum + pow * c * c;
        pow = pow * two;
    }
    let a_n = seq.last().expect("nonempty").0;
    T::FRAC_PI_2() / a_n * (T::one() - sum)
}

/// Jacobi `(sn, cn, dn)(x | m)` by descending Landen transformation.
pub fn jacobi_sn_cn_dn<T: Float + FloatConst>(x: T, m: T) -> (T, T, T) {
    if m <= T::zero() {
        return (x.sin(), x.cos(), T::one());
    }
    if m >= T::one() {
        let s = T::one() / x.cosh();
        return (x.tanh(), s, s);
    }
    let seq = agm_sequence(m);
    let n = seq.len() - 1;
    let two = T::one() + T::one();
    let mut phi = seq[n].0 * x * two.powi(n as i32);
    let mut prev = phi;
    for j in (1..=n).rev() {
        let (a, _, c) = seq[j];
        prev = phi;
        phi = ((c / a * phi.sin()).asin() + phi) / two;
    }
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = if n == 0 { T::one() } else { cn / (prev - phi).cos() };
    (sn, cn, dn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn limits() {
        assert!((ellip_k(0.0) - PI / 2.0).abs() < 1e-15);
        assert!((ellip_e(0.0) - PI / 2.0).abs() < 1e-15);
        assert_eq!(ellip_e(1.0), 1.0);
        let (s, c, d) = jacobi_sn_cn_dn(0.7, 0.0);
        assert!((s - 0.7f64.sin()).abs() < 1e-15 && (c - 0.7f64.cos()).abs() < 1e-15 && d == 1.0);
    }

    #[test]
    fn legendre_relation() {
        for &m in &[0.1, 0.3, 0.5, 0.8261, 0.95] {
            let (k, e) = (ellip_k(m), ellip_e(m));
            let (kp, ep) = (ellip_k(1.0 - m), ellip_e(1.0 - m));
            assert!((e * kp + ep * k - k * kp - PI / 2.0).abs() < 1e-13, "m = {m}");
        }
    }

    #[test]
    fn quadrature_oracle() {
        // midpoint rule on the smooth periodic integrand is spectrally accurate
        let m = 0.7;
        let n = 2000;
        let (mut k, mut e) = (0.0, 0.0);
        for j in 0..n {
            let th = (j as f64 + 0.5) * PI / 2.0 / n as f64;
            let w = (1.0 - m * th.sin().powi(2)).sqrt();
            k += 1.0 / w;
            e += w;
        }
        let h = PI / 2.0 / n as f64;
        assert!((k * h - ellip_k(m)).abs() < 1e-12);
        assert!((e * h - ellip_e(m)).abs() < 1e-12);
    }

    #[test]
    fn jacobi_identities() {
        let m = 0.6;
        let kk = ellip_k(m);
        for j in 0..20 {
            let x = -2.0 + 0.37 * j as f64;
            let (s, c, d) = jacobi_sn_cn_dn(x, m);
            assert!((s * s + c * c - 1.0).abs() < 1e-13);
            assert!((d * d + m * s * s - 1.0).abs() < 1e-13);
            let h = 1e-5;
            let (sp, _, _) = jacobi_sn_cn_dn(x + h, m);
            let (sm, _, _) = jacobi_sn_cn_dn(x - h, m);
            assert!(((sp - sm) / (2.0 * h) - c * d).abs() < 1e-8);
        }
        let (s, c, _) = jacobi_sn_cn_dn(kk, m);
        assert!((s - 1.0).abs() < 1e-13 && c.abs() < 1e-7);
    }
}
