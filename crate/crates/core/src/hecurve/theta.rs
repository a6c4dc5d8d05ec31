use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::CurveError;
use crate::linalg::{min_eigenvalue_spd, CMatrix};

/// Tail bound a caller-supplied radius must certify.
pub const TAIL_TARGET: f64 = 1e-12;
/// Tail bound used when the radius is chosen automatically; tighter than
/// `TAIL_TARGET` so that fourth-order moments stay accurate too.
pub const AUTO_TAIL_TARGET: f64 = 1e-18;
/// `|Σ e| / Σ |e|` below this is treated as lying on the theta divisor.
pub const DIVISOR_TOL: f64 = 1e-6;

/// Characteristic `[a; b]` of `θ[a;b](z; T) = Σ_n exp 2πi{½ (n+a)ᵀT(n+a) + (n+a)ᵀ(z+b)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaChar {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl ThetaChar {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Self {
        assert_eq!(a.len(), b.len());
        Self { a, b }
    }

    pub fn zero(g: usize) -> Self {
        Self { a: vec![0.0; g], b: vec![0.0; g] }
    }

    /// `a = (½, …, ½)`, `b = (g/2, (g−1)/2, …, ½)`: the Riemann constant of
    /// the curve with base point at infinity.
    pub fn riemann(g: usize) -> Self {
        Self { a: vec![0.5; g], b: (0..g).map(|i| (g - i) as f64 / 2.0).collect() }
    }

    pub fn genus(&self) -> usize {
        self.a.len()
    }

    /// `+1` for even, `−1` for odd half-integer characteristics.
    pub fn parity(&self) -> i32 {
        let s: f64 = self.a.iter().zip(&self.b).map(|(a, b)| 4.0 * a * b).sum();
        if (s.round() as i64).rem_euclid(2) == 0 {
            1
        } else {
            -1
        }
    }
}

/// Logarithmic derivatives of `θ` in `z`, obtained as cumulants of
/// `w = 2πi(n + a)` under the complex weights of the lattice sum.
/// Tensors are stored flat, row-major (`d2[a·g + b]`, …).
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaDerivatives {
    pub genus: usize,
    pub log_value: C64,
    /// `|Σ e| / Σ |e|`; small values mean heavy cancellation.
    pub ratio: f64,
    pub d1: Vec<C64>,
    /// `∂θ/∂z_a` itself (not logarithmic), usable on the divisor.
    pub gradient: Vec<C64>,
    pub d2: Vec<C64>,
    pub d3: Vec<C64>,
    pub d4: Vec<C64>,
    pub terms: usize,
    pub tail_bound: f64,
}

impl ThetaDerivatives {
    pub fn value(&self) -> C64 {
        self.log_value.exp()
    }
}

/// Upper bound for `Γ(s, x)` with `s` a positive half-integer and `x > 0`.
fn upper_gamma_bound(s: f64, x: f64) -> f64 {
    if s <= 1.0 {
        x.powf(s - 1.0) * (-x).exp()
    } else {
        (s - 1.0) * upper_gamma_bound(s - 1.0, x) + x.powf(s - 1.0) * (-x).exp()
    }
}

/// Gaussian tail bound for the terms with `π (v − v*)ᵀ Y (v − v*) > R²`,
/// relative to the largest term, using `ρ = √(π λ_min(Y))`.
pub fn tail_bound(radius: f64, g: usize, lambda_min: f64) -> f64 {
    let rho = (PI * lambda_min).sqrt();
    if radius <= rho / 2.0 {
        return f64::INFINITY;
    }
    let x = (radius - rho / 2.0).powi(2);
    let gf = g as f64;
    gf / 2.0 * (2.0 / rho).powf(gf) * upper_gamma_bound(gf / 2.0, x)
}

fn choose_radius(g: usize, lambda_min: f64, target: f64) -> f64 {
    let rho = (PI * lambda_min).sqrt();
    let mut r = rho / 2.0 + 0.5;
    while tail_bound(r, g, lambda_min) > target {
        r += 0.1;
    }
    r
}

pub fn theta(z: &[C64], t: &CMatrix, ch: &ThetaChar, radius: Option<f64>) -> Result<C64, CurveError> {
    Ok(lattice_sum(z, t, ch, radius, 0)?.value())
}

/// `θ` together with its logarithmic derivatives up to `order` (≤ 4).
/// Fails with `NearDivisor` when `order > 0` and the sum cancels.
pub fn theta_derivatives(
    z: &[C64],
    t: &CMatrix,
    ch: &ThetaChar,
    order: usize,
    radius: Option<f64>,
) -> Result<ThetaDerivatives, CurveError> {
    let d = lattice_sum(z, t, ch, radius, order)?;
    if order > 0 && d.ratio < DIVISOR_TOL {
        return Err(CurveError::NearDivisor { ratio: d.ratio });
    }
    Ok(d)
}

pub(crate) fn lattice_sum(
    z: &[C64],
    t: &CMatrix,
    ch: &ThetaChar,
    radius: Option<f64>,
    order: usize,
) -> Result<ThetaDerivatives, CurveError> {
    let g = t.rows();
    assert!(order <= 4);
    assert_eq!(z.len(), g);
    assert_eq!(ch.genus(), g);
    let y: Vec<Vec<f64>> = (0..g).map(|i| (0..g).map(|j| 0.5 * (t[(i, j)].im + t[(j, i)].im)).collect()).collect();
    let lambda_min = min_eigenvalue_spd(&y)
        .ok_or_else(|| CurveError::RiemannRelations("Im T is not positive definite".into()))?;
    let (radius, tail) = match radius {
        Some(r) => {
            let b = tail_bound(r, g, lambda_min);
            if b > TAIL_TARGET {
                return Err(CurveError::RadiusTooSmall { bound: b, target: TAIL_TARGET });
            }
            (r, b)
        }
        None => {
            let r = choose_radius(g, lambda_min, AUTO_TAIL_TARGET);
            (r, tail_bound(r, g, lambda_min))
        }
    };

    let y_c = CMatrix::from_fn(g, g, |i, j| C64::new(y[i][j], 0.0));
    let y_inv = y_c.inverse().expect("positive definite");
    let im_z: Vec<C64> = z.iter().map(|w| C64::new(w.im, 0.0)).collect();
    let center: Vec<f64> = y_inv.mul_vec(&im_z).iter().map(|w| -w.re).collect();
    let q_max = radius * radius / PI;
    let lo: Vec<i64> = (0..g)
        .map(|i| (center[i] - ch.a[i] - (q_max * y_inv[(i, i)].re).sqrt()).ceil() as i64)
        .collect();
    let hi: Vec<i64> = (0..g)
        .map(|i| (center[i] - ch.a[i] + (q_max * y_inv[(i, i)].re).sqrt()).floor() as i64)
        .collect();

    let zb: Vec<C64> = z.iter().zip(&ch.b).map(|(w, b)| w + b).collect();
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    let points: Vec<(Vec<f64>, C64)> = (lo[0]..=hi[0])
        .into_par_iter()
        .flat_map_iter(|n0| {
            let mut out = Vec::new();
            let mut n = vec![n0; g];
            n[1..].copy_from_slice(&lo[1..]);
            loop {
                let v: Vec<f64> = n.iter().zip(&ch.a).map(|(&k, &a)| k as f64 + a).collect();
                let mut q = 0.0;
                for i in 0..g {
                    for j in 0..g {
                        q += (v[i] - center[i]) * y[i][j] * (v[j] - center[j]);
                    }
                }
                if q <= q_max {
                    let mut quad = C64::new(0.0, 0.0);
                    for i in 0..g {
                        for j in 0..g {
                            quad += t[(i, j)] * (v[i] * v[j]);
                        }
                    }
                    let lin: C64 = v.iter().zip(&zb).map(|(&vi, &w)| w * vi).sum();
                    out.push((v, two_pi_i * (quad * 0.5 + lin)));
                }
                let mut k = 1;
                while k < g {
                    if n[k] < hi[k] {
                        n[k] += 1;
                        break;
                    }
                    n[k] = lo[k];
                    k += 1;
                }
                if k == g {
                    break;
                }
            }
            out
        })
        .collect();

    let e_max = points.iter().map(|p| p.1.re).fold(f64::NEG_INFINITY, f64::max);
    let (g2, g3, g4) = (g * g, g * g * g, g * g * g * g);
    let mut s = C64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    let mut m1 = vec![C64::new(0.0, 0.0); if order >= 1 { g } else { 0 }];
    let mut m2 = vec![C64::new(0.0, 0.0); if order >= 2 { g2 } else { 0 }];
    let mut m3 = vec![C64::new(0.0, 0.0); if order >= 3 { g3 } else { 0 }];
    let mut m4 = vec![C64::new(0.0, 0.0); if order >= 4 { g4 } else { 0 }];
    let mut w = vec![C64::new(0.0, 0.0); g];
    for (v, ex) in &points {
        let e = (ex - e_max).exp();
        s += e;
        abs_sum += e.norm();
        if order == 0 {
            continue;
        }
        for i in 0..g {
            w[i] = two_pi_i * (v[i] - center[i]);
            m1[i] += w[i] * e;
        }
        if order >= 2 {
            for a in 0..g {
                let ea = w[a] * e;
                for b in 0..g {
                    let eab = ea * w[b];
                    m2[a * g + b] += eab;
                    if order >= 3 {
                        for c in 0..g {
                            let eabc = eab * w[c];
                            m3[(a * g + b) * g + c] += eabc;
                            if order >= 4 {
                                for d in 0..g {
                                    m4[((a * g + b) * g + c) * g + d] += eabc * w[d];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let scale = C64::new(e_max, 0.0).exp();
    let gradient: Vec<C64> = if order >= 1 {
        (0..g).map(|a| scale * (m1[a] + two_pi_i * center[a] * s)).collect()
    } else {
        Vec::new()
    };
    let inv_s = 1.0 / s;
    for x in m1.iter_mut().chain(m2.iter_mut()).chain(m3.iter_mut()).chain(m4.iter_mut()) {
        *x *= inv_s;
    }

    let mut d1 = Vec::new();
    let mut d2 = Vec::new();
    let mut d3 = Vec::new();
    let mut d4 = Vec::new();
    if order >= 1 {
        d1 = (0..g).map(|a| m1[a] + two_pi_i * center[a]).collect();
    }
    let mm2 = |a: usize, b: usize| m2[a * g + b];
    let mm3 = |a: usize, b: usize, c: usize| m3[(a * g + b) * g + c];
    if order >= 2 {
        d2 = vec![C64::new(0.0, 0.0); g2];
        for a in 0..g {
            for b in 0..g {
                d2[a * g + b] = mm2(a, b) - m1[a] * m1[b];
            }
        }
    }
    if order >= 3 {
        d3 = vec![C64::new(0.0, 0.0); g3];
        for a in 0..g {
            for b in 0..g {
                for c in 0..g {
                    d3[(a * g + b) * g + c] = mm3(a, b, c)
                        - (mm2(a, b) * m1[c] + mm2(a, c) * m1[b] + mm2(b, c) * m1[a])
                        + m1[a] * m1[b] * m1[c] * 2.0;
                }
            }
        }
    }
    if order >= 4 {
        d4 = vec![C64::new(0.0, 0.0); g4];
        for a in 0..g {
            for b in 0..g {
                for c in 0..g {
                    for d in 0..g {
                        let (ma, mb, mc, md) = (m1[a], m1[b], m1[c], m1[d]);
                        d4[((a * g + b) * g + c) * g + d] = m4[((a * g + b) * g + c) * g + d]
                            - (mm3(a, b, c) * md + mm3(a, b, d) * mc + mm3(a, c, d) * mb + mm3(b, c, d) * ma)
                            - (mm2(a, b) * mm2(c, d) + mm2(a, c) * mm2(b, d) + mm2(a, d) * mm2(b, c))
                            + (mm2(a, b) * mc * md
                                + mm2(a, c) * mb * md
                                + mm2(a, d) * mb * mc
                                + mm2(b, c) * ma * md
                                + mm2(b, d) * ma * mc
                                + mm2(c, d) * ma * mb)
                                * 2.0
                            - ma * mb * mc * md * 6.0;
                    }
                }
            }
        }
    }

    Ok(ThetaDerivatives {
        genus: g,
        log_value: C64::new(e_max, 0.0) + s.ln(),
        ratio: s.norm() / abs_sum,
        d1,
        gradient,
        d2,
        d3,
        d4,
        terms: points.len(),
        tail_bound: tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_t() -> CMatrix {
        let mut t = CMatrix::zeros(2, 2);
        t[(0, 0)] = C64::new(0.3, 1.1);
        t[(0, 1)] = C64::new(-0.2, 0.35);
        t[(1, 0)] = t[(0, 1)];
        t[(1, 1)] = C64::new(0.15, 0.9);
        t
    }

    #[test]
    fn even_and_periodic() {
        let t = sample_t();
        let ch = ThetaChar::zero(2);
        let z = [C64::new(0.31, -0.17), C64::new(-0.44, 0.23)];
        let th = theta(&z, &t, &ch, None).unwrap();
        let neg = [-z[0], -z[1]];
        assert!((theta(&neg, &t, &ch, None).unwrap() - th).norm() < 1e-12 * th.norm());
        for k in 0..2 {
            let mut zk = z;
            zk[k] += 1.0;
            assert!((theta(&zk, &t, &ch, None).unwrap() - th).norm() < 1e-12 * th.norm());
            let mut zt = z;
            zt[0] += t[(0, k)];
            zt[1] += t[(1, k)];
            let factor = (C64::new(0.0, -2.0 * PI) * z[k] - C64::new(0.0, PI) * t[(k, k)]).exp();
            let lhs = theta(&zt, &t, &ch, None).unwrap();
            assert!((lhs - factor * th).norm() < 1e-10 * th.norm());
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let t = sample_t();
        let ch = ThetaChar::riemann(2);
        let z = [C64::new(0.21, 0.13), C64::new(-0.34, 0.05)];
        let d = theta_derivatives(&z, &t, &ch, 4, None).unwrap();
        let h = 1e-3;
        let logt = |w: [C64; 2]| theta_derivatives(&w, &t, &ch, 0, None).unwrap().log_value;
        let shift = |a: usize, s: f64| {
            let mut w = z;
            w[a] += s;
            w
        };
        for a in 0..2 {
            let fd = (logt(shift(a, h)) - logt(shift(a, -h))) / (2.0 * h);
            assert!((fd - d.d1[a]).norm() < 1e-5 * (1.0 + d.d1[a].norm()));
            let fd2 = (logt(shift(a, h)) - logt(z) * 2.0 + logt(shift(a, -h))) / (h * h);
            assert!((fd2 - d.d2[a * 2 + a]).norm() < 1e-4 * (1.0 + d.d2[a * 3].norm()));
        }
        // third and fourth cumulants via Richardson-extrapolated differences of the analytic second one
        let d2_at = |w: [C64; 2]| theta_derivatives(&w, &t, &ch, 2, None).unwrap().d2[0];
        let first = |h: f64| (d2_at(shift(0, h)) - d2_at(shift(0, -h))) / (2.0 * h);
        let second = |h: f64| (d2_at(shift(0, h)) - d2_at(z) * 2.0 + d2_at(shift(0, -h))) / (h * h);
        let d3fd = (first(h / 2.0) * 4.0 - first(h)) / 3.0;
        let d4fd = (second(h / 2.0) * 4.0 - second(h)) / 3.0;
        assert!((d3fd - d.d3[0]).norm() < 1e-7 * (1.0 + d.d3[0].norm()), "{d3fd} {}", d.d3[0]);
        assert!((d4fd - d.d4[0]).norm() < 1e-5 * (1.0 + d.d4[0].norm()), "{d4fd} {}", d.d4[0]);
    }

    #[test]
    fn radius_checks() {
        let t = sample_t();
        let ch = ThetaChar::zero(2);
        let z = [C64::new(0.1, 0.0), C64::new(0.2, 0.0)];
        assert!(matches!(theta(&z, &t, &ch, Some(1.0)), Err(CurveError::RadiusTooSmall { .. })));
        let a = theta(&z, &t, &ch, Some(9.0)).unwrap();
        let b = theta(&z, &t, &ch, None).unwrap();
        assert!((a - b).norm() < 1e-12 * b.norm());
        assert!(tail_bound(9.0, 2, 0.5) < TAIL_TARGET);
    }

    #[test]
    fn odd_characteristic_vanishes_at_origin() {
        let t = sample_t();
        let ch = ThetaChar::new(vec![0.5, 0.5], vec![0.5, 0.0]);
        assert_eq!(ch.parity(), -1);
        let v = theta(&[C64::new(0.0, 0.0); 2], &t, &ch, None).unwrap();
        assert!(v.norm() < 1e-13);
        assert_eq!(ThetaChar::riemann(1).parity(), -1);
        assert_eq!(ThetaChar::riemann(2).parity(), -1);
        assert_eq!(ThetaChar::riemann(3).parity(), 1);
    }
}
