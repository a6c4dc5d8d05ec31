use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{poly_eval, CurveError, HECurve};
use crate::linalg::{cholesky, CMatrix};
use crate::quadrature::integrate;

/// Relative/absolute target for each segment integral.
pub const QUAD_TOL: f64 = 1e-13;

/// Unnormalized periods of `ω_i` and `η_i`: entry `(i, j)` of each matrix is
/// the integral of form `i` over cycle `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodData {
    pub omega1: CMatrix,
    pub omega2: CMatrix,
    pub eta1: CMatrix,
    pub eta2: CMatrix,
    /// `Ω′⁻¹ Ω″`
    pub t: CMatrix,
    /// `Ω′ H″ᵀ − Ω″ H′ᵀ = sign · 2πi · I`
    pub legendre_sign: f64,
}

impl PeriodData {
    pub fn compute(curve: &HECurve) -> Result<Self, CurveError> {
        let g = curve.genus();
        let diffs = curve.differentials();
        let numerators: Vec<Vec<C64>> = diffs.omega.iter().chain(diffs.eta.iter()).cloned().collect();
        let segments: Vec<Vec<C64>> = (0..2 * g)
            .into_par_iter()
            .map(|k| segment_integral(curve, k, &numerators))
            .collect::<Result<_, _>>()?;

        let mut omega1 = CMatrix::zeros(g, g);
        let mut omega2 = CMatrix::zeros(g, g);
        let mut eta1 = CMatrix::zeros(g, g);
        let mut eta2 = CMatrix::zeros(g, g);
        for j in 0..g {
            for i in 0..g {
                omega1[(i, j)] = segments[2 * j][i] * 2.0;
                eta1[(i, j)] = segments[2 * j][g + i] * 2.0;
                for k in j..g {
                    omega2[(i, j)] += segments[2 * k + 1][i] * 2.0;
                    eta2[(i, j)] += segments[2 * k + 1][g + i] * 2.0;
                }
            }
        }

        let inv = omega1
            .inverse()
            .ok_or_else(|| CurveError::DegenerateCurve("α-period matrix is singular".into()))?;
        let mut t = inv.mul(&omega2);
        let asym = t.sub(&t.transpose()).max_abs();
        if asym > 1e-8 * (1.0 + t.max_abs()) {
            return Err(CurveError::RiemannRelations(format!("T not symmetric (defect {asym:e})")));
        }
        let im = sym_im(&t);
        if cholesky(&im).is_none() {
            let neg: Vec<Vec<f64>> = im.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
            if cholesky(&neg).is_none() {
                return Err(CurveError::RiemannRelations("Im T is indefinite".into()));
            }
            let m1 = C64::new(-1.0, 0.0);
            omega2 = omega2.scale(m1);
            eta2 = eta2.scale(m1);
            t = t.scale(m1);
        }
        let t = CMatrix::from_fn(g, g, |i, j| (t[(i, j)] + t[(j, i)]) * 0.5);

        let pairing = omega1.mul(&eta2.transpose()).sub(&omega2.mul(&eta1.transpose()));
        let trace: C64 = (0..g).map(|i| pairing[(i, i)]).sum();
        let legendre_sign = if (trace / C64::new(0.0, 2.0 * std::f64::consts::PI * g as f64)).re >= 0.0 {
            1.0
        } else {
            -1.0
        };
        Ok(Self { omega1, omega2, eta1, eta2, t, legendre_sign })
    }

    pub fn genus(&self) -> usize {
        self.t.rows()
    }

    /// Largest deviation among the bilinear identities
    /// `Ω′Ω″ᵀ = Ω″Ω′ᵀ`, `H′H″ᵀ = H″H′ᵀ`, `Ω′H″ᵀ − Ω″H′ᵀ = ±2πi·I`.
    pub fn legendre_defect(&self) -> f64 {
        let g = self.genus();
        let a = self.omega1.mul(&self.omega2.transpose());
        let b = self.eta1.mul(&self.eta2.transpose());
        let c = self.omega1.mul(&self.eta2.transpose()).sub(&self.omega2.mul(&self.eta1.transpose()));
        let target = CMatrix::identity(g).scale(C64::new(0.0, self.legendre_sign * 2.0 * std::f64::consts::PI));
        a.sub(&a.transpose()).max_abs().max(b.sub(&b.transpose()).max_abs()).max(c.sub(&target).max_abs())
    }

    /// Smallest eigenvalue of `Im T`.
    pub fn im_t_min_eigenvalue(&self) -> f64 {
        crate::linalg::min_eigenvalue_spd(&sym_im(&self.t)).unwrap_or(f64::NAN)
    }

    /// Lattice vector `Ω′ m + Ω″ n`.
    pub fn lattice_vector(&self, m: &[f64], n: &[f64]) -> Vec<C64> {
        let to_c = |v: &[f64]| v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>();
        let a = self.omega1.mul_vec(&to_c(m));
        let b = self.omega2.mul_vec(&to_c(n));
        a.iter().zip(&b).map(|(x, y)| x + y).collect()
    }

    /// Real coordinates `(m, n)` of `v = Ω′ m + Ω″ n`.
    pub fn lattice_coordinates(&self, v: &[C64]) -> Option<Vec<f64>> {
        let g = self.genus();
        let mut a = vec![vec![0.0; 2 * g]; 2 * g];
        let mut rhs = vec![0.0; 2 * g];
        for i in 0..g {
            for j in 0..g {
                a[i][j] = self.omega1[(i, j)].re;
                a[i][g + j] = self.omega2[(i, j)].re;
                a[g + i][j] = self.omega1[(i, j)].im;
                a[g + i][g + j] = self.omega2[(i, j)].im;
            }
            rhs[i] = v[i].re;
            rhs[g + i] = v[i].im;
        }
        crate::linalg::solve_real(a, rhs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("period data serializes")
    }
}

fn sym_im(t: &CMatrix) -> Vec<Vec<f64>> {
    let g = t.rows();
    (0..g).map(|i| (0..g).map(|j| 0.5 * (t[(i, j)].im + t[(j, i)].im)).collect()).collect()
}

/// `∫_{c_k}^{c_{k+1}} P(x) dx / 2y` for every numerator `P`, with the
/// endpoint square roots removed by `x = c ± d τ²` on each half.
fn segment_integral(curve: &HECurve, k: usize, numerators: &[Vec<C64>]) -> Result<Vec<C64>, CurveError> {
    let c = curve.branch_points();
    let (ca, cb) = (c[k], c[k + 1]);
    let d = cb - ca;
    let rot = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let pre_a = d / (rot * (C64::new(0.0, -1.0) * d).sqrt());
    let pre_b = d / (rot * (C64::new(0.0, 1.0) * d).sqrt());
    let dim = numerators.len();
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let first = integrate(
        |tau| {
            let x = ca + d * tau * tau;
            let w = pre_a / curve.y_without(x, k);
            numerators.iter().map(|p| poly_eval(p, x) * w).collect()
        },
        0.0,
        half,
        dim,
        QUAD_TOL,
        QUAD_TOL,
    )?;
    let second = integrate(
        |tau| {
            let x = cb - d * tau * tau;
            let w = pre_b / curve.y_without(x, k + 1);
            numerators.iter().map(|p| poly_eval(p, x) * w).collect()
        },
        0.0,
        half,
        dim,
        QUAD_TOL,
        QUAD_TOL,
    )?;
    Ok(first.iter().zip(&second).map(|(a, b)| a + b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::ellip_k;

    #[test]
    fn genus_one_matches_agm() {
        let (e1, e2, e3) = (-1.3, 0.4, 2.1);
        let curve = HECurve::from_real(&[e2, e3, e1]).unwrap();
        let p = PeriodData::compute(&curve).unwrap();
        let m = (e2 - e1) / (e3 - e1);
        let scale = (e3 - e1).sqrt();
        let w1 = 2.0 * ellip_k(m) / scale;
        let w2 = 2.0 * ellip_k(1.0 - m) / scale;
        assert!((p.omega1[(0, 0)].norm() - w1).abs() < 1e-10 * w1);
        assert!((p.omega2[(0, 0)].norm() - w2).abs() < 1e-10 * w2);
        assert!(p.t[(0, 0)].im > 0.0);
        assert!(p.legendre_defect() < 1e-10, "{}", p.legendre_defect());
    }

    #[test]
    fn genus_two_riemann_relations() {
        let curve = HECurve::new(vec![
            C64::new(-2.0, 0.3),
            C64::new(-0.7, -0.4),
            C64::new(0.1, 0.9),
            C64::new(1.2, -0.2),
            C64::new(2.5, 0.5),
        ])
        .unwrap();
        let p = PeriodData::compute(&curve).unwrap();
        assert!(p.im_t_min_eigenvalue() > 0.0);
        assert!(p.legendre_defect() < 1e-9, "{}", p.legendre_defect());
        let json = p.to_json();
        let back: PeriodData = serde_json::from_str(&json).unwrap();
        assert!(back.t.sub(&p.t).max_abs() < 1e-15);
    }
}
