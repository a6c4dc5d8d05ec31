use num_complex::Complex64 as C64;

use super::theta::{lattice_sum, theta_derivatives, ThetaChar};
use super::{CurveError, HECurve, PeriodData};
use crate::linalg::CMatrix;

/// `σ(t) = exp(−½ tᵀ A t) θ[δ″; δ′](M t; T)` with `A = H′Ω′⁻¹`, `M = Ω′⁻¹`.
#[derive(Debug, Clone)]
pub struct SigmaFunction {
    curve: HECurve,
    periods: PeriodData,
    a: CMatrix,
    m: CMatrix,
    characteristic: ThetaChar,
}

/// `℘_{ij}`, `℘_{ijk}`, `℘_{ijkl}` at one point; accessors take 1-based indices.
#[derive(Debug, Clone, PartialEq)]
pub struct WpTensor {
    pub genus: usize,
    pub p2: Vec<C64>,
    pub p3: Vec<C64>,
    pub p4: Vec<C64>,
}

impl WpTensor {
    pub fn wp(&self, i: usize, j: usize) -> C64 {
        let g = self.genus;
        self.p2[(i - 1) * g + (j - 1)]
    }

    pub fn wp3(&self, i: usize, j: usize, k: usize) -> C64 {
        let g = self.genus;
        self.p3[((i - 1) * g + (j - 1)) * g + (k - 1)]
    }

    pub fn wp4(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        let g = self.genus;
        self.p4[(((i - 1) * g + (j - 1)) * g + (k - 1)) * g + (l - 1)]
    }
}

impl SigmaFunction {
    pub fn new(curve: &HECurve) -> Result<Self, CurveError> {
        let periods = PeriodData::compute(curve)?;
        Self::from_periods(curve, periods)
    }

    pub fn from_periods(curve: &HECurve, periods: PeriodData) -> Result<Self, CurveError> {
        let g = curve.genus();
        let m = periods
            .omega1
            .inverse()
            .ok_or_else(|| CurveError::DegenerateCurve("α-period matrix is singular".into()))?;
        let a = periods.eta1.mul(&m);
        Ok(Self { curve: curve.clone(), periods, a, m, characteristic: ThetaChar::riemann(g) })
    }

    pub fn with_characteristic(mut self, ch: ThetaChar) -> Self {
        assert_eq!(ch.genus(), self.genus());
        self.characteristic = ch;
        self
    }

    pub fn genus(&self) -> usize {
        self.curve.genus()
    }

    pub fn curve(&self) -> &HECurve {
        &self.curve
    }

    pub fn periods(&self) -> &PeriodData {
        &self.periods
    }

    pub fn characteristic(&self) -> &ThetaChar {
        &self.characteristic
    }

    /// `H′Ω′⁻¹`; symmetric when the periods satisfy the Legendre relation.
    pub fn quadratic_form(&self) -> &CMatrix {
        &self.a
    }

    fn z_of(&self, t: &[C64]) -> Vec<C64> {
        self.m.mul_vec(t)
    }

    fn quad(&self, t: &[C64]) -> C64 {
        let at = self.a.mul_vec(t);
        t.iter().zip(&at).map(|(x, y)| x * y).sum::<C64>() * 0.5
    }

    pub fn sigma(&self, t: &[C64]) -> Result<C64, CurveError> {
        let th = lattice_sum(&self.z_of(t), &self.periods.t, &self.characteristic, None, 0)?;
        Ok((th.log_value - self.quad(t)).exp())
    }

    /// `∂σ/∂t_i`, valid on the theta divisor as well.
    pub fn sigma_gradient(&self, t: &[C64]) -> Result<Vec<C64>, CurveError> {
        let g = self.genus();
        let th = lattice_sum(&self.z_of(t), &self.periods.t, &self.characteristic, None, 1)?;
        let e = (-self.quad(t)).exp();
        let value = th.value();
        let at = self.a.mul_vec(t);
        Ok((0..g)
            .map(|i| {
                let dz: C64 = (0..g).map(|a| self.m[(a, i)] * th.gradient[a]).sum();
                e * (dz - at[i] * value)
            })
            .collect())
    }

    /// All `℘` derivatives of orders 2–4 from the lattice-sum cumulants.
    pub fn wp_tensor(&self, t: &[C64]) -> Result<WpTensor, CurveError> {
        let g = self.genus();
        let d = theta_derivatives(&self.z_of(t), &self.periods.t, &self.characteristic, 4, None)?;
        let mut p2 = contract(&d.d2, 2, g, &self.m);
        for i in 0..g {
            for j in 0..g {
                p2[i * g + j] = self.a[(i, j)] - p2[i * g + j];
            }
        }
        let p3 = contract(&d.d3, 3, g, &self.m).into_iter().map(|x| -x).collect();
        let p4 = contract(&d.d4, 4, g, &self.m).into_iter().map(|x| -x).collect();
        Ok(WpTensor { genus: g, p2, p3, p4 })
    }

    pub fn wp(&self, i: usize, j: usize, t: &[C64]) -> Result<C64, CurveError> {
        let g = self.genus();
        let d = theta_derivatives(&self.z_of(t), &self.periods.t, &self.characteristic, 2, None)?;
        let p = contract(&d.d2, 2, g, &self.m);
        Ok(self.a[(i - 1, j - 1)] - p[(i - 1) * g + (j - 1)])
    }

    /// `℘_{ij}` by central differences of `log σ` at steps `h` and `h/2`,
    /// combined by Richardson extrapolation.
    pub fn wp_finite_difference(&self, i: usize, j: usize, t: &[C64], h: f64) -> Result<C64, CurveError> {
        let base = self.sigma(t)?;
        if base.norm() < 1e-300 {
            return Err(CurveError::NearDivisor { ratio: 0.0 });
        }
        let second = |h: f64| -> Result<C64, CurveError> {
            let at = |si: f64, sj: f64| -> Result<C64, CurveError> {
                let mut p = t.to_vec();
                p[i - 1] += si * h;
                p[j - 1] += sj * h;
                Ok((self.sigma(&p)? / base).ln())
            };
            if i == j {
                Ok((at(1.0, 0.0)? - at(0.0, 0.0)? * 2.0 + at(-1.0, 0.0)?) / (h * h))
            } else {
                Ok((at(1.0, 1.0)? - at(1.0, -1.0)? - at(-1.0, 1.0)? + at(-1.0, -1.0)?) / (4.0 * h * h))
            }
        };
        let coarse = second(h)?;
        let fine = second(h / 2.0)?;
        Ok(-(fine * 4.0 - coarse) / 3.0)
    }
}

/// `Σ M_{a₁i₁} ⋯ M_{a_r i_r} T_{a₁…a_r}` for a flat rank-`r` tensor.
fn contract(tensor: &[C64], rank: usize, g: usize, m: &CMatrix) -> Vec<C64> {
    let mut cur = tensor.to_vec();
    for axis in 0..rank {
        let stride = g.pow((rank - 1 - axis) as u32);
        let mut next = vec![C64::new(0.0, 0.0); cur.len()];
        for (idx, out) in next.iter_mut().enumerate() {
            let i = (idx / stride) % g;
            let base = idx - i * stride;
            *out = (0..g).map(|a| m[(a, i)] * cur[base + a * stride]).sum();
        }
        cur = next;
    }
    cur
}

/// `(g₂, g₃, shift)` for a genus-one curve: `℘₁₁ = ℘(t; g₂, g₃) − shift`.
pub fn weierstrass_invariants(curve: &HECurve) -> (C64, C64, C64) {
    assert_eq!(curve.genus(), 1);
    let (l0, l1, l2) = (curve.lambda_at(0), curve.lambda_at(1), curve.lambda_at(2));
    let a = l1 - l2 * l2 / 3.0;
    let b = l0 - l1 * l2 / 3.0 + l2 * l2 * l2 * (2.0 / 27.0);
    (-a * 4.0, -b * 4.0, l2 / 3.0)
}

/// Constant in `u = −2(℘_gg + c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiniteGapForm {
    /// `c = +λ_{2g}/3`: `u_sss + 6 u u_s = 4 ∂_{t_{g−1}} u`.
    KdvConsistent,
    /// `c = −λ_{2g}/3`.
    NegativeShift,
}

impl FiniteGapForm {
    pub fn offset(self, curve: &HECurve) -> C64 {
        let l = curve.lambda_at(2 * curve.genus()) / 3.0;
        match self {
            Self::KdvConsistent => l,
            Self::NegativeShift => -l,
        }
    }
}

/// `u(s) = −2(℘_gg(t_fixed + s e_g) + c)` on the given grid.
pub fn finite_gap_u(
    sigma: &SigmaFunction,
    s_grid: &[f64],
    t_fixed: &[C64],
    form: FiniteGapForm,
) -> Result<Vec<C64>, CurveError> {
    let g = sigma.genus();
    let c = form.offset(sigma.curve());
    s_grid
        .iter()
        .map(|&s| {
            let mut t = t_fixed.to_vec();
            t[g - 1] += s;
            Ok((sigma.wp(g, g, &t)? + c) * -2.0)
        })
        .collect()
}

/// KdV-flow diagnostics for `u = −2(℘_gg + λ_{2g}/3)`, `s = t_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowCheck {
    /// Largest relative residual of `u_sss + 6uu_s = 4 ∂_{t_{g−1}} u`.
    pub first_residual: f64,
    /// Least-squares `c` in `X₃[u] ≈ Σ c_i ∂_{t_i} u`, where
    /// `X₃[u] = u_5s + 10uu_sss + 20u_s u_ss + 30u²u_s`.
    pub second_coefficients: Vec<C64>,
    pub second_residual: f64,
}

/// `s`-derivatives of `℘_gggg` of orders 1–3 by Richardson-extrapolated
/// central differences with step `h`.
fn s_derivatives(sigma: &SigmaFunction, t: &[C64], h: f64) -> Result<[C64; 3], CurveError> {
    let g = sigma.genus();
    let q = |s: f64| -> Result<C64, CurveError> {
        let mut p = t.to_vec();
        p[g - 1] += s;
        Ok(sigma.wp_tensor(&p)?.wp4(g, g, g, g))
    };
    let est = |h: f64| -> Result<[C64; 3], CurveError> {
        let (m2, m1, z, p1, p2) = (q(-2.0 * h)?, q(-h)?, q(0.0)?, q(h)?, q(2.0 * h)?);
        Ok([(p1 - m1) / (2.0 * h), (p1 - z * 2.0 + m1) / (h * h), (p2 - p1 * 2.0 + m1 * 2.0 - m2) / (2.0 * h * h * h)])
    };
    let (a, b) = (est(h)?, est(h / 2.0)?);
    Ok([0, 1, 2].map(|k| (b[k] * 4.0 - a[k]) / 3.0))
}

pub fn finite_gap_flow_check(sigma: &SigmaFunction, points: &[Vec<C64>], h: f64) -> Result<FlowCheck, CurveError> {
    let g = sigma.genus();
    assert!(g >= 2, "the flow check needs a second time coordinate");
    let c = FiniteGapForm::KdvConsistent.offset(sigma.curve());
    let mut first_residual = 0.0f64;
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for t in points {
        let p = sigma.wp_tensor(t)?;
        let [d1, _, d3] = s_derivatives(sigma, t, h)?;
        let u = (p.wp(g, g) + c) * -2.0;
        let u1 = p.wp3(g, g, g) * -2.0;
        let u2 = p.wp4(g, g, g, g) * -2.0;
        let (u3, u5) = (d1 * -2.0, d3 * -2.0);
        let ut: Vec<C64> = (1..=g).map(|i| p.wp3(g, g, i) * -2.0).collect();
        let terms = [u3, u * u1 * 6.0, -ut[g - 2] * 4.0];
        let scale: f64 = terms.iter().map(|x| x.norm()).sum();
        first_residual = first_residual.max(terms.iter().sum::<C64>().norm() / scale);
        rows.push(ut);
        targets.push(u5 + u * u3 * 10.0 + u1 * u2 * 20.0 + u * u * u1 * 30.0);
    }
    let b = CMatrix::from_fn(rows.len(), g, |r, i| rows[r][i]);
    let bh = b.transpose().map(|z| z.conj());
    let coeffs = bh
        .mul(&b)
        .inverse()
        .map(|inv| inv.mul_vec(&bh.mul_vec(&targets)))
        .unwrap_or_else(|| vec![C64::new(f64::NAN, 0.0); g]);
    let fit = b.mul_vec(&coeffs);
    let num: f64 = fit.iter().zip(&targets).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = targets.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    Ok(FlowCheck { first_residual, second_coefficients: coeffs, second_residual: num / den })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationCheck {
    pub index: usize,
    pub lhs: C64,
    pub rhs: C64,
    /// `|lhs − rhs|` over the sum of the magnitudes of all terms.
    pub residual: f64,
}

/// Which constant terms to use in the last two relations (indices 14 and 15).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationSet {
    /// `−4λ₀λ₅` in relation 14 and `−8λ₀λ₄ + 2λ₁λ₃` in relation 15, fitted
    /// from numerically evaluated `℘` functions.
    Corrected,
    /// `−2λ₀λ₅` in relation 14 and `−4λ₀λ₄ + 2λ₁λ₃` in relation 15; these
    /// constants fail the numerical check.
    Uncorrected,
}

/// The fifteen quadratic differential relations satisfied by the genus-three
/// `℘` functions.
pub fn genus3_relations(p: &WpTensor, lambda: &[C64], set: RelationSet) -> Vec<RelationCheck> {
    assert_eq!(p.genus, 3);
    let l = |k: usize| lambda.get(k).copied().unwrap_or(C64::new(0.0, 0.0));
    let w = |i, j| p.wp(i, j);
    let w4 = |i, j, k, m| p.wp4(i, j, k, m);
    let delta = vec![w(3, 2) * w(2, 1), -w(3, 1) * w(2, 2), w(3, 1) * w(3, 1), -w(3, 3) * w(1, 1)];
    let scaled = |c: f64| delta.iter().map(|x| x * c).collect::<Vec<_>>();
    let (c14, c15) = match set {
        RelationSet::Corrected => (4.0, 8.0),
        RelationSet::Uncorrected => (2.0, 4.0),
    };
    let with = |mut v: Vec<C64>, extra: Vec<C64>| {
        v.extend(extra);
        v
    };

    let table: Vec<(Vec<C64>, Vec<C64>)> = vec![
        (
            vec![w4(3, 3, 3, 3), -w(3, 3) * w(3, 3) * 6.0],
            vec![l(5) * l(7) * 2.0, l(6) * w(3, 3) * 4.0, l(7) * w(3, 2) * 4.0],
        ),
        (
            vec![w4(3, 3, 3, 2), -w(3, 3) * w(3, 2) * 6.0],
            vec![l(6) * w(3, 2) * 4.0, l(7) * w(3, 1) * 6.0, -l(7) * w(2, 2) * 2.0],
        ),
        (vec![w4(3, 3, 3, 1), -w(3, 1) * w(3, 3) * 6.0], vec![l(6) * w(3, 1) * 4.0, -l(7) * w(2, 1) * 2.0]),
        (
            vec![w4(3, 3, 2, 2), -w(3, 2) * w(3, 2) * 4.0, -w(3, 3) * w(2, 2) * 2.0],
            vec![l(5) * w(3, 2) * 2.0, l(6) * w(3, 1) * 4.0, -l(7) * w(2, 1) * 2.0],
        ),
        (
            vec![w4(3, 3, 2, 1), -w(3, 3) * w(2, 1) * 2.0, -w(3, 2) * w(3, 1) * 4.0],
            vec![l(5) * w(3, 1) * 2.0],
        ),
        (vec![w4(3, 3, 1, 1), -w(3, 1) * w(3, 1) * 4.0, -w(3, 3) * w(1, 1) * 2.0], scaled(2.0)),
        (
            vec![w4(3, 2, 2, 2), -w(3, 2) * w(2, 2) * 6.0],
            vec![
                -l(2) * l(7) * 4.0,
                -l(3) * w(3, 3) * 2.0,
                l(4) * w(3, 2) * 4.0,
                l(5) * w(3, 1) * 4.0,
                -l(7) * w(1, 1) * 6.0,
            ],
        ),
        (
            vec![w4(3, 2, 2, 1), -w(3, 2) * w(2, 1) * 4.0, -w(3, 1) * w(2, 2) * 2.0],
            with(vec![-l(1) * l(7) * 2.0, l(4) * w(3, 1) * 4.0], scaled(-2.0)),
        ),
        (
            vec![w4(3, 2, 1, 1), -w(3, 1) * w(2, 1) * 4.0, -w(3, 2) * w(1, 1) * 2.0],
            vec![-l(0) * l(7) * 4.0, l(3) * w(3, 1) * 2.0],
        ),
        (
            vec![w4(3, 1, 1, 1), -w(3, 1) * w(1, 1) * 6.0],
            vec![l(0) * w(3, 3) * 4.0, -l(1) * w(3, 2) * 2.0, l(2) * w(3, 1) * 4.0],
        ),
        (
            vec![w4(2, 2, 2, 2), -w(2, 2) * w(2, 2) * 6.0],
            with(
                vec![
                    -l(2) * l(6) * 8.0,
                    l(3) * l(5) * 2.0,
                    -l(1) * l(7) * 6.0,
                    -l(2) * w(3, 3) * 12.0,
                    l(3) * w(3, 2) * 4.0,
                    l(4) * w(2, 2) * 4.0,
                    l(5) * w(2, 1) * 4.0,
                    -l(6) * w(1, 1) * 12.0,
                ],
                scaled(12.0),
            ),
        ),
        (
            vec![w4(2, 2, 2, 1), -w(2, 2) * w(2, 1) * 6.0],
            vec![
                -l(1) * l(6) * 4.0,
                -l(0) * l(7) * 8.0,
                -l(1) * w(3, 3) * 6.0,
                l(3) * w(3, 1) * 4.0,
                l(4) * w(2, 1) * 4.0,
                -l(5) * w(1, 1) * 2.0,
            ],
        ),
        (
            vec![w4(2, 2, 1, 1), -w(2, 1) * w(2, 1) * 4.0, -w(2, 2) * w(1, 1) * 2.0],
            vec![
                -l(0) * l(6) * 8.0,
                -l(0) * w(3, 3) * 8.0,
                -l(1) * w(3, 2) * 2.0,
                l(2) * w(3, 1) * 4.0,
                l(3) * w(2, 1) * 2.0,
            ],
        ),
        (
            vec![w4(2, 1, 1, 1), -w(2, 1) * w(1, 1) * 6.0],
            vec![
                -l(0) * l(5) * c14,
                -l(0) * w(3, 2) * 8.0,
                l(1) * w(3, 1) * 6.0,
                -l(1) * w(2, 2) * 2.0,
                l(2) * w(2, 1) * 4.0,
            ],
        ),
        (
            vec![w4(1, 1, 1, 1), -w(1, 1) * w(1, 1) * 6.0],
            vec![
                -l(0) * l(4) * c15,
                l(1) * l(3) * 2.0,
                l(0) * w(3, 1) * 16.0,
                -l(0) * w(2, 2) * 12.0,
                l(1) * w(2, 1) * 4.0,
                l(2) * w(1, 1) * 4.0,
            ],
        ),
    ];

    table
        .into_iter()
        .enumerate()
        .map(|(k, (lhs_terms, rhs_terms))| {
            let lhs: C64 = lhs_terms.iter().sum();
            let rhs: C64 = rhs_terms.iter().sum();
            let scale: f64 = lhs_terms.iter().chain(rhs_terms.iter()).map(|x| x.norm()).sum();
            RelationCheck { index: k + 1, lhs, rhs, residual: (lhs - rhs).norm() / scale.max(f64::MIN_POSITIVE) }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contraction_matches_matrix_product() {
        let g = 2;
        let m = CMatrix::from_fn(2, 2, |i, j| C64::new(1.0 + i as f64, j as f64 - 0.5));
        let t: Vec<C64> = (0..4).map(|k| C64::new(k as f64, 1.0)).collect();
        let out = contract(&t, 2, g, &m);
        let tm = CMatrix::from_fn(2, 2, |a, b| t[a * 2 + b]);
        let expect = m.transpose().mul(&tm).mul(&m);
        for i in 0..2 {
            for j in 0..2 {
                assert!((out[i * 2 + j] - expect[(i, j)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn genus_one_wp_matches_invariants() {
        let curve = HECurve::from_real(&[-1.1, 0.3, 1.7]).unwrap();
        let s = SigmaFunction::new(&curve).unwrap();
        let (g2, g3, shift) = weierstrass_invariants(&curve);
        let t = [C64::new(0.23, 0.11)];
        let p = s.wp_tensor(&t).unwrap();
        let wp = p.wp(1, 1) + shift;
        let dwp = p.wp3(1, 1, 1);
        // (℘′)² = 4℘³ − g₂℘ − g₃ and ℘″ = 6℘² − g₂/2
        assert!((dwp * dwp - (wp * wp * wp * 4.0 - g2 * wp - g3)).norm() < 1e-9 * wp.norm().powi(3));
        assert!((p.wp4(1, 1, 1, 1) - (wp * wp * 6.0 - g2 / 2.0)).norm() < 1e-9 * wp.norm().powi(2));
        let fd = s.wp_finite_difference(1, 1, &t, 1e-3).unwrap();
        assert!((fd - p.wp(1, 1)).norm() < 1e-7 * wp.norm());
        assert!(s.sigma(&[C64::new(0.0, 0.0)]).unwrap().norm() < 1e-12);
    }

    #[test]
    fn genus_two_symmetry_and_fd() {
        let curve = HECurve::from_real(&[-2.0, -1.1, 0.2, 0.9, 2.3]).unwrap();
        let s = SigmaFunction::new(&curve).unwrap();
        let a = s.quadratic_form();
        assert!(a.sub(&a.transpose()).max_abs() < 1e-9 * a.max_abs());
        let t = [C64::new(0.31, 0.07), C64::new(-0.12, 0.21)];
        let p = s.wp_tensor(&t).unwrap();
        for (i, j) in [(1, 1), (1, 2), (2, 2)] {
            assert!((p.wp(i, j) - p.wp(j, i)).norm() < 1e-12 * (1.0 + p.wp(i, j).norm()));
            let fd = s.wp_finite_difference(i, j, &t, 1e-3).unwrap();
            assert!((fd - p.wp(i, j)).norm() < 1e-6 * (1.0 + p.wp(i, j).norm()), "{i}{j}: {fd} vs {}", p.wp(i, j));
        }
    }
}
