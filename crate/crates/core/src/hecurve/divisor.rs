use num_complex::Complex64 as C64;

use super::{CurveError, HECurve, PeriodData, SigmaFunction, QUAD_TOL};
use crate::linalg::poly_roots;
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub x: C64,
    pub y: C64,
}

/// Points `P_1 … P_g` whose Abel image is `t`, together with
/// `F(x) = x^g − Σ ℘_{gi} x^{i−1}` (coefficients lowest degree first).
#[derive(Debug, Clone, PartialEq)]
pub struct Divisor {
    pub polynomial: Vec<C64>,
    pub points: Vec<CurvePoint>,
}

impl SigmaFunction {
    pub fn wp_to_divisor(&self, t: &[C64]) -> Result<Divisor, CurveError> {
        let g = self.genus();
        let p = self.wp_tensor(t)?;
        let mut polynomial: Vec<C64> = (1..=g).map(|i| -p.wp(g, i)).collect();
        polynomial.push(C64::new(1.0, 0.0));
        let xs = if g == 1 { vec![-polynomial[0]] } else { poly_roots(&polynomial) };
        let points = xs
            .into_iter()
            .map(|x| {
                let mut y = C64::new(0.0, 0.0);
                let mut xp = C64::new(1.0, 0.0);
                for i in 1..=g {
                    y += p.wp3(g, g, i) * xp;
                    xp *= x;
                }
                CurvePoint { x, y: y * 0.5 }
            })
            .collect();
        Ok(Divisor { polynomial, points })
    }
}

/// `∫_∞^P (ω_1, …, ω_g)` along the vertical ray above `x_P`, on the sheet
/// selected by `y_P`.
pub fn abel_map_point(curve: &HECurve, p: CurvePoint) -> Result<Vec<C64>, CurveError> {
    let g = curve.genus();
    let sheet = if (curve.y(p.x) - p.y).norm() <= (curve.y(p.x) + p.y).norm() { 1.0 } else { -1.0 };
    // x = x_P + i(1/σ² − 1), dx = −2i/σ³ dσ
    let to_inf = integrate(
        |s: f64| {
            if s <= 0.0 {
                return vec![C64::new(0.0, 0.0); g];
            }
            let x = p.x + C64::new(0.0, 1.0 / (s * s) - 1.0);
            let w = C64::new(0.0, 2.0 / (s * s * s)) / (curve.y(x) * 2.0);
            let mut out = Vec::with_capacity(g);
            let mut xp = C64::new(1.0, 0.0);
            for _ in 0..g {
                out.push(w * xp);
                xp *= x;
            }
            out
        },
        0.0,
        1.0,
        g,
        QUAD_TOL,
        QUAD_TOL,
    )?;
    Ok(to_inf.into_iter().map(|v| -v * sheet).collect())
}

pub fn abel_map(curve: &HECurve, points: &[CurvePoint]) -> Result<Vec<C64>, CurveError> {
    let g = curve.genus();
    let mut total = vec![C64::new(0.0, 0.0); g];
    for &p in points {
        for (acc, v) in total.iter_mut().zip(abel_map_point(curve, p)?) {
            *acc += v;
        }
    }
    Ok(total)
}

/// Distance from `v` to the nearest lattice vector `Ω′m + Ω″n`.
pub fn lattice_distance(periods: &PeriodData, v: &[C64]) -> f64 {
    let Some(coords) = periods.lattice_coordinates(v) else {
        return f64::INFINITY;
    };
    let g = periods.genus();
    let m: Vec<f64> = coords[..g].iter().map(|x| x.round()).collect();
    let n: Vec<f64> = coords[g..].iter().map(|x| x.round()).collect();
    let l = periods.lattice_vector(&m, &n);
    v.iter().zip(&l).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genus_one_root_is_wp() {
        let curve = HECurve::from_real(&[-1.0, 0.4, 1.5]).unwrap();
        let s = SigmaFunction::new(&curve).unwrap();
        let t = [C64::new(0.37, 0.12)];
        let d = s.wp_to_divisor(&t).unwrap();
        assert!((d.points[0].x - s.wp(1, 1, &t).unwrap()).norm() < 1e-14);
        let p = d.points[0];
        assert!((p.y * p.y - curve.h(p.x)).norm() < 1e-9 * (1.0 + p.y.norm_sqr()));
        let back = abel_map(&curve, &d.points).unwrap();
        let diff = [back[0] - t[0]];
        assert!(lattice_distance(s.periods(), &diff) < 1e-9, "{}", lattice_distance(s.periods(), &diff));
    }

    #[test]
    fn genus_two_round_trip() {
        let curve = HECurve::from_real(&[-2.0, -1.1, 0.2, 0.9, 2.3]).unwrap();
        let s = SigmaFunction::new(&curve).unwrap();
        let t = [C64::new(0.41, 0.13), C64::new(-0.22, 0.31)];
        let d = s.wp_to_divisor(&t).unwrap();
        for p in &d.points {
            assert!((p.y * p.y - curve.h(p.x)).norm() < 1e-8 * (1.0 + p.y.norm_sqr()));
        }
        let back = abel_map(&curve, &d.points).unwrap();
        let diff: Vec<C64> = back.iter().zip(&t).map(|(a, b)| a - b).collect();
        assert!(lattice_distance(s.periods(), &diff) < 1e-6, "{}", lattice_distance(s.periods(), &diff));
    }
}
