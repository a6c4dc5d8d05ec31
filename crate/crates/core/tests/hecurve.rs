use elastica_core::hecurve::*;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut ChaCha8Rng, g: usize, r: f64) -> Vec<C64> {
    (0..g).map(|_| C64::new(rng.gen_range(-r..r), rng.gen_range(-r..r))).collect()
}

fn random_curve(rng: &mut ChaCha8Rng, g: usize) -> HECurve {
    let mut x = -(g as f64);
    let pts: Vec<C64> = (0..2 * g + 1)
        .map(|_| {
            x += rng.gen_range(0.5..1.2);
            C64::new(x, rng.gen_range(-0.6..0.6))
        })
        .collect();
    HECurve::new(pts).unwrap()
}

#[test]
fn random_genus_two_curves_satisfy_riemann_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..6 {
        let curve = random_curve(&mut rng, 2);
        let p = PeriodData::compute(&curve).unwrap();
        assert!(p.t.sub(&p.t.transpose()).max_abs() < 1e-12);
        assert!(p.im_t_min_eigenvalue() > 0.0);
        assert!(p.legendre_defect() < 1e-9, "{}", p.legendre_defect());
    }
}

#[test]
fn curve_json_round_trip() {
    let text = r#"{"genus": 2, "branch_points": [[-2.0, 0.1], [-1.0, 0.0], [0.0, -0.2], [1.0, 0.0], [2.0, 0.3]]}"#;
    let spec: CurveSpec = serde_json::from_str(text).unwrap();
    let curve = HECurve::from_spec(&spec).unwrap();
    assert_eq!(curve.to_spec(), spec);
    let bad = CurveSpec { genus: 3, ..spec };
    assert!(matches!(HECurve::from_spec(&bad), Err(CurveError::InvalidInput(_))));
}

#[test]
fn genus_three_theta_quasi_periodicity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let curve = random_curve(&mut rng, 3);
    let p = PeriodData::compute(&curve).unwrap();
    let ch = ThetaChar::zero(3);
    let z = random_point(&mut rng, 3, 0.4);
    let th = theta(&z, &p.t, &ch, None).unwrap();
    for k in 0..3 {
        let mut zt = z.clone();
        for i in 0..3 {
            zt[i] += p.t[(i, k)];
        }
        let factor = (C64::new(0.0, -2.0 * std::f64::consts::PI) * z[k]
            - C64::new(0.0, std::f64::consts::PI) * p.t[(k, k)])
        .exp();
        let lhs = theta(&zt, &p.t, &ch, None).unwrap();
        assert!((lhs - factor * th).norm() < 1e-10 * th.norm());
        let mut z1 = z.clone();
        z1[k] += 1.0;
        assert!((theta(&z1, &p.t, &ch, None).unwrap() - th).norm() < 1e-12 * th.norm());
    }
}

#[test]
fn sigma_parity_and_quasi_periodicity() {
    let curve = HECurve::from_real(&[-2.0, -1.1, 0.2, 0.9, 2.3]).unwrap();
    let s = SigmaFunction::new(&curve).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut signs = Vec::new();
    for _ in 0..4 {
        let t = random_point(&mut rng, 2, 0.5);
        let neg: Vec<C64> = t.iter().map(|x| -x).collect();
        signs.push(s.sigma(&neg).unwrap() / s.sigma(&t).unwrap());
    }
    for r in &signs {
        assert!((r - signs[0]).norm() < 1e-10);
        assert!((r.norm() - 1.0).abs() < 1e-10);
    }
    assert!(s.sigma(&[C64::new(0.0, 0.0); 2]).unwrap().norm() < 1e-12);

    // σ(t + ℓ)/σ(t) = exp(linear form): the ratio is multiplicative in t
    let ell = s.periods().lattice_vector(&[1.0, 0.0], &[0.0, 1.0]);
    let ratio = |t: &[C64]| {
        let shifted: Vec<C64> = t.iter().zip(&ell).map(|(a, b)| a + b).collect();
        s.sigma(&shifted).unwrap() / s.sigma(t).unwrap()
    };
    let t1 = random_point(&mut rng, 2, 0.4);
    let t2 = random_point(&mut rng, 2, 0.4);
    let t3 = random_point(&mut rng, 2, 0.4);
    let t4: Vec<C64> = (0..2).map(|i| t1[i] + t2[i] - t3[i]).collect();
    let check = ratio(&t1) * ratio(&t2) / (ratio(&t3) * ratio(&t4));
    assert!((check - 1.0).norm() < 1e-8, "{check}");
}

#[test]
fn genus_three_wp_symmetry_and_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let curve = random_curve(&mut rng, 3);
    let s = SigmaFunction::new(&curve).unwrap();
    // σ vanishes at the origin for this characteristic at genus three as well
    assert!(s.sigma(&[C64::new(0.0, 0.0); 3]).unwrap().norm() < 1e-12);
    let mut uncorrected_failures = 0;
    for _ in 0..10 {
        let t = random_point(&mut rng, 3, 0.5);
        let p = s.wp_tensor(&t).unwrap();
        for i in 1..=3 {
            for j in 1..=3 {
                assert!((p.wp(i, j) - p.wp(j, i)).norm() < 1e-9 * (1.0 + p.wp(i, j).norm()));
                for k in 1..=3 {
                    assert!((p.wp3(i, j, k) - p.wp3(k, i, j)).norm() < 1e-9 * (1.0 + p.wp3(i, j, k).norm()));
                }
            }
        }
        for r in genus3_relations(&p, curve.lambda(), RelationSet::Corrected) {
            assert!(r.residual < 1e-6, "relation {} residual {:e}", r.index, r.residual);
        }
        let uncorrected = genus3_relations(&p, curve.lambda(), RelationSet::Uncorrected);
        assert!(uncorrected[..13].iter().all(|r| r.residual < 1e-6));
        uncorrected_failures += uncorrected[13..].iter().filter(|r| r.residual > 1e-6).count();
    }
    assert!(uncorrected_failures > 0);
}

#[test]
fn divisor_polynomial_is_holomorphic_in_t() {
    let curve = HECurve::from_real(&[-2.0, -1.1, 0.2, 0.9, 2.3]).unwrap();
    let s = SigmaFunction::new(&curve).unwrap();
    let t = vec![C64::new(0.21, 0.18), C64::new(0.12, -0.27)];
    let p = s.wp_tensor(&t).unwrap();
    // ∂F/∂t_g has coefficients −℘_{ggi}; compare with differences along real and imaginary steps
    for h in [1e-4, 5e-5] {
        for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
            let mut tp = t.clone();
            let mut tm = t.clone();
            tp[1] += dir * h;
            tm[1] -= dir * h;
            let fp = s.wp_to_divisor(&tp).unwrap().polynomial;
            let fm = s.wp_to_divisor(&tm).unwrap().polynomial;
            for i in 0..2 {
                let d = (fp[i] - fm[i]) / (dir * 2.0 * h);
                let exact = -p.wp3(2, 2, i + 1);
                assert!((d - exact).norm() < 1e-5 * (1.0 + exact.norm()));
            }
        }
    }
}

#[test]
fn finite_gap_potential_translation_and_flows() {
    let curve = HECurve::from_real(&[-2.0, -1.1, 0.2, 0.9, 2.3]).unwrap();
    let s = SigmaFunction::new(&curve).unwrap();
    let t0 = vec![C64::new(0.31, 0.17), C64::new(-0.2, 0.23)];
    let grid: Vec<f64> = (0..8).map(|k| 0.05 * k as f64).collect();
    let u = finite_gap_u(&s, &grid, &t0, FiniteGapForm::KdvConsistent).unwrap();
    let mut t1 = t0.clone();
    t1[1] += 0.1;
    let shifted = finite_gap_u(&s, &grid[..6], &t1, FiniteGapForm::KdvConsistent).unwrap();
    for k in 0..6 {
        assert!((shifted[k] - u[k + 2]).norm() < 1e-10 * (1.0 + u[k].norm()));
    }

    let points = vec![t0.clone(), vec![C64::new(-0.11, 0.27), C64::new(0.4, -0.13)]];
    let coarse = finite_gap_flow_check(&s, &points, 1e-2).unwrap();
    let fine = finite_gap_flow_check(&s, &points, 5e-3).unwrap();
    assert!(fine.first_residual < 1e-5);
    assert!(fine.first_residual < coarse.first_residual);
    assert!(fine.second_residual < coarse.second_residual);
}

#[test]
fn periods_diverge_logarithmically_under_degeneration() {
    let mut prev = 0.0;
    let mut growth = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let curve = HECurve::from_real(&[-1.0, -1.0 + eps, 0.3, 1.1, 2.0]).unwrap();
        let p = PeriodData::compute(&curve).unwrap();
        let v = p.omega2[(0, 0)].norm();
        assert!(v > prev);
        if prev > 0.0 {
            growth.push(v - prev);
        }
        prev = v;
    }
    // equal increments per decade: logarithmic divergence
    assert!((growth[0] - growth[1]).abs() < 0.05 * growth[0], "{growth:?}");
}

#[test]
fn lattice_coordinates_invert_lattice_vectors() {
    let curve = HECurve::from_real(&[-2.0, -1.1, 0.2, 0.9, 2.3]).unwrap();
    let p = PeriodData::compute(&curve).unwrap();
    let v = p.lattice_vector(&[2.0, -1.0], &[1.0, 3.0]);
    let c = p.lattice_coordinates(&v).unwrap();
    for (a, b) in c.iter().zip([2.0, -1.0, 1.0, 3.0]) {
        assert!((a - b).abs() < 1e-10);
    }
    assert!(lattice_distance(&p, &v) < 1e-10);
}
