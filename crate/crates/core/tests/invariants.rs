use num_complex::Complex64;
use proptest::prelude::*;

use elastica_core::field::Field;
use elastica_core::hillspec::{monodromy, PeriodicPotential};
use elastica_core::jetalg::{apply_recursion, flow_pairing, hamiltonian_density, kdv_rhs, Monomial};
use elastica_core::loopflow::{evolve_mkdv, random_closed_loop, FlowParams, LoopState};
use elastica_core::psido::sqrt_l;
use elastica_core::{JetPolyQ, PsiDOQ, Rational};

fn jet_poly(max_order: usize, max_terms: usize) -> impl Strategy<Value = JetPolyQ> {
    prop::collection::vec((-6i64..=6, 1i64..=4, prop::collection::vec(0u32..=2, max_order + 1)), 0..=max_terms)
        .prop_map(|terms| {
            JetPolyQ::from_terms(
                terms.into_iter().map(|(n, d, e)| (Monomial::from_exponents(&e), Rational::from_ratio(n, d))),
            )
        })
}

fn nonzero_jet_poly(max_order: usize, max_terms: usize) -> impl Strategy<Value = JetPolyQ> {
    jet_poly(max_order, max_terms).prop_filter("nonzero", |p| !p.is_zero())
}

/// Finite operator with degrees in `lo..=hi` and a nonzero leading coefficient.
fn operator(lo: i32, hi: i32, depth: i32) -> impl Strategy<Value = PsiDOQ> {
    (prop::collection::vec(jet_poly(2, 3), (hi - lo) as usize), nonzero_jet_poly(2, 3))
        .prop_map(move |(rest, lead)| PsiDOQ::exact((lo..hi).zip(rest).chain([(hi, lead)]), depth))
}

fn is_homogeneous(p: &JetPolyQ, weight: u32) -> bool {
    p.terms().all(|(m, _)| m.weight() == weight)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn total_derivative_is_a_derivation(p in jet_poly(4, 6), q in jet_poly(4, 6)) {
        let lhs = (&p * &q).total_derivative();
        let rhs = &p.total_derivative() * &q + &p * &q.total_derivative();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn euler_operator_kills_total_derivatives(p in jet_poly(4, 6)) {
        prop_assert!(p.total_derivative().euler_operator().is_zero());
    }

    #[test]
    fn recursion_raises_weight_by_two(q in prop::collection::vec((-5i64..=5, 0usize..3), 1..4)) {
        // homogeneous q of weight 6 built from u0³, u0 u2, u1², u4
        let basis = [vec![3], vec![1, 0, 1], vec![0, 2], vec![0, 0, 0, 0, 1]];
        let q = JetPolyQ::from_terms(
            q.into_iter().map(|(c, i)| (Monomial::from_exponents(&basis[i]), Rational::from_int(c))),
        );
        let p = q.total_derivative();
        let omega = apply_recursion(&p).unwrap();
        prop_assert!(is_homogeneous(&p, 7));
        prop_assert!(is_homogeneous(&omega, 9));
    }

    #[test]
    fn composition_is_associative(a in operator(-1, 2, 5), b in operator(-2, 1, 5), c in operator(0, 2, 5)) {
        let left = a.compose(&b).compose(&c);
        let right = a.compose(&b.compose(&c));
        let floor = left.floor().max(right.floor());
        let top = left.top().unwrap_or(0).max(right.top().unwrap_or(0));
        for k in floor..=top {
            prop_assert_eq!(left.coeff(k), right.coeff(k), "degree {}", k);
        }
    }

    #[test]
    fn degrees_add_under_composition(a in operator(-2, 2, 4), b in operator(-1, 1, 4)) {
        prop_assert_eq!(a.compose(&b).top(), Some(a.top().unwrap() + b.top().unwrap()));
    }

    #[test]
    fn plus_and_minus_parts_are_complementary(a in operator(-3, 2, 4)) {
        let plus = a.plus_part();
        let minus = a.minus_part();
        prop_assert!(plus.terms().all(|(k, _)| k >= 0));
        prop_assert!(minus.terms().all(|(k, _)| k < 0));
        prop_assert!((plus.clone() + minus.clone() - a.clone()).is_zero());
        prop_assert!(plus.plus_part().minus_part().is_zero());
    }

    #[test]
    fn square_root_squares_to_l(u in nonzero_jet_poly(3, 3)) {
        let root = sqrt_l(&u, 6);
        let sq = root.compose(&root);
        prop_assert!(sq.floor() <= -4);
        for k in sq.floor()..=2 {
            let expected = match k {
                2 => JetPolyQ::one(),
                0 => u.clone(),
                _ => JetPolyQ::zero(),
            };
            prop_assert_eq!(sq.coeff(k), expected, "degree {}", k);
        }
    }

    #[test]
    fn conjugation_preserves_order(
        w in prop::collection::vec(jet_poly(2, 3), 3),
        a in operator(-1, 3, 6),
    ) {
        let wop = PsiDOQ::exact(std::iter::once((0, JetPolyQ::one())).chain((1..=3).map(|i| -i).zip(w)), 6);
        let conj = wop.compose(&a).compose(&wop.inverse_unipotent());
        prop_assert_eq!(conj.top(), a.top());
        prop_assert_eq!(conj.coeff(a.top().unwrap()), a.coeff(a.top().unwrap()));
    }
}

#[test]
fn densities_generate_the_flows() {
    for n in 1..=4 {
        let h = hamiltonian_density::<Rational>(n);
        assert_eq!(h.euler_operator().total_derivative(), kdv_rhs::<Rational>(n), "n = {n}");
    }
}

#[test]
fn flows_commute_under_the_pairing() {
    for n in 1..=3 {
        for m in 1..=3 {
            assert!(flow_pairing::<Rational>(n, m).is_zero(), "n = {n}, m = {m}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn loop_energy_is_nonnegative_and_length_is_kept(seed in any::<u64>(), amplitude in 0.0f64..0.3, modes in 1usize..=8) {
        let start = random_closed_loop::<f64>(128, modes, amplitude, seed).unwrap();
        prop_assert!(start.energy() >= 0.0);
        let traj = evolve_mkdv(&start, FlowParams::new(1e-5, 200)).unwrap();
        for (state, d) in traj.frames.iter().zip(&traj.diagnostics) {
            prop_assert_eq!(state.length(), start.length());
            prop_assert!(d.energy >= 0.0);
        }
    }

    #[test]
    fn schwarz_samples_follow_a_shift_of_origin(seed in any::<u64>(), shift in 1usize..64, angle in 0.0f64..6.28) {
        let a = random_closed_loop::<f64>(64, 6, 0.3, seed).unwrap();
        let mut k = a.curvature();
        k.rotate_left(shift);
        let b = LoopState::from_curvature(&k, a.length(), Complex64::new(0.3, -1.2), angle).unwrap();
        let (sa, sb) = (a.schwarz(), b.schwarz());
        let scale = sa.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for j in 0..64 {
            prop_assert!((sb[j] - sa[(j + shift) % 64]).norm() <= 1e-12 * scale, "j = {}", j);
        }
    }

    #[test]
    fn hill_monodromy_identities(
        coeffs in prop::collection::vec((-0.3f64..0.3, -0.3f64..0.3), 3),
        xbar in 0.0f64..5.0,
    ) {
        let u = PeriodicPotential::from_fn(
            move |s: f64| coeffs.iter().enumerate().map(|(k, (a, b))| {
                let w = (k + 1) as f64 * s;
                a * w.cos() + b * w.sin()
            }).sum(),
            std::f64::consts::TAU,
        ).unwrap();
        let r = monodromy(&u, Complex64::new(xbar, 0.0)).unwrap();
        prop_assert!((r.det - 1.0).norm() < 1e-8, "det {}", r.det);
        prop_assert!(r.discriminant.im.abs() <= 1e-12 * (1.0 + r.discriminant.norm()));
        for rho in r.rho {
            let defect = (rho * rho - r.discriminant * rho + 1.0).norm();
            prop_assert!(defect <= 1e-10 * rho.norm_sqr().max(1.0), "defect {}", defect);
        }
    }
}

#[test]
fn energy_is_conserved_on_random_loops() {
    for seed in [3, 17, 91] {
        let start = random_closed_loop::<f64>(256, 8, 0.3, seed).unwrap();
        let traj = evolve_mkdv(&start, FlowParams::new(1e-5, 5_000)).unwrap();
        assert!(traj.max_energy_drift() <= 1e-6, "seed {seed}: drift {}", traj.max_energy_drift());
    }
}
