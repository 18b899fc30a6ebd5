mod common;

use common::*;
use proptest::prelude::*;
use superakns::diffring::{parse, DiffPoly, Side};
use superakns::hierarchy::U_ORDER;
use superakns::superlie::Algebra;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn leibniz(f in arb_poly(), g in arb_poly()) {
        let lhs = (&f * &g).d_total();
        let rhs = &(&f.d_total() * &g) + &(&f * &g.d_total());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn total_derivatives_are_null_lagrangians(f in arb_poly()) {
        let g = f.d_total();
        for field in U_ORDER {
            for side in [Side::Left, Side::Right] {
                prop_assert!(g.euler(field, side).is_zero(), "E_{}({:?}) of {}", field.name(), side, g);
            }
        }
    }

    #[test]
    fn integrate_inverts_derivative(f in arb_poly()) {
        // μ is constant as well
        let c = f
            .terms()
            .filter(|(m, _)| m.jets().is_empty())
            .fold(DiffPoly::zero(), |a, (m, k)| a + DiffPoly::from_term(m.clone(), k.clone()));
        let back = f.d_total().integrate_exact().expect("a derivative is exact");
        prop_assert_eq!(back, &f - &c);
    }

    #[test]
    fn derivative_of_integral(f in arb_poly()) {
        // whatever integrate_exact accepts must differentiate back
        if let Ok(g) = f.integrate_exact() {
            prop_assert_eq!(g.d_total(), f);
        }
    }

    #[test]
    fn supercommutativity(f in arb_homogeneous(), g in arb_homogeneous()) {
        let both_odd = f.parity().is_some_and(|p| p.is_odd()) && g.parity().is_some_and(|p| p.is_odd());
        let fg = &f * &g;
        let gf = &g * &f;
        if both_odd {
            prop_assert_eq!(fg, -gf);
        } else {
            prop_assert_eq!(fg, gf);
        }
    }

    #[test]
    fn multiplication_associates(f in arb_poly(), g in arb_poly(), h in arb_poly()) {
        prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
    }

    #[test]
    fn text_round_trip(f in arb_poly()) {
        prop_assert_eq!(parse(&f.to_text()).unwrap(), f);
    }

    #[test]
    fn json_round_trip(f in arb_poly()) {
        let js = serde_json::to_string(&f).unwrap();
        prop_assert_eq!(serde_json::from_str::<DiffPoly>(&js).unwrap(), f);
    }

    #[test]
    fn left_and_right_euler_differ_by_parity_sign(f in arb_homogeneous()) {
        // for a homogeneous density of parity |f|, ∂^R = (−1)^{|f|+1} ∂^L on odd variables
        let sign = if f.parity().is_some_and(|p| p.is_odd()) { 1 } else { -1 };
        for field in U_ORDER.iter().filter(|f| f.is_odd()) {
            let l = f.euler(*field, Side::Left);
            let r = f.euler(*field, Side::Right);
            prop_assert_eq!(r, l.scale_int(sign));
        }
    }

    #[test]
    fn grassmann_numbers_associate(a in arb_grassmann(4), b in arb_grassmann(4), c in arb_grassmann(4)) {
        let lhs = a.mul(&b).mul(&c);
        let rhs = a.mul(&b.mul(&c));
        prop_assert!(lhs.sub(&rhs).max_abs() < 1e-12);
    }

    #[test]
    fn graded_jacobi_on_combinations(x in arb_sl41_homogeneous(), y in arb_sl41_homogeneous(), z in arb_sl41_homogeneous()) {
        prop_assert!(jacobiator(&x, &y, &z).is_zero());
    }
}

#[test]
fn graded_jacobi_on_every_basis_triple() {
    for alg in [Algebra::Sl21, Algebra::Sl41] {
        let b = alg.basis();
        for x in &b {
            for y in &b {
                for z in &b {
                    assert!(jacobiator(x, y, z).is_zero());
                }
            }
        }
    }
}

#[test]
fn odd_generators_square_to_zero() {
    for f in ["alpha", "beta_x", "alpha_xx"] {
        let g = parse(f).unwrap();
        assert!((&g * &g).is_zero());
    }
}
