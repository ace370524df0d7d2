use num_complex::Complex64;
use proptest::prelude::*;

use jlm_core::mechsys::{symmetry_commutator, GeneratorField};
use jlm_core::quantize::{
    apply, quantize, standard_operator, ClassicalHamiltonianForm, EvolutionOperator, Scheme, XDomain,
};
use jlm_core::report::Tolerances;
use jlm_core::symkernel::ops::{cos, exp, sin, sym};
use jlm_core::symkernel::{parse_prefix, to_prefix};
use jlm_core::{Bindings, Expr, Rational, Sampler};

fn small_int() -> impl Strategy<Value = i64> {
    -4i64..=4
}

/// Smooth expressions in `x` and `t`, bounded on the unit box.
fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        small_int().prop_map(Expr::int),
        (-3i64..=3, 1i64..=4).prop_map(|(n, d)| Expr::rational(n, d)),
        Just(sym("x")),
        Just(sym("t")),
        Just(Expr::i()),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::add),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::mul),
            (inner.clone(), 0i64..=3).prop_map(|(e, n)| e.powi(n)),
            inner.clone().prop_map(|e| exp(0.3 * e)),
            inner.clone().prop_map(sin),
            inner.prop_map(cos),
        ]
    })
}

fn at(x: f64, t: f64) -> Bindings {
    Bindings::new().with("x", x).with("t", t)
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

fn sampler() -> Sampler {
    Sampler::new(11)
        .range("x", -1.0, 1.0)
        .range("t", -1.0, 1.0)
        .range("u", -1.0, 1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn canonical_form_is_a_fixed_point(e in expr()) {
        prop_assert_eq!(e.canonicalize(), e.clone());
        prop_assert_eq!(e.canonicalize().canonicalize(), e.canonicalize());
    }

    #[test]
    fn prefix_round_trip(e in expr()) {
        let back = parse_prefix(&to_prefix(&e)).unwrap();
        prop_assert_eq!(to_prefix(&back), to_prefix(&e));
        prop_assert!(sampler().equiv(&back, &e, 1e-12).unwrap());
    }

    #[test]
    fn substitution_agrees_with_evaluation(e in expr(), r in expr(), x in -1.0f64..1.0, t in -1.0f64..1.0) {
        let b = at(x, t);
        let rv = r.eval(&b).unwrap();
        let direct = e.eval(&Bindings::new().with("x", rv).with("t", t)).unwrap();
        let subbed = e.substitute("x", &r).eval(&b).unwrap();
        prop_assert!(close(direct, subbed, 1e-10), "{direct} vs {subbed}");
    }

    #[test]
    fn derivative_matches_central_difference(e in expr(), x in -0.9f64..0.9, t in -0.9f64..0.9) {
        let h = 1e-4;
        let f = |x: f64| e.eval(&at(x, t)).unwrap();
        // fourth-order stencil keeps truncation well below the tolerance
        let fd = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
        let exact = e.diff("x").eval(&at(x, t)).unwrap();
        let scale = exact.norm().max(f(x).norm()).max(1.0);
        prop_assert!((fd - exact).norm() <= 1e-6 * scale, "{exact} vs {fd}");
    }

    #[test]
    fn mixed_partials_commute(e in expr()) {
        prop_assert!(sampler().equiv(&e.diff("x").diff("t"), &e.diff("t").diff("x"), 1e-9).unwrap());
    }

    #[test]
    fn equiv_is_reflexive_and_symmetric(a in expr(), b in expr()) {
        let s = sampler();
        prop_assert!(s.equiv(&a, &a, 1e-12).unwrap());
        prop_assert_eq!(s.equiv(&a, &b, 1e-9).unwrap(), s.equiv(&b, &a, 1e-9).unwrap());
        prop_assert!(s.equiv(&(&a + &b), &(&b + &a), 1e-12).unwrap());
        prop_assert!(s.equiv(&(&a * (&b + 1.0)), &(&a * &b + &a), 1e-9).unwrap());
    }

    #[test]
    fn scaled_copies_are_equivalent_up_to_constant(a in expr(), re in 0.5f64..3.0, im in -2.0f64..2.0) {
        let s = sampler();
        prop_assume!(s.max_abs(&a).unwrap() > 1e-3);
        let c = Complex64::new(re, im);
        let scaled = Expr::constant(c) * &a;
        let found = s.equiv_up_to_constant(&scaled, &a, 1e-9).unwrap();
        prop_assert!(found.is_some_and(|z| close(z, c, 1e-8)), "{found:?}");
        let one = s.equiv_up_to_constant(&a, &a, 1e-12).unwrap();
        prop_assert!(one.is_some_and(|z| close(z, Complex64::new(1.0, 0.0), 1e-12)), "{one:?}");
    }

    #[test]
    fn commutator_is_antisymmetric(
        a in prop::array::uniform3(expr()),
        b in prop::array::uniform3(expr()),
    ) {
        let u = sym("u");
        let ga = GeneratorField::pde("A", a[0].clone(), a[1].clone(), &a[2] * &u);
        let gb = GeneratorField::pde("B", b[0].clone(), b[1].clone(), &b[2] * &u);
        let ab = symmetry_commutator(&ga, &gb).unwrap();
        let ba = symmetry_commutator(&gb, &ga).unwrap();
        let s = sampler();
        for j in 0..3 {
            prop_assert!(s.is_zero_rel(&(&ab.coeffs[j] + &ba.coeffs[j]), 1e-9).unwrap());
        }
    }

    #[test]
    fn evolution_operator_is_linear(
        u in expr(),
        v in expr(),
        c in expr(),
        alpha in -2.0f64..2.0,
        beta in -2.0f64..2.0,
    ) {
        let x = sym("x");
        let op = EvolutionOperator::new("test", -(x.powi(2) + 1.0), 3.0 * &x, c, XDomain::Line);
        let lhs = apply(&op, &(alpha * &u + beta * &v));
        let rhs = alpha * apply(&op, &u) + beta * apply(&op, &v);
        prop_assert!(sampler().equiv(&lhs, &rhs, 1e-9).unwrap());
    }

    #[test]
    fn orderings_coincide_for_unit_kinetic_term(
        coeffs in prop::collection::vec(small_int(), 1..4),
        linear in small_int(),
    ) {
        let x = sym("x");
        let potential = Expr::add(coeffs.iter().enumerate().map(|(j, &c)| c as f64 * x.powi(j as i64)).collect());
        let h = ClassicalHamiltonianForm::new("poly", potential, Expr::one(), linear as f64 * &x, XDomain::Line).unwrap();
        let ops: Vec<_> = Scheme::ALL.iter().map(|&s| quantize(&h, s, 5).unwrap()).collect();
        for op in &ops[1..] {
            prop_assert!(ops[0].same_coefficients(op, 5, 1e-12).unwrap());
        }
    }

    #[test]
    fn harmonic_orderings_match_standard_form(k in 0.25f64..4.0) {
        let want = standard_operator(k);
        for s in Scheme::ALL {
            let op = quantize(&ClassicalHamiltonianForm::sho(k), s, 3).unwrap();
            prop_assert!(op.same_coefficients(&want, 3, 1e-12).unwrap());
        }
    }

    #[test]
    fn rational_approximation_recovers_fractions(n in -50i64..50, d in 1i64..20) {
        let r = Rational::approximate(n as f64 / d as f64, 32, 1e-12);
        prop_assert_eq!(r, Some(Rational::new(n, d)));
    }

    #[test]
    fn tolerance_overrides_parse(v in 1e-15f64..1.0) {
        let mut t = Tolerances::default();
        t.apply_override(&format!("residual={v:e}")).unwrap();
        prop_assert_eq!(t.get("residual"), v);
        let bad = format!("bogus={v}");
        prop_assert!(t.apply_override(&bad).is_err());
    }
}

#[test]
fn scheme_labels_round_trip() {
    for s in Scheme::ALL {
        assert_eq!(s.label().parse::<Scheme>().unwrap(), s);
    }
    assert!("ordered".parse::<Scheme>().is_err());
}
