use num_complex::Complex64;
use proptest::prelude::*;

use jlm_core::pdesolve::{
    build_ladder, fd_spectrum, gauge_catalog, goldstein_catalog, nonphysical_check, residual_grid, solves,
    standard_catalog, verify_symmetry, write_residual_csv, RESIDUAL_TOL,
};
use jlm_core::quantize::{
    general_gauge_operator, quantize, standard_operator, ClassicalHamiltonianForm, EvolutionOperator, PrintedOperator,
    Scheme, XDomain,
};
use jlm_core::symkernel::ops::sym;
use jlm_core::symkernel::{parse_prefix, DEFAULT_SEED};
use jlm_core::Expr;

const SEED: u64 = DEFAULT_SEED;

#[test]
fn gauge_operator_with_energy_gauge_is_standard() {
    for k in [1.0, 0.5, 3.0] {
        let x = sym("x");
        let op = general_gauge_operator(&Expr::zero(), &(-0.5 * k * k * x.powi(2)));
        let q = quantize(&ClassicalHamiltonianForm::sho(k), Scheme::Weyl, SEED).unwrap();
        assert!(op.same_coefficients(&q, SEED, 1e-12).unwrap(), "k = {k}");
        assert!(q.same_coefficients(&standard_operator(k), SEED, 1e-12).unwrap());
    }
}

#[test]
fn goldstein_schemes_share_a_and_b() {
    let h = ClassicalHamiltonianForm::goldstein();
    let ops: Vec<EvolutionOperator> = Scheme::ALL.iter().map(|&s| quantize(&h, s, SEED).unwrap()).collect();
    let s = XDomain::HalfLine.sampler(SEED);
    let x = sym("x");
    for (op, m) in ops.iter().zip([6.0, 3.0, 2.0]) {
        assert!(s.equiv(&op.a, &-x.powi(4), 1e-12).unwrap());
        assert!(s.equiv(&op.b, &(-4.0 * x.powi(3)), 1e-12).unwrap());
        assert!(
            s.equiv(&op.c, &(x.powi(-2) - m * x.powi(2)), 1e-12).unwrap(),
            "{}",
            op.c
        );
    }
}

/// Roots of `alpha^2 + 3 alpha + m`, from substituting `x^alpha e^{i alpha t}` by hand.
fn indicial_roots(m: f64) -> [Complex64; 2] {
    let d = Complex64::new(9.0 - 4.0 * m, 0.0).sqrt();
    [(-3.0 - d) / 2.0, (-3.0 + d) / 2.0]
}

#[test]
fn extracted_exponents_match_closed_forms() {
    for (which, m) in [
        (PrintedOperator::NormalOrdered, 6.0),
        (PrintedOperator::Weyl, 3.0),
        (PrintedOperator::Split, 2.0),
    ] {
        let r = nonphysical_check(&which.operator(), SEED).unwrap();
        let mut want = indicial_roots(m);
        want.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
        for (got, want) in r.exponents.iter().zip(want) {
            assert!((got - want).norm() < 1e-10, "{which:?}: {got} vs {want}");
        }
        assert!(r.extracted_solves);
    }
    let w = 15f64.sqrt() / 2.0;
    assert!((indicial_roots(6.0)[1] - Complex64::new(-1.5, w)).norm() < 1e-15);
}

#[test]
fn goldstein_physicality() {
    let normal = nonphysical_check(&PrintedOperator::NormalOrdered.operator(), SEED).unwrap();
    let weyl = nonphysical_check(&PrintedOperator::Weyl.operator(), SEED).unwrap();
    let split = nonphysical_check(&PrintedOperator::Split.operator(), SEED).unwrap();
    assert!(!normal.physical && !weyl.physical);
    assert!(split.physical);
    // the printed real part -1 does not solve either equation
    assert_eq!(normal.printed_solves, Some(false));
    assert_eq!(weyl.printed_solves, Some(false));
    assert_eq!(normal.imag_parts_match, Some(true));
    assert_eq!(weyl.imag_parts_match, Some(true));
}

#[test]
fn ladder_entries_solve_their_equations() {
    let catalogs = [
        standard_catalog(),
        gauge_catalog(1.0, &Expr::zero()).unwrap(),
        gauge_catalog(2.0, &parse_prefix("(* t x)").unwrap()).unwrap(),
        goldstein_catalog(PrintedOperator::Split).unwrap(),
    ];
    for cat in &catalogs {
        let ladder = build_ladder(cat, 2, SEED).unwrap();
        for e in &ladder.entries {
            assert!(
                solves(&cat.operator, &e.expression, SEED, RESIDUAL_TOL).unwrap(),
                "{} {}",
                cat.name,
                e.label
            );
            assert_eq!(e.normalizable, Some(true), "{} {}", cat.name, e.label);
        }
        assert!(ladder.terminates, "{}", cat.name);
    }
}

#[test]
fn standard_spectrum_matches_ladder() {
    let cat = standard_catalog();
    let ladder = build_ladder(&cat, 2, SEED).unwrap();
    let fd = fd_spectrum(&cat.operator, (-10.0, 10.0), 2000, 5).unwrap();
    assert!(fd.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    for (e, lam) in ladder.entries.iter().zip(&fd.eigenvalues) {
        assert!((e.eigenvalue.unwrap().re - lam).abs() < 1e-3);
    }
    for (j, lam) in fd.eigenvalues.iter().enumerate() {
        assert!((lam - (j as f64 + 0.5)).abs() < 1e-3, "E{j} = {lam}");
    }
}

#[test]
fn corrupted_generators_are_rejected() {
    let cat = gauge_catalog(1.0, &Expr::zero()).unwrap();
    let basis: Vec<_> = build_ladder(&cat, 2, SEED).unwrap().entries;
    let good = verify_symmetry(&cat.operator, cat.generator("G4-").unwrap(), &basis, SEED, RESIDUAL_TOL).unwrap();
    assert!(good.iter().all(|v| v.pass));
    let bad = verify_symmetry(&cat.operator, &cat.corrupted().unwrap(), &basis, SEED, RESIDUAL_TOL).unwrap();
    assert!(bad.iter().any(|v| !v.pass));
}

#[test]
fn residual_grid_csv() {
    let cat = standard_catalog();
    let u0 = &build_ladder(&cat, 0, SEED).unwrap().entries[0];
    let rows = residual_grid(&cat.operator, &u0.expression, (-3.0, 3.0, 7), (0.0, 1.0, 3)).unwrap();
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| r.residual < 1e-12));
    let mut buf = Vec::new();
    write_residual_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("x,t,|residual|\n"));
    assert_eq!(text.lines().count(), 22);
    let (x, t) = (rows[8].x, rows[8].t);
    let line: Vec<f64> = text
        .lines()
        .nth(9)
        .unwrap()
        .split(',')
        .map(|f| f.parse().unwrap())
        .collect();
    assert_eq!((line[0], line[1]), (x, t));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ladder_spacing_is_k(k in 0.3f64..3.0, c in -2.0f64..2.0) {
        let g = parse_prefix(&format!("(* {c} t x)")).unwrap();
        let ladder = build_ladder(&gauge_catalog(k, &g).unwrap(), 2, SEED).unwrap();
        let e: Vec<Complex64> = ladder.entries.iter().map(|e| e.eigenvalue.unwrap()).collect();
        prop_assert!((e[0] - Complex64::new(0.5 * k, 0.0)).norm() < 1e-9);
        for n in 0..2 {
            prop_assert!((e[n + 1] - e[n] - Complex64::new(k, 0.0)).norm() < 1e-9, "{e:?}");
        }
    }
}
