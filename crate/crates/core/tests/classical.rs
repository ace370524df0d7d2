use jlm_core::lagrange::{
    default_lagrangian, euler_lagrange_expr, gauge_shift, hessian_matches_multiplier, safe_points, VariationalTag,
};
use jlm_core::legendre::{conservation_spread, default_hamiltonian, legendre_check};
use jlm_core::mechsys::{
    integrate, prolongation_check, sample_nodes, sho_system, symmetry_catalog, symmetry_commutator, GeneratorField,
};
use jlm_core::multiplier::{
    catalog_multiplier, enumerate_pairs, multiplier_from_pair, phase_sampler, MultiplierTag, PairOutcome, PairStatus,
};
use jlm_core::symkernel::ops::{sin, sym};
use jlm_core::symkernel::DEFAULT_SEED;
use jlm_core::{Bindings, Expr};

const SEED: u64 = DEFAULT_SEED;

#[test]
fn catalog_generators_are_point_symmetries_on_trajectories() {
    for k in [1.0, 1.7] {
        let sys = sho_system(k).unwrap();
        let mut points = Vec::new();
        for init in [[1.0, 0.0], [0.3, -1.2], [-2.0, 0.5]] {
            let traj = integrate(&sys, init, (0.0, 5.0), 1e-3).unwrap();
            points.extend(sample_nodes(&traj, 17));
        }
        assert!(points.len() >= 50);
        for g in symmetry_catalog(k).unwrap() {
            let c = prolongation_check(&sys, &g, &points, 1e-8).unwrap();
            assert!(c.defect_ok, "{} at k = {k}: defect {:.3e}", g.tag, c.defect_max);
        }
    }
}

#[test]
fn printed_u2_components_disagree_only_for_g7_and_g8() {
    let sys = sho_system(1.0).unwrap();
    let traj = integrate(&sys, [1.0, 0.4], (0.0, 5.0), 1e-3).unwrap();
    let points = sample_nodes(&traj, 50);
    for g in symmetry_catalog(1.0).unwrap() {
        let c = prolongation_check(&sys, &g, &points, 1e-8).unwrap();
        assert_eq!(c.u2_component_ok, !matches!(g.tag.as_str(), "G7" | "G8"), "{}", g.tag);
    }
}

#[test]
fn commutator_is_bilinear_and_antisymmetric_on_catalog() {
    let cat = symmetry_catalog(1.3).unwrap();
    let s = phase_sampler(SEED);
    let zero = |g: &GeneratorField| (0..3).all(|j| s.is_zero_rel(&g.coeffs[j], 1e-9).unwrap());
    let diff = |a: &GeneratorField, b: &GeneratorField| {
        GeneratorField::combine("d", &[(Expr::one(), a), (Expr::real(-1.0), b)]).unwrap()
    };
    for a in &cat {
        for b in &cat {
            let ab = symmetry_commutator(a, b).unwrap();
            let ba = symmetry_commutator(b, a).unwrap();
            let sum = GeneratorField::combine("s", &[(Expr::one(), &ab), (Expr::one(), &ba)]).unwrap();
            assert!(zero(&sum), "[{}, {}]", a.tag, b.tag);
        }
    }
    let (alpha, beta) = (Expr::real(0.7), Expr::real(-2.1));
    for (a, b, c) in [(0, 1, 4), (2, 5, 3), (6, 7, 0), (4, 6, 5)] {
        let mix = GeneratorField::combine("m", &[(alpha.clone(), &cat[a]), (beta.clone(), &cat[b])]).unwrap();
        let lhs = symmetry_commutator(&mix, &cat[c]).unwrap();
        let rhs = GeneratorField::combine(
            "r",
            &[
                (alpha.clone(), &symmetry_commutator(&cat[a], &cat[c]).unwrap()),
                (beta.clone(), &symmetry_commutator(&cat[b], &cat[c]).unwrap()),
            ],
        )
        .unwrap();
        assert!(
            zero(&diff(&lhs, &rhs)),
            "bilinearity with G{} G{} G{}",
            a + 1,
            b + 1,
            c + 1
        );
    }
}

#[test]
fn energy_is_conserved_along_trajectories() {
    for (k, init) in [(1.0, [1.0, 0.0]), (2.0, [0.5, 1.5]), (0.6, [-3.0, 0.2])] {
        let traj = integrate(&sho_system(k).unwrap(), init, (0.0, 10.0), 1e-3).unwrap();
        let energy = |i: usize| {
            let (_, u1, u2) = traj.state(i);
            0.5 * (u2 * u2 + k * k * u1 * u1)
        };
        let e0 = energy(0);
        let worst = (0..traj.len())
            .map(|i| ((energy(i) - e0) / e0).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "k = {k}: {worst:.3e}");
    }
}

#[test]
fn nonzero_pairs_solve_the_multiplier_equation() {
    for k in [1.0, 2.0] {
        let sys = sho_system(k).unwrap();
        let s = phase_sampler(SEED);
        let prolonged = enumerate_pairs(&sys, &jlm_core::mechsys::prolonged_catalog(k).unwrap(), &s).unwrap();
        assert_eq!(prolonged.pairs.len(), 28);
        assert_eq!(prolonged.pde_failures, 0);
        assert_eq!(prolonged.zero_pairs + prolonged.nonzero_pairs, 28);

        // with the u2 components as printed, only pairs touching G7 or G8 fail
        let printed = enumerate_pairs(&sys, &symmetry_catalog(k).unwrap(), &s).unwrap();
        for p in &printed.pairs {
            if p.status == PairStatus::Nonzero && !p.pde_ok {
                assert!(p.i >= 7 || p.j >= 7, "pair {}-{}", p.i, p.j);
            }
        }
    }
}

#[test]
fn g1_g3_pair_is_jlm13() {
    let k = 1.4;
    let sys = sho_system(k).unwrap();
    let cat = symmetry_catalog(k).unwrap();
    let s = phase_sampler(SEED);
    let PairOutcome::Nonzero(m) = multiplier_from_pair(&sys, &cat[0], &cat[2], (1, 3), &s).unwrap() else {
        panic!("G1, G3 determinant vanished");
    };
    let want = catalog_multiplier(MultiplierTag::Jlm13, k).value;
    let c = s
        .equiv_up_to_constant(&m.value, &want, 1e-9)
        .unwrap()
        .expect("proportional");
    assert!((c.re.abs() - 1.0).abs() < 1e-9 && c.im.abs() < 1e-12, "{c}");
}

#[test]
fn hessians_match_multipliers() {
    for k in [1.0, 2.5] {
        for tag in VariationalTag::ALL {
            let l = default_lagrangian(tag, k, SEED).unwrap();
            assert!(
                hessian_matches_multiplier(&l, SEED, 1e-9).unwrap(),
                "{} at k = {k}",
                l.name()
            );
        }
    }
}

#[test]
fn gauge_shift_leaves_euler_lagrange_residual_unchanged() {
    let (t, u1) = (sym("t"), sym("u1"));
    let gauges = [sin(&t) * u1.powi(2), &t * &u1 + u1.powi(3), (0.5 * &t).powi(2)];
    for tag in VariationalTag::ALL {
        let l = default_lagrangian(tag, 1.0, SEED).unwrap();
        let points: Vec<Bindings> = safe_points(tag, 1.0, SEED, 100).unwrap();
        let base = euler_lagrange_expr(&l);
        for g in &gauges {
            let shifted = euler_lagrange_expr(&gauge_shift(&l, g));
            for b in &points {
                let d = (shifted.eval(b).unwrap() - base.eval(b).unwrap()).norm();
                assert!(d < 1e-10, "{} with G = {g}: {d:.3e}", l.name());
            }
        }
    }
}

#[test]
fn legendre_round_trips_for_every_tag() {
    for k in [1.0, 1.5] {
        for tag in VariationalTag::ALL {
            let l = default_lagrangian(tag, k, SEED).unwrap();
            let (h, map) = default_hamiltonian(tag, k, SEED).unwrap();
            let c = legendre_check(&h, &l, &map, SEED, 1e-9).unwrap();
            assert!(c.round_trip_p && c.round_trip_u2 && c.legendre_identity, "{c:?}");
        }
    }
}

#[test]
fn h12_is_the_conserved_energy() {
    let k = 1.3;
    let (h, map) = default_hamiltonian(VariationalTag::L12, k, SEED).unwrap();
    let traj = integrate(&sho_system(k).unwrap(), [0.4, -0.9], (0.0, 10.0), 1e-3).unwrap();
    assert!(conservation_spread(&h, &map, &traj).unwrap() < 1e-8);
}
