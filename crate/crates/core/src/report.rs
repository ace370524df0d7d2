//! End-to-end checks behind each command, as serializable reports.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lagrange::{
    default_lagrangian, euler_lagrange_residual, hessian_matches_multiplier, noether_candidates, noether_report,
    safe_points, Kind, NoetherReport, VariationalPair, VariationalTag,
};
use crate::legendre::{
    conservation_spread, default_hamiltonian, goldstein_transform_check, hamilton_equations_residual, legendre_check,
    GoldsteinReport, LegendreCheck,
};
use crate::mechsys::{integrate, prolonged_catalog, sho_system, symmetry_catalog, Trajectory};
use crate::multiplier::{
    catalog_multiplier, enumerate_pairs, phase_sampler, ratio_first_integral_check, MultiplierTag, PairClassification,
    RatioReport,
};
use crate::pdesolve::{
    build_ladder, fd_spectrum, gauge_catalog, goldstein_catalog, nonphysical_check, similarity_reduce,
    solution_generator, standard_catalog, verify_symmetry, Ladder, NonphysicalReport, SpectrumResult, SymmetryCatalog,
    SymmetryVerdict,
};
use crate::quantize::{
    general_gauge_operator, quantize, standard_operator, ClassicalHamiltonianForm, EvolutionOperator, PrintedOperator,
    Scheme,
};
use crate::symkernel::ops::sym;
use crate::symkernel::{Bindings, Expr, Rational};

/// Tolerance classes and their defaults.
pub const TOLERANCE_CLASSES: [(&str, f64, &str); 10] = [
    ("ratio", 1e-6, "relative spread of multiplier ratios along a trajectory"),
    ("el", 1e-8, "Euler-Lagrange residual at safe points"),
    ("hessian", 1e-9, "d^2L/du2^2 against the generating multiplier"),
    ("legendre", 1e-9, "Legendre identity and momentum round trips"),
    ("hamilton", 1e-5, "Hamilton's equations along trajectories"),
    ("conservation", 1e-8, "relative drift of H12 along a trajectory"),
    ("equiv", 1e-12, "operator coefficients against the printed equations"),
    ("residual", 1e-9, "PDE residuals of solutions"),
    ("eigenvalue", 1e-12, "eigenvalues against rational multiples of k"),
    ("spectrum", 1e-3, "finite-difference eigenvalues against n + 1/2"),
];

#[derive(Clone, Debug, Serialize)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances(TOLERANCE_CLASSES.iter().map(|(c, v, _)| (c.to_string(), *v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, class: &str) -> f64 {
        self.0[class]
    }

    pub fn set(&mut self, class: &str, value: f64) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Usage(format!(
                "tolerance for '{class}' must be positive, got {value}"
            )));
        }
        match self.0.get_mut(class) {
            Some(v) => {
                *v = value;
                Ok(())
            }
            None => Err(Error::Usage(format!(
                "unknown tolerance class '{class}' (known: {})",
                TOLERANCE_CLASSES.map(|c| c.0).join(", ")
            ))),
        }
    }

    /// Parses `class=value`.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (class, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("expected class=value, got '{spec}'")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("bad tolerance value '{value}'")))?;
        self.set(class.trim(), value)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

fn ensure_k(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::Usage(format!("k must be positive, got {k}")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogSummary {
    pub zero_pairs: usize,
    pub distinct_basic: usize,
    pub pde_failures: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedRatio {
    pub numerator: MultiplierTag,
    pub denominator: MultiplierTag,
    #[serde(flatten)]
    pub report: RatioReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct MultipliersReport {
    pub classification: PairClassification,
    /// Same enumeration with the `d_u2` components of G7, G8 recomputed by
    /// prolongation.
    pub prolonged: CatalogSummary,
    pub ratios: Vec<NamedRatio>,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub trajectory: Trajectory,
}

pub const MULTIPLIER_TRAJECTORY: ([f64; 2], (f64, f64), f64) = ([1.0, 0.5], (0.0, 10.0), 1e-3);

/// Pair enumeration, basic forms, the JLM34 identity and multiplier ratios
/// along an integrated trajectory.
pub fn multipliers_report(k: f64, seed: u64, tol: &Tolerances) -> Result<MultipliersReport> {
    ensure_k(k)?;
    let sys = sho_system(k)?;
    let sampler = phase_sampler(seed);
    let classification = enumerate_pairs(&sys, &symmetry_catalog(k)?, &sampler)?;
    let p = enumerate_pairs(&sys, &prolonged_catalog(k)?, &sampler)?;
    let prolonged = CatalogSummary {
        zero_pairs: p.zero_pairs,
        distinct_basic: p.distinct_basic,
        pde_failures: p.pde_failures,
    };
    let (init, span, dt) = MULTIPLIER_TRAJECTORY;
    let trajectory = integrate(&sys, init, span, dt)?;
    let mut ratios = Vec::new();
    let tags = MultiplierTag::ALL;
    for (a, &ta) in tags.iter().enumerate() {
        for &tb in &tags[a + 1..] {
            let report = ratio_first_integral_check(
                &catalog_multiplier(ta, k),
                &catalog_multiplier(tb, k),
                &trajectory,
                tol.get("ratio"),
            )?;
            ratios.push(NamedRatio {
                numerator: ta,
                denominator: tb,
                report,
            });
        }
    }
    let worst = ratios.iter().map(|r| r.report.spread).fold(0.0, f64::max);
    let c = &classification;
    let checks = vec![
        Check::new("pairs", c.pairs.len() == 28, format!("{} pairs", c.pairs.len())),
        Check::new(
            "zero_pairs",
            c.zero_pairs == 14,
            format!(
                "expected 14, found {} (prolonged catalog: {})",
                c.zero_pairs, prolonged.zero_pairs
            ),
        ),
        Check::new(
            "distinct_basic",
            c.distinct_basic == 3,
            format!("expected 3, found {} {:?}", c.distinct_basic, c.basic_forms),
        ),
        Check::new(
            "jlm34_identity",
            c.jlm34_identity,
            "(JLM13^-2 + JLM23^-2)^-1 = 1/(u2^2 + k^2 u1^2)",
        ),
        Check::new(
            "ratio_first_integrals",
            ratios.iter().all(|r| r.report.pass),
            format!("max relative spread {worst:.3e} over {} ratios", ratios.len()),
        ),
    ];
    Ok(MultipliersReport {
        classification,
        prolonged,
        ratios,
        checks,
        trajectory,
    })
}

/// Reference Noether sets, as coordinates over G1..G8.
pub fn expected_noether(tag: VariationalTag, k: f64) -> Vec<[f64; 8]> {
    let unit = |i: usize| {
        let mut v = [0.0; 8];
        v[i - 1] = 1.0;
        v
    };
    let pair = |i: usize, a: f64, j: usize, b: f64| {
        let mut v = [0.0; 8];
        v[i - 1] = a;
        v[j - 1] = b;
        v
    };
    match tag {
        VariationalTag::L12 => vec![unit(1), unit(2), unit(4), unit(5), unit(6)],
        VariationalTag::L13 => vec![unit(1), pair(4, 1.0, 5, 1.0), pair(3, -k, 6, 1.0)],
        VariationalTag::L23 => vec![unit(2), pair(4, -1.0, 5, 1.0), pair(3, k, 6, 1.0)],
        VariationalTag::L34 => vec![unit(3), unit(4)],
    }
}

fn rank(vectors: &[[f64; 8]]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    nalgebra::DMatrix::from_fn(vectors.len(), 8, |r, c| vectors[r][c]).rank(1e-9)
}

#[derive(Clone, Debug, Serialize)]
pub struct LagrangianRow {
    pub name: String,
    pub value: String,
    pub el_residual: f64,
    pub hessian_matches: bool,
    pub multiplier_constant: f64,
    pub noether: NoetherReport,
    pub expected_count: usize,
    /// The passing candidates span exactly the listed symmetries.
    pub span_matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LagrangiansReport {
    pub rows: Vec<LagrangianRow>,
    pub noether_counts: Vec<usize>,
    pub el_residual_max: f64,
    /// EL residual of `(u2^2 + u1^2)/2`, which is not a Lagrangian for the
    /// oscillator.
    pub control_el_residual: f64,
    pub checks: Vec<Check>,
}

pub const SAFE_POINTS: usize = 100;

pub fn lagrangians_report(k: f64, seed: u64, tol: &Tolerances) -> Result<LagrangiansReport> {
    ensure_k(k)?;
    let candidates = noether_candidates(k)?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for tag in VariationalTag::ALL {
        let l = default_lagrangian(tag, k, seed)?;
        let pts = safe_points(tag, k, seed, SAFE_POINTS)?;
        let el = euler_lagrange_residual(&l, &pts)?;
        let hess = hessian_matches_multiplier(&l, seed, tol.get("hessian"))?;
        let noether = noether_report(&l, &candidates, seed)?;
        let passing: Vec<[f64; 8]> = candidates
            .iter()
            .zip(&noether.candidates)
            .filter(|(_, e)| e.is_noether)
            .map(|(c, _)| c.basis)
            .collect();
        let expected = expected_noether(tag, k);
        let joint: Vec<[f64; 8]> = passing.iter().chain(&expected).copied().collect();
        let span_matches = rank(&passing) == expected.len() && rank(&joint) == expected.len();
        let name = l.name();
        checks.push(Check::new(
            format!("{name}.el"),
            el < tol.get("el"),
            format!("max residual {el:.3e} at {} points", pts.len()),
        ));
        checks.push(Check::new(
            format!("{name}.hessian"),
            hess,
            format!("constant {}", l.multiplier_constant),
        ));
        checks.push(Check::new(
            format!("{name}.noether"),
            noether.count == expected.len() && span_matches,
            format!("count {} (expected {})", noether.count, expected.len()),
        ));
        rows.push(LagrangianRow {
            name,
            value: l.value.to_string(),
            el_residual: el,
            hessian_matches: hess,
            multiplier_constant: l.multiplier_constant,
            expected_count: expected.len(),
            noether,
            span_matches,
        });
    }
    let (u1, u2) = (sym("u1"), sym("u2"));
    let control = VariationalPair {
        kind: Kind::Lagrangian,
        tag: VariationalTag::L12,
        k,
        value: 0.5 * (u2.powi(2) + u1.powi(2)),
        f1: Expr::zero(),
        f2: Expr::zero(),
        constraint: Expr::zero(),
        multiplier_constant: 1.0,
    };
    let control_el = euler_lagrange_residual(&control, &safe_points(VariationalTag::L12, k, seed, SAFE_POINTS)?)?;
    checks.push(Check::new(
        "control.el_rejected",
        control_el >= tol.get("el"),
        format!("residual {control_el:.3e}"),
    ));
    Ok(LagrangiansReport {
        noether_counts: rows.iter().map(|r| r.noether.count).collect(),
        el_residual_max: rows.iter().map(|r| r.el_residual).fold(0.0, f64::max),
        control_el_residual: control_el,
        rows,
        checks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HamiltonianRow {
    pub name: String,
    pub value: String,
    pub momentum: String,
    pub inverse: String,
    pub domain: &'static str,
    pub legendre: LegendreCheck,
    pub trajectory: TrajectorySpec,
    pub hamilton_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conservation_spread: Option<f64>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TrajectorySpec {
    pub initial: [f64; 2],
    pub t_span: (f64, f64),
    pub dt: f64,
}

/// Trajectories inside each Hamiltonian's momentum domain.
pub fn hamilton_trajectory(tag: VariationalTag, k: f64) -> TrajectorySpec {
    let (initial, (a, b)) = match tag {
        VariationalTag::L12 => {
            return TrajectorySpec {
                initial: [1.0, 0.0],
                t_span: (0.0, 10.0),
                dt: 1e-3,
            }
        }
        VariationalTag::L13 => ([1.0, 0.7], (0.1, 1.4)),
        VariationalTag::L23 => ([-1.0, 0.7], (0.2, 1.5)),
        VariationalTag::L34 => ([1.5, 0.0], (0.0, 1.0)),
    };
    TrajectorySpec {
        initial,
        t_span: (a / k, b / k),
        dt: 1e-3 / k,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HamiltoniansReport {
    pub rows: Vec<HamiltonianRow>,
    pub goldstein: GoldsteinReport,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub trajectories: Vec<Trajectory>,
}

pub fn hamiltonians_report(k: f64, seed: u64, tol: &Tolerances) -> Result<HamiltoniansReport> {
    ensure_k(k)?;
    let sys = sho_system(k)?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut trajectories = Vec::new();
    for tag in VariationalTag::ALL {
        let (h, map) = default_hamiltonian(tag, k, seed)?;
        let l = default_lagrangian(tag, k, seed)?;
        let lc = legendre_check(&h, &l, &map, seed, tol.get("legendre"))?;
        let spec = hamilton_trajectory(tag, k);
        let traj = integrate(&sys, spec.initial, spec.t_span, spec.dt)?;
        let res = hamilton_equations_residual(&h, &map, &traj)?;
        let spread = if tag == VariationalTag::L12 {
            Some(conservation_spread(&h, &map, &traj)?)
        } else {
            None
        };
        let name = h.name();
        checks.push(Check::new(
            format!("{name}.legendre"),
            lc.round_trip_p && lc.round_trip_u2 && lc.legendre_identity,
            format!(
                "p round trip {}, u2 round trip {}, H + L = p u2 {}",
                lc.round_trip_p, lc.round_trip_u2, lc.legendre_identity
            ),
        ));
        checks.push(Check::new(
            format!("{name}.hamilton"),
            res < tol.get("hamilton"),
            format!(
                "max residual {res:.3e} on t in [{:.3}, {:.3}]",
                spec.t_span.0, spec.t_span.1
            ),
        ));
        if let Some(s) = spread {
            checks.push(Check::new(
                format!("{name}.conserved"),
                s < tol.get("conservation"),
                format!("relative spread {s:.3e}"),
            ));
        }
        rows.push(HamiltonianRow {
            name,
            value: h.value.to_string(),
            momentum: map.p_of_u2.to_string(),
            inverse: map.u2_of_p.to_string(),
            domain: map.domain,
            legendre: lc,
            trajectory: spec,
            hamilton_residual: res,
            conservation_spread: spread,
        });
        trajectories.push(traj);
    }
    let goldstein = goldstein_transform_check(seed, tol.get("equiv"))?;
    checks.push(Check::new(
        "goldstein.canonical",
        goldstein.pass(),
        format!(
            "transformed {:.15} vs direct {:.15} at (q, p) = ({}, {})",
            goldstein.spot_transformed, goldstein.spot_direct, goldstein.spot_q, goldstein.spot_p
        ),
    ));
    Ok(HamiltoniansReport {
        rows,
        goldstein,
        checks,
        trajectories,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HamiltonianChoice {
    Sho,
    Goldstein,
}

impl std::str::FromStr for HamiltonianChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sho" => Ok(HamiltonianChoice::Sho),
            "goldstein" => Ok(HamiltonianChoice::Goldstein),
            _ => Err(Error::Usage(format!("unknown hamiltonian '{s}' (sho | goldstein)"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QuantizedOperator {
    pub scheme: Scheme,
    pub formula: &'static str,
    pub operator: EvolutionOperator,
    pub display: String,
    /// Coefficient `m` in `c = 1/x^2 - m x^2`, for the Goldstein Hamiltonian.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x2_coefficient: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_energy: Option<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonphysical: Option<NonphysicalReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuantizeReport {
    pub hamiltonian: HamiltonianChoice,
    pub classical: String,
    pub operators: Vec<QuantizedOperator>,
    pub checks: Vec<Check>,
}

fn printed_for(scheme: Scheme) -> PrintedOperator {
    match scheme {
        Scheme::TwoTermSymmetric => PrintedOperator::NormalOrdered,
        Scheme::Weyl => PrintedOperator::Weyl,
        Scheme::SplitSymmetric => PrintedOperator::Split,
    }
}

/// Expands the requested orderings and compares them with the printed
/// operators; on the Goldstein Hamiltonian also solves for ground states.
pub fn quantize_report(
    which: HamiltonianChoice,
    schemes: &[Scheme],
    k: f64,
    seed: u64,
    tol: &Tolerances,
) -> Result<QuantizeReport> {
    ensure_k(k)?;
    let h = match which {
        HamiltonianChoice::Sho => ClassicalHamiltonianForm::sho(k),
        HamiltonianChoice::Goldstein => ClassicalHamiltonianForm::goldstein(),
    };
    let eq = tol.get("equiv");
    let mut operators = Vec::new();
    let mut checks = Vec::new();
    for &scheme in schemes {
        let op = quantize(&h, scheme, seed)?;
        let mut q = QuantizedOperator {
            scheme,
            formula: scheme.formula(),
            display: op.to_string(),
            operator: op.clone(),
            x2_coefficient: None,
            ground_energy: None,
            nonphysical: None,
        };
        match which {
            HamiltonianChoice::Sho => {
                let same = op.same_coefficients(&standard_operator(k), seed, eq)?;
                checks.push(Check::new(
                    format!("{scheme}.standard"),
                    same,
                    "a = -1, b = 0, c = k^2 x^2",
                ));
            }
            HamiltonianChoice::Goldstein => {
                let printed = printed_for(scheme);
                let same = op.same_coefficients(&printed.operator(), seed, eq)?;
                let x = 1.7;
                let c = op.c.eval(&Bindings::from([("x", x), ("t", 0.0)]))?;
                let m = (1.0 / (x * x) - c.re) / (x * x);
                q.x2_coefficient = Some(Rational::approximate(m, 16, 1e-9).map_or(m, Rational::to_f64));
                checks.push(Check::new(
                    format!("{scheme}.printed"),
                    same,
                    format!("c = 1/x^2 - {m:.12} x^2 against {}", printed.tag()),
                ));
                if scheme == Scheme::SplitSymmetric {
                    let cat = goldstein_catalog(PrintedOperator::Split)?;
                    let u0 = similarity_reduce(&op, cat.generator("D4+")?, seed)?;
                    let e = u0.eigenvalue.unwrap_or_default();
                    checks.push(Check::new(
                        format!("{scheme}.ground_energy"),
                        (e - Complex64::new(0.5, 0.0)).norm() < tol.get("eigenvalue"),
                        format!("E0 = {e}"),
                    ));
                    q.ground_energy = Some(e);
                }
                let np = nonphysical_check(&printed.operator(), seed)?;
                nonphysical_checks(&scheme.to_string(), &np, &mut checks);
                q.nonphysical = Some(np);
            }
        }
        operators.push(q);
    }
    if which == HamiltonianChoice::Sho && operators.len() > 1 {
        let first = &operators[0].operator;
        let mut agree = true;
        for o in &operators[1..] {
            agree &= o.operator.same_coefficients(first, seed, eq)?;
        }
        checks.push(Check::new(
            "schemes_coincide",
            agree,
            "B = 1 leaves no ordering ambiguity",
        ));
    }
    Ok(QuantizeReport {
        hamiltonian: which,
        classical: h.classical().to_string(),
        operators,
        checks,
    })
}

fn nonphysical_checks(prefix: &str, np: &NonphysicalReport, checks: &mut Vec<Check>) {
    match (np.printed_imag, np.imag_parts_match, np.printed_solves) {
        (Some(w), Some(imag), Some(solves)) => {
            checks.push(Check::new(
                format!("{prefix}.exponent_imag"),
                imag,
                format!(
                    "extracted {} and {}, printed +-{w:.10}",
                    np.exponents[0], np.exponents[1]
                ),
            ));
            checks.push(Check::new(
                format!("{prefix}.printed_solution"),
                solves,
                format!(
                    "printed exponents -1 +- {w:.10}i leave residual {:.3e}; extracted exponents leave {:.3e}",
                    np.printed_residual.unwrap_or(f64::NAN),
                    np.extracted_residual
                ),
            ));
            checks.push(Check::new(
                format!("{prefix}.non_normalizable"),
                !np.physical,
                np.norm.iter().map(|n| n.note.clone()).collect::<Vec<_>>().join(" | "),
            ));
        }
        _ => {
            let physical = np
                .exponents
                .iter()
                .any(|a| (a - Complex64::new(-1.0, 0.0)).norm() < 1e-10)
                && np.physical;
            checks.push(Check::new(
                format!("{prefix}.physical_branch"),
                physical,
                format!("exponents {} and {}", np.exponents[0], np.exponents[1]),
            ));
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Standard,
    Gauge,
    GoldsteinSplit,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Family::Standard),
            "gauge" => Ok(Family::Gauge),
            "goldstein-split" => Ok(Family::GoldsteinSplit),
            _ => Err(Error::Usage(format!(
                "unknown family '{s}' (standard | gauge | goldstein-split)"
            ))),
        }
    }
}

/// The catalog for `family`; the standard and Goldstein equations are
/// printed with `k = 1` only.
pub fn family_catalog(family: Family, k: f64, gauge: &Expr) -> Result<SymmetryCatalog> {
    ensure_k(k)?;
    let fixed = |name: &str| {
        if (k - 1.0).abs() > 0.0 {
            Err(Error::Usage(format!("the {name} family is defined for k = 1 only")))
        } else {
            Ok(())
        }
    };
    match family {
        Family::Standard => {
            fixed("standard")?;
            Ok(standard_catalog())
        }
        Family::Gauge => gauge_catalog(k, gauge),
        Family::GoldsteinSplit => {
            fixed("goldstein-split")?;
            goldstein_catalog(PrintedOperator::Split)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderReport {
    pub family: Family,
    pub gauge: String,
    pub ladder: Ladder,
    pub eigenvalues: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumResult>,
    pub checks: Vec<Check>,
}

pub const SPECTRUM_INTERVAL: (f64, f64) = (-10.0, 10.0);
pub const SPECTRUM_NODES: usize = 2000;

pub fn ladder_report(
    family: Family,
    n: usize,
    k: f64,
    gauge: &Expr,
    seed: u64,
    tol: &Tolerances,
) -> Result<LadderReport> {
    let cat = family_catalog(family, k, gauge)?;
    let ladder = build_ladder(&cat, n, seed)?;
    let mut checks = Vec::new();
    let ev_tol = tol.get("eigenvalue");
    let mut eigenvalues = Vec::new();
    for (j, e) in ladder.entries.iter().enumerate() {
        let lam = e.eigenvalue.unwrap_or(Complex64::new(f64::NAN, 0.0));
        let expected = (j as f64 + 0.5) * cat.k;
        eigenvalues.push(lam.re);
        checks.push(Check::new(
            format!("{}.eigenvalue", e.label),
            (lam - Complex64::new(expected, 0.0)).norm() < ev_tol,
            format!("{lam} (expected {expected})"),
        ));
        if let Some(Some(c)) = ladder.printed_constants.get(j) {
            checks.push(Check::new(
                format!("{}.printed", e.label),
                true,
                format!("printed form times {c}"),
            ));
        } else if j < cat.printed.len() {
            checks.push(Check::new(
                format!("{}.printed", e.label),
                false,
                "not proportional to the printed form",
            ));
        }
    }
    checks.push(Check::new(
        "annihilation_terminates",
        ladder.terminates,
        format!("{} applied to u0", cat.annihilation.as_deref().unwrap_or("-")),
    ));
    let spectrum = match fd_spectrum(&cat.operator, SPECTRUM_INTERVAL, SPECTRUM_NODES, n + 1) {
        Ok(s) => {
            let worst = s
                .eigenvalues
                .iter()
                .zip(&eigenvalues)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            checks.push(Check::new(
                "fd_spectrum_agrees",
                worst < tol.get("spectrum"),
                format!("max deviation {worst:.3e}"),
            ));
            Some(s)
        }
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(LadderReport {
        family,
        gauge: gauge.to_string(),
        ladder,
        eigenvalues,
        spectrum,
        checks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogVerification {
    pub catalog: String,
    pub basis: Vec<String>,
    pub verdicts: Vec<SymmetryVerdict>,
    pub control: String,
    pub control_verdicts: Vec<SymmetryVerdict>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub catalogs: Vec<CatalogVerification>,
    pub checks: Vec<Check>,
}

/// Each printed generator of the standard, gauge (with potential `gauge`)
/// and split Goldstein catalogs on the bases `u0, u1, u2`.
pub fn verify_report(k: f64, gauge: &Expr, seed: u64, tol: &Tolerances) -> Result<VerifyReport> {
    ensure_k(k)?;
    let cats = [
        standard_catalog(),
        gauge_catalog(k, gauge)?,
        goldstein_catalog(PrintedOperator::Split)?,
    ];
    let rtol = tol.get("residual");
    let mut out = Vec::new();
    let mut checks = Vec::new();
    for cat in &cats {
        let ladder = build_ladder(cat, 2, seed)?;
        let basis = &ladder.entries;
        let mut verdicts = Vec::new();
        for g in cat
            .generators
            .iter()
            .chain(basis.iter().map(solution_generator).collect::<Vec<_>>().iter())
        {
            verdicts.extend(verify_symmetry(&cat.operator, g, basis, seed, rtol)?);
        }
        let control = cat.corrupted()?;
        let control_verdicts = verify_symmetry(&cat.operator, &control, basis, seed, rtol)?;
        let failing: Vec<String> = verdicts
            .iter()
            .filter(|v| !v.pass)
            .map(|v| format!("{} on {}", v.generator, v.solution))
            .collect();
        checks.push(Check::new(
            format!("{}.generators", cat.name),
            failing.is_empty(),
            if failing.is_empty() {
                format!("{} verdicts pass", verdicts.len())
            } else {
                format!("failing: {}", failing.join(", "))
            },
        ));
        checks.push(Check::new(
            format!("{}.control_rejected", cat.name),
            control_verdicts.iter().any(|v| !v.pass),
            format!(
                "{}: {:?}",
                control.tag,
                control_verdicts.iter().map(|v| v.pass).collect::<Vec<_>>()
            ),
        ));
        out.push(CatalogVerification {
            catalog: cat.name.clone(),
            basis: basis.iter().map(|e| e.expression.to_string()).collect(),
            verdicts,
            control: control.tag,
            control_verdicts,
        });
    }
    Ok(VerifyReport { catalogs: out, checks })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Potential {
    Sho,
    Free,
}

impl std::str::FromStr for Potential {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sho" => Ok(Potential::Sho),
            "free" => Ok(Potential::Free),
            _ => Err(Error::Usage(format!("unknown potential '{s}' (sho | free)"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub potential: Potential,
    pub result: SpectrumResult,
    pub expected: Vec<f64>,
    pub checks: Vec<Check>,
}

/// Finite-difference eigenvalues against `(n + 1/2) k` for the oscillator or
/// the Dirichlet box levels `(n pi / L)^2 / 2` for a free particle.
pub fn spectrum_report(
    potential: Potential,
    k: f64,
    interval: (f64, f64),
    nodes: usize,
    count: usize,
    tol: &Tolerances,
) -> Result<SpectrumReport> {
    ensure_k(k)?;
    let op = match potential {
        Potential::Sho => standard_operator(k),
        Potential::Free => general_gauge_operator(&Expr::zero(), &Expr::zero()),
    };
    let result = fd_spectrum(&op, interval, nodes, count)?;
    let len = interval.1 - interval.0;
    let expected: Vec<f64> = (0..result.eigenvalues.len())
        .map(|j| match potential {
            Potential::Sho => (j as f64 + 0.5) * k,
            Potential::Free => 0.5 * ((j + 1) as f64 * std::f64::consts::PI / len).powi(2),
        })
        .collect();
    let checks = result
        .eigenvalues
        .iter()
        .zip(&expected)
        .enumerate()
        .map(|(j, (got, want))| {
            Check::new(
                format!("E{j}"),
                (got - want).abs() < tol.get("spectrum"),
                format!("{got:.9} vs {want:.9}"),
            )
        })
        .collect();
    Ok(SpectrumReport {
        potential,
        result,
        expected,
        checks,
    })
}
