//! Lagrangians from multipliers, gauge constraints, Euler-Lagrange residuals
//! and the Noether point-symmetry test.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechsys::{symmetry_catalog, GeneratorField, Signature};
use crate::multiplier::{
    catalog_multiplier, first_integral_a, first_integral_b, Multiplier, MultiplierTag, Provenance,
};
use crate::symkernel::ops::{arctan, cos, csc, log, sec, sin, sym};
use crate::symkernel::{antiderivative, to_prefix, Bindings, Expr, Sampler};

/// Symbol standing for the acceleration in off-shell computations.
pub const ACCEL: &str = "u2_t";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum VariationalTag {
    L12,
    L13,
    L23,
    L34,
}

impl VariationalTag {
    pub const ALL: [VariationalTag; 4] = [
        VariationalTag::L12,
        VariationalTag::L13,
        VariationalTag::L23,
        VariationalTag::L34,
    ];

    pub fn multiplier(self) -> MultiplierTag {
        match self {
            VariationalTag::L12 => MultiplierTag::Jlm12,
            VariationalTag::L13 => MultiplierTag::Jlm13,
            VariationalTag::L23 => MultiplierTag::Jlm23,
            VariationalTag::L34 => MultiplierTag::Jlm34,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            VariationalTag::L12 => "12",
            VariationalTag::L13 => "13",
            VariationalTag::L23 => "23",
            VariationalTag::L34 => "34",
        }
    }
}

impl FromStr for VariationalTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let digits = s.trim_start_matches(|c: char| c.is_ascii_alphabetic());
        VariationalTag::ALL
            .into_iter()
            .find(|t| t.suffix() == digits)
            .ok_or_else(|| Error::Usage(format!("unknown tag `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Kind {
    Lagrangian,
    Hamiltonian,
}

/// A Lagrangian or Hamiltonian together with its gauge functions.
#[derive(Clone, Debug)]
pub struct VariationalPair {
    pub kind: Kind,
    pub tag: VariationalTag,
    pub k: f64,
    pub value: Expr,
    pub f1: Expr,
    pub f2: Expr,
    /// Must vanish for the stored gauge.
    pub constraint: Expr,
    /// `d^2 L / d u2^2 = multiplier_constant * M`
    pub multiplier_constant: f64,
}

impl VariationalPair {
    pub fn name(&self) -> String {
        let p = if self.kind == Kind::Lagrangian { "L" } else { "H" };
        format!("{p}{}", self.tag.suffix())
    }
}

impl fmt::Display for VariationalPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.name(), self.value)
    }
}

/// Default gauge `(f1, f2)` for each tag.
pub fn default_gauge(tag: VariationalTag, k: f64) -> (Expr, Expr) {
    match tag {
        VariationalTag::L12 => (Expr::zero(), -0.5 * k * k * sym("u1").powi(2)),
        VariationalTag::L13 | VariationalTag::L23 => (Expr::zero(), Expr::zero()),
        VariationalTag::L34 => (Expr::zero(), -log(sym("u1"))),
    }
}

/// Gauge constraint for a tag; `(f1, f2)` are functions of `(t, u1)`.
pub fn gauge_constraint(tag: VariationalTag, k: f64, f1: &Expr, f2: &Expr) -> Expr {
    let curl = f1.diff("t") - f2.diff("u1");
    match tag {
        VariationalTag::L12 => curl - k * k * sym("u1"),
        VariationalTag::L13 | VariationalTag::L23 => curl,
        VariationalTag::L34 => sym("u1") * curl - 1.0,
    }
}

/// Sampler restricted to the tag's domain: `A > 0` and `cos kt != 0` for 13,
/// `B > 0` and `sin kt != 0` for 23, `u1 > 0` for 34.
pub fn domain_sampler(tag: VariationalTag, k: f64, seed: u64) -> Sampler {
    let kt = k * sym("t");
    let s = Sampler::new(seed);
    match tag {
        VariationalTag::L12 => s,
        VariationalTag::L13 => s.positive(first_integral_a(k), 0.05).nonzero(cos(&kt), 0.05),
        VariationalTag::L23 => s.positive(first_integral_b(k), 0.05).nonzero(sin(&kt), 0.05),
        VariationalTag::L34 => s.range("u1", 0.5, 2.0).positive(sym("u1"), 0.0),
    }
}

fn lagrangian_core(tag: VariationalTag, k: f64) -> Expr {
    let (u1, u2) = (sym("u1"), sym("u2"));
    let kt = k * sym("t");
    match tag {
        VariationalTag::L12 => 0.5 * u2.powi(2),
        VariationalTag::L13 => {
            let a = first_integral_a(k);
            sec(&kt).powi(2) * (log(&a) * &a - &u2 * cos(&kt) - k * &u1 * sin(&kt))
        }
        VariationalTag::L23 => {
            let b = first_integral_b(k);
            csc(&kt).powi(2) * (log(&b) * &b - &u2 * sin(&kt) + k * &u1 * cos(&kt))
        }
        VariationalTag::L34 => {
            let w = &u2 / (k * &u1);
            &w * arctan(&w) - 0.5 * log(w.powi(2) + 1.0)
        }
    }
}

pub const CONSTRAINT_TOL: f64 = 1e-9;

/// The closed-form Lagrangian with gauge terms `f1 u2 + f2`; rejects gauges
/// violating the tag's constraint.
pub fn catalog_lagrangian(tag: VariationalTag, k: f64, f1: Expr, f2: Expr, seed: u64) -> Result<VariationalPair> {
    for f in [&f1, &f2] {
        if f.contains("u2") || f.contains(ACCEL) {
            return Err(Error::InvalidParameter("gauge functions depend on (t, u1) only".into()));
        }
    }
    let constraint = gauge_constraint(tag, k, &f1, &f2);
    let sampler = domain_sampler(tag, k, seed);
    if !constraint.is_zero() && !sampler.is_zero_rel(&constraint, CONSTRAINT_TOL)? {
        return Err(Error::Constraint {
            tag: format!("L{}", tag.suffix()),
            residual: constraint,
        });
    }
    let value = lagrangian_core(tag, k) + &f1 * sym("u2") + &f2;
    Ok(VariationalPair {
        kind: Kind::Lagrangian,
        tag,
        k,
        value,
        f1,
        f2,
        constraint,
        multiplier_constant: if tag == VariationalTag::L12 { 1.0 / k } else { 1.0 },
    })
}

pub fn default_lagrangian(tag: VariationalTag, k: f64, seed: u64) -> Result<VariationalPair> {
    let (f1, f2) = default_gauge(tag, k);
    catalog_lagrangian(tag, k, f1, f2, seed)
}

/// Lagrangian whose `u2`-Hessian is `m`. Only the four catalog multipliers
/// have built-in double antiderivatives.
pub fn lagrangian_from_multiplier(m: &Multiplier, f1: Expr, f2: Expr, k: f64, seed: u64) -> Result<VariationalPair> {
    let tag = match m.provenance {
        Provenance::Catalog(MultiplierTag::Jlm12) => VariationalTag::L12,
        Provenance::Catalog(MultiplierTag::Jlm13) => VariationalTag::L13,
        Provenance::Catalog(MultiplierTag::Jlm23) => VariationalTag::L23,
        Provenance::Catalog(MultiplierTag::Jlm34) => VariationalTag::L34,
        Provenance::Pair(..) => {
            return Err(Error::Unsupported(
                "double antiderivative of a non-catalog multiplier".into(),
            ))
        }
    };
    catalog_lagrangian(tag, k, f1, f2, seed)
}

/// Adds the total derivative of `g(t, u1)` through the gauge functions.
pub fn gauge_shift(l: &VariationalPair, g: &Expr) -> VariationalPair {
    let mut out = l.clone();
    out.f1 = &l.f1 + g.diff("u1");
    out.f2 = &l.f2 + g.diff("t");
    out.value = &l.value + g.diff("u1") * sym("u2") + g.diff("t");
    out.constraint = gauge_constraint(l.tag, l.k, &out.f1, &out.f2);
    out
}

/// `D_t` on functions of `(t, u1, u2)` with `u2' = accel`.
fn total_derivative(f: &Expr, accel: &Expr) -> Expr {
    f.diff("t") + sym("u2") * f.diff("u1") + accel * f.diff("u2")
}

/// `D_t(dL/du2) - dL/du1` along the flow `u2' = -k^2 u1`.
pub fn euler_lagrange_expr(l: &VariationalPair) -> Expr {
    let on_shell = -(l.k * l.k) * sym("u1");
    total_derivative(&l.value.diff("u2"), &on_shell) - l.value.diff("u1")
}

/// Max |EL residual| over the given points.
pub fn euler_lagrange_residual(l: &VariationalPair, points: &[Bindings]) -> Result<f64> {
    let e = euler_lagrange_expr(l);
    let mut worst: f64 = 0.0;
    for b in points {
        worst = worst.max(e.eval(b)?.norm());
    }
    Ok(worst)
}

/// `count` points in the tag's domain.
pub fn safe_points(tag: VariationalTag, k: f64, seed: u64, count: usize) -> Result<Vec<Bindings>> {
    let l = default_lagrangian(tag, k, seed)?;
    let e = euler_lagrange_expr(&l);
    Ok(domain_sampler(tag, k, seed)
        .samples(count)
        .points(&[&l.value, &e])?
        .into_iter()
        .map(|(b, _)| b)
        .collect())
}

/// `X^(1) L + L D_t xi`, off shell.
pub fn noether_defect(l: &VariationalPair, g: &GeneratorField) -> Result<Expr> {
    if g.signature != Signature::Phase {
        return Err(Error::SignatureMismatch(format!("{} is not phase-space", g.tag)));
    }
    let (xi, eta) = (&g.coeffs[0], &g.coeffs[1]);
    if xi.contains("u2") || eta.contains("u2") {
        return Err(Error::InvalidParameter(format!(
            "{} is not a point symmetry in (t, u1)",
            g.tag
        )));
    }
    let dxi = xi.diff("t") + sym("u2") * xi.diff("u1");
    let deta = eta.diff("t") + sym("u2") * eta.diff("u1");
    let eta1 = deta - sym("u2") * &dxi;
    let lv = &l.value;
    Ok(xi * lv.diff("t") + eta * lv.diff("u1") + eta1 * lv.diff("u2") + lv * dxi)
}

/// Euler operator `d/du1 - D_t d/du2` with a free acceleration.
pub fn euler_operator(d: &Expr) -> Expr {
    d.diff("u1") - total_derivative(&d.diff("u2"), &sym(ACCEL))
}

/// `F(t, u1)` with `D_t F = d`, when the table allows it.
fn recover_boundary_term(d: &Expr) -> Option<Expr> {
    let p = d.diff("u2");
    if p.contains("u2") {
        return None;
    }
    let f_u = antiderivative(&p, "u1")?;
    let rest = d.substitute("u2", &Expr::zero()) - f_u.diff("t");
    if rest.contains("u1") {
        return None;
    }
    Some(f_u + antiderivative(&rest, "t")?)
}

#[derive(Clone, Debug, Serialize)]
pub struct NoetherEntry {
    pub generator: String,
    pub is_noether: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauge_term: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defect: Option<String>,
}

pub const NOETHER_TOL: f64 = 1e-9;

/// Whether `g` is a Noether point symmetry of `l`.
pub fn noether_check(l: &VariationalPair, g: &GeneratorField, seed: u64) -> Result<NoetherEntry> {
    let d = noether_defect(l, g)?;
    let e = euler_operator(&d);
    let sampler = domain_sampler(l.tag, l.k, seed);
    let ok = e.is_zero() || sampler.is_zero_rel(&e, NOETHER_TOL)?;
    let gauge_term = if ok {
        recover_boundary_term(&d).filter(|f| {
            let diff = total_derivative(f, &Expr::zero()) - &d;
            sampler.is_zero_rel(&diff, NOETHER_TOL).unwrap_or(false)
        })
    } else {
        None
    };
    Ok(NoetherEntry {
        generator: g.tag.clone(),
        is_noether: ok,
        gauge_term: gauge_term.as_ref().map(to_prefix),
        defect: (!ok).then(|| to_prefix(&d)),
    })
}

/// A candidate generator with its coordinates over the eight-element basis.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub field: GeneratorField,
    pub basis: [f64; 8],
}

/// The catalog plus the linear combinations singled out for L13 and L23.
pub fn noether_candidates(k: f64) -> Result<Vec<Candidate>> {
    let cat = symmetry_catalog(k)?;
    let mut out: Vec<Candidate> = cat
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let mut basis = [0.0; 8];
            basis[i] = 1.0;
            Candidate {
                field: g.clone(),
                basis,
            }
        })
        .collect();
    let combos: [(&str, [(usize, f64); 2]); 4] = [
        ("G4+G5", [(3, 1.0), (4, 1.0)]),
        ("-kG3+G6", [(2, -k), (5, 1.0)]),
        ("-G4+G5", [(3, -1.0), (4, 1.0)]),
        ("kG3+G6", [(2, k), (5, 1.0)]),
    ];
    for (tag, parts) in combos {
        let refs: Vec<(Expr, &GeneratorField)> = parts.iter().map(|&(i, c)| (Expr::real(c), &cat[i])).collect();
        let mut basis = [0.0; 8];
        for &(i, c) in &parts {
            basis[i] = c;
        }
        out.push(Candidate {
            field: GeneratorField::combine(tag, &refs)?,
            basis,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct NoetherReport {
    pub lagrangian: String,
    pub candidates: Vec<NoetherEntry>,
    /// Dimension of the span of the passing candidates.
    pub count: usize,
}

fn span_dimension(vectors: &[[f64; 8]]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(vectors.len(), 8, |r, c| vectors[r][c]);
    m.rank(1e-9)
}

pub fn noether_report(l: &VariationalPair, candidates: &[Candidate], seed: u64) -> Result<NoetherReport> {
    let mut entries = Vec::with_capacity(candidates.len());
    let mut passing = Vec::new();
    for c in candidates {
        let e = noether_check(l, &c.field, seed)?;
        if e.is_noether {
            passing.push(c.basis);
        }
        entries.push(e);
    }
    Ok(NoetherReport {
        lagrangian: l.name(),
        candidates: entries,
        count: span_dimension(&passing),
    })
}

/// `d^2 L / d u2^2` against `multiplier_constant * M`.
pub fn hessian_matches_multiplier(l: &VariationalPair, seed: u64, tol: f64) -> Result<bool> {
    let m = catalog_multiplier(l.tag.multiplier(), l.k).value;
    let h = l.value.diff("u2").diff("u2");
    domain_sampler(l.tag, l.k, seed).equiv(&h, &(l.multiplier_constant * m), tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_parse() {
        assert_eq!("L34".parse::<VariationalTag>().unwrap(), VariationalTag::L34);
        assert_eq!("h13".parse::<VariationalTag>().unwrap(), VariationalTag::L13);
        assert!("L99".parse::<VariationalTag>().is_err());
    }

    #[test]
    fn l12_default_is_standard() {
        let l = default_lagrangian(VariationalTag::L12, 1.0, 1).unwrap();
        let (u1, u2) = (sym("u1"), sym("u2"));
        assert_eq!(l.value, 0.5 * u2.powi(2) - 0.5 * u1.powi(2));
    }

    #[test]
    fn constraint_violation_is_reported() {
        let err = catalog_lagrangian(VariationalTag::L12, 1.0, Expr::zero(), Expr::zero(), 1).unwrap_err();
        assert!(matches!(err, Error::Constraint { .. }));
    }

    #[test]
    fn boundary_term_for_l12_g1() {
        let l = default_lagrangian(VariationalTag::L12, 1.0, 1).unwrap();
        let cands = noether_candidates(1.0).unwrap();
        let e = noether_check(&l, &cands[0].field, 1).unwrap();
        assert!(e.is_noether);
        assert!(e.gauge_term.is_some());
    }
}
