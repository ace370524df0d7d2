//! Jacobi last multipliers of the oscillator from pairs of point symmetries.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechsys::{FirstOrderSystem, GeneratorField, Signature, Trajectory};
use crate::symkernel::ops::{cos, sin, sym};
use crate::symkernel::{to_prefix, Expr, Rational, Sampler};

/// Named multipliers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum MultiplierTag {
    #[serde(rename = "JLM12")]
    Jlm12,
    #[serde(rename = "JLM13")]
    Jlm13,
    #[serde(rename = "JLM23")]
    Jlm23,
    #[serde(rename = "JLM34")]
    Jlm34,
}

impl MultiplierTag {
    pub const ALL: [MultiplierTag; 4] = [
        MultiplierTag::Jlm12,
        MultiplierTag::Jlm13,
        MultiplierTag::Jlm23,
        MultiplierTag::Jlm34,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MultiplierTag::Jlm12 => "JLM12",
            MultiplierTag::Jlm13 => "JLM13",
            MultiplierTag::Jlm23 => "JLM23",
            MultiplierTag::Jlm34 => "JLM34",
        }
    }
}

impl fmt::Display for MultiplierTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MultiplierTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MultiplierTag::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Usage(format!("unknown multiplier tag `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Catalog(MultiplierTag),
    /// 1-based catalog indices
    Pair(usize, usize),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Catalog(t) => write!(f, "{t}"),
            Provenance::Pair(i, j) => write!(f, "pair({i},{j})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Multiplier {
    pub value: Expr,
    pub provenance: Provenance,
}

/// `k u1 sin kt + u2 cos kt`, the reciprocal of JLM13.
pub fn first_integral_a(k: f64) -> Expr {
    let kt = k * sym("t");
    k * sym("u1") * sin(&kt) + sym("u2") * cos(&kt)
}

/// `u2 sin kt - k u1 cos kt`, the reciprocal of JLM23.
pub fn first_integral_b(k: f64) -> Expr {
    let kt = k * sym("t");
    sym("u2") * sin(&kt) - k * sym("u1") * cos(&kt)
}

/// The verbatim closed forms.
pub fn catalog_multiplier(tag: MultiplierTag, k: f64) -> Multiplier {
    let value = match tag {
        MultiplierTag::Jlm12 => Expr::real(k),
        MultiplierTag::Jlm13 => first_integral_a(k).recip(),
        MultiplierTag::Jlm23 => first_integral_b(k).recip(),
        MultiplierTag::Jlm34 => (sym("u2").powi(2) + (k * k) * sym("u1").powi(2)).recip(),
    };
    Multiplier {
        value,
        provenance: Provenance::Catalog(tag),
    }
}

/// Sampler over (t, u1, u2) in the default box; multipliers are evaluated
/// away from their singular sets via pole rejection.
pub fn phase_sampler(seed: u64) -> Sampler {
    Sampler::new(seed)
}

fn det3(m: [[Expr; 3]; 3]) -> Expr {
    let minor = |r1: usize, r2: usize, c1: usize, c2: usize| &m[r1][c1] * &m[r2][c2] - &m[r1][c2] * &m[r2][c1];
    &m[0][0] * minor(1, 2, 1, 2) - &m[0][1] * minor(1, 2, 0, 2) + &m[0][2] * minor(1, 2, 0, 1)
}

/// `det[[X], [a], [b]]` with the vector field row first.
pub fn determinant(sys: &FirstOrderSystem, a: &GeneratorField, b: &GeneratorField) -> Result<Expr> {
    for g in [a, b] {
        if g.signature != Signature::Phase {
            return Err(Error::SignatureMismatch(format!("{} is not phase-space", g.tag)));
        }
    }
    Ok(det3([sys.vector_field(), a.coeffs.clone(), b.coeffs.clone()]))
}

/// `d_t M + d_u1(M u1') + d_u2(M u2')`.
pub fn multiplier_pde_residual(sys: &FirstOrderSystem, m: &Expr) -> Expr {
    m.diff("t") + (m * &sys.rhs[0]).diff("u1") + (m * &sys.rhs[1]).diff("u2")
}

#[derive(Clone, Debug)]
pub enum PairOutcome {
    Zero,
    Nonzero(Multiplier),
}

pub const ZERO_SAMPLES: usize = 32;
pub const ZERO_TOL: f64 = 1e-10;
pub const PDE_TOL: f64 = 1e-9;

/// `M = 1/Delta` unless the determinant vanishes identically.
pub fn multiplier_from_pair(
    sys: &FirstOrderSystem,
    a: &GeneratorField,
    b: &GeneratorField,
    indices: (usize, usize),
    sampler: &Sampler,
) -> Result<PairOutcome> {
    let delta = determinant(sys, a, b)?;
    if delta.is_zero() || sampler.clone().samples(ZERO_SAMPLES).is_zero_rel(&delta, ZERO_TOL)? {
        return Ok(PairOutcome::Zero);
    }
    Ok(PairOutcome::Nonzero(Multiplier {
        value: delta.recip(),
        provenance: Provenance::Pair(indices.0, indices.1),
    }))
}

/// `Delta = sum c_ij A^i B^j` with `i + j <= 3`.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantPolynomial {
    /// (power of A, power of B, coefficient)
    pub terms: Vec<(u32, u32, f64)>,
}

impl InvariantPolynomial {
    pub fn to_expr(&self, k: f64) -> Expr {
        let (a, b) = (first_integral_a(k), first_integral_b(k));
        Expr::add(
            self.terms
                .iter()
                .map(|&(i, j, c)| c * a.powi(i as i64) * b.powi(j as i64))
                .collect(),
        )
    }
}

impl fmt::Display for InvariantPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, &(i, j, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(if c < 0.0 { " - " } else { " + " })?;
            } else if c < 0.0 {
                f.write_str("-")?;
            }
            let c = c.abs();
            let mut parts: Vec<String> = Vec::new();
            if c != 1.0 || (i == 0 && j == 0) {
                parts.push(match Rational::approximate(c, 64, 1e-12) {
                    Some(r) => r.to_string(),
                    None => format!("{c}"),
                });
            }
            for (name, p) in [("A", i), ("B", j)] {
                match p {
                    0 => {}
                    1 => parts.push(name.to_string()),
                    _ => parts.push(format!("{name}^{p}")),
                }
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

const FIT_DEGREE: u32 = 3;

/// Least-squares fit of `delta` as a polynomial in the two first integrals,
/// accepted only if the rounded fit is equivalent to `delta`.
pub fn fit_invariant_polynomial(delta: &Expr, k: f64, sampler: &Sampler) -> Result<Option<InvariantPolynomial>> {
    let (a, b) = (first_integral_a(k), first_integral_b(k));
    let monos: Vec<(u32, u32)> = (0..=FIT_DEGREE)
        .flat_map(|d| (0..=d).map(move |j| (d - j, j)))
        .collect();
    let pts = sampler.clone().samples(4 * monos.len()).points(&[delta, &a, &b])?;
    if pts.len() < monos.len() {
        return Ok(None);
    }
    let rows = pts.len();
    let mut m = DMatrix::<f64>::zeros(rows, monos.len());
    let mut rhs = DVector::<f64>::zeros(rows);
    for (r, (_, v)) in pts.iter().enumerate() {
        if v.iter().any(|z| z.im.abs() > 1e-12 * (1.0 + z.re.abs())) {
            return Ok(None);
        }
        rhs[r] = v[0].re;
        for (c, &(i, j)) in monos.iter().enumerate() {
            m[(r, c)] = v[1].re.powi(i as i32) * v[2].re.powi(j as i32);
        }
    }
    let coef = match m.svd(true, true).solve(&rhs, 1e-12) {
        Ok(c) => c,
        Err(_) => return Ok(None),
    };
    let scale = coef.iter().fold(0.0f64, |s, c| s.max(c.abs()));
    let terms: Vec<(u32, u32, f64)> = monos
        .iter()
        .zip(coef.iter())
        .filter(|(_, c)| c.abs() > 1e-7 * scale.max(1e-300))
        .map(|(&(i, j), &c)| {
            let c = Rational::approximate(c, 64, 1e-8 * (1.0 + c.abs()))
                .map(Rational::to_f64)
                .unwrap_or(c);
            (i, j, c)
        })
        .collect();
    let poly = InvariantPolynomial { terms };
    if sampler.equiv(delta, &poly.to_expr(k), 1e-9)? {
        Ok(Some(poly))
    } else {
        Ok(None)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairEntry {
    pub i: usize,
    pub j: usize,
    pub determinant: String,
    pub status: PairStatus,
    /// Basic multiplier this pair reproduces up to a constant.
    pub matched_basic: Option<MultiplierTag>,
    /// `M_pair = constant * M_basic`
    pub constant: Option<f64>,
    /// Determinant as a polynomial in `A = 1/JLM13`, `B = 1/JLM23`.
    pub combination: Option<String>,
    pub pde_ok: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairStatus {
    Zero,
    Nonzero,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairClassification {
    pub k: f64,
    pub pairs: Vec<PairEntry>,
    pub zero_pairs: usize,
    pub nonzero_pairs: usize,
    pub distinct_basic: usize,
    pub basic_forms: Vec<MultiplierTag>,
    /// Nonzero pairs whose reciprocal determinant fails the multiplier PDE.
    pub pde_failures: usize,
    pub jlm34_identity: bool,
}

/// `(JLM13^-2 + JLM23^-2)^-1 = 1/(u2^2 + k^2 u1^2)`.
pub fn jlm34_identity(k: f64, sampler: &Sampler, tol: f64) -> Result<bool> {
    let m13 = catalog_multiplier(MultiplierTag::Jlm13, k).value;
    let m23 = catalog_multiplier(MultiplierTag::Jlm23, k).value;
    let lhs = (m13.powi(-2) + m23.powi(-2)).recip();
    sampler.equiv(&lhs, &catalog_multiplier(MultiplierTag::Jlm34, k).value, tol)
}

fn basic_match(poly: &InvariantPolynomial, k: f64) -> Option<(MultiplierTag, f64)> {
    match poly.terms.as_slice() {
        // M = 1/(c) = (1/(c k)) * k
        [(0, 0, c)] => Some((MultiplierTag::Jlm12, 1.0 / (c * k))),
        [(1, 0, c)] => Some((MultiplierTag::Jlm13, 1.0 / c)),
        [(0, 1, c)] => Some((MultiplierTag::Jlm23, 1.0 / c)),
        _ => None,
    }
}

fn describe_combination(poly: &InvariantPolynomial) -> String {
    let s = poly.to_string();
    match poly.terms.as_slice() {
        [(2, 0, a), (0, 2, b)] | [(0, 2, b), (2, 0, a)] if (a - b).abs() < 1e-12 => {
            format!("{s} (JLM34 up to constant)")
        }
        _ => s,
    }
}

/// Classifies all `C(n, 2)` pairs of `catalog`.
pub fn enumerate_pairs(
    sys: &FirstOrderSystem,
    catalog: &[GeneratorField],
    sampler: &Sampler,
) -> Result<PairClassification> {
    let mut pairs = Vec::new();
    let mut basics: Vec<MultiplierTag> = Vec::new();
    for i in 0..catalog.len() {
        for j in i + 1..catalog.len() {
            let delta = determinant(sys, &catalog[i], &catalog[j])?;
            let outcome = multiplier_from_pair(sys, &catalog[i], &catalog[j], (i + 1, j + 1), sampler)?;
            let mut entry = PairEntry {
                i: i + 1,
                j: j + 1,
                determinant: to_prefix(&delta),
                status: PairStatus::Zero,
                matched_basic: None,
                constant: None,
                combination: None,
                pde_ok: true,
            };
            if let PairOutcome::Nonzero(m) = outcome {
                entry.status = PairStatus::Nonzero;
                let res = multiplier_pde_residual(sys, &m.value);
                entry.pde_ok = sampler.is_zero_rel(&res, PDE_TOL)?;
                if let Some(poly) = fit_invariant_polynomial(&delta, sys.k, sampler)? {
                    if let Some((tag, c)) = basic_match(&poly, sys.k) {
                        entry.matched_basic = Some(tag);
                        entry.constant = Some(c);
                        if !basics.contains(&tag) {
                            basics.push(tag);
                        }
                    }
                    entry.combination = Some(describe_combination(&poly));
                }
            }
            pairs.push(entry);
        }
    }
    basics.sort();
    let zero_pairs = pairs.iter().filter(|p| p.status == PairStatus::Zero).count();
    Ok(PairClassification {
        k: sys.k,
        zero_pairs,
        nonzero_pairs: pairs.len() - zero_pairs,
        distinct_basic: basics.len(),
        basic_forms: basics,
        pde_failures: pairs
            .iter()
            .filter(|p| p.status == PairStatus::Nonzero && !p.pde_ok)
            .count(),
        jlm34_identity: jlm34_identity(sys.k, sampler, 1e-9)?,
        pairs,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioReport {
    pub mean: f64,
    pub spread: f64,
    pub nodes: usize,
    pub pass: bool,
}

/// Evaluates `m1/m2` at every node; spread is the max relative deviation
/// from the mean.
pub fn ratio_first_integral_check(
    m1: &Multiplier,
    m2: &Multiplier,
    traj: &Trajectory,
    tol: f64,
) -> Result<RatioReport> {
    let ratio = &m1.value / &m2.value;
    let mut vals = Vec::with_capacity(traj.len());
    for i in 0..traj.len() {
        let z: Complex64 = ratio.eval(&traj.bindings(i)).map_err(|e| match e {
            Error::Pole { location } => Error::Pole {
                location: format!("node {i} (t = {}): {location}", traj.time(i)),
            },
            other => other,
        })?;
        vals.push(z.re);
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let spread = vals.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max) / mean.abs().max(f64::MIN_POSITIVE);
    Ok(RatioReport {
        mean,
        spread,
        nodes: vals.len(),
        pass: spread < tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechsys::{sho_system, symmetry_catalog};

    #[test]
    fn basic_determinants() {
        let k = 1.3;
        let sys = sho_system(k).unwrap();
        let cat = symmetry_catalog(k).unwrap();
        let s = phase_sampler(1);
        let d12 = determinant(&sys, &cat[0], &cat[1]).unwrap();
        assert!(s.equiv(&d12, &Expr::real(k), 1e-12).unwrap());
        let d13 = determinant(&sys, &cat[0], &cat[2]).unwrap();
        assert!(s.equiv(&d13, &first_integral_a(k), 1e-12).unwrap());
        let d23 = determinant(&sys, &cat[1], &cat[2]).unwrap();
        assert!(s.equiv(&d23, &first_integral_b(k), 1e-12).unwrap());
    }

    #[test]
    fn tags_parse() {
        assert_eq!("jlm34".parse::<MultiplierTag>().unwrap(), MultiplierTag::Jlm34);
        assert!("JLM99".parse::<MultiplierTag>().is_err());
    }

    #[test]
    fn catalog_multipliers_solve_the_pde() {
        let sys = sho_system(2.0).unwrap();
        let s = phase_sampler(3);
        for tag in MultiplierTag::ALL {
            let m = catalog_multiplier(tag, 2.0);
            let r = multiplier_pde_residual(&sys, &m.value);
            assert!(s.is_zero_rel(&r, 1e-10).unwrap(), "{tag}");
        }
    }
}
