//! Operator-ordering quantization of Hamiltonians of the form
//! `H = (A(q) + p^2 B(q))/2 - p f1(q, t)` with `p -> -i d/dx`.
//!
//! Operators are kept in the form `2i u_t = a u_xx + b u_x + c u`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::symkernel::ops::sym;
use crate::symkernel::{to_prefix, Expr, Sampler};

/// Where `x` lives for a given operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum XDomain {
    Line,
    HalfLine,
}

impl XDomain {
    /// Sampling box for symbolic checks.
    pub fn sample_range(self) -> (f64, f64) {
        match self {
            XDomain::Line => (-2.5, 2.5),
            XDomain::HalfLine => (0.3, 3.0),
        }
    }

    pub fn note(self) -> &'static str {
        match self {
            XDomain::Line => "x real",
            XDomain::HalfLine => "x > 0",
        }
    }

    /// Sampler over `(t, x)` on this domain.
    pub fn sampler(self, seed: u64) -> Sampler {
        let (lo, hi) = self.sample_range();
        Sampler::new(seed).range("x", lo, hi).range("t", -1.0, 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    TwoTermSymmetric,
    Weyl,
    SplitSymmetric,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::TwoTermSymmetric, Scheme::Weyl, Scheme::SplitSymmetric];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::TwoTermSymmetric => "two-term-symmetric",
            Scheme::Weyl => "weyl",
            Scheme::SplitSymmetric => "split-symmetric",
        }
    }

    /// The ordering rule for the `p^2 B` product.
    pub fn formula(self) -> &'static str {
        match self {
            Scheme::TwoTermSymmetric => "(p^2 B + B p^2)/2",
            Scheme::Weyl => "(p^2 B + 2 p B p + B p^2)/4",
            Scheme::SplitSymmetric => "sqrt(B) p^2 sqrt(B)",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.label() == s)
            .ok_or_else(|| Error::Usage(format!("unknown scheme '{s}'")))
    }
}

/// A linear differential operator `sum_j coeffs[j] d^j/dx^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffOp {
    pub coeffs: Vec<Expr>,
}

impl DiffOp {
    pub fn multiply(f: Expr) -> Self {
        DiffOp { coeffs: vec![f] }
    }

    pub fn d() -> Self {
        DiffOp {
            coeffs: vec![Expr::zero(), Expr::one()],
        }
    }

    /// `-i d/dx`
    pub fn momentum() -> Self {
        DiffOp {
            coeffs: vec![Expr::zero(), -Expr::i()],
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, j: usize) -> Expr {
        self.coeffs.get(j).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        let n = self.coeffs.len().max(other.coeffs.len());
        DiffOp {
            coeffs: (0..n).map(|j| self.coeff(j) + other.coeff(j)).collect(),
        }
    }

    pub fn scale(&self, s: &Expr) -> DiffOp {
        DiffOp {
            coeffs: self.coeffs.iter().map(|c| s * c).collect(),
        }
    }

    /// `self . other`, using `d^m g = sum_r C(m, r) g^(r) d^(m-r)`.
    pub fn compose(&self, other: &DiffOp) -> DiffOp {
        let n = self.order() + other.order() + 1;
        let mut out = vec![Vec::new(); n];
        for (m, f) in self.coeffs.iter().enumerate() {
            for (j, g) in other.coeffs.iter().enumerate() {
                let mut binom = 1.0;
                for r in 0..=m {
                    let term = binom * f * g.diff_n("x", r);
                    out[m - r + j].push(term);
                    binom = binom * (m - r) as f64 / (r + 1) as f64;
                }
            }
        }
        DiffOp {
            coeffs: out.into_iter().map(Expr::add).collect(),
        }
    }

    pub fn apply(&self, u: &Expr) -> Expr {
        Expr::add(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| c * u.diff_n("x", j))
                .collect(),
        )
    }
}

/// `H = (A + p^2 B)/2 - p f1`, with `x` standing for `q`.
#[derive(Clone, Debug)]
pub struct ClassicalHamiltonianForm {
    pub tag: String,
    pub potential: Expr,
    pub kinetic: Expr,
    pub linear: Expr,
    pub domain: XDomain,
}

impl ClassicalHamiltonianForm {
    pub fn new(tag: impl Into<String>, potential: Expr, kinetic: Expr, linear: Expr, domain: XDomain) -> Result<Self> {
        if kinetic.is_zero() {
            return Err(Error::InvalidParameter("coefficient of p^2 vanishes".into()));
        }
        Ok(ClassicalHamiltonianForm {
            tag: tag.into(),
            potential,
            kinetic,
            linear,
            domain,
        })
    }

    /// `(p^2 + k^2 q^2)/2`
    pub fn sho(k: f64) -> Self {
        let x = sym("x");
        Self::new("sho", (k * k) * x.powi(2), Expr::one(), Expr::zero(), XDomain::Line).expect("nonzero kinetic term")
    }

    /// `(1/q^2 + p^2 q^4)/2`
    pub fn goldstein() -> Self {
        let x = sym("x");
        Self::new("goldstein", x.powi(-2), x.powi(4), Expr::zero(), XDomain::HalfLine).expect("nonzero kinetic term")
    }

    /// `p^2/2 - p f1 + f1^2/2 - f2`
    pub fn gauge(f1: Expr, f2: Expr) -> Self {
        let a = f1.powi(2) - 2.0 * &f2;
        Self::new("gauge", a, Expr::one(), f1, XDomain::Line).expect("nonzero kinetic term")
    }

    /// The classical Hamiltonian in `(x, p)`.
    pub fn classical(&self) -> Expr {
        let p = sym("p");
        0.5 * (&self.potential + p.powi(2) * &self.kinetic) - p * &self.linear
    }
}

/// `2i u_t = a u_xx + b u_x + c u`.
#[derive(Clone, Debug, Serialize)]
pub struct EvolutionOperator {
    pub tag: String,
    pub scheme: Option<Scheme>,
    #[serde(serialize_with = "ser_prefix")]
    pub a: Expr,
    #[serde(serialize_with = "ser_prefix")]
    pub b: Expr,
    #[serde(serialize_with = "ser_prefix")]
    pub c: Expr,
    pub domain: XDomain,
}

fn ser_prefix<S: serde::Serializer>(e: &Expr, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&to_prefix(e))
}

impl EvolutionOperator {
    pub fn new(tag: impl Into<String>, a: Expr, b: Expr, c: Expr, domain: XDomain) -> Self {
        EvolutionOperator {
            tag: tag.into(),
            scheme: None,
            a,
            b,
            c,
            domain,
        }
    }

    /// Right-hand side as a differential operator.
    pub fn spatial(&self) -> DiffOp {
        DiffOp {
            coeffs: vec![self.c.clone(), self.b.clone(), self.a.clone()],
        }
    }

    /// Coefficient-wise equivalence on the operator's domain.
    pub fn same_coefficients(&self, other: &EvolutionOperator, seed: u64, tol: f64) -> Result<bool> {
        let s = self.domain.sampler(seed);
        Ok(s.equiv(&self.a, &other.a, tol)? && s.equiv(&self.b, &other.b, tol)? && s.equiv(&self.c, &other.c, tol)?)
    }
}

impl fmt::Display for EvolutionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2i u_t = ({}) u_xx + ({}) u_x + ({}) u", self.a, self.b, self.c)
    }
}

/// Promotes `h` to an evolution operator under `scheme`. The `p f1` term is
/// always symmetrised as `(p f1 + f1 p)/2`.
pub fn quantize(h: &ClassicalHamiltonianForm, scheme: Scheme, seed: u64) -> Result<EvolutionOperator> {
    let p = DiffOp::momentum();
    let p2 = p.compose(&p);
    let b = DiffOp::multiply(h.kinetic.clone());
    let kinetic = match scheme {
        Scheme::TwoTermSymmetric => p2.compose(&b).add(&b.compose(&p2)).scale(&Expr::real(0.5)),
        Scheme::Weyl => p2
            .compose(&b)
            .add(&p.compose(&b).compose(&p).scale(&Expr::int(2)))
            .add(&b.compose(&p2))
            .scale(&Expr::real(0.25)),
        Scheme::SplitSymmetric => {
            let (lo, hi) = h.domain.sample_range();
            let positive = Sampler::new(seed)
                .range("x", lo, hi)
                .range("t", -1.0, 1.0)
                .points(&[&h.kinetic])?
                .iter()
                .all(|(_, v)| v[0].im.abs() < 1e-12 && v[0].re > 0.0);
            if !positive {
                return Err(Error::Domain(format!(
                    "split-symmetric ordering needs {} > 0 on {}",
                    h.kinetic,
                    h.domain.note()
                )));
            }
            let root = DiffOp::multiply(h.kinetic.sqrt());
            root.compose(&p2).compose(&root)
        }
    };
    let f1 = DiffOp::multiply(h.linear.clone());
    let cross = p.compose(&f1).add(&f1.compose(&p));
    // 2H = A + ordered(p^2 B) - (p f1 + f1 p)
    let two_h = DiffOp::multiply(h.potential.clone())
        .add(&kinetic)
        .add(&cross.scale(&Expr::int(-1)));
    Ok(EvolutionOperator {
        tag: h.tag.clone(),
        scheme: Some(scheme),
        a: two_h.coeff(2),
        b: two_h.coeff(1),
        c: two_h.coeff(0),
        domain: h.domain,
    })
}

/// `2i u_t = -u_xx + 2i f1 u_x + (f1^2 - 2 f2 + i f1_x) u` as printed.
pub fn general_gauge_operator(f1: &Expr, f2: &Expr) -> EvolutionOperator {
    let i = Expr::i();
    EvolutionOperator::new(
        "gauge",
        -Expr::one(),
        2.0 * &i * f1,
        f1.powi(2) - 2.0 * f2 + &i * f1.diff("x"),
        XDomain::Line,
    )
}

/// `2i u_t - a u_xx - b u_x - c u`.
pub fn apply(op: &EvolutionOperator, u: &Expr) -> Expr {
    2.0 * Expr::i() * u.diff("t") - op.spatial().apply(u)
}

/// The printed operators, rescaled to the `2i` form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PrintedOperator {
    /// Standard oscillator, `x` on the line.
    Standard,
    /// Goldstein Hamiltonian, `x^2` coefficient `-6`.
    NormalOrdered,
    /// Goldstein Hamiltonian, `x^2` coefficient `-3`.
    Weyl,
    /// Goldstein Hamiltonian, `x^2` coefficient `-2`.
    Split,
}

impl PrintedOperator {
    pub const ALL: [PrintedOperator; 4] = [
        PrintedOperator::Standard,
        PrintedOperator::NormalOrdered,
        PrintedOperator::Weyl,
        PrintedOperator::Split,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            PrintedOperator::Standard => "sho",
            PrintedOperator::NormalOrdered => "goldstein-normal",
            PrintedOperator::Weyl => "goldstein-weyl",
            PrintedOperator::Split => "goldstein-split",
        }
    }

    /// The scheme whose expansion should reproduce this operator.
    pub fn scheme(self) -> Option<Scheme> {
        match self {
            PrintedOperator::Standard => None,
            PrintedOperator::NormalOrdered => Some(Scheme::TwoTermSymmetric),
            PrintedOperator::Weyl => Some(Scheme::Weyl),
            PrintedOperator::Split => Some(Scheme::SplitSymmetric),
        }
    }

    pub fn operator(self) -> EvolutionOperator {
        let x = sym("x");
        let goldstein = |m: f64| {
            EvolutionOperator::new(
                self.tag(),
                -x.powi(4),
                -4.0 * x.powi(3),
                x.powi(-2) - m * x.powi(2),
                XDomain::HalfLine,
            )
        };
        match self {
            PrintedOperator::Standard => {
                EvolutionOperator::new(self.tag(), -Expr::one(), Expr::zero(), x.powi(2), XDomain::Line)
            }
            PrintedOperator::NormalOrdered => goldstein(6.0),
            PrintedOperator::Weyl => goldstein(3.0),
            PrintedOperator::Split => goldstein(2.0),
        }
    }
}

/// Standard oscillator with frequency `k`: `2i u_t = -u_xx + k^2 x^2 u`.
pub fn standard_operator(k: f64) -> EvolutionOperator {
    let x = sym("x");
    EvolutionOperator::new("sho", -Expr::one(), Expr::zero(), (k * k) * x.powi(2), XDomain::Line)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::ops::exp;

    #[test]
    fn goldstein_schemes_differ_only_in_c() {
        let h = ClassicalHamiltonianForm::goldstein();
        for (scheme, m) in [
            (Scheme::TwoTermSymmetric, 6.0),
            (Scheme::Weyl, 3.0),
            (Scheme::SplitSymmetric, 2.0),
        ] {
            let op = quantize(&h, scheme, 1).unwrap();
            let x = sym("x");
            let s = op.domain.sampler(4);
            assert!(s.equiv(&op.a, &-x.powi(4), 1e-12).unwrap());
            assert!(s.equiv(&op.b, &(-4.0 * x.powi(3)), 1e-12).unwrap());
            assert!(
                s.equiv(&op.c, &(x.powi(-2) - m * x.powi(2)), 1e-12).unwrap(),
                "{scheme}: {}",
                op.c
            );
        }
    }

    #[test]
    fn split_needs_positive_kinetic_term() {
        let h = ClassicalHamiltonianForm::new("odd", Expr::zero(), sym("x"), Expr::zero(), XDomain::Line).unwrap();
        assert!(matches!(quantize(&h, Scheme::SplitSymmetric, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn gauge_matches_printed() {
        let (t, x) = (sym("t"), sym("x"));
        let f1 = t.clone();
        let f2 = x.clone() - 0.5 * x.powi(2);
        let q = quantize(
            &ClassicalHamiltonianForm::gauge(f1.clone(), f2.clone()),
            Scheme::Weyl,
            1,
        )
        .unwrap();
        assert!(q
            .same_coefficients(&general_gauge_operator(&f1, &f2), 2, 1e-12)
            .unwrap());
    }

    #[test]
    fn ground_state_is_annihilated() {
        let (t, x) = (sym("t"), sym("x"));
        let u0 = exp(-0.5 * Expr::i() * &t - 0.5 * x.powi(2));
        let r = apply(&PrintedOperator::Standard.operator(), &u0);
        assert!(XDomain::Line.sampler(1).is_zero_rel(&r, 1e-12).unwrap());
        assert!(!XDomain::Line
            .sampler(1)
            .is_zero_rel(&apply(&PrintedOperator::Standard.operator(), &x), 1e-6)
            .unwrap());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.label().parse::<Scheme>().unwrap(), s);
        }
        assert!("normal".parse::<Scheme>().is_err());
    }
}
