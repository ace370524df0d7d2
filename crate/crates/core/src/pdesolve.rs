//! Solutions of the evolution operators: symmetry verification on solution
//! bases, similarity reduction, Lie-bracket ladders, eigenvalues, and a
//! finite-difference spectrum used as an independent oracle.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechsys::{symmetry_commutator, GeneratorField};
use crate::quantize::{apply, general_gauge_operator, EvolutionOperator, PrintedOperator, XDomain};
use crate::symkernel::ops::{cos, exp, log, sin, sym};
use crate::symkernel::{antiderivative, to_prefix, Bindings, Expr, Node, Rational, Sampler};

/// Residual tolerance for catalog solutions.
pub const RESIDUAL_TOL: f64 = 1e-9;

fn ser_prefix<S: serde::Serializer>(e: &Expr, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&to_prefix(e))
}

#[derive(Clone, Debug, Serialize)]
pub struct SolutionCatalogEntry {
    #[serde(serialize_with = "ser_prefix")]
    pub expression: Expr,
    pub operator: String,
    pub label: String,
    pub eigenvalue: Option<Complex64>,
    pub normalizable: Option<bool>,
    pub domain: &'static str,
}

impl SolutionCatalogEntry {
    pub fn new(expression: Expr, op: &EvolutionOperator, label: impl Into<String>) -> Self {
        SolutionCatalogEntry {
            expression,
            operator: op.tag.clone(),
            label: label.into(),
            eigenvalue: None,
            normalizable: None,
            domain: op.domain.note(),
        }
    }
}

/// `apply(op, u) = 0` on the operator's domain.
pub fn solves(op: &EvolutionOperator, u: &Expr, seed: u64, tol: f64) -> Result<bool> {
    op.domain.sampler(seed).is_zero_rel(&apply(op, u), tol)
}

fn e_i(c: f64) -> Expr {
    exp(c * Expr::i() * sym("t"))
}

/// An operator with its printed point symmetries and the roles used by the
/// ladder construction.
#[derive(Clone, Debug)]
pub struct SymmetryCatalog {
    pub name: String,
    pub operator: EvolutionOperator,
    pub generators: Vec<GeneratorField>,
    /// Generator whose invariants give the ground state.
    pub reducer: Option<String>,
    pub creation: Option<String>,
    pub annihilation: Option<String>,
    /// Bracketing with `s d_u` returns `E s` on eigenstates.
    pub energy: GeneratorField,
    /// The printed solutions, lowest first, for comparison up to constants.
    pub printed: Vec<Expr>,
    pub k: f64,
}

impl SymmetryCatalog {
    pub fn generator(&self, tag: &str) -> Result<&GeneratorField> {
        self.generators
            .iter()
            .find(|g| g.tag == tag)
            .ok_or_else(|| Error::Usage(format!("no generator '{tag}' in {}", self.name)))
    }

    /// The creation generator with the sign of its `d_x` part flipped.
    pub fn corrupted(&self) -> Result<GeneratorField> {
        let tag = self
            .creation
            .as_deref()
            .or(self.reducer.as_deref())
            .ok_or_else(|| Error::Unsupported(format!("{} has no ladder generator", self.name)))?;
        let mut g = self.generator(tag)?.clone();
        g.coeffs[1] = -&g.coeffs[1];
        g.tag = format!("{tag}~");
        Ok(g)
    }
}

/// The standard oscillator, `2i u_t = -u_xx + x^2 u`.
pub fn standard_catalog() -> SymmetryCatalog {
    let (t, x, u) = (sym("t"), sym("x"), sym("u"));
    let i = Expr::i();
    let half = Expr::real(0.5);
    let g1 = |s: f64| {
        GeneratorField::pde(
            if s > 0.0 { "G1+" } else { "G1-" },
            e_i(2.0 * s) * s * &i,
            -(e_i(2.0 * s) * &x),
            e_i(2.0 * s) * s * (x.powi(2) + &half) * &u,
        )
    };
    let g4 = |s: f64| {
        GeneratorField::pde(
            if s > 0.0 { "G4+" } else { "G4-" },
            Expr::zero(),
            e_i(s) * s,
            -(e_i(s) * &x * &u),
        )
    };
    let g3 = GeneratorField::pde("G3", i.clone(), Expr::zero(), Expr::zero());
    SymmetryCatalog {
        name: "standard".into(),
        operator: PrintedOperator::Standard.operator(),
        generators: vec![
            g1(1.0),
            g1(-1.0),
            g3.clone(),
            g4(1.0),
            g4(-1.0),
            GeneratorField::pde("G6", Expr::zero(), Expr::zero(), u.clone()),
        ],
        reducer: Some("G4+".into()),
        creation: Some("G4-".into()),
        annihilation: Some("G4+".into()),
        energy: g3,
        printed: vec![
            exp(-0.5 * &i * &t - 0.5 * x.powi(2)),
            2.0 * &x * exp(-1.5 * &i * &t - 0.5 * x.powi(2)),
        ],
        k: 1.0,
    }
}

/// `f1 = g_x`, `f2 = g_t - k^2 x^2 / 2` for a gauge potential `g(t, x)`.
pub fn gauge_functions(k: f64, g: &Expr) -> (Expr, Expr) {
    (g.diff("x"), g.diff("t") - 0.5 * k * k * sym("x").powi(2))
}

/// The gauge-variant family for a gauge potential `g(t, x)`.
pub fn gauge_catalog(k: f64, g: &Expr) -> Result<SymmetryCatalog> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("k must be positive, got {k}")));
    }
    let (f1, f2) = gauge_functions(k, g);
    let (t, x, u) = (sym("t"), sym("x"), sym("u"));
    let i = Expr::i();
    let kt = k * &t;
    let (c1, s1) = (cos(&kt), sin(&kt));
    let (c2, s2) = (cos(2.0 * &kt), sin(2.0 * &kt));
    let kx = k * &x;
    let v = &f2 - 0.5 * k * k * x.powi(2);
    let xf = &i * &x * &f1 - 0.5;
    let mut gens = vec![
        GeneratorField::pde("G1", Expr::zero(), c1.clone(), (&c1 * &f1 - &s1 * &kx) * &i * &u),
        GeneratorField::pde("G2", Expr::zero(), -&s1, -((&s1 * &f1 + &c1 * &kx) * &i * &u)),
        GeneratorField::pde(
            "G3",
            Expr::one(),
            Expr::zero(),
            (&f2 + 0.5 * k * k * x.powi(2)) * &i * &u,
        ),
        GeneratorField::pde("G4", c2.clone(), -(&s2 * &kx), (&i * &c2 * &v - k * &s2 * &xf) * &u),
        GeneratorField::pde("G5", -&s2, -(&c2 * &kx), -((&i * &s2 * &v + k * &c2 * &xf) * &u)),
        GeneratorField::pde("G6", Expr::zero(), Expr::zero(), u.clone()),
    ];
    for s in [1.0, -1.0] {
        let sign = if s > 0.0 { "+" } else { "-" };
        let e1 = e_i(s * k);
        gens.push(GeneratorField::pde(
            format!("G1{sign}"),
            Expr::zero(),
            e1.clone(),
            &e1 * &i * (&f1 + s * &i * &kx) * &u,
        ));
        let e2 = e_i(2.0 * s * k);
        gens.push(GeneratorField::pde(
            format!("G4{sign}"),
            e2.clone(),
            &e2 * s * k * &i * &x,
            &e2 * &i * (&v + s * k * &xf) * &u,
        ));
    }
    // i G3, the energy operator
    let energy = GeneratorField::pde("iG3", i.clone(), Expr::zero(), -((&f2 + 0.5 * k * k * x.powi(2)) * &u));
    let ig = &i * g;
    Ok(SymmetryCatalog {
        name: "gauge".into(),
        operator: general_gauge_operator(&f1, &f2),
        generators: gens,
        reducer: Some("G1+".into()),
        creation: Some("G1-".into()),
        annihilation: Some("G1+".into()),
        energy,
        printed: vec![
            exp(-0.5 * k * &i * &t - 0.5 * k * x.powi(2) + &ig),
            -2.0 * k * &x * exp(-1.5 * k * &i * &t - 0.5 * k * x.powi(2) + &ig),
            (4.0 * k * k * x.powi(2) - 2.0 * k) * exp(-2.5 * k * &i * &t - 0.5 * k * x.powi(2) + &ig),
        ],
        k,
    })
}

/// Goldstein operators. Only the split ordering carries ladder generators.
pub fn goldstein_catalog(which: PrintedOperator) -> Result<SymmetryCatalog> {
    let (t, x, u) = (sym("t"), sym("x"), sym("u"));
    let i = Expr::i();
    let (prefix, time_coeff) = match which {
        PrintedOperator::NormalOrdered => ("F", Expr::one()),
        PrintedOperator::Weyl => ("S", Expr::one()),
        PrintedOperator::Split => ("D", i.clone()),
        PrintedOperator::Standard => return Ok(standard_catalog()),
    };
    let g1 = |s: f64| {
        GeneratorField::pde(
            format!("{prefix}1{}", if s > 0.0 { "+" } else { "-" }),
            e_i(2.0 * s) * s * &i,
            e_i(2.0 * s) * &x,
            e_i(2.0 * s) * (-0.5 + s * x.powi(-2)) * &u,
        )
    };
    let g3 = GeneratorField::pde(format!("{prefix}3"), time_coeff, Expr::zero(), Expr::zero());
    let scale = GeneratorField::pde(
        format!("{prefix}{}", if which == PrintedOperator::Split { 6 } else { 4 }),
        Expr::zero(),
        Expr::zero(),
        u.clone(),
    );
    let mut gens = vec![g1(1.0), g1(-1.0), g3.clone(), scale];
    let energy = GeneratorField::pde("iD3", i.clone(), Expr::zero(), Expr::zero());
    let mut cat = SymmetryCatalog {
        name: which.tag().into(),
        operator: which.operator(),
        generators: Vec::new(),
        reducer: None,
        creation: None,
        annihilation: None,
        energy,
        printed: Vec::new(),
        k: 1.0,
    };
    if which == PrintedOperator::Split {
        for s in [1.0, -1.0] {
            gens.push(GeneratorField::pde(
                format!("D4{}", if s > 0.0 { "+" } else { "-" }),
                Expr::zero(),
                e_i(s) * x.powi(2),
                e_i(s) * (-&x + s * x.recip()) * &u,
            ));
        }
        cat.reducer = Some("D4+".into());
        cat.creation = Some("D4-".into());
        cat.annihilation = Some("D4+".into());
        cat.printed = vec![x.recip() * exp(-0.5 * &i * &t - 0.5 * x.powi(-2))];
    }
    cat.generators = gens;
    Ok(cat)
}

/// `eta - xi^t u_t - xi^x u_x` with `u = s`.
pub fn evolutionary_representative(g: &GeneratorField, s: &Expr) -> Expr {
    let [ct, cx, cu] = &g.coeffs;
    cu.substitute("u", s) - ct * s.diff("t") - cx * s.diff("x")
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryVerdict {
    pub generator: String,
    pub solution: String,
    pub pass: bool,
}

/// Checks that each generator maps each basis solution to a solution.
pub fn verify_symmetry(
    op: &EvolutionOperator,
    g: &GeneratorField,
    basis: &[SolutionCatalogEntry],
    seed: u64,
    tol: f64,
) -> Result<Vec<SymmetryVerdict>> {
    if basis.is_empty() {
        return Err(Error::Usage("empty solution basis".into()));
    }
    if g.signature != crate::mechsys::Signature::Pde {
        return Err(Error::SignatureMismatch(format!(
            "{} is not a (t, x, u) generator",
            g.tag
        )));
    }
    basis
        .iter()
        .map(|entry| {
            let q = evolutionary_representative(g, &entry.expression);
            Ok(SymmetryVerdict {
                generator: g.tag.clone(),
                solution: entry.label.clone(),
                pass: solves(op, &q, seed, tol)?,
            })
        })
        .collect()
}

/// `s d_u` for a known solution `s`.
pub fn solution_generator(entry: &SolutionCatalogEntry) -> GeneratorField {
    GeneratorField::pde(
        format!("s[{}]", entry.label),
        Expr::zero(),
        Expr::zero(),
        entry.expression.clone(),
    )
}

fn far_points(domain: XDomain) -> ([f64; 2], f64) {
    match domain {
        XDomain::Line => ([-10.0, 10.0], 0.0),
        XDomain::HalfLine => ([1e-3, 1e3], 1.0),
    }
}

/// `c log(x)` with rational real `c`, as `x^c`.
fn log_power(term: &Expr) -> Option<Rational> {
    let factors = match term.node() {
        Node::Mul(fs) => fs.clone(),
        _ => vec![term.clone()],
    };
    let mut coeff = Complex64::new(1.0, 0.0);
    let mut seen_log = false;
    for f in &factors {
        if let Some(z) = f.as_const() {
            coeff *= z;
        } else if matches!(f.node(), Node::Apply(crate::symkernel::Func::Log, a) if a.as_symbol() == Some("x"))
            && !seen_log
        {
            seen_log = true;
        } else {
            return None;
        }
    }
    if !seen_log || coeff.im != 0.0 {
        return None;
    }
    Rational::approximate(coeff.re, 64, 1e-14)
}

fn snap(z: Complex64) -> Complex64 {
    let s = |v: f64| Rational::approximate(v, 64, 1e-10).map_or(v, Rational::to_f64);
    Complex64::new(s(z.re), s(z.im))
}

/// Ground state from the invariants of `g`: `u = h(t) exp(int phi/xi^x dx)`
/// with `h = exp(-i lambda t)`.
pub fn similarity_reduce(op: &EvolutionOperator, g: &GeneratorField, seed: u64) -> Result<SolutionCatalogEntry> {
    let [ct, cx, cu] = &g.coeffs;
    if !ct.is_zero() {
        return Err(Error::Unsupported(format!("{} has a d_t component", g.tag)));
    }
    if cx.is_zero() {
        return Err(Error::Unsupported(format!("{} has no d_x component", g.tag)));
    }
    let phi = cu.diff("u");
    if phi.contains("u") {
        return Err(Error::Unsupported(format!("{} is not linear in u", g.tag)));
    }
    let integrand = &phi / cx;
    let integral = antiderivative(&integrand, "x").ok_or_else(|| Error::ReductionFailure {
        residual: integrand.clone(),
    })?;
    let mut factors = Vec::new();
    let mut rest = Vec::new();
    for term in integral.terms() {
        match log_power(&term) {
            Some(r) => factors.push(Expr::pow(sym("x"), r)),
            None => rest.push(term),
        }
    }
    factors.push(exp(Expr::add(rest)));
    let profile = Expr::mul(factors);

    let (far, mid) = far_points(op.domain);
    let at = |x: f64| profile.eval(&Bindings::from([("t", 0.3), ("x", x)])).map(|z| z.norm());
    let reference = at(mid)?;
    for x in far {
        if at(x)? > 1e-2 * reference {
            return Err(Error::Domain(format!(
                "characteristic of {} does not decay at x = {x}",
                g.tag
            )));
        }
    }

    let r = (op.spatial().apply(&profile) - 2.0 * Expr::i() * profile.diff("t")) / &profile;
    let s = op.domain.sampler(seed);
    if !s.is_zero_rel(&r.diff("x"), RESIDUAL_TOL)? || !s.is_zero_rel(&r.diff("t"), RESIDUAL_TOL)? {
        return Err(Error::ReductionFailure { residual: r });
    }
    let (b, _) = s.points(&[&r])?.into_iter().next().expect("points is non-empty");
    let lambda = snap(r.eval(&b)? / 2.0);
    let u = exp(-Expr::i() * Expr::constant(lambda) * sym("t")) * profile;
    if !solves(op, &u, seed, RESIDUAL_TOL)? {
        return Err(Error::ReductionFailure {
            residual: apply(op, &u),
        });
    }
    let mut entry = SolutionCatalogEntry::new(u, op, "u0");
    entry.eigenvalue = Some(lambda);
    Ok(entry)
}

/// `lambda` with `[g3, s d_u] = lambda s d_u`.
pub fn eigenvalue_of(
    op: &EvolutionOperator,
    g3: &GeneratorField,
    entry: &SolutionCatalogEntry,
    seed: u64,
) -> Result<Complex64> {
    let bracket = symmetry_commutator(g3, &solution_generator(entry))?;
    let image = &bracket.coeffs[2];
    let s = op.domain.sampler(seed);
    match s.equiv_up_to_constant(image, &entry.expression, RESIDUAL_TOL)? {
        Some(c) => Ok(snap(c)),
        None => Err(Error::NonConstantRatio(format!("{} under {}", entry.label, g3.tag))),
    }
}

/// The `d_u` coefficient of `[g, s d_u]`, checked to solve the operator.
pub fn ladder_step(
    op: &EvolutionOperator,
    g: &GeneratorField,
    current: &SolutionCatalogEntry,
    label: &str,
    seed: u64,
) -> Result<SolutionCatalogEntry> {
    let bracket = symmetry_commutator(g, &solution_generator(current))?;
    if !bracket.coeffs[0].is_zero() || !bracket.coeffs[1].is_zero() {
        return Err(Error::Unsupported(format!(
            "{} does not preserve solution symmetries",
            g.tag
        )));
    }
    let next = bracket.coeffs[2].clone();
    let sampler = op.domain.sampler(seed);
    let scale = sampler.max_abs(&current.expression)?;
    if next.is_zero() || sampler.max_abs(&next)? <= 1e-12 * scale {
        return Err(Error::LadderTerminated);
    }
    if !solves(op, &next, seed, RESIDUAL_TOL)? {
        return Err(Error::ReductionFailure {
            residual: apply(op, &next),
        });
    }
    Ok(SolutionCatalogEntry::new(next, op, label))
}

#[derive(Clone, Debug, Serialize)]
pub struct Ladder {
    pub catalog: String,
    pub k: f64,
    pub entries: Vec<SolutionCatalogEntry>,
    /// Ratios to the printed solutions, where printed.
    pub printed_constants: Vec<Option<Complex64>>,
    /// The annihilation generator sends `u0` to zero.
    pub terminates: bool,
}

/// `u0` by reduction, then `n` creation steps, with eigenvalues.
pub fn build_ladder(cat: &SymmetryCatalog, n: usize, seed: u64) -> Result<Ladder> {
    let op = &cat.operator;
    let reducer = cat
        .reducer
        .as_deref()
        .ok_or_else(|| Error::Unsupported(format!("{} has no reducing generator", cat.name)))?;
    let mut entries = vec![similarity_reduce(op, cat.generator(reducer)?, seed)?];
    if n > 0 {
        let up = cat
            .creation
            .as_deref()
            .ok_or_else(|| Error::Unsupported(format!("{} has no creation generator", cat.name)))?;
        let up = cat.generator(up)?;
        for j in 1..=n {
            let next = ladder_step(op, up, &entries[j - 1], &format!("u{j}"), seed)?;
            entries.push(next);
        }
    }
    for e in &mut entries {
        e.eigenvalue = Some(eigenvalue_of(op, &cat.energy, e, seed)?);
        e.normalizable = Some(norm_probe(&e.expression, op.domain)?.normalizable);
    }
    let terminates = match cat.annihilation.as_deref() {
        Some(down) => matches!(
            ladder_step(op, cat.generator(down)?, &entries[0], "u-1", seed),
            Err(Error::LadderTerminated)
        ),
        None => false,
    };
    let sampler = op.domain.sampler(seed);
    let printed_constants = entries
        .iter()
        .enumerate()
        .map(|(j, e)| match cat.printed.get(j) {
            Some(p) => sampler.equiv_up_to_constant(&e.expression, p, RESIDUAL_TOL),
            None => Ok(None),
        })
        .collect::<Result<_>>()?;
    Ok(Ladder {
        catalog: cat.name.clone(),
        k: cat.k,
        entries,
        printed_constants,
        terminates,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NormProbe {
    /// `int |u|^2` at `t = 0` on the base window.
    pub base: f64,
    /// Mass in the next two decades beyond the upper end of the window.
    pub upper_tails: [f64; 2],
    /// Mass in the next two decades beyond the lower end (the negative
    /// side on the line, towards zero on the half line).
    pub lower_tails: [f64; 2],
    /// Relative change of the windowed norm between `t = 0` and `t = 1`.
    pub time_variation: f64,
    pub normalizable: bool,
    pub note: String,
}

const NORM_TOL: f64 = 1e-6;
const QUAD_NODES: usize = 20_000;

/// Composite Simpson of `|u|^2` over `[lo, hi]`, in `log|x|` when
/// `log_scale` (both ends then share a sign).
fn quad(u: &Expr, t: f64, lo: f64, hi: f64, log_scale: bool) -> Result<f64> {
    let sign = if lo < 0.0 { -1.0 } else { 1.0 };
    let (a, b) = if log_scale {
        let (p, q) = ((lo * sign).ln(), (hi * sign).ln());
        (p.min(q), p.max(q))
    } else {
        (lo, hi)
    };
    let n = QUAD_NODES;
    let h = (b - a) / n as f64;
    let mut sum = 0.0;
    for j in 0..=n {
        let s = a + j as f64 * h;
        let (x, jac) = if log_scale { (sign * s.exp(), s.exp()) } else { (s, 1.0) };
        let v = u.eval(&Bindings::from([("t", t), ("x", x)]))?.norm_sqr() * jac;
        let w = if j == 0 || j == n {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * v;
    }
    Ok(sum * h / 3.0)
}

/// Quadrature probe of `int |u|^2 dx`. Each end of the base window
/// (`[-10, 10]`, or `[1e-3, 50]` on the half line) is extended by two
/// decades; an end diverges when the second decade still carries mass and
/// is not at least half the size of the first.
pub fn norm_probe(u: &Expr, domain: XDomain) -> Result<NormProbe> {
    let (lo, hi) = match domain {
        XDomain::Line => (-10.0, 10.0),
        XDomain::HalfLine => (1e-3, 50.0),
    };
    let lower_step = match domain {
        XDomain::Line => 10.0,
        XDomain::HalfLine => 0.1,
    };
    let base = quad(u, 0.0, lo, hi, false)?;
    let upper_tails = [
        quad(u, 0.0, hi, hi * 10.0, true)?,
        quad(u, 0.0, hi * 10.0, hi * 100.0, true)?,
    ];
    let l1 = lo * lower_step;
    let lower_tails = [quad(u, 0.0, l1, lo, true)?, quad(u, 0.0, l1 * lower_step, l1, true)?];
    let later = quad(u, 1.0, lo, hi, false)?;
    let time_variation = (later - base).abs() / base.abs().max(f64::MIN_POSITIVE);
    let diverges = |[t1, t2]: [f64; 2]| t2 > NORM_TOL * base && t2 >= 0.5 * t1;
    let mut notes = Vec::new();
    if diverges(upper_tails) {
        notes.push(format!("integral diverges at the upper end (x = {hi} onwards)"));
    }
    if diverges(lower_tails) {
        notes.push(format!("integral diverges at the lower end (x = {lo} onwards)"));
    }
    if time_variation > NORM_TOL {
        notes.push(format!(
            "norm changes in time ({time_variation:.3e} between t = 0 and t = 1)"
        ));
    }
    let normalizable = notes.is_empty();
    Ok(NormProbe {
        base,
        upper_tails,
        lower_tails,
        time_variation,
        normalizable,
        note: if normalizable {
            "bounded, time independent".into()
        } else {
            notes.join("; ")
        },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NonphysicalReport {
    pub operator: String,
    /// Roots of the indicial polynomial for `(x e^{it})^alpha`.
    pub exponents: [Complex64; 2],
    /// `|Im alpha|` expected from the printed displays.
    pub printed_imag: Option<f64>,
    pub imag_parts_match: Option<bool>,
    /// Max residual of the printed two-term solution on `x in [0.3, 3]`.
    pub printed_residual: Option<f64>,
    pub printed_solves: Option<bool>,
    /// Max residual with the extracted exponents.
    pub extracted_residual: f64,
    pub extracted_solves: bool,
    pub norm: Vec<NormProbe>,
    pub physical: bool,
}

/// `exp(it/2 - 1/(2x^2)) (x e^{it})^alpha` for `x > 0`.
fn goldstein_ansatz(alpha: &Expr) -> Expr {
    let (t, x) = (sym("t"), sym("x"));
    exp(0.5 * Expr::i() * &t - 0.5 * x.powi(-2) + alpha * (log(&x) + Expr::i() * &t))
}

fn two_term(a: Complex64, b: Complex64) -> Expr {
    goldstein_ansatz(&Expr::constant(a)) + goldstein_ansatz(&Expr::constant(b))
}

/// Exponents of the two-term solutions of the Goldstein operators, the
/// printed solutions' residuals and a normalizability probe.
pub fn nonphysical_check(op: &EvolutionOperator, seed: u64) -> Result<NonphysicalReport> {
    if op.domain != XDomain::HalfLine {
        return Err(Error::Usage(format!("{} is not a Goldstein operator", op.tag)));
    }
    let alpha = sym("alpha");
    let u = goldstein_ansatz(&alpha);
    let ratio = apply(op, &u) / &u;
    let s = Sampler::new(seed).range("x", 0.3, 3.0).range("t", -1.0, 1.0);
    let at = |a: f64| -> Result<Vec<Complex64>> {
        let r = ratio.substitute("alpha", &Expr::real(a));
        Ok(s.points(&[&r])?.into_iter().map(|(_, v)| v[0]).collect())
    };
    // ratio = q(x, t) (alpha^2 + c1 alpha + c0) when the ansatz separates
    let (r0, r1, rm) = (at(0.0)?, at(1.0)?, at(-1.0)?);
    let mut monic = Vec::with_capacity(r0.len());
    for j in 0..r0.len() {
        let c2 = (r1[j] + rm[j]) / 2.0 - r0[j];
        if c2.norm() < 1e-12 {
            return Err(Error::ReductionFailure { residual: ratio });
        }
        monic.push(((r1[j] - rm[j]) / (2.0 * c2), r0[j] / c2));
    }
    let (c1, c0) = monic[0];
    let c2 = Complex64::new(1.0, 0.0);
    if monic
        .iter()
        .any(|(b, c)| (b - c1).norm() > 1e-9 * (1.0 + c1.norm()) || (c - c0).norm() > 1e-9 * (1.0 + c0.norm()))
    {
        return Err(Error::ReductionFailure { residual: ratio });
    }
    let disc = (c1 * c1 - 4.0 * c2 * c0).sqrt();
    let mut roots = [(-c1 - disc) / (2.0 * c2), (-c1 + disc) / (2.0 * c2)];
    roots.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));

    let printed_imag = match op.tag.as_str() {
        "goldstein-normal" => Some(15f64.sqrt() / 2.0),
        "goldstein-weyl" => Some(3f64.sqrt() / 2.0),
        _ => None,
    };
    let residual_of = |sol: &Expr| s.max_abs(&apply(op, sol));
    let (printed_residual, printed_solves, imag_parts_match) = match printed_imag {
        Some(w) => {
            let printed = two_term(Complex64::new(-1.0, -w), Complex64::new(-1.0, w));
            let r = residual_of(&printed)?;
            let matched = (roots[0].im + w).abs() < 1e-10 && (roots[1].im - w).abs() < 1e-10;
            (Some(r), Some(solves(op, &printed, seed, 1e-10)?), Some(matched))
        }
        None => (None, None, None),
    };
    let extracted = two_term(roots[0], roots[1]);
    let extracted_residual = residual_of(&extracted)?;
    let norm = roots
        .iter()
        .map(|a| norm_probe(&goldstein_ansatz(&Expr::constant(*a)), XDomain::HalfLine))
        .collect::<Result<Vec<_>>>()?;
    let physical = norm.iter().any(|n| n.normalizable);
    Ok(NonphysicalReport {
        operator: op.tag.clone(),
        exponents: roots,
        printed_imag,
        imag_parts_match,
        printed_residual,
        printed_solves,
        extracted_residual,
        extracted_solves: solves(op, &extracted, seed, 1e-10)?,
        norm,
        physical,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumResult {
    pub interval: (f64, f64),
    pub nodes: usize,
    pub eigenvalues: Vec<f64>,
    pub boundary: &'static str,
}

/// Count of eigenvalues below `lambda` of the symmetric tridiagonal matrix
/// with diagonal `d` and constant off-diagonal `e`.
fn sturm_count(d: &[f64], e: f64, lambda: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (j, dj) in d.iter().enumerate() {
        let prev = if j == 0 { 0.0 } else { e * e / q };
        q = dj - lambda - prev;
        if q == 0.0 {
            q = f64::EPSILON * (dj.abs() + e.abs());
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest `count` eigenvalues of `-u''/2 + c u/2` on `interval` with
/// Dirichlet ends and `nodes` interior grid points.
pub fn fd_spectrum(op: &EvolutionOperator, interval: (f64, f64), nodes: usize, count: usize) -> Result<SpectrumResult> {
    if nodes < 10 {
        return Err(Error::Usage(format!("need at least 10 nodes, got {nodes}")));
    }
    let (lo, hi) = interval;
    if lo.is_nan() || hi.is_nan() || hi <= lo {
        return Err(Error::Usage(format!("empty interval [{lo}, {hi}]")));
    }
    let s = op.domain.sampler(1);
    if !s.equiv(&op.a, &-Expr::one(), 1e-12)? || !s.is_zero_rel(&op.b, 1e-12)? || op.c.contains("t") {
        return Err(Error::Unsupported(format!(
            "{} is not of the form -u_xx + c(x) u",
            op.tag
        )));
    }
    let h = (hi - lo) / (nodes + 1) as f64;
    let d = (1..=nodes)
        .map(|j| {
            let x = lo + j as f64 * h;
            Ok(1.0 / (h * h) + 0.5 * op.c.eval_real(&Bindings::from([("x", x)]), 1e-12)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let e = -0.5 / (h * h);
    let (mut gl, mut gu) = (f64::INFINITY, f64::NEG_INFINITY);
    for dj in &d {
        gl = gl.min(dj - 2.0 * e.abs());
        gu = gu.max(dj + 2.0 * e.abs());
    }
    let count = count.min(nodes);
    let eigenvalues = (0..count)
        .map(|m| {
            let (mut a, mut b) = (gl, gu);
            while b - a > 1e-13 * (1.0 + a.abs().max(b.abs())) {
                let mid = 0.5 * (a + b);
                if sturm_count(&d, e, mid) > m {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect();
    Ok(SpectrumResult {
        interval,
        nodes,
        eigenvalues,
        boundary: "Dirichlet",
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResidualSample {
    pub x: f64,
    pub t: f64,
    pub residual: f64,
}

/// `|apply(op, u)|` on a tensor grid.
pub fn residual_grid(
    op: &EvolutionOperator,
    u: &Expr,
    xs: (f64, f64, usize),
    ts: (f64, f64, usize),
) -> Result<Vec<ResidualSample>> {
    let r = apply(op, u);
    let lin = |(a, b, n): (f64, f64, usize), j: usize| {
        if n <= 1 {
            a
        } else {
            a + (b - a) * j as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(xs.2 * ts.2);
    for jt in 0..ts.2 {
        for jx in 0..xs.2 {
            let (x, t) = (lin(xs, jx), lin(ts, jt));
            let residual = r.eval(&Bindings::from([("x", x), ("t", t)]))?.norm();
            out.push(ResidualSample { x, t, residual });
        }
    }
    Ok(out)
}

/// `x,t,|residual|` rows with 17 significant digits.
pub fn write_residual_csv<W: Write>(rows: &[ResidualSample], mut w: W) -> Result<()> {
    writeln!(w, "x,t,|residual|")?;
    for r in rows {
        writeln!(w, "{:.16e},{:.16e},{:.16e}", r.x, r.t, r.residual)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_ground_state() {
        let cat = standard_catalog();
        let u0 = similarity_reduce(&cat.operator, cat.generator("G4+").unwrap(), 1).unwrap();
        assert_eq!(u0.eigenvalue, Some(Complex64::new(0.5, 0.0)));
        let c = cat
            .operator
            .domain
            .sampler(1)
            .equiv_up_to_constant(&u0.expression, &cat.printed[0], 1e-9)
            .unwrap();
        assert!(c.is_some());
    }

    #[test]
    fn growing_branch_rejected() {
        let cat = standard_catalog();
        assert!(matches!(
            similarity_reduce(&cat.operator, cat.generator("G4-").unwrap(), 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn box_spectrum() {
        let op = crate::quantize::general_gauge_operator(&Expr::zero(), &Expr::zero());
        let r = fd_spectrum(&op, (-std::f64::consts::PI, std::f64::consts::PI), 2000, 2).unwrap();
        // E_n = (n pi / L)^2 / 2 with L = 2 pi
        assert!((r.eigenvalues[0] - 0.125).abs() < 1e-5);
        assert!((r.eigenvalues[1] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn too_few_nodes() {
        assert!(matches!(
            fd_spectrum(&PrintedOperator::Standard.operator(), (-1.0, 1.0), 9, 1),
            Err(Error::Usage(_))
        ));
    }
}
