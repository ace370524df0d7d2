//! The simple harmonic oscillator as a first-order system, its eight point
//! symmetries, and a fixed-step RK4 integrator used as a numerical oracle.

use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::symkernel::ops::{cos, sin, sym};
use crate::symkernel::{Bindings, Expr, Sampler};

/// Coordinates a generator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Signature {
    /// (t, u1, u2)
    Phase,
    /// (t, x, u)
    Pde,
}

impl Signature {
    pub fn coords(self) -> [&'static str; 3] {
        match self {
            Signature::Phase => ["t", "u1", "u2"],
            Signature::Pde => ["t", "x", "u"],
        }
    }
}

/// `u1' = rhs[0]`, `u2' = rhs[1]`, with `k` baked into the expressions.
#[derive(Clone, Debug)]
pub struct FirstOrderSystem {
    pub k: f64,
    pub rhs: [Expr; 2],
}

impl FirstOrderSystem {
    /// Row `(1, u1', u2')` of the associated vector field.
    pub fn vector_field(&self) -> [Expr; 3] {
        [Expr::one(), self.rhs[0].clone(), self.rhs[1].clone()]
    }

    /// Applies the vector field as a derivation.
    pub fn derive(&self, f: &Expr) -> Expr {
        let v = self.vector_field();
        let c = Signature::Phase.coords();
        Expr::add((0..3).map(|i| &v[i] * f.diff(c[i])).collect())
    }

    fn eval_rhs(&self, t: f64, y: [f64; 2]) -> Result<[f64; 2]> {
        let b = Bindings::from([("t", t), ("u1", y[0]), ("u2", y[1])]);
        Ok([self.rhs[0].eval_real(&b, 1e-12)?, self.rhs[1].eval_real(&b, 1e-12)?])
    }
}

/// `u1' = u2`, `u2' = -k^2 u1`.
pub fn sho_system(k: f64) -> Result<FirstOrderSystem> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("k must be positive, got {k}")));
    }
    Ok(FirstOrderSystem {
        k,
        rhs: [sym("u2"), -(k * k) * sym("u1")],
    })
}

/// A point symmetry generator in one of the two coordinate signatures.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorField {
    pub tag: String,
    pub signature: Signature,
    pub coeffs: [Expr; 3],
}

impl GeneratorField {
    pub fn new(tag: impl Into<String>, signature: Signature, coeffs: [Expr; 3]) -> Self {
        GeneratorField {
            tag: tag.into(),
            signature,
            coeffs,
        }
    }

    pub fn phase(tag: impl Into<String>, ct: Expr, c1: Expr, c2: Expr) -> Self {
        Self::new(tag, Signature::Phase, [ct, c1, c2])
    }

    pub fn pde(tag: impl Into<String>, ct: Expr, cx: Expr, cu: Expr) -> Self {
        Self::new(tag, Signature::Pde, [ct, cx, cu])
    }

    /// The generator acting on a function as a derivation.
    pub fn apply(&self, f: &Expr) -> Expr {
        let c = self.signature.coords();
        Expr::add(
            (0..3)
                .filter(|&i| !self.coeffs[i].is_zero())
                .map(|i| &self.coeffs[i] * f.diff(c[i]))
                .collect(),
        )
    }

    pub fn scaled(&self, c: impl Into<Expr>, tag: impl Into<String>) -> Self {
        let c = c.into();
        let coeffs = self.coeffs.clone().map(|e| &c * e);
        Self::new(tag, self.signature, coeffs)
    }

    /// Linear combination `sum c_i g_i`; all generators must share a signature.
    pub fn combine(tag: impl Into<String>, parts: &[(Expr, &GeneratorField)]) -> Result<Self> {
        let sig = parts
            .first()
            .ok_or_else(|| Error::Usage("empty combination".into()))?
            .1
            .signature;
        let mut coeffs = [Expr::zero(), Expr::zero(), Expr::zero()];
        for (c, g) in parts {
            if g.signature != sig {
                return Err(Error::SignatureMismatch(format!("{} in combination", g.tag)));
            }
            for (acc, gc) in coeffs.iter_mut().zip(&g.coeffs) {
                *acc = &*acc + c * gc;
            }
        }
        Ok(Self::new(tag, sig, coeffs))
    }

    pub fn is_zero_field(&self) -> bool {
        self.coeffs.iter().all(Expr::is_zero)
    }
}

impl fmt::Display for GeneratorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.signature.coords();
        write!(f, "{}: ", self.tag)?;
        let mut first = true;
        for (coeff, var) in self.coeffs.iter().zip(c) {
            if coeff.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            write!(f, "({coeff})d_{var}")?;
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Lie bracket `[a, b]^i = a(b^i) - b(a^i)`.
pub fn symmetry_commutator(a: &GeneratorField, b: &GeneratorField) -> Result<GeneratorField> {
    if a.signature != b.signature {
        return Err(Error::SignatureMismatch(format!(
            "{} is {:?}, {} is {:?}",
            a.tag, a.signature, b.tag, b.signature
        )));
    }
    let coeffs = [0, 1, 2].map(|i| a.apply(&b.coeffs[i]) - b.apply(&a.coeffs[i]));
    Ok(GeneratorField::new(
        format!("[{},{}]", a.tag, b.tag),
        a.signature,
        coeffs,
    ))
}

fn kt(k: f64, m: f64) -> Expr {
    (k * m) * sym("t")
}

/// The eight point symmetries of `q'' + k^2 q = 0` in phase-space form,
/// entered exactly as printed, including their `d_u2` components.
pub fn symmetry_catalog(k: f64) -> Result<Vec<GeneratorField>> {
    sho_system(k)?;
    let (u1, u2) = (sym("u1"), sym("u2"));
    let (c1, s1) = (cos(kt(k, 1.0)), sin(kt(k, 1.0)));
    let (c2, s2) = (cos(kt(k, 2.0)), sin(kt(k, 2.0)));
    let k2 = k * k;
    let z = Expr::zero;
    Ok(vec![
        GeneratorField::phase("G1", z(), c1.clone(), -k * &s1),
        GeneratorField::phase("G2", z(), s1.clone(), k * &c1),
        GeneratorField::phase("G3", z(), u1.clone(), u2.clone()),
        GeneratorField::phase("G4", Expr::one(), z(), z()),
        GeneratorField::phase(
            "G5",
            c2.clone(),
            -k * &u1 * &s2,
            -((2.0 * k2) * &u1 * &c2 - k * &u2 * &s2),
        ),
        GeneratorField::phase(
            "G6",
            s2.clone(),
            k * &u1 * &c2,
            -((2.0 * k2) * &u1 * &s2 + k * &u2 * &c2),
        ),
        GeneratorField::phase(
            "G7",
            &u1 * &c1,
            -k * u1.powi(2) * &s1,
            -(k2 * u1.powi(2) * &c1 + k * &u1 * &u2 * &c1 + u2.powi(2) * &c1),
        ),
        GeneratorField::phase(
            "G8",
            &u1 * &s1,
            k * u1.powi(2) * &c1,
            -(k2 * u1.powi(2) * &c1 - k * &u1 * &u2 * &c1 + u2.powi(2) * &s1),
        ),
    ])
}

/// First-prolongation coefficient `D eta - u2 D xi` on solutions.
pub fn prolonged_u2(sys: &FirstOrderSystem, g: &GeneratorField) -> Expr {
    let (xi, eta) = (&g.coeffs[0], &g.coeffs[1]);
    sys.derive(eta) - sym("u2") * sys.derive(xi)
}

/// The catalog with each `d_u2` component replaced by the first
/// prolongation of its `(d_t, d_u1)` part.
pub fn prolonged_catalog(k: f64) -> Result<Vec<GeneratorField>> {
    let sys = sho_system(k)?;
    Ok(symmetry_catalog(k)?
        .into_iter()
        .map(|g| {
            let c2 = prolonged_u2(&sys, &g);
            GeneratorField::phase(g.tag.clone(), g.coeffs[0].clone(), g.coeffs[1].clone(), c2)
        })
        .collect())
}

/// Second-order symmetry defect `eta2 + k^2 eta` with `u2' = -k^2 u1`
/// substituted; vanishes for a point symmetry of the oscillator.
pub fn symmetry_defect(sys: &FirstOrderSystem, g: &GeneratorField) -> Expr {
    let eta1 = prolonged_u2(sys, g);
    let eta2 = sys.derive(&eta1) - &sys.rhs[1] * sys.derive(&g.coeffs[0]);
    let k2 = sys.k * sys.k;
    eta2 + k2 * &g.coeffs[1]
}

/// Phase-space condition `[X, G] + X(xi) X = 0` using all three printed
/// components of `g`.
pub fn phase_space_defect(sys: &FirstOrderSystem, g: &GeneratorField) -> Result<[Expr; 3]> {
    let v = sys.vector_field();
    let x = GeneratorField::phase("X", v[0].clone(), v[1].clone(), v[2].clone());
    let br = symmetry_commutator(&x, g)?;
    let lam = sys.derive(&g.coeffs[0]);
    Ok([0, 1, 2].map(|i| &br.coeffs[i] + &lam * &v[i]))
}

/// Outcome of the prolongation checks for one generator.
#[derive(Clone, Debug, Serialize)]
pub struct ProlongationCheck {
    pub tag: String,
    /// max |eta2 + k^2 eta| over the sampled points
    pub defect_max: f64,
    /// max |printed d_u2 component - first prolongation|
    pub u2_component_max: f64,
    pub defect_ok: bool,
    pub u2_component_ok: bool,
}

/// Evaluates both defects at trajectory nodes.
pub fn prolongation_check(
    sys: &FirstOrderSystem,
    g: &GeneratorField,
    points: &[Bindings],
    tol: f64,
) -> Result<ProlongationCheck> {
    let defect = symmetry_defect(sys, g);
    let comp = &g.coeffs[2] - prolonged_u2(sys, g);
    let mut dmax: f64 = 0.0;
    let mut cmax: f64 = 0.0;
    for b in points {
        dmax = dmax.max(defect.eval(b)?.norm());
        cmax = cmax.max(comp.eval(b)?.norm());
    }
    Ok(ProlongationCheck {
        tag: g.tag.clone(),
        defect_max: dmax,
        u2_component_max: cmax,
        defect_ok: dmax <= tol,
        u2_component_ok: cmax <= tol,
    })
}

/// Numerical solution on a uniform grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub t0: f64,
    pub dt: f64,
    pub k: f64,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub method: &'static str,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.u1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u1.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn state(&self, i: usize) -> (f64, f64, f64) {
        (self.time(i), self.u1[i], self.u2[i])
    }

    pub fn bindings(&self, i: usize) -> Bindings {
        let (t, a, b) = self.state(i);
        Bindings::from([("t", t), ("u1", a), ("u2", b)])
    }

    /// CSV with header `t,u1,u2` and 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,u1,u2")?;
        for i in 0..self.len() {
            let (t, a, b) = self.state(i);
            writeln!(w, "{t:.16e},{a:.16e},{b:.16e}")?;
        }
        Ok(())
    }
}

/// Classical fixed-step RK4 over `t_span`; the step is shrunk so that the
/// grid ends exactly at `t_span.1`.
pub fn integrate(sys: &FirstOrderSystem, initial: [f64; 2], t_span: (f64, f64), dt: f64) -> Result<Trajectory> {
    let span = t_span.1 - t_span.0;
    if dt.is_nan() || span.is_nan() || dt <= 0.0 || span < dt {
        return Err(Error::InvalidParameter(format!(
            "need dt > 0 and span >= dt, got dt = {dt}, span = {span}"
        )));
    }
    let n = (span / dt).ceil() as usize;
    let h = span / n as f64;
    let mut u1 = Vec::with_capacity(n + 1);
    let mut u2 = Vec::with_capacity(n + 1);
    let mut y = initial;
    u1.push(y[0]);
    u2.push(y[1]);
    let axpy = |y: [f64; 2], a: f64, k: [f64; 2]| [y[0] + a * k[0], y[1] + a * k[1]];
    for i in 0..n {
        let t = t_span.0 + i as f64 * h;
        let step = || -> Result<[f64; 2]> {
            let k1 = sys.eval_rhs(t, y)?;
            let k2 = sys.eval_rhs(t + h / 2.0, axpy(y, h / 2.0, k1))?;
            let k3 = sys.eval_rhs(t + h / 2.0, axpy(y, h / 2.0, k2))?;
            let k4 = sys.eval_rhs(t + h, axpy(y, h, k3))?;
            Ok([0, 1].map(|j| y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])))
        };
        let next = step().map_err(|_| Error::Divergence { last_good_t: t })?;
        if !(next[0].is_finite() && next[1].is_finite()) {
            return Err(Error::Divergence { last_good_t: t });
        }
        y = next;
        u1.push(y[0]);
        u2.push(y[1]);
    }
    Ok(Trajectory {
        t0: t_span.0,
        dt: h,
        k: sys.k,
        u1,
        u2,
        method: "rk4",
    })
}

/// Evenly spread node bindings, at most `count` of them.
pub fn sample_nodes(traj: &Trajectory, count: usize) -> Vec<Bindings> {
    let n = traj.len();
    let count = count.clamp(2, n.max(2));
    (0..count).map(|j| traj.bindings(j * (n - 1) / (count - 1))).collect()
}

/// Whether a generator is identically zero under sampling.
pub fn field_vanishes(g: &GeneratorField, sampler: &Sampler, tol: f64) -> Result<bool> {
    for c in &g.coeffs {
        if !c.is_zero() && sampler.max_abs(c)? > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_degenerate_k() {
        assert!(sho_system(0.0).is_err());
        assert!(sho_system(-1.0).is_err());
        let s = sho_system(2.0).unwrap();
        assert_eq!(s.rhs[1], -4.0 * sym("u1"));
    }

    #[test]
    fn period_returns_home() {
        let s = sho_system(1.0).unwrap();
        let tr = integrate(&s, [1.0, 0.0], (0.0, 2.0 * PI), 1e-3).unwrap();
        let last = tr.len() - 1;
        assert!((tr.u1[last] - 1.0).abs() < 1e-8);
        assert!(tr.u2[last].abs() < 1e-8);
        assert!((tr.time(last) - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn csv_header_and_precision() {
        let s = sho_system(1.0).unwrap();
        let tr = integrate(&s, [1.0, 0.0], (0.0, 0.002), 1e-3).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,u1,u2"));
        let row: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
        let mantissa = row[1].split('e').next().unwrap().replace(['.', '-'], "");
        assert_eq!(mantissa.len(), 17);
    }

    #[test]
    fn commutator_of_catalog_entries() {
        let cat = symmetry_catalog(1.0).unwrap();
        let br = symmetry_commutator(&cat[3], &cat[0]).unwrap();
        // [d_t, G1] = -k G2
        for i in 0..3 {
            assert_eq!(br.coeffs[i], -1.0 * &cat[1].coeffs[i]);
        }
        assert!(symmetry_commutator(&cat[2], &cat[2]).unwrap().is_zero_field());
    }

    #[test]
    fn mixed_signatures_rejected() {
        let a = GeneratorField::phase("a", Expr::one(), Expr::zero(), Expr::zero());
        let b = GeneratorField::pde("b", Expr::one(), Expr::zero(), Expr::zero());
        assert!(matches!(symmetry_commutator(&a, &b), Err(Error::SignatureMismatch(_))));
    }
}
