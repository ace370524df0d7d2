use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eval::Bindings;
use super::expr::Expr;
use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 0x5eed_1e4c;
pub const DEFAULT_SAMPLES: usize = 32;
pub const DEFAULT_RANGE: (f64, f64) = (0.3, 2.0);

/// Rejection attempts per requested sample.
const ATTEMPT_FACTOR: usize = 20;

/// A declared singular set: points where the guard fails are discarded.
#[derive(Clone, Debug)]
pub enum Guard {
    /// |e| > margin
    NonZero(Expr, f64),
    /// Re e > margin and |Im e| small
    Positive(Expr, f64),
}

impl Guard {
    fn expr(&self) -> &Expr {
        match self {
            Guard::NonZero(e, _) | Guard::Positive(e, _) => e,
        }
    }

    fn admits(&self, b: &Bindings) -> bool {
        match self {
            Guard::NonZero(e, m) => e.eval(b).map(|z| z.norm() > *m).unwrap_or(false),
            Guard::Positive(e, m) => e
                .eval(b)
                .map(|z| z.re > *m && z.im.abs() <= 1e-12 * (1.0 + z.re.abs()))
                .unwrap_or(false),
        }
    }
}

/// Deterministic random sampler for numeric identity testing.
#[derive(Clone, Debug)]
pub struct Sampler {
    seed: u64,
    samples: usize,
    default_range: (f64, f64),
    ranges: BTreeMap<String, (f64, f64)>,
    fixed: Bindings,
    guards: Vec<Guard>,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler::new(DEFAULT_SEED)
    }
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            seed,
            samples: DEFAULT_SAMPLES,
            default_range: DEFAULT_RANGE,
            ranges: BTreeMap::new(),
            fixed: Bindings::new(),
            guards: Vec::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn samples(mut self, n: usize) -> Self {
        self.samples = n.max(1);
        self
    }

    pub fn default_range(mut self, lo: f64, hi: f64) -> Self {
        self.default_range = (lo, hi);
        self
    }

    pub fn range(mut self, name: &str, lo: f64, hi: f64) -> Self {
        self.ranges.insert(name.to_string(), (lo, hi));
        self
    }

    pub fn fix(mut self, name: &str, value: impl Into<Complex64>) -> Self {
        self.fixed.set(name, value);
        self
    }

    pub fn nonzero(mut self, e: Expr, margin: f64) -> Self {
        self.guards.push(Guard::NonZero(e, margin));
        self
    }

    pub fn positive(mut self, e: Expr, margin: f64) -> Self {
        self.guards.push(Guard::Positive(e, margin));
        self
    }

    pub fn guard(mut self, g: Guard) -> Self {
        self.guards.push(g);
        self
    }

    fn symbols_of(&self, exprs: &[&Expr]) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let guard_exprs = self.guards.iter().map(Guard::expr);
        for e in exprs.iter().copied().chain(guard_exprs) {
            for s in e.free_symbols() {
                let s = s.to_string();
                if self.fixed.get(&s).is_none() && !out.contains(&s) {
                    out.push(s);
                }
            }
        }
        out.sort();
        out
    }

    /// Up to `samples` admissible points at which every expression evaluates.
    pub fn points(&self, exprs: &[&Expr]) -> Result<Vec<(Bindings, Vec<Complex64>)>> {
        let names = self.symbols_of(exprs);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let attempts = self.samples * ATTEMPT_FACTOR;
        let mut out = Vec::with_capacity(self.samples);
        for _ in 0..attempts {
            if out.len() == self.samples {
                break;
            }
            let mut b = self.fixed.clone();
            for n in &names {
                let (lo, hi) = self.ranges.get(n).copied().unwrap_or(self.default_range);
                b.set(n, rng.gen_range(lo..=hi));
            }
            if !self.guards.iter().all(|g| g.admits(&b)) {
                continue;
            }
            let vals: Result<Vec<Complex64>> = exprs.iter().map(|e| e.eval(&b)).collect();
            match vals {
                Ok(v) => out.push((b, v)),
                Err(Error::Pole { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        if out.is_empty() {
            return Err(Error::Inconclusive { attempts });
        }
        Ok(out)
    }

    /// `|a - b| <= tol (1 + |a|)` at every sampled point.
    pub fn equiv(&self, a: &Expr, b: &Expr, tol: f64) -> Result<bool> {
        let pts = self.points(&[a, b])?;
        Ok(pts
            .iter()
            .all(|(_, v)| (v[0] - v[1]).norm() <= tol * (1.0 + v[0].norm())))
    }

    /// The constant `c` with `a = c b`, when the ratio is constant.
    pub fn equiv_up_to_constant(&self, a: &Expr, b: &Expr, tol: f64) -> Result<Option<Complex64>> {
        let pts = self.points(&[a, b])?;
        let pivot = pts
            .iter()
            .max_by(|x, y| x.1[1].norm().total_cmp(&y.1[1].norm()))
            .expect("points is non-empty");
        if pivot.1[1].norm() == 0.0 {
            return Ok(None);
        }
        let c = pivot.1[0] / pivot.1[1];
        let ok = pts
            .iter()
            .all(|(_, v)| (v[0] - c * v[1]).norm() <= tol * (1.0 + v[0].norm()));
        Ok(ok.then_some(c))
    }

    /// Zero test relative to the magnitude of the top-level terms, so that
    /// cancellation between large terms is judged on the right scale.
    pub fn is_zero_rel(&self, e: &Expr, tol: f64) -> Result<bool> {
        let terms = e.terms();
        let refs: Vec<&Expr> = terms.iter().collect();
        if refs.is_empty() || e.is_zero() {
            return Ok(true);
        }
        let pts = self.points(&refs)?;
        Ok(pts.iter().all(|(_, v)| {
            let sum: Complex64 = v.iter().sum();
            let scale: f64 = v.iter().map(|z| z.norm()).sum();
            sum.norm() <= tol * (1.0 + scale)
        }))
    }

    /// Largest modulus over the sampled points.
    pub fn max_abs(&self, e: &Expr) -> Result<f64> {
        let pts = self.points(&[e])?;
        Ok(pts.iter().map(|(_, v)| v[0].norm()).fold(0.0, f64::max))
    }
}

/// Numeric equivalence with the default box and seed.
pub fn equiv(a: &Expr, b: &Expr, samples: usize, tol: f64) -> Result<bool> {
    Sampler::default().samples(samples).equiv(a, b, tol)
}

/// Constant-ratio test with the default box and seed.
pub fn equiv_up_to_constant(a: &Expr, b: &Expr, samples: usize, tol: f64) -> Result<Option<Complex64>> {
    Sampler::default().samples(samples).equiv_up_to_constant(a, b, tol)
}

#[cfg(test)]
mod tests {
    use super::super::ops::{cos, exp, log, sin, sym};
    use super::*;

    #[test]
    fn pythagoras() {
        let kt = sym("k") * sym("t");
        let lhs = sin(&kt).powi(2) + cos(&kt).powi(2);
        assert!(equiv(&lhs, &Expr::one(), 16, 1e-12).unwrap());
    }

    #[test]
    fn shifted_is_not_equivalent() {
        let x = sym("x");
        assert!(!equiv(&x, &(&x + 1.0), 16, 1e-9).unwrap());
    }

    #[test]
    fn constant_ratio() {
        let x = sym("x");
        let g = exp(-(x.powi(2)) / 2.0);
        let c = equiv_up_to_constant(&(2.0 * &x * &g), &(&x * &g), 16, 1e-12)
            .unwrap()
            .unwrap();
        assert!((c - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        assert!(equiv_up_to_constant(&sin(&x), &cos(&x), 16, 1e-9).unwrap().is_none());
    }

    #[test]
    fn all_poles_is_inconclusive() {
        let e = log(sym("x"));
        let s = Sampler::default().range("x", 0.0, 0.0);
        assert!(matches!(s.equiv(&e, &e, 1e-9), Err(Error::Inconclusive { .. })));
    }

    #[test]
    fn guards_filter_points() {
        let x = sym("x");
        let s = Sampler::default().range("x", -1.0, 1.0).positive(x.clone(), 0.1);
        let pts = s.points(&[&x]).unwrap();
        assert!(pts.iter().all(|(_, v)| v[0].re > 0.1));
    }

    #[test]
    fn deterministic() {
        let x = sym("x");
        let a = Sampler::new(7).points(&[&x]).unwrap();
        let b = Sampler::new(7).points(&[&x]).unwrap();
        let av: Vec<_> = a.iter().map(|p| p.1[0]).collect();
        let bv: Vec<_> = b.iter().map(|p| p.1[0]).collect();
        assert_eq!(av, bv);
    }
}
