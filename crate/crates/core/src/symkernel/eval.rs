use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;

use super::expr::{apply_numeric, Expr, Node};
use crate::error::{Error, Result};

/// Symbol values for evaluation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bindings {
    values: BTreeMap<String, Complex64>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: impl Into<Complex64>) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: impl Into<Complex64>) {
        self.values.insert(name.to_string(), value.into());
    }

    pub fn get(&self, name: &str) -> Option<Complex64> {
        self.values.get(name).copied()
    }

    pub fn merge(&mut self, other: &Bindings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), *v);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Complex64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<const N: usize> From<[(&str, f64); N]> for Bindings {
    fn from(pairs: [(&str, f64); N]) -> Self {
        let mut b = Bindings::new();
        for (k, v) in pairs {
            b.set(k, v);
        }
        b
    }
}

fn describe(e: &Expr) -> String {
    let s = e.to_string();
    if s.len() > 96 {
        format!("{}...", &s[..96])
    } else {
        s
    }
}

/// Trees at least this large are evaluated with a shared-subtree cache.
const MEMO_THRESHOLD: usize = 256;

impl Expr {
    /// Exact recursive complex evaluation. Every free symbol must be bound.
    pub fn eval(&self, b: &Bindings) -> Result<Complex64> {
        for s in self.free_symbols() {
            if b.get(s).is_none() {
                return Err(Error::UnboundSymbol(s.to_string()));
            }
        }
        if self.size() >= MEMO_THRESHOLD {
            let mut memo = HashMap::new();
            eval_rec(self, b, &mut Some(&mut memo))
        } else {
            eval_rec(self, b, &mut None)
        }
    }

    /// Evaluates and requires a real result within `imag_tol`.
    pub fn eval_real(&self, b: &Bindings, imag_tol: f64) -> Result<f64> {
        let z = self.eval(b)?;
        if z.im.abs() > imag_tol * (1.0 + z.re.abs()) {
            return Err(Error::Domain(format!(
                "expected a real value, got {z} for {}",
                describe(self)
            )));
        }
        Ok(z.re)
    }
}

/// Free-function form of [`Expr::eval`].
pub fn evaluate(e: &Expr, b: &Bindings) -> Result<Complex64> {
    e.eval(b)
}

type Memo<'a> = Option<&'a mut HashMap<*const Node, Complex64>>;

fn eval_rec(e: &Expr, b: &Bindings, memo: &mut Memo<'_>) -> Result<Complex64> {
    let key = e.node() as *const Node;
    if let Some(m) = memo.as_deref() {
        if let Some(v) = m.get(&key) {
            return Ok(*v);
        }
    }
    let v = match e.node() {
        Node::Const(z) => *z,
        Node::Sym(s) => b.get(s).ok_or_else(|| Error::UnboundSymbol(s.to_string()))?,
        Node::Add(ts) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in ts {
                acc += eval_rec(t, b, memo)?;
            }
            acc
        }
        Node::Mul(fs) => {
            let mut acc = Complex64::new(1.0, 0.0);
            for f in fs {
                acc *= eval_rec(f, b, memo)?;
            }
            acc
        }
        Node::Pow(base, r) => {
            let z = eval_rec(base, b, memo)?;
            if z.norm() == 0.0 {
                if r.to_f64() < 0.0 {
                    return Err(Error::Pole { location: describe(e) });
                }
                Complex64::new(0.0, 0.0)
            } else if r.is_integer() && r.numer().unsigned_abs() <= i32::MAX as u64 {
                z.powi(r.numer() as i32)
            } else {
                // principal branch
                z.powf(r.to_f64())
            }
        }
        Node::Apply(f, a) => {
            let z = eval_rec(a, b, memo)?;
            apply_numeric(*f, z).ok_or_else(|| Error::Pole { location: describe(e) })?
        }
    };
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::Pole { location: describe(e) });
    }
    if let Some(m) = memo.as_deref_mut() {
        m.insert(key, v);
    }
    Ok(v)
}
