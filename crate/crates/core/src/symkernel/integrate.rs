//! A fixed table of antiderivatives. Not a general integrator: anything
//! outside the table yields `None`.

use super::expr::{Expr, Func, Node};
use super::ops::{cos, log, sin};
use super::rational::Rational;

/// `(a, b)` with `e = a*var + b`, when `e` is linear in `var`.
fn linear_in(e: &Expr, var: &str) -> Option<(Expr, Expr)> {
    let a = e.diff(var);
    if a.contains(var) {
        return None;
    }
    let b = e - &a * Expr::sym(var);
    (!b.contains(var)).then_some((a, b))
}

fn split_constant(term: &Expr, var: &str) -> (Expr, Expr) {
    match term.node() {
        Node::Mul(fs) => {
            let (dep, indep): (Vec<Expr>, Vec<Expr>) = fs.iter().cloned().partition(|f| f.contains(var));
            (Expr::mul(indep), Expr::mul(dep))
        }
        _ if term.contains(var) => (Expr::one(), term.clone()),
        _ => (term.clone(), Expr::one()),
    }
}

fn integrate_factor(f: &Expr, var: &str) -> Option<Expr> {
    let v = Expr::sym(var);
    match f.node() {
        Node::Const(_) => Some(f * &v),
        Node::Sym(s) if &**s == var => Some(v.powi(2) / 2.0),
        Node::Pow(b, r) if b.as_symbol() == Some(var) => {
            if *r == -Rational::ONE {
                Some(log(&v))
            } else {
                let r1 = *r + Rational::ONE;
                Some(Expr::pow(v, r1) / r1.to_f64())
            }
        }
        Node::Apply(func, arg) => {
            let (a, _) = linear_in(arg, var)?;
            if a.is_zero() {
                return None;
            }
            match func {
                Func::Exp => Some(f / &a),
                Func::Sin => Some(-cos(arg) / &a),
                Func::Cos => Some(sin(arg) / &a),
                _ => None,
            }
        }
        _ => None,
    }
}

/// Antiderivative of `e` in `var` from the built-in table: sums of
/// `c * var^n`, `c / var`, `c * exp(a var + b)`, `c * sin(a var + b)`,
/// `c * cos(a var + b)` with `c` free of `var`.
pub fn antiderivative(e: &Expr, var: &str) -> Option<Expr> {
    if !e.contains(var) {
        return Some(e * Expr::sym(var));
    }
    let mut out = Vec::new();
    for t in e.terms() {
        let (c, dep) = split_constant(&t, var);
        out.push(c * integrate_factor(&dep, var)?);
    }
    Some(Expr::add(out))
}
