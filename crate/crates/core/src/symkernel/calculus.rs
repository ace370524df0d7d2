use std::collections::HashMap;

use super::expr::{Expr, Func, Node};
use super::ops::{cos, cot, csc, exp, sec, sin, tan};

impl Expr {
    /// Exact partial derivative; symbols other than `var` are constants.
    pub fn diff(&self, var: &str) -> Expr {
        if !self.contains(var) {
            return Expr::zero();
        }
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Sym(_) => Expr::one(),
            Node::Add(ts) => Expr::add(ts.iter().map(|t| t.diff(var)).collect()),
            Node::Mul(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for (i, f) in fs.iter().enumerate() {
                    if !f.contains(var) {
                        continue;
                    }
                    let mut factors: Vec<Expr> = fs.clone();
                    factors[i] = f.diff(var);
                    terms.push(Expr::mul(factors));
                }
                Expr::add(terms)
            }
            Node::Pow(b, r) => {
                let outer = Expr::pow(b.clone(), *r - super::Rational::ONE);
                Expr::mul(vec![Expr::real(r.to_f64()), outer, b.diff(var)])
            }
            Node::Apply(f, a) => {
                let outer = match f {
                    Func::Exp => exp(a),
                    Func::Sin => cos(a),
                    Func::Cos => -sin(a),
                    Func::Tan => sec(a).powi(2),
                    Func::Cot => -csc(a).powi(2),
                    Func::Sec => sec(a) * tan(a),
                    Func::Csc => -(csc(a) * cot(a)),
                    Func::Log => a.recip(),
                    Func::Arctan => (Expr::one() + a.powi(2)).recip(),
                };
                outer * a.diff(var)
            }
        }
    }

    /// Repeated partial derivative.
    pub fn diff_n(&self, var: &str, n: usize) -> Expr {
        (0..n).fold(self.clone(), |e, _| e.diff(var))
    }

    /// Replaces every occurrence of `var` by `replacement`.
    pub fn substitute(&self, var: &str, replacement: &Expr) -> Expr {
        self.substitute_all(&[(var, replacement.clone())])
    }

    /// Simultaneous substitution of several symbols.
    pub fn substitute_all(&self, subs: &[(&str, Expr)]) -> Expr {
        let map: HashMap<&str, &Expr> = subs.iter().map(|(k, v)| (*k, v)).collect();
        let mut memo: HashMap<*const (), Expr> = HashMap::new();
        subst_rec(self, &map, &mut memo)
    }
}

fn subst_rec(e: &Expr, map: &HashMap<&str, &Expr>, memo: &mut HashMap<*const (), Expr>) -> Expr {
    if !e.free_symbols().iter().any(|s| map.contains_key(&**s)) {
        return e.clone();
    }
    let key = e.node() as *const Node as *const ();
    if let Some(hit) = memo.get(&key) {
        return hit.clone();
    }
    let out = match e.node() {
        Node::Sym(s) => map.get(&**s).map(|r| (*r).clone()).unwrap_or_else(|| e.clone()),
        _ => e.map_children(|c| subst_rec(c, map, memo)),
    };
    memo.insert(key, out.clone());
    out
}

#[cfg(test)]
mod tests {
    use super::super::ops::sym;
    use super::*;

    #[test]
    fn power_rule() {
        let x = sym("x");
        assert_eq!(x.powi(2).diff("x"), 2.0 * &x);
    }

    #[test]
    fn chain_rule_gaussian() {
        let x = sym("x");
        let g = exp(-(x.powi(2)) / 2.0);
        assert_eq!(g.diff("x"), -(&x) * &g);
    }

    #[test]
    fn other_symbols_are_constants() {
        let e = sym("k") * sym("x");
        assert_eq!(e.diff("x"), sym("k"));
        assert!(e.diff("t").is_zero());
    }

    #[test]
    fn substitute_expands() {
        let x = sym("x");
        let t = sym("t");
        let got = x.powi(2).substitute("x", &(&t + 1.0));
        assert_eq!(got, t.powi(2) + 2.0 * &t + 1.0);
    }

    #[test]
    fn substitute_merges_exponentials() {
        let x = sym("x");
        let t = sym("t");
        let i = Expr::i();
        let e = exp(-(x.powi(2)) / 2.0) * sym("g");
        let got = e.substitute("g", &exp(-(&i * &t) / 2.0));
        let want = exp(-(&i * &t) / 2.0 - x.powi(2) / 2.0);
        assert_eq!(got, want);
    }
}
