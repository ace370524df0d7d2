//! Fully parenthesized prefix form of [`Expr`].
//!
//! ```text
//! expr     := number | symbol | complex | sum | product | power | call
//! number   := f64 literal, e.g. 2, -0.5, 1.0e-7
//! symbol   := [A-Za-z_][A-Za-z0-9_]*
//! complex  := "(complex" number number ")"
//! sum      := "(+" expr expr+ ")"
//! product  := "(*" expr expr+ ")"
//! power    := "(^" expr rational ")"
//! rational := integer | integer "/" integer
//! call     := "(" fname expr ")"
//! fname    := exp | sin | cos | tan | cot | sec | csc | log | arctan
//! ```
//!
//! Numbers are written with the shortest representation that round-trips.
//! Parsing goes through the canonicalizing constructors, so
//! `parse_prefix(&to_prefix(e)) == e` for canonical `e`.

use std::fmt::{self, Write as _};

use num_complex::Complex64;

use super::expr::{Expr, Func, Node};
use super::rational::Rational;
use crate::error::{Error, Result};

fn write_f64(out: &mut String, x: f64) {
    if x == x.trunc() && x.abs() < 1e15 {
        let _ = write!(out, "{}", x as i64);
    } else {
        let _ = write!(out, "{x:?}");
    }
}

fn write_prefix(e: &Expr, out: &mut String) {
    match e.node() {
        Node::Const(z) => {
            if z.im == 0.0 {
                write_f64(out, z.re);
            } else {
                out.push_str("(complex ");
                write_f64(out, z.re);
                out.push(' ');
                write_f64(out, z.im);
                out.push(')');
            }
        }
        Node::Sym(s) => out.push_str(s),
        Node::Add(ch) | Node::Mul(ch) => {
            out.push_str(if matches!(e.node(), Node::Add(_)) { "(+" } else { "(*" });
            for c in ch {
                out.push(' ');
                write_prefix(c, out);
            }
            out.push(')');
        }
        Node::Pow(b, r) => {
            out.push_str("(^ ");
            write_prefix(b, out);
            let _ = write!(out, " {r})");
        }
        Node::Apply(f, a) => {
            let _ = write!(out, "({} ", f.name());
            write_prefix(a, out);
            out.push(')');
        }
    }
}

/// Serializes to the prefix form.
pub fn to_prefix(e: &Expr) -> String {
    let mut s = String::new();
    write_prefix(e, &mut s);
    s
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokenize(src: &str) -> Vec<(usize, Tok<'_>)> {
    let mut toks = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => {
                toks.push((i, Tok::Open));
                i += 1;
            }
            b')' => {
                toks.push((i, Tok::Close));
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'(' && bytes[i] != b')' {
                    i += 1;
                }
                toks.push((start, Tok::Atom(&src[start..i])));
            }
        }
    }
    toks
}

struct Parser<'a> {
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    len: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let pos = self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.len);
        Err(Error::Parse { pos, msg: msg.into() })
    }

    fn next(&mut self) -> Option<Tok<'a>> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn peek(&self) -> Option<&Tok<'a>> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn expect_close(&mut self) -> Result<()> {
        match self.peek() {
            Some(Tok::Close) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err("expected `)`"),
        }
    }

    fn number(&self, s: &str) -> Result<f64> {
        match s.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => self.err(format!("bad number `{s}`")),
        }
    }

    fn rational(&self, s: &str) -> Result<Rational> {
        let parse = |t: &str| t.parse::<i64>().ok();
        let r = match s.split_once('/') {
            Some((n, d)) => parse(n).zip(parse(d)).filter(|(_, d)| *d != 0),
            None => parse(s).map(|n| (n, 1)),
        };
        match r {
            Some((n, d)) => Ok(Rational::new(n, d)),
            None => self.err(format!("bad rational exponent `{s}`")),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        match self.next() {
            None => self.err("unexpected end of input"),
            Some(Tok::Close) => {
                self.pos -= 1;
                self.err("unexpected `)`")
            }
            Some(Tok::Atom(a)) => {
                let first = a.as_bytes()[0];
                if first.is_ascii_digit() || matches!(first, b'-' | b'+' | b'.') {
                    Ok(Expr::real(self.number(a)?))
                } else if a.bytes().all(|c| c.is_ascii_alphanumeric() || c == b'_') {
                    Ok(Expr::sym(a))
                } else {
                    self.pos -= 1;
                    self.err(format!("bad symbol `{a}`"))
                }
            }
            Some(Tok::Open) => {
                let head = match self.next() {
                    Some(Tok::Atom(h)) => h,
                    _ => {
                        self.pos -= 1;
                        return self.err("expected operator after `(`");
                    }
                };
                let out = match head {
                    "+" | "*" => {
                        let mut ch = Vec::new();
                        while !matches!(self.peek(), Some(Tok::Close) | None) {
                            ch.push(self.expr()?);
                        }
                        if ch.len() < 2 {
                            return self.err(format!("`{head}` needs two or more operands"));
                        }
                        if head == "+" {
                            Expr::add(ch)
                        } else {
                            Expr::mul(ch)
                        }
                    }
                    "^" => {
                        let base = self.expr()?;
                        let r = match self.next() {
                            Some(Tok::Atom(r)) => self.rational(r)?,
                            _ => {
                                self.pos -= 1;
                                return self.err("expected rational exponent");
                            }
                        };
                        Expr::pow(base, r)
                    }
                    "complex" => {
                        let mut parts = [0.0; 2];
                        for p in &mut parts {
                            *p = match self.next() {
                                Some(Tok::Atom(s)) => self.number(s)?,
                                _ => {
                                    self.pos -= 1;
                                    return self.err("expected number in complex literal");
                                }
                            };
                        }
                        Expr::constant(Complex64::new(parts[0], parts[1]))
                    }
                    name => {
                        let f = Func::from_name(name).or_else(|_| {
                            self.pos -= 1;
                            self.err(format!("unknown function `{name}`"))
                        })?;
                        Expr::apply(f, self.expr()?)
                    }
                };
                self.expect_close()?;
                Ok(out)
            }
        }
    }
}

/// Parses the prefix form.
pub fn parse_prefix(src: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: tokenize(src),
        pos: 0,
        len: src.len(),
    };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Expr> {
        parse_prefix(s)
    }
}

// infix rendering, for humans only

fn fmt_const(z: Complex64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut s = String::new();
    if z.im == 0.0 {
        write_f64(&mut s, z.re);
    } else if z.re == 0.0 {
        write_f64(&mut s, z.im);
        s.push('i');
    } else {
        s.push('(');
        write_f64(&mut s, z.re);
        if z.im >= 0.0 {
            s.push('+');
        }
        write_f64(&mut s, z.im);
        s.push_str("i)");
    }
    f.write_str(&s)
}

fn fmt_atom(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e.node() {
        Node::Add(_) | Node::Mul(_) => write!(f, "({e})"),
        Node::Const(z) if z.re < 0.0 || (z.re != 0.0 && z.im != 0.0) || z.im < 0.0 => {
            write!(f, "({e})")
        }
        _ => write!(f, "{e}"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(z) => fmt_const(*z, f),
            Node::Sym(s) => f.write_str(s),
            Node::Add(ch) => {
                for (i, c) in ch.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
            Node::Mul(ch) => {
                for (i, c) in ch.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    fmt_atom(c, f)?;
                }
                Ok(())
            }
            Node::Pow(b, r) => {
                fmt_atom(b, f)?;
                if r.is_integer() && r.numer() >= 0 {
                    write!(f, "^{r}")
                } else {
                    write!(f, "^({r})")
                }
            }
            Node::Apply(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::ops::{exp, log, sym};
    use super::*;

    #[test]
    fn round_trip_ground_state() {
        let (t, x) = (sym("t"), sym("x"));
        let u0 = exp(-(Expr::i() * &t) / 2.0 - x.powi(2) / 2.0);
        let s = to_prefix(&u0);
        assert_eq!(parse_prefix(&s).unwrap(), u0);
    }

    #[test]
    fn rational_powers() {
        let e = parse_prefix("(^ (+ 1 x) -1/2)").unwrap();
        assert_eq!(to_prefix(&e), "(^ (+ 1 x) -1/2)");
    }

    #[test]
    fn functions_and_complex() {
        let e: Expr = "(* (complex 0 1) (log u1))".parse().unwrap();
        assert_eq!(e, Expr::i() * log(sym("u1")));
    }

    #[test]
    fn errors_carry_position() {
        let err = parse_prefix("(foo x)").unwrap_err();
        assert!(matches!(err, Error::Parse { pos: 1, .. }), "{err:?}");
        assert!(parse_prefix("(+ x").is_err());
        assert!(parse_prefix("x y").is_err());
        assert!(parse_prefix("(^ x 1/0)").is_err());
    }
}
