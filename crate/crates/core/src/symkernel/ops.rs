use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use super::expr::{Expr, Func};
use super::rational::Rational;

impl From<f64> for Expr {
    fn from(x: f64) -> Self {
        Expr::real(x)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Complex64> for Expr {
    fn from(z: Complex64) -> Self {
        Expr::constant(z)
    }
}

impl From<&Expr> for Expr {
    fn from(e: &Expr) -> Self {
        e.clone()
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                self.$method(rhs.clone())
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                self.clone().$method(rhs)
            }
        }
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                self.clone().$method(rhs.clone())
            }
        }
        impl $trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                self.$method(Expr::real(rhs))
            }
        }
        impl $trait<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                self.clone().$method(Expr::real(rhs))
            }
        }
        impl $trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::real(self).$method(rhs)
            }
        }
        impl $trait<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::real(self).$method(rhs.clone())
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::add(vec![a, b]));
binop!(Sub, sub, |a, b| Expr::add(vec![a, Expr::mul(vec![Expr::int(-1), b])]));
binop!(Mul, mul, |a, b| Expr::mul(vec![a, b]));
binop!(Div, div, |a, b| Expr::mul(vec![a, b.recip()]));

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul(vec![Expr::int(-1), self])
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -(self.clone())
    }
}

macro_rules! builtin {
    ($name:ident, $f:expr) => {
        pub fn $name(arg: impl Into<Expr>) -> Expr {
            Expr::apply($f, arg.into())
        }
    };
}

builtin!(exp, Func::Exp);
builtin!(sin, Func::Sin);
builtin!(cos, Func::Cos);
builtin!(tan, Func::Tan);
builtin!(cot, Func::Cot);
builtin!(sec, Func::Sec);
builtin!(csc, Func::Csc);
builtin!(log, Func::Log);
builtin!(arctan, Func::Arctan);

/// `base^(num/den)`.
pub fn pow(base: impl Into<Expr>, num: i64, den: i64) -> Expr {
    Expr::pow(base.into(), Rational::new(num, den))
}

/// Shorthand for a symbol.
pub fn sym(name: &str) -> Expr {
    Expr::sym(name)
}

/// Shorthand for a real constant.
pub fn num(x: f64) -> Expr {
    Expr::real(x)
}

/// The imaginary unit.
pub fn imag() -> Expr {
    Expr::i()
}
