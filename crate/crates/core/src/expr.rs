//! Expression trees over rational literals and named coordinates, compiled
//! into jets by structural recursion.

use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::jet::{Jet, JetSpace};
use crate::scalar::Scalar;

/// A rational-function expression in the variables `x1..xn`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    /// Exact rational literal.
    Rat(BigRational),
    /// Coordinate `x_i`, 1-based.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Integer power; the exponent is a plain non-negative integer.
    Pow(Box<Expr>, u32),
}

#[allow(clippy::should_implement_trait)] // builder methods, not arithmetic on Expr values
impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Rat(BigRational::from_integer(v.into()))
    }

    pub fn rat(q: BigRational) -> Expr {
        Expr::Rat(q)
    }

    pub fn var(i: usize) -> Expr {
        assert!(i >= 1, "variables are 1-based");
        Expr::Var(i)
    }

    pub fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }

    pub fn add(self, other: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(other))
    }

    pub fn sub(self, other: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(other))
    }

    pub fn mul(self, other: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(other))
    }

    pub fn div(self, other: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(other))
    }

    pub fn pow(self, e: u32) -> Expr {
        Expr::Pow(Box::new(self), e)
    }

    /// Taylor-expands the expression at the space's base point. Fails when a
    /// quotient's denominator vanishes there, naming the subexpression.
    pub fn compile<T: Scalar>(&self, space: &JetSpace<T>) -> Result<Jet<T>> {
        match self {
            Expr::Rat(q) => Ok(space.rational(q)),
            Expr::Var(i) => {
                if *i < 1 || *i > space.n() {
                    return Err(Error::Validation(format!(
                        "variable x{} out of range (n = {})",
                        i,
                        space.n()
                    )));
                }
                Ok(space.coordinate(*i))
            }
            Expr::Neg(e) => Ok(e.compile(space)?.neg()),
            Expr::Add(a, b) => Ok(a.compile(space)?.add(&b.compile(space)?)),
            Expr::Sub(a, b) => Ok(a.compile(space)?.sub(&b.compile(space)?)),
            Expr::Mul(a, b) => Ok(a.compile(space)?.mul(&b.compile(space)?)),
            Expr::Div(a, b) => {
                let den = b.compile(space)?;
                if !den.is_unit() {
                    return Err(Error::PoleAtBasePoint { subexpr: b.to_string() });
                }
                Ok(a.compile(space)?.mul(&den.invert()?))
            }
            Expr::Pow(a, e) => Ok(a.compile(space)?.pow(*e)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Rat(..) | Expr::Var(..) => 5,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Prints in a form the parser reads back: negative literals render through
/// unary minus, and quotient denominators are always parenthesized so they
/// never fuse into a rational literal.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Rat(q) => {
                if q.is_negative() {
                    write!(f, "-{}", -q.clone())
                } else {
                    write!(f, "{q}")
                }
            }
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_child(f, 3)
            }
            Expr::Add(a, b) => {
                a.fmt_child(f, 1)?;
                write!(f, " + ")?;
                b.fmt_child(f, 2)
            }
            Expr::Sub(a, b) => {
                a.fmt_child(f, 1)?;
                write!(f, " - ")?;
                b.fmt_child(f, 2)
            }
            Expr::Mul(a, b) => {
                a.fmt_child(f, 2)?;
                write!(f, "*")?;
                b.fmt_child(f, 3)
            }
            Expr::Div(a, b) => {
                a.fmt_child(f, 2)?;
                write!(f, "/({b})")
            }
            Expr::Pow(a, e) => {
                a.fmt_child(f, 5)?;
                write!(f, "^{e}")
            }
        }
    }
}
