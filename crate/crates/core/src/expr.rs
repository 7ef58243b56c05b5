//! Text expressions over scalars and the generators `x_i`, `d_i`, `a_i`.
//!
//! ```text
//! expr   := ["-"] term (("+" | "-") term)*
//! term   := factor ("*" factor)*
//! factor := atom ("^" int)?
//! atom   := rational | "q" ("^" int)? | gen | "(" expr ")"
//! gen    := ("x" | "d" | "a") posint
//! ```
//!
//! `a_i` is the Euler operator `1 + x_i∂_i`. Products are evaluated in the
//! written order. Integer exponents may be negative only on scalars.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::field::{CycField, CycScalar};
use crate::pbw::{DqAlgebra, Generator, PbwElement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("generator index {index} out of range for n = {n} at byte {offset}")]
    IndexOutOfRange { index: usize, n: usize, offset: usize },
    #[error("zero denominator at byte {offset}")]
    ZeroDenominator { offset: usize },
    #[error("negative power of a non-scalar")]
    NegativePower,
    #[error("division by zero")]
    DivisionByZero,
    #[error("generator {0} in a scalar expression")]
    NotScalar(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Rational(BigRational),
    /// `q^e`.
    Q(i64),
    Gen(Generator),
    /// Signed terms; `true` marks subtraction.
    Sum(Vec<(bool, Expr)>),
    Product(Vec<Expr>),
    Power(Box<Expr>, i64),
}

impl Expr {
    fn needs_parens_as_base(&self) -> bool {
        match self {
            Expr::Rational(r) => !r.is_integer(),
            Expr::Q(e) => *e != 1,
            Expr::Gen(_) => false,
            _ => true,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Rational(r) => write!(f, "{r}"),
            Expr::Q(1) => write!(f, "q"),
            Expr::Q(e) => write!(f, "q^{e}"),
            Expr::Gen(g) => write!(f, "{g}"),
            Expr::Sum(terms) => {
                for (k, (neg, t)) in terms.iter().enumerate() {
                    match (k, neg) {
                        (0, true) => write!(f, "-")?,
                        (0, false) => {}
                        (_, true) => write!(f, " - ")?,
                        (_, false) => write!(f, " + ")?,
                    }
                    if matches!(t, Expr::Sum(_)) {
                        write!(f, "({t})")?;
                    } else {
                        write!(f, "{t}")?;
                    }
                }
                Ok(())
            }
            Expr::Product(fs) => {
                for (k, x) in fs.iter().enumerate() {
                    if k > 0 {
                        write!(f, "*")?;
                    }
                    if matches!(x, Expr::Sum(_) | Expr::Product(_)) {
                        write!(f, "({x})")?;
                    } else {
                        write!(f, "{x}")?;
                    }
                }
                Ok(())
            }
            Expr::Power(b, e) => {
                if b.needs_parens_as_base() {
                    write!(f, "({b})^{e}")
                } else {
                    write!(f, "{b}^{e}")
                }
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: Option<usize>,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn digits(&mut self) -> Option<&'a str> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits"))
    }

    fn int(&mut self) -> Result<i64, ExprError> {
        let neg = self.peek() == Some(b'-');
        if neg {
            self.pos += 1;
        }
        self.skip_ws();
        let at = self.pos;
        match self.digits() {
            Some(d) => {
                let v: i64 = d.parse().map_err(|_| ExprError::Syntax {
                    offset: at,
                    message: "exponent too large".into(),
                })?;
                Ok(if neg { -v } else { v })
            }
            None => self.err("expected integer exponent"),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut terms = Vec::new();
        let mut neg = false;
        if self.peek() == Some(b'-') {
            self.pos += 1;
            neg = true;
        }
        terms.push((neg, self.term()?));
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    terms.push((false, self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    terms.push((true, self.term()?));
                }
                _ => break,
            }
        }
        if terms.len() == 1 && !terms[0].0 {
            return Ok(terms.pop().expect("one term").1);
        }
        Ok(Expr::Sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut fs = vec![self.factor()?];
        while self.peek() == Some(b'*') {
            self.pos += 1;
            fs.push(self.factor()?);
        }
        if fs.len() == 1 {
            return Ok(fs.pop().expect("one factor"));
        }
        Ok(Expr::Product(fs))
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.int()?;
            return Ok(Expr::Power(Box::new(base), e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let start = match self.peek() {
            Some(_) => self.pos,
            None => return self.err("unexpected end of input"),
        };
        match self.src[start] {
            b'0'..=b'9' => {
                let num: BigInt = self.digits().expect("digit").parse().expect("digits");
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    self.skip_ws();
                    let at = self.pos;
                    let den: BigInt = match self.digits() {
                        Some(d) => d.parse().expect("digits"),
                        None => return self.err("expected denominator"),
                    };
                    if den.is_zero() {
                        return Err(ExprError::ZeroDenominator { offset: at });
                    }
                    return Ok(Expr::Rational(BigRational::new(num, den)));
                }
                Ok(Expr::Rational(BigRational::from_integer(num)))
            }
            b'q' => {
                self.pos += 1;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    return Ok(Expr::Q(self.int()?));
                }
                Ok(Expr::Q(1))
            }
            c @ (b'x' | b'd' | b'a') => {
                self.pos += 1;
                let at = self.pos;
                let index: usize = match self.digits() {
                    Some(d) => d.parse().map_err(|_| ExprError::Syntax {
                        offset: at,
                        message: "generator index too large".into(),
                    })?,
                    None => return self.err("expected generator index"),
                };
                if index == 0 {
                    return Err(ExprError::Syntax {
                        offset: at,
                        message: "generator indices start at 1".into(),
                    });
                }
                if let Some(n) = self.n {
                    if index > n {
                        return Err(ExprError::IndexOutOfRange { index, n, offset: start });
                    }
                }
                let i = index - 1;
                Ok(Expr::Gen(match c {
                    b'x' => Generator::X(i),
                    b'd' => Generator::D(i),
                    _ => Generator::Alpha(i),
                }))
            }
            b'(' => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => self.err(format!("unexpected character {:?}", self.src[start] as char)),
        }
    }
}

fn parse(src: &str, n: Option<usize>) -> Result<Expr, ExprError> {
    if src.trim().is_empty() {
        return Err(ExprError::Empty);
    }
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        n,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

/// Parses `src`, rejecting generator indices above `n`.
pub fn parse_expression(src: &str, n: usize) -> Result<Expr, ExprError> {
    parse(src, Some(n))
}

/// Parses and evaluates a generator-free expression.
pub fn parse_scalar(src: &str, field: &Arc<CycField>) -> Result<CycScalar, ExprError> {
    eval_scalar(&parse(src, None)?, field)
}

pub fn eval_scalar(e: &Expr, field: &Arc<CycField>) -> Result<CycScalar, ExprError> {
    Ok(match e {
        Expr::Rational(r) => field.from_rational(r.clone()),
        Expr::Q(k) => field.qpow(*k),
        Expr::Gen(g) => return Err(ExprError::NotScalar(g.to_string())),
        Expr::Sum(ts) => {
            let mut acc = field.zero();
            for (neg, t) in ts {
                let v = eval_scalar(t, field)?;
                acc = if *neg { &acc - &v } else { &acc + &v };
            }
            acc
        }
        Expr::Product(fs) => {
            let mut acc = field.one();
            for x in fs {
                acc = &acc * &eval_scalar(x, field)?;
            }
            acc
        }
        Expr::Power(b, k) => eval_scalar(b, field)?
            .pow(*k)
            .map_err(|_| ExprError::DivisionByZero)?,
    })
}

/// Evaluates to PBW normal form.
pub fn evaluate(e: &Expr, alg: &DqAlgebra) -> Result<PbwElement, ExprError> {
    let field = alg.field();
    let out_of_range = |i: usize| ExprError::IndexOutOfRange {
        index: i + 1,
        n: alg.n(),
        offset: 0,
    };
    Ok(match e {
        Expr::Rational(_) | Expr::Q(_) => alg.scalar(eval_scalar(e, field)?),
        Expr::Gen(g) => alg.generator_power(*g, 1).map_err(|_| out_of_range(g.index()))?,
        Expr::Sum(ts) => {
            let mut acc = alg.zero();
            for (neg, t) in ts {
                let v = evaluate(t, alg)?;
                acc = if *neg { acc.sub(&v) } else { acc.add(&v) };
            }
            acc
        }
        Expr::Product(fs) => {
            let mut acc = alg.one();
            for x in fs {
                acc = alg.multiply(&acc, &evaluate(x, alg)?);
            }
            acc
        }
        Expr::Power(b, k) => {
            let base = evaluate(b, alg)?;
            if *k >= 0 {
                alg.power(&base, *k as u32)
            } else {
                let c = scalar_part(&base, field).ok_or(ExprError::NegativePower)?;
                alg.scalar(c.pow(*k).map_err(|_| ExprError::DivisionByZero)?)
            }
        }
    })
}

fn scalar_part(e: &PbwElement, field: &Arc<CycField>) -> Option<CycScalar> {
    match e.terms().iter().next() {
        None => Some(field.zero()),
        Some((m, c)) if e.len() == 1 && m.total_degree() == 0 => Some(c.clone()),
        _ => None,
    }
}

/// Parses and evaluates `src` in `alg`.
pub fn normalize(src: &str, alg: &DqAlgebra) -> Result<PbwElement, ExprError> {
    evaluate(&parse_expression(src, alg.n())?, alg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pbw::TorusEmbedding;

    fn alg(ell: u64, n: usize) -> DqAlgebra {
        DqAlgebra::new(CycField::new(ell).unwrap(), TorusEmbedding::trivial(n).unwrap())
    }

    #[test]
    fn defining_relation() {
        let a = alg(3, 1);
        assert_eq!(normalize("d1*x1", &a).unwrap(), normalize("q^2*x1*d1 + (q^2 - 1)", &a).unwrap());
    }

    #[test]
    fn index_out_of_range() {
        assert_eq!(
            parse_expression("x1 + x5", 2),
            Err(ExprError::IndexOutOfRange { index: 5, n: 2, offset: 5 })
        );
    }

    #[test]
    fn syntax_offsets() {
        assert!(matches!(parse_expression("x1 + * d1", 1), Err(ExprError::Syntax { offset: 5, .. })));
        assert!(matches!(parse_expression("(x1", 1), Err(ExprError::Syntax { offset: 3, .. })));
        assert!(matches!(parse_expression("1/0", 1), Err(ExprError::ZeroDenominator { offset: 2 })));
        assert_eq!(parse_expression("  ", 1), Err(ExprError::Empty));
    }

    #[test]
    fn print_parse_idempotent() {
        for s in ["-x1*(d1 - 2/3)^2", "q^-2*a1 + (q^2)^3", "(3/4)^2 - (-1)", "x1^3", "2*(x1*d2)*a2"] {
            let e = parse_expression(s, 2).unwrap();
            assert_eq!(parse_expression(&e.to_string(), 2).unwrap(), e, "{s}");
        }
    }

    #[test]
    fn scalars() {
        let f = CycField::new(3).unwrap();
        assert_eq!(parse_scalar("q^3", &f).unwrap(), f.one());
        assert_eq!(parse_scalar("q^-1 - q^2", &f).unwrap(), f.zero());
        assert!(parse_scalar("x1", &f).is_err());
        assert_eq!(parse_scalar("(q - 1)^-1*(q - 1)", &f).unwrap(), f.one());
        assert_eq!(parse_scalar("0^-1", &f), Err(ExprError::DivisionByZero));
    }
}
