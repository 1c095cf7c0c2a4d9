//! Reader for polynomial expressions such as `x^2*y - 3/2*z + (x+1)^3`.
//!
//! Grammar: sums of products of powers; `^` (or `**`) takes a non-negative
//! integer exponent, `/` only accepts a nonzero constant divisor, and
//! juxtaposition is not multiplication.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::polyring::{Polynomial, Ring};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected {found} at offset {pos}")]
    Unexpected { pos: usize, found: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("division by a non-constant or zero expression at offset {0}")]
    BadDivision(usize),
    #[error("exponent at offset {0} is not a small non-negative integer")]
    BadExponent(usize),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
    Pow,
    End,
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            out.push((st, Tok::Num(s[st..i].parse().expect("digits"))));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let st = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((st, Tok::Ident(s[st..i].to_string())));
        } else if c == '*' && b.get(i + 1) == Some(&b'*') {
            out.push((i, Tok::Pow));
            i += 2;
        } else if c == '^' {
            out.push((i, Tok::Pow));
            i += 1;
        } else if "+-*/()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ParseError::Unexpected { pos: i, found: format!("`{c}`") });
        }
    }
    out.push((s.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    ring: &'a Ring,
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn unexpected(&self) -> ParseError {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::Pow => "`^`".to_string(),
        };
        ParseError::Unexpected { pos: self.pos(), found }
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = match self.peek() {
            Tok::Op('-') => {
                self.at += 1;
                -self.product()?
            }
            Tok::Op('+') => {
                self.at += 1;
                self.product()?
            }
            _ => self.product()?,
        };
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.at += 1;
                    acc = &acc + &self.product()?;
                }
                Tok::Op('-') => {
                    self.at += 1;
                    acc = &acc - &self.product()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.at += 1;
                    acc = &acc * &self.power()?;
                }
                Tok::Op('/') => {
                    self.at += 1;
                    let pos = self.pos();
                    let d = self.power()?;
                    if !d.is_constant() || d.is_zero() {
                        return Err(ParseError::BadDivision(pos));
                    }
                    acc = acc.scale(&(BigRational::from_integer(1.into()) / d.constant_term()));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Polynomial, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Pow {
            return Ok(base);
        }
        self.at += 1;
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.at += 1;
                let e: u32 = n.try_into().map_err(|_| ParseError::BadExponent(pos))?;
                Ok(base.pow(e))
            }
            _ => Err(ParseError::BadExponent(pos)),
        }
    }

    fn atom(&mut self) -> Result<Polynomial, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.at += 1;
                Ok(Polynomial::constant(self.ring, BigRational::from_integer(n)))
            }
            Tok::Ident(name) => {
                self.at += 1;
                Polynomial::var(self.ring, &name).map_err(|_| ParseError::UnknownVariable(name))
            }
            Tok::Op('(') => {
                self.at += 1;
                let p = self.expr()?;
                if *self.peek() != Tok::Op(')') {
                    return Err(self.unexpected());
                }
                self.at += 1;
                Ok(p)
            }
            Tok::Op('-') => {
                self.at += 1;
                Ok(-self.power()?)
            }
            _ => Err(self.unexpected()),
        }
    }
}

pub fn parse_polynomial(ring: &Ring, s: &str) -> Result<Polynomial, ParseError> {
    let mut p = Parser { ring, toks: lex(s)?, at: 0 };
    if matches!(p.peek(), Tok::End) {
        return Err(p.unexpected());
    }
    let out = p.expr()?;
    if !matches!(p.peek(), Tok::End) {
        return Err(p.unexpected());
    }
    Ok(out)
}

/// Parses a rational literal such as `-3/4` or `7`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.parse::<BigInt>().ok()?, BigInt::from(1)),
    };
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::{rational, WeightSystem};

    #[test]
    fn parses_and_prints_back() {
        let r = WeightSystem::standard(["x", "y", "z"]).unwrap();
        let p = parse_polynomial(&r, "z^2 - x**2*y").unwrap();
        assert_eq!(p.to_string(), "-x^2*y + z^2");
        assert_eq!(parse_polynomial(&r, &p.to_string()).unwrap(), p);
        let q = parse_polynomial(&r, "(x+1)^2 - 2/3*x").unwrap();
        assert_eq!(q.coefficient(&[1, 0, 0]), rational(4, 3));
        assert_eq!(parse_polynomial(&r, "-(x)").unwrap(), -Polynomial::var(&r, "x").unwrap());
    }

    #[test]
    fn rejects_malformed_input() {
        let r = WeightSystem::standard(["x"]).unwrap();
        assert_eq!(parse_polynomial(&r, "w"), Err(ParseError::UnknownVariable("w".into())));
        assert!(matches!(parse_polynomial(&r, "x/x"), Err(ParseError::BadDivision(_))));
        assert!(matches!(parse_polynomial(&r, "x^x"), Err(ParseError::BadExponent(_))));
        assert!(matches!(parse_polynomial(&r, ""), Err(ParseError::Unexpected { .. })));
        assert!(matches!(parse_polynomial(&r, "x x"), Err(ParseError::Unexpected { .. })));
        assert_eq!(parse_rational("-3/6"), Some(rational(-1, 2)));
        assert_eq!(parse_rational("1/0"), None);
    }
}
