//! Canonical file formats for polynomials and polynomial matrices.
//!
//! Text form:
//!
//! ```text
//! vars x:1 y:2 z:2
//! poly 2
//! 1/1 1 0 2
//! -1/1 3 1 0
//! ```
//!
//! Each term line is `numerator/denominator` followed by the exponent vector,
//! in canonical (descending) term order. A matrix is `matrix R C` followed by
//! `R*C` row-major blocks, each `entry N` plus `N` term lines. Lines starting
//! with `#` are ignored. For hand-written inputs, `expr <expression>` and
//! `row <e1>, <e2>, ...` lines are accepted by the readers as well.
//!
//! The structured form is JSON with the same content ([`PolyRecord`],
//! [`MatrixRecord`]); numbers are decimal strings so output is bit-exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parse::{parse_polynomial, parse_rational, ParseError};
use crate::polylinalg::{LinalgError, PolyMatrix};
use crate::polyring::{PolyError, Polynomial, Ring, WeightSystem};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarRecord {
    pub name: String,
    pub weight: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub num: String,
    pub den: String,
    pub exps: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyRecord {
    pub vars: Vec<VarRecord>,
    pub terms: Vec<TermRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub vars: Vec<VarRecord>,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<TermRecord>>,
}

pub fn ring_record(ring: &Ring) -> Vec<VarRecord> {
    ring.names()
        .iter()
        .zip(ring.weights())
        .map(|(n, &w)| VarRecord { name: n.clone(), weight: w })
        .collect()
}

fn ring_from_record(vars: &[VarRecord]) -> Result<Ring, PolyError> {
    WeightSystem::new(vars.iter().map(|v| (v.name.clone(), v.weight)))
}

pub fn terms_record(p: &Polynomial) -> Vec<TermRecord> {
    p.terms()
        .iter()
        .map(|(m, c)| TermRecord {
            num: c.numer().to_string(),
            den: c.denom().to_string(),
            exps: m.exponents().to_vec(),
        })
        .collect()
}

fn poly_from_terms(ring: &Ring, terms: &[TermRecord]) -> Result<Polynomial, FormatError> {
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let bad = |what: &str| FormatError::Syntax { line: 0, msg: format!("bad {what} in term record") };
        let n: BigInt = t.num.parse().map_err(|_| bad("numerator"))?;
        let d: BigInt = t.den.parse().map_err(|_| bad("denominator"))?;
        if d == BigInt::from(0) || t.exps.len() != ring.nvars() {
            return Err(bad("term"));
        }
        out.push((t.exps.clone(), BigRational::new(n, d)));
    }
    Ok(Polynomial::from_terms(ring, out))
}

impl PolyRecord {
    pub fn from_poly(p: &Polynomial) -> Self {
        PolyRecord { vars: ring_record(p.ring()), terms: terms_record(p) }
    }

    pub fn to_poly(&self) -> Result<Polynomial, FormatError> {
        poly_from_terms(&ring_from_record(&self.vars)?, &self.terms)
    }
}

impl MatrixRecord {
    pub fn from_matrix(m: &PolyMatrix) -> Self {
        MatrixRecord {
            vars: ring_record(m.ring()),
            rows: m.rows(),
            cols: m.cols(),
            entries: m.entries().iter().map(terms_record).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<PolyMatrix, FormatError> {
        let ring = ring_from_record(&self.vars)?;
        let entries = self.entries.iter().map(|t| poly_from_terms(&ring, t)).collect::<Result<_, _>>()?;
        Ok(PolyMatrix::new(&ring, self.rows, self.cols, entries)?)
    }
}

fn vars_line(ring: &Ring) -> String {
    let parts: Vec<String> = ring.names().iter().zip(ring.weights()).map(|(n, w)| format!("{n}:{w}")).collect();
    format!("vars {}\n", parts.join(" "))
}

fn push_terms(out: &mut String, p: &Polynomial) {
    for (m, c) in p.terms() {
        out.push_str(&format!("{}/{}", c.numer(), c.denom()));
        for e in m.exponents() {
            out.push_str(&format!(" {e}"));
        }
        out.push('\n');
    }
}

pub fn poly_to_text(p: &Polynomial) -> String {
    let mut out = vars_line(p.ring());
    out.push_str(&format!("poly {}\n", p.num_terms()));
    push_terms(&mut out, p);
    out
}

pub fn matrix_to_text(m: &PolyMatrix) -> String {
    let mut out = vars_line(m.ring());
    out.push_str(&format!("matrix {} {}\n", m.rows(), m.cols()));
    for e in m.entries() {
        out.push_str(&format!("entry {}\n", e.num_terms()));
        push_terms(&mut out, e);
    }
    out
}

pub fn poly_to_json(p: &Polynomial) -> String {
    serde_json::to_string_pretty(&PolyRecord::from_poly(p)).expect("serializable")
}

pub fn matrix_to_json(m: &PolyMatrix) -> String {
    serde_json::to_string_pretty(&MatrixRecord::from_matrix(m)).expect("serializable")
}

struct Lines<'a> {
    items: Vec<(usize, &'a str)>,
    at: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Lines { items, at: 0 }
    }

    fn next(&mut self) -> Result<(usize, &'a str), FormatError> {
        let last = self.items.last().map_or(0, |l| l.0);
        let item = self
            .items
            .get(self.at)
            .copied()
            .ok_or(FormatError::Syntax { line: last, msg: "unexpected end of input".into() })?;
        self.at += 1;
        Ok(item)
    }

    fn done(&self) -> bool {
        self.at >= self.items.len()
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

fn read_vars(lines: &mut Lines) -> Result<Ring, FormatError> {
    let (ln, l) = lines.next()?;
    let rest = l.strip_prefix("vars").ok_or_else(|| syntax(ln, "expected `vars` header"))?;
    let mut vars = Vec::new();
    for tok in rest.split_whitespace() {
        let (n, w) = match tok.split_once(':') {
            Some((n, w)) => (n, w.parse::<u32>().map_err(|_| syntax(ln, format!("bad weight in `{tok}`")))?),
            None => (tok, 1),
        };
        vars.push((n.to_string(), w));
    }
    Ok(WeightSystem::new(vars)?)
}

fn read_term_lines(lines: &mut Lines, ring: &Ring, count: usize) -> Result<Polynomial, FormatError> {
    let mut terms = Vec::with_capacity(count);
    for _ in 0..count {
        let (ln, l) = lines.next()?;
        let mut it = l.split_whitespace();
        let c = it
            .next()
            .and_then(parse_rational)
            .ok_or_else(|| syntax(ln, "bad coefficient"))?;
        let exps: Vec<u32> = it
            .map(|t| t.parse::<u32>().map_err(|_| syntax(ln, format!("bad exponent `{t}`"))))
            .collect::<Result<_, _>>()?;
        if exps.len() != ring.nvars() {
            return Err(syntax(ln, "exponent vector has the wrong length"));
        }
        terms.push((exps, c));
    }
    Ok(Polynomial::from_terms(ring, terms))
}

fn read_block(lines: &mut Lines, ring: &Ring, keyword: &str) -> Result<Polynomial, FormatError> {
    let (ln, l) = lines.next()?;
    if let Some(e) = l.strip_prefix("expr") {
        return Ok(parse_polynomial(ring, e.trim())?);
    }
    let n = l
        .strip_prefix(keyword)
        .and_then(|r| r.trim().parse::<usize>().ok())
        .ok_or_else(|| syntax(ln, format!("expected `{keyword} N` or `expr ...`")))?;
    read_term_lines(lines, ring, n)
}

pub fn poly_from_text(text: &str) -> Result<Polynomial, FormatError> {
    if text.trim_start().starts_with('{') {
        let rec: PolyRecord = serde_json::from_str(text)?;
        return rec.to_poly();
    }
    let mut lines = Lines::new(text);
    let ring = read_vars(&mut lines)?;
    let p = read_block(&mut lines, &ring, "poly")?;
    if !lines.done() {
        return Err(syntax(lines.next()?.0, "trailing content"));
    }
    Ok(p)
}

/// Reads a matrix in either text form or JSON.
pub fn matrix_from_text(text: &str) -> Result<PolyMatrix, FormatError> {
    if text.trim_start().starts_with('{') {
        let rec: MatrixRecord = serde_json::from_str(text)?;
        return rec.to_matrix();
    }
    let mut lines = Lines::new(text);
    let ring = read_vars(&mut lines)?;
    let (ln, l) = lines.next()?;
    if l.starts_with("row") {
        lines.at -= 1;
        let mut rows = Vec::new();
        while !lines.done() {
            let (ln, l) = lines.next()?;
            let body = l.strip_prefix("row").ok_or_else(|| syntax(ln, "expected `row`"))?;
            let row = body
                .split(',')
                .map(|e| parse_polynomial(&ring, e.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        return Ok(PolyMatrix::from_rows(&ring, rows)?);
    }
    let dims: Vec<usize> = l
        .strip_prefix("matrix")
        .map(|r| r.split_whitespace().filter_map(|t| t.parse().ok()).collect())
        .unwrap_or_default();
    if dims.len() != 2 {
        return Err(syntax(ln, "expected `matrix R C` or `row` lines"));
    }
    let mut entries = Vec::with_capacity(dims[0] * dims[1]);
    for _ in 0..dims[0] * dims[1] {
        entries.push(read_block(&mut lines, &ring, "entry")?);
    }
    if !lines.done() {
        return Err(syntax(lines.next()?.0, "trailing content"));
    }
    Ok(PolyMatrix::new(&ring, dims[0], dims[1], entries)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::rational;
    use proptest::prelude::*;

    fn ring() -> Ring {
        WeightSystem::new([("x", 1), ("y", 2), ("z", 2)]).unwrap()
    }

    #[test]
    fn text_layout_is_canonical() {
        let r = ring();
        let h = parse_polynomial(&r, "x*(z^2 - x^2*y)").unwrap();
        let t = poly_to_text(&h);
        assert_eq!(t, "vars x:1 y:2 z:2\npoly 2\n-1/1 3 1 0\n1/1 1 0 2\n");
        assert_eq!(poly_from_text(&t).unwrap(), h);
        assert_eq!(poly_from_text(&poly_to_json(&h)).unwrap(), h);
    }

    #[test]
    fn hand_written_inputs() {
        let p = poly_from_text("# a comment\nvars x y\nexpr x*y - 1/2\n").unwrap();
        assert_eq!(p.constant_term(), rational(-1, 2));
        let m = matrix_from_text("vars x y\nrow x, 0\nrow 0, y\n").unwrap();
        assert_eq!(m.det().unwrap().to_string(), "x*y");
        assert!(matrix_from_text("vars x\nrow x, 0\nrow 1\n").is_err());
        assert!(poly_from_text("poly 1\n").is_err());
    }

    fn any_poly() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(((0u32..3, 0u32..3, 0u32..3), -20i64..20, 1i64..7), 0..6).prop_map(|ts| {
            Polynomial::from_terms(&ring(), ts.into_iter().map(|((a, b, c), n, d)| (vec![a, b, c], rational(n, d))))
        })
    }

    proptest! {
        #[test]
        fn round_trips(ps in prop::collection::vec(any_poly(), 4)) {
            let p = &ps[0];
            prop_assert_eq!(&poly_from_text(&poly_to_text(p)).unwrap(), p);
            prop_assert_eq!(&poly_from_text(&poly_to_json(p)).unwrap(), p);
            prop_assert_eq!(poly_to_text(&poly_from_text(&poly_to_text(p)).unwrap()), poly_to_text(p));
            let m = PolyMatrix::new(&ring(), 2, 2, ps.clone()).unwrap();
            prop_assert_eq!(&matrix_from_text(&matrix_to_text(&m)).unwrap(), &m);
            prop_assert_eq!(&matrix_from_text(&matrix_to_json(&m)).unwrap(), &m);
        }
    }
}
