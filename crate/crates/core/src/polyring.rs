//! Sparse multivariate polynomials with exact rational coefficients over a
//! weighted variable system.
//!
//! Every [`Polynomial`] carries a shared [`Ring`] (an `Arc<WeightSystem>`).
//! Terms are kept in the canonical descending order: weighted degree first,
//! then lexicographic on the exponent vector in declared variable order.
//! That order is a monomial order, so leading-term division is sound.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Coeff = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("operands live in different rings")]
    RingMismatch,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("operation is undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("no image supplied for variable `{0}`")]
    MissingImage(String),
    #[error("invalid weight system: {0}")]
    InvalidWeights(String),
}

/// Ordered variable names with strictly positive integer weights.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct WeightSystem {
    names: Vec<String>,
    weights: Vec<u32>,
}

pub type Ring = Arc<WeightSystem>;

impl WeightSystem {
    pub fn new<S: Into<String>>(vars: impl IntoIterator<Item = (S, u32)>) -> Result<Ring, PolyError> {
        let (names, weights): (Vec<String>, Vec<u32>) =
            vars.into_iter().map(|(n, w)| (n.into(), w)).unzip();
        if let Some(i) = weights.iter().position(|&w| w == 0) {
            return Err(PolyError::InvalidWeights(format!(
                "variable `{}` has weight 0",
                names[i]
            )));
        }
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() {
                return Err(PolyError::InvalidWeights("empty variable name".into()));
            }
            if names[..i].contains(n) {
                return Err(PolyError::InvalidWeights(format!("duplicate variable `{n}`")));
            }
        }
        Ok(Arc::new(WeightSystem { names, weights }))
    }

    /// All variables of weight one.
    pub fn standard<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Ring, PolyError> {
        Self::new(names.into_iter().map(|n| (n, 1)))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn weight(&self, var: usize) -> u32 {
        self.weights[var]
    }

    pub fn index_of(&self, name: &str) -> Result<usize, PolyError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))
    }

    pub fn weighted_degree_of(&self, exps: &[u32]) -> u32 {
        exps.iter().zip(&self.weights).map(|(e, w)| e * w).sum()
    }

    /// Every monomial of weighted degree exactly `degree`, in canonical
    /// (descending) order.
    pub fn monomials_of_degree(&self, degree: u32) -> Vec<Monomial> {
        let n = self.nvars();
        let mut out = Vec::new();
        let mut exps = vec![0u32; n];
        fn rec(ws: &[u32], var: usize, rest: u32, exps: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if var == ws.len() {
                if rest == 0 {
                    out.push(exps.clone());
                }
                return;
            }
            if var + 1 == ws.len() {
                if rest.is_multiple_of(ws[var]) {
                    exps[var] = rest / ws[var];
                    out.push(exps.clone());
                    exps[var] = 0;
                }
                return;
            }
            let mut e = rest / ws[var];
            loop {
                exps[var] = e;
                rec(ws, var + 1, rest - e * ws[var], exps, out);
                if e == 0 {
                    break;
                }
                e -= 1;
            }
            exps[var] = 0;
        }
        if n == 0 {
            if degree == 0 {
                return vec![Monomial::one_with(0)];
            }
            return out;
        }
        let mut raw = Vec::new();
        rec(&self.weights, 0, degree, &mut exps, &mut raw);
        for e in raw {
            out.push(Monomial::new(self, e));
        }
        out
    }
}

pub fn same_ring(a: &Ring, b: &Ring) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Exponent vector together with its weighted degree (cached for ordering).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    degree: u32,
    exps: Box<[u32]>,
}

impl Monomial {
    pub fn new(ring: &WeightSystem, exps: Vec<u32>) -> Monomial {
        debug_assert_eq!(exps.len(), ring.nvars());
        Monomial { degree: ring.weighted_degree_of(&exps), exps: exps.into_boxed_slice() }
    }

    pub fn one(ring: &WeightSystem) -> Monomial {
        Self::one_with(ring.nvars())
    }

    fn one_with(n: usize) -> Monomial {
        Monomial { degree: 0, exps: vec![0; n].into_boxed_slice() }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn weighted_degree(&self) -> u32 {
        self.degree
    }

    pub fn total_degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            degree: self.degree + other.degree,
            exps: self.exps.iter().zip(other.exps.iter()).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(other.exps.iter()).all(|(a, b)| a <= b)
    }

    /// `other / self` if exact.
    pub fn quotient_of(&self, other: &Monomial) -> Option<Monomial> {
        if !self.divides(other) {
            return None;
        }
        Some(Monomial {
            degree: other.degree - self.degree,
            exps: other.exps.iter().zip(self.exps.iter()).map(|(b, a)| b - a).collect(),
        })
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree.cmp(&other.degree).then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Result of [`Polynomial::weighted_degree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightedDegree {
    Homogeneous(u32),
    Mixed,
}

impl WeightedDegree {
    pub fn homogeneous(self) -> Option<u32> {
        match self {
            WeightedDegree::Homogeneous(d) => Some(d),
            WeightedDegree::Mixed => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Polynomial {
    ring: Ring,
    // strictly decreasing in canonical order, no zero coefficients
    terms: Vec<(Monomial, Coeff)>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        same_ring(&self.ring, &other.ring) && self.terms == other.terms
    }
}

impl Eq for Polynomial {}

pub fn rational(n: i64, d: i64) -> Coeff {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: i64) -> Coeff {
    BigRational::from_integer(BigInt::from(n))
}

impl Polynomial {
    pub fn zero(ring: &Ring) -> Polynomial {
        Polynomial { ring: ring.clone(), terms: Vec::new() }
    }

    pub fn one(ring: &Ring) -> Polynomial {
        Self::constant(ring, Coeff::one())
    }

    pub fn constant(ring: &Ring, c: Coeff) -> Polynomial {
        if c.is_zero() {
            return Self::zero(ring);
        }
        Polynomial { ring: ring.clone(), terms: vec![(Monomial::one(ring), c)] }
    }

    pub fn from_int(ring: &Ring, c: i64) -> Polynomial {
        Self::constant(ring, integer(c))
    }

    pub fn var(ring: &Ring, name: &str) -> Result<Polynomial, PolyError> {
        Ok(Self::var_index(ring, ring.index_of(name)?))
    }

    pub fn var_index(ring: &Ring, var: usize) -> Polynomial {
        let mut e = vec![0; ring.nvars()];
        e[var] = 1;
        Self::term(ring, e, Coeff::one())
    }

    pub fn term(ring: &Ring, exps: Vec<u32>, c: Coeff) -> Polynomial {
        if c.is_zero() {
            return Self::zero(ring);
        }
        Polynomial { ring: ring.clone(), terms: vec![(Monomial::new(ring, exps), c)] }
    }

    pub fn from_monomial(ring: &Ring, m: Monomial, c: Coeff) -> Polynomial {
        if c.is_zero() {
            return Self::zero(ring);
        }
        Polynomial { ring: ring.clone(), terms: vec![(m, c)] }
    }

    /// Builds a polynomial from arbitrary (possibly repeated) terms.
    pub fn from_terms(ring: &Ring, terms: impl IntoIterator<Item = (Vec<u32>, Coeff)>) -> Polynomial {
        let mut acc: HashMap<Vec<u32>, Coeff> = HashMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), ring.nvars(), "exponent vector length");
            *acc.entry(e).or_insert_with(Coeff::zero) += c;
        }
        Self::from_map(ring, acc.into_iter().map(|(e, c)| (Monomial::new(ring, e), c)))
    }

    fn from_map(ring: &Ring, it: impl IntoIterator<Item = (Monomial, Coeff)>) -> Polynomial {
        let mut terms: Vec<(Monomial, Coeff)> = it.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        Polynomial { ring: ring.clone(), terms }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn terms(&self) -> &[(Monomial, Coeff)] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn is_one(&self) -> bool {
        self.is_constant() && !self.is_zero() && self.terms[0].1.is_one()
    }

    /// The coefficient of the constant monomial.
    pub fn constant_term(&self) -> Coeff {
        match self.terms.last() {
            Some((m, c)) if m.is_one() => c.clone(),
            _ => Coeff::zero(),
        }
    }

    pub fn coefficient(&self, exps: &[u32]) -> Coeff {
        let m = Monomial::new(&self.ring, exps.to_vec());
        self.coefficient_of(&m)
    }

    pub fn coefficient_of(&self, m: &Monomial) -> Coeff {
        match self.terms.binary_search_by(|(t, _)| m.cmp(t)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => Coeff::zero(),
        }
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Coeff)> {
        self.terms.first().map(|(m, c)| (m, c))
    }

    pub fn leading_coefficient(&self) -> Coeff {
        self.terms.first().map(|(_, c)| c.clone()).unwrap_or_else(Coeff::zero)
    }

    fn check_ring(&self, other: &Polynomial) -> Result<(), PolyError> {
        if same_ring(&self.ring, &other.ring) {
            Ok(())
        } else {
            Err(PolyError::RingMismatch)
        }
    }

    fn merge(&self, other: &Polynomial, negate_other: bool) -> Polynomial {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if negate_other { -b[j].1.clone() } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate_other { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        for t in &b[j..] {
            let c = if negate_other { -t.1.clone() } else { t.1.clone() };
            out.push((t.0.clone(), c));
        }
        Polynomial { ring: self.ring.clone(), terms: out }
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_ring(other)?;
        Ok(self.merge(other, false))
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_ring(other)?;
        Ok(self.merge(other, true))
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_ring(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(&self.ring));
        }
        if other.terms.len() == 1 {
            let (m, c) = &other.terms[0];
            return Ok(self.mul_term(m, c));
        }
        if self.terms.len() == 1 {
            let (m, c) = &self.terms[0];
            return Ok(other.mul_term(m, c));
        }
        let mut acc: HashMap<Monomial, Coeff> = HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let c = ca * cb;
                match acc.entry(ma.mul(mb)) {
                    std::collections::hash_map::Entry::Occupied(mut e) => *e.get_mut() += c,
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(c);
                    }
                }
            }
        }
        Ok(Self::from_map(&self.ring, acc))
    }

    /// Multiplication by a single term; order is preserved.
    pub fn mul_term(&self, m: &Monomial, c: &Coeff) -> Polynomial {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(t, d)| (t.mul(m), d * c)).collect(),
        }
    }

    pub fn scale(&self, c: &Coeff) -> Polynomial {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(t, d)| (t.clone(), d * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut result = Self::one(&self.ring);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Formal partial derivative with respect to the variable at `var`.
    pub fn derivative(&self, var: usize) -> Polynomial {
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            let e = m.exps[var];
            if e == 0 {
                continue;
            }
            let mut exps = m.exps.to_vec();
            exps[var] -= 1;
            terms.push((Monomial::new(&self.ring, exps), c * integer(e as i64)));
        }
        // lowering one exponent preserves relative order among survivors
        Polynomial { ring: self.ring.clone(), terms }
    }

    pub fn partial_derivative(&self, var: &str) -> Result<Polynomial, PolyError> {
        Ok(self.derivative(self.ring.index_of(var)?))
    }

    /// Exact quotient `self / q`, or `None` when `q` does not divide `self`.
    pub fn exact_divide(&self, q: &Polynomial) -> Result<Option<Polynomial>, PolyError> {
        self.check_ring(q)?;
        if q.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        let (lm, lc) = (q.terms[0].0.clone(), q.terms[0].1.clone());
        if q.terms.len() == 1 {
            let mut out = Vec::with_capacity(self.terms.len());
            for (m, c) in &self.terms {
                match lm.quotient_of(m) {
                    Some(t) => out.push((t, c / &lc)),
                    None => return Ok(None),
                }
            }
            return Ok(Some(Polynomial { ring: self.ring.clone(), terms: out }));
        }
        let mut rem = self.clone();
        let mut quot = Vec::new();
        while let Some((m, c)) = rem.terms.first() {
            if m.degree < lm.degree {
                return Ok(None);
            }
            let Some(t) = lm.quotient_of(m) else {
                return Ok(None);
            };
            let coef = c / &lc;
            rem = rem.merge(&q.mul_term(&t, &coef), true);
            quot.push((t, coef));
        }
        Ok(Some(Polynomial { ring: self.ring.clone(), terms: quot }))
    }

    pub fn divides(&self, p: &Polynomial) -> Result<bool, PolyError> {
        Ok(p.exact_divide(self)?.is_some())
    }

    /// Common weighted degree of all terms.
    pub fn weighted_degree(&self) -> Result<WeightedDegree, PolyError> {
        let Some((first, _)) = self.terms.first() else {
            return Err(PolyError::ZeroPolynomial);
        };
        if self.terms.iter().all(|(m, _)| m.degree == first.degree) {
            Ok(WeightedDegree::Homogeneous(first.degree))
        } else {
            Ok(WeightedDegree::Mixed)
        }
    }

    /// Weighted degree if the polynomial is nonzero and homogeneous.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        self.weighted_degree().ok().and_then(WeightedDegree::homogeneous)
    }

    /// Ordinary total degree (all weights one); zero for constants and zero.
    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.total_degree()).max().unwrap_or(0)
    }

    /// Lowest ordinary total degree among the terms.
    pub fn order(&self) -> Option<u32> {
        self.terms.iter().map(|(m, _)| m.total_degree()).min()
    }

    /// The part of ordinary total degree exactly `d` (the `d`-th homogeneous
    /// component in the standard grading).
    pub fn ordinary_part(&self, d: u32) -> Polynomial {
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().filter(|(m, _)| m.total_degree() == d).cloned().collect(),
        }
    }

    /// Terms of ordinary degree at most `d`.
    pub fn jet(&self, d: u32) -> Polynomial {
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().filter(|(m, _)| m.total_degree() <= d).cloned().collect(),
        }
    }

    pub fn weighted_part(&self, d: u32) -> Polynomial {
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().filter(|(m, _)| m.degree == d).cloned().collect(),
        }
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.iter().map(|(m, _)| m.exps[var]).max().unwrap_or(0)
    }

    pub fn involves(&self, var: usize) -> bool {
        self.terms.iter().any(|(m, _)| m.exps[var] > 0)
    }

    pub fn variables(&self) -> Vec<usize> {
        (0..self.ring.nvars()).filter(|&v| self.involves(v)).collect()
    }

    /// Scales so the leading coefficient is one.
    pub fn monic(&self) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.terms[0].1.clone();
        self.scale(&lc.recip())
    }

    /// Scales to coprime integer coefficients with positive leading coefficient.
    pub fn primitive_integer(&self) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for (_, c) in &self.terms {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut s = BigRational::new(den_lcm, num_gcd);
        if self.terms[0].1.is_negative() {
            s = -s;
        }
        self.scale(&s)
    }

    /// Moves the polynomial into `target`, matching variables by name.
    pub fn embed(&self, target: &Ring) -> Result<Polynomial, PolyError> {
        if same_ring(&self.ring, target) {
            return Ok(self.clone());
        }
        let map: Vec<usize> = self
            .ring
            .names()
            .iter()
            .map(|n| target.index_of(n))
            .collect::<Result<_, _>>()?;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut e = vec![0; target.nvars()];
            for (i, &x) in m.exps.iter().enumerate() {
                if x > 0 {
                    e[map[i]] = x;
                }
            }
            terms.push((Monomial::new(target, e), c.clone()));
        }
        Ok(Self::from_map(target, terms))
    }

    /// Composition: every variable occurring in `self` is replaced by its
    /// image. All images must live in `target`.
    pub fn substitute(&self, target: &Ring, images: &BTreeMap<String, Polynomial>) -> Result<Polynomial, PolyError> {
        for img in images.values() {
            if !same_ring(img.ring(), target) {
                return Err(PolyError::RingMismatch);
            }
        }
        let n = self.ring.nvars();
        let mut slots: Vec<Option<&Polynomial>> = vec![None; n];
        for v in 0..n {
            if self.involves(v) {
                let name = &self.ring.names()[v];
                slots[v] = Some(images.get(name).ok_or_else(|| PolyError::MissingImage(name.clone()))?);
            }
        }
        Ok(self.substitute_slots(target, &slots))
    }

    /// Substitution with images given positionally (one per variable).
    pub fn substitute_vars(&self, target: &Ring, images: &[Polynomial]) -> Result<Polynomial, PolyError> {
        if images.len() != self.ring.nvars() {
            return Err(PolyError::RingMismatch);
        }
        for img in images {
            if !same_ring(img.ring(), target) {
                return Err(PolyError::RingMismatch);
            }
        }
        let slots: Vec<Option<&Polynomial>> = images.iter().map(Some).collect();
        Ok(self.substitute_slots(target, &slots))
    }

    fn substitute_slots(&self, target: &Ring, slots: &[Option<&Polynomial>]) -> Polynomial {
        let mut powers: HashMap<(usize, u32), Polynomial> = HashMap::new();
        let mut acc: HashMap<Monomial, Coeff> = HashMap::new();
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(target, c.clone());
            for (v, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let p = powers.entry((v, e)).or_insert_with(|| slots[v].expect("image checked").pow(e));
                t = &t * &*p;
                if t.is_zero() {
                    break;
                }
            }
            for (tm, tc) in t.terms {
                *acc.entry(tm).or_insert_with(Coeff::zero) += tc;
            }
        }
        Self::from_map(target, acc)
    }

    /// Evaluates every variable at a rational point.
    pub fn evaluate(&self, point: &[Coeff]) -> Coeff {
        let mut s = Coeff::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, &e) in m.exps.iter().enumerate() {
                if e > 0 {
                    t *= num_traits::pow(point[v].clone(), e as usize);
                }
            }
            s += t;
        }
        s
    }

    /// Coefficients with respect to `var`: entry `e` holds the coefficient of
    /// `var^e` (a polynomial not involving `var`).
    pub fn to_univariate(&self, var: usize) -> Vec<Polynomial> {
        let deg = self.degree_in(var) as usize;
        let mut parts: Vec<Vec<(Monomial, Coeff)>> = vec![Vec::new(); deg + 1];
        for (m, c) in &self.terms {
            let e = m.exps[var] as usize;
            let mut exps = m.exps.to_vec();
            exps[var] = 0;
            parts[e].push((Monomial::new(&self.ring, exps), c.clone()));
        }
        parts
            .into_iter()
            .map(|t| Self::from_map(&self.ring, t))
            .collect()
    }

    pub fn from_univariate(ring: &Ring, var: usize, coeffs: &[Polynomial]) -> Polynomial {
        let mut terms = Vec::new();
        for (e, p) in coeffs.iter().enumerate() {
            for (m, c) in &p.terms {
                let mut exps = m.exps.to_vec();
                exps[var] += e as u32;
                terms.push((Monomial::new(ring, exps), c.clone()));
            }
        }
        Self::from_map(ring, terms)
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_ring(other)?;
        Ok(gcd_rec(self, other).monic())
    }

    /// Exact squarefreeness test: `gcd(p, ∂₁p, …, ∂ₙp)` is constant.
    pub fn is_squarefree(&self) -> Result<bool, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let mut g = self.primitive_integer();
        // start with the variable of smallest degree: the gcd shrinks fastest
        let mut vars = self.variables();
        vars.sort_by_key(|&v| self.degree_in(v));
        for v in vars {
            if g.is_constant() {
                break;
            }
            g = gcd_rec(&g, &self.derivative(v)).primitive_integer();
        }
        Ok(g.is_constant())
    }
}

fn content_in(p: &Polynomial, var: usize) -> Polynomial {
    gcd_list(&p.to_univariate(var))
}

fn gcd_list(ps: &[Polynomial]) -> Polynomial {
    let mut g: Option<Polynomial> = None;
    // smallest first keeps intermediate gcds cheap
    let mut order: Vec<&Polynomial> = ps.iter().filter(|p| !p.is_zero()).collect();
    order.sort_by_key(|p| p.num_terms());
    for p in order {
        g = Some(match g {
            None => p.primitive_integer(),
            Some(g) => gcd_rec(&g, p).primitive_integer(),
        });
        if g.as_ref().is_some_and(|g| g.is_constant()) {
            break;
        }
    }
    g.unwrap_or_else(|| Polynomial::zero(ps.first().map(|p| p.ring()).expect("nonempty")))
}

/// gcd up to a nonzero rational scalar.
fn gcd_rec(p: &Polynomial, q: &Polynomial) -> Polynomial {
    if p.is_zero() {
        return q.clone();
    }
    if q.is_zero() {
        return p.clone();
    }
    if p.is_constant() || q.is_constant() {
        return Polynomial::one(p.ring());
    }
    let ring = p.ring().clone();
    // variables present in only one operand cannot occur in a common factor
    let mut p = p.clone();
    let mut q = q.clone();
    for v in 0..ring.nvars() {
        let (ip, iq) = (p.involves(v), q.involves(v));
        if ip && !iq {
            p = content_in(&p, v);
        } else if iq && !ip {
            q = content_in(&q, v);
        }
        if p.is_constant() || q.is_constant() {
            return Polynomial::one(&ring);
        }
    }
    if q.divides(&p).unwrap_or(false) {
        return q;
    }
    if p.divides(&q).unwrap_or(false) {
        return p;
    }
    let common = p.variables();
    let var = *common
        .iter()
        .min_by_key(|&&v| (p.degree_in(v).max(q.degree_in(v)), v))
        .expect("nonconstant operands share a variable");
    let pu = p.to_univariate(var);
    let qu = q.to_univariate(var);
    let cp = gcd_list(&pu);
    let cq = gcd_list(&qu);
    let c = gcd_rec(&cp, &cq);
    let pp: Vec<Polynomial> = pu.iter().map(|a| exact(a, &cp)).collect();
    let qq: Vec<Polynomial> = qu.iter().map(|a| exact(a, &cq)).collect();
    let g = primitive_prs(&ring, var, pp, qq);
    &c * &g
}

fn exact(a: &Polynomial, b: &Polynomial) -> Polynomial {
    a.exact_divide(b).expect("same ring").expect("content divides every coefficient")
}

fn trim(mut a: Vec<Polynomial>) -> Vec<Polynomial> {
    while a.last().is_some_and(|p| p.is_zero()) {
        a.pop();
    }
    a
}

/// Pseudo-remainder of `a` by `b` (both dense in the main variable).
fn pseudo_remainder(a: &[Polynomial], b: &[Polynomial]) -> Vec<Polynomial> {
    let mut r = trim(a.to_vec());
    let db = b.len() - 1;
    let lb = &b[db];
    while !r.is_empty() && r.len() > db {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        for c in r.iter_mut() {
            *c = &*c * lb;
        }
        for (i, bc) in b.iter().enumerate() {
            let t = &lr * bc;
            r[i + shift] = &r[i + shift] - &t;
        }
        debug_assert!(r[dr].is_zero());
        r = trim(r);
    }
    r
}

fn primitive_prs(ring: &Ring, var: usize, a: Vec<Polynomial>, b: Vec<Polynomial>) -> Polynomial {
    let (mut a, mut b) = (trim(a), trim(b));
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        if b.len() == 1 {
            // b is primitive of degree zero in var: a unit in this recursion
            return Polynomial::one(ring);
        }
        let r = pseudo_remainder(&a, &b);
        if r.is_empty() {
            let g = Polynomial::from_univariate(ring, var, &b);
            return g.primitive_integer();
        }
        if r.len() == 1 {
            return Polynomial::one(ring);
        }
        let cont = gcd_list(&r);
        let r: Vec<Polynomial> = r.iter().map(|x| exact(x, &cont)).collect();
        // rescale all coefficients jointly to integers
        let rp = Polynomial::from_univariate(ring, var, &r).primitive_integer();
        a = b;
        b = trim(rp.to_univariate(var));
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident, $what:expr) => {
        impl $tr<&Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                self.$checked(rhs).expect($what)
            }
        }
        impl $tr<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$checked(&rhs).expect($what)
            }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                (&self).$checked(rhs).expect($what)
            }
        }
        impl $tr<Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                self.$checked(&rhs).expect($what)
            }
        }
    };
}

binop!(Add, add, checked_add, "ring mismatch in polynomial addition");
binop!(Sub, sub, checked_sub, "ring mismatch in polynomial subtraction");
binop!(Mul, mul, checked_mul, "ring mismatch in polynomial multiplication");

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, ring: &WeightSystem, m: &Monomial) -> fmt::Result {
    let mut first = true;
    for (v, &e) in m.exps.iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        write!(f, "{}", ring.names()[v])?;
        if e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.is_one() {
                write!(f, "{a}")?;
            } else {
                if !a.is_one() {
                    write!(f, "{a}*")?;
                }
                write_monomial(f, &self.ring, m)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn xyz() -> Ring {
        WeightSystem::standard(["x", "y", "z"]).unwrap()
    }

    fn v(r: &Ring, n: &str) -> Polynomial {
        Polynomial::var(r, n).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        let r = xyz();
        let (x, y) = (v(&r, "x"), v(&r, "y"));
        assert_eq!(&(&x + &y) * &(&x - &y), &x * &x - &y * &y);
        let zero = Polynomial::zero(&r);
        assert_eq!(&x + &zero, x);
        let one = Polynomial::one(&r);
        let sq = (&x + &one).pow(2);
        assert_eq!(sq, &(&x * &x + x.scale(&integer(2))) + &one);
    }

    #[test]
    fn ring_mismatch_is_an_error() {
        let a = Polynomial::var(&xyz(), "x").unwrap();
        let other = WeightSystem::standard(["x", "w"]).unwrap();
        let b = Polynomial::var(&other, "x").unwrap();
        assert_eq!(a.checked_add(&b), Err(PolyError::RingMismatch));
        assert_eq!(a.checked_mul(&b), Err(PolyError::RingMismatch));
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(WeightSystem::new([("x", 0)]).is_err());
        assert!(WeightSystem::new([("x", 1), ("x", 2)]).is_err());
    }

    #[test]
    fn derivative_examples() {
        let r = xyz();
        let (x, y, z) = (v(&r, "x"), v(&r, "y"), v(&r, "z"));
        let x2y = &(&x * &x) * &y;
        assert_eq!(x2y.partial_derivative("x").unwrap(), (&x * &y).scale(&integer(2)));
        assert!((&x * &x).partial_derivative("y").unwrap().is_zero());
        let h = &(&z * &z) - &x2y;
        assert_eq!(h.partial_derivative("z").unwrap(), z.scale(&integer(2)));
        assert_eq!(x.partial_derivative("q"), Err(PolyError::UnknownVariable("q".into())));
    }

    #[test]
    fn division_examples() {
        let r = xyz();
        let (x, y, z) = (v(&r, "x"), v(&r, "y"), v(&r, "z"));
        let p = &x * &x - &y * &y;
        assert_eq!(p.exact_divide(&(&x - &y)).unwrap(), Some(&x + &y));
        // 2x(z² − x²y) expanded by hand: 2xz² − 2x³y
        let h = &(&z * &z) - &(&(&x * &x) * &y);
        let expanded = Polynomial::from_terms(&r, [(vec![1, 0, 2], integer(2)), (vec![3, 1, 0], integer(-2))]);
        assert_eq!(&x.scale(&integer(2)) * &h, expanded);
        assert_eq!(expanded.exact_divide(&h).unwrap(), Some(x.scale(&integer(2))));
        assert_eq!((&x * &x).exact_divide(&y).unwrap(), None);
        assert_eq!(x.exact_divide(&Polynomial::zero(&r)), Err(PolyError::DivisionByZero));
    }

    #[test]
    fn gcd_examples() {
        let r = xyz();
        let (x, y) = (v(&r, "x"), v(&r, "y"));
        let a = &x * &x - &y * &y;
        let b = (&x + &y).pow(2);
        assert_eq!(a.gcd(&b).unwrap(), &x + &y);
        let p = (&x - &y).scale(&integer(3));
        assert_eq!(p.gcd(&Polynomial::zero(&r)).unwrap(), &x - &y);
        // x²y + xy² = xy(x+y) and xy
        let c = &(&(&x * &x) * &y) + &(&x * &(&y * &y));
        assert_eq!(c.gcd(&(&x * &y)).unwrap(), &x * &y);
        assert!(a.gcd(&Polynomial::from_int(&r, 5)).unwrap().is_one());
    }

    #[test]
    fn squarefree_examples() {
        let r = xyz();
        let (x, y, z) = (v(&r, "x"), v(&r, "y"), v(&r, "z"));
        assert!(!(&(&x * &x) * &y).is_squarefree().unwrap());
        assert!((&(&z * &z) - &(&(&x * &x) * &y)).is_squarefree().unwrap());
        assert!((&(&x * &y) * &(&x + &y)).is_squarefree().unwrap());
        assert_eq!(Polynomial::zero(&r).is_squarefree(), Err(PolyError::ZeroPolynomial));
        let cube = (&(&x * &y) - &z).pow(3);
        assert!(!cube.is_squarefree().unwrap());
    }

    #[test]
    fn weighted_degree_examples() {
        let r = xyz();
        let (x, y) = (v(&r, "x"), v(&r, "y"));
        assert_eq!((&x + &y).weighted_degree().unwrap(), WeightedDegree::Homogeneous(1));
        assert_eq!((&x + &(&y * &y)).weighted_degree().unwrap(), WeightedDegree::Mixed);
        assert_eq!(Polynomial::zero(&r).weighted_degree(), Err(PolyError::ZeroPolynomial));
        for k in [2u32, 3] {
            let w = WeightSystem::new([("W2", k)]).unwrap();
            let p = Polynomial::var(&w, "W2").unwrap().pow(k);
            assert_eq!(p.weighted_degree().unwrap(), WeightedDegree::Homogeneous(k * k));
        }
    }

    #[test]
    fn substitution_examples() {
        let ys = WeightSystem::standard(["y1", "y2"]).unwrap();
        let xs = xyz();
        let p = &v(&ys, "y1") * &v(&ys, "y2");
        let mut images = BTreeMap::new();
        images.insert("y1".to_string(), v(&xs, "x").pow(2));
        images.insert("y2".to_string(), v(&xs, "z"));
        assert_eq!(p.substitute(&xs, &images).unwrap(), &v(&xs, "x").pow(2) * &v(&xs, "z"));
        images.remove("y2");
        assert_eq!(p.substitute(&xs, &images), Err(PolyError::MissingImage("y2".into())));
        let id: BTreeMap<String, Polynomial> =
            ["x", "y", "z"].iter().map(|n| (n.to_string(), v(&xs, n))).collect();
        let q = &(&v(&xs, "x") * &v(&xs, "y")) + &Polynomial::from_int(&xs, 7);
        assert_eq!(q.substitute(&xs, &id).unwrap(), q);
    }

    #[test]
    fn monomial_enumeration_counts() {
        let r = WeightSystem::new([("a", 1), ("b", 2), ("c", 3)]).unwrap();
        let ms = r.monomials_of_degree(4);
        // a⁴, a²b, ac, b²
        assert_eq!(ms.len(), 4);
        assert!(ms.windows(2).all(|w| w[0] > w[1]));
        assert!(ms.iter().all(|m| m.weighted_degree() == 4));
    }

    #[test]
    fn display_is_readable() {
        let r = xyz();
        let p = Polynomial::from_terms(&r, [(vec![1, 0, 0], rational(-2, 3)), (vec![0, 0, 0], integer(1))]);
        assert_eq!(p.to_string(), "-2/3*x + 1");
    }

    pub(crate) fn small_poly(r: Ring) -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(((0u32..3, 0u32..3, 0u32..3), -4i64..5, 1i64..4), 0..5).prop_map(move |ts| {
            Polynomial::from_terms(&r, ts.into_iter().map(|((a, b, c), n, d)| (vec![a, b, c], rational(n, d))))
        })
    }

    fn homogeneous_poly(r: Ring, d: u32) -> impl Strategy<Value = Polynomial> {
        let ms = r.monomials_of_degree(d);
        let n = ms.len();
        prop::collection::vec(-3i64..4, n).prop_map(move |cs| {
            let r2 = r.clone();
            let mut p = Polynomial::zero(&r2);
            for (m, c) in ms.iter().zip(cs) {
                p = &p + &Polynomial::from_monomial(&r2, m.clone(), integer(c));
            }
            p
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ring_axioms(a in small_poly(xyz()), b in small_poly(xyz()), c in small_poly(xyz())) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn division_round_trip(a in small_poly(xyz()), b in small_poly(xyz())) {
            prop_assume!(!b.is_zero());
            let prod = &a * &b;
            prop_assert_eq!(prod.exact_divide(&b).unwrap(), Some(a));
        }

        #[test]
        fn gcd_scales_with_common_factor(a in small_poly(xyz()), b in small_poly(xyz()), g in small_poly(xyz())) {
            prop_assume!(!g.is_zero() && !(a.is_zero() && b.is_zero()));
            let lhs = (&a * &g).gcd(&(&b * &g)).unwrap();
            let rhs = (&g * &a.gcd(&b).unwrap()).monic();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn gcd_divides_both(a in small_poly(xyz()), b in small_poly(xyz())) {
            prop_assume!(!a.is_zero() || !b.is_zero());
            let g = a.gcd(&b).unwrap();
            prop_assert!(g.divides(&a).unwrap());
            prop_assert!(g.divides(&b).unwrap());
        }

        #[test]
        fn weighted_degree_is_additive(
            a in homogeneous_poly(WeightSystem::new([("x", 1), ("y", 2), ("z", 3)]).unwrap(), 4),
            b in homogeneous_poly(WeightSystem::new([("x", 1), ("y", 2), ("z", 3)]).unwrap(), 3),
        ) {
            prop_assume!(!a.is_zero() && !b.is_zero());
            let r = WeightSystem::new([("x", 1), ("y", 2), ("z", 3)]).unwrap();
            let a = a.embed(&r).unwrap();
            let b = b.embed(&r).unwrap();
            prop_assert_eq!((&a * &b).weighted_degree().unwrap(), WeightedDegree::Homogeneous(7));
        }
    }
}
