//! Free modules of the form `R[x]/(x^r − Σ c_e x^e)` over a polynomial ring
//! `R`, with the monomial basis `g_i = x^{r−i}` for `i = 1..r`.

use std::fmt;

use crate::polyring::{same_ring, Coeff, Polynomial, Ring};

/// Polynomial in the distinguished variable `x` with coefficients in a
/// coefficient ring; entry `e` is the coefficient of `x^e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XPoly {
    ring: Ring,
    coeffs: Vec<Polynomial>,
}

impl XPoly {
    pub fn new(ring: &Ring, coeffs: Vec<Polynomial>) -> XPoly {
        assert!(coeffs.iter().all(|c| same_ring(c.ring(), ring)), "coefficient ring mismatch");
        let mut p = XPoly { ring: ring.clone(), coeffs };
        p.trim();
        p
    }

    pub fn zero(ring: &Ring) -> XPoly {
        XPoly { ring: ring.clone(), coeffs: Vec::new() }
    }

    pub fn constant(c: Polynomial) -> XPoly {
        let ring = c.ring().clone();
        XPoly::new(&ring, vec![c])
    }

    /// `c·x^e`.
    pub fn monomial(c: Polynomial, e: usize) -> XPoly {
        let ring = c.ring().clone();
        let mut coeffs = vec![Polynomial::zero(&ring); e];
        coeffs.push(c);
        XPoly::new(&ring, coeffs)
    }

    pub fn x_power(ring: &Ring, e: usize) -> XPoly {
        XPoly::monomial(Polynomial::one(ring), e)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree in `x`; `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, e: usize) -> Polynomial {
        self.coeffs.get(e).cloned().unwrap_or_else(|| Polynomial::zero(&self.ring))
    }

    pub fn coeffs(&self) -> &[Polynomial] {
        &self.coeffs
    }

    pub fn add(&self, other: &XPoly) -> XPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        XPoly::new(&self.ring, (0..n).map(|e| &self.coeff(e) + &other.coeff(e)).collect())
    }

    pub fn sub(&self, other: &XPoly) -> XPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        XPoly::new(&self.ring, (0..n).map(|e| &self.coeff(e) - &other.coeff(e)).collect())
    }

    pub fn mul(&self, other: &XPoly) -> XPoly {
        if self.is_zero() || other.is_zero() {
            return XPoly::zero(&self.ring);
        }
        let mut out = vec![Polynomial::zero(&self.ring); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] = &out[i + j] + &(a * b);
                }
            }
        }
        XPoly::new(&self.ring, out)
    }

    pub fn scale(&self, c: &Polynomial) -> XPoly {
        XPoly::new(&self.ring, self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn scale_rational(&self, c: &Coeff) -> XPoly {
        XPoly::new(&self.ring, self.coeffs.iter().map(|a| a.scale(c)).collect())
    }

    /// Formal derivative in `x`.
    pub fn derivative(&self) -> XPoly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(e, c)| c.scale(&crate::polyring::integer(e as i64)))
            .collect();
        XPoly::new(&self.ring, coeffs)
    }

    /// Substitutes a polynomial for `x`, producing an element of the
    /// coefficient ring.
    pub fn evaluate_at(&self, x: &Polynomial) -> Polynomial {
        let mut acc = Polynomial::zero(&self.ring);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }
}

impl fmt::Display for XPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match e {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*x")?,
                _ => write!(f, "({c})*x^{e}")?,
            }
        }
        Ok(())
    }
}

/// The quotient `R[x]/(x^r − Σ_{e<r} rule[e]·x^e)`.
#[derive(Clone, Debug)]
pub struct NormalFormRing {
    ring: Ring,
    rule: Vec<Polynomial>,
}

impl NormalFormRing {
    /// `rule[e]` is the coefficient of `x^e` in the normal form of `x^r`,
    /// where `r = rule.len()`.
    pub fn new(ring: &Ring, rule: Vec<Polynomial>) -> NormalFormRing {
        assert!(!rule.is_empty(), "rank must be positive");
        assert!(rule.iter().all(|c| same_ring(c.ring(), ring)), "coefficient ring mismatch");
        NormalFormRing { ring: ring.clone(), rule }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn rank(&self) -> usize {
        self.rule.len()
    }

    pub fn rule(&self) -> &[Polynomial] {
        &self.rule
    }

    pub fn reduce(&self, p: &XPoly) -> XPoly {
        let r = self.rank();
        let mut c = p.coeffs.clone();
        if c.len() <= r {
            return p.clone();
        }
        for e in (r..c.len()).rev() {
            let top = std::mem::replace(&mut c[e], Polynomial::zero(&self.ring));
            if top.is_zero() {
                continue;
            }
            for (j, rj) in self.rule.iter().enumerate() {
                if !rj.is_zero() {
                    let t = &top * rj;
                    c[e - r + j] = &c[e - r + j] + &t;
                }
            }
        }
        c.truncate(r);
        XPoly::new(&self.ring, c)
    }

    pub fn mul(&self, a: &XPoly, b: &XPoly) -> XPoly {
        self.reduce(&a.mul(b))
    }

    /// Basis element `g_i = x^{r−i}`, `i` 1-based.
    pub fn g(&self, i: usize) -> XPoly {
        assert!((1..=self.rank()).contains(&i));
        XPoly::x_power(&self.ring, self.rank() - i)
    }

    /// Coordinates of the normal form in the basis `g_1..g_r`.
    pub fn coords(&self, p: &XPoly) -> Vec<Polynomial> {
        let q = self.reduce(p);
        (1..=self.rank()).map(|i| q.coeff(self.rank() - i)).collect()
    }

    pub fn from_coords(&self, coords: &[Polynomial]) -> XPoly {
        let r = self.rank();
        let mut c = vec![Polynomial::zero(&self.ring); r];
        for (i, a) in coords.iter().enumerate() {
            c[r - 1 - i] = a.clone();
        }
        XPoly::new(&self.ring, c)
    }

    /// Coefficient of `g_1` in the normal form: the socle projection.
    pub fn phi(&self, p: &XPoly) -> Polynomial {
        self.reduce(p).coeff(self.rank() - 1)
    }

    pub fn pairing(&self, a: &XPoly, b: &XPoly) -> Polynomial {
        self.phi(&a.mul(b))
    }

    /// Columns are the coordinates of `p·g_j`.
    pub fn multiplication_matrix(&self, p: &XPoly) -> Vec<Vec<Polynomial>> {
        (1..=self.rank()).map(|j| self.coords(&p.mul(&self.g(j)))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::WeightSystem;

    fn setup() -> (Ring, NormalFormRing) {
        let r = WeightSystem::new([("a", 2), ("b", 3)]).unwrap();
        let a = Polynomial::var(&r, "a").unwrap();
        let b = Polynomial::var(&r, "b").unwrap();
        // x^3 = -a x - b
        let n = NormalFormRing::new(&r, vec![-b, -a, Polynomial::zero(&r)]);
        (r, n)
    }

    #[test]
    fn reduction_is_idempotent_and_bounded() {
        let (r, n) = setup();
        for e in 0..8 {
            let p = n.reduce(&XPoly::x_power(&r, e));
            assert!(p.degree().map_or(true, |d| d < 3));
            assert_eq!(n.reduce(&p), p);
        }
        for i in 1..=3 {
            let xp = XPoly::x_power(&r, 1).mul(&n.g(i));
            assert!(n.reduce(&xp).degree().unwrap() < 3);
        }
    }

    #[test]
    fn coordinates_round_trip() {
        let (r, n) = setup();
        let p = n.reduce(&XPoly::x_power(&r, 4));
        let a = Polynomial::var(&r, "a").unwrap();
        let b = Polynomial::var(&r, "b").unwrap();
        // x^4 = -a x^2 - b x
        assert_eq!(n.coords(&p), vec![-a, -b, Polynomial::zero(&r)]);
        assert_eq!(n.from_coords(&n.coords(&p)), p);
        assert!(n.phi(&n.g(1)).is_one());
        assert!(n.phi(&n.g(2)).is_zero());
    }

    #[test]
    fn evaluation_matches_horner() {
        let (r, _) = setup();
        let a = Polynomial::var(&r, "a").unwrap();
        let p = XPoly::new(&r, vec![Polynomial::one(&r), a.clone(), Polynomial::one(&r)]);
        assert_eq!(p.evaluate_at(&a), &(&a * &a).scale(&crate::polyring::integer(2)) + &Polynomial::one(&r));
        assert_eq!(p.derivative(), XPoly::new(&r, vec![a, Polynomial::from_int(&r, 2)]));
    }
}
