//! Polynomial vector fields, Saito's criterion, and a graded solver for
//! logarithmic derivations of weighted homogeneous divisors.

use std::collections::HashMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::{terms_record, MatrixRecord, PolyRecord, TermRecord};
use crate::polylinalg::{rational_det, to_rationals, Echelon, LinalgError, PolyMatrix, RationalMatrix};
use crate::polyring::{integer, same_ring, Coeff, Monomial, PolyError, Polynomial, Ring, WeightedDegree};

/// Why a candidate basis fails Saito's criterion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    NotSquarefree,
    NotTangent { field: usize },
    DeterminantNotUnitMultiple { det: String },
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::NotSquarefree => write!(f, "equation is not squarefree"),
            Failure::NotTangent { field } => write!(f, "field {} is not tangent to the equation", field + 1),
            Failure::DeterminantNotUnitMultiple { det } => {
                write!(f, "determinant {det} is not a unit multiple of the equation")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SaitoError {
    #[error("Saito criterion fails: {0}")]
    Failed(Failure),
    #[error("not a candidate basis: {fields} fields in {vars} variables")]
    NotCandidateBasis { fields: usize, vars: usize },
    #[error("equation is zero")]
    ZeroEquation,
    #[error("equation is constant, not a divisor")]
    ConstantEquation,
    #[error("equation is not weighted homogeneous")]
    Inhomogeneous,
    #[error("multiplier degree {given} for generator {index} is inconsistent with the target degree")]
    DegreeInconsistency { index: usize, given: i64 },
    #[error("no Saito basis found among the generators")]
    NotFound,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `Σ aᵢ ∂ᵢ` with one polynomial coefficient per variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    ring: Ring,
    coeffs: Vec<Polynomial>,
}

impl Derivation {
    pub fn new(ring: &Ring, coeffs: Vec<Polynomial>) -> Result<Derivation, PolyError> {
        if coeffs.len() != ring.nvars() {
            return Err(PolyError::InvalidWeights(format!(
                "{} coefficients for {} variables",
                coeffs.len(),
                ring.nvars()
            )));
        }
        if coeffs.iter().any(|c| !same_ring(c.ring(), ring)) {
            return Err(PolyError::RingMismatch);
        }
        Ok(Derivation { ring: ring.clone(), coeffs })
    }

    pub fn zero(ring: &Ring) -> Derivation {
        Derivation { ring: ring.clone(), coeffs: vec![Polynomial::zero(ring); ring.nvars()] }
    }

    /// `∂` of the named variable.
    pub fn partial(ring: &Ring, var: &str) -> Result<Derivation, PolyError> {
        let i = ring.index_of(var)?;
        let mut d = Self::zero(ring);
        d.coeffs[i] = Polynomial::one(ring);
        Ok(d)
    }

    /// Builds a field from `(coefficient, variable)` pairs; repeated
    /// variables accumulate.
    pub fn from_pairs(ring: &Ring, pairs: Vec<(Polynomial, &str)>) -> Result<Derivation, PolyError> {
        let mut d = Self::zero(ring);
        for (c, v) in pairs {
            let i = ring.index_of(v)?;
            d.coeffs[i] = d.coeffs[i].checked_add(&c)?;
        }
        Ok(d)
    }

    /// The weighted Euler field `Σ wt(xᵢ) xᵢ ∂ᵢ`.
    pub fn euler(ring: &Ring) -> Derivation {
        let coeffs = (0..ring.nvars())
            .map(|i| Polynomial::var_index(ring, i).scale(&integer(ring.weight(i) as i64)))
            .collect();
        Derivation { ring: ring.clone(), coeffs }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn coeffs(&self) -> &[Polynomial] {
        &self.coeffs
    }

    pub fn coeff(&self, var: usize) -> &Polynomial {
        &self.coeffs[var]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn apply(&self, p: &Polynomial) -> Result<Polynomial, PolyError> {
        if !same_ring(&self.ring, p.ring()) {
            return Err(PolyError::RingMismatch);
        }
        let mut acc = Polynomial::zero(&self.ring);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() || !p.involves(i) {
                continue;
            }
            acc = &acc + &(a * &p.derivative(i));
        }
        Ok(acc)
    }

    pub fn lie_bracket(&self, other: &Derivation) -> Result<Derivation, PolyError> {
        if !same_ring(&self.ring, &other.ring) {
            return Err(PolyError::RingMismatch);
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for i in 0..self.coeffs.len() {
            coeffs.push(&self.apply(&other.coeffs[i])? - &other.apply(&self.coeffs[i])?);
        }
        Ok(Derivation { ring: self.ring.clone(), coeffs })
    }

    /// Witness `q` with `δ(h) = q·h`, or `None` when δ is not tangent.
    pub fn is_tangent(&self, h: &Polynomial) -> Result<Option<Polynomial>, SaitoError> {
        if h.is_zero() {
            return Err(SaitoError::ZeroEquation);
        }
        let dh = self.apply(h)?;
        Ok(dh.exact_divide(h)?)
    }

    /// Weight `w` such that the coefficient of `∂ᵢ` is homogeneous of degree
    /// `w + wt(xᵢ)`; `None` for the zero field or an inhomogeneous one.
    pub fn weight(&self) -> Option<i64> {
        let mut w = None;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = c.homogeneous_degree()? as i64 - self.ring.weight(i) as i64;
            match w {
                None => w = Some(d),
                Some(v) if v != d => return None,
                _ => {}
            }
        }
        w
    }

    /// Part of every coefficient of ordinary degree exactly one.
    pub fn linear_part(&self) -> Derivation {
        Derivation { ring: self.ring.clone(), coeffs: self.coeffs.iter().map(|c| c.ordinary_part(1)).collect() }
    }

    pub fn add(&self, other: &Derivation) -> Result<Derivation, PolyError> {
        if !same_ring(&self.ring, &other.ring) {
            return Err(PolyError::RingMismatch);
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Derivation { ring: self.ring.clone(), coeffs })
    }

    pub fn scale(&self, c: &Coeff) -> Derivation {
        Derivation { ring: self.ring.clone(), coeffs: self.coeffs.iter().map(|a| a.scale(c)).collect() }
    }

    pub fn mul_poly(&self, p: &Polynomial) -> Result<Derivation, PolyError> {
        let coeffs = self.coeffs.iter().map(|a| a.checked_mul(p)).collect::<Result<_, _>>()?;
        Ok(Derivation { ring: self.ring.clone(), coeffs })
    }

    pub fn neg(&self) -> Derivation {
        self.scale(&integer(-1))
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})*d/d{}", self.ring.names()[i])?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// An ordered list of `n` fields in `n` variables; column `j` of the matrix
/// holds the coefficients of field `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaitoMatrix {
    fields: Vec<Derivation>,
}

impl SaitoMatrix {
    pub fn new(fields: Vec<Derivation>) -> Result<SaitoMatrix, SaitoError> {
        let vars = fields.first().map_or(0, |f| f.ring.nvars());
        if fields.is_empty() || fields.len() != vars {
            return Err(SaitoError::NotCandidateBasis { fields: fields.len(), vars });
        }
        if fields.iter().any(|f| !same_ring(&f.ring, &fields[0].ring)) {
            return Err(PolyError::RingMismatch.into());
        }
        Ok(SaitoMatrix { fields })
    }

    /// Reads the columns of a square matrix as fields.
    pub fn from_matrix(m: &PolyMatrix) -> Result<SaitoMatrix, SaitoError> {
        if m.cols() != m.ring().nvars() || m.rows() != m.ring().nvars() {
            return Err(SaitoError::NotCandidateBasis { fields: m.cols(), vars: m.rows() });
        }
        let fields = (0..m.cols())
            .map(|j| Derivation::new(m.ring(), m.column(j)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(fields)
    }

    pub fn fields(&self) -> &[Derivation] {
        &self.fields
    }

    pub fn ring(&self) -> &Ring {
        &self.fields[0].ring
    }

    pub fn matrix(&self) -> PolyMatrix {
        let cols = self.fields.iter().map(|f| f.coeffs.clone()).collect();
        PolyMatrix::from_columns(self.ring(), cols).expect("square by construction")
    }

    pub fn det(&self) -> Result<Polynomial, SaitoError> {
        Ok(self.matrix().det()?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scope {
    /// `det = c·h` with `c` a nonzero rational.
    Global,
    /// `det = u·h` with `u(0) ≠ 0`: a basis of the germ at the origin.
    Local,
}

/// Evidence that `V(h)` is free: a basis, tangency witnesses and the
/// determinant quotient, all re-checkable by [`FreenessCertificate::reverify`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreenessCertificate {
    pub equation: Polynomial,
    pub basis: SaitoMatrix,
    pub witnesses: Vec<Polynomial>,
    pub det_quotient: Polynomial,
    pub squarefree: bool,
    pub scope: Scope,
}

impl FreenessCertificate {
    /// The rational `c` with `det = c·h` (global certificates).
    pub fn det_constant(&self) -> Option<Coeff> {
        (self.scope == Scope::Global && self.det_quotient.is_constant()).then(|| self.det_quotient.constant_term())
    }

    pub fn field_weights(&self) -> Vec<Option<i64>> {
        self.basis.fields().iter().map(|f| f.weight()).collect()
    }

    /// Recomputes every recorded identity from the raw data.
    pub fn reverify(&self) -> Result<(), SaitoError> {
        let fresh = match self.scope {
            Scope::Global => verify_saito(&self.equation, self.basis.fields())?,
            Scope::Local => verify_saito_local(&self.equation, self.basis.fields())?,
        };
        if fresh.witnesses != self.witnesses || fresh.det_quotient != self.det_quotient || !self.squarefree {
            return Err(SaitoError::Failed(Failure::DeterminantNotUnitMultiple {
                det: "recorded data disagrees with recomputation".into(),
            }));
        }
        Ok(())
    }

    pub fn to_record(&self) -> CertificateRecord {
        CertificateRecord {
            equation: PolyRecord::from_poly(&self.equation),
            basis: MatrixRecord::from_matrix(&self.basis.matrix()),
            field_weights: self.field_weights(),
            witnesses: self.witnesses.iter().map(terms_record).collect(),
            det_quotient: terms_record(&self.det_quotient),
            squarefree: self.squarefree,
            scope: self.scope,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub equation: PolyRecord,
    pub basis: MatrixRecord,
    pub field_weights: Vec<Option<i64>>,
    pub witnesses: Vec<Vec<TermRecord>>,
    pub det_quotient: Vec<TermRecord>,
    pub squarefree: bool,
    pub scope: Scope,
}

fn check_equation(h: &Polynomial) -> Result<(), SaitoError> {
    if h.is_zero() {
        return Err(SaitoError::ZeroEquation);
    }
    if h.is_constant() {
        return Err(SaitoError::ConstantEquation);
    }
    Ok(())
}

fn saito_common(h: &Polynomial, fields: &[Derivation]) -> Result<(SaitoMatrix, Vec<Polynomial>, Polynomial), SaitoError> {
    check_equation(h)?;
    let n = h.ring().nvars();
    if fields.len() != n {
        return Err(SaitoError::NotCandidateBasis { fields: fields.len(), vars: n });
    }
    if fields.iter().any(|f| !same_ring(&f.ring, h.ring())) {
        return Err(PolyError::RingMismatch.into());
    }
    if !h.is_squarefree()? {
        return Err(SaitoError::Failed(Failure::NotSquarefree));
    }
    let mut witnesses = Vec::with_capacity(n);
    for (i, f) in fields.iter().enumerate() {
        match f.is_tangent(h)? {
            Some(q) => witnesses.push(q),
            None => return Err(SaitoError::Failed(Failure::NotTangent { field: i })),
        }
    }
    let basis = SaitoMatrix::new(fields.to_vec())?;
    let det = basis.det()?;
    let quotient = det
        .exact_divide(h)?
        .ok_or_else(|| SaitoError::Failed(Failure::DeterminantNotUnitMultiple { det: det.to_string() }))?;
    Ok((basis, witnesses, quotient))
}

/// Saito's criterion with "unit" read as a nonzero rational constant. The
/// clauses are checked in the order squarefree, tangency, determinant.
pub fn verify_saito(h: &Polynomial, fields: &[Derivation]) -> Result<FreenessCertificate, SaitoError> {
    let (basis, witnesses, quotient) = saito_common(h, fields)?;
    if !quotient.is_constant() || quotient.is_zero() {
        let det = (&quotient * h).to_string();
        return Err(SaitoError::Failed(Failure::DeterminantNotUnitMultiple { det }));
    }
    Ok(FreenessCertificate {
        equation: h.clone(),
        basis,
        witnesses,
        det_quotient: quotient,
        squarefree: true,
        scope: Scope::Global,
    })
}

/// Saito's criterion for the germ at the origin: the determinant quotient
/// only has to be nonzero at 0.
pub fn verify_saito_local(h: &Polynomial, fields: &[Derivation]) -> Result<FreenessCertificate, SaitoError> {
    let (basis, witnesses, quotient) = saito_common(h, fields)?;
    if quotient.constant_term().is_zero() {
        let det = (&quotient * h).to_string();
        return Err(SaitoError::Failed(Failure::DeterminantNotUnitMultiple { det }));
    }
    Ok(FreenessCertificate {
        equation: h.clone(),
        basis,
        witnesses,
        det_quotient: quotient,
        squarefree: true,
        scope: Scope::Local,
    })
}

/// Whether every bracket of two basis fields is again tangent to the
/// equation, as it must be for a Lie-closed logarithmic module.
pub fn bracket_closed(cert: &FreenessCertificate) -> Result<bool, SaitoError> {
    let fields = cert.basis.fields();
    for (i, a) in fields.iter().enumerate() {
        for b in &fields[i + 1..] {
            if a.lie_bracket(b)?.is_tangent(&cert.equation)?.is_none() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A generator of the logarithmic module produced by the solver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedField {
    pub weight: i64,
    pub field: Derivation,
}

fn homogeneous_weight(h: &Polynomial) -> Result<u32, SaitoError> {
    check_equation(h)?;
    match h.weighted_degree()? {
        WeightedDegree::Homogeneous(d) => Ok(d),
        WeightedDegree::Mixed => Err(SaitoError::Inhomogeneous),
    }
}

/// Monomials for the unknown coefficients of a weight-`w` field.
fn slice_layout(ring: &Ring, w: i64) -> Vec<(usize, Monomial)> {
    let mut out = Vec::new();
    for i in 0..ring.nvars() {
        let d = w + ring.weight(i) as i64;
        if d >= 0 {
            for m in ring.monomials_of_degree(d as u32) {
                out.push((i, m));
            }
        }
    }
    out
}

fn field_from_vector(ring: &Ring, layout: &[(usize, Monomial)], v: &[BigRational]) -> Derivation {
    let mut coeffs: Vec<Vec<(Vec<u32>, Coeff)>> = vec![Vec::new(); ring.nvars()];
    for ((i, m), c) in layout.iter().zip(v) {
        if !c.is_zero() {
            coeffs[*i].push((m.exponents().to_vec(), c.clone()));
        }
    }
    Derivation {
        ring: ring.clone(),
        coeffs: coeffs.into_iter().map(|t| Polynomial::from_terms(ring, t)).collect(),
    }
}

fn vector_from_field(layout_index: &HashMap<(usize, Monomial), usize>, f: &Derivation) -> Vec<(usize, BigRational)> {
    let mut out = Vec::new();
    for (i, c) in f.coeffs.iter().enumerate() {
        for (m, a) in c.terms() {
            let col = layout_index[&(i, m.clone())];
            out.push((col, a.clone()));
        }
    }
    out
}

/// Builds the coefficient matrix of `δ(h) − q·h = 0` for δ of weight `w`;
/// columns are the δ unknowns followed by the q unknowns.
fn tangency_system(h: &Polynomial, dh: &[Polynomial], layout: &[(usize, Monomial)], w: i64) -> (Echelon, usize) {
    let ring = h.ring();
    let q_monos = if w >= 0 { ring.monomials_of_degree(w as u32) } else { Vec::new() };
    let ncols = layout.len() + q_monos.len();
    let mut rows: HashMap<Monomial, Vec<(usize, BigRational)>> = HashMap::new();
    for (col, (i, m)) in layout.iter().enumerate() {
        for (t, c) in dh[*i].terms() {
            rows.entry(m.mul(t)).or_default().push((col, c.clone()));
        }
    }
    for (k, m) in q_monos.iter().enumerate() {
        for (t, c) in h.terms() {
            rows.entry(m.mul(t)).or_default().push((layout.len() + k, -c.clone()));
        }
    }
    let mut keyed: Vec<(Monomial, Vec<(usize, BigRational)>)> = rows.into_iter().collect();
    keyed.sort_by(|a, b| b.0.cmp(&a.0));
    let mut e = Echelon::new(ncols);
    for (_, r) in keyed {
        e.insert(r);
    }
    (e, q_monos.len())
}

/// Incremental graded solver for `Der(−log h)` of a weighted homogeneous `h`.
#[derive(Clone, Debug)]
pub struct LogSolver {
    h: Polynomial,
    dh: Vec<Polynomial>,
    degree: u32,
    next_weight: i64,
    generators: Vec<GradedField>,
    slice_dims: Vec<(i64, usize)>,
}

impl LogSolver {
    pub fn new(h: &Polynomial) -> Result<LogSolver, SaitoError> {
        let degree = homogeneous_weight(h)?;
        let ring = h.ring();
        let lo = -(ring.weights().iter().copied().max().unwrap_or(0) as i64);
        let dh = (0..ring.nvars()).map(|i| h.derivative(i)).collect();
        Ok(LogSolver { h: h.clone(), dh, degree, next_weight: lo, generators: Vec::new(), slice_dims: Vec::new() })
    }

    pub fn equation(&self) -> &Polynomial {
        &self.h
    }

    pub fn equation_degree(&self) -> u32 {
        self.degree
    }

    pub fn generators(&self) -> &[GradedField] {
        &self.generators
    }

    /// Highest weight solved so far.
    pub fn solved_through(&self) -> i64 {
        self.next_weight - 1
    }

    /// Dimension of every solved slice of tangent fields.
    pub fn slice_dimensions(&self) -> &[(i64, usize)] {
        &self.slice_dims
    }

    /// Basis of all weight-`w` tangent fields, computed from scratch.
    pub fn slice_basis(&self, w: i64) -> Vec<Derivation> {
        let ring = self.h.ring();
        let layout = slice_layout(ring, w);
        let (e, _) = tangency_system(&self.h, &self.dh, &layout, w);
        // the reduced echelon basis of the projected kernel is canonical
        let mut proj = Echelon::new(layout.len());
        for v in e.kernel() {
            proj.insert(to_rationals(&v[..layout.len()]).into_iter().enumerate().collect());
        }
        proj.reduced_basis()
            .into_iter()
            .map(|v| field_from_vector(ring, &layout, &to_rationals(&v)))
            .collect()
    }

    /// Solves every slice up to and including weight `w`.
    pub fn extend_to(&mut self, w: i64) {
        while self.next_weight <= w {
            self.solve_slice(self.next_weight);
            self.next_weight += 1;
        }
    }

    fn solve_slice(&mut self, w: i64) {
        let ring = self.h.ring().clone();
        let layout = slice_layout(&ring, w);
        let index: HashMap<(usize, Monomial), usize> =
            layout.iter().cloned().enumerate().map(|(k, key)| (key, k)).collect();
        let basis = self.slice_basis(w);
        self.slice_dims.push((w, basis.len()));
        if basis.is_empty() {
            return;
        }
        let mut span = Echelon::new(layout.len());
        for g in &self.generators {
            let gap = w - g.weight;
            if gap <= 0 {
                continue;
            }
            for m in ring.monomials_of_degree(gap as u32) {
                let t = Polynomial::from_monomial(&ring, m, Coeff::one());
                let f = g.field.mul_poly(&t).expect("same ring");
                span.insert(vector_from_field(&index, &f));
                if span.rank() == basis.len() {
                    return;
                }
            }
        }
        for f in basis {
            if span.insert(vector_from_field(&index, &f)) {
                self.generators.push(GradedField { weight: w, field: f });
            }
        }
    }

    /// Dimension of the weight-`w` part of the module generated by the
    /// current generators.
    pub fn generated_dimension(&self, w: i64) -> usize {
        let ring = self.h.ring();
        let layout = slice_layout(ring, w);
        let index: HashMap<(usize, Monomial), usize> =
            layout.iter().cloned().enumerate().map(|(k, key)| (key, k)).collect();
        let mut span = Echelon::new(layout.len());
        for g in &self.generators {
            let gap = w - g.weight;
            if gap < 0 {
                continue;
            }
            for m in ring.monomials_of_degree(gap as u32) {
                let t = Polynomial::from_monomial(ring, m, Coeff::one());
                span.insert(vector_from_field(&index, &g.field.mul_poly(&t).expect("same ring")));
            }
        }
        span.rank()
    }

    /// Weight any Saito basis member is bounded by, given the generators
    /// found so far: `wt(h) − Σwt(xᵢ) − (n−1)·w_min`.
    pub fn weight_bound(&self) -> Option<i64> {
        let wmin = self.generators.iter().map(|g| g.weight).min()?;
        let ring = self.h.ring();
        let target = self.degree as i64 - ring.weights().iter().map(|&w| w as i64).sum::<i64>();
        Some(target - (ring.nvars() as i64 - 1) * wmin)
    }
}

/// Generators of every weight up to `max_weight` (default `wt(h)`),
/// minimalized slice by slice.
pub fn solve_logarithmic(h: &Polynomial, max_weight: Option<i64>) -> Result<Vec<GradedField>, SaitoError> {
    let mut s = LogSolver::new(h)?;
    let w = max_weight.unwrap_or(s.degree as i64);
    s.extend_to(w);
    Ok(s.generators)
}

fn sample_points(ring: &Ring, h: &Polynomial, count: usize) -> Vec<(Vec<Coeff>, Coeff)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a17);
    let mut out = Vec::new();
    while out.len() < count {
        let p: Vec<Coeff> = (0..ring.nvars()).map(|_| integer(rng.gen_range(-25..=25))).collect();
        let v = h.evaluate(&p);
        if !v.is_zero() {
            out.push((p, v));
        }
    }
    out
}

/// Searches `n`-subsets of the generators (sorted by weight, then index)
/// whose weights sum to `wt(h) − Σ wt(xᵢ)`, returning the first certified one.
pub fn find_saito_basis(h: &Polynomial, generators: &[GradedField]) -> Result<FreenessCertificate, SaitoError> {
    let degree = homogeneous_weight(h)?;
    let ring = h.ring();
    let n = ring.nvars();
    let target = degree as i64 - ring.weights().iter().map(|&w| w as i64).sum::<i64>();
    let mut order: Vec<usize> = (0..generators.len()).collect();
    order.sort_by_key(|&i| (generators[i].weight, i));
    let weights: Vec<i64> = order.iter().map(|&i| generators[i].weight).collect();
    if weights.len() < n {
        return Err(SaitoError::NotFound);
    }
    if !h.is_squarefree()? {
        return Err(SaitoError::Failed(Failure::NotSquarefree));
    }
    let points = sample_points(ring, h, 2);
    let evaluated: Vec<Vec<Vec<Coeff>>> = points
        .iter()
        .map(|(p, _)| {
            order
                .iter()
                .map(|&i| generators[i].field.coeffs.iter().map(|c| c.evaluate(p)).collect())
                .collect()
        })
        .collect();
    let mut chosen = Vec::with_capacity(n);
    let mut found = None;
    search(&weights, n, target, 0, &mut chosen, &mut |subset| {
        // cheap necessary test: det/h must be the same nonzero constant at sample points
        let mut ratio: Option<Coeff> = None;
        for (pt, (_, hv)) in evaluated.iter().zip(&points) {
            let m: Vec<Vec<Coeff>> = (0..n).map(|r| subset.iter().map(|&c| pt[c][r].clone()).collect()).collect();
            let q = rational_det(m) / hv;
            if q.is_zero() || ratio.as_ref().is_some_and(|r| *r != q) {
                return false;
            }
            ratio = Some(q);
        }
        let fields: Vec<Derivation> = subset.iter().map(|&c| generators[order[c]].field.clone()).collect();
        match verify_saito(h, &fields) {
            Ok(cert) => {
                found = Some(cert);
                true
            }
            Err(_) => false,
        }
    });
    found.ok_or(SaitoError::NotFound)
}

fn search(
    weights: &[i64],
    n: usize,
    target: i64,
    start: usize,
    chosen: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    let need = n - chosen.len();
    let sum: i64 = chosen.iter().map(|&c| weights[c]).sum();
    if need == 0 {
        return sum == target && visit(chosen);
    }
    for i in start..=weights.len().saturating_sub(need) {
        if weights.len() - i < need {
            break;
        }
        // weights are sorted: bound the remaining sum from both sides
        let lo: i64 = sum + weights[i..i + need].iter().sum::<i64>();
        if lo > target {
            break;
        }
        let hi: i64 = sum + weights[i] + weights[weights.len() - (need - 1)..].iter().sum::<i64>();
        if hi < target {
            continue;
        }
        chosen.push(i);
        if search(weights, n, target, i + 1, chosen, visit) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Runs the solver up to the determinant-weight bound (capped by
/// `max_weight`, default `wt(h)`) and searches for a Saito basis, trying the
/// search after every new slice.
pub fn certify_free(h: &Polynomial, max_weight: Option<i64>) -> Result<(FreenessCertificate, LogSolver), SaitoError> {
    let mut s = LogSolver::new(h)?;
    let cap = max_weight.unwrap_or(s.degree as i64);
    let n = h.ring().nvars();
    let mut tried = 0;
    loop {
        let w = s.next_weight;
        if w > cap || s.weight_bound().is_some_and(|b| w > b) {
            return Err(SaitoError::NotFound);
        }
        s.extend_to(w);
        if s.generators.len() >= n && s.generators.len() > tried {
            tried = s.generators.len();
            if let Ok(cert) = find_saito_basis(h, &s.generators) {
                return Ok((cert, s));
            }
        }
    }
}

/// Homogeneous multipliers `c_j` of degree `degrees[j]` with `p = Σ c_j g_j`.
/// A negative degree forces the multiplier to be zero.
pub fn ideal_membership_homogeneous(
    p: &Polynomial,
    gens: &[Polynomial],
    degrees: &[i64],
) -> Result<Option<Vec<Polynomial>>, SaitoError> {
    let ring = p.ring();
    if degrees.len() != gens.len() {
        return Err(SaitoError::DegreeInconsistency { index: gens.len().min(degrees.len()), given: -1 });
    }
    let target = if p.is_zero() {
        None
    } else {
        Some(p.homogeneous_degree().ok_or(SaitoError::Inhomogeneous)? as i64)
    };
    let mut layout: Vec<(usize, Monomial)> = Vec::new();
    for (j, (g, &d)) in gens.iter().zip(degrees).enumerate() {
        if !same_ring(g.ring(), ring) {
            return Err(PolyError::RingMismatch.into());
        }
        if d < 0 || g.is_zero() {
            continue;
        }
        let gd = g.homogeneous_degree().ok_or(SaitoError::Inhomogeneous)? as i64;
        if let Some(t) = target {
            if gd + d != t {
                return Err(SaitoError::DegreeInconsistency { index: j, given: d });
            }
        }
        for m in ring.monomials_of_degree(d as u32) {
            layout.push((j, m));
        }
    }
    let mut rows: HashMap<Monomial, usize> = HashMap::new();
    let mut mat_rows: Vec<std::collections::BTreeMap<usize, BigRational>> = Vec::new();
    let row_of = |m: Monomial, rows: &mut HashMap<Monomial, usize>, mat: &mut Vec<_>| -> usize {
        let next = rows.len();
        *rows.entry(m).or_insert_with(|| {
            mat.push(std::collections::BTreeMap::new());
            next
        })
    };
    for (col, (j, m)) in layout.iter().enumerate() {
        for (t, c) in gens[*j].terms() {
            let r = row_of(m.mul(t), &mut rows, &mut mat_rows);
            *mat_rows[r].entry(col).or_insert_with(BigRational::zero) += c;
        }
    }
    let mut rhs_terms = Vec::new();
    for (t, c) in p.terms() {
        let r = row_of(t.clone(), &mut rows, &mut mat_rows);
        rhs_terms.push((r, c.clone()));
    }
    let mut mat = RationalMatrix::new(layout.len());
    for r in mat_rows {
        mat.push_row(r);
    }
    let mut b = vec![BigRational::zero(); mat.nrows()];
    for (r, c) in rhs_terms {
        b[r] = c;
    }
    let Some(x) = mat.solve(&b)? else {
        return Ok(None);
    };
    let mut out = vec![Polynomial::zero(ring); gens.len()];
    for ((j, m), c) in layout.iter().zip(x) {
        if !c.is_zero() {
            out[*j] = &out[*j] + &Polynomial::from_monomial(ring, m.clone(), c);
        }
    }
    Ok(Some(out))
}

/// The space of polynomial tangent fields whose coefficients have ordinary
/// degree at most `max_degree`, for any (possibly inhomogeneous) `h`.
pub fn tangent_fields_bounded(h: &Polynomial, max_degree: u32) -> Result<Vec<Derivation>, SaitoError> {
    check_equation(h)?;
    let ring = h.ring();
    let n = ring.nvars();
    let std_ring = crate::polyring::WeightSystem::standard(ring.names().iter().cloned())?;
    // enumerate monomials by ordinary degree
    let monos_upto = |d: i64| -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        for k in 0..=d.max(-1) {
            for m in std_ring.monomials_of_degree(k as u32) {
                out.push(m.exponents().to_vec());
            }
        }
        out
    };
    let field_monos = monos_upto(max_degree as i64);
    let q_monos = monos_upto(max_degree as i64 - 1);
    let mut layout: Vec<(usize, Vec<u32>)> = Vec::new();
    for i in 0..n {
        for m in &field_monos {
            layout.push((i, m.clone()));
        }
    }
    let dh: Vec<Polynomial> = (0..n).map(|i| h.derivative(i)).collect();
    let ncols = layout.len() + q_monos.len();
    let mut rows: HashMap<Monomial, Vec<(usize, BigRational)>> = HashMap::new();
    for (col, (i, m)) in layout.iter().enumerate() {
        let mono = Monomial::new(ring, m.clone());
        for (t, c) in dh[*i].terms() {
            rows.entry(mono.mul(t)).or_default().push((col, c.clone()));
        }
    }
    for (k, m) in q_monos.iter().enumerate() {
        let mono = Monomial::new(ring, m.clone());
        for (t, c) in h.terms() {
            rows.entry(mono.mul(t)).or_default().push((layout.len() + k, -c.clone()));
        }
    }
    let mut keyed: Vec<_> = rows.into_iter().collect();
    keyed.sort_by(|a, b| b.0.cmp(&a.0));
    let mut e = Echelon::new(ncols);
    for (_, r) in keyed {
        e.insert(r);
    }
    let mut out = Vec::new();
    for v in e.kernel() {
        let mut coeffs: Vec<Vec<(Vec<u32>, Coeff)>> = vec![Vec::new(); n];
        for ((i, m), c) in layout.iter().zip(&v) {
            if !c.is_zero() {
                coeffs[*i].push((m.clone(), BigRational::from_integer(c.clone())));
            }
        }
        let f = Derivation {
            ring: ring.clone(),
            coeffs: coeffs.into_iter().map(|t| Polynomial::from_terms(ring, t)).collect(),
        };
        if !f.is_zero() {
            out.push(f);
        }
    }
    Ok(out)
}

/// Local Saito basis at the origin for an arbitrary `h`. Fields are taken
/// greedily from the sparsest bounded-degree tangent fields; a candidate is
/// kept when it, together with seeded random combinations filling the
/// remaining slots, passes the determinant screen. The final set must have
/// determinant `u·h` with `u(0) ≠ 0`.
pub fn find_local_saito_basis(
    h: &Polynomial,
    max_degree: u32,
    seed: u64,
    attempts: usize,
) -> Result<FreenessCertificate, SaitoError> {
    let mut space = tangent_fields_bounded(h, max_degree)?;
    let n = h.ring().nvars();
    if space.len() < n {
        return Err(SaitoError::NotFound);
    }
    space.sort_by_key(|f| {
        let order = f.coeffs().iter().filter_map(|c| c.order()).min().unwrap_or(0);
        (order, f.coeffs().iter().map(|c| c.num_terms()).sum::<usize>())
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..attempts {
        let mut chosen: Vec<Derivation> = Vec::with_capacity(n);
        for g in &space {
            if chosen.len() == n {
                break;
            }
            let mut trial = chosen.clone();
            trial.push(g.clone());
            while trial.len() < n {
                trial.push(random_combination(h.ring(), &space, &mut rng)?);
            }
            if local_unit_screen(h, &trial, &mut rng) {
                chosen.push(g.clone());
            }
        }
        if chosen.len() == n {
            if let Ok(cert) = verify_saito_local(h, &chosen) {
                return Ok(cert);
            }
        }
    }
    Err(SaitoError::NotFound)
}

fn random_combination(ring: &Ring, space: &[Derivation], rng: &mut ChaCha8Rng) -> Result<Derivation, SaitoError> {
    let mut f = Derivation::zero(ring);
    for g in space {
        let c: i64 = rng.gen_range(-3..=3);
        if c != 0 {
            f = f.add(&g.scale(&integer(c)))?;
        }
    }
    Ok(f)
}

/// Coefficients of `t^0..t^d` in the determinant of the coefficient matrix
/// restricted to the ray `x = t·p`.
pub fn ray_determinant(fields: &[Derivation], point: &[Coeff], d: usize) -> Vec<Coeff> {
    let n = fields.len();
    let series = |c: &Polynomial| -> Vec<Coeff> {
        let mut s = vec![Coeff::zero(); d + 1];
        for (m, a) in c.terms() {
            let deg = m.total_degree() as usize;
            if deg <= d {
                let mut v = a.clone();
                for (e, x) in m.exponents().iter().zip(point) {
                    for _ in 0..*e {
                        v *= x;
                    }
                }
                s[deg] += v;
            }
        }
        s
    };
    let mul = |a: &[Coeff], b: &[Coeff]| -> Vec<Coeff> {
        let mut out = vec![Coeff::zero(); d + 1];
        for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.iter().enumerate().take(d + 1 - i) {
                if !y.is_zero() {
                    out[i + j] += x * y;
                }
            }
        }
        out
    };
    let entries: Vec<Vec<Vec<Coeff>>> = fields.iter().map(|f| f.coeffs().iter().map(series).collect()).collect();
    // minors[mask] over the first popcount(mask) rows and the fields in mask
    let mut one = vec![Coeff::zero(); d + 1];
    one[0] = Coeff::one();
    let mut minors: HashMap<usize, Vec<Coeff>> = HashMap::from([(0, one)]);
    for row in 0..n {
        let mut next: HashMap<usize, Vec<Coeff>> = HashMap::new();
        for (mask, m) in &minors {
            for (col, field) in entries.iter().enumerate() {
                let e = &field[row];
                if mask & (1 << col) != 0 || e.iter().all(|c| c.is_zero()) {
                    continue;
                }
                let mut t = mul(m, e);
                if (mask >> col).count_ones() % 2 == 1 {
                    t.iter_mut().for_each(|c| *c = -c.clone());
                }
                let slot = next.entry(mask | (1 << col)).or_insert_with(|| vec![Coeff::zero(); d + 1]);
                slot.iter_mut().zip(t).for_each(|(s, c)| *s += c);
            }
        }
        minors = next;
    }
    minors.remove(&((1 << n) - 1)).unwrap_or_else(|| vec![Coeff::zero(); d + 1])
}

/// Screen for `det = u·h` with `u(0) ≠ 0`: the determinant has a nonzero
/// part in the order of `h`, tested on a random ray. A false negative only
/// discards a candidate; acceptance is always decided exactly.
fn local_unit_screen(h: &Polynomial, fields: &[Derivation], rng: &mut ChaCha8Rng) -> bool {
    let Some(o) = h.order() else { return false };
    let point: Vec<Coeff> = (0..h.ring().nvars()).map(|_| integer(rng.gen_range(-50..=50))).collect();
    !ray_determinant(fields, &point, o as usize)[o as usize].is_zero()
}

/// Constants `c_j` with `p = Σ c_j g_j`, or `None`.
pub fn constant_combination(p: &Polynomial, gens: &[Polynomial]) -> Result<Option<Vec<Coeff>>, SaitoError> {
    let ring = p.ring();
    let mut cols: Vec<HashMap<Monomial, Coeff>> = Vec::new();
    let mut monos: HashMap<Monomial, usize> = HashMap::new();
    for g in gens {
        if !same_ring(g.ring(), ring) {
            return Err(PolyError::RingMismatch.into());
        }
        cols.push(g.terms().iter().cloned().collect());
        for (m, _) in g.terms() {
            let k = monos.len();
            monos.entry(m.clone()).or_insert(k);
        }
    }
    for (m, _) in p.terms() {
        let k = monos.len();
        monos.entry(m.clone()).or_insert(k);
    }
    let mut keyed: Vec<(Monomial, usize)> = monos.into_iter().collect();
    keyed.sort_by(|a, b| b.0.cmp(&a.0));
    let mut mat = RationalMatrix::new(gens.len());
    let mut b = Vec::with_capacity(keyed.len());
    for (m, _) in &keyed {
        let row = cols
            .iter()
            .enumerate()
            .filter_map(|(j, c)| c.get(m).map(|v| (j, v.clone())))
            .collect();
        mat.push_row(row);
        b.push(p.coefficient_of(m));
    }
    Ok(mat.solve(&b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_polynomial;
    use crate::polyring::WeightSystem;
    use proptest::prelude::*;

    fn ring(vars: &[(&str, u32)]) -> Ring {
        WeightSystem::new(vars.iter().map(|&(n, w)| (n, w))).unwrap()
    }

    fn poly(r: &Ring, s: &str) -> Polynomial {
        parse_polynomial(r, s).unwrap()
    }

    fn field(r: &Ring, cs: &[&str]) -> Derivation {
        Derivation::new(r, cs.iter().map(|c| poly(r, c)).collect()).unwrap()
    }

    #[test]
    fn apply_examples() {
        let r = ring(&[("x", 1), ("y", 1)]);
        assert_eq!(field(&r, &["x", "0"]).apply(&poly(&r, "x^2")).unwrap(), poly(&r, "2*x^2"));
        assert!(field(&r, &["0", "x"]).apply(&poly(&r, "x")).unwrap().is_zero());
    }

    #[test]
    fn euler_scales_by_degree() {
        let r = ring(&[("V1", 1), ("W1", 2), ("W2", 2)]);
        let h = poly(&r, "V1^2*W1 - W2^2");
        let e = Derivation::euler(&r);
        assert_eq!(e.is_tangent(&h).unwrap(), Some(Polynomial::from_int(&r, 4)));
    }

    #[test]
    fn bracket_examples() {
        let r = ring(&[("x", 1), ("y", 1)]);
        let a = field(&r, &["0", "x"]);
        let b = field(&r, &["y", "0"]);
        assert_eq!(a.lie_bracket(&b).unwrap(), field(&r, &["x", "-y"]));
        assert!(a.lie_bracket(&a).unwrap().is_zero());
    }

    #[test]
    fn tangency_examples() {
        let r = ring(&[("x", 1), ("y", 1)]);
        assert_eq!(field(&r, &["x", "0"]).is_tangent(&poly(&r, "x*y")).unwrap(), Some(Polynomial::one(&r)));
        assert_eq!(field(&r, &["1", "0"]).is_tangent(&poly(&r, "x")).unwrap(), None);
        assert_eq!(field(&r, &["1", "0"]).is_tangent(&Polynomial::zero(&r)), Err(SaitoError::ZeroEquation));
        let r = ring(&[("x", 1), ("y", 2), ("z", 2)]);
        let h = poly(&r, "x*(z^2 - x^2*y)");
        // weighted Euler field: the witness is wt(h) = 5
        let e = field(&r, &["x", "2*y", "2*z"]);
        assert_eq!(e.is_tangent(&h).unwrap(), Some(Polynomial::from_int(&r, 5)));
    }

    fn umbrella_plus_adjoint() -> (Ring, Polynomial, Vec<Derivation>) {
        let r = ring(&[("x", 1), ("y", 2), ("z", 2)]);
        let h = poly(&r, "x*(z^2 - x^2*y)");
        let fields = vec![field(&r, &["x", "2*y", "2*z"]), field(&r, &["x", "0", "z"]), field(&r, &["0", "2*z", "x^2"])];
        (r, h, fields)
    }

    #[test]
    fn saito_examples() {
        let (_, h, fields) = umbrella_plus_adjoint();
        let cert = verify_saito(&h, &fields).unwrap();
        assert_eq!(cert.det_constant(), Some(integer(2)));
        cert.reverify().unwrap();

        let r = ring(&[("x", 1), ("y", 1)]);
        let nc = verify_saito(&poly(&r, "x*y"), &[field(&r, &["x", "0"]), field(&r, &["0", "y"])]).unwrap();
        assert_eq!(nc.det_constant(), Some(integer(1)));
        let bad = verify_saito(&poly(&r, "x^2*y"), &[field(&r, &["x", "0"]), field(&r, &["0", "y"])]);
        assert_eq!(bad, Err(SaitoError::Failed(Failure::NotSquarefree)));
        let short = verify_saito(&poly(&r, "x*y"), &[field(&r, &["x", "0"])]);
        assert_eq!(short, Err(SaitoError::NotCandidateBasis { fields: 1, vars: 2 }));
        let not_tangent = verify_saito(&poly(&r, "x*y"), &[field(&r, &["1", "0"]), field(&r, &["0", "y"])]);
        assert_eq!(not_tangent, Err(SaitoError::Failed(Failure::NotTangent { field: 0 })));
        let low = verify_saito(&poly(&r, "x*y"), &[field(&r, &["x^2", "0"]), field(&r, &["0", "y"])]);
        assert!(matches!(low, Err(SaitoError::Failed(Failure::DeterminantNotUnitMultiple { .. }))));
    }

    #[test]
    fn solver_normal_crossing() {
        let r = ring(&[("x", 1), ("y", 1)]);
        let gens = solve_logarithmic(&poly(&r, "x*y"), Some(0)).unwrap();
        let fields: Vec<_> = gens.iter().map(|g| g.field.clone()).collect();
        assert_eq!(fields, vec![field(&r, &["x", "0"]), field(&r, &["0", "y"])]);
        let cert = find_saito_basis(&poly(&r, "x*y"), &gens).unwrap();
        assert_eq!(cert.det_constant(), Some(integer(1)));
        assert_eq!(find_saito_basis(&poly(&r, "x*y"), &gens[..1]), Err(SaitoError::NotFound));
        assert_eq!(solve_logarithmic(&poly(&r, "x + y^2"), None), Err(SaitoError::Inhomogeneous));
        assert_eq!(solve_logarithmic(&poly(&r, "3"), None), Err(SaitoError::ConstantEquation));
    }

    #[test]
    fn solver_umbrella_plus_adjoint() {
        let (_, h, displayed_fields) = umbrella_plus_adjoint();
        let mut s = LogSolver::new(&h).unwrap();
        s.extend_to(0);
        // wt(h) equals the sum of the variable weights, so every basis field has weight 0
        assert_eq!(s.generators().iter().filter(|g| g.weight == 0).count(), 3);
        let (cert, solver) = certify_free(&h, None).unwrap();
        let weights: Vec<i64> = cert.field_weights().into_iter().map(Option::unwrap).collect();
        // field weights plus variable weights add up to wt(h)
        assert_eq!(weights.iter().sum::<i64>() + 5, 5);
        // same determinant as the hand-written basis up to a constant
        let d1 = cert.basis.det().unwrap();
        let d2 = SaitoMatrix::new(displayed_fields).unwrap().det().unwrap();
        assert!(d1.exact_divide(&d2).unwrap().unwrap().is_constant());
        for (w, dim) in solver.slice_dimensions() {
            assert_eq!(solver.generated_dimension(*w), *dim);
        }
    }

    #[test]
    fn solver_cusp_discriminant() {
        let r = ring(&[("u1", 2), ("u2", 3)]);
        let h = poly(&r, "4*u1^3 + 27*u2^2");
        let (cert, _) = certify_free(&h, None).unwrap();
        let w: Vec<i64> = cert.field_weights().into_iter().map(Option::unwrap).collect();
        assert_eq!(w, vec![0, 1]);
        cert.reverify().unwrap();
    }

    #[test]
    fn membership_examples() {
        let r = ring(&[("x", 1), ("y", 1)]);
        let c = ideal_membership_homogeneous(&poly(&r, "x^2 + x*y"), &[poly(&r, "x")], &[1]).unwrap();
        assert_eq!(c, Some(vec![poly(&r, "x + y")]));
        let none = ideal_membership_homogeneous(&poly(&r, "y^2"), &[poly(&r, "x")], &[1]).unwrap();
        assert_eq!(none, None);
        let bad = ideal_membership_homogeneous(&poly(&r, "y^2"), &[poly(&r, "x")], &[3]);
        assert_eq!(bad, Err(SaitoError::DegreeInconsistency { index: 0, given: 3 }));
        let neg = ideal_membership_homogeneous(&poly(&r, "y^2"), &[poly(&r, "x"), poly(&r, "y")], &[-1, 1]).unwrap();
        assert_eq!(neg, Some(vec![Polynomial::zero(&r), poly(&r, "y")]));
    }

    #[test]
    fn local_basis_for_inhomogeneous_curve() {
        // a node with a non-homogeneous perturbation
        let r = ring(&[("x", 1), ("y", 1)]);
        let h = poly(&r, "x*y + x^3");
        let cert = find_local_saito_basis(&h, 2, 7, 50).unwrap();
        assert_eq!(cert.scope, Scope::Local);
        assert!(!cert.det_quotient.constant_term().is_zero());
        cert.reverify().unwrap();
    }

    #[test]
    fn ray_determinant_matches_exact() {
        let (r, _, fields) = umbrella_plus_adjoint();
        let exact = SaitoMatrix::new(fields.clone()).unwrap().det().unwrap();
        let p = [integer(2), integer(-1), integer(3)];
        let got = ray_determinant(&fields, &p, 4);
        for (d, c) in got.iter().enumerate() {
            assert_eq!(*c, exact.ordinary_part(d as u32).evaluate(&p), "degree {d}");
        }
        assert!(got[..3].iter().all(|c| c.is_zero()));
        assert_eq!(r.nvars(), 3);
    }

    fn small_field(r: Ring) -> impl Strategy<Value = Derivation> {
        prop::collection::vec(prop::collection::vec(((0u32..3, 0u32..3), -3i64..4), 0..3), 2).prop_map(move |cs| {
            let coeffs = cs
                .into_iter()
                .map(|ts| Polynomial::from_terms(&r, ts.into_iter().map(|((a, b), c)| (vec![a, b], integer(c)))))
                .collect();
            Derivation::new(&r, coeffs).unwrap()
        })
    }

    fn xy() -> Ring {
        ring(&[("x", 1), ("y", 1)])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bracket_antisymmetry_and_jacobi(a in small_field(xy()), b in small_field(xy()), c in small_field(xy())) {
            let ab = a.lie_bracket(&b).unwrap();
            prop_assert_eq!(ab.add(&b.lie_bracket(&a).unwrap()).unwrap(), Derivation::zero(&xy()));
            let j = a.lie_bracket(&b.lie_bracket(&c).unwrap()).unwrap()
                .add(&b.lie_bracket(&c.lie_bracket(&a).unwrap()).unwrap()).unwrap()
                .add(&c.lie_bracket(&a.lie_bracket(&b).unwrap()).unwrap()).unwrap();
            prop_assert!(j.is_zero());
        }

        #[test]
        fn bracket_is_a_derivation(a in small_field(xy()), b in small_field(xy()), p in small_field(xy())) {
            let p = p.coeffs()[0].clone();
            let lhs = a.lie_bracket(&b).unwrap().apply(&p).unwrap();
            let rhs = &a.apply(&b.apply(&p).unwrap()).unwrap() - &b.apply(&a.apply(&p).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
