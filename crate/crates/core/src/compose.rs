//! Free divisors `f⁻¹(N + E)` built from a free divisor whose components are
//! separated by logarithmic vector fields, and a free divisor `N + E`
//! containing the coordinate hyperplanes of the target.

use std::collections::BTreeSet;

use serde::Deserialize;
use thiserror::Error;

use crate::derivations::{certify_free, verify_saito, Derivation, FreenessCertificate, SaitoError};
use crate::polylinalg::{LinalgError, PolyMatrix};
use crate::polyring::{integer, same_ring, PolyError, Polynomial, Ring, WeightSystem};
use crate::report::CheckReport;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComposeError {
    #[error("separating field {field} fails on component {component}")]
    NotSeparating { field: usize, component: usize },
    #[error("completion field {field} does not annihilate component {component}")]
    NotAnnihilating { field: usize, component: usize },
    #[error("target has {target} variables but the source has {components} components")]
    ArityMismatch { target: usize, components: usize },
    #[error("column {column} of the target Saito matrix is not divisible by the coordinate equations")]
    NotFactorizable { column: usize },
    #[error("det A does not match the equation of E")]
    DeterminantMismatch,
    #[error("equation of E shares a factor with y{0}")]
    NotCoprime(usize),
    #[error("pullback of E is not reduced")]
    NotReduced,
    #[error("bad grouping: {0}")]
    BadGrouping(String),
    #[error(transparent)]
    Parse(#[from] crate::parse::ParseError),
    #[error(transparent)]
    Saito(#[from] SaitoError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `D = V(f₁⋯f_k)` with fields `εᵢ(f_j) = δᵢⱼ f_j` (`i ≤ k`) completed by
/// fields annihilating every `f_j` to a Saito basis.
#[derive(Clone, Debug)]
pub struct SeparatedDivisor {
    pub components: Vec<Polynomial>,
    pub separating: Vec<Derivation>,
    pub completion: Vec<Derivation>,
    pub certificate: FreenessCertificate,
}

impl SeparatedDivisor {
    /// Re-verifies every identity and the Saito criterion for `D`.
    pub fn new(
        components: Vec<Polynomial>,
        separating: Vec<Derivation>,
        completion: Vec<Derivation>,
    ) -> Result<SeparatedDivisor, ComposeError> {
        for (i, e) in separating.iter().enumerate() {
            for (j, f) in components.iter().enumerate() {
                let want = if i == j { f.clone() } else { Polynomial::zero(f.ring()) };
                if e.apply(f)? != want {
                    return Err(ComposeError::NotSeparating { field: i, component: j });
                }
            }
        }
        for (i, e) in completion.iter().enumerate() {
            for (j, f) in components.iter().enumerate() {
                if !e.apply(f)?.is_zero() {
                    return Err(ComposeError::NotAnnihilating { field: i, component: j });
                }
            }
        }
        let h = product(&components)?;
        let fields: Vec<Derivation> = separating.iter().chain(&completion).cloned().collect();
        let certificate = verify_saito(&h, &fields)?;
        Ok(SeparatedDivisor { components, separating, completion, certificate })
    }

    pub fn ring(&self) -> &Ring {
        self.components[0].ring()
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn equation(&self) -> &Polynomial {
        &self.certificate.equation
    }

    /// `(εᵢ(f_j))` for `i, j ≤ k`.
    pub fn log_jacobian(&self) -> Result<PolyMatrix, ComposeError> {
        let rows = self
            .separating
            .iter()
            .map(|e| self.components.iter().map(|f| e.apply(f)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PolyMatrix::from_rows(self.ring(), rows)?)
    }
}

fn product(ps: &[Polynomial]) -> Result<Polynomial, PolyError> {
    let mut acc = Polynomial::one(ps[0].ring());
    for p in ps {
        acc = acc.checked_mul(p)?;
    }
    Ok(acc)
}

/// Coordinates `x1..xn` grouped into monomial components `Π_{a∈g} x_a`.
/// `ε_g = x_a∂_a` for the first `a` in `g`; the completion is
/// `x_a∂_a − x_b∂_b` for the other members `b`.
pub fn monomial_grouping(n: usize, groups: &[Vec<usize>]) -> Result<SeparatedDivisor, ComposeError> {
    let mut seen = BTreeSet::new();
    for g in groups {
        if g.is_empty() {
            return Err(ComposeError::BadGrouping("empty group".into()));
        }
        for &a in g {
            if a == 0 || a > n || !seen.insert(a) {
                return Err(ComposeError::BadGrouping(format!("index {a}")));
            }
        }
    }
    if seen.len() != n {
        return Err(ComposeError::BadGrouping("groups must cover x1..xn".into()));
    }
    let ring = WeightSystem::standard((1..=n).map(|i| format!("x{i}")))?;
    let x = |a: usize| Polynomial::var_index(&ring, a - 1);
    let euler_at = |a: usize| {
        let mut c = vec![Polynomial::zero(&ring); n];
        c[a - 1] = x(a);
        Derivation::new(&ring, c).expect("ring")
    };
    let mut components = Vec::new();
    let mut separating = Vec::new();
    let mut completion = Vec::new();
    for g in groups {
        components.push(g.iter().fold(Polynomial::one(&ring), |acc, &a| &acc * &x(a)));
        separating.push(euler_at(g[0]));
        for &b in &g[1..] {
            completion.push(euler_at(g[0]).add(&euler_at(b).neg())?);
        }
    }
    SeparatedDivisor::new(components, separating, completion)
}

/// The linear free divisor `V(x·(y² − xz))` with its two components
/// separated by linear fields.
pub fn conic_and_line() -> Result<SeparatedDivisor, ComposeError> {
    let ring = WeightSystem::standard(["x", "y", "z"])?;
    let v = |n: &str| Polynomial::var(&ring, n).expect("var");
    let (x, y, z) = (v("x"), v("y"), v("z"));
    let f2 = &(&y * &y) - &(&x * &z);
    let half = crate::polyring::rational(1, 2);
    let e1 = Derivation::new(&ring, vec![x.clone(), Polynomial::zero(&ring), -z.clone()])?;
    let e2 = Derivation::new(&ring, vec![Polynomial::zero(&ring), y.scale(&half), z.clone()])?;
    let c = Derivation::new(&ring, vec![Polynomial::zero(&ring), x.clone(), y.scale(&integer(2))])?;
    SeparatedDivisor::new(vec![x, f2], vec![e1, e2], vec![c])
}

/// `N + E` in `y1..yk` with Saito matrix `diag(y)·A`.
#[derive(Clone, Debug)]
pub struct TargetPair {
    pub ring: Ring,
    pub a: PolyMatrix,
    /// `det A`, the equation of `E`.
    pub h_e: Polynomial,
    pub certificate: FreenessCertificate,
}

impl TargetPair {
    /// From a Saito basis `S` of `N + E` (fields as columns): `A = diag(y)⁻¹·S`.
    pub fn from_basis(ring: &Ring, fields: &[Derivation]) -> Result<TargetPair, ComposeError> {
        let k = ring.nvars();
        let mut cols = Vec::new();
        for (j, f) in fields.iter().enumerate() {
            let mut col = Vec::new();
            for i in 0..k {
                let y = Polynomial::var_index(ring, i);
                col.push(f.coeff(i).exact_divide(&y)?.ok_or(ComposeError::NotFactorizable { column: j })?);
            }
            cols.push(col);
        }
        let a = PolyMatrix::from_columns(ring, cols)?;
        TargetPair::new(ring, a)
    }

    /// Re-verifies `h_E = det A` squarefree, coprime to each `yᵢ`, and the
    /// Saito criterion for `y₁⋯y_k·h_E` with the columns of `diag(y)·A`.
    pub fn new(ring: &Ring, a: PolyMatrix) -> Result<TargetPair, ComposeError> {
        let k = ring.nvars();
        let h_e = a.det()?;
        if h_e.is_zero() {
            return Err(ComposeError::DeterminantMismatch);
        }
        for i in 0..k {
            let y = Polynomial::var_index(ring, i);
            if !h_e.is_constant() && !h_e.gcd(&y)?.is_one() {
                return Err(ComposeError::NotCoprime(i + 1));
            }
        }
        let fields = (0..k)
            .map(|j| {
                let c = (0..k).map(|i| &Polynomial::var_index(ring, i) * a.get(i, j)).collect();
                Derivation::new(ring, c)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let yk = (0..k).fold(Polynomial::one(ring), |acc, i| &acc * &Polynomial::var_index(ring, i));
        let certificate = verify_saito(&(&yk * &h_e), &fields)?;
        Ok(TargetPair { ring: ring.clone(), a, h_e, certificate })
    }

    /// Finds `A` with the solver from a weighted homogeneous `h_E`.
    pub fn solve(h_e: &Polynomial, max_weight: Option<i64>) -> Result<TargetPair, ComposeError> {
        let ring = h_e.ring().clone();
        let yk = (0..ring.nvars()).fold(Polynomial::one(&ring), |acc, i| &acc * &Polynomial::var_index(&ring, i));
        let (cert, _) = certify_free(&(&yk * h_e), max_weight)?;
        TargetPair::from_basis(&ring, cert.basis.fields())
    }

    pub fn k(&self) -> usize {
        self.ring.nvars()
    }
}

/// `N + A` for the normal crossing divisor with adjoint `V(σ_{k−1})`:
/// `δ₁ = Σ yᵢ∂ᵢ`, `δ_j = y_{j−1}²∂_{j−1} − y_j²∂_j`.
pub fn normal_crossing_adjoint(k: usize) -> Result<(TargetPair, CheckReport), ComposeError> {
    if k < 2 {
        return Err(ComposeError::BadGrouping(format!("k = {k} (need k >= 2)")));
    }
    let ring = WeightSystem::standard((1..=k).map(|i| format!("y{i}")))?;
    let y = |i: usize| Polynomial::var_index(&ring, i - 1);
    let mut fields = vec![Derivation::euler(&ring)];
    for j in 2..=k {
        let mut c = vec![Polynomial::zero(&ring); k];
        c[j - 2] = y(j - 1).pow(2);
        c[j - 1] = -y(j).pow(2);
        fields.push(Derivation::new(&ring, c)?);
    }
    let mut checks = CheckReport::new();
    let pair = TargetPair::from_basis(&ring, &fields)?;
    let sigma_k = (1..=k).fold(Polynomial::one(&ring), |acc, i| &acc * &y(i));
    let sigma_k1 = (1..=k).fold(Polynomial::zero(&ring), |acc, j| {
        &acc + &(1..=k).filter(|&i| i != j).fold(Polynomial::one(&ring), |p, i| &p * &y(i))
    });
    let det = pair.certificate.basis.det()?;
    let nc = &sigma_k * &sigma_k1;
    checks.push("det = +-sigma_k*sigma_(k-1)", det == nc || det == -nc.clone(), format!("det = {det}"));
    let mut commute = true;
    for (i, a) in fields.iter().enumerate().skip(1) {
        for b in &fields[i + 1..] {
            commute &= a.lie_bracket(b)?.is_zero();
        }
    }
    checks.push("[delta_i, delta_j] = 0 for i, j >= 2", commute, format!("{} fields", k - 1));
    Ok((pair, checks))
}

#[derive(Clone, Debug)]
pub struct Composite {
    pub equation: Polynomial,
    pub certificate: FreenessCertificate,
    pub checks: CheckReport,
}

/// `D + f⁻¹(E) = f⁻¹(N + E)` with basis `ṽ_j = Σᵢ (aᵢⱼ∘f)·εᵢ` and the
/// completion fields.
pub fn compose(d: &SeparatedDivisor, t: &TargetPair) -> Result<Composite, ComposeError> {
    let k = d.k();
    if t.k() != k {
        return Err(ComposeError::ArityMismatch { target: t.k(), components: k });
    }
    let src = d.ring().clone();
    let pull = |p: &Polynomial| p.substitute_vars(&src, &d.components);
    let mut checks = CheckReport::new();
    let lj = d.log_jacobian()?;
    let prod = product(&d.components)?;
    checks.push("log Jacobian det = f1...fk", lj.det()? == prod, "");

    let af = t.a.try_map_into(&src, pull)?;
    let h_pull = pull(&t.h_e)?;
    if !h_pull.is_constant() && !h_pull.is_squarefree()? {
        return Err(ComposeError::NotReduced);
    }
    let mut fields = Vec::with_capacity(src.nvars());
    for j in 0..k {
        let mut v = Derivation::zero(&src);
        for (i, e) in d.separating.iter().enumerate() {
            v = v.add(&e.mul_poly(af.get(i, j))?)?;
        }
        fields.push(v);
    }
    fields.extend(d.completion.iter().cloned());
    let equation = &prod * &h_pull;
    let certificate = verify_saito(&equation, &fields).map_err(|e| match e {
        SaitoError::Failed(crate::derivations::Failure::NotSquarefree) => ComposeError::NotReduced,
        e => e.into(),
    })?;
    let det = certificate.basis.det()?;
    let block = &d.certificate.basis.det()? * &af.det()?;
    checks.push("det = det(eps) * det(A o f)", det == block, "");
    debug_assert!(same_ring(det.ring(), &src));
    Ok(Composite { equation, certificate, checks })
}

/// `{y₁..y_k} ∪ {ℓ}` pulled back along `f`; the arrangement's Saito basis is
/// found by the solver within `max_weight`.
pub fn arrangement_pullback(
    d: &SeparatedDivisor,
    forms: &[Polynomial],
    max_weight: Option<i64>,
) -> Result<Composite, ComposeError> {
    let ring = match forms.first() {
        Some(f) => f.ring().clone(),
        None => return Err(ComposeError::BadGrouping("no forms".into())),
    };
    if ring.nvars() != d.k() {
        return Err(ComposeError::ArityMismatch { target: ring.nvars(), components: d.k() });
    }
    // extra hyperplanes, each up to a scalar and without the coordinates
    let mut extra: Vec<Polynomial> = Vec::new();
    for l in forms {
        let m = l.monic();
        let coordinate = m.num_terms() == 1;
        if !coordinate && !extra.contains(&m) {
            extra.push(m);
        }
    }
    let h_e = extra.iter().fold(Polynomial::one(&ring), |acc, l| &acc * l);
    let pair = if h_e.is_constant() {
        TargetPair::new(&ring, PolyMatrix::identity(&ring, ring.nvars()))?
    } else {
        TargetPair::solve(&h_e, max_weight)?
    };
    compose(d, &pair)
}

/// The plane-curve, adjoint and arrangement families, one instance each
/// plus variants, by name.
pub fn example_instances() -> Result<Vec<(String, Composite)>, ComposeError> {
    let mut out = Vec::new();
    let y2 = target_ring(2, None)?;
    let line = TargetPair::solve(&crate::parse::parse_polynomial(&y2, "y1 + y2")?, None)?;

    let d = monomial_grouping(3, &[vec![1], vec![2, 3]])?;
    out.push(("curve y1 + y2 along (x1, x2*x3)".to_string(), compose(&d, &line)?));
    let d = monomial_grouping(4, &[vec![1, 2], vec![3, 4]])?;
    out.push(("curve y1 + y2 along (x1*x2, x3*x4)".to_string(), compose(&d, &line)?));

    let yw = target_ring(2, Some(&[3, 2]))?;
    let cusp = crate::parse::parse_polynomial(&yw, "y1^2 + y2^3")?;
    let d = monomial_grouping(3, &[vec![1, 2], vec![3]])?;
    out.push(("curve y1^2 + y2^3 along (x1*x2, x3)".to_string(), compose(&d, &TargetPair::solve(&cusp, None)?)?));

    let (adj3, _) = normal_crossing_adjoint(3)?;
    let d = monomial_grouping(3, &[vec![1], vec![2], vec![3]])?;
    out.push(("adjoint sigma_2 along the identity".to_string(), compose(&d, &adj3)?));
    let d = monomial_grouping(4, &[vec![1, 2], vec![3], vec![4]])?;
    out.push(("adjoint sigma_2 along (x1*x2, x3, x4)".to_string(), compose(&d, &adj3)?));
    let (adj2, _) = normal_crossing_adjoint(2)?;
    out.push(("adjoint sigma_1 along (x, y^2 - x*z)".to_string(), compose(&conic_and_line()?, &adj2)?));

    let braid = crate::parse::parse_polynomial(&y2, "y1 - y2")?;
    let d = monomial_grouping(3, &[vec![1, 2], vec![3]])?;
    out.push(("arrangement y1*y2*(y1 - y2) along (x1*x2, x3)".to_string(), arrangement_pullback(&d, &[braid], None)?));
    Ok(out)
}

/// Declarative description of a composite, as read from a TOML file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComposeSpec {
    /// Number of source coordinates `x1..xn`.
    pub n: Option<usize>,
    /// Monomial components, 1-based coordinate indices.
    pub groups: Option<Vec<Vec<usize>>>,
    /// Built-in source divisor instead of a grouping; `"conic_and_line"`.
    pub source: Option<String>,
    /// Equation of `E` in `y1..yk`.
    pub target: Option<String>,
    /// Weights of `y1..yk` for `target`; standard when absent.
    pub target_weights: Option<Vec<u32>>,
    /// Extra hyperplanes in `y1..yk`.
    pub forms: Option<Vec<String>>,
    /// Use `N + V(σ_{k−1})` as the target pair.
    pub adjoint: Option<bool>,
    /// Target dimension when `adjoint` is given without a source.
    pub k: Option<usize>,
    pub max_weight: Option<i64>,
}

/// Builds the source divisor of a spec.
pub fn spec_source(spec: &ComposeSpec) -> Result<SeparatedDivisor, ComposeError> {
    match (&spec.source, &spec.groups) {
        (Some(s), _) if s == "conic_and_line" => conic_and_line(),
        (Some(s), _) => Err(ComposeError::BadGrouping(format!("unknown source {s}"))),
        (None, Some(g)) => {
            let n = spec.n.unwrap_or_else(|| g.iter().map(|v| v.len()).sum());
            monomial_grouping(n, g)
        }
        (None, None) => Err(ComposeError::BadGrouping("need groups or source".into())),
    }
}

/// Ring `y1..yk` with the given weights.
pub fn target_ring(k: usize, weights: Option<&[u32]>) -> Result<Ring, ComposeError> {
    let ws: Vec<u32> = match weights {
        Some(w) if w.len() == k => w.to_vec(),
        Some(w) => return Err(ComposeError::ArityMismatch { target: w.len(), components: k }),
        None => vec![1; k],
    };
    Ok(WeightSystem::new((1..=k).map(|i| (format!("y{i}"), ws[i - 1])))?)
}
