//! The A_μ chain: the versal unfolding of `x^{μ+1}`, its Milnor algebra with
//! the self-dual monomial basis, the symmetric Saito matrix `Λ` of the
//! discriminant, the adjoint divisor, and the divisor `D₀` on the critical
//! locus.

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::derivations::{certify_free, ideal_membership_homogeneous, Derivation, FreenessCertificate, SaitoError};
use crate::normalform::{NormalFormRing, XPoly};
use crate::polylinalg::{LinalgError, PolyMatrix, RationalMatrix};
use crate::polyring::{integer, rational, Coeff, PolyError, Polynomial, Ring, WeightSystem};
use crate::report::CheckReport;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiscError {
    #[error("Milnor number mu = {0} is out of range (need mu >= {1})")]
    BadMilnorNumber(usize, usize),
    #[error("pullback of the adjoint is not divisible by H^2")]
    NotDivisible,
    #[error(transparent)]
    Saito(#[from] SaitoError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Debug)]
pub struct MilnorData {
    pub mu: usize,
    /// Weighted degree of `f = x^{μ+1}`.
    pub d: u32,
    /// `dᵢ = μ − i`, the degree of `gᵢ = x^{μ−i}`.
    pub degrees: Vec<u32>,
    /// `wᵢ = d − dᵢ`, the weight of `uᵢ`.
    pub weights: Vec<u32>,
    pub base: Ring,
    /// `O_Σ` over the base: reduction modulo `F_x`.
    pub sigma: NormalFormRing,
    /// `F = x^{μ+1} + Σ uᵢ x^{μ−i}`.
    pub unfolding: XPoly,
    /// The basis dual to `g` under the pairing over the base.
    pub dual: Vec<XPoly>,
}

impl MilnorData {
    pub fn u(&self, i: usize) -> Polynomial {
        Polynomial::var_index(&self.base, i - 1)
    }

    /// `gᵢ = x^{μ−i}`, 1-based.
    pub fn g(&self, i: usize) -> XPoly {
        self.sigma.g(i)
    }

    /// `ǧᵢ`, 1-based; congruent to `g_{μ+1−i}` modulo the maximal ideal.
    pub fn dual(&self, i: usize) -> XPoly {
        self.dual[i - 1].clone()
    }

    pub fn fx(&self) -> XPoly {
        self.unfolding.derivative()
    }

    /// The Hessian `F_xx`.
    pub fn hessian(&self) -> XPoly {
        self.unfolding.derivative().derivative()
    }
}

pub fn build_milnor(mu: usize) -> Result<MilnorData, DiscError> {
    if mu < 1 {
        return Err(DiscError::BadMilnorNumber(mu, 1));
    }
    let d = mu as u32 + 1;
    let degrees: Vec<u32> = (1..=mu).map(|i| (mu - i) as u32).collect();
    let weights: Vec<u32> = degrees.iter().map(|di| d - di).collect();
    let base = WeightSystem::new((1..=mu).map(|i| (format!("u{i}"), weights[i - 1])))?;
    let u = |i: usize| Polynomial::var_index(&base, i - 1);
    let mut f = vec![Polynomial::zero(&base); mu + 2];
    f[mu + 1] = Polynomial::one(&base);
    for i in 1..=mu {
        f[mu - i] = u(i);
    }
    let unfolding = XPoly::new(&base, f);
    // x^μ = −Σ_{i<μ} (μ−i)/(μ+1) uᵢ x^{μ−i−1}
    let mut rule = vec![Polynomial::zero(&base); mu];
    for i in 1..mu {
        rule[mu - i - 1] = u(i).scale(&rational(-((mu - i) as i64), d as i64));
    }
    let sigma = NormalFormRing::new(&base, rule);
    // ⟨gᵢ, g_{μ+1−j}⟩ vanishes for i > j and is 1 for i = j, so
    // ǧ_j = g_{μ+1−j} − Σ_{i<j} ⟨gᵢ, g_{μ+1−j}⟩ ǧᵢ
    let mut dual: Vec<XPoly> = Vec::with_capacity(mu);
    for j in 1..=mu {
        let gj = sigma.g(mu + 1 - j);
        let mut c = gj.clone();
        for (i, di) in dual.iter().enumerate() {
            c = c.sub(&di.scale(&sigma.pairing(&sigma.g(i + 1), &gj)));
        }
        dual.push(c);
    }
    Ok(MilnorData { mu, d, degrees, weights, base, sigma, unfolding, dual })
}

/// Milnor-algebra checks: degrees, weights and self-duality at `u = 0`.
pub fn milnor_checks(m: &MilnorData) -> CheckReport {
    let mut r = CheckReport::new();
    let mu = m.mu;
    let decreasing = m.degrees.windows(2).all(|w| w[0] >= w[1]) && m.degrees.last() == Some(&0);
    r.push("degrees", decreasing, format!("d_i = {:?}", m.degrees));
    let mut ok = true;
    for i in 1..=mu {
        for j in 1..=mu {
            let p = m.sigma.pairing(&m.g(i), &m.g(j)).constant_term();
            let want = if i + j == mu + 1 { integer(1) } else { integer(0) };
            ok &= p == want;
        }
    }
    r.push("self-dual basis", ok, "<g_i, g_j>_0 = delta(i + j, mu + 1)");
    let mut dual_ok = true;
    for i in 1..=mu {
        for j in 1..=mu {
            let p = m.sigma.pairing(&m.g(i), &m.dual(j));
            dual_ok &= if i == j { p.is_one() } else { p.is_zero() };
        }
    }
    r.push("dual basis", dual_ok, "<g_i, g^_j> = delta(i, j)");
    r
}

#[derive(Clone, Debug)]
pub struct DiscriminantData {
    pub milnor: MilnorData,
    pub lambda: PolyMatrix,
    pub h: Polynomial,
    /// `m^μ_j`, delete row `μ` and column `j`; index `j−1`.
    pub minors: Vec<Polynomial>,
    pub adjoint: Polynomial,
    pub hessian: XPoly,
}

impl DiscriminantData {
    pub fn mu(&self) -> usize {
        self.milnor.mu
    }

    pub fn minor(&self, j: usize) -> &Polynomial {
        &self.minors[j - 1]
    }

    /// Column `i` of `Λ` as the derivation `Σ_j λ_{j,i} ∂_{u_j}`.
    pub fn field(&self, i: usize) -> Derivation {
        Derivation::new(&self.milnor.base, self.lambda.column(i - 1)).expect("same ring")
    }

    pub fn fields(&self) -> Vec<Derivation> {
        (1..=self.mu()).map(|i| self.field(i)).collect()
    }
}

/// `λᵢⱼ = Φ(ǧᵢ·ǧ_j·Σ w_k u_k g_k)`.
pub fn build_discriminant(mu: usize) -> Result<DiscriminantData, DiscError> {
    let m = build_milnor(mu)?;
    let base = m.base.clone();
    let mut e = XPoly::zero(&base);
    for k in 1..=mu {
        e = e.add(&m.g(k).scale(&m.u(k).scale(&integer(m.weights[k - 1] as i64))));
    }
    let rows: Vec<Vec<Polynomial>> = (1..=mu)
        .map(|i| (1..=mu).map(|j| m.sigma.phi(&m.dual(i).mul(&m.dual(j)).mul(&e))).collect())
        .collect();
    let lambda = PolyMatrix::from_rows(&base, rows)?;
    let h = lambda.det()?;
    let minors = if mu == 1 {
        vec![Polynomial::one(&base)]
    } else {
        (0..mu).map(|j| lambda.minor(mu - 1, j)).collect::<Result<Vec<_>, _>>()?
    };
    let adjoint = minors[mu - 1].clone();
    let hessian = m.hessian();
    Ok(DiscriminantData { milnor: m, lambda, h, minors, adjoint, hessian })
}

/// `d − d₁ + 2dᵢ ≠ 0` for `i = 2..μ`.
pub fn check_hypothesis(m: &MilnorData) -> CheckReport {
    let mut r = CheckReport::new();
    let d1 = m.degrees[0] as i64;
    for i in 2..=m.mu {
        let v = m.d as i64 - d1 + 2 * m.degrees[i - 1] as i64;
        r.push(format!("d - d1 + 2d_{i}"), v != 0, format!("{v}"));
    }
    r
}

/// Ring of the scaled coordinates `vᵢ = wᵢuᵢ`.
pub fn scaled_ring(m: &MilnorData) -> Result<Ring, DiscError> {
    Ok(WeightSystem::new((1..=m.mu).map(|i| (format!("v{i}"), m.weights[i - 1])))?)
}

/// `p(u)` rewritten in `v`, with `uᵢ = vᵢ/wᵢ`.
pub fn to_scaled(m: &MilnorData, v: &Ring, p: &Polynomial) -> Result<Polynomial, DiscError> {
    let images: Vec<Polynomial> = (0..m.mu)
        .map(|i| Polynomial::var_index(v, i).scale(&rational(1, m.weights[i] as i64)))
        .collect();
    Ok(p.substitute_vars(v, &images)?)
}

/// `Σ aᵢ ∂_{uᵢ}` rewritten as `Σ wᵢ aᵢ(v) ∂_{vᵢ}`.
pub fn field_to_scaled(m: &MilnorData, v: &Ring, f: &Derivation) -> Result<Derivation, DiscError> {
    let coeffs = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, a)| to_scaled(m, v, a).map(|p| p.scale(&integer(m.weights[i] as i64))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Derivation::new(v, coeffs)?)
}

/// Linear part of `Λ` in the scaled coordinates.
pub fn scaled_linear_lambda(dd: &DiscriminantData, v: &Ring) -> Result<PolyMatrix, DiscError> {
    let mut out = Vec::new();
    for i in 0..dd.mu() {
        let mut row = Vec::new();
        for j in 0..dd.mu() {
            row.push(to_scaled(&dd.milnor, v, dd.lambda.get(i, j))?.ordinary_part(1));
        }
        out.push(row);
    }
    Ok(PolyMatrix::from_rows(v, out)?)
}

/// Symmetry, the resultant-free invariants of `Λ`, and tangency of the
/// columns to `det Λ`.
pub fn structure_checks(dd: &DiscriminantData) -> Result<CheckReport, DiscError> {
    let mut r = CheckReport::new();
    let mu = dd.mu();
    r.push("Lambda symmetric", dd.lambda.is_symmetric(), format!("{mu}x{mu}"));
    r.push("h homogeneous", dd.h.homogeneous_degree().is_some(), format!("{:?}", dd.h.homogeneous_degree()));
    r.push("h squarefree", dd.h.is_squarefree()?, "gcd with all partials is constant");
    for (i, f) in dd.fields().iter().enumerate() {
        let w = f.is_tangent(&dd.h)?;
        r.push(
            format!("column {} tangent to h", i + 1),
            w.is_some(),
            w.map_or("no polynomial witness".to_string(), |w| format!("witness {w}")),
        );
    }
    Ok(r)
}

/// The shape of the linear part of `Λ` in scaled coordinates: first row
/// `(v₁..v_μ)`, `v_μ` on the antidiagonal, zeros below it, and no `v_μ`
/// anywhere else.
pub fn linear_shape_checks(dd: &DiscriminantData) -> Result<CheckReport, DiscError> {
    let mu = dd.mu();
    let v = scaled_ring(&dd.milnor)?;
    let lin = scaled_linear_lambda(dd, &v)?;
    let vv = |i: usize| Polynomial::var_index(&v, i - 1);
    let mut r = CheckReport::new();
    let first: Vec<Polynomial> = (1..=mu).map(vv).collect();
    r.push("first row is (v1..v_mu)", lin.row(0) == first, format!("{:?}", lin.row(0).iter().map(|p| p.to_string()).collect::<Vec<_>>()));
    let mut anti = true;
    let mut below = true;
    let mut starred = true;
    for i in 1..=mu {
        for j in 1..=mu {
            let e = lin.get(i - 1, j - 1);
            if i + j == mu + 1 {
                anti &= *e == vv(mu);
            } else if i + j > mu + 1 {
                below &= e.is_zero();
            } else if i > 1 && j > 1 {
                starred &= !e.involves(mu - 1);
            }
        }
    }
    r.push("antidiagonal is v_mu", anti, "entries with i + j = mu + 1");
    r.push("zeros below the antidiagonal", below, "entries with i + j > mu + 1");
    r.push("starred entries free of v_mu", starred, "entries with i, j > 1 above the antidiagonal");
    Ok(r)
}

/// `ι` for `μ−1` letters.
pub fn iota(mu: usize) -> i64 {
    if ((mu - 1) * (mu - 2) / 2).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Observed constants `κ` with `δ̄ᵢ(m̄^μ_μ) = κ·m̄^μ_{μ+1−i}`, `i = 2..μ`,
/// or `None` when the left side is not such a multiple.
pub fn lemma5b_constants(dd: &DiscriminantData) -> Result<Vec<(usize, Option<Coeff>)>, DiscError> {
    let mu = dd.mu();
    let v = scaled_ring(&dd.milnor)?;
    let lin = scaled_linear_lambda(dd, &v)?;
    let minor_bar = |j: usize| lin.minor(mu - 1, j - 1);
    let mbar = minor_bar(mu)?;
    let mut out = Vec::new();
    for i in 2..=mu {
        // linear part of column i, read in v-coordinates
        let col = Derivation::new(&dd.milnor.base, dd.lambda.column(i - 1))?.linear_part();
        let delta = field_to_scaled(&dd.milnor, &v, &col)?;
        let lhs = delta.apply(&mbar)?;
        let rhs = minor_bar(mu + 1 - i)?;
        out.push((i, crate::derivations::constant_combination(&lhs, &[rhs])?.map(|c| c[0].clone())));
    }
    Ok(out)
}

/// Stated constant `(−1)^{i+1}(d − d₁ + 2dᵢ)`.
pub fn lemma5b_stated(m: &MilnorData, i: usize) -> Coeff {
    let v = m.d as i64 - m.degrees[0] as i64 + 2 * m.degrees[i - 1] as i64;
    integer(if i % 2 == 1 { v } else { -v })
}

pub fn lemma5_checks(dd: &DiscriminantData) -> Result<CheckReport, DiscError> {
    let mu = dd.mu();
    if mu < 2 {
        return Err(DiscError::BadMilnorNumber(mu, 2));
    }
    let m = &dd.milnor;
    let v = scaled_ring(m)?;
    let lin = scaled_linear_lambda(dd, &v)?;
    let mut r = CheckReport::new();

    // (a) distinguished monomials v_i v_μ^{μ−2} in m̄_{μ+1−i}
    let jets: Vec<Polynomial> = dd
        .minors
        .iter()
        .map(|p| to_scaled(m, &v, p).map(|q| q.ordinary_part(mu as u32 - 1)))
        .collect::<Result<_, _>>()?;
    let bars: Vec<Polynomial> = (0..mu).map(|j| lin.minor(mu - 1, j)).collect::<Result<_, _>>()?;
    r.push("(a) jets are the minors of the linear part", jets == bars, "");
    let io = iota(mu);
    for i in 1..=mu {
        let mut e = vec![0u32; mu];
        e[mu - 1] += mu as u32 - 2;
        e[i - 1] += 1;
        let j = mu + 1 - i;
        let c = jets[j - 1].coefficient(&e);
        let name = Polynomial::term(&v, e.clone(), integer(1)).to_string();
        let stated = integer(if (mu - i).is_multiple_of(2) { io } else { -io });
        r.push(
            format!("(a) {name} in m{mu}{j}"),
            c == integer(1) || c == integer(-1),
            format!("coefficient {c} (stated sign {stated})"),
        );
        let others: Vec<usize> = (1..=mu).filter(|&l| l != j && !jets[l - 1].coefficient(&e).is_zero()).collect();
        r.push(format!("(a) {name} only in m{mu}{j}"), others.is_empty(), format!("also in {others:?}"));
    }

    // (b) exact identity for the linear parts
    for (i, observed) in lemma5b_constants(dd)? {
        let stated = lemma5b_stated(m, i);
        let shown = observed.as_ref().map_or("not a multiple".to_string(), |c| c.to_string());
        r.push(
            format!("(b) i={i}"),
            observed.as_ref() == Some(&stated),
            format!("observed {shown}, stated {stated}"),
        );
    }

    // (c) the first column is the Euler field
    let euler = Derivation::new(
        &m.base,
        (1..=mu).map(|k| m.u(k).scale(&integer(m.weights[k - 1] as i64))).collect(),
    )?;
    r.push("(c) first column is the Euler field", dd.field(1) == euler, "");
    let wt = dd.adjoint.homogeneous_degree().unwrap_or(0) as i64;
    let ok = dd.field(1).apply(&dd.adjoint)? == dd.adjoint.scale(&integer(wt));
    r.push("(c) delta1(m_mumu) = wt * m_mumu", ok, format!("weight {wt}"));
    Ok(r)
}

#[derive(Clone, Debug)]
pub struct Theorem60Result {
    pub data: DiscriminantData,
    pub certificate: FreenessCertificate,
    /// `C(0)`: row `i` holds the constant terms of `c_{i,j}` in
    /// `δᵢ(m^μ_μ) = Σ_j c_{i,j} m^μ_j`.
    pub c0: Vec<Vec<Coeff>>,
    pub checks: CheckReport,
}

/// Multipliers `c_{i,j}` for every column field of `Λ`.
pub fn adjoint_multipliers(dd: &DiscriminantData) -> Result<Vec<Option<Vec<Polynomial>>>, DiscError> {
    let m_deg = dd.adjoint.homogeneous_degree().expect("homogeneous") as i64;
    let mut out = Vec::new();
    for f in dd.fields() {
        let w = f.weight().expect("homogeneous field");
        let degrees: Vec<i64> = dd
            .minors
            .iter()
            .map(|m| (w + m_deg - m.homogeneous_degree().expect("homogeneous") as i64).max(-1))
            .collect();
        out.push(ideal_membership_homogeneous(&f.apply(&dd.adjoint)?, &dd.minors, &degrees)?);
    }
    Ok(out)
}

/// Freeness of `D + V(m^μ_μ)` and the linear structure behind it.
pub fn certify_theorem60(mu: usize, max_weight: Option<i64>) -> Result<Theorem60Result, DiscError> {
    if mu < 2 {
        return Err(DiscError::BadMilnorNumber(mu, 2));
    }
    let dd = build_discriminant(mu)?;
    let mut checks = check_hypothesis(&dd.milnor);
    let total = &dd.h * &dd.adjoint;
    let (cert, _) = certify_free(&total, max_weight)?;
    cert.reverify()?;
    checks.push("certificate re-verifies", true, "recomputed from raw data");

    let mut c0 = Vec::new();
    for (i, sol) in adjoint_multipliers(&dd)?.into_iter().enumerate() {
        match sol {
            Some(cs) => c0.push(cs.iter().map(|c| c.constant_term()).collect::<Vec<_>>()),
            None => {
                checks.push(format!("delta{}(m_mumu) in F1", i + 1), false, "no multipliers");
                c0.push(vec![Coeff::zero(); mu]);
            }
        }
    }
    let rank = RationalMatrix::from_dense(c0.clone())?.rank();
    checks.push("C(0) invertible", rank == mu, format!("rank {rank} of {mu}"));
    let first: Vec<&Coeff> = c0.iter().map(|row| &row[0]).collect();
    let shape = first[..mu - 1].iter().all(|c| c.is_zero()) && !first[mu - 1].is_zero();
    checks.push(
        "C(0) first column (0,...,0,nonzero)",
        shape,
        format!("{:?}", first.iter().map(|c| c.to_string()).collect::<Vec<_>>()),
    );
    if mu == 2 {
        let q = dd.adjoint.exact_divide(&dd.milnor.u(1))?;
        let ok = q.as_ref().is_some_and(|q| q.is_constant() && !q.is_zero());
        checks.push("adjoint is u1 up to a constant", ok, format!("m22 = {}", dd.adjoint));
    }
    Ok(Theorem60Result { data: dd, certificate: cert, c0, checks })
}

#[derive(Clone, Debug)]
pub struct D0Data {
    /// Coordinates `(x, u₁..u_{μ−2})` on `Σ⁰`.
    pub ring: Ring,
    /// Images of `u₁..u_μ` under the parametrization `π`.
    pub parametrization: Vec<Polynomial>,
    pub hessian: Polynomial,
    pub pullback: Polynomial,
    pub equation: Polynomial,
    pub certificate: FreenessCertificate,
    pub checks: CheckReport,
}

/// `D₀ = V((m^μ_μ∘π)/H)` on the critical locus, certified free.
pub fn build_d0(mu: usize, max_weight: Option<i64>) -> Result<D0Data, DiscError> {
    if mu < 2 {
        return Err(DiscError::BadMilnorNumber(mu, 2));
    }
    let dd = build_discriminant(mu)?;
    let m = &dd.milnor;
    let mut vars: Vec<(String, u32)> = vec![("x".into(), 1)];
    vars.extend((1..mu - 1).map(|i| (format!("u{i}"), m.weights[i - 1])));
    let ring = WeightSystem::new(vars)?;
    let x = Polynomial::var(&ring, "x")?;
    let uu = |i: usize| Polynomial::var(&ring, &format!("u{i}")).expect("u variable");
    let mi = |i: usize| (mu - i) as i64;

    // F_x = 0 solved for u_{μ−1}, then F = 0 for u_μ
    let mut u_last1 = x.pow(mu as u32).scale(&integer(-(mu as i64 + 1)));
    for i in 1..mu - 1 {
        u_last1 = &u_last1 - &(&uu(i) * &x.pow((mu - i - 1) as u32)).scale(&integer(mi(i)));
    }
    let mut params: Vec<Polynomial> = (1..mu - 1).map(uu).collect();
    params.push(u_last1);
    let mut u_last = -x.pow(mu as u32 + 1);
    for i in 1..mu {
        u_last = &u_last - &(&params[i - 1] * &x.pow((mu - i) as u32));
    }
    params.push(u_last);

    let images: BTreeMap<String, Polynomial> = m.base.names().iter().cloned().zip(params.iter().cloned()).collect();
    let pull = |p: &Polynomial| p.substitute(&ring, &images);
    let hess_coeffs: Vec<Polynomial> = dd.hessian.coeffs().iter().map(pull).collect::<Result<_, _>>()?;
    let hessian = XPoly::new(&ring, hess_coeffs).evaluate_at(&x);
    let pullback = pull(&dd.adjoint)?;

    let mut checks = CheckReport::new();
    let fx_coeffs: Vec<Polynomial> = m.fx().coeffs().iter().map(pull).collect::<Result<_, _>>()?;
    let f_coeffs: Vec<Polynomial> = m.unfolding.coeffs().iter().map(pull).collect::<Result<_, _>>()?;
    let on_sigma = XPoly::new(&ring, fx_coeffs).evaluate_at(&x).is_zero() && XPoly::new(&ring, f_coeffs).evaluate_at(&x).is_zero();
    checks.push("parametrization lies on F = F_x = 0", on_sigma, "");
    let h2 = &hessian * &hessian;
    let q2 = pullback.exact_divide(&h2)?;
    checks.push("H^2 divides m o pi", q2.is_some(), format!("H = {hessian}"));
    if q2.is_none() {
        return Err(DiscError::NotDivisible);
    }
    let equation = pullback.exact_divide(&hessian)?.ok_or(DiscError::NotDivisible)?;
    checks.push("quotient squarefree", equation.is_squarefree()?, format!("{equation}"));
    let (cert, _) = certify_free(&equation, max_weight)?;
    cert.reverify()?;
    checks.push("D0 free", true, format!("{} fields", cert.basis.fields().len()));
    Ok(D0Data { ring, parametrization: params, hessian, pullback, equation, certificate: cert, checks })
}
