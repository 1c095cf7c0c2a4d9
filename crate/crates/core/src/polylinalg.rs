//! Matrices of polynomials and exact linear algebra over the rationals.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::polyring::{same_ring, Coeff, PolyError, Polynomial, Ring};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is {0}x{1}, not square")]
    NotSquare(usize, usize),
    #[error("index ({0}, {1}) out of range")]
    IndexOutOfRange(usize, usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Dense row-major matrix with entries in one polynomial ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    ring: Ring,
    rows: usize,
    cols: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn new(ring: &Ring, rows: usize, cols: usize, entries: Vec<Polynomial>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|e| !same_ring(e.ring(), ring)) {
            return Err(PolyError::RingMismatch.into());
        }
        Ok(PolyMatrix { ring: ring.clone(), rows, cols, entries })
    }

    pub fn from_rows(ring: &Ring, rows: Vec<Vec<Polynomial>>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::DimensionMismatch("ragged rows".into()));
        }
        Self::new(ring, r, c, rows.into_iter().flatten().collect())
    }

    /// Matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(ring: &Ring, columns: Vec<Vec<Polynomial>>) -> Result<Self, LinalgError> {
        Ok(Self::from_rows(ring, columns)?.transpose())
    }

    pub fn zero(ring: &Ring, rows: usize, cols: usize) -> Self {
        PolyMatrix { ring: ring.clone(), rows, cols, entries: vec![Polynomial::zero(ring); rows * cols] }
    }

    pub fn identity(ring: &Ring, n: usize) -> Self {
        let mut m = Self::zero(ring, n, n);
        for i in 0..n {
            m.entries[i * n + i] = Polynomial::one(ring);
        }
        m
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Polynomial) {
        assert!(same_ring(p.ring(), &self.ring));
        self.entries[i * self.cols + j] = p;
    }

    pub fn row(&self, i: usize) -> Vec<Polynomial> {
        self.entries[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<Polynomial> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn entries(&self) -> &[Polynomial] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        PolyMatrix { ring: self.ring.clone(), rows: self.cols, cols: self.rows, entries }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn map(&self, f: impl Fn(&Polynomial) -> Polynomial) -> Self {
        PolyMatrix {
            ring: self.ring.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    /// Applies `f` to every entry, placing the results in `target`.
    pub fn try_map_into(
        &self,
        target: &Ring,
        f: impl Fn(&Polynomial) -> Result<Polynomial, PolyError>,
    ) -> Result<Self, LinalgError> {
        let entries = self.entries.iter().map(f).collect::<Result<Vec<_>, _>>()?;
        Self::new(target, self.rows, self.cols, entries)
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if !same_ring(&self.ring, &other.ring) {
            return Err(PolyError::RingMismatch.into());
        }
        let mut out = Self::zero(&self.ring, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut s = Polynomial::zero(&self.ring);
                for l in 0..self.cols {
                    let (a, b) = (self.get(i, l), other.get(l, j));
                    if !a.is_zero() && !b.is_zero() {
                        s = &s + &(a * b);
                    }
                }
                out.entries[i * other.cols + j] = s;
            }
        }
        Ok(out)
    }

    /// Submatrix with row `i` and column `j` removed (0-based).
    pub fn delete(&self, i: usize, j: usize) -> Result<Self, LinalgError> {
        if i >= self.rows || j >= self.cols {
            return Err(LinalgError::IndexOutOfRange(i, j));
        }
        let mut entries = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for r in (0..self.rows).filter(|&r| r != i) {
            for c in (0..self.cols).filter(|&c| c != j) {
                entries.push(self.get(r, c).clone());
            }
        }
        Ok(PolyMatrix { ring: self.ring.clone(), rows: self.rows - 1, cols: self.cols - 1, entries })
    }

    /// Unsigned minor: the determinant after deleting row `i` and column `j`
    /// (0-based). No cofactor sign is applied.
    pub fn minor(&self, i: usize, j: usize) -> Result<Polynomial, LinalgError> {
        self.check_square()?;
        self.delete(i, j)?.det()
    }

    fn check_square(&self) -> Result<(), LinalgError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(LinalgError::NotSquare(self.rows, self.cols))
        }
    }

    fn zero_fraction(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        self.entries.iter().filter(|e| e.is_zero()).count() as f64 / self.entries.len() as f64
    }

    /// Exact determinant. Fraction-free Bareiss elimination, switching to
    /// memoized cofactor expansion when at least half the entries vanish.
    pub fn det(&self) -> Result<Polynomial, LinalgError> {
        self.check_square()?;
        if self.rows <= 2 || (self.zero_fraction() >= 0.5 && self.rows <= 20) {
            self.det_cofactor()
        } else {
            self.det_bareiss()
        }
    }

    pub fn det_bareiss(&self) -> Result<Polynomial, LinalgError> {
        self.check_square()?;
        let n = self.rows;
        if n == 0 {
            return Ok(Polynomial::one(&self.ring));
        }
        let mut a: Vec<Vec<Polynomial>> = (0..n).map(|i| self.row(i)).collect();
        let mut prev = Polynomial::one(&self.ring);
        let mut negate = false;
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                // choose the sparsest usable pivot row to keep products small
                let Some(p) = (k + 1..n).filter(|&r| !a[r][k].is_zero()).min_by_key(|&r| a[r][k].num_terms()) else {
                    return Ok(Polynomial::zero(&self.ring));
                };
                a.swap(k, p);
                negate = !negate;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let t = &(&a[k][k] * &a[i][j]) - &(&a[i][k] * &a[k][j]);
                    a[i][j] = t
                        .exact_divide(&prev)?
                        .expect("Bareiss step divides exactly");
                }
                a[i][k] = Polynomial::zero(&self.ring);
            }
            prev = a[k][k].clone();
        }
        let d = a[n - 1][n - 1].clone();
        Ok(if negate { -d } else { d })
    }

    /// Laplace expansion along rows, memoized on the set of used columns.
    pub fn det_cofactor(&self) -> Result<Polynomial, LinalgError> {
        self.check_square()?;
        let n = self.rows;
        if n > 63 {
            return Err(LinalgError::DimensionMismatch("cofactor expansion limited to 63 columns".into()));
        }
        let mut memo: HashMap<u64, Polynomial> = HashMap::new();
        Ok(self.cofactor_rec(0, 0, &mut memo))
    }

    fn cofactor_rec(&self, row: usize, used: u64, memo: &mut HashMap<u64, Polynomial>) -> Polynomial {
        let n = self.rows;
        if row == n {
            return Polynomial::one(&self.ring);
        }
        if let Some(p) = memo.get(&used) {
            return p.clone();
        }
        let mut acc = Polynomial::zero(&self.ring);
        let mut sign_pos = true;
        for c in 0..n {
            if used & (1 << c) != 0 {
                continue;
            }
            let e = self.get(row, c);
            if !e.is_zero() {
                let sub = self.cofactor_rec(row + 1, used | (1 << c), memo);
                if !sub.is_zero() {
                    let t = e * &sub;
                    acc = if sign_pos { &acc + &t } else { &acc - &t };
                }
            }
            sign_pos = !sign_pos;
        }
        memo.insert(used, acc.clone());
        acc
    }
}

/// Sparse matrix of exact rationals, stored by rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    cols: usize,
    rows: Vec<BTreeMap<usize, BigRational>>,
}

impl RationalMatrix {
    pub fn new(cols: usize) -> Self {
        RationalMatrix { cols, rows: Vec::new() }
    }

    pub fn from_dense(rows: Vec<Vec<BigRational>>) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LinalgError::DimensionMismatch("ragged rows".into()));
        }
        let mut m = Self::new(cols);
        for r in rows {
            m.push_row(r.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect());
        }
        Ok(m)
    }

    pub fn from_integers(rows: &[Vec<i64>]) -> Result<Self, LinalgError> {
        Self::from_dense(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
                .collect(),
        )
    }

    pub fn push_row(&mut self, row: BTreeMap<usize, BigRational>) {
        assert!(row.keys().all(|&c| c < self.cols), "column out of range");
        self.rows.push(row.into_iter().filter(|(_, v)| !v.is_zero()).collect());
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> BigRational {
        self.rows[i].get(&j).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        self.rows
            .iter()
            .map(|r| r.iter().fold(BigRational::zero(), |s, (&j, a)| s + a * &v[j]))
            .collect()
    }

    fn echelon(&self) -> Echelon {
        let mut e = Echelon::new(self.cols);
        for r in &self.rows {
            e.insert(r.iter().map(|(&c, v)| (c, v.clone())).collect());
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.echelon().rank()
    }

    /// Basis of the right null space, normalized: integer entries, content 1,
    /// first nonzero entry positive. Ordered by free column.
    pub fn kernel(&self) -> Vec<Vec<BigInt>> {
        self.echelon().kernel()
    }

    /// Some solution of `self·x = b`, or `None` when inconsistent.
    pub fn solve(&self, b: &[BigRational]) -> Result<Option<Vec<BigRational>>, LinalgError> {
        if b.len() != self.rows.len() {
            return Err(LinalgError::DimensionMismatch("right-hand side length".into()));
        }
        let mut e = Echelon::new(self.cols + 1);
        for (r, bi) in self.rows.iter().zip(b) {
            let mut row: Vec<(usize, BigRational)> = r.iter().map(|(&c, v)| (c, v.clone())).collect();
            if !bi.is_zero() {
                row.push((self.cols, bi.clone()));
            }
            e.insert(row);
            if e.pivot_row(self.cols).is_some() {
                return Ok(None);
            }
        }
        Ok(Some(e.particular_solution(self.cols)))
    }
}

/// A sparse integer row: strictly increasing columns, no zeros.
pub type SparseRow = Vec<(usize, BigInt)>;

/// Incremental fraction-free Gauss–Jordan elimination over the integers.
/// Rows are kept primitive; each pivot column is zero in every other row.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    ncols: usize,
    rows: Vec<SparseRow>,
    pivots: BTreeMap<usize, usize>,
}

fn to_integer_row(row: Vec<(usize, BigRational)>) -> SparseRow {
    let mut den = BigInt::one();
    for (_, v) in &row {
        den = den.lcm(v.denom());
    }
    let mut out: SparseRow = row
        .into_iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|(c, v)| (c, (v * BigRational::from_integer(den.clone())).to_integer()))
        .collect();
    out.sort_by_key(|(c, _)| *c);
    // merge duplicates defensively
    let mut merged: SparseRow = Vec::with_capacity(out.len());
    for (c, v) in out {
        match merged.last_mut() {
            Some((lc, lv)) if *lc == c => *lv += v,
            _ => merged.push((c, v)),
        }
    }
    merged.retain(|(_, v)| !v.is_zero());
    make_primitive(&mut merged);
    merged
}

fn make_primitive(row: &mut SparseRow) {
    let mut g = BigInt::zero();
    for (_, v) in row.iter() {
        g = g.gcd(v);
        if g.is_one() {
            return;
        }
    }
    if g.is_zero() || g.is_one() {
        return;
    }
    for (_, v) in row.iter_mut() {
        *v /= &g;
    }
}

/// `a·row − b·pivot`, primitive.
fn combine(a: &BigInt, row: &[(usize, BigInt)], b: &BigInt, pivot: &[(usize, BigInt)]) -> SparseRow {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        let ci = row.get(i).map_or(usize::MAX, |t| t.0);
        let cj = pivot.get(j).map_or(usize::MAX, |t| t.0);
        if ci < cj {
            out.push((ci, a * &row[i].1));
            i += 1;
        } else if cj < ci {
            out.push((cj, -(b * &pivot[j].1)));
            j += 1;
        } else {
            let v = a * &row[i].1 - b * &pivot[j].1;
            if !v.is_zero() {
                out.push((ci, v));
            }
            i += 1;
            j += 1;
        }
    }
    make_primitive(&mut out);
    out
}

fn entry(row: &[(usize, BigInt)], col: usize) -> Option<&BigInt> {
    row.binary_search_by_key(&col, |t| t.0).ok().map(|i| &row[i].1)
}

impl Echelon {
    pub fn new(ncols: usize) -> Self {
        Echelon { ncols, rows: Vec::new(), pivots: BTreeMap::new() }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivot_row(&self, col: usize) -> Option<&SparseRow> {
        self.pivots.get(&col).map(|&r| &self.rows[r])
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        self.pivots.keys().copied().collect()
    }

    /// Reduces a row against the current pivots.
    pub fn reduce(&self, row: Vec<(usize, BigRational)>) -> SparseRow {
        self.reduce_int(to_integer_row(row))
    }

    fn reduce_int(&self, mut row: SparseRow) -> SparseRow {
        let mut idx = 0;
        while idx < row.len() {
            let (c, v) = (row[idx].0, row[idx].1.clone());
            if let Some(&pr) = self.pivots.get(&c) {
                let p = &self.rows[pr];
                let pv = entry(p, c).expect("pivot entry");
                let g = v.gcd(pv);
                row = combine(&(pv / &g), &row, &(&v / &g), p);
                // entries before c are untouched, so continue at the same index
                idx = row.partition_point(|t| t.0 < c);
            } else {
                idx += 1;
            }
        }
        row
    }

    /// Adds a row; returns `true` when it was independent of the span.
    pub fn insert(&mut self, row: Vec<(usize, BigRational)>) -> bool {
        let r = self.reduce(row);
        self.insert_reduced(r)
    }

    pub fn insert_integer(&mut self, row: SparseRow) -> bool {
        let mut row = row;
        row.sort_by_key(|t| t.0);
        row.retain(|t| !t.1.is_zero());
        make_primitive(&mut row);
        let r = self.reduce_int(row);
        self.insert_reduced(r)
    }

    fn insert_reduced(&mut self, mut r: SparseRow) -> bool {
        if r.is_empty() {
            return false;
        }
        if r[0].1.is_negative() {
            for t in r.iter_mut() {
                t.1 = -t.1.clone();
            }
        }
        let pc = r[0].0;
        let pv = r[0].1.clone();
        for row in self.rows.iter_mut() {
            if let Some(v) = entry(row, pc).cloned() {
                let g = v.gcd(&pv);
                *row = combine(&(&pv / &g), row, &(&v / &g), &r);
            }
        }
        self.pivots.insert(pc, self.rows.len());
        self.rows.push(r);
        true
    }

    /// Rows as dense integer vectors, ordered by pivot column.
    pub fn reduced_basis(&self) -> Vec<Vec<BigInt>> {
        self.pivots
            .values()
            .map(|&r| {
                let mut v = vec![BigInt::zero(); self.ncols];
                for (c, x) in &self.rows[r] {
                    v[*c] = x.clone();
                }
                v
            })
            .collect()
    }

    pub fn is_independent(&self, row: Vec<(usize, BigRational)>) -> bool {
        !self.reduce(row).is_empty()
    }

    /// Null space of the accumulated rows.
    pub fn kernel(&self) -> Vec<Vec<BigInt>> {
        let mut out = Vec::new();
        for f in (0..self.ncols).filter(|c| !self.pivots.contains_key(c)) {
            let mut v = vec![BigRational::zero(); self.ncols];
            v[f] = BigRational::one();
            for (&pc, &ri) in &self.pivots {
                if let Some(a) = entry(&self.rows[ri], f) {
                    let p = entry(&self.rows[ri], pc).expect("pivot entry");
                    v[pc] = -BigRational::new(a.clone(), p.clone());
                }
            }
            out.push(normalize_integer(&v));
        }
        out
    }

    /// Solution with free variables zero, for an augmented system whose last
    /// column index is `rhs`.
    fn particular_solution(&self, rhs: usize) -> Vec<BigRational> {
        let mut x = vec![BigRational::zero(); rhs];
        for (&pc, &ri) in &self.pivots {
            if pc == rhs {
                continue;
            }
            let row = &self.rows[ri];
            if let Some(b) = entry(row, rhs) {
                let p = entry(row, pc).expect("pivot entry");
                x[pc] = BigRational::new(b.clone(), p.clone());
            }
        }
        x
    }
}

/// Scales a rational vector to coprime integers with first nonzero entry positive.
pub fn normalize_integer(v: &[BigRational]) -> Vec<BigInt> {
    let mut den = BigInt::one();
    for x in v {
        den = den.lcm(x.denom());
    }
    let mut ints: Vec<BigInt> = v
        .iter()
        .map(|x| (x * BigRational::from_integer(den.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() {
        for x in ints.iter_mut() {
            *x /= &g;
        }
    }
    if ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        for x in ints.iter_mut() {
            *x = -x.clone();
        }
    }
    ints
}

/// Determinant of a dense square rational matrix by Gaussian elimination.
pub fn rational_det(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let n = a.len();
    let mut det = BigRational::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return BigRational::zero();
        };
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        let piv = a[k][k].clone();
        det *= &piv;
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &piv;
            for j in k..n {
                let t = &f * &a[k][j];
                a[i][j] -= t;
            }
        }
    }
    det
}

pub fn to_rationals(v: &[BigInt]) -> Vec<Coeff> {
    v.iter().map(|x| BigRational::from_integer(x.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::{integer, WeightSystem};
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn ring() -> Ring {
        WeightSystem::standard(["a", "b", "c", "d"]).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let m = RationalMatrix::from_integers(&[vec![1, 1]]).unwrap();
        assert_eq!(m.kernel(), vec![ints(&[1, -1])]);
        let id = RationalMatrix::from_integers(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert!(id.kernel().is_empty());
        let m = RationalMatrix::from_integers(&[vec![2, 4]]).unwrap();
        assert_eq!(m.kernel(), vec![ints(&[2, -1])]);
    }

    #[test]
    fn rational_det_examples() {
        let m = vec![vec![integer(0), integer(2)], vec![integer(3), integer(1)]];
        assert_eq!(rational_det(m), integer(-6));
    }

    #[test]
    fn solve_examples() {
        let m = RationalMatrix::from_integers(&[vec![1, 2], vec![2, 4]]).unwrap();
        let b = [integer(3), integer(6)];
        let x = m.solve(&b).unwrap().unwrap();
        assert_eq!(m.mul_vec(&x), b.to_vec());
        assert_eq!(m.solve(&[integer(1), integer(1)]).unwrap(), None);
    }

    #[test]
    fn determinant_examples() {
        let r = WeightSystem::standard(["V1", "W1", "W2"]).unwrap();
        let v = |n: &str| Polynomial::var(&r, n).unwrap();
        let lam = PolyMatrix::from_rows(&r, vec![vec![-v("V1"), v("W2")], vec![v("W2"), -(&v("V1") * &v("W1"))]]).unwrap();
        let expected = &(&v("V1").pow(2) * &v("W1")) - &v("W2").pow(2);
        assert_eq!(lam.det().unwrap(), expected);
        assert_eq!(lam.det_bareiss().unwrap(), expected);
        assert_eq!(lam.minor(1, 1).unwrap(), -v("V1"));
        assert!(PolyMatrix::identity(&r, 4).det().unwrap().is_one());
        assert!(PolyMatrix::identity(&r, 3).minor(0, 0).unwrap().is_one());
        let rect = PolyMatrix::zero(&r, 2, 3);
        assert_eq!(rect.det(), Err(LinalgError::NotSquare(2, 3)));
        assert_eq!(lam.minor(2, 0), Err(LinalgError::IndexOutOfRange(2, 0)));
    }

    fn sparse_matrix(n: usize) -> impl Strategy<Value = PolyMatrix> {
        prop::collection::vec(
            prop_oneof![
                3 => Just(None),
                2 => ((0u32..2, 0u32..2, 0u32..2, 0u32..2), -3i64..4).prop_map(Some),
            ],
            n * n,
        )
        .prop_flat_map(move |cells| {
            let r = ring();
            let entries: Vec<Polynomial> = cells
                .into_iter()
                .map(|c| match c {
                    None => Polynomial::zero(&r),
                    Some(((a, b, c, d), k)) => {
                        &Polynomial::term(&r, vec![a, b, c, d], integer(k)) + &Polynomial::from_int(&r, 1)
                    }
                })
                .collect();
            Just(PolyMatrix::new(&r, n, n, entries).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn bareiss_matches_cofactor(m in (1usize..5).prop_flat_map(sparse_matrix)) {
            prop_assert_eq!(m.det_bareiss().unwrap(), m.det_cofactor().unwrap());
        }

        #[test]
        fn transpose_preserves_det(m in (1usize..4).prop_flat_map(sparse_matrix)) {
            prop_assert_eq!(m.transpose().det().unwrap(), m.det().unwrap());
        }

        #[test]
        fn block_triangular_det(a in sparse_matrix(2), b in sparse_matrix(2), c in sparse_matrix(2)) {
            let r = ring();
            let mut m = PolyMatrix::zero(&r, 4, 4);
            for i in 0..2 {
                for j in 0..2 {
                    m.set(i, j, a.get(i, j).clone());
                    m.set(i, j + 2, c.get(i, j).clone());
                    m.set(i + 2, j + 2, b.get(i, j).clone());
                }
            }
            prop_assert_eq!(m.det().unwrap(), &a.det().unwrap() * &b.det().unwrap());
        }

        #[test]
        fn symmetric_minors(m in sparse_matrix(3)) {
            let s = PolyMatrix::from_rows(m.ring(), (0..3).map(|i| (0..3).map(|j| {
                &m.get(i, j).clone() + m.get(j, i)
            }).collect()).collect()).unwrap();
            prop_assert!(s.is_symmetric());
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert_eq!(s.minor(i, j).unwrap(), s.minor(j, i).unwrap());
                }
            }
        }

        #[test]
        fn kernel_vectors_annihilate(rows in prop::collection::vec(prop::collection::vec(-3i64..4, 5), 1..5)) {
            let m = RationalMatrix::from_integers(&rows).unwrap();
            let k = m.kernel();
            prop_assert_eq!(k.len() + m.rank(), 5);
            for v in &k {
                prop_assert!(m.mul_vec(&to_rationals(v)).iter().all(|x| x.is_zero()));
                prop_assert!(v.iter().find(|x| !x.is_zero()).unwrap().is_positive());
            }
            let mut e = Echelon::new(5);
            for v in &k {
                prop_assert!(e.insert(to_rationals(v).into_iter().enumerate().collect()));
            }
        }
    }
}
