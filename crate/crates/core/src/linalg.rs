//! Sparse exact linear algebra over `Q(q)`: reduced echelon bases keyed by an
//! arbitrary ordered index type, kernels, quotient coordinates and square
//! sparse matrices.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::field::{CycField, CycScalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("basis vectors are linearly dependent modulo the subspace")]
    NotComplement,
    #[error("vector does not lie in the span of subspace and basis")]
    NotInSpan,
}

/// Finitely supported vector; absent keys are zero and zeros are never stored.
pub type SparseVec<K> = BTreeMap<K, CycScalar>;

/// `y += a * x`, dropping entries that cancel.
pub fn axpy<K: Ord + Clone>(y: &mut SparseVec<K>, a: &CycScalar, x: &SparseVec<K>) {
    if a.is_zero() {
        return;
    }
    for (k, v) in x {
        let term = a * v;
        match y.get_mut(k) {
            Some(slot) => {
                *slot += &term;
                if slot.is_zero() {
                    y.remove(k);
                }
            }
            None => {
                if !term.is_zero() {
                    y.insert(k.clone(), term);
                }
            }
        }
    }
}

pub fn scale_vec<K: Ord + Clone>(v: &SparseVec<K>, a: &CycScalar) -> SparseVec<K> {
    if a.is_zero() {
        return SparseVec::new();
    }
    v.iter().map(|(k, c)| (k.clone(), c * a)).collect()
}

/// A subspace stored as a fully reduced row echelon basis. Every row has
/// coefficient one at its pivot (its smallest key) and zero at every other
/// row's pivot.
#[derive(Clone, Debug)]
pub struct Echelon<K: Ord + Clone> {
    rows: BTreeMap<K, SparseVec<K>>,
}

impl<K: Ord + Clone> Default for Echelon<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Ord + Clone> Echelon<K> {
    pub fn new() -> Self {
        Echelon {
            rows: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> impl Iterator<Item = &SparseVec<K>> {
        self.rows.values()
    }

    pub fn pivots(&self) -> impl Iterator<Item = &K> {
        self.rows.keys()
    }

    /// Remainder of `v` after full reduction against the basis.
    pub fn reduce(&self, mut v: SparseVec<K>) -> SparseVec<K> {
        // Rows vanish on each other's pivots, so one pass over the pivots
        // initially present in `v` is enough.
        let hits: Vec<K> = v
            .keys()
            .filter(|k| self.rows.contains_key(*k))
            .cloned()
            .collect();
        for p in hits {
            if let Some(c) = v.get(&p).cloned() {
                axpy(&mut v, &-c, &self.rows[&p]);
            }
        }
        v
    }

    pub fn contains(&self, v: &SparseVec<K>) -> bool {
        self.reduce(v.clone()).is_empty()
    }

    /// Adds `v` to the span. Returns the new pivot if the dimension grew.
    pub fn insert(&mut self, v: SparseVec<K>) -> Option<K> {
        let r = self.reduce(v);
        let (pivot, lead) = match r.iter().next() {
            Some((k, c)) => (k.clone(), c.clone()),
            None => return None,
        };
        let inv = lead.inv().expect("nonzero pivot");
        let r = scale_vec(&r, &inv);
        for row in self.rows.values_mut() {
            if let Some(c) = row.get(&pivot).cloned() {
                axpy(row, &-c, &r);
            }
        }
        self.rows.insert(pivot.clone(), r);
        Some(pivot)
    }
}

/// Index for augmented vectors: image coordinates sort before tags.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum AugKey<K> {
    Img(K),
    Tag(usize),
}

/// Basis of `{c : Σ c_j images[j] = 0}` as dense coefficient vectors.
pub fn kernel<K: Ord + Clone>(field: &Arc<CycField>, images: &[SparseVec<K>]) -> Vec<Vec<CycScalar>> {
    let mut ech: Echelon<AugKey<K>> = Echelon::new();
    for (j, img) in images.iter().enumerate() {
        let mut v: SparseVec<AugKey<K>> = img
            .iter()
            .map(|(k, c)| (AugKey::Img(k.clone()), c.clone()))
            .collect();
        v.insert(AugKey::Tag(j), field.one());
        ech.insert(v);
    }
    ech.rows
        .iter()
        .filter(|(p, _)| matches!(p, AugKey::Tag(_)))
        .map(|(_, row)| {
            let mut dense = vec![field.zero(); images.len()];
            for (k, c) in row {
                if let AugKey::Tag(j) = k {
                    dense[*j] = c.clone();
                }
            }
            dense
        })
        .collect()
}

/// Coordinates in `V / S` with respect to a chosen list of representatives.
pub struct QuotientCoords<K: Ord + Clone> {
    field: Arc<CycField>,
    ech: Echelon<AugKey<K>>,
    len: usize,
}

impl<K: Ord + Clone> QuotientCoords<K> {
    pub fn new<I>(field: &Arc<CycField>, subspace: I, basis: &[SparseVec<K>]) -> Result<Self, LinalgError>
    where
        I: IntoIterator<Item = SparseVec<K>>,
    {
        let mut ech: Echelon<AugKey<K>> = Echelon::new();
        for v in subspace {
            ech.insert(v.into_iter().map(|(k, c)| (AugKey::Img(k), c)).collect());
        }
        for (j, b) in basis.iter().enumerate() {
            let mut v: SparseVec<AugKey<K>> = b
                .iter()
                .map(|(k, c)| (AugKey::Img(k.clone()), c.clone()))
                .collect();
            v.insert(AugKey::Tag(j), field.one());
            if let Some(AugKey::Tag(_)) = ech.insert(v) {
                return Err(LinalgError::NotComplement);
            }
        }
        Ok(QuotientCoords {
            field: Arc::clone(field),
            ech,
            len: basis.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Coefficients `c` with `v ≡ Σ c_j basis[j]` modulo the subspace.
    pub fn coords(&self, v: &SparseVec<K>) -> Result<Vec<CycScalar>, LinalgError> {
        let aug = v
            .iter()
            .map(|(k, c)| (AugKey::Img(k.clone()), c.clone()))
            .collect();
        let rem = self.ech.reduce(aug);
        let mut out = vec![self.field.zero(); self.len];
        for (k, c) in rem {
            match k {
                AugKey::Img(_) => return Err(LinalgError::NotInSpan),
                AugKey::Tag(j) => out[j] = -c,
            }
        }
        Ok(out)
    }
}

/// Square sparse matrix over `Q(q)`.
#[derive(Clone)]
pub struct Matrix {
    field: Arc<CycField>,
    rows: Vec<BTreeMap<usize, CycScalar>>,
}

impl Matrix {
    pub fn zeros(field: &Arc<CycField>, n: usize) -> Self {
        Matrix {
            field: Arc::clone(field),
            rows: vec![BTreeMap::new(); n],
        }
    }

    pub fn identity(field: &Arc<CycField>, n: usize) -> Self {
        Self::diag(field, vec![field.one(); n])
    }

    pub fn diag(field: &Arc<CycField>, entries: Vec<CycScalar>) -> Self {
        let mut m = Self::zeros(field, entries.len());
        for (i, c) in entries.into_iter().enumerate() {
            m.set(i, i, c);
        }
        m
    }

    /// The elementary matrix `E_{r,s}`.
    pub fn unit(field: &Arc<CycField>, n: usize, r: usize, s: usize) -> Self {
        let mut m = Self::zeros(field, n);
        m.set(r, s, field.one());
        m
    }

    pub fn field(&self) -> &Arc<CycField> {
        &self.field
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, r: usize, s: usize) -> CycScalar {
        self.rows[r].get(&s).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn set(&mut self, r: usize, s: usize, c: CycScalar) {
        if c.is_zero() {
            self.rows[r].remove(&s);
        } else {
            self.rows[r].insert(s, c);
        }
    }

    pub fn row(&self, r: usize) -> &BTreeMap<usize, CycScalar> {
        &self.rows[r]
    }

    /// Nonzero entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &CycScalar)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(s, c)| (r, *s, c)))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BTreeMap::is_empty)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries().all(|(r, s, _)| r == s)
    }

    pub fn diagonal(&self) -> Vec<CycScalar> {
        (0..self.size()).map(|i| self.get(i, i)).collect()
    }

    pub fn scale(&self, a: &CycScalar) -> Matrix {
        let mut out = Matrix::zeros(&self.field, self.size());
        if a.is_zero() {
            return out;
        }
        for (r, row) in self.rows.iter().enumerate() {
            out.rows[r] = row.iter().map(|(s, c)| (*s, c * a)).collect();
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.combine(other, true)
    }

    fn combine(&self, other: &Matrix, negate: bool) -> Matrix {
        assert_eq!(self.size(), other.size());
        let mut out = self.clone();
        for (r, row) in other.rows.iter().enumerate() {
            for (s, c) in row {
                let cur = out.get(r, *s);
                let next = if negate { &cur - c } else { &cur + c };
                out.set(r, *s, next);
            }
        }
        out
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.size(), other.size());
        let mut out = Matrix::zeros(&self.field, self.size());
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc: SparseVec<usize> = BTreeMap::new();
            for (k, a) in row {
                axpy(&mut acc, a, &other.rows[*k]);
            }
            out.rows[r] = acc;
        }
        out
    }

    pub fn pow(&self, e: u32) -> Matrix {
        let mut acc = Matrix::identity(&self.field, self.size());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Matrix) -> Matrix {
        self.mul(other).sub(&other.mul(self))
    }

    /// Kronecker product with the first factor's index varying fastest:
    /// row `i1 + N1 * i2` of the result pairs row `i1` of `self` with row `i2`
    /// of `other`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let n1 = self.size();
        let mut out = Matrix::zeros(&self.field, n1 * other.size());
        for (i2, j2, b) in other.entries() {
            for (i1, j1, a) in self.entries() {
                out.set(i1 + n1 * i2, j1 + n1 * j2, a * b);
            }
        }
        out
    }

    /// Inverse of a diagonal matrix with nonzero diagonal.
    pub fn diag_inverse(&self) -> Option<Matrix> {
        if !self.is_diagonal() {
            return None;
        }
        let mut entries = Vec::with_capacity(self.size());
        for c in self.diagonal() {
            entries.push(c.inv().ok()?);
        }
        Some(Matrix::diag(&self.field, entries))
    }

    pub fn to_vec(&self) -> SparseVec<(usize, usize)> {
        self.entries().map(|(r, s, c)| ((r, s), c.clone())).collect()
    }

    pub fn from_vec(field: &Arc<CycField>, n: usize, v: &SparseVec<(usize, usize)>) -> Matrix {
        let mut m = Matrix::zeros(field, n);
        for ((r, s), c) in v {
            m.set(*r, *s, c.clone());
        }
        m
    }
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
    }
}

impl Eq for Matrix {}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix({}x{})", self.size(), self.size())?;
        for (r, s, c) in self.entries() {
            writeln!(f, "  [{r},{s}] = {c}")?;
        }
        Ok(())
    }
}

/// Dimension of the span of `vectors`.
pub fn rank<K: Ord + Clone, I: IntoIterator<Item = SparseVec<K>>>(vectors: I) -> usize {
    let mut ech = Echelon::new();
    for v in vectors {
        ech.insert(v);
    }
    ech.dim()
}

/// Smallest subspace containing `seeds` and closed under `v ↦ op(v)` for every
/// operator in `ops` (e.g. left and right multiplication by generators).
pub fn saturate<K, F>(seeds: Vec<SparseVec<K>>, ops: &[F]) -> Echelon<K>
where
    K: Ord + Clone,
    F: Fn(&SparseVec<K>) -> SparseVec<K>,
{
    let mut ech = Echelon::new();
    let mut queue: Vec<SparseVec<K>> = Vec::new();
    for s in seeds {
        if let Some(p) = ech.insert(s) {
            queue.push(ech.rows[&p].clone());
        }
    }
    while let Some(v) = queue.pop() {
        for op in ops {
            if let Some(p) = ech.insert(op(&v)) {
                queue.push(ech.rows[&p].clone());
            }
        }
    }
    ech
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> Arc<CycField> {
        CycField::new(3).unwrap()
    }

    fn vec_of(field: &Arc<CycField>, entries: &[(u32, i64)]) -> SparseVec<u32> {
        entries.iter().map(|&(k, c)| (k, field.from_int(c))).collect()
    }

    #[test]
    fn echelon_tracks_dimension() {
        let f = f3();
        let mut e = Echelon::new();
        assert!(e.insert(vec_of(&f, &[(0, 1), (1, 2)])).is_some());
        assert!(e.insert(vec_of(&f, &[(1, 1), (2, 1)])).is_some());
        assert!(e.insert(vec_of(&f, &[(0, 1), (1, 4), (2, 2)])).is_none());
        assert_eq!(e.dim(), 2);
        assert!(e.contains(&vec_of(&f, &[(0, 2), (1, 6), (2, 2)])));
        assert!(!e.contains(&vec_of(&f, &[(2, 1)])));
    }

    #[test]
    fn kernel_of_dependent_columns() {
        let f = f3();
        let imgs = vec![vec_of(&f, &[(0, 1)]), vec_of(&f, &[(0, 2)]), vec_of(&f, &[(1, 1)])];
        let k = kernel(&f, &imgs);
        assert_eq!(k.len(), 1);
        let combo = &(&k[0][0] * &f.one()) + &(&k[0][1] * &f.from_int(2));
        assert!(combo.is_zero());
        assert!(k[0][2].is_zero());
    }

    #[test]
    fn quotient_coordinates() {
        let f = f3();
        let sub = vec![vec_of(&f, &[(0, 1), (1, -1)])];
        let basis = vec![vec_of(&f, &[(1, 1)])];
        let qc = QuotientCoords::new(&f, sub, &basis).unwrap();
        let c = qc.coords(&vec_of(&f, &[(0, 3)])).unwrap();
        assert_eq!(c[0], f.from_int(3));
        assert_eq!(qc.coords(&vec_of(&f, &[(2, 1)])), Err(LinalgError::NotInSpan));
    }

    #[test]
    fn kron_linearizes_first_factor_fastest() {
        let f = f3();
        let a = Matrix::unit(&f, 3, 1, 2);
        let b = Matrix::unit(&f, 3, 2, 0);
        let k = a.kron(&b);
        assert_eq!(k.entries().map(|(r, s, _)| (r, s)).collect::<Vec<_>>(), vec![(1 + 3 * 2, 2)]);
    }

    #[test]
    fn matrix_identities() {
        let f = f3();
        let q = f.q();
        let d = Matrix::diag(&f, vec![f.one(), q.clone(), q.mul_qpow(1)]);
        let inv = d.diag_inverse().unwrap();
        assert_eq!(d.mul(&inv), Matrix::identity(&f, 3));
        assert!(d.commutator(&inv).is_zero());
    }
}
