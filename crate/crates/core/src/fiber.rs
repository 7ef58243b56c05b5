//! Central fibers `D_λ = D_q(Cⁿ)/(x_i^ℓ - λ_i, ∂_i^ℓ - λ_i∨)` and their explicit
//! matrix models.
//!
//! Row/column indices of `Mat(ℓⁿ)` are vectors `r ∈ (Z/ℓ)ⁿ` linearized with the
//! first factor varying fastest, `idx(r) = Σ r_i ℓ^{i-1}`. In each tensor
//! factor the basis `v_r` diagonalizes the Euler operator with eigenvalue
//! `γ q^{-2r}`; `x` lowers `r` by one and `∂` raises it.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::field::{CycField, CycScalar};
use crate::linalg::{saturate, Echelon, LinalgError, Matrix, QuotientCoords, SparseVec};
use crate::pbw::{DqAlgebra, Monomial, PbwElement, TorusEmbedding};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FiberError {
    #[error("fiber point has {got} coordinates but n = {n}")]
    LengthMismatch { got: usize, n: usize },
    #[error("b_{index}^l != lambda_{index}")]
    BadCRoot { index: usize },
    #[error("gamma_{index}^l != 1 + lambda_{index} lambda_{index}v")]
    BadGammaRoot { index: usize },
    #[error("point lies outside the Azumaya locus: 1 + lambda_{index} lambda_{index}v = 0")]
    OutsideLocus { index: usize },
    #[error("gamma_{index} is an l-th root of unity but not a power of q")]
    GammaNotQPower { index: usize },
    #[error("monomial basis is not a complement to the left ideal")]
    NotABasis,
}

/// A central character `λ = (λ_i, λ_i∨)` with chosen roots.
///
/// `b_i` (with `b_i^ℓ = λ_i`) is optional since nothing downstream needs it and
/// it often fails to exist in `Q(q)`; `γ_i` (with `γ_i^ℓ = 1 + λ_iλ_i∨`) is
/// required.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberPoint {
    lambda: Vec<(CycScalar, CycScalar)>,
    b: Vec<Option<CycScalar>>,
    gamma: Vec<CycScalar>,
}

impl FiberPoint {
    pub fn new(
        lambda: Vec<(CycScalar, CycScalar)>,
        b: Vec<Option<CycScalar>>,
        gamma: Vec<CycScalar>,
    ) -> Result<Self, FiberError> {
        let n = lambda.len();
        for len in [b.len(), gamma.len()] {
            if len != n {
                return Err(FiberError::LengthMismatch { got: len, n });
            }
        }
        for (i, ((c, w), (bi, g))) in lambda.iter().zip(b.iter().zip(&gamma)).enumerate() {
            let ell = c.field().ell() as u64;
            if let Some(bi) = bi {
                if &bi.pow_u(ell) != c {
                    return Err(FiberError::BadCRoot { index: i + 1 });
                }
            }
            if g.pow_u(ell) != &(c * w) + &c.field().one() {
                return Err(FiberError::BadGammaRoot { index: i + 1 });
            }
        }
        Ok(FiberPoint { lambda, b, gamma })
    }

    /// The origin `λ = 0` with `b = 0`, `γ = 1`.
    pub fn origin(field: &Arc<CycField>, n: usize) -> Self {
        FiberPoint {
            lambda: vec![(field.zero(), field.zero()); n],
            b: vec![Some(field.zero()); n],
            gamma: vec![field.one(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn c(&self, i: usize) -> &CycScalar {
        &self.lambda[i].0
    }

    pub fn w(&self, i: usize) -> &CycScalar {
        &self.lambda[i].1
    }

    pub fn b(&self, i: usize) -> Option<&CycScalar> {
        self.b[i].as_ref()
    }

    pub fn gamma(&self, i: usize) -> &CycScalar {
        &self.gamma[i]
    }

    pub fn gammas(&self) -> &[CycScalar] {
        &self.gamma
    }

    pub fn lambda(&self) -> &[(CycScalar, CycScalar)] {
        &self.lambda
    }

    /// `1 + λ_iλ_i∨`.
    pub fn moment_base(&self, i: usize) -> CycScalar {
        let (c, w) = &self.lambda[i];
        &(c * w) + &c.field().one()
    }

    /// First index (0-based) with `1 + λ_iλ_i∨ = 0`.
    pub fn locus_violation(&self) -> Option<usize> {
        (0..self.n()).find(|&i| self.moment_base(i).is_zero())
    }

    pub fn in_azumaya_locus(&self) -> bool {
        self.locus_violation().is_none()
    }

    fn require_locus(&self) -> Result<(), FiberError> {
        match self.locus_violation() {
            Some(i) => Err(FiberError::OutsideLocus { index: i + 1 }),
            None => Ok(()),
        }
    }

    /// The single-index point `(λ_i, λ_i∨, b_i, γ_i)`.
    pub fn factor(&self, i: usize) -> FiberPoint {
        FiberPoint {
            lambda: vec![self.lambda[i].clone()],
            b: vec![self.b[i].clone()],
            gamma: vec![self.gamma[i].clone()],
        }
    }
}

pub fn in_azumaya_locus(p: &FiberPoint) -> bool {
    p.in_azumaya_locus()
}

/// Exponents reduced below `ℓ` using `x_i^ℓ = λ_i`, `∂_i^ℓ = λ_i∨`.
pub fn reduce_to_fiber(a: &PbwElement, p: &FiberPoint) -> PbwElement {
    let mut out = PbwElement::zero(a.n());
    for (m, c) in a.terms() {
        let ell = c.field().ell();
        let mut coeff = c.clone();
        let mut red = m.clone();
        for i in 0..m.n() {
            let (qx, qd) = (m.x[i] / ell, m.d[i] / ell);
            red.x[i] %= ell;
            red.d[i] %= ell;
            if qx > 0 {
                coeff = &coeff * &p.c(i).pow_u(qx as u64);
            }
            if qd > 0 {
                coeff = &coeff * &p.w(i).pow_u(qd as u64);
            }
        }
        out.add_term(red, coeff);
    }
    out
}

/// The finite-dimensional algebra `D_λ` with basis the monomials of exponents
/// below `ℓ`.
pub struct FiberAlgebra {
    alg: Arc<DqAlgebra>,
    point: FiberPoint,
}

impl FiberAlgebra {
    pub fn new(alg: Arc<DqAlgebra>, point: FiberPoint) -> Result<Self, FiberError> {
        if point.n() != alg.n() {
            return Err(FiberError::LengthMismatch { got: point.n(), n: alg.n() });
        }
        Ok(FiberAlgebra { alg, point })
    }

    pub fn algebra(&self) -> &Arc<DqAlgebra> {
        &self.alg
    }

    pub fn point(&self) -> &FiberPoint {
        &self.point
    }

    pub fn field(&self) -> &Arc<CycField> {
        self.alg.field()
    }

    pub fn reduce(&self, a: &PbwElement) -> PbwElement {
        reduce_to_fiber(a, &self.point)
    }

    pub fn multiply(&self, a: &PbwElement, b: &PbwElement) -> PbwElement {
        self.reduce(&self.alg.multiply(a, b))
    }

    /// All monomials with exponents below `ℓ`; `ℓ^{2n}` of them.
    pub fn basis(&self) -> Vec<Monomial> {
        let n = self.alg.n();
        let ell = self.alg.ell();
        let mut out = Vec::new();
        let total = (ell as usize).pow(2 * n as u32);
        for mut code in 0..total {
            let mut m = Monomial::one(n);
            for e in m.x.iter_mut().chain(m.d.iter_mut()) {
                *e = (code % ell as usize) as u32;
                code /= ell as usize;
            }
            out.push(m);
        }
        out.sort();
        out
    }

    pub fn dim(&self) -> usize {
        (self.alg.ell() as usize).pow(2 * self.alg.n() as u32)
    }

    fn generators(&self) -> Vec<PbwElement> {
        (0..self.alg.n())
            .flat_map(|i| [self.alg.x(i).unwrap(), self.alg.d(i).unwrap()])
            .collect()
    }

    /// Two-sided ideal generated by `gens`, by saturating under left and
    /// right multiplication with the generators `x_i`, `∂_i`.
    pub fn two_sided_ideal(&self, gens: &[PbwElement]) -> Echelon<Monomial> {
        let seeds: Vec<SparseVec<Monomial>> = gens.iter().map(|g| self.reduce(g).terms().clone()).collect();
        let n = self.alg.n();
        let mut ops: Vec<Box<dyn Fn(&SparseVec<Monomial>) -> SparseVec<Monomial> + '_>> = Vec::new();
        for g in self.generators() {
            let left = g.clone();
            ops.push(Box::new(move |v: &SparseVec<Monomial>| {
                self.multiply(&left, &from_vec(n, v)).terms().clone()
            }));
            let right = g;
            ops.push(Box::new(move |v: &SparseVec<Monomial>| {
                self.multiply(&from_vec(n, v), &right).terms().clone()
            }));
        }
        saturate(seeds, &ops)
    }

    /// Left ideal `D_λ·{g}`, the span of `b·g` over basis monomials `b`.
    pub fn left_ideal(&self, gens: &[PbwElement]) -> Echelon<Monomial> {
        let mut ech = Echelon::new();
        for m in self.basis() {
            let b = PbwElement::term(m, self.field().one());
            for g in gens {
                ech.insert(self.multiply(&b, g).terms().clone());
            }
        }
        ech
    }
}

fn from_vec(n: usize, v: &SparseVec<Monomial>) -> PbwElement {
    let mut e = PbwElement::zero(n);
    for (m, c) in v {
        e.add_term(m.clone(), c.clone());
    }
    e
}

/// Images of `x`, `∂`, `α` in `Mat(ℓ)` for a single index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rank1Rep {
    pub x: Matrix,
    pub d: Matrix,
    pub alpha: Matrix,
}

/// `k` with `q^{2k} = γ`, if any.
pub fn gamma_exponent(gamma: &CycScalar) -> Option<u32> {
    let ell = gamma.field().ell();
    (0..ell).find(|&k| &gamma.field().qpow(2 * k as i64) == gamma)
}

/// Matrix model of `D_λ` for `n = 1`.
///
/// With `x v_r = a_r v_{r-1}` and `∂ v_r = d_r v_{r+1}` the relations reduce to
/// `a_{r+1} d_r = γq^{-2r} - 1`, `∏a_r = c`, `∏d_r = w`. For `c ≠ 0` the basis is
/// normalized so that `x` acts by one except on `v_0`, i.e. `v_{-j} = x^j v_0`.
/// For `c = 0`, `γ = q^{2k}` and the chain of `x` is broken at `v_{k+1}`.
pub fn rank1_matrix_rep(
    field: &Arc<CycField>,
    c: &CycScalar,
    w: &CycScalar,
    b: Option<&CycScalar>,
    gamma: &CycScalar,
) -> Result<Rank1Rep, FiberError> {
    let ell = field.ell() as usize;
    let base = &(c * w) + &field.one();
    if base.is_zero() {
        return Err(FiberError::OutsideLocus { index: 1 });
    }
    if let Some(b) = b {
        if &b.pow_u(ell as u64) != c {
            return Err(FiberError::BadCRoot { index: 1 });
        }
    }
    if gamma.pow_u(ell as u64) != base {
        return Err(FiberError::BadGammaRoot { index: 1 });
    }
    let eig = |r: usize| gamma.mul_qpow(-2 * r as i64);
    let mut a = vec![field.one(); ell];
    let mut dd = vec![field.one(); ell];
    if !c.is_zero() {
        a[0] = c.clone();
        for (r, slot) in dd.iter_mut().enumerate().take(ell - 1) {
            *slot = &eig(r) - &field.one();
        }
        dd[ell - 1] = (&eig(ell - 1) - &field.one())
            .div(c)
            .expect("c is nonzero");
    } else {
        let k = gamma_exponent(gamma).ok_or(FiberError::GammaNotQPower { index: 1 })? as usize;
        for r in 0..ell {
            if r == k {
                a[(r + 1) % ell] = field.zero();
                dd[r] = w.clone();
            } else {
                a[(r + 1) % ell] = &eig(r) - &field.one();
            }
        }
    }
    let mut x = Matrix::zeros(field, ell);
    let mut d = Matrix::zeros(field, ell);
    for r in 0..ell {
        x.set((r + ell - 1) % ell, r, a[r].clone());
        d.set((r + 1) % ell, r, dd[r].clone());
    }
    let alpha = Matrix::diag(field, (0..ell).map(eig).collect());
    Ok(Rank1Rep { x, d, alpha })
}

/// A matrix algebra `Mat(N)` graded by `Z^d` through row weights:
/// `deg(E_{a,c}) = f(a) - f(c)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedFactor {
    pub weights: Vec<Vec<i64>>,
}

impl GradedFactor {
    /// Grading of the rank-one model of index `i`: `x_i` has degree `deg(i)`
    /// and lowers `r`, so `f(r) = -r·deg(i)`.
    pub fn rank1(emb: &TorusEmbedding, i: usize, ell: u32) -> Self {
        let deg = emb.deg(i);
        GradedFactor {
            weights: (0..ell as i64)
                .map(|r| deg.iter().map(|g| -r * g).collect())
                .collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn deg(&self, a: usize, c: usize) -> Vec<i64> {
        self.weights[a]
            .iter()
            .zip(&self.weights[c])
            .map(|(x, y)| x - y)
            .collect()
    }

    /// Graded tensor product, first factor fastest.
    pub fn tensor(&self, other: &GradedFactor) -> GradedFactor {
        let mut weights = Vec::with_capacity(self.size() * other.size());
        for w2 in &other.weights {
            for w1 in &self.weights {
                weights.push(w1.iter().zip(w2).map(|(a, b)| a + b).collect());
            }
        }
        GradedFactor { weights }
    }
}

/// Braided tensor product `A_1 ⊗ ⋯ ⊗ A_k` of graded matrix algebras, where
/// `(X_1⊗⋯⊗X_k)(Y_1⊗⋯⊗Y_k) = q^{Σ_{i>j}⟨deg X_i, deg Y_j⟩} X_1Y_1⊗⋯⊗X_kY_k`,
/// together with the untwisting map
/// `φ(E_1⊗⋯⊗E_k) = E_1 ⊗ Δ(E_1)E_2 ⊗ Δ(E_1+E_2)E_3 ⊗ ⋯` from the ordinary
/// tensor product (`Δ(E)` diagonal with entry `q^{c⟨f(k), deg E⟩}`, `c = 1`).
#[derive(Clone, Debug)]
pub struct BraidedTensor {
    field: Arc<CycField>,
    form: Vec<Vec<i64>>,
    factors: Vec<GradedFactor>,
    delta_factor: i64,
}

impl BraidedTensor {
    pub fn new(field: &Arc<CycField>, form: Vec<Vec<i64>>, factors: Vec<GradedFactor>) -> Self {
        BraidedTensor {
            field: Arc::clone(field),
            form,
            factors,
            delta_factor: 1,
        }
    }

    /// Same structure with `Δ(E)_k = q^{c⟨f(k), deg E⟩}` for another `c`.
    pub fn with_delta_factor(mut self, c: i64) -> Self {
        self.delta_factor = c;
        self
    }

    pub fn factors(&self) -> &[GradedFactor] {
        &self.factors
    }

    pub fn size(&self) -> usize {
        self.factors.iter().map(GradedFactor::size).product()
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        self.factors
            .iter()
            .map(|f| {
                let r = idx % f.size();
                idx /= f.size();
                r
            })
            .collect()
    }

    fn pair(&self, u: &[i64], v: &[i64]) -> i64 {
        let mut acc = 0;
        for (a, ua) in u.iter().enumerate() {
            for (b, vb) in v.iter().enumerate() {
                acc += ua * self.form[a][b] * vb;
            }
        }
        acc
    }

    fn factor_degrees(&self, row: &[usize], col: &[usize]) -> Vec<Vec<i64>> {
        self.factors
            .iter()
            .zip(row.iter().zip(col))
            .map(|(f, (a, c))| f.deg(*a, *c))
            .collect()
    }

    /// Braiding exponent of `E_{A,C} · E_{C,E}`.
    pub fn braiding_exponent(&self, a: usize, c: usize, e: usize) -> i64 {
        let (a, c, e) = (self.decode(a), self.decode(c), self.decode(e));
        let dx = self.factor_degrees(&a, &c);
        let dy = self.factor_degrees(&c, &e);
        let mut acc = 0;
        for i in 0..dx.len() {
            for dyj in dy.iter().take(i) {
                acc += self.pair(&dx[i], dyj);
            }
        }
        acc
    }

    pub fn braided_mul(&self, x: &Matrix, y: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(&self.field, self.size());
        for (a, c, xv) in x.entries() {
            for (e, yv) in y.row(c) {
                let s = (xv * yv).mul_qpow(self.braiding_exponent(a, c, *e));
                let cur = out.get(a, *e);
                out.set(a, *e, &cur + &s);
            }
        }
        out
    }

    /// Exponent of `q` by which `φ` scales the elementary tensor `E_{A,C}`.
    pub fn untwist_exponent(&self, a: usize, c: usize) -> i64 {
        let (ra, rc) = (self.decode(a), self.decode(c));
        let degs = self.factor_degrees(&ra, &rc);
        let mut acc = 0;
        let mut prefix = vec![0i64; self.form.len()];
        for (i, f) in self.factors.iter().enumerate() {
            acc += self.pair(&f.weights[ra[i]], &prefix);
            for (p, g) in prefix.iter_mut().zip(&degs[i]) {
                *p += g;
            }
        }
        self.delta_factor * acc
    }

    pub fn untwist(&self, x: &Matrix) -> Matrix {
        self.rescale(x, 1)
    }

    pub fn untwist_inverse(&self, x: &Matrix) -> Matrix {
        self.rescale(x, -1)
    }

    fn rescale(&self, x: &Matrix, sign: i64) -> Matrix {
        let mut out = Matrix::zeros(&self.field, self.size());
        for (a, c, v) in x.entries() {
            out.set(a, c, v.mul_qpow(sign * self.untwist_exponent(a, c)));
        }
        out
    }
}

/// Untwisting isomorphism for two graded factors.
pub fn untwist_iso(field: &Arc<CycField>, form: Vec<Vec<i64>>, a1: &GradedFactor, a2: &GradedFactor) -> BraidedTensor {
    BraidedTensor::new(field, form, vec![a1.clone(), a2.clone()])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UntwistReport {
    pub pairs_checked: usize,
    pub failures: usize,
}

/// Checks `φ(X)·_q φ(Y) = φ(XY)` on every pair of elementary matrices.
pub fn verify_untwist_multiplicative(bt: &BraidedTensor) -> UntwistReport {
    let n = bt.size();
    let field = &bt.field;
    let mut failures = 0;
    let mut pairs = 0;
    for a in 0..n {
        for c in 0..n {
            let x = Matrix::unit(field, n, a, c);
            let fx = bt.untwist(&x);
            for c2 in 0..n {
                for e in 0..n {
                    let y = Matrix::unit(field, n, c2, e);
                    let lhs = bt.braided_mul(&fx, &bt.untwist(&y));
                    let rhs = bt.untwist(&x.mul(&y));
                    pairs += 1;
                    if lhs != rhs {
                        failures += 1;
                    }
                }
            }
        }
    }
    UntwistReport {
        pairs_checked: pairs,
        failures,
    }
}

/// The isomorphism `D_λ → Mat(ℓⁿ)` on generators.
pub struct FullRep {
    field: Arc<CycField>,
    n: usize,
    ell: u32,
    pub x: Vec<Matrix>,
    pub d: Vec<Matrix>,
    pub alpha: Vec<Matrix>,
    pub tensor: BraidedTensor,
}

/// Builds `ρ(x_i)`, `ρ(∂_i)`, `ρ(α_i)` by placing the rank-one models in the
/// braided tensor product of the factors and untwisting to `Mat(ℓⁿ)`.
pub fn full_matrix_rep(field: &Arc<CycField>, emb: &TorusEmbedding, p: &FiberPoint) -> Result<FullRep, FiberError> {
    let n = emb.n();
    if p.n() != n {
        return Err(FiberError::LengthMismatch { got: p.n(), n });
    }
    p.require_locus()?;
    let ell = field.ell();
    let reps: Vec<Rank1Rep> = (0..n)
        .map(|i| rank1_matrix_rep(field, p.c(i), p.w(i), p.b(i), p.gamma(i)))
        .collect::<Result<_, _>>()?;
    let factors = (0..n).map(|i| GradedFactor::rank1(emb, i, ell)).collect();
    let tensor = BraidedTensor::new(field, emb.form().to_vec(), factors);
    let id = Matrix::identity(field, ell as usize);
    let embed = |i: usize, m: &Matrix| {
        let mut acc: Option<Matrix> = None;
        for k in 0..n {
            let f = if k == i { m } else { &id };
            acc = Some(match acc {
                None => f.clone(),
                Some(a) => a.kron(f),
            });
        }
        tensor.untwist_inverse(&acc.expect("n >= 1"))
    };
    let x = reps.iter().enumerate().map(|(i, r)| embed(i, &r.x)).collect();
    let d = reps.iter().enumerate().map(|(i, r)| embed(i, &r.d)).collect();
    let alpha = reps.iter().enumerate().map(|(i, r)| embed(i, &r.alpha)).collect();
    Ok(FullRep {
        field: Arc::clone(field),
        n,
        ell,
        x,
        d,
        alpha,
        tensor,
    })
}

impl FullRep {
    pub fn size(&self) -> usize {
        (self.ell as usize).pow(self.n as u32)
    }

    pub fn monomial(&self, m: &Monomial) -> Matrix {
        let mut acc = Matrix::identity(&self.field, self.size());
        for i in 0..self.n {
            for _ in 0..m.x[i] {
                acc = acc.mul(&self.x[i]);
            }
        }
        for i in 0..self.n {
            for _ in 0..m.d[i] {
                acc = acc.mul(&self.d[i]);
            }
        }
        acc
    }

    pub fn apply(&self, a: &PbwElement) -> Matrix {
        let mut acc = Matrix::zeros(&self.field, self.size());
        for (m, c) in a.terms() {
            acc = acc.add(&self.monomial(m).scale(c));
        }
        acc
    }

    pub fn generators(&self) -> Vec<Matrix> {
        self.x.iter().chain(&self.d).cloned().collect()
    }
}

/// Dimension of the span of all words of length at most `max_len` in `gens`.
pub fn word_span_dim(field: &Arc<CycField>, gens: &[Matrix], max_len: usize) -> usize {
    let n = gens.first().map_or(0, Matrix::size);
    let mut ech: Echelon<(usize, usize)> = Echelon::new();
    let id = Matrix::identity(field, n);
    ech.insert(id.to_vec());
    let mut frontier = vec![id];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for v in &frontier {
            for g in gens {
                let w = g.mul(v);
                if ech.insert(w.to_vec()).is_some() {
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    ech.dim()
}

/// Monomial basis of `D_{P′} = D_λ/D_λ(α_i - γ_i)`, one list per index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PPrimeModule {
    /// Per index, pairs `(a, b)` standing for `x^a ∂^b`.
    pub factors: Vec<Vec<(u32, u32)>>,
    pub dim: usize,
}

impl PPrimeModule {
    /// Product basis as monomials of `D_q(Cⁿ)`, first index fastest.
    pub fn monomials(&self) -> Vec<Monomial> {
        let n = self.factors.len();
        let mut out = vec![Monomial::one(n)];
        for (i, basis) in self.factors.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * basis.len());
            for &(a, b) in basis {
                for m in &out {
                    let mut m = m.clone();
                    m.x[i] = a;
                    m.d[i] = b;
                    next.push(m);
                }
            }
            out = next;
        }
        out
    }
}

/// `{1, x, …, x^{ℓ-1}}` when `γ^ℓ ≠ 1`; `{1, x, …, x^{ℓ-k-1}, ∂, …, ∂^k}` when
/// `γ = q^{2k}`.
pub fn pprime_module(p: &FiberPoint) -> Result<PPrimeModule, FiberError> {
    let mut factors = Vec::with_capacity(p.n());
    for i in 0..p.n() {
        let g = p.gamma(i);
        let ell = g.field().ell();
        let basis: Vec<(u32, u32)> = if g.pow_u(ell as u64).is_one() {
            let k = gamma_exponent(g).ok_or(FiberError::GammaNotQPower { index: i + 1 })?;
            (0..ell - k).map(|a| (a, 0)).chain((1..=k).map(|b| (0, b))).collect()
        } else {
            (0..ell).map(|a| (a, 0)).collect()
        };
        factors.push(basis);
    }
    let dim = factors.iter().map(Vec::len).product();
    Ok(PPrimeModule { factors, dim })
}

/// `D_{P′}` computed by linear algebra inside `D_λ`, with coordinates in the
/// monomial basis of [`pprime_module`].
pub struct PPrimeQuotient {
    pub module: PPrimeModule,
    pub basis: Vec<Monomial>,
    pub ideal_dim: usize,
    coords: QuotientCoords<Monomial>,
}

impl PPrimeQuotient {
    pub fn new(fa: &FiberAlgebra) -> Result<Self, FiberError> {
        let module = pprime_module(fa.point())?;
        let alg = fa.algebra();
        let gens: Vec<PbwElement> = (0..alg.n())
            .map(|i| {
                alg.euler(i)
                    .unwrap()
                    .sub(&alg.scalar(fa.point().gamma(i).clone()))
            })
            .collect();
        let ideal = fa.left_ideal(&gens);
        let basis = module.monomials();
        let vecs: Vec<SparseVec<Monomial>> = basis
            .iter()
            .map(|m| [(m.clone(), fa.field().one())].into_iter().collect())
            .collect();
        let ideal_dim = ideal.dim();
        let coords = QuotientCoords::new(fa.field(), ideal.rows().cloned(), &vecs).map_err(|_| FiberError::NotABasis)?;
        if ideal_dim + basis.len() != fa.dim() {
            return Err(FiberError::NotABasis);
        }
        Ok(PPrimeQuotient {
            module,
            basis,
            ideal_dim,
            coords,
        })
    }

    pub fn coords(&self, v: &PbwElement) -> Result<Vec<CycScalar>, LinalgError> {
        self.coords.coords(v.terms())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EndoCheck {
    pub algebra_dim: usize,
    pub module_dim: usize,
    pub rank: usize,
    pub bijective: bool,
}

/// Whether the action `D_λ → End(D_{P′})` is bijective.
pub fn endo_splitting_check(fa: &FiberAlgebra) -> Result<EndoCheck, FiberError> {
    fa.point().require_locus()?;
    let quot = PPrimeQuotient::new(fa)?;
    let one = fa.field().one();
    let mut ech: Echelon<(usize, usize)> = Echelon::new();
    for m in fa.basis() {
        let e = PbwElement::term(m, one.clone());
        let mut image: SparseVec<(usize, usize)> = BTreeMap::new();
        for (j, bm) in quot.basis.iter().enumerate() {
            let v = fa.multiply(&e, &PbwElement::term(bm.clone(), one.clone()));
            let col = quot.coords(&v).map_err(|_| FiberError::NotABasis)?;
            for (i, c) in col.into_iter().enumerate() {
                if !c.is_zero() {
                    image.insert((i, j), c);
                }
            }
        }
        ech.insert(image);
    }
    let module_dim = quot.basis.len();
    let rank = ech.dim();
    Ok(EndoCheck {
        algebra_dim: fa.dim(),
        module_dim,
        rank,
        bijective: rank == fa.dim() && module_dim * module_dim == fa.dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_alpha_is_diag_of_q_powers() {
        let f = CycField::new(3).unwrap();
        let rep = rank1_matrix_rep(&f, &f.zero(), &f.zero(), Some(&f.zero()), &f.one()).unwrap();
        assert_eq!(rep.alpha.diagonal(), vec![f.one(), f.q(), f.qpow(2)]);
    }

    #[test]
    fn rank1_relation_and_powers() {
        let f = CycField::new(5).unwrap();
        let c = f.from_int(32);
        let w = f.zero();
        let rep = rank1_matrix_rep(&f, &c, &w, Some(&f.from_int(2)), &f.one()).unwrap();
        let q2 = f.qpow(2);
        let lhs = rep.d.mul(&rep.x);
        let rhs = rep.x.mul(&rep.d).scale(&q2).add(&Matrix::identity(&f, 5).scale(&(&q2 - &f.one())));
        assert_eq!(lhs, rhs);
        assert_eq!(rep.x.pow(5), Matrix::identity(&f, 5).scale(&c));
        assert!(rep.d.pow(5).is_zero());
    }

    #[test]
    fn rejects_bad_roots_and_non_locus() {
        let f = CycField::new(3).unwrap();
        let err = rank1_matrix_rep(&f, &f.from_int(8), &f.zero(), Some(&f.from_int(3)), &f.one());
        assert_eq!(err.unwrap_err(), FiberError::BadCRoot { index: 1 });
        let err = rank1_matrix_rep(&f, &f.from_int(-1), &f.one(), None, &f.zero());
        assert_eq!(err.unwrap_err(), FiberError::OutsideLocus { index: 1 });
    }

    #[test]
    fn reduce_uses_central_values() {
        let f = CycField::new(3).unwrap();
        let p = FiberPoint::new(vec![(f.from_int(8), f.zero())], vec![Some(f.from_int(2))], vec![f.one()]).unwrap();
        let alg = DqAlgebra::new(f.clone(), TorusEmbedding::trivial(1).unwrap());
        let red = reduce_to_fiber(&alg.x_pow(0, 4).unwrap(), &p);
        assert_eq!(red, alg.x(0).unwrap().scale(&f.from_int(8)));
    }

    #[test]
    fn pprime_bases() {
        let f = CycField::new(3).unwrap();
        let origin = FiberPoint::origin(&f, 1);
        assert_eq!(pprime_module(&origin).unwrap().factors[0], vec![(0, 0), (1, 0), (2, 0)]);
        let g = FiberPoint::new(vec![(f.zero(), f.zero())], vec![None], vec![f.qpow(2)]).unwrap();
        assert_eq!(pprime_module(&g).unwrap().factors[0], vec![(0, 0), (1, 0), (0, 1)]);
        assert_eq!(pprime_module(&FiberPoint::origin(&f, 2)).unwrap().dim, 9);
    }
}
