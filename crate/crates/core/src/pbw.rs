//! The algebra `D_q(Cⁿ)` in PBW normal form.
//!
//! Elements are finite sums of ordered monomials `x^m ∂^k`
//! (`x_1^{m_1}⋯x_n^{m_n} ∂_1^{k_1}⋯∂_n^{k_n}`). Within one index the defining
//! relation is `∂x = q²x∂ + (q²-1)`; across indices `i < j` the generators
//! q-commute with `q_ij = q^{⟨deg j, deg i⟩}`:
//!
//! ```text
//! x_j x_i = q_ij x_i x_j      ∂_j ∂_i = q_ij ∂_i ∂_j
//! ∂_j x_i = q_ij⁻¹ x_i ∂_j    x_j ∂_i = q_ij⁻¹ ∂_i x_j
//! ```
//!
//! Indices are 0-based in this API; text forms use 1-based names `x1`, `d1`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::Serialize;
use thiserror::Error;

use crate::field::{CycField, CycScalar};
use crate::lattice;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmbeddingError {
    #[error("the torus T must have rank n >= 1")]
    EmptyTorus,
    #[error("row {row} of M has length {len}, expected d = {d}")]
    RaggedMatrix { row: usize, len: usize, d: usize },
    #[error("M has {rows} rows, expected n = {n}")]
    WrongRowCount { rows: usize, n: usize },
    #[error("the bilinear form must be {d}x{d}")]
    FormShape { d: usize },
    #[error("d = {d} exceeds n = {n}")]
    TooManyCharacters { d: usize, n: usize },
    #[error("M has rank {rank} over Q, expected full column rank {d}")]
    RankDeficient { rank: usize, d: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PbwError {
    #[error("generator index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("element has {got} indices but the algebra has n = {n}")]
    RankMismatch { got: usize, n: usize },
    #[error("the rank-one polynomial representation needs n = 1, got n = {0}")]
    NotRankOne(usize),
    #[error("element is not homogeneous for the torus action")]
    Inhomogeneous,
    #[error("alpha_{index}^l differs from 1 + x^l d^l: got {got}")]
    EulerPowerMismatch { index: usize, got: String },
    #[error("moment-map monomial has {got} exponents, expected {expected}")]
    ExponentLength { got: usize, expected: usize },
}

/// The embedding `φ: K ↪ T` as an `n × d` integer matrix together with a
/// bilinear form on the character lattice of `K`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorusEmbedding {
    n: usize,
    d: usize,
    m: Vec<Vec<i64>>,
    form: Vec<Vec<i64>>,
}

impl TorusEmbedding {
    pub fn new(n: usize, m: Vec<Vec<i64>>, form: Vec<Vec<i64>>) -> Result<Self, EmbeddingError> {
        if n == 0 {
            return Err(EmbeddingError::EmptyTorus);
        }
        if m.len() != n {
            return Err(EmbeddingError::WrongRowCount { rows: m.len(), n });
        }
        let d = form.len();
        if form.iter().any(|row| row.len() != d) {
            return Err(EmbeddingError::FormShape { d });
        }
        for (row, r) in m.iter().enumerate() {
            if r.len() != d {
                return Err(EmbeddingError::RaggedMatrix { row: row + 1, len: r.len(), d });
            }
        }
        if d > n {
            return Err(EmbeddingError::TooManyCharacters { d, n });
        }
        let rank = lattice::rank_over_q(&m, d);
        if rank != d {
            return Err(EmbeddingError::RankDeficient { rank, d });
        }
        Ok(TorusEmbedding { n, d, m, form })
    }

    /// Embedding of the trivial torus `K = 1`: no braiding between indices.
    pub fn trivial(n: usize) -> Result<Self, EmbeddingError> {
        Self::new(n, vec![vec![]; n], vec![])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.m
    }

    pub fn form(&self) -> &[Vec<i64>] {
        &self.form
    }

    /// `deg(i)`, the `i`-th row of `M`.
    pub fn deg(&self, i: usize) -> &[i64] {
        &self.m[i]
    }

    /// `⟨u, v⟩ = uᵀ B v`.
    pub fn pair(&self, u: &[i64], v: &[i64]) -> i64 {
        let mut acc = 0;
        for (a, ua) in u.iter().enumerate() {
            for (b, vb) in v.iter().enumerate() {
                acc += ua * self.form[a][b] * vb;
            }
        }
        acc
    }

    /// `⟨deg a, deg b⟩`.
    pub fn pair_rows(&self, a: usize, b: usize) -> i64 {
        self.pair(&self.m[a], &self.m[b])
    }

    /// Exponent of `q_ij` for `i < j`, namely `⟨deg j, deg i⟩`.
    pub fn braid_exponent(&self, i: usize, j: usize) -> i64 {
        self.pair_rows(j, i)
    }

    /// `M† s`, i.e. `(M†s)_j = Σ_i m_ij s_i`.
    pub fn m_dagger(&self, s: &[i64]) -> Vec<i64> {
        (0..self.d)
            .map(|j| (0..self.n).map(|i| self.m[i][j] * s[i]).sum())
            .collect()
    }

    /// `M r` for `r ∈ Z^d`.
    pub fn m_apply(&self, r: &[i64]) -> Vec<i64> {
        self.m
            .iter()
            .map(|row| row.iter().zip(r).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_unimodular(&self) -> bool {
        lattice::is_unimodular(&self.m, self.d)
    }
}

/// One entry `q_ij = q^exponent` of the relation table, `i < j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationEntry {
    pub i: usize,
    pub j: usize,
    pub exponent: i64,
    pub scalar: CycScalar,
}

/// The scalars `q_ij` for all `i < j`.
pub fn relations(field: &Arc<CycField>, emb: &TorusEmbedding) -> Vec<RelationEntry> {
    let mut out = Vec::new();
    for i in 0..emb.n() {
        for j in i + 1..emb.n() {
            let exponent = emb.braid_exponent(i, j);
            out.push(RelationEntry {
                i,
                j,
                exponent,
                scalar: field.qpow(exponent),
            });
        }
    }
    out
}

/// Ordered monomial `x^x ∂^d`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Monomial {
    pub x: Vec<u32>,
    pub d: Vec<u32>,
}

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial {
            x: vec![0; n],
            d: vec![0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// T-weight: `+1` per `x_i`, `-1` per `∂_i`.
    pub fn weight(&self) -> Vec<i64> {
        self.x
            .iter()
            .zip(&self.d)
            .map(|(a, b)| *a as i64 - *b as i64)
            .collect()
    }

    pub fn total_degree(&self) -> u32 {
        self.x.iter().chain(&self.d).sum()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (name, exps) in [("x", &self.x), ("d", &self.d)] {
            for (i, &e) in exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => parts.push(format!("{name}{}", i + 1)),
                    _ => parts.push(format!("{name}{}^{e}", i + 1)),
                }
            }
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join("*"))
        }
    }
}

/// A finitely supported linear combination of ordered monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PbwElement {
    n: usize,
    terms: BTreeMap<Monomial, CycScalar>,
}

impl PbwElement {
    pub fn zero(n: usize) -> Self {
        PbwElement {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: CycScalar) -> Self {
        Self::term(Monomial::one(n), c)
    }

    pub fn term(mono: Monomial, c: CycScalar) -> Self {
        let mut e = Self::zero(mono.n());
        e.add_term(mono, c);
        e
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, CycScalar> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, mono: &Monomial) -> Option<&CycScalar> {
        self.terms.get(mono)
    }

    pub fn add_term(&mut self, mono: Monomial, c: CycScalar) {
        debug_assert_eq!(mono.n(), self.n);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(slot) => {
                *slot += &c;
                if slot.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, c);
            }
        }
    }

    pub fn add(&self, other: &PbwElement) -> PbwElement {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &PbwElement) -> PbwElement {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn scale(&self, a: &CycScalar) -> PbwElement {
        let mut out = PbwElement::zero(self.n);
        if a.is_zero() {
            return out;
        }
        out.terms = self.terms.iter().map(|(m, c)| (m.clone(), c * a)).collect();
        out
    }

    pub fn neg(&self) -> PbwElement {
        PbwElement {
            n: self.n,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

/// Canonical text: terms in descending lexicographic order of exponent
/// vectors, joined by ` + `, e.g. `q^2*x1*d1 + (q^2 - 1)`.
impl fmt::Display for PbwElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let coeff = c.to_string();
            let coeff = if coeff.contains(' ') || coeff.starts_with('-') || coeff.contains('/') {
                format!("({coeff})")
            } else {
                coeff
            };
            let is_const = m.total_degree() == 0;
            match (c.is_one(), is_const) {
                (true, true) => f.write_str("1")?,
                (true, false) => write!(f, "{m}")?,
                (false, true) => f.write_str(&coeff)?,
                (false, false) => write!(f, "{coeff}*{m}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for PbwElement {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A generator letter of `D_q(Cⁿ)`; `Alpha(i)` is the Euler operator `1 + x_i∂_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    X(usize),
    D(usize),
    Alpha(usize),
}

impl Generator {
    pub fn index(&self) -> usize {
        match *self {
            Generator::X(i) | Generator::D(i) | Generator::Alpha(i) => i,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Generator::X(i) => write!(f, "x{}", i + 1),
            Generator::D(i) => write!(f, "d{}", i + 1),
            Generator::Alpha(i) => write!(f, "a{}", i + 1),
        }
    }
}

/// T-degree of an element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TDegree {
    Zero,
    Weight(Vec<i64>),
    Inhomogeneous,
}

/// Monomial `y^r` of `O(T)` or `z^r` of `O(K)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum QmmGenerator {
    Y(Vec<i64>),
    Z(Vec<i64>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QmmCheck {
    pub holds: bool,
    /// The scalar `s` in `μ(h)·a = s·a·μ(h)`.
    pub scalar: CycScalar,
}

/// Polynomial in `t` with coefficients in `Q(q)`, keyed by degree.
pub type TPoly = BTreeMap<u32, CycScalar>;

type SameIndexCache = RwLock<HashMap<(u32, u32), Arc<Vec<CycScalar>>>>;

/// Multiplication context for `D_q(Cⁿ)`.
pub struct DqAlgebra {
    field: Arc<CycField>,
    emb: TorusEmbedding,
    /// `pairing[a][b] = ⟨deg b, deg a⟩`; for `i < j` this is the exponent of `q_ij`.
    pairing: Vec<Vec<i64>>,
    same_index: SameIndexCache,
}

impl DqAlgebra {
    pub fn new(field: Arc<CycField>, emb: TorusEmbedding) -> Self {
        let n = emb.n();
        let pairing = (0..n)
            .map(|a| (0..n).map(|b| emb.pair_rows(b, a)).collect())
            .collect();
        DqAlgebra {
            field,
            emb,
            pairing,
            same_index: RwLock::new(HashMap::new()),
        }
    }

    pub fn field(&self) -> &Arc<CycField> {
        &self.field
    }

    pub fn embedding(&self) -> &TorusEmbedding {
        &self.emb
    }

    pub fn n(&self) -> usize {
        self.emb.n()
    }

    pub fn ell(&self) -> u32 {
        self.field.ell()
    }

    fn check_index(&self, i: usize) -> Result<(), PbwError> {
        if i >= self.n() {
            Err(PbwError::IndexOutOfRange { index: i, n: self.n() })
        } else {
            Ok(())
        }
    }

    pub fn zero(&self) -> PbwElement {
        PbwElement::zero(self.n())
    }

    pub fn one(&self) -> PbwElement {
        PbwElement::constant(self.n(), self.field.one())
    }

    pub fn scalar(&self, c: CycScalar) -> PbwElement {
        PbwElement::constant(self.n(), c)
    }

    pub fn monomial(&self, x: Vec<u32>, d: Vec<u32>) -> PbwElement {
        PbwElement::term(Monomial { x, d }, self.field.one())
    }

    pub fn x_pow(&self, i: usize, e: u32) -> Result<PbwElement, PbwError> {
        self.check_index(i)?;
        let mut m = Monomial::one(self.n());
        m.x[i] = e;
        Ok(PbwElement::term(m, self.field.one()))
    }

    pub fn d_pow(&self, i: usize, e: u32) -> Result<PbwElement, PbwError> {
        self.check_index(i)?;
        let mut m = Monomial::one(self.n());
        m.d[i] = e;
        Ok(PbwElement::term(m, self.field.one()))
    }

    pub fn x(&self, i: usize) -> Result<PbwElement, PbwError> {
        self.x_pow(i, 1)
    }

    pub fn d(&self, i: usize) -> Result<PbwElement, PbwError> {
        self.d_pow(i, 1)
    }

    /// The Euler operator `α_i = 1 + x_i∂_i`.
    pub fn euler(&self, i: usize) -> Result<PbwElement, PbwError> {
        self.check_index(i)?;
        let mut m = Monomial::one(self.n());
        m.x[i] = 1;
        m.d[i] = 1;
        let mut out = self.one();
        out.add_term(m, self.field.one());
        Ok(out)
    }

    pub fn generator_power(&self, g: Generator, e: u32) -> Result<PbwElement, PbwError> {
        match g {
            Generator::X(i) => self.x_pow(i, e),
            Generator::D(i) => self.d_pow(i, e),
            Generator::Alpha(i) => {
                let a = self.euler(i)?;
                Ok(self.power(&a, e))
            }
        }
    }

    pub fn power(&self, a: &PbwElement, e: u32) -> PbwElement {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.multiply(&acc, a);
        }
        acc
    }

    /// Coefficients `C(a,b,t)` of `∂^a x^b = Σ_t C(a,b,t) x^{b-t} ∂^{a-t}` in one
    /// index, from `C(a,b,t) = q^{2a}C(a,b-1,t) + (q^{2a}-1)C(a-1,b-1,t-1)`.
    pub fn same_index_coeffs(&self, a: u32, b: u32) -> Arc<Vec<CycScalar>> {
        if let Some(v) = self.same_index.read().expect("cache lock").get(&(a, b)) {
            return Arc::clone(v);
        }
        let value = if a == 0 || b == 0 {
            vec![self.field.one()]
        } else {
            let prev = self.same_index_coeffs(a, b - 1);
            let lower = self.same_index_coeffs(a - 1, b - 1);
            let q2a = self.field.qpow(2 * a as i64);
            let shift = &q2a - &self.field.one();
            (0..=a.min(b) as usize)
                .map(|t| {
                    let mut c = self.field.zero();
                    if let Some(p) = prev.get(t) {
                        c += &(&q2a * p);
                    }
                    if t >= 1 {
                        if let Some(l) = lower.get(t - 1) {
                            c += &(&shift * l);
                        }
                    }
                    c
                })
                .collect()
        };
        let value = Arc::new(value);
        self.same_index
            .write()
            .expect("cache lock")
            .insert((a, b), Arc::clone(&value));
        value
    }

    /// Product of two ordered monomials in normal form.
    pub fn multiply_monomials(&self, left: &Monomial, right: &Monomial) -> Vec<(Monomial, CycScalar)> {
        let n = self.n();
        let p = &self.pairing;
        // Each state is x^u ∂^v with a pending q-exponent and a coefficient.
        struct State {
            qexp: i64,
            coeff: Option<CycScalar>,
            u: Vec<u32>,
            v: Vec<u32>,
        }
        let mut states = vec![State {
            qexp: 0,
            coeff: None,
            u: right.x.clone(),
            v: vec![0; n],
        }];
        // Move ∂_j^a rightward past the x-block, largest j first. The
        // processed ∂'s all have larger indices, so ∂_j^{a-t} lands in order.
        for j in (0..n).rev() {
            let a = left.d[j];
            if a == 0 {
                continue;
            }
            let mut next = Vec::with_capacity(states.len());
            for s in states {
                let mut e0 = s.qexp;
                for i in 0..j {
                    e0 -= p[i][j] * a as i64 * s.u[i] as i64;
                }
                let b = s.u[j];
                let coeffs = self.same_index_coeffs(a, b);
                for (t, ct) in coeffs.iter().enumerate() {
                    if ct.is_zero() {
                        continue;
                    }
                    let t = t as u32;
                    let rem = a - t;
                    let mut et = e0;
                    for i in j + 1..n {
                        et += p[j][i] * rem as i64 * s.u[i] as i64;
                    }
                    let mut u = s.u.clone();
                    u[j] = b - t;
                    let mut v = s.v.clone();
                    v[j] += rem;
                    let coeff = match &s.coeff {
                        None => ct.clone(),
                        Some(c) => c * ct,
                    };
                    next.push(State {
                        qexp: et,
                        coeff: Some(coeff),
                        u,
                        v,
                    });
                }
            }
            states = next;
        }
        // Remaining reorderings: x^m · x^u and ∂^v · ∂^{k'}.
        let mut out = Vec::with_capacity(states.len());
        for s in states {
            let mut qexp = s.qexp;
            for i in 0..n {
                for j in i + 1..n {
                    qexp += p[i][j] * left.x[j] as i64 * s.u[i] as i64;
                    qexp += p[i][j] * s.v[j] as i64 * right.d[i] as i64;
                }
            }
            let x: Vec<u32> = left.x.iter().zip(&s.u).map(|(a, b)| a + b).collect();
            let d: Vec<u32> = s.v.iter().zip(&right.d).map(|(a, b)| a + b).collect();
            let coeff = match s.coeff {
                None => self.field.qpow(qexp),
                Some(c) => c.mul_qpow(qexp),
            };
            out.push((Monomial { x, d }, coeff));
        }
        out
    }

    pub fn multiply(&self, a: &PbwElement, b: &PbwElement) -> PbwElement {
        assert_eq!(a.n(), self.n(), "left factor has wrong rank");
        assert_eq!(b.n(), self.n(), "right factor has wrong rank");
        let mut out = self.zero();
        for (ma, ca) in a.terms() {
            for (mb, cb) in b.terms() {
                let scale = ca * cb;
                for (m, c) in self.multiply_monomials(ma, mb) {
                    out.add_term(m, &c * &scale);
                }
            }
        }
        out
    }

    pub fn commutator(&self, a: &PbwElement, b: &PbwElement) -> PbwElement {
        self.multiply(a, b).sub(&self.multiply(b, a))
    }

    /// Product of a word of generator powers, left to right.
    pub fn normal_form(&self, word: &[(Generator, u32)]) -> Result<PbwElement, PbwError> {
        let mut acc = self.one();
        for &(g, e) in word {
            let factor = self.generator_power(g, e)?;
            acc = self.multiply(&acc, &factor);
        }
        Ok(acc)
    }

    /// `α_i^ℓ`, checked against `1 + x_i^ℓ ∂_i^ℓ`.
    pub fn power_alpha_ell(&self, i: usize) -> Result<PbwElement, PbwError> {
        let ell = self.ell();
        let got = self.generator_power(Generator::Alpha(i), ell)?;
        let mut expected = self.one();
        let mut m = Monomial::one(self.n());
        m.x[i] = ell;
        m.d[i] = ell;
        expected.add_term(m, self.field.one());
        if got == expected {
            Ok(got)
        } else {
            Err(PbwError::EulerPowerMismatch {
                index: i + 1,
                got: got.to_string(),
            })
        }
    }

    /// Commutes with every `x_i` and `∂_i`.
    pub fn is_central(&self, a: &PbwElement) -> bool {
        (0..self.n()).all(|i| {
            let x = self.x(i).expect("index in range");
            let d = self.d(i).expect("index in range");
            self.commutator(a, &x).is_zero() && self.commutator(a, &d).is_zero()
        })
    }

    /// Basis of the elements of `span{x^a ∂^b : a_i, b_i ≤ max_exp}` commuting
    /// with every generator, found as the kernel of the commutator map.
    pub fn centralizer_in_box(&self, max_exp: u32) -> Vec<PbwElement> {
        let n = self.n();
        let mut box_monos = vec![Monomial::one(n)];
        for slot in 0..2 * n {
            box_monos = box_monos
                .into_iter()
                .flat_map(|m| {
                    (0..=max_exp).map(move |e| {
                        let mut m = m.clone();
                        if slot < n {
                            m.x[slot] = e;
                        } else {
                            m.d[slot - n] = e;
                        }
                        m
                    })
                })
                .collect();
        }
        box_monos.sort();
        let gens: Vec<PbwElement> = (0..n)
            .flat_map(|i| [self.x(i).expect("index in range"), self.d(i).expect("index in range")])
            .collect();
        let images: Vec<BTreeMap<(usize, Monomial), CycScalar>> = box_monos
            .iter()
            .map(|m| {
                let e = self.monomial(m.x.clone(), m.d.clone());
                let mut img = BTreeMap::new();
                for (g, gen) in gens.iter().enumerate() {
                    for (mono, c) in self.commutator(&e, gen).terms() {
                        img.insert((g, mono.clone()), c.clone());
                    }
                }
                img
            })
            .collect();
        crate::linalg::kernel(&self.field, &images)
            .into_iter()
            .map(|coeffs| {
                let mut el = self.zero();
                for (m, c) in box_monos.iter().zip(coeffs) {
                    el.add_term(m.clone(), c);
                }
                el
            })
            .collect()
    }

    /// Euler operator product `∏ α_i^{e_i}` for `e ∈ Nⁿ`.
    pub fn euler_product(&self, e: &[u32]) -> PbwElement {
        let mut acc = self.one();
        for (i, &k) in e.iter().enumerate() {
            if k > 0 {
                let a = self.generator_power(Generator::Alpha(i), k).expect("index in range");
                acc = self.multiply(&acc, &a);
            }
        }
        acc
    }

    /// Checks `μ(h)·a = (h ▷ a)·μ(h)` with `μ(y_i) = α_i`,
    /// `μ(z_j) = ∏_i α_i^{m_ij}`, `y^r ▷ a = q^{2r·s}a` and
    /// `z^r ▷ a = q^{2r·(M†s)}a` for `a` of T-degree `s`. Negative exponents
    /// are cleared by multiplying through with the inverse Euler factors.
    pub fn verify_qmm(&self, h: &QmmGenerator, a: &PbwElement) -> Result<QmmCheck, PbwError> {
        let s = match t_degree(a) {
            TDegree::Inhomogeneous => return Err(PbwError::Inhomogeneous),
            TDegree::Zero => vec![0; self.n()],
            TDegree::Weight(w) => w,
        };
        let (exps, scalar_exp) = match h {
            QmmGenerator::Y(r) => {
                if r.len() != self.n() {
                    return Err(PbwError::ExponentLength { got: r.len(), expected: self.n() });
                }
                (r.clone(), 2 * r.iter().zip(&s).map(|(a, b)| a * b).sum::<i64>())
            }
            QmmGenerator::Z(r) => {
                if r.len() != self.emb.d() {
                    return Err(PbwError::ExponentLength { got: r.len(), expected: self.emb.d() });
                }
                let ms = self.emb.m_dagger(&s);
                (self.emb.m_apply(r), 2 * r.iter().zip(&ms).map(|(a, b)| a * b).sum::<i64>())
            }
        };
        let pos: Vec<u32> = exps.iter().map(|&e| e.max(0) as u32).collect();
        let neg: Vec<u32> = exps.iter().map(|&e| (-e).max(0) as u32).collect();
        let ap = self.euler_product(&pos);
        let an = self.euler_product(&neg);
        let lhs = self.multiply(&self.multiply(&ap, a), &an);
        let scalar = self.field.qpow(scalar_exp);
        let rhs = self.multiply(&self.multiply(&an, a), &ap).scale(&scalar);
        Ok(QmmCheck {
            holds: lhs == rhs,
            scalar,
        })
    }

    /// Action on `Q(q)[t]` for `n = 1`: `x·f = tf`, `∂·f = (f(q²t) - f(t))/t`.
    pub fn act_rank1(&self, a: &PbwElement, f: &TPoly) -> Result<TPoly, PbwError> {
        if self.n() != 1 || a.n() != 1 {
            return Err(PbwError::NotRankOne(a.n()));
        }
        let mut out = TPoly::new();
        for (m, c) in a.terms() {
            let (xa, db) = (m.x[0], m.d[0]);
            for (&k, fk) in f {
                if db > k {
                    continue;
                }
                // ∂ t^j = (q^{2j} - 1) t^{j-1}
                let mut coeff = c * fk;
                for s in 0..db {
                    let j = (k - s) as i64;
                    coeff = &coeff * &(&self.field.qpow(2 * j) - &self.field.one());
                }
                if coeff.is_zero() {
                    continue;
                }
                let deg = k - db + xa;
                let slot = out.entry(deg).or_insert_with(|| self.field.zero());
                *slot += &coeff;
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(out)
    }
}

/// Common T-weight of all monomials.
pub fn t_degree(a: &PbwElement) -> TDegree {
    let mut weights = a.terms().keys().map(Monomial::weight);
    match weights.next() {
        None => TDegree::Zero,
        Some(w) => {
            if weights.all(|v| v == w) {
                TDegree::Weight(w)
            } else {
                TDegree::Inhomogeneous
            }
        }
    }
}
