//! Worked examples: the affine `A_{n-1}` quiver and the difference-operator
//! model of the hypertoric algebra `U₁`.

use std::collections::BTreeMap;
use std::ops::Range;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::field::{CycField, CycScalar};
use crate::lattice::{quiver_to_embedding, LatticeError, QuiverData};
use crate::pbw::{relations, DqAlgebra, Generator, PbwElement, RelationEntry, TorusEmbedding};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuiverExampleError {
    #[error("the affine quiver needs n >= 2 vertices, got {0}")]
    TooSmall(usize),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Cyclic quiver on `n` vertices with edges `i → i+1 mod n` (1-based).
pub fn an_quiver(n: usize) -> QuiverData {
    QuiverData {
        vertices: n,
        edges: (1..=n).map(|i| (i, i % n + 1)).collect(),
    }
}

#[derive(Clone, Debug)]
pub struct AnQuiverAlgebra {
    pub quiver: QuiverData,
    pub embedding: TorusEmbedding,
    pub table: Vec<RelationEntry>,
}

pub fn build_an_quiver_algebra(field: &Arc<CycField>, n: usize) -> Result<AnQuiverAlgebra, QuiverExampleError> {
    if n < 2 {
        return Err(QuiverExampleError::TooSmall(n));
    }
    let quiver = an_quiver(n);
    let embedding = quiver_to_embedding(&quiver)?;
    let table = relations(field, &embedding);
    Ok(AnQuiverAlgebra {
        quiver,
        embedding,
        table,
    })
}

/// One relation `l₁·l₂ = q^e r₁·r₂ (+ (q²-1))` from the hand-written table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRelation {
    pub lhs: (Generator, Generator),
    pub exponent: i64,
    pub rhs: (Generator, Generator),
    pub inhomogeneous: bool,
}

impl std::fmt::Display for TableRelation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let q = match self.exponent {
            0 => String::new(),
            1 => "q*".to_string(),
            e => format!("q^{e}*"),
        };
        write!(
            f,
            "{}*{} = {q}{}*{}",
            self.lhs.0, self.lhs.1, self.rhs.0, self.rhs.1
        )?;
        if self.inhomogeneous {
            write!(f, " + (q^2 - 1)")?;
        }
        Ok(())
    }
}

/// The relation table of the cyclic quiver algebra as written by hand,
/// indices mod `n`: the five families plus commutation of all other pairs.
pub fn an_expected_table(n: usize) -> Vec<TableRelation> {
    use Generator::{D, X};
    let next = |i: usize| (i + 1) % n;
    let mut out = Vec::new();
    let mut listed = std::collections::BTreeSet::new();
    for i in 0..n {
        let j = next(i);
        let fam = [
            (X(j), X(i), -1, false),
            (D(j), D(i), -1, false),
            (D(j), X(i), 1, false),
            (X(j), D(i), 1, false),
        ];
        for (a, b, e, _) in fam {
            out.push(TableRelation {
                lhs: (a, b),
                exponent: e,
                rhs: (b, a),
                inhomogeneous: false,
            });
            listed.insert(pair_key(a, b));
        }
        out.push(TableRelation {
            lhs: (D(i), X(i)),
            exponent: 2,
            rhs: (X(i), D(i)),
            inhomogeneous: true,
        });
        listed.insert(pair_key(D(i), X(i)));
    }
    let gens: Vec<Generator> = (0..n).flat_map(|i| [X(i), D(i)]).collect();
    for (k, &a) in gens.iter().enumerate() {
        for &b in &gens[k + 1..] {
            if !listed.contains(&pair_key(a, b)) {
                out.push(TableRelation {
                    lhs: (b, a),
                    exponent: 0,
                    rhs: (a, b),
                    inhomogeneous: false,
                });
            }
        }
    }
    out
}

fn gen_key(g: Generator) -> (usize, u8) {
    match g {
        Generator::X(i) => (i, 0),
        Generator::D(i) => (i, 1),
        Generator::Alpha(i) => (i, 2),
    }
}

fn pair_key(a: Generator, b: Generator) -> ((usize, u8), (usize, u8)) {
    let (ka, kb) = (gen_key(a), gen_key(b));
    if ka <= kb {
        (ka, kb)
    } else {
        (kb, ka)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableMismatch {
    pub relation: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableReport {
    pub n: usize,
    pub checked: usize,
    pub holds: bool,
    pub mismatches: Vec<TableMismatch>,
}

/// Evaluates both sides of every hand-written relation in the algebra built
/// from the quiver and compares normal forms.
pub fn check_an_table(field: &Arc<CycField>, n: usize) -> Result<TableReport, QuiverExampleError> {
    let built = build_an_quiver_algebra(field, n)?;
    let alg = DqAlgebra::new(field.clone(), built.embedding);
    let word = |a: Generator, b: Generator| -> PbwElement {
        alg.normal_form(&[(a, 1), (b, 1)]).expect("indices below n")
    };
    let table = an_expected_table(n);
    let mut mismatches = Vec::new();
    for rel in &table {
        let lhs = word(rel.lhs.0, rel.lhs.1);
        let mut rhs = word(rel.rhs.0, rel.rhs.1).scale(&field.qpow(rel.exponent));
        if rel.inhomogeneous {
            rhs = rhs.add(&alg.scalar(&field.qpow(2) - &field.one()));
        }
        if lhs != rhs {
            mismatches.push(TableMismatch {
                relation: rel.to_string(),
                lhs: lhs.to_string(),
                rhs: rhs.to_string(),
            });
        }
    }
    Ok(TableReport {
        n,
        checked: table.len(),
        holds: mismatches.is_empty(),
        mismatches,
    })
}

/// `t^k ↦ Σ_s c_s(k) t^{k+s}`, each `c_s` periodic in `k` with period `ℓ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferenceOperator {
    field: Arc<CycField>,
    terms: BTreeMap<i64, Vec<CycScalar>>,
}

impl DifferenceOperator {
    pub fn zero(field: &Arc<CycField>) -> Self {
        DifferenceOperator {
            field: field.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// Single term with shift `s` and scalar sequence `c(k)`, `k mod ℓ`.
    pub fn shift(field: &Arc<CycField>, s: i64, c: impl Fn(i64) -> CycScalar) -> Self {
        let ell = field.ell() as i64;
        let seq: Vec<CycScalar> = (0..ell).map(c).collect();
        let mut op = Self::zero(field);
        if seq.iter().any(|x| !x.is_zero()) {
            op.terms.insert(s, seq);
        }
        op
    }

    pub fn scalar(field: &Arc<CycField>, c: CycScalar) -> Self {
        Self::shift(field, 0, |_| c.clone())
    }

    pub fn identity(field: &Arc<CycField>) -> Self {
        Self::scalar(field, field.one())
    }

    pub fn terms(&self) -> &BTreeMap<i64, Vec<CycScalar>> {
        &self.terms
    }

    fn coeff(seq: &[CycScalar], k: i64) -> &CycScalar {
        &seq[k.rem_euclid(seq.len() as i64) as usize]
    }

    /// Image of `t^k` as `(exponent, coefficient)` pairs with nonzero coefficients.
    pub fn apply(&self, k: i64) -> BTreeMap<i64, CycScalar> {
        self.terms
            .iter()
            .map(|(s, c)| (k + s, Self::coeff(c, k).clone()))
            .filter(|(_, c)| !c.is_zero())
            .collect()
    }

    fn combine(&self, other: &Self, sign: bool) -> Self {
        let mut out = self.clone();
        for (s, c) in &other.terms {
            let entry = out
                .terms
                .entry(*s)
                .or_insert_with(|| vec![self.field.zero(); c.len()]);
            for (a, b) in entry.iter_mut().zip(c) {
                *a = if sign { &*a + b } else { &*a - b };
            }
        }
        out.terms.retain(|_, c| c.iter().any(|x| !x.is_zero()));
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, true)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, false)
    }

    pub fn scale(&self, a: &CycScalar) -> Self {
        let mut out = Self::zero(&self.field);
        if a.is_zero() {
            return out;
        }
        for (s, c) in &self.terms {
            out.terms.insert(*s, c.iter().map(|x| x * a).collect());
        }
        out
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let ell = self.field.ell() as i64;
        let mut out = Self::zero(&self.field);
        for (s1, c1) in &self.terms {
            for (s2, c2) in &other.terms {
                let term = Self::shift(&self.field, s1 + s2, |k| {
                    Self::coeff(c1, k + s2) * &c2[k as usize]
                });
                out = out.add(&term);
            }
        }
        debug_assert!(out.terms.values().all(|c| c.len() == ell as usize));
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::identity(&self.field), |acc, _| acc.compose(self))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.compose(other).sub(&other.compose(self))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct U1Operators {
    pub a: DifferenceOperator,
    pub a_inv: DifferenceOperator,
    pub b: DifferenceOperator,
    pub c: DifferenceOperator,
}

/// `q^{n(n-1)/2}`.
fn c_prefactor(field: &Arc<CycField>, n: usize) -> CycScalar {
    field.qpow((n * (n - 1) / 2) as i64)
}

/// `A: t^k ↦ q^{2k}t^k`, `B: t^k ↦ t^{k+1}`,
/// `C: t^k ↦ q^{n(n-1)/2}(q^{2k}-1)ⁿ t^{k-1}`.
pub fn u1_operators(field: &Arc<CycField>, n: usize) -> U1Operators {
    let pre = c_prefactor(field, n);
    U1Operators {
        a: DifferenceOperator::shift(field, 0, |k| field.qpow(2 * k)),
        a_inv: DifferenceOperator::shift(field, 0, |k| field.qpow(-2 * k)),
        b: DifferenceOperator::shift(field, 1, |_| field.one()),
        c: DifferenceOperator::shift(field, -1, |k| {
            &pre * &(&field.qpow(2 * k) - &field.one()).pow_u(n as u64)
        }),
    }
}

fn render(img: &BTreeMap<i64, CycScalar>) -> String {
    if img.is_empty() {
        return "0".to_string();
    }
    img.iter()
        .rev()
        .map(|(e, c)| format!("({c})*t^{e}"))
        .collect::<Vec<_>>()
        .join(" + ")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OperatorCheck {
    pub name: String,
    pub holds: bool,
    /// First `k` where the two sides differ.
    pub failing_k: Option<i64>,
    /// Both sides on `t^k` at the failing `k`, or at the first `k` of the window.
    pub lhs: String,
    pub rhs: String,
}

fn compare(name: &str, lhs: &DifferenceOperator, rhs: &DifferenceOperator, window: Range<i64>) -> OperatorCheck {
    let mut shown = window.start;
    let mut failing_k = None;
    for k in window {
        if lhs.apply(k) != rhs.apply(k) {
            failing_k = Some(k);
            shown = k;
            break;
        }
    }
    OperatorCheck {
        name: name.to_string(),
        holds: failing_k.is_none(),
        failing_k,
        lhs: render(&lhs.apply(shown)),
        rhs: render(&rhs.apply(shown)),
    }
}

/// Whether the images on `[0, ℓ)` and `[ℓ, 2ℓ)` agree up to the shift in `k`.
fn periodic(op: &DifferenceOperator, ell: i64) -> bool {
    (0..ell).all(|k| {
        let a: BTreeMap<i64, CycScalar> = op.apply(k).into_iter().map(|(e, c)| (e - k, c)).collect();
        let b: BTreeMap<i64, CycScalar> = op.apply(k + ell).into_iter().map(|(e, c)| (e - k - ell, c)).collect();
        a == b
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct U1Report {
    pub n: usize,
    pub ell: u32,
    pub window: (i64, i64),
    pub checks: Vec<OperatorCheck>,
    pub periodic: bool,
    pub holds: bool,
}

/// `AB = q²BA`, `AC = q⁻²CA`, `BC = q^{n(n-1)/2}(A-1)ⁿ`,
/// `CB = q^{n(n-1)/2}(q²A-1)ⁿ`, and `AA⁻¹ = 1`.
pub fn verify_u1_relations(field: &Arc<CycField>, n: usize, window: Range<i64>) -> U1Report {
    let ops = u1_operators(field, n);
    let (a, b, c) = (&ops.a, &ops.b, &ops.c);
    let one = DifferenceOperator::identity(field);
    let pre = c_prefactor(field, n);
    let q2 = field.qpow(2);
    let sides = [
        ("AB = q^2 BA", a.compose(b), b.compose(a).scale(&q2)),
        ("AC = q^-2 CA", a.compose(c), c.compose(a).scale(&field.qpow(-2))),
        (
            "BC = q^(n(n-1)/2) (A - 1)^n",
            b.compose(c),
            a.sub(&one).pow(n as u32).scale(&pre),
        ),
        (
            "CB = q^(n(n-1)/2) (q^2 A - 1)^n",
            c.compose(b),
            a.scale(&q2).sub(&one).pow(n as u32).scale(&pre),
        ),
        ("A A^-1 = 1", a.compose(&ops.a_inv), one.clone()),
    ];
    let checks: Vec<OperatorCheck> = sides
        .iter()
        .map(|(name, l, r)| compare(name, l, r, window.clone()))
        .collect();
    let ell = field.ell() as i64;
    let periodic = sides.iter().all(|(_, l, r)| periodic(l, ell) && periodic(r, ell));
    U1Report {
        n,
        ell: field.ell(),
        window: (window.start, window.end),
        holds: periodic && checks.iter().all(|c| c.holds),
        checks,
        periodic,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CentralReport {
    pub n: usize,
    pub ell: u32,
    pub checks: Vec<OperatorCheck>,
    /// `Aℓ` acts as the identity.
    pub a_is_identity: bool,
    /// `(a-1)ⁿ` and `bc` both annihilate every `t^k` in the window.
    pub both_sides_vanish: bool,
    pub holds: bool,
}

/// `a = Aℓ`, `b = Bℓ`, `c = Cℓ` commute with `A, B, C`, and `bc = (a-1)ⁿ`.
pub fn verify_central_z(field: &Arc<CycField>, n: usize, window: Range<i64>) -> CentralReport {
    let ops = u1_operators(field, n);
    let ell = field.ell();
    let central = [
        ("a", ops.a.pow(ell)),
        ("b", ops.b.pow(ell)),
        ("c", ops.c.pow(ell)),
    ];
    let gens = [("A", &ops.a), ("B", &ops.b), ("C", &ops.c)];
    let zero = DifferenceOperator::zero(field);
    let mut checks = Vec::new();
    for (zn, z) in &central {
        for (gn, g) in &gens {
            checks.push(compare(&format!("[{zn}, {gn}] = 0"), &z.commutator(g), &zero, window.clone()));
        }
    }
    let one = DifferenceOperator::identity(field);
    let bc = central[1].1.compose(&central[2].1);
    let am1 = central[0].1.sub(&one).pow(n as u32);
    checks.push(compare("bc = (a - 1)^n", &bc, &am1, window.clone()));
    let vanish = |op: &DifferenceOperator| window.clone().all(|k| op.apply(k).is_empty());
    let a_is_identity = window.clone().all(|k| central[0].1.apply(k) == one.apply(k));
    CentralReport {
        n,
        ell,
        holds: checks.iter().all(|c| c.holds),
        checks,
        a_is_identity,
        both_sides_vanish: vanish(&bc) && vanish(&am1),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuiverSuiteReport {
    pub table: Vec<TableReport>,
    /// Braid exponents `⟨deg e_j, deg e_i⟩` of the double-edge case `n = 2`.
    pub n2_pairing: i64,
    pub u1: Vec<U1Report>,
    pub central: Vec<CentralReport>,
    pub holds: bool,
}

/// Relation tables for `n ∈ {3, 4}`, the `U₁` relations and the central
/// subalgebra for `n ∈ {2, 3}` at the given `ℓ`, on `k ∈ [0, 2ℓ)`.
pub fn quiver_suite(field: &Arc<CycField>) -> Result<QuiverSuiteReport, QuiverExampleError> {
    let window = 0..2 * field.ell() as i64;
    let table = [3, 4]
        .iter()
        .map(|&n| check_an_table(field, n))
        .collect::<Result<Vec<_>, _>>()?;
    let n2 = build_an_quiver_algebra(field, 2)?;
    let u1: Vec<U1Report> = [2, 3].iter().map(|&n| verify_u1_relations(field, n, window.clone())).collect();
    let central: Vec<CentralReport> = [2, 3].iter().map(|&n| verify_central_z(field, n, window.clone())).collect();
    let holds = table.iter().all(|t| t.holds) && u1.iter().all(|r| r.holds) && central.iter().all(|r| r.holds);
    Ok(QuiverSuiteReport {
        table,
        n2_pairing: n2.embedding.braid_exponent(0, 1),
        u1,
        central,
        holds,
    })
}
