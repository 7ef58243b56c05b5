//! Exact arithmetic in the cyclotomic field `Q(q)`, where `q` is a primitive
//! `ℓ`-th root of unity and `ℓ > 1` is odd.
//!
//! Elements are stored as dense rational coefficient vectors of length
//! `deg Φ_ℓ`, i.e. as polynomials in `q` reduced modulo the `ℓ`-th cyclotomic
//! polynomial. The representation is canonical, so equality is coefficient-wise
//! and vanishing of expressions such as `q^{2k} - 1` is detected exactly.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("the order of q must be odd and at least 3, got {0}")]
    InvalidOrder(u64),
    #[error("division by zero in Q(q)")]
    DivisionByZero,
}

/// The field `Q(q)` for a fixed odd order `ℓ ≥ 3`.
///
/// This is the global configuration shared by every scalar; it is created once
/// and handed around behind an [`Arc`].
#[derive(Debug)]
pub struct CycField {
    ell: u32,
    /// Coefficients of `Φ_ℓ`, lowest degree first. Monic.
    modulus: Vec<BigInt>,
    /// Canonical coefficient vectors of `q^k` for `0 <= k < ℓ`.
    powers: Vec<Vec<BigRational>>,
}

impl CycField {
    pub fn new(ell: u64) -> Result<Arc<Self>, FieldError> {
        if ell < 3 || ell % 2 == 0 || ell > u32::MAX as u64 {
            return Err(FieldError::InvalidOrder(ell));
        }
        let ell32 = ell as u32;
        let modulus = cyclotomic_polynomial(ell as usize);
        let degree = modulus.len() - 1;

        let mut powers = Vec::with_capacity(ell as usize);
        // q^k for k < deg is just the monomial; beyond that use q^k = q * q^{k-1}
        // and substitute q^deg = -(Φ_ℓ - q^deg).
        let mut current = vec![BigRational::zero(); degree];
        current[0] = BigRational::one();
        for _ in 0..ell {
            powers.push(current.clone());
            let top = current[degree - 1].clone();
            let mut next = vec![BigRational::zero(); degree];
            for i in (1..degree).rev() {
                next[i] = current[i - 1].clone();
            }
            if !top.is_zero() {
                for (i, c) in modulus.iter().take(degree).enumerate() {
                    next[i] -= &top * BigRational::from_integer(c.clone());
                }
            }
            current = next;
        }

        Ok(Arc::new(CycField {
            ell: ell32,
            modulus,
            powers,
        }))
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// Degree of `Φ_ℓ`, i.e. the dimension of `Q(q)` over `Q`.
    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    /// Integer coefficients of `Φ_ℓ`, lowest degree first.
    pub fn modulus(&self) -> &[BigInt] {
        &self.modulus
    }

    /// Reduces the rational polynomial `Σ coeffs[k] q^k` to canonical form.
    pub fn reduce(self: &Arc<Self>, coeffs: &[BigRational]) -> CycScalar {
        let ell = self.ell as usize;
        let mut folded = vec![BigRational::zero(); ell];
        for (k, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                folded[k % ell] += c;
            }
        }
        CycScalar {
            field: Arc::clone(self),
            coeffs: self.fold_powers(folded),
        }
    }

    /// Reduces a Laurent polynomial given as `(exponent, coefficient)` pairs.
    pub fn reduce_laurent<I>(self: &Arc<Self>, terms: I) -> CycScalar
    where
        I: IntoIterator<Item = (i64, BigRational)>,
    {
        let ell = self.ell as usize;
        let mut folded = vec![BigRational::zero(); ell];
        for (k, c) in terms {
            folded[k.rem_euclid(ell as i64) as usize] += c;
        }
        CycScalar {
            field: Arc::clone(self),
            coeffs: self.fold_powers(folded),
        }
    }

    fn fold_powers(&self, folded: Vec<BigRational>) -> Vec<BigRational> {
        let degree = self.degree();
        let mut out: Vec<BigRational> = folded[..degree].to_vec();
        for (k, c) in folded.into_iter().enumerate().skip(degree) {
            if c.is_zero() {
                continue;
            }
            for (o, p) in out.iter_mut().zip(&self.powers[k]) {
                if !p.is_zero() {
                    *o += &c * p;
                }
            }
        }
        out
    }

    pub fn zero(self: &Arc<Self>) -> CycScalar {
        CycScalar {
            field: Arc::clone(self),
            coeffs: vec![BigRational::zero(); self.degree()],
        }
    }

    pub fn one(self: &Arc<Self>) -> CycScalar {
        self.qpow(0)
    }

    pub fn from_int(self: &Arc<Self>, value: i64) -> CycScalar {
        self.from_rational(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn from_rational(self: &Arc<Self>, value: BigRational) -> CycScalar {
        let mut coeffs = vec![BigRational::zero(); self.degree()];
        coeffs[0] = value;
        CycScalar {
            field: Arc::clone(self),
            coeffs,
        }
    }

    /// `q^k`; equals one exactly when `ℓ | k`.
    pub fn qpow(self: &Arc<Self>, k: i64) -> CycScalar {
        let idx = k.rem_euclid(self.ell as i64) as usize;
        CycScalar {
            field: Arc::clone(self),
            coeffs: self.powers[idx].clone(),
        }
    }

    /// The generator `q` itself.
    pub fn q(self: &Arc<Self>) -> CycScalar {
        self.qpow(1)
    }
}

impl PartialEq for CycField {
    fn eq(&self, other: &Self) -> bool {
        self.ell == other.ell
    }
}

impl Eq for CycField {}

/// An exact element of `Q(q)`.
#[derive(Clone)]
pub struct CycScalar {
    field: Arc<CycField>,
    coeffs: Vec<BigRational>,
}

impl CycScalar {
    pub fn field(&self) -> &Arc<CycField> {
        &self.field
    }

    /// Canonical coefficients in the basis `1, q, …, q^{deg Φ_ℓ - 1}`.
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// The rational value if this scalar lies in `Q`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    pub fn inv(&self) -> Result<CycScalar, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let modulus: Vec<BigRational> = self
            .field
            .modulus
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let inverse = poly_inverse_mod(&self.coeffs, &modulus);
        Ok(self.field.reduce(&inverse))
    }

    pub fn div(&self, other: &CycScalar) -> Result<CycScalar, FieldError> {
        Ok(self * &other.inv()?)
    }

    /// Integer power; negative exponents invert first.
    pub fn pow(&self, exp: i64) -> Result<CycScalar, FieldError> {
        let base = if exp < 0 { self.inv()? } else { self.clone() };
        Ok(base.pow_u(exp.unsigned_abs()))
    }

    pub fn pow_u(&self, mut exp: u64) -> CycScalar {
        let mut acc = self.field.one();
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            exp >>= 1;
            if exp > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Multiplies by `q^k`.
    pub fn mul_qpow(&self, k: i64) -> CycScalar {
        if k.rem_euclid(self.field.ell as i64) == 0 {
            return self.clone();
        }
        self * &self.field.qpow(k)
    }

    /// If this scalar is `q^k` for some `k`, returns the least such `k >= 0`.
    pub fn as_qpow(&self) -> Option<u32> {
        (0..self.field.ell).find(|&k| self.coeffs == self.field.powers[k as usize])
    }

    fn same_field(&self, other: &CycScalar) {
        assert_eq!(
            self.field.ell, other.field.ell,
            "scalars belong to different cyclotomic fields"
        );
    }
}

impl PartialEq for CycScalar {
    fn eq(&self, other: &Self) -> bool {
        self.field.ell == other.field.ell && self.coeffs == other.coeffs
    }
}

impl Eq for CycScalar {}

impl<'a> Add<&'a CycScalar> for &'a CycScalar {
    type Output = CycScalar;
    fn add(self, rhs: &'a CycScalar) -> CycScalar {
        self.same_field(rhs);
        CycScalar {
            field: Arc::clone(&self.field),
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<'a> Sub<&'a CycScalar> for &'a CycScalar {
    type Output = CycScalar;
    fn sub(self, rhs: &'a CycScalar) -> CycScalar {
        self.same_field(rhs);
        CycScalar {
            field: Arc::clone(&self.field),
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl<'a> Mul<&'a CycScalar> for &'a CycScalar {
    type Output = CycScalar;
    fn mul(self, rhs: &'a CycScalar) -> CycScalar {
        self.same_field(rhs);
        let degree = self.coeffs.len();
        // Fast paths for rational operands.
        if let Some(r) = rhs.as_rational() {
            return self.scale(r);
        }
        if let Some(r) = self.as_rational() {
            return rhs.scale(r);
        }
        let mut product = vec![BigRational::zero(); 2 * degree - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    product[i + j] += a * b;
                }
            }
        }
        self.field.reduce(&product)
    }
}

impl CycScalar {
    pub fn scale(&self, r: &BigRational) -> CycScalar {
        CycScalar {
            field: Arc::clone(&self.field),
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }
}

impl Neg for &CycScalar {
    type Output = CycScalar;
    fn neg(self) -> CycScalar {
        CycScalar {
            field: Arc::clone(&self.field),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for CycScalar {
    type Output = CycScalar;
    fn neg(mut self) -> CycScalar {
        for c in &mut self.coeffs {
            *c = -std::mem::take(c);
        }
        self
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<CycScalar> for CycScalar {
            type Output = CycScalar;
            fn $method(self, rhs: CycScalar) -> CycScalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a CycScalar> for CycScalar {
            type Output = CycScalar;
            fn $method(self, rhs: &'a CycScalar) -> CycScalar {
                (&self).$method(rhs)
            }
        }
        impl<'a> $tr<CycScalar> for &'a CycScalar {
            type Output = CycScalar;
            fn $method(self, rhs: CycScalar) -> CycScalar {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl AddAssign<&CycScalar> for CycScalar {
    fn add_assign(&mut self, rhs: &CycScalar) {
        self.same_field(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&CycScalar> for CycScalar {
    fn sub_assign(&mut self, rhs: &CycScalar) {
        self.same_field(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl MulAssign<&CycScalar> for CycScalar {
    fn mul_assign(&mut self, rhs: &CycScalar) {
        *self = &*self * rhs;
    }
}

impl fmt::Debug for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycScalar[l={}]({})", self.field.ell, self)
    }
}

/// Canonical text: terms from the highest power of `q` down, e.g.
/// `q^2 - 1` or `(-1/3)*q - 2/3`.
impl fmt::Display for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let shown = if first {
                c.clone()
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
                c.abs()
            };
            write_term(f, &shown, k)?;
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, c: &BigRational, k: usize) -> fmt::Result {
    let monomial = match k {
        0 => None,
        1 => Some("q".to_string()),
        _ => Some(format!("q^{k}")),
    };
    match monomial {
        None => write!(f, "{}", fmt_rational(c)),
        Some(m) => {
            if c.is_one() {
                f.write_str(&m)
            } else if (-c).is_one() {
                write!(f, "-{m}")
            } else if c.is_integer() {
                write!(f, "{}*{m}", c.numer())
            } else {
                write!(f, "({})*{m}", fmt_rational(c))
            }
        }
    }
}

fn fmt_rational(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl Serialize for CycScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `Φ_n` over `Z`, by dividing `x^n - 1` by `Φ_d` for every proper divisor `d`.
pub fn cyclotomic_polynomial(n: usize) -> Vec<BigInt> {
    assert!(n >= 1);
    let mut numerator = vec![BigInt::zero(); n + 1];
    numerator[0] = BigInt::from(-1);
    numerator[n] = BigInt::one();
    for d in 1..n {
        if n % d == 0 {
            numerator = exact_div_monic(&numerator, &cyclotomic_polynomial(d));
        }
    }
    numerator
}

fn exact_div_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dd = den.len() - 1;
    debug_assert!(den[dd].is_one());
    let mut rem = num.to_vec();
    let qlen = num.len() - dd;
    let mut quot = vec![BigInt::zero(); qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dj) in den.iter().enumerate() {
            rem[i + j] -= &c * dj;
        }
        quot[i] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero), "inexact cyclotomic division");
    quot
}

fn trim(p: &mut Vec<BigRational>) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn poly_divrem(num: &[BigRational], den: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut rem = num.to_vec();
    trim(&mut rem);
    let dd = den.len() - 1;
    let lead = &den[dd];
    if rem.len() < den.len() {
        return (vec![], rem);
    }
    let mut quot = vec![BigRational::zero(); rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = &rem[i + dd] / lead;
        if c.is_zero() {
            continue;
        }
        for (j, dj) in den.iter().enumerate() {
            rem[i + j] -= &c * dj;
        }
        quot[i] = c;
    }
    rem.truncate(dd);
    trim(&mut rem);
    (quot, rem)
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let len = a.len().max(b.len());
    let mut out = vec![BigRational::zero(); len];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(&mut out);
    out
}

/// Inverse of `a` modulo the irreducible `m` by the extended Euclidean algorithm.
fn poly_inverse_mod(a: &[BigRational], m: &[BigRational]) -> Vec<BigRational> {
    let mut r0 = m.to_vec();
    let mut r1 = a.to_vec();
    trim(&mut r1);
    let mut s0: Vec<BigRational> = vec![];
    let mut s1: Vec<BigRational> = vec![BigRational::one()];
    while !r1.is_empty() {
        let (quot, rem) = poly_divrem(&r0, &r1);
        let s2 = poly_sub(&s0, &poly_mul(&quot, &s1));
        r0 = std::mem::replace(&mut r1, rem);
        s0 = std::mem::replace(&mut s1, s2);
    }
    // r0 is a nonzero constant because m is irreducible and a ≢ 0.
    debug_assert_eq!(r0.len(), 1);
    let c = r0[0].clone();
    s0.iter().map(|s| s / &c).collect()
}
