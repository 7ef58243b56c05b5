use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use qweyl_core::field::cyclotomic_polynomial;
use qweyl_core::{CycField, CycScalar};

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Remainder of `p` modulo the monic polynomial `m` by long division.
fn poly_rem(mut p: Vec<BigRational>, m: &[BigInt]) -> Vec<BigRational> {
    let deg = m.len() - 1;
    while p.len() > deg {
        let lead = p.pop().expect("nonempty");
        let shift = p.len() - deg;
        for (i, c) in m.iter().take(deg).enumerate() {
            p[shift + i] -= &lead * BigRational::from_integer(c.clone());
        }
    }
    p.resize(deg, BigRational::zero());
    p
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len() + b.len()];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn scalar_from(field: &Arc<CycField>, coeffs: &[i64]) -> CycScalar {
    field.reduce(&coeffs.iter().map(|&c| rat(c)).collect::<Vec<_>>())
}

fn ell_strategy() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![3u64, 5, 7, 9, 15])
}

fn coeffs() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-6i64..=6, 0..12)
}

#[test]
fn cyclotomic_polynomials_match_known_values() {
    let to_vec = |v: Vec<BigInt>| v.into_iter().map(|c| i64::try_from(c).unwrap()).collect::<Vec<_>>();
    assert_eq!(to_vec(cyclotomic_polynomial(3)), vec![1, 1, 1]);
    assert_eq!(to_vec(cyclotomic_polynomial(9)), vec![1, 0, 0, 1, 0, 0, 1]);
    assert_eq!(to_vec(cyclotomic_polynomial(15)), vec![1, -1, 0, 1, -1, 1, 0, -1, 1]);
}

#[test]
fn reduction_examples() {
    let f3 = CycField::new(3).unwrap();
    assert!(scalar_from(&f3, &[1, 1, 1]).is_zero());
    assert_eq!(scalar_from(&f3, &[0, 0, 0, 0, 1]), f3.q());
    let f5 = CycField::new(5).unwrap();
    assert!(scalar_from(&f5, &[0, -1, 0, 0, 0, 0, 1]).is_zero());
}

#[test]
fn qpow_examples() {
    let f3 = CycField::new(3).unwrap();
    assert_eq!(f3.qpow(-1), f3.qpow(2));
    assert!(f3.qpow(6).is_one());
    let f5 = CycField::new(5).unwrap();
    assert_eq!(f5.qpow(2), scalar_from(&f5, &[0, 0, 1]));
}

#[test]
fn inverse_examples() {
    let f3 = CycField::new(3).unwrap();
    assert_eq!(f3.q().inv().unwrap(), f3.qpow(2));
    let qm1 = &f3.q() - &f3.one();
    let want = f3.reduce(&[rat(-2) / rat(3), rat(-1) / rat(3)]);
    assert_eq!(qm1.inv().unwrap(), want);
    assert!((&qm1 * &want).is_one());
    assert!(f3.one().inv().unwrap().is_one());
    assert!(f3.zero().inv().is_err());
}

#[test]
fn display_forms() {
    let f3 = CycField::new(3).unwrap();
    let qm1 = &f3.q() - &f3.one();
    assert_eq!(qm1.inv().unwrap().to_string(), "(-1/3)*q - 2/3");
    let f5 = CycField::new(5).unwrap();
    assert_eq!((&f5.qpow(2) - &f5.one()).to_string(), "q^2 - 1");
    assert_eq!(f5.qpow(4).to_string(), "-q^3 - q^2 - q - 1");
}

#[test]
fn roots_of_unity_vanish_exactly_when_divisible() {
    for ell in [3u64, 5, 7, 9] {
        let f = CycField::new(ell).unwrap();
        let l = ell as i64;
        for k in -4 * l..=4 * l {
            let v = &f.qpow(2 * k) - &f.one();
            assert_eq!(v.is_zero(), k % l == 0, "ell={ell} k={k}");
        }
    }
}

#[test]
fn rejects_bad_orders() {
    for ell in [0u64, 1, 2, 4, 10] {
        assert!(CycField::new(ell).is_err());
    }
}

proptest! {
    #[test]
    fn product_matches_long_division(ell in ell_strategy(), a in coeffs(), b in coeffs()) {
        let f = CycField::new(ell).unwrap();
        let m = cyclotomic_polynomial(ell as usize);
        let pa: Vec<BigRational> = a.iter().map(|&c| rat(c)).collect();
        let pb: Vec<BigRational> = b.iter().map(|&c| rat(c)).collect();
        let want = poly_rem(poly_mul(&pa, &pb), &m);
        let got = &f.reduce(&pa) * &f.reduce(&pb);
        prop_assert_eq!(got.coeffs(), &want[..]);
    }

    #[test]
    fn field_axioms(ell in ell_strategy(), a in coeffs(), b in coeffs(), c in coeffs()) {
        let f = CycField::new(ell).unwrap();
        let (a, b, c) = (scalar_from(&f, &a), scalar_from(&f, &b), scalar_from(&f, &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a - &b) + &b, a.clone());
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn reduce_is_idempotent(ell in ell_strategy(), a in prop::collection::vec(-9i64..=9, 0..40)) {
        let f = CycField::new(ell).unwrap();
        let once = scalar_from(&f, &a);
        let twice = f.reduce(once.coeffs());
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn qpow_agrees_with_repeated_multiplication(ell in ell_strategy(), k in -40i64..40) {
        let f = CycField::new(ell).unwrap();
        let mut acc = f.one();
        let step = if k >= 0 { f.q() } else { f.q().inv().unwrap() };
        for _ in 0..k.abs() {
            acc = &acc * &step;
        }
        prop_assert_eq!(f.qpow(k), acc);
    }
}

#[test]
fn cyclotomic_polynomial_vanishes_at_q() {
    for ell in [3u64, 5, 7, 9, 15, 21] {
        let f = CycField::new(ell).unwrap();
        let mut acc = f.zero();
        for c in cyclotomic_polynomial(ell as usize).iter().rev() {
            acc = &(&acc * &f.q()) + &f.from_rational(BigRational::from_integer(c.clone()));
        }
        assert!(acc.is_zero());
        assert!(!f.q().is_one() && f.qpow(ell as i64).is_one());
    }
}
