use proptest::prelude::*;
use qweyl_core::lattice::{
    classical_moment, is_unimodular, kernel_mod_ell, lex_vectors, mat_mul, quiver_to_embedding, smith_normal_form,
    LatticeError, QuiverData,
};
use qweyl_core::CycField;

fn det(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|c| {
            let minor: Vec<Vec<i64>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|(k, _)| *k != c).map(|(_, v)| *v).collect())
                .collect();
            let sign = if c % 2 == 0 { 1 } else { -1 };
            sign * m[0][c] * det(&minor)
        })
        .sum()
}

/// Brute-force kernel of `M†` over `Z/ℓ`: all `r` with `Σ_i m_ij r_i ≡ 0`.
fn brute_kernel(m: &[Vec<i64>], d: usize, ell: u32) -> Vec<Vec<u32>> {
    lex_vectors(m.len(), ell)
        .into_iter()
        .filter(|r| {
            (0..d).all(|j| {
                let s: i64 = m.iter().zip(r).map(|(row, &ri)| row[j] * ri as i64).sum();
                s.rem_euclid(ell as i64) == 0
            })
        })
        .collect()
}

fn matrix_strategy() -> impl Strategy<Value = (usize, usize, Vec<Vec<i64>>)> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(n, d)| {
        (Just(n), Just(d), prop::collection::vec(prop::collection::vec(-4i64..=4, d), n))
    })
}

proptest! {
    #[test]
    fn smith_form_is_a_valid_factorization((n, d, m) in matrix_strategy()) {
        let s = smith_normal_form(&m, d);
        prop_assert_eq!(det(&s.u).abs(), 1);
        prop_assert_eq!(det(&s.v).abs(), 1);
        let umv = mat_mul(&mat_mul(&s.u, &m, n, d), &s.v, d, d);
        prop_assert_eq!(&umv, &s.d);
        for (i, row) in s.d.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if i != j {
                    prop_assert_eq!(v, 0);
                }
            }
        }
        for w in s.divisors.windows(2) {
            prop_assert_eq!(w[1] % w[0], 0);
        }
        prop_assert!(s.divisors.iter().all(|&v| v > 0));
    }

    #[test]
    fn kernel_matches_enumeration((_n, d, m) in matrix_strategy(), ell in prop::sample::select(vec![3u32, 5, 9])) {
        let k = kernel_mod_ell(&m, d, ell);
        let brute = brute_kernel(&m, d, ell);
        prop_assert_eq!(k.size as usize, brute.len());
        for r in &brute {
            prop_assert!(k.contains(r));
        }
        let members: usize = k.cosets().iter().map(Vec::len).sum();
        prop_assert_eq!(members, (ell as usize).pow(m.len() as u32));
        for c in k.cosets() {
            prop_assert_eq!(c.len(), brute.len());
        }
    }
}

#[test]
fn unimodularity_examples() {
    assert!(is_unimodular(&[vec![1], vec![1]], 1));
    assert!(is_unimodular(&[vec![1, 0], vec![0, 1]], 2));
    assert!(!is_unimodular(&[vec![2], vec![0]], 1));
    assert!(is_unimodular(&[vec![2, 0], vec![0, 3], vec![1, 1]], 2));
    assert!(!is_unimodular(&[vec![2, 0], vec![0, 2], vec![2, 2]], 2));
}

#[test]
fn diagonal_embedding_kernel() {
    let k = kernel_mod_ell(&[vec![1], vec![1]], 1, 3);
    assert_eq!(k.size, 3);
    assert!(k.free);
    assert!(k.contains(&[1, 2]));
    assert!(!k.contains(&[1, 1]));
    let cosets = k.cosets();
    assert_eq!(cosets.len(), 3);
    assert_eq!(cosets[0], vec![vec![0, 0], vec![1, 2], vec![2, 1]]);
}

#[test]
fn non_free_kernel() {
    let k = kernel_mod_ell(&[vec![3]], 1, 9);
    assert_eq!(k.size, 3);
    assert!(!k.free);
}

#[test]
fn quiver_embeddings() {
    let a2 = QuiverData { vertices: 3, edges: vec![(1, 2), (2, 3), (3, 1)] };
    let emb = quiver_to_embedding(&a2).unwrap();
    assert_eq!((emb.n(), emb.d()), (3, 2));
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        assert_eq!(emb.braid_exponent(i, j), -1);
    }
    let lp = QuiverData { vertices: 2, edges: vec![(1, 1)] };
    assert!(matches!(quiver_to_embedding(&lp), Err(LatticeError::Loop { .. })));
    let out = QuiverData { vertices: 2, edges: vec![(1, 3)] };
    assert!(matches!(quiver_to_embedding(&out), Err(LatticeError::VertexOutOfRange { .. })));
    // Two components: one vertex dropped per component.
    let two = QuiverData { vertices: 4, edges: vec![(1, 2), (3, 4)] };
    assert_eq!(quiver_to_embedding(&two).unwrap().d(), 2);
}

#[test]
fn classical_moment_values() {
    let f = CycField::new(3).unwrap();
    let lambda = vec![(f.from_int(2), f.from_int(1)), (f.from_int(1), f.from_int(3))];
    let mu = classical_moment(&[vec![1], vec![-1]], 1, &lambda).unwrap();
    assert_eq!(mu[0], &f.from_int(3) * &f.from_int(4).inv().unwrap());
    let singular = vec![(f.from_int(-1), f.from_int(1)), (f.zero(), f.zero())];
    assert!(classical_moment(&[vec![-1], vec![1]], 1, &singular).is_err());
    assert!(classical_moment(&[vec![1], vec![1]], 1, &singular).unwrap()[0].is_zero());
}
