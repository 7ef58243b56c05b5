//! Integer and mod-`ℓ` linear algebra for torus embeddings `K ↪ T`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::CycScalar;
use crate::pbw::{EmbeddingError, TorusEmbedding};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("quiver edge {edge} is a loop at vertex {vertex}")]
    Loop { edge: usize, vertex: usize },
    #[error("quiver edge {edge} references vertex {vertex}, but there are only {vertices} vertices")]
    VertexOutOfRange {
        edge: usize,
        vertex: usize,
        vertices: usize,
    },
    #[error("1 + λ_{index}λ_{index}∨ vanishes but appears with negative exponent {exponent}")]
    SingularMoment { index: usize, exponent: i64 },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// `U · M · V = D` with `U`, `V` unimodular and `D` diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub u: Vec<Vec<i64>>,
    pub d: Vec<Vec<i64>>,
    pub v: Vec<Vec<i64>>,
    /// Nonzero diagonal entries of `D`, each dividing the next.
    pub divisors: Vec<i64>,
}

pub fn identity_matrix(n: usize) -> Vec<Vec<i64>> {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

pub fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>], inner: usize, cols: usize) -> Vec<Vec<i64>> {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Smith normal form of an `rows × cols` integer matrix.
pub fn smith_normal_form(m: &[Vec<i64>], cols: usize) -> SmithForm {
    let rows = m.len();
    let mut a: Vec<Vec<i64>> = m.to_vec();
    let mut u = identity_matrix(rows);
    let mut v = identity_matrix(cols);

    let mut t = 0;
    while t < rows.min(cols) {
        // Smallest nonzero entry of the trailing block becomes the pivot.
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        u.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }

        let mut clean = false;
        while !clean {
            clean = true;
            for i in t + 1..rows {
                let f = a[i][t] / a[t][t];
                if f != 0 {
                    for j in 0..cols {
                        a[i][j] -= f * a[t][j];
                    }
                    for j in 0..rows {
                        u[i][j] -= f * u[t][j];
                    }
                }
                if a[i][t] != 0 {
                    a.swap(t, i);
                    u.swap(t, i);
                    clean = false;
                }
            }
            for j in t + 1..cols {
                let f = a[t][j] / a[t][t];
                if f != 0 {
                    for row in a.iter_mut() {
                        row[j] -= f * row[t];
                    }
                    for row in v.iter_mut() {
                        row[j] -= f * row[t];
                    }
                }
                if a[t][j] != 0 {
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                    for row in v.iter_mut() {
                        row.swap(t, j);
                    }
                    clean = false;
                }
            }
            if clean {
                // Divisibility: fold an offending row into the pivot row.
                let p = a[t][t];
                if let Some(i) = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| a[i][j] % p != 0)) {
                    for j in 0..cols {
                        a[t][j] += a[i][j];
                    }
                    for j in 0..rows {
                        u[t][j] += u[i][j];
                    }
                    clean = false;
                }
            }
        }
        if a[t][t] < 0 {
            for x in a[t].iter_mut() {
                *x = -*x;
            }
            for x in u[t].iter_mut() {
                *x = -*x;
            }
        }
        t += 1;
    }

    let divisors = (0..rows.min(cols))
        .map(|i| a[i][i])
        .take_while(|&x| x != 0)
        .collect();
    SmithForm {
        u,
        d: a,
        v,
        divisors,
    }
}

/// All elementary divisors equal one and `M` has full column rank.
pub fn is_unimodular(m: &[Vec<i64>], cols: usize) -> bool {
    let snf = smith_normal_form(m, cols);
    snf.divisors.len() == cols && snf.divisors.iter().all(|&d| d == 1)
}

pub fn rank_over_q(m: &[Vec<i64>], cols: usize) -> usize {
    smith_normal_form(m, cols).divisors.len()
}

fn gcd(a: i64, b: i64) -> i64 {
    num_integer::Integer::gcd(&a, &b)
}

fn modp(x: i64, ell: u32) -> u32 {
    x.rem_euclid(ell as i64) as u32
}

fn inverse_mod(x: u32, ell: u32) -> Option<u32> {
    (1..ell).find(|&y| (x as u64 * y as u64) % ell as u64 == 1)
}

/// `ker(M† : (Z/ℓ)ⁿ → (Z/ℓ)^d)` together with its coset structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModEllKernel {
    pub ell: u32,
    pub n: usize,
    pub d: usize,
    /// `M†` reduced mod `ℓ`, as a `d × n` matrix.
    pub mt: Vec<Vec<u32>>,
    pub basis: Vec<Vec<u32>>,
    /// Number of elements of the kernel.
    pub size: u64,
    /// Whether the kernel is a free `Z/ℓ`-module.
    pub free: bool,
}

impl ModEllKernel {
    pub fn apply_mt(&self, v: &[u32]) -> Vec<u32> {
        self.mt
            .iter()
            .map(|row| {
                (row.iter().zip(v).map(|(a, b)| *a as u64 * *b as u64).sum::<u64>() % self.ell as u64) as u32
            })
            .collect()
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        self.apply_mt(v).iter().all(|&x| x == 0)
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Cosets of the kernel in `(Z/ℓ)ⁿ`, each listed in lexicographic order and
    /// ordered by their lexicographically minimal member.
    pub fn cosets(&self) -> Vec<Vec<Vec<u32>>> {
        let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
        let mut out: Vec<Vec<Vec<u32>>> = Vec::new();
        for r in lex_vectors(self.n, self.ell) {
            let img = self.apply_mt(&r);
            let slot = *index.entry(img).or_insert_with(|| {
                out.push(Vec::new());
                out.len() - 1
            });
            out[slot].push(r);
        }
        out
    }
}

/// All of `(Z/ℓ)ⁿ` in lexicographic order on `(r_1, …, r_n)`.
pub fn lex_vectors(n: usize, ell: u32) -> Vec<Vec<u32>> {
    let total = (ell as usize).pow(n as u32);
    let mut out = Vec::with_capacity(total);
    let mut cur = vec![0u32; n];
    for _ in 0..total {
        out.push(cur.clone());
        for i in (0..n).rev() {
            cur[i] += 1;
            if cur[i] < ell {
                break;
            }
            cur[i] = 0;
        }
    }
    out
}

/// Kernel of `M†` mod `ℓ` for an `n × d` integer matrix `M`.
pub fn kernel_mod_ell(m: &[Vec<i64>], d: usize, ell: u32) -> ModEllKernel {
    let n = m.len();
    let snf = smith_normal_form(m, d);
    let l = ell as i64;
    let mut gens: Vec<Vec<u32>> = Vec::new();
    let mut size: u64 = 1;
    let mut free = true;
    for (k, row) in snf.u.iter().enumerate() {
        let (mult, order) = match snf.divisors.get(k) {
            Some(&dk) => {
                let g = gcd(dk, l);
                if g != 1 && g != l {
                    free = false;
                }
                (l / g, g as u64)
            }
            None => (1, ell as u64),
        };
        size *= order;
        if order > 1 {
            gens.push(row.iter().map(|&x| modp(x * mult, ell)).collect());
        }
    }
    let mt = (0..d)
        .map(|j| (0..n).map(|i| modp(m[i][j], ell)).collect())
        .collect();
    ModEllKernel {
        ell,
        n,
        d,
        mt,
        basis: canonical_basis(gens, ell),
        size,
        free,
    }
}

/// Echelon form mod `ℓ` using unit pivots only; columns without a unit entry
/// are left as they are.
fn canonical_basis(mut rows: Vec<Vec<u32>>, ell: u32) -> Vec<Vec<u32>> {
    let n = rows.first().map_or(0, Vec::len);
    let mut done = 0;
    for c in 0..n {
        let Some(p) = (done..rows.len()).find(|&i| inverse_mod(rows[i][c], ell).is_some()) else {
            continue;
        };
        rows.swap(done, p);
        let inv = inverse_mod(rows[done][c], ell).unwrap() as u64;
        for x in rows[done].iter_mut() {
            *x = ((*x as u64 * inv) % ell as u64) as u32;
        }
        let pivot = rows[done].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == done || row[c] == 0 {
                continue;
            }
            let f = row[c] as u64;
            for (x, p) in row.iter_mut().zip(&pivot) {
                *x = ((*x as u64 + (ell as u64 - f) * *p as u64) % ell as u64) as u32;
            }
        }
        done += 1;
    }
    rows.retain(|r| r.iter().any(|&x| x != 0));
    rows
}

/// `μ_K(λ)_j = ∏_i (1 + λ_i λ_i∨)^{m_ij}`.
pub fn classical_moment(m: &[Vec<i64>], d: usize, lambda: &[(CycScalar, CycScalar)]) -> Result<Vec<CycScalar>, LatticeError> {
    assert_eq!(m.len(), lambda.len(), "one coordinate pair per row of M");
    let bases: Vec<CycScalar> = lambda
        .iter()
        .map(|(c, w)| &(c * w) + &c.field().one())
        .collect();
    let field = match lambda.first() {
        Some((c, _)) => c.field().clone(),
        None => return Ok(Vec::new()),
    };
    (0..d)
        .map(|j| {
            let mut acc = field.one();
            for (i, base) in bases.iter().enumerate() {
                let e = m[i][j];
                let factor = base
                    .pow(e)
                    .map_err(|_| LatticeError::SingularMoment { index: i + 1, exponent: e })?;
                acc = &acc * &factor;
            }
            Ok(acc)
        })
        .collect()
}

/// A finite quiver with 1-based vertex labels; edge order is the input order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuiverData {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl QuiverData {
    pub fn validate(&self) -> Result<(), LatticeError> {
        for (e, &(s, t)) in self.edges.iter().enumerate() {
            for v in [s, t] {
                if v == 0 || v > self.vertices {
                    return Err(LatticeError::VertexOutOfRange {
                        edge: e + 1,
                        vertex: v,
                        vertices: self.vertices,
                    });
                }
            }
            if s == t {
                return Err(LatticeError::Loop { edge: e + 1, vertex: s });
            }
        }
        Ok(())
    }

    /// `deg(e) ∈ Z^V`: `-1` at the source, `+1` at the target.
    pub fn degree(&self, edge: usize) -> Vec<i64> {
        let (s, t) = self.edges[edge];
        let mut v = vec![0; self.vertices];
        v[s - 1] -= 1;
        v[t - 1] += 1;
        v
    }

    /// Component label (its minimal vertex, 0-based) for every vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.vertices).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for &(s, t) in &self.edges {
            let (a, b) = (find(&mut parent, s - 1), find(&mut parent, t - 1));
            let (lo, hi) = (a.min(b), a.max(b));
            parent[hi] = lo;
        }
        (0..self.vertices).map(|v| find(&mut parent, v)).collect()
    }
}

/// Torus embedding of a quiver. The character lattice of `K` is realized as
/// vectors in `Z^V` summing to zero on each component, with basis
/// `e_v - e_root(v)` for every vertex that is not the minimal vertex of its
/// component. The form is the pullback of the dot product.
pub fn quiver_to_embedding(q: &QuiverData) -> Result<TorusEmbedding, LatticeError> {
    q.validate()?;
    let comp = q.components();
    let kept: Vec<usize> = (0..q.vertices).filter(|&v| comp[v] != v).collect();
    let m: Vec<Vec<i64>> = (0..q.edges.len())
        .map(|e| {
            let deg = q.degree(e);
            kept.iter().map(|&v| deg[v]).collect()
        })
        .collect();
    let form: Vec<Vec<i64>> = kept
        .iter()
        .map(|&u| {
            kept.iter()
                .map(|&v| i64::from(u == v) + i64::from(comp[u] == comp[v]))
                .collect()
        })
        .collect();
    Ok(TorusEmbedding::new(q.edges.len(), m, form)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snf_examples() {
        assert_eq!(smith_normal_form(&[vec![1], vec![1]], 1).divisors, vec![1]);
        assert_eq!(smith_normal_form(&[vec![2], vec![4]], 1).divisors, vec![2]);
        assert_eq!(smith_normal_form(&identity_matrix(2), 2).divisors, vec![1, 1]);
        assert_eq!(smith_normal_form(&[vec![2, 0], vec![0, 3]], 2).divisors, vec![1, 6]);
    }

    #[test]
    fn unimodularity() {
        assert!(is_unimodular(&[vec![1], vec![1]], 1));
        assert!(!is_unimodular(&[vec![2], vec![4]], 1));
        assert!(is_unimodular(&identity_matrix(3), 3));
        assert!(!is_unimodular(&[vec![1, 1], vec![1, 1]], 2));
    }

    #[test]
    fn kernel_of_diagonal_embedding() {
        let k = kernel_mod_ell(&[vec![1], vec![1]], 1, 3);
        assert_eq!(k.basis, vec![vec![1, 2]]);
        assert_eq!(k.size, 3);
        assert!(k.free);
        let id = kernel_mod_ell(&identity_matrix(2), 2, 5);
        assert_eq!(id.rank(), 0);
        assert_eq!(id.size, 1);
    }

    #[test]
    fn cosets_are_ordered_by_minimal_member() {
        let k = kernel_mod_ell(&[vec![1], vec![1]], 1, 3);
        let cosets = k.cosets();
        assert_eq!(cosets.len(), 3);
        assert_eq!(cosets[0], vec![vec![0, 0], vec![1, 2], vec![2, 1]]);
        assert_eq!(cosets[1][0], vec![0, 1]);
        assert_eq!(cosets[2][0], vec![0, 2]);
    }

    #[test]
    fn non_free_kernel_is_flagged() {
        let k = kernel_mod_ell(&[vec![3]], 1, 9);
        assert!(!k.free);
        assert_eq!(k.size, 3);
    }

    #[test]
    fn quiver_components_and_forms() {
        let q = QuiverData { vertices: 2, edges: vec![(1, 2)] };
        let emb = quiver_to_embedding(&q).unwrap();
        assert_eq!(emb.d(), 1);
        assert_eq!(emb.pair_rows(0, 0), 2);
        let loops = QuiverData { vertices: 2, edges: vec![(1, 1)] };
        assert_eq!(quiver_to_embedding(&loops).unwrap_err(), LatticeError::Loop { edge: 1, vertex: 1 });
    }
}
