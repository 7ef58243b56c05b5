//! Γ-gradings on `Mat(ℓⁿ)`, invariant blocks and fiberwise quantum
//! Hamiltonian reduction.
//!
//! `Γ ≅ (Z/ℓ)^d` is the group of `ℓ`-torsion points of `K`. With the matrix
//! model of [`crate::fiber`], `ρ(α_i)` has entry `γ_i q^{-2r_i}` at row `r`, so
//! `μ_K(z_j) = ∏α_i^{m_ij}` is diagonal with entry `φ†(γ)_j q^{-2(M†r)_j}` and
//! conjugation by it scales `E_{r,s}` by `q^{2(M†(s-r))_j}`. The grading is
//! therefore `deg(E_{r,s}) = M†(s - r) mod ℓ`, and the generator `g_j` of `Γ`
//! acts on `E_{r,s}` by `q^{2 deg_j(E_{r,s})}`.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::fiber::{full_matrix_rep, FiberError, FiberPoint, FullRep};
use crate::field::{CycField, CycScalar};
use crate::lattice::{classical_moment, kernel_mod_ell, LatticeError, ModEllKernel};
use crate::linalg::{kernel, Echelon, Matrix, QuotientCoords, SparseVec};
use crate::pbw::{DqAlgebra, TorusEmbedding};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GammaError {
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("eta has {got} entries, expected d = {d}")]
    EtaLength { got: usize, d: usize },
    #[error("eta_{index}^l does not equal the classical moment map value {expected}")]
    EtaPower { index: usize, expected: String },
    #[error("empty reduction: no row has all moment diagonals zero; admissible eta values are {}", format_etas(.admissible))]
    EmptyReduction { admissible: Vec<Vec<String>> },
    #[error("reduction bookkeeping failed: {0}")]
    Inconsistent(String),
}

fn format_etas(etas: &[Vec<String>]) -> String {
    etas.iter()
        .map(|e| format!("({})", e.join(", ")))
        .collect::<Vec<_>>()
        .join(", ")
}

/// The grading of `Mat(ℓⁿ)` by `(Z/ℓ)^d` and its coset decomposition.
#[derive(Clone, Debug)]
pub struct GammaGrading {
    pub ell: u32,
    pub n: usize,
    pub d: usize,
    pub kernel: ModEllKernel,
    /// Cosets of `ker M†`, each as linear indices in lexicographic order of
    /// their vectors, ordered by minimal member.
    pub cosets: Vec<Vec<usize>>,
    coset_of: Vec<usize>,
}

impl GammaGrading {
    pub fn new(emb: &TorusEmbedding, ell: u32) -> Self {
        let kernel = kernel_mod_ell(emb.matrix(), emb.d(), ell);
        let n = emb.n();
        let size = (ell as usize).pow(n as u32);
        let mut coset_of = vec![0; size];
        let cosets: Vec<Vec<usize>> = kernel
            .cosets()
            .iter()
            .map(|c| c.iter().map(|r| linear_index(r, ell)).collect())
            .collect();
        for (k, c) in cosets.iter().enumerate() {
            for &idx in c {
                coset_of[idx] = k;
            }
        }
        GammaGrading {
            ell,
            n,
            d: emb.d(),
            kernel,
            cosets,
            coset_of,
        }
    }

    pub fn size(&self) -> usize {
        self.coset_of.len()
    }

    pub fn vector(&self, mut idx: usize) -> Vec<u32> {
        let ell = self.ell as usize;
        (0..self.n)
            .map(|_| {
                let r = idx % ell;
                idx /= ell;
                r as u32
            })
            .collect()
    }

    /// `deg(E_{r,s}) = M†(s - r) mod ℓ`.
    pub fn deg(&self, r: usize, s: usize) -> Vec<u32> {
        let ell = self.ell;
        let diff: Vec<u32> = self
            .vector(s)
            .iter()
            .zip(self.vector(r))
            .map(|(a, b)| (a + ell - b) % ell)
            .collect();
        self.kernel.apply_mt(&diff)
    }

    pub fn is_invariant(&self, r: usize, s: usize) -> bool {
        self.coset_of[r] == self.coset_of[s]
    }

    pub fn coset_of(&self, r: usize) -> usize {
        self.coset_of[r]
    }

    /// Elementary matrices spanning `Mat(ℓⁿ)^Γ`, in row-major order.
    pub fn invariant_basis(&self) -> Vec<(usize, usize)> {
        let n = self.size();
        (0..n)
            .flat_map(|r| (0..n).map(move |s| (r, s)))
            .filter(|&(r, s)| self.is_invariant(r, s))
            .collect()
    }

    /// Projection onto the degree-zero part.
    pub fn project_invariant(&self, v: &SparseVec<(usize, usize)>) -> SparseVec<(usize, usize)> {
        v.iter()
            .filter(|((r, s), _)| self.is_invariant(*r, *s))
            .map(|(k, c)| (*k, c.clone()))
            .collect()
    }
}

/// `idx(r) = Σ r_i ℓ^{i-1}`.
pub fn linear_index(r: &[u32], ell: u32) -> usize {
    r.iter()
        .rev()
        .fold(0usize, |acc, &x| acc * ell as usize + x as usize)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockDecomposition {
    pub blocks: Vec<Vec<usize>>,
    pub block_count: usize,
    /// Common block size, if all blocks have the same size.
    pub block_size: Option<usize>,
    pub invariant_dim: usize,
    pub unimodular: bool,
}

pub fn invariant_blocks(g: &GammaGrading, emb: &TorusEmbedding) -> BlockDecomposition {
    let sizes: Vec<usize> = g.cosets.iter().map(Vec::len).collect();
    let block_size = if sizes.windows(2).all(|w| w[0] == w[1]) {
        sizes.first().copied()
    } else {
        None
    };
    BlockDecomposition {
        blocks: g.cosets.clone(),
        block_count: g.cosets.len(),
        block_size,
        invariant_dim: sizes.iter().map(|s| s * s).sum(),
        unimodular: emb.is_unimodular(),
    }
}

/// `φ†(γ)_j = ∏_i γ_i^{m_ij}`.
pub fn phi_dagger(emb: &TorusEmbedding, gamma: &[CycScalar]) -> Result<Vec<CycScalar>, GammaError> {
    let field = gamma[0].field().clone();
    (0..emb.d())
        .map(|j| {
            let mut acc = field.one();
            for (i, g) in gamma.iter().enumerate() {
                let e = emb.matrix()[i][j];
                let f = g.pow(e).map_err(|_| {
                    GammaError::Fiber(FiberError::OutsideLocus { index: i + 1 })
                })?;
                acc = &acc * &f;
            }
            Ok(acc)
        })
        .collect()
}

/// The `ℓ^d` values `η_j = φ†(γ)_j q^{-2(M†r)_j}`, one per coset of `ker M†`,
/// in coset order.
pub fn admissible_etas(field: &Arc<CycField>, emb: &TorusEmbedding, p: &FiberPoint) -> Result<Vec<Vec<CycScalar>>, GammaError> {
    let g = GammaGrading::new(emb, field.ell());
    let base = phi_dagger(emb, p.gammas())?;
    Ok(g.cosets
        .iter()
        .map(|c| {
            let r = g.vector(c[0]);
            let mr = g.kernel.apply_mt(&r);
            base.iter()
                .zip(&mr)
                .map(|(b, m)| b.mul_qpow(-2 * *m as i64))
                .collect()
        })
        .collect())
}

/// Diagonal matrices `μ_K(z_j) - η_j`, entry `φ†(γ)_j q^{-2(M†r)_j} - η_j` at `r`.
///
/// Requires `η_j^ℓ = ∏(1 + λ_iλ_i∨)^{m_ij}`; whether `η` is one of the
/// admissible values is decided by the caller (see [`hamiltonian_reduce`]).
pub fn moment_diagonals(
    field: &Arc<CycField>,
    emb: &TorusEmbedding,
    p: &FiberPoint,
    eta: &[CycScalar],
) -> Result<Vec<Matrix>, GammaError> {
    if eta.len() != emb.d() {
        return Err(GammaError::EtaLength { got: eta.len(), d: emb.d() });
    }
    let classical = classical_moment(emb.matrix(), emb.d(), p.lambda())?;
    for (j, (e, c)) in eta.iter().zip(&classical).enumerate() {
        if &e.pow_u(field.ell() as u64) != c {
            return Err(GammaError::EtaPower { index: j + 1, expected: c.to_string() });
        }
    }
    let g = GammaGrading::new(emb, field.ell());
    let base = phi_dagger(emb, p.gammas())?;
    Ok((0..emb.d())
        .map(|j| {
            let entries = (0..g.size())
                .map(|r| {
                    let mr = g.kernel.apply_mt(&g.vector(r));
                    &base[j].mul_qpow(-2 * mr[j] as i64) - &eta[j]
                })
                .collect();
            Matrix::diag(field, entries)
        })
        .collect())
}

/// `ρ(μ_K(z_j)) = ρ(∏α_i^{m_ij})` computed through the PBW engine and the
/// matrix model; negative exponents use the inverse of the diagonal image.
pub fn moment_matrix_via_pbw(alg: &DqAlgebra, rep: &FullRep, j: usize) -> Matrix {
    let emb = alg.embedding();
    let pos: Vec<u32> = (0..emb.n()).map(|i| emb.matrix()[i][j].max(0) as u32).collect();
    let neg: Vec<u32> = (0..emb.n()).map(|i| (-emb.matrix()[i][j]).max(0) as u32).collect();
    let a = rep.apply(&alg.euler_product(&pos));
    let b = rep.apply(&alg.euler_product(&neg));
    a.mul(&b.diag_inverse().expect("Euler images are invertible on the Azumaya locus"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionChecks {
    pub ideal_two_sided: bool,
    pub has_unit: bool,
    pub center_dim: usize,
    pub idempotents_ok: bool,
    pub restriction_multiplicative: bool,
    pub exact: bool,
    pub module_cyclic: bool,
    pub module_action_bijective: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionResult {
    pub invariant_dim: usize,
    pub block_count: usize,
    pub block_size: Option<usize>,
    /// `dim J^Γ`.
    pub ideal_dim: usize,
    /// `dim J` for the left ideal `J = Mat·{μ_K(z_j) - η_j}`.
    pub left_ideal_dim: usize,
    pub quotient_dim: usize,
    pub module_dim: usize,
    pub is_matrix_algebra: bool,
    pub eta_admissible: bool,
    /// Rows `r` on which every moment diagonal vanishes.
    pub surviving_rows: Vec<Vec<u32>>,
    /// `γ' = γ q^{-2r_0}` for the first surviving row `r_0`.
    pub gamma_prime: Vec<CycScalar>,
    pub checks: ReductionChecks,
}

fn unit_vec(field: &Arc<CycField>, r: usize, s: usize) -> SparseVec<(usize, usize)> {
    [((r, s), field.one())].into_iter().collect()
}

/// Quantum Hamiltonian reduction of `D_λ ≅ Mat(ℓⁿ)` at `η`.
///
/// `J` is the left ideal generated by the moment diagonals; the quotient
/// `Mat^Γ/J^Γ` is identified with `Mat(|Z|)` by restricting to the surviving
/// rows `Z`. The module `(Mat/I')^Γ` uses `I' = Mat·{ρ(α_i) - γ'_i}` with
/// cyclic generator the image of `1`.
pub fn hamiltonian_reduce(
    field: &Arc<CycField>,
    alg: &DqAlgebra,
    p: &FiberPoint,
    eta: &[CycScalar],
) -> Result<ReductionResult, GammaError> {
    let emb = alg.embedding();
    let rep = full_matrix_rep(field, emb, p)?;
    let diagonals = moment_diagonals(field, emb, p, eta)?;
    let g = GammaGrading::new(emb, field.ell());
    let blocks = invariant_blocks(&g, emb);
    let size = g.size();

    // J = Mat·{G_j}: spanned by E_{ab}·G_j.
    let mut j_ideal: Echelon<(usize, usize)> = Echelon::new();
    for gm in &diagonals {
        for a in 0..size {
            for b in 0..size {
                j_ideal.insert(Matrix::unit(field, size, a, b).mul(gm).to_vec());
            }
        }
    }

    let surviving: Vec<usize> = (0..size)
        .filter(|&r| diagonals.iter().all(|gm| gm.get(r, r).is_zero()))
        .collect();
    if surviving.is_empty() {
        let admissible = admissible_etas(field, emb, p)?
            .iter()
            .map(|e| e.iter().map(ToString::to_string).collect())
            .collect();
        return Err(GammaError::EmptyReduction { admissible });
    }

    let mut j_inv: Echelon<(usize, usize)> = Echelon::new();
    for row in j_ideal.rows() {
        j_inv.insert(g.project_invariant(row));
    }
    let inv_basis = g.invariant_basis();

    // Quotient basis: E_{r,s} with r, s surviving.
    let pos: std::collections::HashMap<usize, usize> =
        surviving.iter().enumerate().map(|(k, &r)| (r, k)).collect();
    let zsize = surviving.len();
    let qbasis: Vec<(usize, usize)> = surviving
        .iter()
        .flat_map(|&r| surviving.iter().map(move |&s| (r, s)))
        .collect();
    let qvecs: Vec<SparseVec<(usize, usize)>> = qbasis.iter().map(|&(r, s)| unit_vec(field, r, s)).collect();
    let coords = QuotientCoords::new(field, j_inv.rows().cloned(), &qvecs)
        .map_err(|e| GammaError::Inconsistent(format!("quotient basis: {e}")))?;
    let exact = blocks.invariant_dim == j_inv.dim() + qbasis.len()
        && inv_basis
            .iter()
            .all(|&(r, s)| coords.coords(&unit_vec(field, r, s)).is_ok());

    // J^Γ is a two-sided ideal of Mat^Γ.
    let ideal_two_sided = j_inv.rows().all(|row| {
        let jm = Matrix::from_vec(field, size, row);
        inv_basis.iter().all(|&(r, s)| {
            let e = Matrix::unit(field, size, r, s);
            j_inv.contains(&e.mul(&jm).to_vec()) && j_inv.contains(&jm.mul(&e).to_vec())
        })
    });

    let qmat = |k: usize| Matrix::unit(field, size, qbasis[k].0, qbasis[k].1);
    let qmul = |a: usize, b: usize| -> Vec<CycScalar> {
        coords
            .coords(&qmat(a).mul(&qmat(b)).to_vec())
            .expect("products of invariants stay invariant")
    };
    let basis_vec = |k: usize| -> Vec<CycScalar> {
        (0..qbasis.len())
            .map(|i| if i == k { field.one() } else { field.zero() })
            .collect()
    };

    let id = Matrix::identity(field, size);
    let unit = coords
        .coords(&id.to_vec())
        .map_err(|e| GammaError::Inconsistent(format!("identity: {e}")))?;
    let has_unit = (0..qbasis.len()).all(|k| {
        let left = coords.coords(&id.mul(&qmat(k)).to_vec()).ok();
        let right = coords.coords(&qmat(k).mul(&id).to_vec()).ok();
        left.as_ref() == Some(&basis_vec(k)) && right.as_ref() == Some(&basis_vec(k))
    });

    let images: Vec<SparseVec<(usize, usize)>> = (0..qbasis.len())
        .map(|a| {
            let mut v = SparseVec::new();
            for b in 0..qbasis.len() {
                let ab = qmul(a, b);
                let ba = qmul(b, a);
                for (i, (x, y)) in ab.iter().zip(&ba).enumerate() {
                    let c = x - y;
                    if !c.is_zero() {
                        v.insert((b, i), c);
                    }
                }
            }
            v
        })
        .collect();
    let center_dim = kernel(field, &images).len();

    let diag_idx: Vec<usize> = (0..zsize).map(|k| k * zsize + k).collect();
    let mut idem_sum = vec![field.zero(); qbasis.len()];
    let mut idempotents_ok = true;
    for &a in &diag_idx {
        idem_sum[a] = &idem_sum[a] + &field.one();
        for &b in &diag_idx {
            let prod = qmul(a, b);
            let want = if a == b { basis_vec(a) } else { vec![field.zero(); qbasis.len()] };
            idempotents_ok &= prod == want;
        }
    }
    idempotents_ok &= idem_sum == unit;

    // ψ(E_{r,s}) = E_{pos r, pos s} in Mat(|Z|).
    let restricts_to_zero = j_inv
        .rows()
        .all(|row| row.keys().all(|(r, s)| !(pos.contains_key(r) && pos.contains_key(s))));
    let restriction_multiplicative = restricts_to_zero
        && (0..qbasis.len()).all(|a| {
            (0..qbasis.len()).all(|b| {
                let (ra, sa) = qbasis[a];
                let (rb, sb) = qbasis[b];
                let mut want = vec![field.zero(); qbasis.len()];
                if sa == rb {
                    want[pos[&ra] * zsize + pos[&sb]] = field.one();
                }
                qmul(a, b) == want
            })
        });

    let center_ok = center_dim == 1;
    let is_matrix_algebra = has_unit
        && center_ok
        && idempotents_ok
        && restriction_multiplicative
        && ideal_two_sided
        && qbasis.len() == zsize * zsize;

    // Module (Mat/I')^Γ, I' = Mat·{ρ(α_i) - γ'_i}.
    let r0 = surviving[0];
    let r0v = g.vector(r0);
    let gamma_prime: Vec<CycScalar> = p
        .gammas()
        .iter()
        .zip(&r0v)
        .map(|(gm, r)| gm.mul_qpow(-2 * *r as i64))
        .collect();
    let mut i_prime: Echelon<(usize, usize)> = Echelon::new();
    for (i, gp) in gamma_prime.iter().enumerate() {
        let gen = rep.alpha[i].sub(&id.scale(gp));
        for a in 0..size {
            for b in 0..size {
                i_prime.insert(Matrix::unit(field, size, a, b).mul(&gen).to_vec());
            }
        }
    }
    let mut i_prime_inv: Echelon<(usize, usize)> = Echelon::new();
    for row in i_prime.rows() {
        i_prime_inv.insert(g.project_invariant(row));
    }
    let mvecs: Vec<SparseVec<(usize, usize)>> = surviving.iter().map(|&a| unit_vec(field, a, r0)).collect();
    let mcoords = QuotientCoords::new(field, i_prime_inv.rows().cloned(), &mvecs)
        .map_err(|e| GammaError::Inconsistent(format!("module basis: {e}")))?;
    let module_dim = blocks.invariant_dim - i_prime_inv.dim();
    if module_dim != mvecs.len() {
        return Err(GammaError::Inconsistent(format!(
            "module dimension {module_dim} but {} basis vectors",
            mvecs.len()
        )));
    }
    let generator = mcoords
        .coords(&id.to_vec())
        .map_err(|e| GammaError::Inconsistent(format!("cyclic generator: {e}")))?;
    let mut cyclic_span: Echelon<usize> = Echelon::new();
    let mut action: Echelon<(usize, usize, usize)> = Echelon::new();
    let mut action_ok = true;
    for k in 0..qbasis.len() {
        let qa = qmat(k);
        let image = mcoords.coords(&qa.to_vec());
        match image {
            Ok(v) => {
                cyclic_span.insert(v.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect());
            }
            Err(_) => action_ok = false,
        }
        let mut op = SparseVec::new();
        for (b, &a) in surviving.iter().enumerate() {
            let v = qa.mul(&Matrix::unit(field, size, a, r0));
            match mcoords.coords(&v.to_vec()) {
                Ok(col) => {
                    for (i, c) in col.into_iter().enumerate() {
                        if !c.is_zero() {
                            op.insert((i, b, 0), c);
                        }
                    }
                }
                Err(_) => action_ok = false,
            }
        }
        action.insert(op);
    }
    // J^Γ acts by zero, so the action descends to the quotient.
    for row in j_inv.rows() {
        let jm = Matrix::from_vec(field, size, row);
        for &a in &surviving {
            let v = jm.mul(&Matrix::unit(field, size, a, r0));
            action_ok &= mcoords.coords(&v.to_vec()).is_ok_and(|c| c.iter().all(CycScalar::is_zero));
        }
    }
    let module_cyclic = cyclic_span.dim() == module_dim
        && generator
            .iter()
            .enumerate()
            .all(|(i, c)| if i == 0 { c.is_one() } else { c.is_zero() });
    let module_action_bijective = action_ok && action.dim() == module_dim * module_dim && qbasis.len() == module_dim * module_dim;

    Ok(ReductionResult {
        invariant_dim: blocks.invariant_dim,
        block_count: blocks.block_count,
        block_size: blocks.block_size,
        ideal_dim: j_inv.dim(),
        left_ideal_dim: j_ideal.dim(),
        quotient_dim: qbasis.len(),
        module_dim,
        is_matrix_algebra,
        eta_admissible: true,
        surviving_rows: surviving.iter().map(|&r| g.vector(r)).collect(),
        gamma_prime,
        checks: ReductionChecks {
            ideal_two_sided,
            has_unit,
            center_dim,
            idempotents_ok,
            restriction_multiplicative,
            exact,
            module_cyclic,
            module_action_bijective,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QmmGammaReport {
    pub holds: bool,
    pub checked: usize,
    pub failures: usize,
}

/// `μ_Γ(g_j)·E = (g_j ▷ E)·μ_Γ(g_j)` for every generator and elementary `E`,
/// with `μ_Γ(g_j) = diag(q^{-2(M†r)_j})` and `g_j ▷ E = q^{2deg_j(E)}E`.
pub fn verify_qmm_gamma(field: &Arc<CycField>, emb: &TorusEmbedding) -> QmmGammaReport {
    let g = GammaGrading::new(emb, field.ell());
    let size = g.size();
    let mut checked = 0;
    let mut failures = 0;
    for j in 0..g.d {
        let mu = Matrix::diag(
            field,
            (0..size)
                .map(|r| field.qpow(-2 * g.kernel.apply_mt(&g.vector(r))[j] as i64))
                .collect(),
        );
        for r in 0..size {
            for s in 0..size {
                let e = Matrix::unit(field, size, r, s);
                let acted = e.scale(&field.qpow(2 * g.deg(r, s)[j] as i64));
                checked += 1;
                if mu.mul(&e) != acted.mul(&mu) {
                    failures += 1;
                }
            }
        }
    }
    QmmGammaReport {
        holds: failures == 0,
        checked,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_emb() -> TorusEmbedding {
        TorusEmbedding::new(2, vec![vec![1], vec![1]], vec![vec![1]]).unwrap()
    }

    #[test]
    fn blocks_for_diagonal_embedding() {
        let emb = diag_emb();
        let g = GammaGrading::new(&emb, 3);
        let b = invariant_blocks(&g, &emb);
        assert_eq!((b.block_count, b.block_size, b.invariant_dim), (3, Some(3), 27));
    }

    #[test]
    fn blocks_for_identity_and_trivial_embeddings() {
        let id = TorusEmbedding::new(2, vec![vec![1, 0], vec![0, 1]], vec![vec![1, 0], vec![0, 1]]).unwrap();
        let b = invariant_blocks(&GammaGrading::new(&id, 3), &id);
        assert_eq!((b.block_count, b.block_size), (9, Some(1)));
        let triv = TorusEmbedding::trivial(2).unwrap();
        let b = invariant_blocks(&GammaGrading::new(&triv, 3), &triv);
        assert_eq!((b.block_count, b.block_size, b.invariant_dim), (1, Some(9), 81));
    }

    #[test]
    fn grading_of_elementary_matrix() {
        let g = GammaGrading::new(&diag_emb(), 3);
        let r = linear_index(&[1, 0], 3);
        let s = linear_index(&[0, 0], 3);
        assert_eq!(g.deg(r, s), vec![2]);
    }

    #[test]
    fn moment_diagonal_entries() {
        let f = CycField::new(3).unwrap();
        let emb = diag_emb();
        let p = FiberPoint::origin(&f, 2);
        let gm = moment_diagonals(&f, &emb, &p, &[f.one()]).unwrap();
        for r1 in 0..3u32 {
            for r2 in 0..3u32 {
                let idx = linear_index(&[r1, r2], 3);
                let want = &f.qpow(-2 * (r1 + r2) as i64) - &f.one();
                assert_eq!(gm[0].get(idx, idx), want);
                assert_eq!(want.is_zero(), (r1 + r2) % 3 == 0);
            }
        }
    }

    #[test]
    fn qmm_gamma_holds() {
        let f = CycField::new(3).unwrap();
        assert!(verify_qmm_gamma(&f, &diag_emb()).holds);
        let r = verify_qmm_gamma(&f, &TorusEmbedding::trivial(2).unwrap());
        assert!(r.holds && r.checked == 0);
    }

    #[test]
    fn reduction_at_origin() {
        let f = CycField::new(3).unwrap();
        let alg = DqAlgebra::new(f.clone(), diag_emb());
        let p = FiberPoint::origin(&f, 2);
        let r = hamiltonian_reduce(&f, &alg, &p, &[f.one()]).unwrap();
        assert_eq!((r.invariant_dim, r.quotient_dim, r.module_dim), (27, 9, 3));
        assert!(r.is_matrix_algebra, "{:?}", r.checks);
        assert!(r.checks.exact && r.checks.module_cyclic && r.checks.module_action_bijective);
        assert_eq!(r.surviving_rows, vec![vec![0, 0], vec![2, 1], vec![1, 2]]);
    }

    #[test]
    fn inadmissible_eta_lists_alternatives() {
        let f = CycField::new(3).unwrap();
        let emb = TorusEmbedding::new(1, vec![vec![3]], vec![vec![1]]).unwrap();
        let alg = DqAlgebra::new(f.clone(), emb);
        let p = FiberPoint::origin(&f, 1);
        let err = hamiltonian_reduce(&f, &alg, &p, &[f.qpow(2)]).unwrap_err();
        match err {
            GammaError::EmptyReduction { admissible } => {
                assert_eq!(admissible, vec![vec!["1".to_string()]])
            }
            other => panic!("unexpected {other}"),
        }
    }
}
