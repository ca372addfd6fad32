//! Dense complex linear algebra helpers shared across the crate.
//!
//! Matrices are small (dimension ≤ 2^8), so everything is dense `nalgebra`
//! storage. The closed-form [`Rank2Eigen`] solver is the fast path for the
//! rank-two operators that appear in two-state discrimination; the general
//! Hermitian eigensolver backs trace norms and the oracle module.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `⟨u|v⟩`, antilinear in the first argument.
#[inline]
pub fn inner(u: &CVector, v: &CVector) -> Complex64 {
    u.dotc(v)
}

/// `|u⟩⟨v|`
pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Symmetrize against round-off, then diagonalize. Eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(m.nrows(), m.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = (m + m.adjoint()).scale(0.5);
    let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Schatten-1 norm of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|x| x.abs()).sum()
}

/// Sum of the strictly positive eigenvalues of a Hermitian matrix,
/// i.e. `max Tr[ΠM]` over `0 ≤ Π ≤ I`.
pub fn positive_part_sum(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().filter(|x| **x > 0.0).sum()
}

/// Principal square root of a positive semidefinite matrix.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let root = DVector::from_iterator(
        values.len(),
        values.iter().map(|&x| c64(x.max(0.0).sqrt(), 0.0)),
    );
    &vectors * CMatrix::from_diagonal(&root) * vectors.adjoint()
}

/// Principal submatrix on the given index list.
pub fn submatrix(m: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// `max |M − M†|` entrywise.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Operator on the bipartite space from local Alice and Bob operators.
///
/// Alice's modes occupy the low bits of the global index, so the global
/// matrix is `bob ⊗ alice` in `nalgebra`'s Kronecker convention. This is the
/// Jordan-Wigner image of the Fermionic product whenever both factors are
/// parity preserving.
pub fn local_product(alice: &CMatrix, bob: &CMatrix) -> CMatrix {
    bob.kronecker(alice)
}

/// Global vector `|a⟩_A |b⟩_B` for local Fock-space vectors.
pub fn local_product_vec(alice: &CVector, bob: &CVector) -> CVector {
    bob.kronecker(alice)
}

/// Eigen-decomposition of `a·|u⟩⟨u| − b·|v⟩⟨v|` through the two-dimensional
/// span of `u` and `v`.
///
/// `plus` carries the largest eigenvalue and `minus` the smallest. When the
/// operator has rank below two, the missing eigenvalues are reported as zero
/// with an eigenvector orthogonal to the range (or the zero vector if the
/// range is already everything the inputs span).
#[derive(Debug, Clone)]
pub struct Rank2Eigen {
    pub lambda_plus: f64,
    pub plus: CVector,
    pub lambda_minus: f64,
    pub minus: CVector,
}

impl Rank2Eigen {
    pub fn new(a: f64, u: &CVector, b: f64, v: &CVector) -> Self {
        const TINY: f64 = 1e-14;
        let dim = u.len();
        let nu = u.norm();
        let nv = v.norm();
        // Orthonormal basis of span{u, v}.
        let mut basis: Vec<CVector> = Vec::with_capacity(2);
        if nu > TINY {
            basis.push(u.unscale(nu));
        }
        if nv > TINY {
            let mut w = v.clone();
            for e in &basis {
                let proj = inner(e, &w);
                w -= e * proj;
            }
            let nw = w.norm();
            if nw > TINY * nv.max(1.0) {
                basis.push(w.unscale(nw));
            }
        }
        let apply = |x: &CVector| -> CVector { u * (inner(u, x) * a) - v * (inner(v, x) * b) };

        match basis.len() {
            0 => Rank2Eigen {
                lambda_plus: 0.0,
                plus: CVector::zeros(dim),
                lambda_minus: 0.0,
                minus: CVector::zeros(dim),
            },
            1 => {
                let e = basis.pop().unwrap();
                let lambda = inner(&e, &apply(&e)).re;
                if lambda >= 0.0 {
                    Rank2Eigen {
                        lambda_plus: lambda,
                        plus: e,
                        lambda_minus: 0.0,
                        minus: CVector::zeros(dim),
                    }
                } else {
                    Rank2Eigen {
                        lambda_plus: 0.0,
                        plus: CVector::zeros(dim),
                        lambda_minus: lambda,
                        minus: e,
                    }
                }
            }
            _ => {
                let (e1, e2) = (&basis[0], &basis[1]);
                let m1 = apply(e1);
                let m2 = apply(e2);
                let alpha = inner(e1, &m1).re;
                let delta = inner(e2, &m2).re;
                let beta = inner(e1, &m2);
                let mean = 0.5 * (alpha + delta);
                let half = 0.5 * (alpha - delta);
                let radius = (half * half + beta.norm_sqr()).sqrt();
                let lp = mean + radius;
                let lm = mean - radius;
                let vec_for = |lambda: f64| -> CVector {
                    // Two candidate null vectors of the 2×2 block; keep the better conditioned.
                    let c1 = (beta, c64(lambda - alpha, 0.0));
                    let c2 = (c64(lambda - delta, 0.0), beta.conj());
                    let n1 = (c1.0.norm_sqr() + c1.1.norm_sqr()).sqrt();
                    let n2 = (c2.0.norm_sqr() + c2.1.norm_sqr()).sqrt();
                    let (x, y, n) = if n1 >= n2 { (c1.0, c1.1, n1) } else { (c2.0, c2.1, n2) };
                    if n < TINY {
                        // Degenerate block: already diagonal.
                        return if (lambda - alpha).abs() <= (lambda - delta).abs() {
                            e1.clone()
                        } else {
                            e2.clone()
                        };
                    }
                    (e1 * x + e2 * y).unscale(n)
                };
                let plus = vec_for(lp);
                let mut minus = vec_for(lm);
                // Re-orthogonalize against round-off (or the degenerate choice).
                let ov = inner(&plus, &minus);
                minus -= &plus * ov;
                let nm = minus.norm();
                let minus = if nm > TINY {
                    minus.unscale(nm)
                } else if inner(e1, &plus).norm() < 0.5 {
                    e1.clone()
                } else {
                    e2.clone()
                };
                Rank2Eigen {
                    lambda_plus: lp,
                    plus,
                    lambda_minus: lm,
                    minus,
                }
            }
        }
    }

    pub fn trace_norm(&self) -> f64 {
        self.lambda_plus.abs() + self.lambda_minus.abs()
    }

    /// Sum of the positive eigenvalues.
    pub fn positive_part(&self) -> f64 {
        self.lambda_plus.max(0.0) + self.lambda_minus.max(0.0)
    }

    pub fn matrix(&self) -> CMatrix {
        outer(&self.plus, &self.plus).scale(self.lambda_plus)
            + outer(&self.minus, &self.minus).scale(self.lambda_minus)
    }
}
