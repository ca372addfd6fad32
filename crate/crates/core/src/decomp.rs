//! E/O splitting of even-sector states and the constructive decomposition
//! `ψ = Σ_i |i⟩|η_i⟩, φ = Σ_i |i⟩|ν_i⟩` with `⟨η_i|ν_i⟩ = 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockVector, ModePartition, Parity, Subspace, AMPLITUDE_TOL};
use crate::linalg::{c64, inner, local_product_vec, CMatrix, CVector, ZERO};
use crate::DEFAULT_TOL;

/// Unnormalized E and O components of an even-sector vector.
#[derive(Debug, Clone)]
pub struct SectorSplit {
    pub psi_e: FockVector,
    pub psi_o: FockVector,
    pub norm_e: f64,
    pub norm_o: f64,
}

impl SectorSplit {
    pub fn component(&self, s: Subspace) -> &FockVector {
        match s {
            Subspace::E => &self.psi_e,
            Subspace::O => &self.psi_o,
        }
    }
}

pub fn sector_split(psi: &FockVector) -> Result<SectorSplit> {
    if psi.sector() != Parity::Even {
        return Err(Error::WrongSector { expected: "even" });
    }
    let p = *psi.partition();
    let pick = |s: Subspace| -> CVector {
        CVector::from_fn(p.dim(), |i, _| {
            if p.subspace_of(i) == Some(s) {
                psi.amplitudes()[i]
            } else {
                ZERO
            }
        })
    };
    let psi_e = FockVector::new_in_sector(p, pick(Subspace::E), Parity::Even)?;
    let psi_o = FockVector::new_in_sector(p, pick(Subspace::O), Parity::Even)?;
    Ok(SectorSplit { norm_e: psi_e.norm(), norm_o: psi_o.norm(), psi_e, psi_o })
}

/// `(Σ_E, Σ_O) = (⟨ψ_E|φ_E⟩, ⟨ψ_O|φ_O⟩)`.
pub fn sector_overlaps(psi: &FockVector, phi: &FockVector) -> Result<(Complex64, Complex64)> {
    if psi.partition() != phi.partition() {
        return Err(Error::PartitionMismatch);
    }
    let a = sector_split(psi)?;
    let b = sector_split(phi)?;
    Ok((a.psi_e.inner(&b.psi_e), a.psi_o.inner(&b.psi_o)))
}

/// Unitary `V` such that `V C V†` has a vanishing diagonal, for traceless `C`.
///
/// Works on the Hermitian and anti-Hermitian parts in turn. Each 2×2
/// rotation pairs the largest remaining diagonal entry with the largest entry
/// of opposite sign and zeroes the former exactly; in the second stage the
/// rotation phase is chosen so the already-zero Hermitian diagonal stays zero.
pub fn zero_diagonal_basis(c: &CMatrix) -> Result<CMatrix> {
    let (rows, cols) = c.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let d = rows;
    let scale = c.norm();
    if d == 0 || scale == 0.0 {
        return Ok(CMatrix::identity(d, d));
    }
    let trace = c.trace().norm();
    if trace >= 1e-10 * scale {
        return Err(Error::TraceNotZero { trace });
    }

    let eps = 1e-14 * scale;
    let cap = 10 * d * d;
    let mut m = c.clone();
    let mut v = CMatrix::identity(d, d);
    let mut rotations = 0usize;

    for stage in 0..2 {
        // stage 0: Hermitian part (real diagonal); stage 1: anti-Hermitian part.
        let diag = |m: &CMatrix, k: usize| if stage == 0 { m[(k, k)].re } else { m[(k, k)].im };
        loop {
            let i = (0..d).fold(0, |best, k| if diag(&m, k).abs() > diag(&m, best).abs() { k } else { best });
            let di = diag(&m, i);
            if di.abs() <= eps {
                break;
            }
            let j = (0..d)
                .filter(|&k| diag(&m, k) * di < 0.0)
                .fold(None, |best: Option<usize>, k| match best {
                    Some(b) if diag(&m, b).abs() >= diag(&m, k).abs() => Some(b),
                    _ => Some(k),
                });
            let Some(j) = j else {
                return Err(Error::NonConvergence(format!(
                    "zero-diagonal: no opposite-sign partner for entry {i} ({di:e})"
                )));
            };
            rotations += 1;
            if rotations > cap {
                return Err(Error::NonConvergence(format!("zero-diagonal: exceeded {cap} rotations")));
            }
            let dj = diag(&m, j);
            // Hermitian and anti-Hermitian off-diagonal couplings of the (i, j) block.
            let h = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            let kappa = (m[(i, j)] - m[(j, i)].conj()) * c64(0.0, -0.5);
            let phase = if h.norm() <= eps { 0.0 } else { std::f64::consts::FRAC_PI_2 - h.arg() };
            let theta = if stage == 0 {
                (-di / dj).sqrt().atan()
            } else {
                let s = (Complex64::from_polar(1.0, phase) * kappa).re;
                let a = 0.5 * (di - dj);
                let target = -0.5 * (di + dj);
                let r = (a * a + s * s).sqrt();
                0.5 * (s.atan2(a) + (target / r).clamp(-1.0, 1.0).acos())
            };
            let (sin, cos) = theta.sin_cos();
            let mut w = CMatrix::identity(d, d);
            w[(i, i)] = c64(cos, 0.0);
            w[(j, j)] = c64(cos, 0.0);
            w[(j, i)] = Complex64::from_polar(sin, phase);
            w[(i, j)] = -Complex64::from_polar(sin, -phase);
            m = w.adjoint() * &m * &w;
            v = w.adjoint() * &v;
        }
    }

    let worst = (0..d).map(|k| m[(k, k)].norm()).fold(0.0, f64::max);
    if worst >= 1e-10 * scale {
        return Err(Error::NonConvergence(format!("zero-diagonal: residual diagonal {worst:e}")));
    }
    Ok(v)
}

/// Joint decomposition of two orthogonal states confined to one subspace.
#[derive(Debug, Clone)]
pub struct WalgateDecomposition {
    pub partition: ModePartition,
    pub subspace: Subspace,
    /// Orthonormal Alice vectors of definite local parity (local Fock space).
    pub alice_basis: Vec<CVector>,
    /// Unnormalized Bob vectors, one per Alice basis vector.
    pub bob_eta: Vec<CVector>,
    pub bob_nu: Vec<CVector>,
}

impl WalgateDecomposition {
    fn rebuild(&self, bob: &[CVector]) -> CVector {
        self.alice_basis
            .iter()
            .zip(bob)
            .fold(CVector::zeros(self.partition.dim()), |acc, (a, b)| acc + local_product_vec(a, b))
    }

    pub fn reconstruct_psi(&self) -> CVector {
        self.rebuild(&self.bob_eta)
    }

    pub fn reconstruct_phi(&self) -> CVector {
        self.rebuild(&self.bob_nu)
    }

    /// `max_i |⟨η_i|ν_i⟩|`
    pub fn max_pair_overlap(&self) -> f64 {
        self.bob_eta
            .iter()
            .zip(&self.bob_nu)
            .map(|(e, n)| inner(e, n).norm())
            .fold(0.0, f64::max)
    }
}

/// Which subspace a raw even-sector amplitude vector lives in; `Ok(None)` for zero.
pub(crate) fn support_subspace(p: &ModePartition, v: &CVector) -> Result<Option<Subspace>> {
    let mut found = None;
    for (i, a) in v.iter().enumerate() {
        if a.norm() <= AMPLITUDE_TOL {
            continue;
        }
        let s = p.subspace_of(i).ok_or(Error::MixedSubspace)?;
        match found {
            None => found = Some(s),
            Some(t) if t != s => return Err(Error::MixedSubspace),
            _ => {}
        }
    }
    Ok(found)
}

pub fn walgate_decompose(psi: &FockVector, phi: &FockVector) -> Result<WalgateDecomposition> {
    if psi.partition() != phi.partition() {
        return Err(Error::PartitionMismatch);
    }
    let p = *psi.partition();
    let s_psi = support_subspace(&p, psi.amplitudes())?;
    let s_phi = support_subspace(&p, phi.amplitudes())?;
    let subspace = match (s_psi, s_phi) {
        (Some(a), Some(b)) if a != b => return Err(Error::MixedSubspace),
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(Error::ZeroVector),
    };
    walgate_in_subspace(&p, subspace, psi.amplitudes(), phi.amplitudes(), DEFAULT_TOL)
}

/// Decomposition on a given subspace; either vector may be zero.
pub fn walgate_in_subspace(
    p: &ModePartition,
    subspace: Subspace,
    psi: &CVector,
    phi: &CVector,
    tol: f64,
) -> Result<WalgateDecomposition> {
    for v in [psi, phi] {
        if let Some(s) = support_subspace(p, v)? {
            if s != subspace {
                return Err(Error::MixedSubspace);
            }
        }
    }
    let overlap = inner(psi, phi).norm();
    if overlap >= tol * (psi.norm() * phi.norm()).max(1.0) {
        return Err(Error::NotOrthogonal { overlap });
    }

    let parity = subspace.local_parity();
    let alice_idx: Vec<usize> = (0..p.alice_dim()).filter(|&a| Parity::of_index(a) == parity).collect();
    let bob_vec = |v: &CVector, a: usize| CVector::from_fn(p.bob_dim(), |b, _| v[p.join(a, b)]);
    let eta: Vec<CVector> = alice_idx.iter().map(|&a| bob_vec(psi, a)).collect();
    let nu: Vec<CVector> = alice_idx.iter().map(|&a| bob_vec(phi, a)).collect();

    let d = alice_idx.len();
    let mut c = CMatrix::from_fn(d, d, |i, j| inner(&eta[i], &nu[j]));
    // Remove the round-off trace left over from ⟨ψ|φ⟩ ≈ 0.
    let shift = c.trace() / d as f64;
    for k in 0..d {
        c[(k, k)] -= shift;
    }
    let v = zero_diagonal_basis(&c)?;

    let mut alice_basis = Vec::with_capacity(d);
    let mut bob_eta = Vec::with_capacity(d);
    let mut bob_nu = Vec::with_capacity(d);
    for k in 0..d {
        let mut a = CVector::zeros(p.alice_dim());
        let mut e = CVector::zeros(p.bob_dim());
        let mut n = CVector::zeros(p.bob_dim());
        for j in 0..d {
            a[alice_idx[j]] = v[(k, j)];
            e += &eta[j] * v[(k, j)].conj();
            n += &nu[j] * v[(k, j)].conj();
        }
        alice_basis.push(a);
        bob_eta.push(e);
        bob_nu.push(n);
    }
    Ok(WalgateDecomposition { partition: *p, subspace, alice_basis, bob_eta, bob_nu })
}
