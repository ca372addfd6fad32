//! Seeded generators for random states, instances and matrices.
//!
//! Used by the oracle, the test suites and the CLI. All amplitudes are
//! complex Gaussians, which makes normalized vectors Haar distributed on
//! whatever subspace they are drawn in.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::discrim::DiscriminationInstance;
use crate::error::Result;
use crate::fock::{FockVector, ModePartition, Parity, Subspace};
use crate::linalg::{c64, inner, CMatrix, CVector};
use num_complex::Complex64;

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Unnormalized Gaussian vector supported on `indices`.
fn gaussian_on<R: Rng + ?Sized>(rng: &mut R, dim: usize, indices: &[usize]) -> CVector {
    let mut v = CVector::zeros(dim);
    for &i in indices {
        v[i] = gaussian(rng);
    }
    v
}

pub fn random_state_in_sector<R: Rng + ?Sized>(rng: &mut R, p: ModePartition, sector: Parity) -> FockVector {
    let v = gaussian_on(rng, p.dim(), &p.sector_indices(sector));
    FockVector::new_in_sector(p, v.unscale(v.norm()), sector).expect("sector-supported vector")
}

pub fn random_even_state<R: Rng + ?Sized>(rng: &mut R, p: ModePartition) -> FockVector {
    random_state_in_sector(rng, p, Parity::Even)
}

/// Normalized state confined to the E or O subspace.
pub fn random_state_in_subspace<R: Rng + ?Sized>(rng: &mut R, p: ModePartition, s: Subspace) -> FockVector {
    let v = gaussian_on(rng, p.dim(), &p.subspace_indices(s));
    FockVector::new_in_sector(p, v.unscale(v.norm()), Parity::Even).expect("subspace-supported vector")
}

/// Two orthonormal vectors inside one subspace.
///
/// # Panics
/// If the subspace has dimension below two.
pub fn random_orthogonal_pair<R: Rng + ?Sized>(rng: &mut R, p: ModePartition, s: Subspace) -> (FockVector, FockVector) {
    let idx = p.subspace_indices(s);
    assert!(idx.len() >= 2, "subspace {s:?} of {p:?} has no room for an orthogonal pair");
    let a = gaussian_on(rng, p.dim(), &idx);
    let a = a.unscale(a.norm());
    let mut b = gaussian_on(rng, p.dim(), &idx);
    let ov = inner(&a, &b);
    b -= &a * ov;
    let b = b.unscale(b.norm());
    let wrap = |v: CVector| FockVector::new_in_sector(p, v, Parity::Even).expect("subspace-supported vector");
    (wrap(a), wrap(b))
}

/// Partition with `lo..=hi` modes on each side.
pub fn random_partition<R: Rng + ?Sized>(rng: &mut R, lo: usize, hi: usize) -> ModePartition {
    ModePartition::new(rng.random_range(lo..=hi), rng.random_range(lo..=hi)).expect("small partition")
}

pub fn random_prior<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(0.02..0.98)
}

/// Two independent even states and a random prior.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, p: ModePartition) -> DiscriminationInstance {
    let psi = random_even_state(rng, p);
    let phi = random_even_state(rng, p);
    DiscriminationInstance::new(psi, phi, random_prior(rng)).expect("normalized random states")
}

/// Instance at its critical prior: `φ ∝ d·ψ_E + c·ψ_O` with `c, d > 0`, so
/// the E/O commutators of both projectors are positively proportional.
pub fn critical_instance<R: Rng + ?Sized>(rng: &mut R, p: ModePartition) -> Result<DiscriminationInstance> {
    let psi = random_even_state(rng, p);
    let (pe, po) = (p.subspace_indices(Subspace::E), p.subspace_indices(Subspace::O));
    let part = |idx: &[usize]| {
        let mut v = CVector::zeros(p.dim());
        for &i in idx {
            v[i] = psi.amplitudes()[i];
        }
        v
    };
    let (e, o) = (part(&pe), part(&po));
    let d: f64 = rng.random_range(0.2..1.5);
    let c: f64 = rng.random_range(0.2..1.5);
    let phi = e.scale(d) + o.scale(c);
    let n = phi.norm();
    let phi = FockVector::new(p, phi.unscale(n))?;
    // [ψψ, P_E] = ψ_O ψ_E† − ψ_E ψ_O†, and the same for φ with weight cd/n².
    let r = n * n / (c * d);
    DiscriminationInstance::new(psi, phi, 1.0 / (1.0 + r))
}

/// Random complex matrix with its trace removed.
pub fn random_traceless<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let mut m = gaussian_matrix(rng, d, d);
    let shift = m.trace() / d as f64;
    for k in 0..d {
        m[(k, k)] -= shift;
    }
    m
}
