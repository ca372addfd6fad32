//! Brute-force cross-checks for the closed-form error probabilities.
//!
//! Separable effects on the even sector split as `S = S_E + S_O`, so the best
//! separable bias is two independent eigenvalue problems. These routines use
//! the dense eigensolver on explicit submatrices and never touch the
//! rank-two shortcut used by [`crate::discrim`].

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::discrim::DeltaOperator;
use crate::error::{Error, Result};
use crate::fock::{SectorProjectors, Subspace};
use crate::linalg::{c64, hermitian_eigenvalues, positive_part_sum, submatrix, CMatrix};
use crate::protocol::shard_rng;
use crate::random::gaussian_matrix;

/// A separable-form effect `S_E + S_O` and its score `Tr[(S_E + S_O)Δ]`.
#[derive(Debug, Clone)]
pub struct SepEffectSample {
    pub s_e: CMatrix,
    pub s_o: CMatrix,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub sampled: f64,
    pub best_sep: f64,
    pub unconstrained: f64,
    pub trials: usize,
    pub seed: u64,
}

/// `max Tr[ΠΔ]` over separable `0 ≤ Π = Π_E + Π_O ≤ I`.
pub fn best_sep_value(d: &DeltaOperator, projectors: &SectorProjectors) -> Result<f64> {
    if !d.is_even_supported() {
        return Err(Error::WrongSector { expected: "even" });
    }
    if projectors.partition() != d.partition() {
        return Err(Error::PartitionMismatch);
    }
    Ok(Subspace::both()
        .iter()
        .map(|&s| {
            let idx = d.partition().subspace_indices(s);
            positive_part_sum(&submatrix(&d.matrix, &idx))
        })
        .sum())
}

/// `max Tr[ΠΔ]` over all `0 ≤ Π ≤ I`.
pub fn unconstrained_best_value(d: &DeltaOperator) -> f64 {
    positive_part_sum(&d.matrix)
}

fn embed(block: &CMatrix, idx: &[usize], dim: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            m[(i, j)] = block[(a, b)];
        }
    }
    m
}

fn sample_one<R: Rng>(rng: &mut R, d: &DeltaOperator, blocks: &[(Vec<usize>, CMatrix); 2]) -> SepEffectSample {
    let dim = d.partition().dim();
    let mut parts: Vec<CMatrix> = blocks
        .iter()
        .map(|(idx, _)| {
            let n = idx.len();
            let rank = rng.random_range(1..=n);
            let g = gaussian_matrix(rng, n, rank);
            &g * g.adjoint()
        })
        .collect();
    // Disjoint supports: λ_max of the sum is the larger block maximum.
    let lmax = parts
        .iter()
        .filter_map(|m| hermitian_eigenvalues(m).last().copied())
        .fold(0.0, f64::max);
    if lmax > 0.0 {
        let s = c64(1.0 / lmax, 0.0);
        for m in &mut parts {
            *m *= s;
        }
    }
    let score: f64 = parts.iter().zip(blocks).map(|(s, (_, delta))| (s * delta).trace().re).sum();
    SepEffectSample {
        s_e: embed(&parts[0], &blocks[0].0, dim),
        s_o: embed(&parts[1], &blocks[1].0, dim),
        score,
    }
}

/// Best score over `trials` random separable-form effects. Trial `i` draws
/// from its own stream, so the result does not depend on the thread count.
pub fn random_sep_sample(
    d: &DeltaOperator,
    projectors: &SectorProjectors,
    trials: usize,
    seed: u64,
) -> Result<SepEffectSample> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if !d.is_even_supported() {
        return Err(Error::WrongSector { expected: "even" });
    }
    if projectors.partition() != d.partition() {
        return Err(Error::PartitionMismatch);
    }
    let blocks = Subspace::both().map(|s| {
        let idx = d.partition().subspace_indices(s);
        let delta = submatrix(&d.matrix, &idx);
        (idx, delta)
    });
    let best = (0..trials)
        .into_par_iter()
        .map(|i| (i, sample_one(&mut shard_rng(seed, i as u64), d, &blocks)))
        .reduce_with(|a, b| if b.1.score > a.1.score || (b.1.score == a.1.score && b.0 < a.0) { b } else { a })
        .expect("at least one trial");
    Ok(best.1)
}

/// `random_sep_sample ≤ best_sep_value ≤ unconstrained_best_value`.
pub fn sandwich(d: &DeltaOperator, projectors: &SectorProjectors, trials: usize, seed: u64) -> Result<SandwichReport> {
    let sampled = random_sep_sample(d, projectors, trials, seed)?.score;
    Ok(SandwichReport {
        sampled,
        best_sep: best_sep_value(d, projectors)?,
        unconstrained: unconstrained_best_value(d),
        trials,
        seed,
    })
}
