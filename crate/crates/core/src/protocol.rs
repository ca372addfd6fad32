//! Explicit two-round LOCC protocols and their stochastic simulation.
//!
//! Alice measures first and broadcasts her outcome label; Bob then measures
//! with a POVM chosen by that label and each of his outcomes carries the
//! final guess. Every local effect is block diagonal in local parity, so the
//! Jordan-Wigner image of `A ⊗ B` is a plain Kronecker product.

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomp::{sector_split, walgate_in_subspace};
use crate::discrim::{DeltaOperator, DiscriminabilityVerdict, DiscriminationInstance, VerdictCase};
use crate::error::{Error, Result};
use crate::fock::{bob_flip_local, FockVector, ModePartition, Parity, SectorProjectors, Subspace};
use crate::linalg::{hermitian_eigenvalues, inner, local_product, max_abs, outer, psd_sqrt, CMatrix, CVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Psi,
    Phi,
}

impl Decision {
    pub fn other(self) -> Self {
        match self {
            Decision::Psi => Decision::Phi,
            Decision::Phi => Decision::Psi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    /// Local parity measurements only.
    Parity,
    /// Sector-wise decomposition basis for Alice, binary orthogonal test for Bob.
    SectorBasis,
    /// Sector-wise eigenbasis of `Δ_E` and `Δ_O`, realized like `SectorBasis`.
    OptimalSector,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BobOutcome {
    pub decision: Decision,
    #[serde(with = "matrix_serde")]
    pub effect: CMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AliceOutcome {
    pub label: String,
    #[serde(with = "matrix_serde")]
    pub effect: CMatrix,
    /// Bob's POVM conditioned on this label.
    pub bob: Vec<BobOutcome>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoccProtocol {
    pub format: String,
    pub construction: Construction,
    pub modes: Modes,
    pub steps: Vec<String>,
    pub alice: Vec<AliceOutcome>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Modes {
    pub alice: usize,
    pub bob: usize,
}

pub const PROTOCOL_FORMAT: &str = "ferdisc-protocol/1";

const VECTOR_TOL: f64 = 1e-11;

impl LoccProtocol {
    fn new(partition: &ModePartition, construction: Construction, steps: Vec<String>, alice: Vec<AliceOutcome>) -> Self {
        LoccProtocol {
            format: PROTOCOL_FORMAT.to_string(),
            construction,
            modes: Modes { alice: partition.n_alice(), bob: partition.n_bob() },
            steps,
            alice,
        }
    }

    pub fn partition(&self) -> Result<ModePartition> {
        ModePartition::with_cap(self.modes.alice, self.modes.bob, self.modes.alice + self.modes.bob)
    }

    /// Completeness, positivity and local-parity block structure of every POVM.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedProtocol(m));
        if self.format != PROTOCOL_FORMAT {
            return bad(format!("unknown format {:?}", self.format));
        }
        let p = self.partition().map_err(|e| Error::MalformedProtocol(e.to_string()))?;
        let (da, db) = (p.alice_dim(), p.bob_dim());
        if self.alice.is_empty() {
            return bad("empty Alice POVM".into());
        }
        let check_effect = |m: &CMatrix, dim: usize, what: &str| -> Result<()> {
            if m.shape() != (dim, dim) {
                return Err(Error::MalformedProtocol(format!("{what}: wrong shape {:?}", m.shape())));
            }
            if max_abs(&(m - m.adjoint())) > tol {
                return Err(Error::MalformedProtocol(format!("{what}: not Hermitian")));
            }
            if hermitian_eigenvalues(m).first().is_some_and(|&x| x < -tol) {
                return Err(Error::MalformedProtocol(format!("{what}: not positive semidefinite")));
            }
            for i in 0..dim {
                for j in 0..dim {
                    if Parity::of_index(i) != Parity::of_index(j) && m[(i, j)].norm() > tol {
                        return Err(Error::MalformedProtocol(format!("{what}: mixes local parities")));
                    }
                }
            }
            Ok(())
        };
        let mut sum_a = CMatrix::zeros(da, da);
        for a in &self.alice {
            check_effect(&a.effect, da, &format!("Alice effect {}", a.label))?;
            sum_a += &a.effect;
            if a.bob.is_empty() {
                return bad(format!("empty Bob POVM after {}", a.label));
            }
            let mut sum_b = CMatrix::zeros(db, db);
            for b in &a.bob {
                check_effect(&b.effect, db, &format!("Bob effect after {}", a.label))?;
                sum_b += &b.effect;
            }
            if max_abs(&(sum_b - CMatrix::identity(db, db))) > tol {
                return bad(format!("Bob POVM after {} does not sum to identity", a.label));
            }
        }
        if max_abs(&(sum_a - CMatrix::identity(da, da))) > tol {
            return bad("Alice POVM does not sum to identity".into());
        }
        Ok(())
    }

    /// Global effect `Π_d = Σ_k Σ_{j: decision d} A_k ⊗ B_kj`.
    pub fn composed(&self, decision: Decision) -> CMatrix {
        let dim = (1usize << self.modes.alice) * (1usize << self.modes.bob);
        let mut acc = CMatrix::zeros(dim, dim);
        for a in &self.alice {
            for b in a.bob.iter().filter(|b| b.decision == decision) {
                acc += local_product(&a.effect, &b.effect);
            }
        }
        acc
    }

    /// `p⟨ψ|Π_φ|ψ⟩ + q⟨φ|Π_ψ|φ⟩`
    pub fn analytic_error(&self, instance: &DiscriminationInstance) -> f64 {
        let (psi, phi) = (instance.psi.amplitudes(), instance.phi.amplitudes());
        let pi_phi = self.composed(Decision::Phi);
        let pi_psi = self.composed(Decision::Psi);
        instance.prior_p * inner(psi, &(&pi_phi * psi)).re + instance.prior_q() * inner(phi, &(&pi_psi * phi)).re
    }

    /// Born probabilities of every `(alice, bob)` branch for a global state,
    /// Alice measured first with the Lüders update.
    pub fn branch_probabilities(&self, state: &CVector) -> Vec<Vec<f64>> {
        let db = 1usize << self.modes.bob;
        let id_b = CMatrix::identity(db, db);
        let da = 1usize << self.modes.alice;
        let id_a = CMatrix::identity(da, da);
        self.alice
            .iter()
            .map(|a| {
                let post = local_product(&psd_sqrt(&a.effect), &id_b) * state;
                a.bob
                    .iter()
                    .map(|b| inner(&post, &(local_product(&id_a, &b.effect) * &post)).re)
                    .collect()
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: LoccProtocol = serde_json::from_str(text)?;
        p.validate(1e-9)?;
        Ok(p)
    }
}

mod matrix_serde {
    use super::CMatrix;
    use num_complex::Complex64;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> =
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(D::Error::custom("ragged matrix"));
        }
        Ok(CMatrix::from_fn(n, m, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
    }
}

fn local_parity_projector(dim: usize, parity: Parity) -> CMatrix {
    let diag = CVector::from_fn(dim, |i, _| {
        if Parity::of_index(i) == parity {
            crate::linalg::ONE
        } else {
            crate::linalg::ZERO
        }
    });
    DMatrix::from_diagonal(&diag)
}

/// Both parties measure local parity; the guess is whichever state has the
/// observed global parity.
fn parity_protocol(p: &ModePartition, psi_sector: Parity) -> LoccProtocol {
    let (da, db) = (p.alice_dim(), p.bob_dim());
    let alice = [Parity::Even, Parity::Odd]
        .iter()
        .map(|&pa| AliceOutcome {
            label: format!("parity-{pa}"),
            effect: local_parity_projector(da, pa),
            bob: [Parity::Even, Parity::Odd]
                .iter()
                .map(|&pb| {
                    let global = if pa == pb { Parity::Even } else { Parity::Odd };
                    BobOutcome {
                        decision: if global == psi_sector { Decision::Psi } else { Decision::Phi },
                        effect: local_parity_projector(db, pb),
                    }
                })
                .collect(),
        })
        .collect();
    LoccProtocol::new(
        p,
        Construction::Parity,
        vec![
            "Alice and Bob measure their local parities".into(),
            "Alice sends her parity; the global parity selects the state".into(),
        ],
        alice,
    )
}

/// Sector-wise protocol separating `u_s` from `v_s` inside each subspace
/// (`u` guessed as ψ). A subspace with neither vector is decided by a fair coin.
fn sector_protocol(
    p: &ModePartition,
    pairs: [(Option<CVector>, Option<CVector>); 2],
    tol: f64,
) -> Result<Vec<AliceOutcome>> {
    let db = p.bob_dim();
    let id_b = CMatrix::identity(db, db);
    let mut out = Vec::with_capacity(p.alice_dim());
    for (s, (u, v)) in Subspace::both().into_iter().zip(pairs) {
        let coin = u.is_none() && v.is_none();
        let zero = CVector::zeros(p.dim());
        let u = u.unwrap_or_else(|| zero.clone());
        let v = v.unwrap_or(zero);
        let w = walgate_in_subspace(p, s, &u, &v, tol)?;
        for (k, a) in w.alice_basis.iter().enumerate() {
            let (eta, nu) = (&w.bob_eta[k], &w.bob_nu[k]);
            let bob = match (eta.norm() > VECTOR_TOL, nu.norm() > VECTOR_TOL) {
                (true, true) => {
                    let e = eta.unscale(eta.norm());
                    let proj = outer(&e, &e);
                    vec![
                        BobOutcome { decision: Decision::Psi, effect: proj.clone() },
                        BobOutcome { decision: Decision::Phi, effect: &id_b - proj },
                    ]
                }
                (true, false) => vec![BobOutcome { decision: Decision::Psi, effect: id_b.clone() }],
                (false, true) => vec![BobOutcome { decision: Decision::Phi, effect: id_b.clone() }],
                (false, false) if coin => vec![
                    BobOutcome { decision: Decision::Psi, effect: id_b.scale(0.5) },
                    BobOutcome { decision: Decision::Phi, effect: id_b.scale(0.5) },
                ],
                (false, false) => vec![BobOutcome { decision: Decision::Phi, effect: id_b.clone() }],
            };
            out.push(AliceOutcome { label: format!("{s}{k}"), effect: outer(a, a), bob });
        }
    }
    Ok(out)
}

fn conjugate_bob(protocol: &mut LoccProtocol, u: &CMatrix) {
    for a in &mut protocol.alice {
        for b in &mut a.bob {
            b.effect = u.adjoint() * &b.effect * u;
        }
    }
}

/// Zero-error protocol for a pair that the verdict declares perfectly
/// discriminable. The error is checked analytically before returning.
pub fn build_perfect_protocol(
    verdict: &DiscriminabilityVerdict,
    psi: &FockVector,
    phi: &FockVector,
    tol: f64,
) -> Result<LoccProtocol> {
    if !verdict.is_perfect() {
        return Err(Error::NotPerfectlyDiscriminable);
    }
    if psi.partition() != phi.partition() {
        return Err(Error::PartitionMismatch);
    }
    let p = *psi.partition();
    let protocol = if verdict.case == VerdictCase::DifferentGlobalParity {
        parity_protocol(&p, psi.sector())
    } else {
        let odd = psi.sector() == Parity::Odd;
        let (pe, fe) = (psi.to_even_sector(), phi.to_even_sector());
        let (a, b) = (sector_split(&pe)?, sector_split(&fe)?);
        let pairs = Subspace::both().map(|s| {
            (Some(a.component(s).amplitudes().clone()), Some(b.component(s).amplitudes().clone()))
        });
        let alice = sector_protocol(&p, pairs, tol)?;
        let construction = match verdict.case {
            VerdictCase::ComplementaryComponents => Construction::Parity,
            _ => Construction::SectorBasis,
        };
        let mut steps = vec![
            "Alice measures in a local basis of definite parity adapted to each of E and O".into(),
            "Bob, told Alice's outcome, separates two orthogonal local vectors".into(),
        ];
        if odd {
            steps.insert(0, "odd pair handled through a Bob-local parity flip".into());
        }
        let mut proto = LoccProtocol::new(&p, construction, steps, alice);
        if odd {
            conjugate_bob(&mut proto, &bob_flip_local(&p));
        }
        proto
    };
    let instance = DiscriminationInstance::new(psi.clone(), phi.clone(), 0.5)?;
    let err = protocol.analytic_error(&instance);
    if err.abs() > tol {
        return Err(Error::NonConvergence(format!("perfect protocol has analytic error {err:e}")));
    }
    Ok(protocol)
}

/// Which protocol [`build_protocol`] constructs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ProtocolKind {
    /// Zero-error protocol when available, otherwise the optimal LOCC one.
    Auto,
    Perfect,
    Optimal,
}

/// Protocol for a pair of states at prior `p` for `ψ`.
///
/// `Optimal` falls back to the perfect construction when the states have
/// different global parity, where the optimal LOCC error is zero anyway.
pub fn build_protocol(psi: &FockVector, phi: &FockVector, prior: f64, kind: ProtocolKind, tol: f64) -> Result<LoccProtocol> {
    let perfect = || -> Result<LoccProtocol> {
        let verdict = crate::discrim::classify_perfect(psi, phi, tol)?;
        build_perfect_protocol(&verdict, psi, phi, tol)
    };
    let optimal = || -> Result<LoccProtocol> {
        let inst = DiscriminationInstance::new(psi.clone(), phi.clone(), prior)?;
        if psi.sector() != phi.sector() {
            return perfect();
        }
        let d = crate::discrim::delta(&inst);
        if !d.is_even_supported() {
            return Err(Error::WrongSector { expected: "even (map odd pairs with the perfect protocol)" });
        }
        build_optimal_locc_protocol(&d, &crate::fock::sector_projectors(psi.partition()), tol)
    };
    match kind {
        ProtocolKind::Perfect => perfect(),
        ProtocolKind::Optimal => optimal(),
        ProtocolKind::Auto => {
            let orthogonal = psi.inner(phi).norm() < tol;
            if orthogonal && crate::discrim::classify_perfect(psi, phi, tol)?.is_perfect() {
                perfect()
            } else {
                optimal()
            }
        }
    }
}

/// LOCC realization of the measurement in the eigenbases of `Δ_E` and `Δ_O`.
pub fn build_optimal_locc_protocol(
    d: &DeltaOperator,
    projectors: &SectorProjectors,
    tol: f64,
) -> Result<LoccProtocol> {
    d.require_even()?;
    if projectors.partition() != d.partition() {
        return Err(Error::PartitionMismatch);
    }
    let pairs = Subspace::both().map(|s| {
        let eig = d.compression_eigen(projectors, s);
        let plus = (eig.lambda_plus > tol).then(|| eig.plus.clone());
        let minus = (eig.lambda_minus < -tol).then(|| eig.minus.clone());
        (plus, minus)
    });
    let alice = sector_protocol(d.partition(), pairs, tol)?;
    Ok(LoccProtocol::new(
        d.partition(),
        Construction::OptimalSector,
        vec![
            "Alice measures in a local basis of definite parity adapted to the eigenvectors of Δ_E and Δ_O".into(),
            "Bob separates the positive from the negative eigenvector; a sector with Δ_s = 0 is a coin flip".into(),
        ],
        alice,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub shots: u64,
    pub errors: u64,
    pub empirical_error: f64,
    pub std_err: f64,
    pub seed: u64,
}

impl SimulationReport {
    fn from_counts(shots: u64, errors: u64, seed: u64) -> Self {
        let e = errors as f64 / shots as f64;
        SimulationReport { shots, errors, empirical_error: e, std_err: (e * (1.0 - e) / shots as f64).sqrt(), seed }
    }
}

/// Shots per independently seeded shard.
pub const SHARD_SHOTS: u64 = 4096;

/// RNG for shard `index` of a run seeded with `seed`.
pub fn shard_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

struct Sampler {
    alice: Option<WeightedIndex<f64>>,
    bob: Vec<Option<WeightedIndex<f64>>>,
    wrong: Vec<Vec<bool>>,
}

impl Sampler {
    fn new(protocol: &LoccProtocol, state: &CVector, truth: Decision) -> Self {
        let probs = protocol.branch_probabilities(state);
        let alice_w: Vec<f64> = probs.iter().map(|row| row.iter().map(|x| x.max(0.0)).sum()).collect();
        let bob = probs
            .iter()
            .map(|row| WeightedIndex::new(row.iter().map(|x| x.max(0.0))).ok())
            .collect();
        let wrong = protocol.alice.iter().map(|a| a.bob.iter().map(|b| b.decision != truth).collect()).collect();
        Sampler { alice: WeightedIndex::new(alice_w).ok(), bob, wrong }
    }

    fn shot<R: Rng>(&self, rng: &mut R) -> bool {
        let Some(alice) = &self.alice else { return false };
        let k = alice.sample(rng);
        match &self.bob[k] {
            Some(bob) => self.wrong[k][bob.sample(rng)],
            None => false,
        }
    }
}

/// Monte Carlo run of `protocol` on `instance`. Deterministic for a given seed,
/// independent of the thread count.
pub fn simulate(
    protocol: &LoccProtocol,
    instance: &DiscriminationInstance,
    shots: u64,
    seed: u64,
) -> Result<SimulationReport> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    protocol.validate(1e-9)?;
    if protocol.partition()? != *instance.partition() {
        return Err(Error::PartitionMismatch);
    }
    let samplers = [
        Sampler::new(protocol, instance.psi.amplitudes(), Decision::Psi),
        Sampler::new(protocol, instance.phi.amplitudes(), Decision::Phi),
    ];
    let p = instance.prior_p;
    let shards = shots.div_ceil(SHARD_SHOTS);
    let errors: u64 = (0..shards)
        .into_par_iter()
        .map(|index| {
            let mut rng = shard_rng(seed, index);
            let n = SHARD_SHOTS.min(shots - index * SHARD_SHOTS);
            (0..n)
                .filter(|_| {
                    let truth = if rng.random::<f64>() < p { 0 } else { 1 };
                    samplers[truth].shot(&mut rng)
                })
                .count() as u64
        })
        .sum();
    Ok(SimulationReport::from_counts(shots, errors, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrim::{attach_ancilla, classify_perfect, delta, locc_error};
    use crate::fock::{make_state, sector_projectors};
    use crate::linalg::{c64, ONE};
    use std::f64::consts::FRAC_1_SQRT_2 as H;

    fn p22() -> ModePartition {
        ModePartition::new(2, 2).unwrap()
    }

    fn basis(bits: &str) -> FockVector {
        make_state(p22(), &[(bits, ONE)], false).unwrap()
    }

    fn pm_pair() -> (FockVector, FockVector) {
        let psi = make_state(p22(), &[("0000", c64(H, 0.0)), ("0101", c64(H, 0.0))], true).unwrap();
        let phi = make_state(p22(), &[("0000", c64(H, 0.0)), ("0101", c64(-H, 0.0))], true).unwrap();
        (psi, phi)
    }

    fn perfect(psi: &FockVector, phi: &FockVector) -> LoccProtocol {
        let v = classify_perfect(psi, phi, 1e-10).unwrap();
        let proto = build_perfect_protocol(&v, psi, phi, 1e-10).unwrap();
        proto.validate(1e-10).unwrap();
        proto
    }

    #[test]
    fn parity_protocol_for_different_parity() {
        let (psi, _) = pm_pair();
        let phi = basis("1000");
        let proto = perfect(&psi, &phi);
        assert_eq!(proto.construction, Construction::Parity);
        let inst = DiscriminationInstance::new(psi, phi, 0.3).unwrap();
        assert!(proto.analytic_error(&inst).abs() < 1e-12);
        let rep = simulate(&proto, &inst, 20_000, 1).unwrap();
        assert_eq!(rep.errors, 0);
    }

    #[test]
    fn disjoint_supports_use_parity() {
        let proto = perfect(&basis("0000"), &basis("0101"));
        assert_eq!(proto.construction, Construction::Parity);
    }

    #[test]
    fn odd_pair_goes_through_flip() {
        let psi = make_state(p22(), &[("1000", c64(H, 0.0)), ("0100", c64(H, 0.0))], false).unwrap();
        let phi = make_state(p22(), &[("1000", c64(H, 0.0)), ("0100", c64(-H, 0.0))], false).unwrap();
        let proto = perfect(&psi, &phi);
        let inst = DiscriminationInstance::new(psi, phi, 0.5).unwrap();
        assert!(proto.analytic_error(&inst).abs() < 1e-12);
    }

    #[test]
    fn ancilla_pm_pair_full_protocol() {
        let (psi, phi) = pm_pair();
        let h = c64(H, 0.0);
        let (pa, fa) = (attach_ancilla(&psi, h, h).unwrap(), attach_ancilla(&phi, h, h).unwrap());
        let proto = perfect(&pa, &fa);
        assert_eq!(proto.construction, Construction::SectorBasis);
        let inst = DiscriminationInstance::new(pa, fa, 0.5).unwrap();
        assert!(proto.analytic_error(&inst).abs() < 1e-10);
    }

    #[test]
    fn not_perfect_is_rejected() {
        let (psi, phi) = pm_pair();
        let v = classify_perfect(&psi, &phi, 1e-10).unwrap();
        assert!(matches!(build_perfect_protocol(&v, &psi, &phi, 1e-10), Err(Error::NotPerfectlyDiscriminable)));
    }

    #[test]
    fn optimal_protocol_on_pm_pair_is_a_coin() {
        let (psi, phi) = pm_pair();
        let inst = DiscriminationInstance::new(psi, phi, 0.5).unwrap();
        let d = delta(&inst);
        let sp = sector_projectors(&p22());
        let proto = build_optimal_locc_protocol(&d, &sp, 1e-10).unwrap();
        proto.validate(1e-10).unwrap();
        assert!((proto.analytic_error(&inst) - 0.5).abs() < 1e-12);
        assert!((locc_error(&d, &sp).unwrap() - 0.5).abs() < 1e-12);
        let rep = simulate(&proto, &inst, 100_000, 7).unwrap();
        assert!((rep.empirical_error - 0.5).abs() <= 3.0 * rep.std_err);
    }

    #[test]
    fn branch_probabilities_sum_to_one() {
        let (psi, phi) = pm_pair();
        let inst = DiscriminationInstance::new(psi, phi, 0.4).unwrap();
        let sp = sector_projectors(&p22());
        let proto = build_optimal_locc_protocol(&delta(&inst), &sp, 1e-10).unwrap();
        for s in [inst.psi.amplitudes(), inst.phi.amplitudes()] {
            let probs = proto.branch_probabilities(s);
            let total: f64 = probs.iter().flatten().sum();
            assert!((total - 1.0).abs() < 1e-10);
            assert!(probs.iter().flatten().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)));
        }
    }

    #[test]
    fn simulation_is_deterministic_and_validated() {
        let (psi, phi) = pm_pair();
        let inst = DiscriminationInstance::new(psi, phi, 0.5).unwrap();
        let sp = sector_projectors(&p22());
        let proto = build_optimal_locc_protocol(&delta(&inst), &sp, 1e-10).unwrap();
        let a = simulate(&proto, &inst, 10_000, 42).unwrap();
        let b = simulate(&proto, &inst, 10_000, 42).unwrap();
        assert_eq!(a, b);
        assert!(simulate(&proto, &inst, 0, 42).is_err());

        let mut broken = proto.clone();
        broken.alice[0].effect *= c64(2.0, 0.0);
        assert!(matches!(simulate(&broken, &inst, 10, 1), Err(Error::MalformedProtocol(_))));
    }

    #[test]
    fn json_round_trip() {
        let (psi, phi) = pm_pair();
        let h = c64(H, 0.0);
        let (pa, fa) = (attach_ancilla(&psi, h, h).unwrap(), attach_ancilla(&phi, h, h).unwrap());
        let proto = perfect(&pa, &fa);
        let text = proto.to_json().unwrap();
        let back = LoccProtocol::from_json(&text).unwrap();
        assert_eq!(back.alice.len(), proto.alice.len());
        let inst = DiscriminationInstance::new(pa, fa, 0.5).unwrap();
        assert!(back.analytic_error(&inst).abs() < 1e-10);
        assert!(LoccProtocol::from_json("{\"format\": 3}").is_err());
    }
}
