//! Discriminability criteria and error probabilities.
//!
//! `Δ = p|ψ⟩⟨ψ| − q|φ⟩⟨φ|` drives everything here: its trace norm gives the
//! unconstrained (Helstrom) error, the trace norm of its compressions onto the
//! E and O subspaces gives the best error reachable with separable, and
//! hence LOCC, measurements.

use num_complex::Complex64;
use serde::Serialize;

use crate::decomp::sector_split;
use crate::error::{Error, Result};
use crate::fock::{apply_creation, FockVector, ModePartition, Parity, SectorProjectors, Subspace, AMPLITUDE_TOL};
use crate::linalg::{commutator, inner, outer, CMatrix, CVector, Rank2Eigen, ZERO};

/// Two normalized states on one partition and the prior of the first.
#[derive(Debug, Clone)]
pub struct DiscriminationInstance {
    pub psi: FockVector,
    pub phi: FockVector,
    pub prior_p: f64,
}

impl DiscriminationInstance {
    pub fn new(psi: FockVector, phi: FockVector, prior_p: f64) -> Result<Self> {
        if psi.partition() != phi.partition() {
            return Err(Error::PartitionMismatch);
        }
        psi.require_normalized()?;
        phi.require_normalized()?;
        if !(prior_p > 0.0 && prior_p < 1.0) {
            return Err(Error::InvalidPrior(prior_p));
        }
        Ok(DiscriminationInstance { psi, phi, prior_p })
    }

    pub fn prior_q(&self) -> f64 {
        1.0 - self.prior_p
    }

    pub fn partition(&self) -> &ModePartition {
        self.psi.partition()
    }

    /// Same instance with both states in the even sector. Odd pairs are
    /// mapped by the Bob-local parity flip; mixed-parity pairs are rejected.
    pub fn even_form(&self) -> Result<Self> {
        match (self.psi.sector(), self.phi.sector()) {
            (Parity::Even, Parity::Even) => Ok(self.clone()),
            (Parity::Odd, Parity::Odd) => Ok(DiscriminationInstance {
                psi: self.psi.to_even_sector(),
                phi: self.phi.to_even_sector(),
                prior_p: self.prior_p,
            }),
            _ => Err(Error::WrongSector { expected: "even (both states)" }),
        }
    }
}

/// `Δ = p|ψ⟩⟨ψ| − q|φ⟩⟨φ|` with its two extremal eigenpairs.
#[derive(Debug, Clone)]
pub struct DeltaOperator {
    partition: ModePartition,
    prior_p: f64,
    psi: CVector,
    phi: CVector,
    even: bool,
    pub matrix: CMatrix,
    pub eigen: Rank2Eigen,
}

impl DeltaOperator {
    /// Build from weights `p` and `1 − p`, `p ∈ [0, 1]`.
    pub fn from_weights(psi: &FockVector, phi: &FockVector, p: f64) -> Result<Self> {
        if psi.partition() != phi.partition() {
            return Err(Error::PartitionMismatch);
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidPrior(p));
        }
        let q = 1.0 - p;
        let (u, v) = (psi.amplitudes().clone(), phi.amplitudes().clone());
        let matrix = outer(&u, &u).scale(p) - outer(&v, &v).scale(q);
        let eigen = Rank2Eigen::new(p, &u, q, &v);
        Ok(DeltaOperator {
            partition: *psi.partition(),
            prior_p: p,
            even: psi.sector() == Parity::Even && phi.sector() == Parity::Even,
            psi: u,
            phi: v,
            matrix,
            eigen,
        })
    }

    pub fn partition(&self) -> &ModePartition {
        &self.partition
    }

    pub fn prior_p(&self) -> f64 {
        self.prior_p
    }

    pub fn prior_q(&self) -> f64 {
        1.0 - self.prior_p
    }

    pub fn psi(&self) -> &CVector {
        &self.psi
    }

    pub fn phi(&self) -> &CVector {
        &self.phi
    }

    pub fn lambda_plus(&self) -> f64 {
        self.eigen.lambda_plus
    }

    pub fn lambda_minus(&self) -> f64 {
        self.eigen.lambda_minus
    }

    pub fn trace_norm(&self) -> f64 {
        self.eigen.trace_norm()
    }

    pub fn is_even_supported(&self) -> bool {
        self.even
    }

    pub(crate) fn require_even(&self) -> Result<()> {
        if self.even {
            Ok(())
        } else {
            Err(Error::WrongSector { expected: "even" })
        }
    }

    /// Eigen-decomposition of `Δ_s = P_s Δ P_s` through the same rank-two route.
    pub fn compression_eigen(&self, projectors: &SectorProjectors, s: Subspace) -> Rank2Eigen {
        let u = projectors.project(&self.psi, s);
        let v = projectors.project(&self.phi, s);
        Rank2Eigen::new(self.prior_p, &u, self.prior_q(), &v)
    }

    /// `Δ_E + Δ_O` as a dense matrix.
    pub fn sector_diagonal(&self, projectors: &SectorProjectors) -> CMatrix {
        projectors.compress(&self.matrix, Subspace::E) + projectors.compress(&self.matrix, Subspace::O)
    }
}

pub fn delta(instance: &DiscriminationInstance) -> DeltaOperator {
    DeltaOperator::from_weights(&instance.psi, &instance.phi, instance.prior_p)
        .expect("instance invariants guarantee a valid operator")
}

/// `½(1 − ‖Δ‖₁)`
pub fn helstrom_error(d: &DeltaOperator) -> f64 {
    (0.5 * (1.0 - d.trace_norm())).max(0.0)
}

/// `½(1 − ‖Δ_E + Δ_O‖₁)`; requires `Δ` supported in the even sector.
pub fn locc_error(d: &DeltaOperator, projectors: &SectorProjectors) -> Result<f64> {
    d.require_even()?;
    if projectors.partition() != d.partition() {
        return Err(Error::PartitionMismatch);
    }
    let norm: f64 = Subspace::both()
        .iter()
        .map(|&s| d.compression_eigen(projectors, s).trace_norm())
        .sum();
    Ok((0.5 * (1.0 - norm)).max(0.0))
}

/// Frobenius norm of `[M, P_E]` via the off-diagonal E / non-E blocks.
fn commutator_with_pe(m: &CMatrix, p: &ModePartition) -> f64 {
    let in_e: Vec<bool> = (0..p.dim()).map(|i| p.subspace_of(i) == Some(Subspace::E)).collect();
    let mut acc = 0.0;
    for i in 0..p.dim() {
        for j in 0..p.dim() {
            if in_e[i] != in_e[j] {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// The three forms of the LOCC optimality condition, each with its residual.
#[derive(Debug, Clone, Serialize)]
pub struct OptimalityReport {
    /// `‖[Δ, P_E]‖_F / ‖Δ‖_F`
    pub commutator_residual: f64,
    /// `max(|⟨+_E|−_E⟩|, |⟨+_O|−_O⟩|)`
    pub eigvec_sector_residual: f64,
    /// `|⟨+|(P_E − P_O)|−⟩|`
    pub parity_contrast_residual: f64,
    pub commutes: bool,
    pub eigvec_sectors_orthogonal: bool,
    pub parity_contrast_vanishes: bool,
}

impl OptimalityReport {
    /// The eigenvector form: exactly the condition that the LOCC error equals
    /// the Helstrom error. Commutation with `P_E` implies it but is not needed.
    pub fn locc_optimal(&self) -> bool {
        self.eigvec_sectors_orthogonal && self.parity_contrast_vanishes
    }

    pub fn all_agree(&self) -> bool {
        self.commutes == self.eigvec_sectors_orthogonal && self.commutes == self.parity_contrast_vanishes
    }
}

pub fn optimality_report(d: &DeltaOperator, projectors: &SectorProjectors, tol: f64) -> OptimalityReport {
    let fro = d.matrix.norm();
    let commutator_residual = if fro == 0.0 { 0.0 } else { commutator_with_pe(&d.matrix, d.partition()) / fro };

    // The eigenvector conditions only constrain a genuinely two-sided Δ.
    let scale = d.trace_norm();
    let two_sided = scale > 0.0 && d.lambda_plus() > tol * scale && -d.lambda_minus() > tol * scale;
    let (mut sector_res, mut contrast_res) = (0.0, 0.0);
    if two_sided {
        let (plus, minus) = (&d.eigen.plus, &d.eigen.minus);
        let on = |s: Subspace| inner(&projectors.project(plus, s), &projectors.project(minus, s));
        let (e, o) = (on(Subspace::E), on(Subspace::O));
        sector_res = e.norm().max(o.norm());
        contrast_res = (e - o).norm();
    }
    OptimalityReport {
        commutator_residual,
        eigvec_sector_residual: sector_res,
        parity_contrast_residual: contrast_res,
        commutes: commutator_residual < tol,
        eigvec_sectors_orthogonal: sector_res < tol,
        parity_contrast_vanishes: contrast_res < tol,
    }
}

/// Whether unassisted LOCC reaches the Helstrom error: `⟨+|(P_E − P_O)|−⟩ = 0`
/// for the eigenvectors of the two nonzero eigenvalues of `Δ` (automatically
/// true when `Δ` has only one sign).
pub fn is_locc_optimal(d: &DeltaOperator, projectors: &SectorProjectors, tol: f64) -> bool {
    optimality_report(d, projectors, tol).locc_optimal()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "p", rename_all = "kebab-case")]
pub enum CriticalPrior {
    /// Both projectors commute with `P_E`: every prior is LOCC-optimal.
    AllPriors,
    Unique(f64),
    /// No prior makes unassisted LOCC optimal.
    None,
}

/// Prior solving `[ψψ†, P_E] = ((1−p)/p)·[φφ†, P_E]`.
pub fn critical_prior(psi: &FockVector, phi: &FockVector, tol: f64) -> Result<CriticalPrior> {
    if psi.partition() != phi.partition() {
        return Err(Error::PartitionMismatch);
    }
    let p = psi.partition();
    let dim = p.dim();
    let mut pe = CMatrix::zeros(dim, dim);
    for i in p.subspace_indices(Subspace::E) {
        pe[(i, i)] = Complex64::new(1.0, 0.0);
    }
    let proj = |v: &FockVector| outer(v.amplitudes(), v.amplitudes());
    let c_psi = commutator(&proj(psi), &pe);
    let c_phi = commutator(&proj(phi), &pe);
    let (n_psi, n_phi) = (c_psi.norm(), c_phi.norm());
    if n_psi < tol && n_phi < tol {
        return Ok(CriticalPrior::AllPriors);
    }
    if n_psi < tol || n_phi < tol {
        return Ok(CriticalPrior::None);
    }
    let pivot = (0..dim * dim).fold(0, |best, k| if c_phi[k].norm() > c_phi[best].norm() { k } else { best });
    let ratio = c_psi[pivot] / c_phi[pivot];
    if ratio.im.abs() > tol * ratio.norm().max(1.0) || ratio.re <= 0.0 {
        return Ok(CriticalPrior::None);
    }
    let r = ratio.re;
    if (&c_psi - c_phi.scale(r)).norm() > tol * n_psi.max(1.0) {
        return Ok(CriticalPrior::None);
    }
    Ok(CriticalPrior::Unique(1.0 / (1.0 + r)))
}

/// Which case of the perfect-discrimination analysis applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictCase {
    DifferentGlobalParity,
    ComplementaryComponents,
    SingleSubspace,
    OneNullComponent,
    EoOrthogonal,
    NotPerfectlyLocc,
}

impl VerdictCase {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictCase::DifferentGlobalParity => "different-global-parity",
            VerdictCase::ComplementaryComponents => "complementary-components",
            VerdictCase::SingleSubspace => "single-subspace",
            VerdictCase::OneNullComponent => "one-null-component",
            VerdictCase::EoOrthogonal => "eo-orthogonal",
            VerdictCase::NotPerfectlyLocc => "not-perfectly-locc",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscriminabilityVerdict {
    pub case: VerdictCase,
    #[serde(serialize_with = "ser_complex")]
    pub sigma_e: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub sigma_o: Complex64,
    /// Vanishing flags for `[ψ_E, ψ_O, φ_E, φ_O]` (all false for different global parity).
    pub null_components: [bool; 4],
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

impl DiscriminabilityVerdict {
    pub fn is_perfect(&self) -> bool {
        self.case != VerdictCase::NotPerfectlyLocc
    }
}

/// Classify a pair of orthogonal normalized states.
pub fn classify_perfect(psi: &FockVector, phi: &FockVector, tol: f64) -> Result<DiscriminabilityVerdict> {
    if psi.partition() != phi.partition() {
        return Err(Error::PartitionMismatch);
    }
    psi.require_normalized()?;
    phi.require_normalized()?;
    let overlap = psi.inner(phi).norm();
    if overlap >= tol {
        return Err(Error::NotOrthogonal { overlap });
    }
    if psi.sector() != phi.sector() {
        return Ok(DiscriminabilityVerdict {
            case: VerdictCase::DifferentGlobalParity,
            sigma_e: ZERO,
            sigma_o: ZERO,
            null_components: [false; 4],
        });
    }
    let (psi, phi) = (psi.to_even_sector(), phi.to_even_sector());
    let a = sector_split(&psi)?;
    let b = sector_split(&phi)?;
    let sigma_e = a.psi_e.inner(&b.psi_e);
    let sigma_o = a.psi_o.inner(&b.psi_o);
    let null = [a.norm_e <= tol, a.norm_o <= tol, b.norm_e <= tol, b.norm_o <= tol];
    let nulls = null.iter().filter(|x| **x).count();

    let case = if nulls == 2 {
        // Normalized states keep at least one component each.
        let psi_sub = if null[0] { Subspace::O } else { Subspace::E };
        let phi_sub = if null[2] { Subspace::O } else { Subspace::E };
        if psi_sub != phi_sub {
            VerdictCase::ComplementaryComponents
        } else {
            VerdictCase::SingleSubspace
        }
    } else if nulls == 1 {
        VerdictCase::OneNullComponent
    } else if sigma_e.norm() < tol && sigma_o.norm() < tol {
        VerdictCase::EoOrthogonal
    } else {
        VerdictCase::NotPerfectlyLocc
    };
    Ok(DiscriminabilityVerdict { case, sigma_e, sigma_o, null_components: null })
}

/// `ψ ⊗ (a|00⟩ + b|11⟩)` with one new mode appended to each party's block.
///
/// Built as `(a + b·φ†_{A'} φ†_{B'})` acting on the embedded state, so the
/// Jordan-Wigner reordering signs come out of the operator algebra.
pub fn attach_ancilla(psi: &FockVector, a: Complex64, b: Complex64) -> Result<FockVector> {
    let weight = a.norm_sqr() + b.norm_sqr();
    if (weight - 1.0).abs() > AMPLITUDE_TOL {
        return Err(Error::AncillaNotNormalized(weight));
    }
    let old = psi.partition();
    let new = old.with_ancilla()?;
    let mut embedded = CVector::zeros(new.dim());
    for (idx, amp) in psi.amplitudes().iter().enumerate() {
        let (alice, bob) = old.split(idx);
        // Both ancilla modes are the last of their party's block and start empty.
        embedded[new.join(alice, bob)] = *amp;
    }
    let alice_anc = old.n_alice();
    let bob_anc = new.modes() - 1;
    let pair = apply_creation(alice_anc, &apply_creation(bob_anc, &embedded));
    let out = &embedded * a + pair * b;
    FockVector::new_in_sector(new, out, psi.sector())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{make_state, sector_projectors};
    use crate::linalg::{c64, hermitian_eigenvalues, max_abs, ONE};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2 as H;

    fn p22() -> ModePartition {
        ModePartition::new(2, 2).unwrap()
    }

    fn pm_pair() -> (FockVector, FockVector) {
        let psi = make_state(p22(), &[("0000", c64(H, 0.0)), ("0101", c64(H, 0.0))], true).unwrap();
        let phi = make_state(p22(), &[("0000", c64(H, 0.0)), ("0101", c64(-H, 0.0))], true).unwrap();
        (psi, phi)
    }

    fn basis(bits: &str) -> FockVector {
        make_state(p22(), &[(bits, ONE)], false).unwrap()
    }

    #[test]
    fn verdict_cases() {
        let (psi, phi) = pm_pair();
        let v = classify_perfect(&psi, &phi, 1e-10).unwrap();
        assert_eq!(v.case, VerdictCase::NotPerfectlyLocc);
        assert!((v.sigma_e - c64(0.5, 0.0)).norm() < 1e-12);

        let odd = basis("1000");
        assert_eq!(classify_perfect(&psi, &odd, 1e-10).unwrap().case, VerdictCase::DifferentGlobalParity);

        let v = classify_perfect(&basis("0000"), &basis("0101"), 1e-10).unwrap();
        assert_eq!(v.case, VerdictCase::ComplementaryComponents);
        let v = classify_perfect(&basis("0000"), &basis("1111"), 1e-10).unwrap();
        assert_eq!(v.case, VerdictCase::SingleSubspace);

        // ψ has both components, φ only an O component orthogonal to ψ_O.
        let psi = make_state(p22(), &[("0000", c64(H, 0.0)), ("0101", c64(H, 0.0))], true).unwrap();
        let phi = basis("1010");
        assert_eq!(classify_perfect(&psi, &phi, 1e-10).unwrap().case, VerdictCase::OneNullComponent);

        // Four nonzero components, separately orthogonal.
        let psi = make_state(p22(), &[("0000", c64(H, 0.0)), ("0101", c64(H, 0.0))], true).unwrap();
        let phi = make_state(p22(), &[("1111", c64(H, 0.0)), ("1010", c64(H, 0.0))], true).unwrap();
        assert_eq!(classify_perfect(&psi, &phi, 1e-10).unwrap().case, VerdictCase::EoOrthogonal);

        let a = make_state(p22(), &[("0000", c64(0.6, 0.0)), ("1100", c64(0.8, 0.0))], false).unwrap();
        assert!(matches!(classify_perfect(&a, &basis("0000"), 1e-10), Err(Error::NotOrthogonal { .. })));
    }

    #[test]
    fn delta_orthogonal_half() {
        let inst = DiscriminationInstance::new(basis("0000"), basis("1111"), 0.5).unwrap();
        let d = delta(&inst);
        assert_abs_diff_eq!(d.lambda_plus(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.lambda_minus(), -0.5, epsilon = 1e-15);
        assert!((d.eigen.plus.clone() - inst.psi.amplitudes()).norm() < 1e-12);
        assert_abs_diff_eq!(helstrom_error(&d), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn delta_identical_states_cancel() {
        let (psi, _) = pm_pair();
        let d = delta(&DiscriminationInstance::new(psi.clone(), psi.clone(), 0.5).unwrap());
        assert!(max_abs(&d.matrix) < 1e-15);
        assert_abs_diff_eq!(helstrom_error(&d), 0.5, epsilon = 1e-15);
        let d = delta(&DiscriminationInstance::new(psi.clone(), psi, 0.7).unwrap());
        assert_abs_diff_eq!(helstrom_error(&d), 0.5 * (1.0 - 0.4), epsilon = 1e-15);
    }

    #[test]
    fn delta_eigenvalues_against_dense_solver() {
        // |⟨ψ|φ⟩| = 0.5 inside the E subspace.
        let psi = basis("0000");
        let s3 = 3f64.sqrt() / 2.0;
        let phi = make_state(p22(), &[("0000", c64(0.5, 0.0)), ("1111", c64(0.0, s3))], false).unwrap();
        let d = delta(&DiscriminationInstance::new(psi, phi, 0.6).unwrap());
        let ev = hermitian_eigenvalues(&d.matrix);
        assert_abs_diff_eq!(d.lambda_plus(), ev[ev.len() - 1], epsilon = 1e-12);
        assert_abs_diff_eq!(d.lambda_minus(), ev[0], epsilon = 1e-12);
        // Gram-basis 2×2: trace p − q, determinant −pq(1 − |s|²).
        let disc = (0.2f64 * 0.2 + 4.0 * 0.24 * 0.75).sqrt();
        assert_abs_diff_eq!(d.lambda_plus(), 0.5 * (0.2 + disc), epsilon = 1e-12);
        assert_abs_diff_eq!(d.lambda_minus(), 0.5 * (0.2 - disc), epsilon = 1e-12);
    }

    #[test]
    fn pm_pair_locc_is_guessing() {
        let (psi, phi) = pm_pair();
        let d = delta(&DiscriminationInstance::new(psi, phi, 0.5).unwrap());
        let sp = sector_projectors(&p22());
        assert_abs_diff_eq!(helstrom_error(&d), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(locc_error(&d, &sp).unwrap(), 0.5, epsilon = 1e-12);
        assert!(!is_locc_optimal(&d, &sp, 1e-10));
    }

    #[test]
    fn sector_eigenstates_are_optimal_for_all_priors() {
        let sp = sector_projectors(&p22());
        for p in [0.1, 0.5, 0.83] {
            let d = delta(&DiscriminationInstance::new(basis("0000"), basis("0101"), p).unwrap());
            let rep = optimality_report(&d, &sp, 1e-10);
            assert!(rep.commutes && rep.all_agree());
            assert_abs_diff_eq!(locc_error(&d, &sp).unwrap(), helstrom_error(&d), epsilon = 1e-12);
        }
        assert_eq!(critical_prior(&basis("0000"), &basis("1111"), 1e-10).unwrap(), CriticalPrior::AllPriors);
    }

    #[test]
    fn zero_delta_locc_error_half() {
        let (psi, _) = pm_pair();
        let d = delta(&DiscriminationInstance::new(psi.clone(), psi, 0.5).unwrap());
        assert_abs_diff_eq!(locc_error(&d, &sector_projectors(&p22())).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn locc_error_rejects_odd_support() {
        let d = DeltaOperator::from_weights(&basis("1000"), &basis("0100"), 0.5).unwrap();
        assert!(locc_error(&d, &sector_projectors(&p22())).is_err());
    }

    #[test]
    fn rank_one_non_commuting_delta_is_still_locc_optimal() {
        // Δ = 0.4·|ψ⟩⟨ψ| with ψ straddling E and O: the commutator test fails,
        // but guessing ψ always already reaches the Helstrom error.
        let (psi, _) = pm_pair();
        let d = delta(&DiscriminationInstance::new(psi.clone(), psi, 0.7).unwrap());
        let sp = sector_projectors(&p22());
        let rep = optimality_report(&d, &sp, 1e-10);
        assert!(!rep.commutes);
        assert!(rep.locc_optimal() && is_locc_optimal(&d, &sp, 1e-10));
        assert_abs_diff_eq!(locc_error(&d, &sp).unwrap(), helstrom_error(&d), epsilon = 1e-12);
    }

    #[test]
    fn eigvec_condition_without_commutation() {
        // Eigenvectors (e+o)/√2 and (e'+o')/√2 with e⊥e' in E and o⊥o' in O:
        // Δ does not commute with P_E yet LOCC reaches the Helstrom error.
        let e = basis("0000").into_amplitudes();
        let o = basis("0101").into_amplitudes();
        let e2 = basis("1111").into_amplitudes();
        let o2 = basis("1001").into_amplitudes();
        let u = (&e + &o).unscale(2f64.sqrt());
        let w = (&e2 + &o2).unscale(2f64.sqrt());
        // ψ, φ in span{u, w} with p·sin2t = q·sin2s keeps Δ diagonal in {u, w}.
        let (p, t) = (0.7f64, 0.2f64);
        let s = 0.5 * ((p / (1.0 - p)) * (2.0 * t).sin()).asin();
        let psi = FockVector::new(p22(), &u * c64(t.cos(), 0.0) + &w * c64(t.sin(), 0.0)).unwrap();
        let phi = FockVector::new(p22(), &u * c64(s.cos(), 0.0) + &w * c64(s.sin(), 0.0)).unwrap();
        let d = delta(&DiscriminationInstance::new(psi, phi, p).unwrap());
        let sp = sector_projectors(&p22());
        let rep = optimality_report(&d, &sp, 1e-10);
        assert!(!rep.commutes);
        assert!(rep.locc_optimal() && is_locc_optimal(&d, &sp, 1e-10));
        assert_abs_diff_eq!(locc_error(&d, &sp).unwrap(), helstrom_error(&d), epsilon = 1e-12);
    }

    #[test]
    fn critical_prior_cases() {
        let (psi, _) = pm_pair();
        // φ = dψ_E + cψ_O with c·d > 0 has proportional commutators.
        let (d_e, c_o) = (0.9f64, (2.0f64 - 0.81).sqrt());
        let phi = make_state(
            p22(),
            &[("0000", c64(d_e * H, 0.0)), ("0101", c64(c_o * H, 0.0))],
            false,
        )
        .unwrap();
        match critical_prior(&psi, &phi, 1e-10).unwrap() {
            CriticalPrior::Unique(p) => {
                let d = delta(&DiscriminationInstance::new(psi.clone(), phi.clone(), p).unwrap());
                assert!(is_locc_optimal(&d, &sector_projectors(&p22()), 1e-10));
            }
            other => panic!("expected unique prior, got {other:?}"),
        }
        // Opposite relative sign: ratio negative, no prior works.
        let phi_neg = make_state(
            p22(),
            &[("0000", c64(d_e * H, 0.0)), ("0101", c64(-c_o * H, 0.0))],
            false,
        )
        .unwrap();
        assert_eq!(critical_prior(&psi, &phi_neg, 1e-10).unwrap(), CriticalPrior::None);
        // One commutator vanishes, the other does not.
        assert_eq!(critical_prior(&psi, &basis("0000"), 1e-10).unwrap(), CriticalPrior::None);
    }

    #[test]
    fn ancilla_examples() {
        let (psi, phi) = pm_pair();
        let (se, _) = sector_overlaps_of(&psi, &phi);

        let h = c64(H, 0.0);
        let (pa, fa) = (attach_ancilla(&psi, h, h).unwrap(), attach_ancilla(&phi, h, h).unwrap());
        assert_eq!(pa.partition().modes(), 6);
        assert!(pa.is_normalized());
        let v = classify_perfect(&pa, &fa, 1e-10).unwrap();
        assert!(v.is_perfect());
        assert!(v.sigma_e.norm() < 1e-12 && v.sigma_o.norm() < 1e-12);

        let (pa, fa) = (attach_ancilla(&psi, ONE, ZERO).unwrap(), attach_ancilla(&phi, ONE, ZERO).unwrap());
        let (se1, _) = sector_overlaps_of(&pa, &fa);
        assert!((se1 - se).norm() < 1e-12);

        let (a, b) = (c64(0.7f64.sqrt(), 0.0), c64(0.0, 0.3f64.sqrt()));
        let (pa, fa) = (attach_ancilla(&psi, a, b).unwrap(), attach_ancilla(&phi, a, b).unwrap());
        let (se2, _) = sector_overlaps_of(&pa, &fa);
        assert!((se2 - se * 0.4).norm() < 1e-12);
        assert_eq!(classify_perfect(&pa, &fa, 1e-10).unwrap().case, VerdictCase::NotPerfectlyLocc);

        assert!(matches!(attach_ancilla(&psi, ONE, ONE), Err(Error::AncillaNotNormalized(_))));
    }

    fn sector_overlaps_of(a: &FockVector, b: &FockVector) -> (Complex64, Complex64) {
        crate::decomp::sector_overlaps(a, b).unwrap()
    }
}
