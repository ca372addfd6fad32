//! Few-mode Fermionic systems in the Jordan-Wigner occupation basis.
//!
//! Modes are ordered Alice first, then Bob. Bit `i` of a basis index is the
//! occupation of mode `i`, so Alice's modes sit in the low bits. The
//! annihilation operator of mode `i` is `Z^{⊗i} ⊗ σ⁻ ⊗ I^{⊗(N−i−1)}`, with
//! the `Z` string running over the lower-indexed modes.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, CMatrix, CVector, ONE, ZERO};

/// Tolerance for every "exactly zero" amplitude check.
pub const AMPLITUDE_TOL: f64 = 1e-12;

/// Default cap on the total number of modes (dimension 256).
pub const DEFAULT_MODE_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_count(n: u32) -> Self {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn of_index(idx: usize) -> Self {
        Self::of_count(idx.count_ones())
    }

    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The two local-parity subspaces of the global even sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subspace {
    /// Alice and Bob both even.
    E,
    /// Alice and Bob both odd.
    O,
}

impl Subspace {
    pub fn local_parity(self) -> Parity {
        match self {
            Subspace::E => Parity::Even,
            Subspace::O => Parity::Odd,
        }
    }

    pub fn both() -> [Subspace; 2] {
        [Subspace::E, Subspace::O]
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subspace::E => f.write_str("E"),
            Subspace::O => f.write_str("O"),
        }
    }
}

/// Bipartition of `n_alice + n_bob` modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModePartition {
    n_alice: usize,
    n_bob: usize,
}

impl ModePartition {
    pub fn new(n_alice: usize, n_bob: usize) -> Result<Self> {
        Self::with_cap(n_alice, n_bob, DEFAULT_MODE_CAP)
    }

    pub fn with_cap(n_alice: usize, n_bob: usize, cap: usize) -> Result<Self> {
        // Indices are machine words; beyond ~20 modes dense storage is hopeless anyway.
        if n_alice == 0 || n_bob == 0 || n_alice + n_bob > cap || n_alice + n_bob > 24 {
            return Err(Error::InvalidPartition { n_alice, n_bob, cap });
        }
        Ok(ModePartition { n_alice, n_bob })
    }

    pub fn n_alice(&self) -> usize {
        self.n_alice
    }

    pub fn n_bob(&self) -> usize {
        self.n_bob
    }

    pub fn modes(&self) -> usize {
        self.n_alice + self.n_bob
    }

    pub fn dim(&self) -> usize {
        1 << self.modes()
    }

    pub fn alice_dim(&self) -> usize {
        1 << self.n_alice
    }

    pub fn bob_dim(&self) -> usize {
        1 << self.n_bob
    }

    /// Split a global index into (Alice bits, Bob bits).
    #[inline]
    pub fn split(&self, idx: usize) -> (usize, usize) {
        (idx & (self.alice_dim() - 1), idx >> self.n_alice)
    }

    #[inline]
    pub fn join(&self, alice: usize, bob: usize) -> usize {
        alice | (bob << self.n_alice)
    }

    pub fn local_parities(&self, idx: usize) -> (Parity, Parity) {
        let (a, b) = self.split(idx);
        (Parity::of_index(a), Parity::of_index(b))
    }

    /// E or O for indices of the global even sector, `None` for odd ones.
    pub fn subspace_of(&self, idx: usize) -> Option<Subspace> {
        match self.local_parities(idx) {
            (Parity::Even, Parity::Even) => Some(Subspace::E),
            (Parity::Odd, Parity::Odd) => Some(Subspace::O),
            _ => None,
        }
    }

    pub fn subspace_indices(&self, s: Subspace) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.subspace_of(i) == Some(s)).collect()
    }

    pub fn sector_indices(&self, p: Parity) -> Vec<usize> {
        (0..self.dim()).filter(|&i| Parity::of_index(i) == p).collect()
    }

    /// Partition with one extra mode per party (ancilla appended after each block).
    pub fn with_ancilla(&self) -> Result<ModePartition> {
        ModePartition::with_cap(
            self.n_alice + 1,
            self.n_bob + 1,
            DEFAULT_MODE_CAP.max(self.modes() + 2),
        )
    }

    pub fn bitstring(&self, idx: usize) -> String {
        (0..self.modes())
            .map(|m| if idx >> m & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Parse a bitstring whose `j`-th character is the occupation of mode `j`.
    pub fn parse_bitstring(&self, s: &str) -> Result<usize> {
        let bad = || Error::BadBitstring { bitstring: s.to_string(), modes: self.modes() };
        if s.chars().count() != self.modes() {
            return Err(bad());
        }
        s.chars().enumerate().try_fold(0usize, |acc, (j, ch)| match ch {
            '0' => Ok(acc),
            '1' => Ok(acc | 1 << j),
            _ => Err(bad()),
        })
    }
}

impl fmt::Display for ModePartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.n_alice, self.n_bob)
    }
}

/// Apply the annihilation operator of `mode` to a vector over `n_modes` modes.
pub fn apply_annihilation(mode: usize, v: &CVector) -> CVector {
    let mut out = CVector::zeros(v.len());
    let lower = (1usize << mode) - 1;
    for (idx, amp) in v.iter().enumerate() {
        if idx >> mode & 1 == 1 && *amp != ZERO {
            let sign = if (idx & lower).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            out[idx ^ 1 << mode] = amp * sign;
        }
    }
    out
}

/// Apply the creation operator of `mode`.
pub fn apply_creation(mode: usize, v: &CVector) -> CVector {
    let mut out = CVector::zeros(v.len());
    let lower = (1usize << mode) - 1;
    for (idx, amp) in v.iter().enumerate() {
        if idx >> mode & 1 == 0 && *amp != ZERO {
            let sign = if (idx & lower).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            out[idx | 1 << mode] = amp * sign;
        }
    }
    out
}

/// Jordan-Wigner matrix of the annihilation operator `φ_i`.
pub fn jw_mode_operator(partition: &ModePartition, i: usize) -> Result<CMatrix> {
    let n = partition.modes();
    if i >= n {
        return Err(Error::ModeOutOfRange { index: i, modes: n });
    }
    let dim = partition.dim();
    let lower = (1usize << i) - 1;
    let mut m = CMatrix::zeros(dim, dim);
    for idx in 0..dim {
        if idx >> i & 1 == 1 {
            let sign = if (idx & lower).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            m[(idx ^ 1 << i, idx)] = Complex64::new(sign, 0.0);
        }
    }
    Ok(m)
}

/// Complex amplitude vector over occupation bitstrings, confined to one
/// global parity sector.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    partition: ModePartition,
    amplitudes: CVector,
    sector: Parity,
}

impl FockVector {
    /// Validate superselection and infer the sector. Amplitudes below
    /// [`AMPLITUDE_TOL`] on the minority parity are set to exactly zero.
    pub fn new(partition: ModePartition, mut amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != partition.dim() {
            return Err(Error::InvalidArgument(format!(
                "amplitude vector has length {}, expected {}",
                amplitudes.len(),
                partition.dim()
            )));
        }
        let weight = |p: Parity| -> f64 {
            amplitudes
                .iter()
                .enumerate()
                .filter(|(i, _)| Parity::of_index(*i) == p)
                .map(|(_, a)| a.norm())
                .fold(0.0, f64::max)
        };
        let (even, odd) = (weight(Parity::Even), weight(Parity::Odd));
        if even <= AMPLITUDE_TOL && odd <= AMPLITUDE_TOL {
            return Err(Error::ZeroVector);
        }
        if even > AMPLITUDE_TOL && odd > AMPLITUDE_TOL {
            return Err(Error::Superselection);
        }
        let sector = if even > AMPLITUDE_TOL { Parity::Even } else { Parity::Odd };
        for (i, a) in amplitudes.iter_mut().enumerate() {
            if Parity::of_index(i) != sector {
                *a = ZERO;
            }
        }
        Ok(FockVector { partition, amplitudes, sector })
    }

    /// Like [`FockVector::new`] but allows the zero vector, tagged with `sector`.
    /// Used for unnormalized components such as `ψ_E` that may vanish.
    pub fn new_in_sector(partition: ModePartition, amplitudes: CVector, sector: Parity) -> Result<Self> {
        if amplitudes.len() != partition.dim() {
            return Err(Error::InvalidArgument("amplitude length mismatch".into()));
        }
        for (i, a) in amplitudes.iter().enumerate() {
            if Parity::of_index(i) != sector && a.norm() > AMPLITUDE_TOL {
                return Err(Error::Superselection);
            }
        }
        let mut amplitudes = amplitudes;
        for (i, a) in amplitudes.iter_mut().enumerate() {
            if Parity::of_index(i) != sector {
                *a = ZERO;
            }
        }
        Ok(FockVector { partition, amplitudes, sector })
    }

    pub fn basis(partition: ModePartition, idx: usize) -> Result<Self> {
        let mut v = CVector::zeros(partition.dim());
        if idx >= v.len() {
            return Err(Error::InvalidArgument(format!("basis index {idx} out of range")));
        }
        v[idx] = ONE;
        Self::new(partition, v)
    }

    pub fn partition(&self) -> &ModePartition {
        &self.partition
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn sector(&self) -> Parity {
        self.sector
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= AMPLITUDE_TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= AMPLITUDE_TOL {
            return Err(Error::ZeroVector);
        }
        Ok(FockVector {
            partition: self.partition,
            amplitudes: self.amplitudes.unscale(n),
            sector: self.sector,
        })
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm_sqr: self.norm_sqr() })
        }
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn scaled(&self, z: Complex64) -> Self {
        FockVector {
            partition: self.partition,
            amplitudes: &self.amplitudes * z,
            sector: self.sector,
        }
    }

    /// Nonzero terms keyed by bitstring, in index order.
    pub fn terms(&self) -> BTreeMap<usize, Complex64> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != ZERO)
            .map(|(i, a)| (i, *a))
            .collect()
    }

    /// Local-parity-flip map to the even sector: the Majorana operator
    /// `φ_last + φ_last†` on Bob's last mode. Even vectors pass through.
    pub fn to_even_sector(&self) -> Self {
        match self.sector {
            Parity::Even => self.clone(),
            Parity::Odd => {
                let last = self.partition.modes() - 1;
                let flipped = apply_annihilation(last, &self.amplitudes)
                    + apply_creation(last, &self.amplitudes);
                FockVector { partition: self.partition, amplitudes: flipped, sector: Parity::Even }
            }
        }
    }
}

/// Build a state from `(bitstring, amplitude)` terms. Repeated bitstrings add.
pub fn make_state<S: AsRef<str>>(
    partition: ModePartition,
    terms: &[(S, Complex64)],
    normalize: bool,
) -> Result<FockVector> {
    if terms.is_empty() {
        return Err(Error::ZeroVector);
    }
    let mut amps = CVector::zeros(partition.dim());
    let mut parities = [false; 2];
    for (bits, amp) in terms {
        let idx = partition.parse_bitstring(bits.as_ref())?;
        amps[idx] += amp;
        if amp.norm() > AMPLITUDE_TOL {
            parities[(idx.count_ones() % 2) as usize] = true;
        }
    }
    if parities[0] && parities[1] {
        return Err(Error::Superselection);
    }
    let v = FockVector::new(partition, amps)?;
    if normalize {
        v.normalized()
    } else {
        Ok(v)
    }
}

/// Diagonal projectors onto the global parity sectors and onto the E and O
/// subspaces of the even sector.
#[derive(Debug, Clone)]
pub struct SectorProjectors {
    partition: ModePartition,
    pub p_even: CMatrix,
    pub p_odd: CMatrix,
    pub p_e: CMatrix,
    pub p_o: CMatrix,
}

pub fn sector_projectors(partition: &ModePartition) -> SectorProjectors {
    let dim = partition.dim();
    let diag = |pred: &dyn Fn(usize) -> bool| -> CMatrix {
        let mut m = CMatrix::zeros(dim, dim);
        for i in (0..dim).filter(|&i| pred(i)) {
            m[(i, i)] = ONE;
        }
        m
    };
    SectorProjectors {
        partition: *partition,
        p_even: diag(&|i| Parity::of_index(i) == Parity::Even),
        p_odd: diag(&|i| Parity::of_index(i) == Parity::Odd),
        p_e: diag(&|i| partition.subspace_of(i) == Some(Subspace::E)),
        p_o: diag(&|i| partition.subspace_of(i) == Some(Subspace::O)),
    }
}

impl SectorProjectors {
    pub fn partition(&self) -> &ModePartition {
        &self.partition
    }

    pub fn subspace(&self, s: Subspace) -> &CMatrix {
        match s {
            Subspace::E => &self.p_e,
            Subspace::O => &self.p_o,
        }
    }

    /// `P_s M P_s`, computed by masking.
    pub fn compress(&self, m: &CMatrix, s: Subspace) -> CMatrix {
        let p = &self.partition;
        CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
            if p.subspace_of(i) == Some(s) && p.subspace_of(j) == Some(s) {
                m[(i, j)]
            } else {
                ZERO
            }
        })
    }

    /// `P_s |v⟩`
    pub fn project(&self, v: &CVector, s: Subspace) -> CVector {
        let p = &self.partition;
        CVector::from_fn(v.len(), |i, _| if p.subspace_of(i) == Some(s) { v[i] } else { ZERO })
    }
}

/// Bob-local matrix of the odd-to-even flip used by [`FockVector::to_even_sector`].
///
/// The global flip equals `Z_A ⊗ M_B` where `Z_A` is the full Alice parity
/// string; conjugating a Bob-local effect by the global flip therefore acts as
/// conjugation by `M_B` alone.
pub fn bob_flip_local(partition: &ModePartition) -> CMatrix {
    let nb = partition.n_bob();
    let local = ModePartition { n_alice: nb, n_bob: 0 };
    let last = nb - 1;
    let a = jw_mode_operator(&local, last).expect("mode in range");
    &a + a.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, max_abs};

    fn anti(a: &CMatrix, b: &CMatrix) -> CMatrix {
        a * b + b * a
    }

    #[test]
    fn single_mode_lowering() {
        let p = ModePartition::new(1, 1).unwrap();
        let a0 = jw_mode_operator(&p, 0).unwrap();
        // |1⟩ (index 1) → |0⟩ (index 0) on mode 0 regardless of mode 1.
        assert_eq!(a0[(0, 1)], ONE);
        assert_eq!(a0[(2, 3)], ONE);
        assert_eq!(a0.iter().filter(|z| z.norm() > 0.0).count(), 2);
    }

    #[test]
    fn car_relations_exhaustive() {
        for (na, nb) in [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1)] {
            let p = ModePartition::new(na, nb).unwrap();
            let ops: Vec<CMatrix> = (0..p.modes()).map(|i| jw_mode_operator(&p, i).unwrap()).collect();
            let id = CMatrix::identity(p.dim(), p.dim());
            for i in 0..p.modes() {
                for j in 0..p.modes() {
                    let expected = if i == j { id.clone() } else { CMatrix::zeros(p.dim(), p.dim()) };
                    assert!(max_abs(&(anti(&ops[i], &ops[j].adjoint()) - expected)) < 1e-12);
                    assert!(max_abs(&anti(&ops[i], &ops[j])) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn creation_order_sign() {
        let p = ModePartition::new(1, 1).unwrap();
        let mut vac = CVector::zeros(4);
        vac[0] = ONE;
        let c0 = jw_mode_operator(&p, 0).unwrap().adjoint();
        let c1 = jw_mode_operator(&p, 1).unwrap().adjoint();
        let lhs = &c1 * (&c0 * &vac);
        let rhs = &c0 * (&c1 * &vac);
        assert_eq!(lhs[3], -ONE);
        assert_eq!(rhs[3], ONE);
    }

    #[test]
    fn fock_states_are_basis_vectors() {
        let p = ModePartition::new(2, 2).unwrap();
        let mut vac = CVector::zeros(p.dim());
        vac[0] = ONE;
        for idx in 0..p.dim() {
            // (φ_1†)^{n_1} ··· (φ_N†)^{n_N} |Ω⟩: rightmost factor acts first.
            let mut v = vac.clone();
            for m in (0..p.modes()).rev() {
                if idx >> m & 1 == 1 {
                    v = apply_creation(m, &v);
                }
            }
            assert_eq!(v.norm(), 1.0);
            assert_eq!(v[idx].norm(), 1.0);
        }
    }

    #[test]
    fn make_state_examples() {
        let p = ModePartition::new(2, 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = make_state(p, &[("0000", c64(h, 0.0)), ("0101", c64(h, 0.0))], false).unwrap();
        assert_eq!(psi.sector(), Parity::Even);
        assert!(psi.is_normalized());

        let p1 = ModePartition::new(1, 1).unwrap();
        let vac = make_state(p1, &[("00", ONE)], false).unwrap();
        assert_eq!(vac.sector(), Parity::Even);

        let err = make_state(p1, &[("00", c64(0.6, 0.0)), ("01", c64(0.8, 0.0))], false);
        assert!(matches!(err, Err(Error::Superselection)));

        let empty: [(&str, Complex64); 0] = [];
        assert!(matches!(make_state(p1, &empty, false), Err(Error::ZeroVector)));
        assert!(matches!(make_state(p1, &[("0", ONE)], false), Err(Error::BadBitstring { .. })));
    }

    #[test]
    fn projector_ranks_and_identities() {
        let p = ModePartition::new(1, 1).unwrap();
        let sp = sector_projectors(&p);
        assert_eq!(sp.p_e[(0, 0)], ONE);
        assert_eq!(sp.p_o[(3, 3)], ONE);
        assert_eq!(sp.p_e.trace().re, 1.0);
        assert_eq!(sp.p_o.trace().re, 1.0);

        let p = ModePartition::new(2, 2).unwrap();
        let sp = sector_projectors(&p);
        assert_eq!(sp.p_e.trace().re, 4.0);
        assert_eq!(sp.p_o.trace().re, 4.0);
        assert_eq!(sp.p_even.trace().re, 8.0);
        assert!(max_abs(&(&sp.p_e + &sp.p_o - &sp.p_even)) < 1e-12);
        assert!(max_abs(&(&sp.p_e * &sp.p_o)) < 1e-12);
        for m in [&sp.p_e, &sp.p_o, &sp.p_even, &sp.p_odd] {
            assert!(max_abs(&(m * m - m)) < 1e-12);
            assert!(max_abs(&(m - m.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn partition_limits() {
        assert!(ModePartition::new(0, 2).is_err());
        assert!(ModePartition::new(5, 4).is_err());
        assert!(ModePartition::with_cap(5, 5, 10).is_ok());
        let p = ModePartition::new(1, 1).unwrap();
        assert!(matches!(jw_mode_operator(&p, 2), Err(Error::ModeOutOfRange { .. })));
    }

    #[test]
    fn odd_sector_flip_is_local_and_unitary() {
        let p = ModePartition::new(2, 2).unwrap();
        let v = make_state(p, &[("1000", c64(0.6, 0.0)), ("0111", c64(0.0, 0.8))], false).unwrap();
        assert_eq!(v.sector(), Parity::Odd);
        let w = v.to_even_sector();
        assert_eq!(w.sector(), Parity::Even);
        assert!((w.norm() - 1.0).abs() < 1e-15);
        let m = bob_flip_local(&p);
        assert!(max_abs(&(&m * &m - CMatrix::identity(4, 4))) < 1e-15);
    }
}
