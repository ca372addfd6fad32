//! Two-state discrimination for bipartite Fermionic systems under the parity
//! superselection rule.
//!
//! The crate decides when two pure states of a few-mode Fermionic system can
//! be told apart by local operations and classical communication (LOCC),
//! computes the optimal error probabilities with and without the locality
//! constraint, builds explicit two-round protocols and simulates them, and
//! sweeps the error excess under perturbed prior probabilities.

pub mod cli;
pub mod decomp;
pub mod discrim;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod oracle;
pub mod protocol;
pub mod random;
pub mod statefile;
pub mod sweep;

pub use decomp::{sector_overlaps, sector_split, walgate_decompose, zero_diagonal_basis, SectorSplit, WalgateDecomposition};
pub use discrim::{
    attach_ancilla, classify_perfect, critical_prior, delta, helstrom_error, is_locc_optimal, locc_error,
    CriticalPrior, DeltaOperator, DiscriminabilityVerdict, DiscriminationInstance, VerdictCase,
};
pub use error::{Error, Result};
pub use fock::{jw_mode_operator, make_state, sector_projectors, FockVector, ModePartition, Parity, SectorProjectors, Subspace};
pub use protocol::{
    build_optimal_locc_protocol, build_perfect_protocol, build_protocol, simulate, Decision, LoccProtocol, ProtocolKind,
    SimulationReport,
};

/// Default tolerance for every if-and-only-if style numerical test.
pub const DEFAULT_TOL: f64 = 1e-10;
