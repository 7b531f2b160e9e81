//! invforge: find what noise cannot touch.
//!
//! Given a noisy channel as a Kraus-operator family, this crate discovers
//! operators whose expectation values re-scale multiplicatively under the
//! channel, assembles them into noise-parameter-independent invariant
//! monomials, and demonstrates error-immune information transfer by
//! encoding message symbols in those invariants under simulated
//! finite-shot measurement.
//!
//! Module map:
//! - [`basis`]: operator bases (symmetric/antisymmetric/diagonal,
//!   shift/clock powers), their mutual decompositions, and projector
//!   count-rate bookkeeping.
//! - [`channel`]: the channel zoo as parameterized Kraus families, state
//!   validation, and the channel-spec file format.
//! - [`spectral`]: adjoint superoperators, eigenoperator extraction, and
//!   robustness filtering across a noise-parameter family.
//! - [`invariant`]: invariant monomials, the bounded exhaustive search,
//!   numeric verification, the reference catalog, and the count table.
//! - [`transfer`]: random states, shot-noise expectation estimates,
//!   codebooks, and the transmit/decode demonstration.

pub mod basis;
pub mod channel;
pub mod error;
pub mod invariant;
pub mod linalg;
pub mod spectral;
pub mod transfer;

pub use basis::{
    basis_matrix, expectations_from_counts, gen_pauli_power, hermitian_basis, omega,
    unitary_power_decomposition, CountRecord, LabelKind, LabeledOperator, OperatorLabel,
    PowerKind, ProjectorKind,
};
pub use channel::{
    transposition_flip_strict, ChannelFamily, CptpReport, DensityMatrix, FamilyName,
    KrausChannel, ParamSpec, ALL_FAMILIES,
};
pub use error::{Error, Result};
pub use invariant::{
    equivalent, find_invariants, reference_catalog, reproduce_count_table, verify_invariance,
    CatalogEntry, CatalogEntryRaw, CatalogSource, CountRow, FamilyClass, InvariantMonomial,
    InvariantValue, SearchOptions, Term, VerifyReport,
};
pub use spectral::{
    adjoint_superoperator, apply_adjoint, eigenoperators, robust_eigenoperators, scaling_factor,
    EigenSpace, Eigenoperator,
};
pub use transfer::{
    build_codebook, build_codebook_with, estimate_expectation, random_density, transmit,
    Codebook, CodebookOptions, CodebookSymbol, MeasurementRecord, Shots, SymbolTranscript,
    TransmitOutcome,
};
