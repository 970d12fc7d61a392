//! Hyperdisks, masking machines, and maskable-set classification for
//! finite-dimensional quantum states.
//!
//! A hyperdisk is the set of pure states sharing a fixed vector of overlap
//! magnitudes against an orthonormal basis of their span. Masking machines
//! are isometries into a bipartite space whose maskable inputs all produce
//! the same pair of marginal states. This crate implements both structures,
//! the criteria connecting them (subhyperdisk Gramian patterns, common-parent
//! obstructions, regular-subset classification, Schmidt-hyperdisk
//! certificates), and numerical classifiers for qubit and
//! qutrit maskable-set structure, together with a catalog of worked
//! examples used as fixtures.
//!
//! All types are immutable after construction and safe to share across
//! threads; every search routine is deterministic given its seed.

pub mod catalog;
pub mod classify;
pub mod error;
pub mod hyperdisk;
pub mod linalg;
pub mod masking;
pub mod optimize;

pub use classify::{ClassifyDiagnostics, TargetStructure, TargetTag};
pub use error::{Error, Result};
pub use hyperdisk::{GramianPattern, Hyperdisk, RegularSubsetVerdict, SchmidtHyperdisk};
pub use linalg::{
    CMatrix, CVector, DensityMatrix, Pauli, PureState, SchmidtForm, Side, Tolerance, C64,
};
pub use masking::{
    ClaimedSet, Condition1Report, Condition2Report, DegeneracyClass, LegalSetSpec, MarginalSpec,
    MaskingMachine,
};
