//! Robust phase-shadow estimation.
//!
//! Random `CZ`–`S`–`H` measurement circuits, stabilizer simulation of noisy
//! shots, inversion of gate-dependent `Z⊗Z` noise through per-class channel
//! coefficients, and fidelity estimation for stabilizer states via the group
//! shared by a snapshot and its target. [`oracle`] holds dense reference
//! computations used by [`verify`] and the tests.
//!
//! The guide in `book/` walks through the concepts; its code listings run as
//! doc tests of this crate.

pub mod bitlin;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod oracle;
pub mod pauli;
pub mod prep;
pub mod shadow;
pub mod sigma;
pub mod store;
pub mod tableau;
pub mod verify;

pub use ensemble::{NoiseModel, PhaseCircuit, Snapshot, SnapshotKind};
pub use error::{Error, Result};
pub use pauli::{PauliClass, PauliString};
pub use shadow::{aggregate, Estimate, EstimateOptions, Observable, ShadowDataset, StabObservable};
pub use sigma::{Mode, SigmaEngine};
pub use tableau::{Circuit, CliffordTableau, GateOp, StabState};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/phase-circuits.md")]
    mod phase_circuits {}
    #[doc = include_str!("../../../book/src/noise.md")]
    mod noise {}
    #[doc = include_str!("../../../book/src/fidelity.md")]
    mod fidelity {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
