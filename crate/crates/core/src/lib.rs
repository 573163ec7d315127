//! Dressed-state spectra of N two-level atoms coupled to one cavity mode,
//! including a photon-assisted pair-exchange term.
//!
//! The crate has two independent routes to the spectrum: closed-form
//! expressions in [`dressed`], and exact diagonalization of conserved
//! excitation blocks ([`hilbert`], [`hamiltonian`], [`eigensolve`]).
//! [`sweep`] turns either route into eigenvalue-versus-N datasets, and
//! [`cli`] exposes everything on the command line.

pub mod cli;
pub mod dressed;
pub mod eigensolve;
pub mod hamiltonian;
pub mod hilbert;
pub mod matrix;
pub mod sweep;

pub use dressed::{closed_form_pair, DressedPair};
pub use eigensolve::{eigh, EighOptions, Spectrum};
pub use hamiltonian::{build_full, build_symmetric, ModelParams, PairConvention};
pub use hilbert::{block_dimension, enumerate_block, BlockBasis, SpaceKind};
pub use matrix::HermitianMatrix;
pub use sweep::{staircase, Method, SeriesParams, StaircaseSeries};
