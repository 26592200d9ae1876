//! Spin-oscillator dynamics on an engineered squeezed Fock ladder.
//!
//! The crate simulates a two-level spin coupled to a truncated harmonic
//! oscillator through Jaynes-Cummings-type Hamiltonians whose ladder basis is
//! a squeezed Fock basis. It provides:
//!
//! - [`hilbert`]: truncated-Fock operators, squeeze/displacement unitaries,
//!   Bogoliubov-transformed lowering operators, squeezed Fock states, parity
//!   and quadrature observables;
//! - [`hamiltonians`]: spin⊗oscillator Hamiltonians (Jaynes-Cummings,
//!   engineered ladder drives, physical bichromatic sideband drives with
//!   finite-wavelength corrections, detuning terms in both bases);
//! - [`dynamics`]: exact piecewise-constant unitary evolution and an adaptive
//!   Lindblad master-equation solver with amplitude and phase reservoirs;
//! - [`pulseseq`]: a small line-oriented schedule language plus generators and
//!   an executor for ladder-climbing, superposition, probe, and phase-scan
//!   protocols;
//! - [`tomography`]: blue-sideband forward signals, decaying-cosine Rabi fits,
//!   number-state population extraction, and Rabi-ratio scaling tables;
//! - [`cli`]: the `sqladder` command-line front end.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod hamiltonians;
pub mod hilbert;
pub(crate) mod linalg;
pub mod pulseseq;
pub mod tomography;

pub use error::{Result, SimError};
