//! Open-system model of a lambda-type quantum emitter coupled to a two-mode
//! lossy nanoantenna.
//!
//! The crate is `no_std` (it needs `alloc`) and covers the numerical side of
//! the problem:
//!
//! * [`hilbert`]: the truncated space `emitter ⊗ Fock(mode 1) ⊗ Fock(mode 2)`
//!   and the dense operator algebra on it.
//! * [`model`]: rotating-frame Hamiltonian, collapse operators and the sparse
//!   Liouvillian of the full hybrid system.
//! * [`dynamics`]: adaptive exponential propagation of density matrices and
//!   sparse steady-state solves.
//! * [`effective`]: the adiabatically eliminated three-level model, its
//!   stationary populations and the drive threshold.
//! * [`observables`]: populations, photon numbers, generated photon count and
//!   zero-delay second-order correlation.
//! * [`pulses`]: Gaussian pulse trains for the drive and the incoherent pump.
//! * [`spectra`]: Lorentzian fits of classical spectra and extraction of loss
//!   rates, free-space emission rates and couplings.
//!
//! File formats, configuration and the command line live in the `nanosps`
//! crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod dynamics;
pub mod effective;
mod error;
mod expm;
pub mod hilbert;
mod krylov;
pub(crate) mod math;
pub mod model;
pub mod observables;
pub mod pulses;
pub mod sparse;
pub mod spectra;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub use dynamics::{
    evolve, evolve_with, steady_state, steady_state_graded, Diagnostics, EvolveOptions, GeneratorTerm,
    TimeDependentGenerator, TimeGrid, Trajectory,
};
pub use effective::{
    adiabatic_photon_numbers, effective_liouvillian, effective_params, evolve_effective, stationary_rho22,
    steady_state_effective, threshold, xi, EffectiveParams, Threshold,
};
pub use hilbert::{
    annihilation, embed, emitter_flip, expectation, DensityMatrix, Level, OperatorMatrix, Slot, SpaceConfig,
};
pub use model::{
    build_hamiltonian, build_liouvillian, collapse_terms, system_liouvillian, CollapseTerm, Liouvillian, SystemParams,
};
pub use observables::{g2_zero, mean_photon, n_gen, populations, ObservableSeries, Populations};
pub use pulses::{ModelSpace, PulseTarget, PulseTrain};
pub use spectra::{
    coupling_from_purcell, extract_rates, fit_lorentzian, weisskopf_wigner, Channel, EmitterPhysical, LorentzianFit,
    LossRates, SpectrumSamples,
};
