//! Light propagation in anharmonic multimode waveguides.
//!
//! The transverse field is expanded in harmonic-oscillator (Hermite–Gauss)
//! modes. A quartic index perturbation λx⁴ couples the modes; the truncated
//! Hamiltonian is diagonalised exactly and states are propagated through the
//! resulting spectral decomposition. Fields can be viewed in position space or
//! in the one-sided phase representation φ(θ) = (2π)^{-1/2} Σ Cₙ e^{inθ}, whose
//! collapse and revival dynamics form Talbot carpets.
//!
//! Modules, bottom up:
//! - [`fock`]: operator matrices in a truncated Fock basis
//! - [`spectral`]: band eigensolver, convergence control, λ sweeps
//! - [`projections`]: Hermite–Gauss and phase-space projections
//! - [`propagation`]: input states, exact evolution, carpets
//! - [`dispersive`]: the weak-anharmonicity n̂ + n̂² model
//! - [`talbot`]: Talbot lengths and revival detection
//! - [`io`]: config parsing, CSV and raster output

pub mod dispersive;
pub mod error;
pub mod fock;
pub mod io;
pub mod oracle;
pub mod projections;
pub mod propagation;
pub mod selftest;
pub mod spectral;
pub mod talbot;

pub use error::{Error, Result};
pub use fock::{SymmetricBandMatrix, TruncationSpec};
pub use spectral::{EigenDecomposition, SpectrumSweep};

pub use num_complex::Complex64;
