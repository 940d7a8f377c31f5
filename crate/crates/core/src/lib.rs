//! Spectral analysis of Toeplitz-plus-potential operators `T^<_φ + V^<_ψ` on
//! the strictly ordered lattice `Z^N_<`.
//!
//! The `N`-magnon sector of the Heisenberg/XXZ chain is the motivating case:
//! its Hamiltonian is `T^<_φ + V^<_ψ` with `φ = -2a χ_S`, `ψ = 2b χ_S`. The
//! crate builds exact finite compressions of these operators, decomposes them
//! into fibers of fixed total quasi-momentum, evaluates the band formulas for
//! the (essential) spectrum, and measures how states with energy away from
//! the bands stay localized in gap coordinates.
//!
//! - [`lattice`]: ordered configurations, gap coordinates, windows.
//! - [`symbols`]: finitely supported symbols and their partial Fourier maps.
//! - [`operators`]: dense compressions and matrix-free application.
//! - [`spectral`]: eigensolvers, fiber Hamiltonians, band unions.
//! - [`dynamics`]: functional calculus, time evolution, non-propagation norms.
//! - [`cli`]: the batch front-end behind the `magnonspec` binary.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod lattice;
pub mod operators;
pub mod spectral;
pub mod symbols;

pub use error::{Error, Result};
pub use num_complex::Complex64;
