#![no_std]
#![cfg_attr(test, allow(unused_imports))]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Numerics for the potential theory of subordinate killed Brownian motion.
//!
//! The process studied here is `Y^D_t = W^D_{S_t}`: a Brownian motion `W`
//! (transition density `(4πt)^{-d/2} exp(-|x-y|²/4t)`) killed on leaving a
//! domain `D`, then time-changed by an independent subordinator `S` with
//! Laplace exponent `φ`. The crate evaluates its kernels by quadrature of
//! subordination integrals, builds Whitney decompositions and the capacity
//! surrogates used by Wiener-type tests, and decides minimal thinness of
//! boundary sets by classifying the convergence of the resulting series.
//!
//! Everything here is allocation-only (`alloc`), with no IO; the `thinlab`
//! crate layers configuration, file formats, parallel drivers and the CLI
//! on top.
//!
//! Module map:
//!
//! - [`bernstein`]: the catalog of Laplace exponents and their envelopes.
//! - [`geometry`]: domains, boundary distance, Whitney cubes, region sets.
//! - [`kernels`]: heat, Green, jump, killing and Martin kernels.
//! - [`capacity`]: `σ_v` energies, quasi-additivity, Hardy ratios.
//! - [`thinness`]: criteria, the convergence classifier and scans.
//! - [`montecarlo`]: exact-killing path simulation of `Y^D`.

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bernstein;
pub mod capacity;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod math;
pub mod montecarlo;
pub mod quad;
pub mod thinness;

pub use error::{Error, Result};

/// Shared normalization of the underlying Brownian motion.
///
/// Transition density `(4πt)^{-d/2} exp(-|x-y|²/(4t))`: each coordinate has
/// variance `2t` and the generator is the plain Laplacian. Every sampler,
/// heat kernel and bridge formula in the crate reads its constants from here.
pub mod normalization {
    /// Per-coordinate variance of `W_t` per unit time.
    pub const VARIANCE_PER_TIME: f64 = 2.0;
    /// Denominator factor in the Gaussian exponent, `|x-y|² / (4t)`.
    pub const EXPONENT_DENOMINATOR: f64 = 4.0;
}
