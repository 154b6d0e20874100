//! Analysis toolkit for dynamical systems with distributed time delay whose
//! memory kernels are Erlang densities perturbed by finite superpositions of
//! temporal oscillations.
//!
//! The central operation is [`transform::transform`], which replaces the
//! convolution delay term of a [`system::DelaySystemSpec`] with a chain of
//! auxiliary variables, producing a finite-dimensional autonomous ODE system
//! ([`transform::AugmentedSystem`]). On top of that reduction the crate
//! provides:
//!
//! - equilibrium construction from the delayed fixed-point condition
//!   ([`equilibria`]),
//! - characteristic polynomials, Routh-Hurwitz determinant cascades and
//!   stability verdicts ([`stability`]),
//! - Hopf-bifurcation location, locus tracing and phase-diagram
//!   classification over the `(sigma, epsilon)` parameter plane
//!   ([`bifurcation`]),
//! - time integration of both the reduced ODE system and the original
//!   delay equation by direct convolution quadrature, together with a
//!   kernel-continuity certificate ([`integrators`]),
//! - the delayed logistic equation as a fully worked, analytically enriched
//!   example model ([`logistic`]).
//!
//! The crate is `no_std`-compatible (requires `alloc`): disable default
//! features and enable `libm` to build without the standard library.

#![cfg_attr(not(feature = "std"), no_std)]
// Validation guards are written `!(x > 0.0)` so that NaN inputs fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("lct-core requires either the `std` feature or the `libm` feature");

extern crate alloc;

pub mod bifurcation;
pub mod equilibria;
pub mod integrators;
pub mod kernels;
pub mod linalg;
pub mod logistic;
pub mod rng;
pub mod stability;
pub mod system;
pub mod transform;

mod quad;

pub use kernels::{KernelSpec, Oscillation};
pub use system::DelaySystemSpec;
pub use transform::{transform, AugmentedSystem, StateLayout};
