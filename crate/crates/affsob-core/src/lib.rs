//! Numerical verification kernels for sharp affine weighted Sobolev-type
//! inequalities on the upper half-space.
//!
//! Everything here revolves around the half-space `R_+ x R^{n-1}` carrying
//! the monomial weight `w(t, x) = t^a`, and a family of affine-invariant
//! functional inequalities (Sobolev, Gagliardo-Nirenberg, entropy) whose
//! sharp constants are explicit products of Gamma values. The crate provides
//!
//! * the sharp constants, each computed independently from its defining
//!   product of factors and from a simplified closed form, so transcription
//!   errors surface as a relative gap ([`constants`]);
//! * deterministic quadrature on spheres and on the weighted half-space
//!   ([`quadrature`]);
//! * computational convex geometry: support/gauge/radial/polar evaluations,
//!   volumes, `L_p` centroid bodies and the Busemann-Petty volume ratio,
//!   and Legendre transforms of homogeneous convex functions ([`geometry`]);
//! * test functions with analytic gradients, their weighted norms, the
//!   affine energy `E_p`, and the convex bodies a function induces
//!   ([`functionals`]);
//! * verifiers that evaluate both sides of every inequality and report
//!   deficits ([`verifier`]).
//!
//! The crate is `no_std`-compatible (it requires `alloc`); the companion
//! CLI crate carries IO, file formats and parallel sweeps.
//!
//! # Conventions
//!
//! Points of the half-space are written `(t, x)` with `t > 0` the weighted
//! coordinate and `x` in `R^{n-1}`. Directions `xi` live on the sphere
//! `S^{n-2}` inside the `x`-factor; for `n = 2` that sphere is the two-point
//! set `{-1, +1}` with counting measure, which is the normalization that
//! makes the dimensional identities below hold verbatim.
//!
//! All floating point work is `f64`. Constants that chain many Gamma factors
//! are assembled in log space and exponentiated once.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod constants;
pub mod error;
pub mod verifier;
pub mod functionals;
pub mod geometry;
pub mod linalg;
pub mod params;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod sum;

pub use error::{Error, Result};
pub use params::Params;
