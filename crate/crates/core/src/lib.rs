//! Heun and associated-Heun functions.
//!
//! The crate evaluates the generating functions of the (associated)
//! Stieltjes–Carlitz polynomials as power series in `w`, reproduces the eight
//! closed-form associated-Heun solutions built from Jacobi elliptic functions,
//! checks the two integral connection transforms between associated Heun
//! functions, and computes the Stieltjes transform of the orthogonality
//! measure of the associated Stieltjes–Carlitz polynomials three ways:
//!
//! - as the ratio of two elliptic `D`-integrals ([`stieltjes::stieltjes_s`]),
//! - as a Markov (Jacobi) continued fraction ([`stieltjes::cf_markov`]),
//! - as the Laplace transform of `P₀₀(t)` from the Kolmogorov forward system
//!   of the matching birth-death process ([`birthdeath::km_crosscheck`]).
//!
//! Module map:
//!
//! | module | content |
//! |--------|---------|
//! | [`quadrature`] | adaptive Gauss–Kronrod, tanh-sinh, algebraic-weight integration |
//! | [`elliptic`] | `K(k²)`, `sn`, `cn`, `dn`, inverse `θ(w)` |
//! | [`heun`] | parameter arrays, recurrences, series, mappings, hypergeometric cases |
//! | [`closed_forms`] | the eight elliptic closed-form families |
//! | [`transforms`] | the two integral connection relations |
//! | [`stieltjes`] | `D`-ratio, continued fraction, moments |
//! | [`birthdeath`] | Kolmogorov system, Laplace transform, cross-check |

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
// Quadrature nodes are kept at the published number of digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod birthdeath;
pub mod closed_forms;
pub mod elliptic;
mod error;
pub mod heun;
pub mod hypergeometric;
pub mod quadrature;
pub mod stieltjes;
pub mod transforms;

pub use error::{Error, Result};
