//! Numerical realization of duality for crossed products of `M_n` by finite
//! abelian groups, normed as operators on `l^p` spaces.
//!
//! - [`group`]: finite abelian groups, characters, Fourier transform.
//! - [`pnorm`]: bracketing induced `p -> p` norms with attained lower bounds
//!   and certified upper bounds.
//! - [`algebra`]: phased-permutation actions, hermitian elements, cores.
//! - [`crossed`]: crossed products in their regular representation.
//! - [`duality`]: the four-step map from the double crossed product onto
//!   `B(l^p(G)) (x) M_n`, with equivariance, rank and norm reports.
//! - [`io`]: JSON exchange formats.

pub mod algebra;
pub mod crossed;
pub mod duality;
pub mod error;
pub mod group;
pub mod io;
pub mod pnorm;

pub use error::{Error, Result};
