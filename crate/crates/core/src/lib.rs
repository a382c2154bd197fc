//! Random non-Hermitian Jacobi matrices.
//!
//! The crate works with the three-term recurrence
//! `a_j f_{j-1} + b_j f_j + c_j f_{j+1} = z f_j` driven by i.i.d. random
//! coefficient triples, and with the tridiagonal matrices `J_n` whose
//! eigenvalues are the zeros of `f_{n+1}`. It provides:
//!
//! - [`ensemble`]: coefficient laws, reproducible sampling and checks of the
//!   standing assumptions (i.i.d. triples, moment bounds, two-point support),
//!   the Hatano–Nelson class and its Liouville symmetrization.
//! - [`transfer`]: 2×2 transfer matrices, overflow-free scaled products,
//!   the scaled solution of the recurrence and Lyapunov exponent estimators.
//! - [`spectra`]: Dirichlet and periodic Jacobi matrices, eigenvalues,
//!   singular values, Weyl majorant and tail-bound checks.
//! - [`measures`]: eigenvalue counting measures, logarithmic potentials,
//!   discrete Laplacian densities, Thouless residuals, log-Hölder profiles
//!   and convergence diagnostics.
//!
//! The crate is `no_std` and only needs `alloc`. IO, configuration and
//! parallel drivers live in the `jacobi-spectra` companion crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ensemble;
mod error;
pub mod measures;
pub mod rng;
pub mod scaled;
pub mod spectra;
pub mod stats;
pub mod transfer;

pub use error::{Error, Result};
pub use num_complex::Complex64;
