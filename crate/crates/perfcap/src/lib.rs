//! Boundary-integral computation of (u,v)-capacities of small holes in
//! planar domains and prediction of Dirichlet-Laplacian eigenvalue
//! splitting, validated against analytic Bessel reference spectra.
//!
//! The crate is organized around a Nystrom discretization of second-kind
//! boundary integral equations on smooth closed curves:
//!
//! - [`specfun`]: Bessel functions `J_k`, `Y_k` and their zeros.
//! - [`geometry`]: parametrized closed curves, quadrature grids, elliptic
//!   coordinates.
//! - [`potential`]: the logarithmic fundamental solution, single and double
//!   layer potentials, and their boundary operator matrices.
//! - [`capacity`]: direct capacity solves at fixed hole size and the full
//!   power-series expansion machinery (coefficient tables, `r0`, exterior
//!   energies).
//! - [`eigenbasis`]: analytic Dirichlet eigenpairs of the unit disk, Taylor
//!   germs at interior points, order decomposition of eigenspaces.
//! - [`splitting`]: eigenvalue-branch prediction, closed-form elliptic-hole
//!   matrices, and the small-eigenvalue checker.
//! - [`reference`]: independent annulus spectra via Bessel cross-products
//!   and Graf's addition theorem.
//! - [`config`] / [`runner`] / [`validate`]: JSON/CSV surfaces, sweep
//!   drivers, and the acceptance-criteria suite backing the CLI.

pub mod capacity;
pub mod config;
pub mod eigenbasis;
pub mod error;
pub mod geometry;
pub mod poly;
pub mod potential;
pub mod reference;
pub mod runner;
pub mod specfun;
pub mod splitting;
pub mod validate;

pub use error::{Error, Result};
