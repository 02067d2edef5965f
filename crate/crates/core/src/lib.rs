//! Finite element solver for the exterior Helmholtz problem on a truncated
//! domain, with an exact nonlocal condition on the truncation boundary.

mod dd;
pub mod kernels;
pub mod mesh;
pub mod specfun;
pub mod fem;
pub mod potentials;
pub mod krylov;
pub mod driver;
