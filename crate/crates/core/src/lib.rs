//! Space-time finite element solver for the damped nonlinear wave equation
//!
//! `ü + 2γu̇ + γ²u − ∂ₓ(⅓(∂ₓu)³) = f` on `(0, 1)` with homogeneous Dirichlet data.
//!
//! Continuous Lagrange elements in space, discontinuous shifted-Legendre
//! polynomials in time, and Picard iteration on every time slab.

pub mod linalg;
pub mod march;
pub mod quadrature;
pub mod slab;
pub mod space;
pub mod study;
pub mod time_basis;
