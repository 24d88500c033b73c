//! Exact bracket polynomials, elementary two-step nilmanifolds, periodic
//! Fourier expansions, refined bracket polynomial certificates, Gowers norms
//! and Bohr-set tools on `Z/NZ`.

pub mod additive;
pub mod brackets;
pub mod equidist;
pub mod fourier;
pub mod gowers;
pub mod linalg;
pub mod nilmani;
pub mod ratmod;
pub mod rbpl;
