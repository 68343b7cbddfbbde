//! Numerical toolkit for periodic homogenization of a stochastic heat
//! equation with a large oscillating potential.
//!
//! The workflow mirrors the underlying two-scale analysis:
//!
//! 1. assemble the shifted cell operator on a plane-wave basis and solve
//!    its spectrum ([`bloch`]),
//! 2. locate a critical quasimomentum of the chosen band and certify it,
//! 3. solve the corrector equations on the orthogonal complement of the
//!    cell eigenfunction ([`correctors`]),
//! 4. assemble the effective tensor and zero-order coefficients, checking
//!    the corrector route against an independent finite-difference route
//!    ([`effective`]),
//! 5. integrate the fine-scale and homogenized stochastic equations under
//!    the same Brownian path ([`spde`]),
//! 6. measure how well the fine solution factorizes into the cell
//!    eigenfunction times the homogenized solution ([`verify`]).
//!
//! [`config`] parses run descriptions and [`pipeline`] chains stages 1-4.

pub mod bandmat;
pub mod basis;
pub mod bloch;
pub mod config;
pub mod correctors;
pub mod effective;
pub mod error;
pub mod expr;
pub mod fft;
pub mod fields;
pub mod jacobi;
pub mod linalg;
pub mod pipeline;
pub mod spde;
pub mod verify;

pub use error::{Error, Result};
