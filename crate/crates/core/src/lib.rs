//! Stochastic Hamiltonian gradient methods for smooth min-max games.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: dense matrices, Jacobi SVD / eigensolvers, seeded random streams.
//! - [`games`]: the [`games::Game`] oracle trait and the bilinear, sufficiently-bilinear
//!   and Gaussian-GAN game families.
//! - [`hamiltonian`]: the finite-sum Hamiltonian `H(x) = ½‖ξ(x)‖²`, its pair estimators,
//!   pair sampling and the theory constants derived from a game.
//! - [`optimizers`]: SGDA, SHGD (unbiased and biased), consensus optimization, L-SVRHG
//!   and its restarted variant, step-size schedules and convergence bounds.

pub mod error;
pub mod games;
pub mod hamiltonian;
pub mod numerics;
pub mod optimizers;

pub use error::{Error, Result};
