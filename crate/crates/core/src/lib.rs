//! Random walks on linear groups over ℝ and ℚ_p: recurrence statistics,
//! Markov-operator invariant measures, contraction and growth structure, and
//! simulation of several homogeneous-space examples.

pub mod affine;
pub mod cli;
pub mod error;
pub mod fiber;
pub mod fields;
pub mod harmonic;
pub mod io;
pub mod linalg;
pub mod markov;
pub mod measures;
pub mod models;
pub mod projective;
pub mod rng;
pub mod stats;
pub mod transfer;
pub mod walk;

pub use error::{Error, Result};
