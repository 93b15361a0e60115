//! Finite Gabor analysis on `Z_L`: lattices, frame operators, the Zak transform,
//! fundamental identities, holomorphic calculus of frame operators, window
//! spaces and a divergence study for Fourier series on the torus.

pub mod counterexample;
pub mod error;
pub mod gabor;
pub mod identities;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod signal;
pub mod spaces;
pub mod spectral;
pub mod windows;
pub mod zak;

pub use error::{GaborError, Result};
pub use num_complex::Complex64;
