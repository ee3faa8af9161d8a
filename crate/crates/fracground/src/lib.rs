//! Spectral solver and verification suite for ground states of the
//! fractional Schrodinger equation `(-Delta)^s u + u = |u|^{p-1} u` on a
//! periodic box, computed by constrained minimization of the Gagliardo
//! seminorm over the set `\int G(u) = 1` and rescaled into a PDE solution
//! through the dilation multiplier.

pub mod barrier;
pub mod config;
pub mod error;
pub mod field;
pub mod fracops;
pub mod io;
pub mod minimize;
pub mod params;
pub mod quadrature;
pub mod rearrange;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{make_grid, BoxGrid, ScalarField};
pub use params::ProblemParams;
