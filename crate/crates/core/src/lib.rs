//! Exact solutions of the two-dimensional time-dependent Dunkl-Pauli
//! oscillator, together with the numerical machinery used to certify them.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod dunkl;
pub mod ep;
pub mod error;
pub mod fd;
pub mod grid;
pub mod invariant;
pub mod ode;
pub mod profiles;
pub mod special;
pub mod verification;
pub mod wavefunction;

pub use error::{Error, Result};
pub use grid::{Axis, CartesianGrid, Grid, Grid1D, GridFunction, PolarGrid, RadialGrid, ThetaGrid};
