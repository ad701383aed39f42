//! Numerical checks for nonuniform `(h, k, μ, ν)`-trichotomy of linear
//! evolution operators on `R^n`, and the Lyapunov-type norm families that
//! turn the nonuniform inequalities into constant-free ones.
//!
//! The crate is organised bottom-up:
//!
//! * [`growth`]: growth rates `h, k, μ, ν` and their ratios;
//! * [`projectors`]: projector families, invariance and restricted inverses;
//! * [`evolution`]: closed-form and ODE-generated evolution operators;
//! * [`trichotomy`]: required bounding factors and the envelopes `N(t)`;
//! * [`lyapunov`]: the sup-norm families and both directions of the
//!   characterisation theorems.

pub mod check;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod growth;
pub mod linalg;
pub mod lyapunov;
pub mod projectors;
pub mod trichotomy;

pub use check::{CheckReport, Residual};
pub use error::{Error, Result};
pub use evolution::{EvolutionOperator, ExampleRates, Generator, GeneratorSpec, Provenance};
pub use growth::{GrowthRate, RateKind, RateSet};
pub use linalg::{Mat, Vector};
pub use projectors::{InverseFamily, ProjectorFamily};
pub use lyapunov::{LyapunovNormFamily, NormConfig, NormStyle, TestVectors, TheoremReport};
pub use trichotomy::{Form, Inequality, NBound, TrichotomyReport};
