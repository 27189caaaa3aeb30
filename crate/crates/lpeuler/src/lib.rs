//! Littlewood-Paley analysis toolkit and 2D incompressible Euler laboratory
//! on the periodic square.
//!
//! The crate provides, in build order:
//!
//! - [`weights`]: slowly varying weight functions in the Karamata sense and
//!   their admissibility classes `M_r`.
//! - [`field`]: spectral fields on `[0, l)^2`, FFT plumbing, dealiased
//!   products.
//! - [`lp`]: the dyadic partition of unity and Littlewood-Paley projections.
//! - [`spaces`]: weighted Besov and Triebel-Lizorkin norms and embedding
//!   checks.
//! - [`calculus`]: Bony paraproducts, commutators, Fourier multipliers, the
//!   discrete maximal operator, and the inequality-verification harness.
//! - [`euler`]: a pseudo-spectral 2D incompressible Euler solver in vorticity
//!   form with Biot-Savart inversion, flow-map tracking, and diagnostics.
//! - [`iteration`]: the constructive local-existence iteration with uniform
//!   bound and Cauchy measurements.
//! - [`cli`]: the `norms` / `verify` / `simulate` / `iterate` / `weights`
//!   subcommand front end used by the `lpeuler` binary.
//!
//! Start with `examples/` for runnable tours of each capability.

pub mod calculus;
pub mod cli;
pub mod config;
pub mod error;
pub mod euler;
pub mod field;
pub mod io;
pub mod iteration;
pub mod lp;
pub mod spaces;
pub mod weights;

mod quad;

pub use error::{Error, Result};
pub use field::{Axis, FrequencyGrid, SpectralField, VectorField};
pub use lp::DyadicPartition;
pub use spaces::{Family, SpaceSpec};
pub use weights::SlowlyVaryingWeight;
