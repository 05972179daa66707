//! Spectral parameter power series (SPPS) for `u'' + q u = λ u`.
//!
//! Given a nonvanishing particular solution `f` of `f'' + q f = 0`, the
//! recursive integrals of `φ = f²` give two solutions of the spectral
//! problem as power series in `λ`, with coefficients computed once per seed.
//! On top of that sit generalized Taylor expansions in the basis
//! `ψ_k`, the matrices relating generalized and ordinary derivatives, and an
//! eigenvalue search for regular Sturm–Liouville problems.
//!
//! Everything is generic over [`Real`] (`f32`, `f64`); the aliases below fix
//! the common double-precision instantiation.
//!
//! ```
//! use spps_core::{Grid64, GridFunction64, RecursiveFamily64};
//! use spps_core::spps::{SolutionKind, SppsSolution};
//! use spps_core::scalar::cx;
//!
//! let grid = Grid64::uniform(0.0, 1.0, 1001).unwrap();
//! let f = GridFunction64::constant(&grid, cx(1.0));
//! let family = RecursiveFamily64::build(&f, 0, 40).unwrap();
//! // u'' = 4u, u(0) = 1, u'(0) = 0
//! let u = SppsSolution::new(&family, cx(4.0), 20, SolutionKind::U1).unwrap();
//! assert!((u.value(0.5).unwrap().re - 1f64.cosh()).abs() < 1e-10);
//! ```

// index loops mirror the recurrences; `!(x > y)` deliberately catches NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod chebfit;
pub mod error;
pub mod gentaylor;
pub mod grid;
pub mod jet;
pub mod linalg;
pub mod recint;
pub mod scalar;
pub mod seeds;
pub mod spps;
pub mod stencil;
pub mod sturm;
pub mod transform;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction};
pub use jet::Jet;
pub use recint::RecursiveFamily;
pub use scalar::{Cx, Real};
pub use transform::TransformMatrix;

pub type Grid64 = Grid<f64>;
pub type GridFunction64 = GridFunction<f64>;
pub type Jet64 = Jet<f64>;
pub type RecursiveFamily64 = RecursiveFamily<f64>;
pub type TransformMatrix64 = TransformMatrix<f64>;
pub type SlProblem64 = sturm::SlProblem<f64>;

pub type Grid32 = Grid<f32>;
pub type GridFunction32 = GridFunction<f32>;
pub type Jet32 = Jet<f32>;
pub type RecursiveFamily32 = RecursiveFamily<f32>;
pub type TransformMatrix32 = TransformMatrix<f32>;
pub type SlProblem32 = sturm::SlProblem<f32>;

/// Library version, recorded in CLI manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
