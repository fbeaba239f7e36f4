//! Contingency sensitivity analysis for linear networks whose links carry
//! multiplicative Gaussian uncertainty.
//!
//! The nominal network `x(t+1) = A x(t)` is perturbed along rank-one
//! directions `δ_i(t) B̄_i C_i`, one per uncertain link. From the observability
//! Gramians of `A` the crate derives
//!
//! * `F`: how much each link tolerates when all links are uncertain together,
//! * `S`: the same with only that link uncertain,
//! * `I`: how strongly simultaneous uncertainty reorders the links,
//!
//! and it maps the exact mean-square-stable set of noise levels. The
//! [`grid`] module turns a MATPOWER case into this form through Kron
//! reduction and linearized swing dynamics.
//!
//! ```
//! let net = gridsens::builtin::example(2).unwrap();
//! let report = gridsens::sensitivity::analyze(&net).unwrap();
//! assert!(report.interaction < 0.01);
//! ```

pub mod builtin;
pub mod cli;
pub mod error;
pub mod grid;
pub mod matrix;
pub mod network;
pub mod sensitivity;
pub mod spec_file;
pub mod stability;

pub use error::{Error, Result};
pub use nalgebra;
