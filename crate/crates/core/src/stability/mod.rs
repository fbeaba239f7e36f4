//! Mean-square stability under Gaussian link uncertainty.

pub mod monte_carlo;
pub mod operator;
pub mod region;

pub use monte_carlo::{monte_carlo_growth, MonteCarloConfig, MonteCarloResult};
pub use operator::{
    apply_adjoint, apply_operator, mss_spectral_radius, mss_spectral_radius_dense, mss_spectral_radius_power,
    operator_matrix, propagate_second_moment, LoopGain, SigmaAssignment,
};
pub use region::{feasibility_boundary, scaled_rectangle, RayPoint, Rectangle, RegionResult};
