//! Power-grid ingestion: MATPOWER tables to Kron-reduced swing dynamics and
//! per-line uncertainty directions.

pub mod config;
pub mod laplacian;
pub mod matpower;
pub mod swing;

pub use config::{parse_line, DynamicsConfig, Keyed};
pub use laplacian::{build_laplacian, kron_reduce, Partition};
pub use matpower::{parse_matpower, parse_tables, write_matpower, Branch, Bus, BusKind, GridCase, Table};
pub use swing::{build_grid_network, discretize, require_stable_swing, swing_state_matrix, GridModel, ReducedModel};

/// Text of the bundled IEEE 39-bus (New England) case.
pub const CASE39: &str = include_str!("../../data/case39.m");

/// The bundled 39-bus case, parsed.
pub fn case39() -> GridCase {
    parse_matpower(CASE39).expect("bundled case39 parses")
}

/// Contingency sets studied on the 39-bus case.
pub const CASE39_GREEN: [&str; 4] = ["37-25", "36-23", "33-19", "39-9"];
pub const CASE39_RED: [&str; 4] = ["38-29", "34-20", "35-22", "39-1"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_case_shape() {
        let case = case39();
        assert_eq!(case.buses.len(), 39);
        assert_eq!(case.generator_count(), 10);
        assert_eq!(case.load_count(), 29);
        assert_eq!(case.branches.len(), 46);
    }
}
