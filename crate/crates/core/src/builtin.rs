//! The two three-state example networks.
//!
//! Both share the nominal map `A`; they differ only in the uncertain
//! directions. In the first the two links interact strongly, so the joint and
//! single-link sensitivities disagree; in the second they barely interact.

use crate::matrix::DenseMatrix;
use crate::network::{network_from_directions, AssembledNetwork, Direction};

/// Row-major nominal map shared by both examples.
pub const EXAMPLE_A: [f64; 9] = [-0.07, 1.0, -0.23, 0.10, 0.70, -0.10, -0.17, 1.0, -0.13];

/// Eigenvalues stated for [`EXAMPLE_A`] alongside the examples.
pub const STATED_EIGENVALUES: [f64; 3] = [0.7, 0.1, -0.1];

/// `(B̄₁, C₁, B̄₂, C₂)` of the first example.
pub const EXAMPLE_1: [[f64; 3]; 4] = [[-1.0, -1.0, 0.0], [1.0, 1.0, 0.0], [-1.0, 1.0, 0.0], [-5.0, -0.1, 0.01]];

/// `(B̄₁, C₁, B̄₂, C₂)` of the second example.
pub const EXAMPLE_2: [[f64; 3]; 4] = [[1.0, 0.0, -1.0], [-1.0, 1.0, 1.0], [-1.0, -1.0, 0.0], [-5.0, -1.0, 1.0]];

/// Example network `1` or `2` with links `L1`, `L2` and unit sigmas.
pub fn example(n: u8) -> Option<AssembledNetwork> {
    let v = match n {
        1 => EXAMPLE_1,
        2 => EXAMPLE_2,
        _ => return None,
    };
    let a = DenseMatrix::from_row_slice(3, 3, &EXAMPLE_A).expect("finite");
    let links = vec![
        Direction::new("L1", v[0].to_vec(), v[1].to_vec(), 1.0),
        Direction::new("L2", v[2].to_vec(), v[3].to_vec(), 1.0),
    ];
    Some(network_from_directions(a, links).expect("example dimensions agree"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::eigenvalues;
    use crate::sensitivity::analyze;

    #[test]
    fn both_examples_build() {
        for n in [1, 2] {
            let net = example(n).unwrap();
            assert_eq!(net.dim(), 3);
            assert_eq!(net.links().len(), 2);
        }
        assert!(example(3).is_none());
    }

    #[test]
    fn shared_nominal_map() {
        let spec = eigenvalues(example(1).unwrap().state_map()).unwrap();
        assert!((spec.radius - 0.7).abs() < 1e-8);
        let trace: f64 = spec.eigenvalues.iter().map(|e| e.re).sum();
        assert!((trace - 0.5).abs() < 1e-12);
    }

    #[test]
    fn first_example_interacts_more() {
        let i1 = analyze(&example(1).unwrap()).unwrap().interaction;
        let i2 = analyze(&example(2).unwrap()).unwrap().interaction;
        assert!(i2 < i1, "{i1} {i2}");
    }
}
