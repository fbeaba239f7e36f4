//! Discrete Lyapunov solves and the observability Gramians behind F and S.

use gridsens::matrix::{
    lyapunov_residual, solve_discrete_lyapunov_direct, solve_discrete_lyapunov_doubling, spectral_radius, DenseMatrix,
};
use gridsens::network::{network_from_directions, Direction};
use gridsens::sensitivity::gramians;

fn main() -> gridsens::Result<()> {
    let a = DenseMatrix::from_rows(&[vec![0.6, 0.2, 0.0], vec![-0.1, 0.5, 0.3], vec![0.0, -0.2, 0.4]])?;
    let q = DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.5], vec![0.0, 0.5, 1.0]])?;
    println!("spectral radius of A: {:.6}", spectral_radius(&a)?);

    let direct = solve_discrete_lyapunov_direct(&a, &q)?;
    let doubling = solve_discrete_lyapunov_doubling(&a, &q)?;
    println!("P (direct) =\n{direct}");
    println!("residual, direct:   {:.3e}", lyapunov_residual(&a, &direct, &q));
    println!("residual, doubling: {:.3e}", lyapunov_residual(&a, &doubling, &q));
    println!("solver disagreement: {:.3e}", (direct.as_matrix() - doubling.as_matrix()).norm());

    let net = network_from_directions(
        a,
        vec![
            Direction::new("north", vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], 1.0),
            Direction::new("south", vec![0.0, 0.0, 1.0], vec![1.0, 0.0, -1.0], 1.0),
        ],
    )?;
    let set = gramians(&net)?;
    let sum = set.per_link.iter().fold(set.joint.as_matrix() * 0.0, |acc, (_, p)| acc + p.as_matrix());
    println!("joint Gramian minus sum of single-link Gramians: {:.3e}", (set.joint.as_matrix() - sum).norm());
    Ok(())
}
