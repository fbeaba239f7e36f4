//! Assembling a compact model from node subsystems and couplings, then
//! checking the modelling assumptions.

use gridsens::matrix::DenseMatrix;
use gridsens::network::{assemble_network, check_assumptions, CouplingLink, Subsystem, UncertainLink};
use gridsens::sensitivity::analyze;

fn main() -> gridsens::Result<()> {
    // a ring of four damped oscillators with different stiffness
    let node = |k: f64| {
        Subsystem::new(DenseMatrix::from_rows(&[vec![0.9, 0.2], vec![-0.2 - 0.1 * k, 0.7]])?, vec![0.0, 1.0], vec![1.0, 0.0])
    };
    let nodes = vec![node(0.0)?, node(1.0)?, node(2.0)?, node(3.0)?];
    let couplings: Vec<CouplingLink> = [(1, 2, 0.05), (2, 3, 0.08), (3, 4, 0.03), (4, 1, 0.06)]
        .iter()
        .map(|&(from, to, mu)| CouplingLink { from, to, mu, a: -1.0, b: 1.0 })
        .collect();
    let uncertain = [UncertainLink { from: 1, to: 2, sigma: 0.1 }, UncertainLink { from: 3, to: 4, sigma: 0.1 }];
    let net = assemble_network(&nodes, &couplings, &uncertain)?;
    println!("compact state dimension: {}", net.dim());

    let report = check_assumptions(&net)?;
    println!("spectral radius {:.4}, smallest singular value {:.4}", report.radius, report.min_singular);
    for link in &report.links {
        println!("link {}: observable = {} (margin {:.3e})", link.id, link.observable, link.margin);
    }

    let s = analyze(&net)?;
    for ((id, f), (_, sv)) in s.f.iter().zip(&s.s) {
        println!("{id}: F = {f:.4}, S = {sv:.4}");
    }
    println!("interaction index {:.3e}", s.interaction);
    Ok(())
}
