//! From MATPOWER text to a Kron-reduced swing model and line directions.

use gridsens::grid::{build_laplacian, kron_reduce, parse_matpower, DynamicsConfig, GridModel, Partition, ReducedModel};
use gridsens::sensitivity::analyze;

const RING: &str = "\
function mpc = ring
mpc.bus = [
\t1\t3;
\t2\t1;
\t3\t2;
\t4\t1;
\t5\t2;
];
mpc.gen = [
\t1\t0;
\t3\t0;
\t5\t0;
];
mpc.branch = [
\t1\t2\t0\t0.10;
\t2\t3\t0\t0.20;
\t3\t4\t0\t0.10;
\t4\t5\t0\t0.25;
\t5\t1\t0\t0.30;
\t2\t4\t0\t0.40;
];
";

fn main() -> gridsens::Result<()> {
    let case = parse_matpower(RING)?;
    let l = build_laplacian(&case)?;
    let part = Partition::of(&case);
    println!("Laplacian over {} buses:\n{l}", case.buses.len());
    let l_red = kron_reduce(&l, &part.generators, &part.loads)?;
    println!("Kron-reduced over generators {:?}:\n{l_red}", case.gens);

    let config = DynamicsConfig::with_contingencies(["2-4", "1-2", "4-5"]);
    let reduced = ReducedModel::new(&case, &config)?;
    for &line in &[(2, 4), (1, 2), (4, 5)] {
        let v = reduced.line_vector(&case, line)?;
        println!("line {}-{}: v = {:?}", line.0, line.1, v.as_slice());
    }

    let model = GridModel::build(&case, &config)?;
    println!("network dimension after removing the invisible modes: {}", model.network.dim());
    let report = analyze(&model.network)?;
    let ranking: Vec<&str> = report.ranking.iter().map(|id| id.as_str()).collect();
    println!("criticality ranking: {}", ranking.join(" > "));
    println!("interaction index: {:.4e}", report.interaction);
    Ok(())
}
