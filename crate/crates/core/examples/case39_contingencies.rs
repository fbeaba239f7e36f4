//! Ranking two contingency sets on the bundled 39-bus system.

use gridsens::grid::{build_grid_network, case39, DynamicsConfig, CASE39_GREEN, CASE39_RED};
use gridsens::sensitivity::analyze;

fn main() -> gridsens::Result<()> {
    let case = case39();
    println!("{} buses, {} generators, {} branches", case.buses.len(), case.generator_count(), case.branches.len());
    let mut interactions = Vec::new();
    for (name, set) in [("green", CASE39_GREEN), ("red", CASE39_RED)] {
        let net = build_grid_network(&case, &DynamicsConfig::with_contingencies(set))?;
        let report = analyze(&net)?;
        println!("{name} set ({} states):", net.dim());
        for (k, (id, f)) in report.normalized_f.iter().enumerate() {
            println!("  {id:>6}: F/max = {f:.4}  S/max = {:.4}", report.normalized_s[k].1);
        }
        let join = |ids: &[gridsens::network::LinkId]| ids.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(", ");
        println!("  F ranking: {}", join(&report.ranking));
        println!("  S ranking: {}", join(&report.s_ranking));
        println!("  I = {:.5}", report.interaction);
        interactions.push(report.interaction);
    }
    println!("I_red / I_green = {:.2}", interactions[1] / interactions[0]);
    Ok(())
}
