//! Sensitivity indices of the two built-in three-state networks.

use gridsens::builtin::example;
use gridsens::matrix::eigenvalues;
use gridsens::sensitivity::analyze;

fn main() -> gridsens::Result<()> {
    for n in [1, 2] {
        let net = example(n).expect("built-in example");
        let spectrum = eigenvalues(net.state_map())?;
        let eig: Vec<String> = spectrum.eigenvalues.iter().map(|e| format!("{:.4}", e.re)).collect();
        println!("example {n}: eigenvalues {}", eig.join(", "));
        let report = analyze(&net)?;
        for (k, (id, f)) in report.f.iter().enumerate() {
            println!("  {id}: F = {f:.5}  S = {:.5}", report.s[k].1);
        }
        println!("  interaction index I = {:.6}", report.interaction);
        println!("  F ranking and S ranking agree: {}", report.orderings_agree());
    }
    Ok(())
}
