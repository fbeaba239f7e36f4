//! The mean-square-stable set of (σ₁, σ₂) for example 1 and the rectangles
//! inscribed along the uniform, F-weighted and S-weighted rays.

use gridsens::builtin::example;
use gridsens::stability::{feasibility_boundary, mss_spectral_radius, SigmaAssignment};

fn main() -> gridsens::Result<()> {
    let net = example(1).expect("built-in example");
    let region = feasibility_boundary(&net, 91, 1e-9)?;
    println!("single-link bounds: σ₁ ≤ {:.5}, σ₂ ≤ {:.5}", region.siso_bounds.0, region.siso_bounds.1);
    for ray in region.rays.iter().step_by(15) {
        println!("  θ = {:>6.3}  boundary at ({:.5}, {:.5})", ray.angle, ray.sigma1, ray.sigma2);
    }
    for (name, r) in [("uniform", region.uniform_square), ("F-scaled", region.f_scaled), ("S-scaled", region.s_scaled)] {
        println!("{name:>8}: corner ({:.5}, {:.5}), area {:.5}", r.corner.0, r.corner.1, r.area);
    }

    // the boundary is where the second-moment operator reaches radius one
    let mid = region.rays[45];
    let on_boundary = SigmaAssignment::new(&net, vec![mid.sigma1, mid.sigma2])?;
    println!("ρ(T) on the boundary: {:.8}", mss_spectral_radius(&net, &on_boundary)?);
    Ok(())
}
