//! Poles of an exact charge, their position relative to the strip
//! |Im mu| < 1/2, and the Jordan-block test at each of them.

use heisenberg_charges::exact::charge_exact;
use heisenberg_charges::poles::{classify_physical_strip, curve_solutions, find_poles, hyperbola_residual, jordan_check};
use heisenberg_charges::spin_algebra::RepIndex;
use heisenberg_charges::state::SpinState;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let psi: SpinState = "1111212".parse()?;
    let jj = RepIndex::new(1)?;
    let poles = find_poles(&charge_exact(&psi, jj)?)?;
    let curve = curve_solutions(psi.len())?;
    println!("{} poles, root residual {:.1e}", poles.total(), poles.residual);
    for &z in poles.upper_half() {
        let j = jordan_check(&psi, jj, z)?;
        println!(
            "mu = {:+.12} {:+.12}i  hyperbola {:.1e}  curve {:.1e}  |w.v| {:.1e}",
            z.re,
            z.im,
            hyperbola_residual(z),
            curve.distance_to(z),
            j.overlap
        );
    }
    let strip = classify_physical_strip(&poles);
    println!("inside the strip: {}, closest |Im mu| = {:.6}", strip.inside.len(), strip.min_distance);
    Ok(())
}
