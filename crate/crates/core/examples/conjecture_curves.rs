//! Exact charge against the large-mu approximation and the closed form,
//! with the maximal relative deviation over [-10, 10].

use heisenberg_charges::conjecture::{deviation, folded_ratio, write_curve_csv, x_infinity_real, Backend, GridSpec};
use heisenberg_charges::spin_algebra::RepIndex;
use heisenberg_charges::state::SpinState;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let psi: SpinState = "1112122121".parse()?;
    for jj in [1, 4, 8] {
        let jj = RepIndex::new(jj)?;
        let d = deviation(&psi, jj, &GridSpec::default(), Backend::Exact)?;
        println!(
            "jj = {jj}: r = {:.3}, delta = {:.4} at mu = {:.3}, X_inf(0) = {:.6}",
            folded_ratio(&psi),
            d.delta,
            d.argmax,
            x_infinity_real(jj, 0.0)
        );
    }
    let mus: Vec<f64> = (0..=8).map(|k| -10.0 + 2.5 * k as f64).collect();
    write_curve_csv(&psi, RepIndex::new(1)?, &mus, Backend::Exact, std::io::stdout())?;
    Ok(())
}
