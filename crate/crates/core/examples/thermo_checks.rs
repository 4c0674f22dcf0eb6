//! Infinite-temperature averages, string densities and the Y-system.

use num_complex::Complex64;

use heisenberg_charges::thermo::{
    gibbs_average, lambda0_finite_n, literal_average, spectrum_check, string_densities, y_system_check, CasimirSpec,
};
use heisenberg_charges::spin_algebra::RepIndex;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for jj in 1..=3 {
        let jj = RepIndex::new(jj)?;
        let spec = CasimirSpec::new(jj)?;
        let levels: Vec<(u32, usize)> = spec.spectrum.iter().map(|l| (l.rlabel, l.multiplicity)).collect();
        let check = spectrum_check(jj, Complex64::new(0.3, 0.0), Complex64::new(-0.8, 0.1))?;
        println!("jj = {jj}: irreps {levels:?}, eigenvalue check {check:.1e}");
        let mu = 0.4;
        println!(
            "  average {:.12}  lambda_0 limit {:.12}  trace N=12 {:.12}",
            gibbs_average(jj, mu),
            lambda0_finite_n(jj, mu, 10_000)?,
            literal_average(jj, mu, 12)?
        );
        let d = string_densities(jj, 0.0)?;
        println!("  rho(0) = {:.12}, rho_bar(0) = {:.12}, eta = {}", d.rho, d.rho_bar, d.eta);
    }
    println!("Y-system residual up to jj = 20: {}", y_system_check(20)?);
    Ok(())
}
