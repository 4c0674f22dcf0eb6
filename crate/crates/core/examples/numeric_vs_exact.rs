//! The monodromy eigenvector pipeline against the exact rational charge.

use num_complex::Complex64;

use heisenberg_charges::exact::charge_exact;
use heisenberg_charges::monodromy::{charge_numeric, power_limit_oracle};
use heisenberg_charges::spin_algebra::RepIndex;
use heisenberg_charges::state::SpinState;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let psi: SpinState = "1112122121".parse()?;
    let jj = RepIndex::new(2)?;
    let rc = charge_exact(&psi, jj)?;
    println!("{:>6} {:>22} {:>22}", "mu", "exact", "numeric");
    for mu in [-4.0, -1.0, 0.0, 0.5, 2.0, 8.0] {
        let x = charge_numeric(&psi, jj, Complex64::new(mu, 0.0))?;
        println!("{mu:>6} {:>22.15e} {:>22.15e}", rc.eval_f64(mu), x.re);
    }
    let mu = Complex64::new(0.5, 0.0);
    for k in [1, 10, 1000] {
        let v = power_limit_oracle(&psi, jj, mu, k)?;
        println!("finite chain N/M = {k}: {:.15e}", v.re);
    }
    Ok(())
}
