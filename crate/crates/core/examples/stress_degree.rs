//! Exact charges of long random states at jj = 3: denominator degree and
//! coefficient size.

use std::time::Instant;

use heisenberg_charges::exact::charge_exact;
use heisenberg_charges::spin_algebra::RepIndex;
use heisenberg_charges::state::SpinState;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let jj = RepIndex::new(3)?;
    let psi: SpinState = "1211122111121211211111212121221222121121".parse()?;
    let start = Instant::now();
    let rc = charge_exact(&psi, jj)?;
    println!(
        "psi = {psi}\ndenominator degree {} max digits {} ({:.2?})",
        rc.denominator_degree(),
        rc.denominator.max_coeff_digits(),
        start.elapsed()
    );
    Ok(())
}
