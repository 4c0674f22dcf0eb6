//! Exact rational charge of a short substate, printed as a formula and as
//! JSON.

use heisenberg_charges::exact::charge_exact;
use heisenberg_charges::spin_algebra::RepIndex;
use heisenberg_charges::state::SpinState;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let psi: SpinState = "1111212".parse()?;
    for jj in 1..=2 {
        let rc = charge_exact(&psi, RepIndex::new(jj)?)?;
        println!("jj = {jj}: X(mu) = {rc}");
    }
    let rc = charge_exact(&psi, RepIndex::new(1)?)?;
    println!("{}", serde_json::to_string_pretty(&rc.to_json())?);
    Ok(())
}
