//! Leading large-mu coefficient of exact charges against the closed form in
//! the numbers of up and down spins.

use heisenberg_charges::conjecture::approx_leading_coefficient;
use heisenberg_charges::exact::charge_exact;
use heisenberg_charges::spin_algebra::RepIndex;
use heisenberg_charges::state::SpinState;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for s in ["12", "112", "1111212", "1112122121", "111221212212"] {
        let psi: SpinState = s.parse()?;
        for jj in 1..=3 {
            let jj = RepIndex::new(jj)?;
            let lc = charge_exact(&psi, jj)?.leading_coefficient()?;
            let approx = approx_leading_coefficient(jj, psi.n_up(), psi.n_down())?;
            println!("{s:>12} jj = {jj}: {lc} {}", if lc == approx { "==" } else { "!=" });
        }
    }
    Ok(())
}
