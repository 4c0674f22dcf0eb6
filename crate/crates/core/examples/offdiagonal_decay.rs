//! Repeated products of mixed Lax blocks, and the norm of the off-diagonal
//! block over a grid.

use heisenberg_charges::ensemble::{
    contraction_closed_form_jj1, contraction_sup, decays, offdiagonal_decay, GeneralStatePair,
};
use heisenberg_charges::spin_algebra::RepIndex;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pair = GeneralStatePair::new("1121212122".parse()?, "1212121212".parse()?)?;
    for jj in 1..=2 {
        let norms = offdiagonal_decay(&pair, RepIndex::new(jj)?, 1.0, 10)?;
        let shown: Vec<String> = norms.iter().map(|v| format!("{v:.3e}")).collect();
        println!("jj = {jj}: decays {}, norms [{}]", decays(&norms), shown.join(", "));
    }
    for jj in 1..=2 {
        let s = contraction_sup(RepIndex::new(jj)?, -4.0, 4.0, 81)?;
        println!("jj = {jj}: sup norm {:.6} at mu = {}, x = {}", s.sup, s.mu, s.x);
    }
    println!("closed form at the origin: {:.6}", contraction_closed_form_jj1(0.0, 0.0));
    Ok(())
}
