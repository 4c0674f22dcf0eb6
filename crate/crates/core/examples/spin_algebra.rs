//! Ladder conventions, commutation relations and the Casimir.

use num_complex::Complex64;

use heisenberg_charges::spin_algebra::{LadderConvention, RepIndex, SpinOperators};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for jj in 1..=4 {
        let jj = RepIndex::new(jj)?;
        for conv in [LadderConvention::Integer, LadderConvention::Unitary] {
            let ops = SpinOperators::build(jj, conv);
            let sz_sp = ops.sz.commutator(&ops.sp) - ops.sp.clone();
            let sp_sm = ops.sp.commutator(&ops.sm) - ops.sz.scale(&Complex64::new(2.0, 0.0));
            let c = ops.casimir();
            println!(
                "jj = {jj} {conv:?}: |[sz,s+] - s+| = {:.1e}, |[s+,s-] - 2sz| = {:.1e}, casimir = {:.3}",
                sz_sp.frobenius(),
                sp_sm.frobenius(),
                c.get(0, 0).re
            );
        }
    }
    Ok(())
}
