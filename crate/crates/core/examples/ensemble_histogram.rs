//! Seeded ensemble of random substates: deviation quantiles and histogram.

use heisenberg_charges::conjecture::GridSpec;
use heisenberg_charges::ensemble::{run_ensemble, write_histogram_csv, EnsembleConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = EnsembleConfig::new(50, 1, 40, 7);
    cfg.grid = GridSpec::new(-10.0, 10.0, 1001, 10)?;
    cfg.bins = 10;
    let report = run_ensemble(&cfg)?;
    println!("quantiles: {:?}", report.quantiles);
    println!("periodic states: {}, failures: {}", report.nongeneric, report.failed);
    write_histogram_csv(&report, std::io::stdout())?;
    Ok(())
}
