pub mod cli;
pub mod conjecture;
pub mod ensemble;
pub mod error;
pub mod exact;
pub mod lax;
pub mod matrix;
pub mod monodromy;
pub mod output;
pub mod poles;
pub mod poly;
pub mod roots;
pub mod scalar;
pub mod spin_algebra;
pub mod state;
pub mod thermo;
