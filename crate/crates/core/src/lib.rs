pub mod cnf;
pub mod obdd;
pub mod proof;
pub mod reduction;
pub mod solver;
pub mod var;
