pub mod cli;
pub mod diffring;
pub mod errata;
pub mod grassmann;
pub mod hamiltonian;
pub mod hierarchy;
pub mod linalg;
pub mod numcheck;
pub mod operator;
pub mod superlie;
