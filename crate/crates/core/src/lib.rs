//! Compact-model circuit simulation for memristive devices.

pub mod analyses;
pub mod circuit;
pub mod devices;
pub mod dual;
pub mod engine;
pub mod linsolve;
pub mod modspec;
pub mod netlist;
pub mod runner;
pub mod smooth;
pub mod solver;
