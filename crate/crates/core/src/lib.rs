pub mod duality;
pub mod error;
pub mod evolution;
pub mod fock;
pub mod interferometer;
pub mod propagation;
pub mod runner;
