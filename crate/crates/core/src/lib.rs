pub mod config;
pub mod csvio;
pub mod equilibrium;
pub mod kinetics;
pub mod roots;
pub mod specfun;
pub mod verify;
