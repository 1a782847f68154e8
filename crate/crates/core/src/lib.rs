//! Loop-soup percolation on the integer lattice Z^d.
//!
//! The crate samples the Poisson ensemble of random-walk loops with
//! intensity `alpha * mu`, where `mu` gives a closed nearest-neighbour path of
//! length `n` the weight `(1/n) (2d)^-n`, and analyses the connectivity of the
//! edges the loops traverse. Around the sampler sit the potential-theory
//! tools needed to compare simulations with first-order asymptotics: the
//! lattice Green's function, capacities and equilibrium measures, and
//! Rao-Blackwellised estimators of loop-measure connection masses.
//!
//! Module map:
//!
//! * [`lattice`]: points, edges, Euclidean balls and their boundaries.
//! * [`greens`]: Green's function, `C_d`, capacity, hitting probabilities.
//! * [`loopmeasure`]: return-probability tables, exact bridge sampling,
//!   loop-mass estimators.
//! * [`soup`]: full-window soup sampler and origin-cluster exploration.
//! * [`percolation`]: union-find clusters, one-arm and two-point events.
//! * [`experiments`]: Monte Carlo campaigns, Mecke/FKG suites and the CLI.

pub mod error;
pub mod experiments;
pub mod greens;
pub mod lattice;
pub mod loopmeasure;
pub mod percolation;
pub mod rng;
pub mod soup;
pub mod stats;

pub use error::{Error, Result};
pub use lattice::{Ball, Edge, Point};
