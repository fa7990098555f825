//! Discrete Bayesian networks: exact inference by enumeration, arc reversal
//! and evidence integration, stochastic simulation, and an experiment
//! harness for comparing simulation algorithms against the exact answer.

pub mod error;
pub mod exact;
pub mod fixtures;
pub mod harness;
pub mod io;
pub mod network;
pub mod rng;
pub mod sampling;
pub mod transform;

pub use error::{BnError, Result};
pub use exact::{exact_inference, ExactResult};
pub use network::{Assignment, Cpt, Evidence, Network, Variable, Violation};
pub use rng::RandomStream;
pub use sampling::{Algorithm, Estimate};
pub use transform::{integrate_evidence, reverse_arc, IntegrationMode};
