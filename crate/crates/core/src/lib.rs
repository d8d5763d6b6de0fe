//! Level-set solvers for G-equation front propagation in periodic flows.

pub mod corrector;
pub mod error;
pub mod flow;
pub mod grid;
pub mod harness;
pub mod hj;
pub mod metrics;
pub mod reinit;
pub mod snapshot;
pub mod stepping;

pub use error::{Error, Result};
pub use flow::{Flow, FlowSamples, FlowSpec, VelocitySample};
pub use grid::{AffineField, Grid, VectorField};
pub use stepping::{LinearSolveReport, Model, ModelConfig, Scheme, SchemeChoice, SimState, Stepper};
