//! Spectral simulation and normal-form computations for the nonlinear
//! Klein-Gordon equation on a discrete torus.

pub mod error;
pub mod hampoly;
pub mod harness;
pub mod integrators;
pub mod normalform;
pub mod nonlinearity;
pub mod report;
pub mod sample;
pub mod spectral;

pub use error::{Error, Result};
pub use hampoly::{PolyHamiltonian, TimePoly};
pub use harness::{ExperimentConfig, Quantity, ScalingTable};
pub use integrators::{MethodSpec, Scheme};
pub use nonlinearity::NonlinearitySpec;
pub use normalform::{BirkhoffOutput, CohomologySolution, ModifiedHamiltonian};
pub use report::{DriftReport, DriftRow, DriftSummary};
pub use spectral::{FrequencySpec, ModeState, Mollifier, RealState, TorusGrid};
