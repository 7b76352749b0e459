//! Device-independent certification of maximal randomness from nonlocal
//! correlations: behaviors and their quantum realizations, closed-form family
//! constructions, measurement incompatibility, a small SDP engine, moment-matrix
//! relaxations of the quantum set, and numeric oracles.

pub mod analytic;
pub mod figures;
pub mod incompat;
pub mod matkernel;
pub mod npa;
pub mod numverify;
pub mod quantum;
pub mod scenario;
pub mod sdpcore;

pub use analytic::{FBoundResult, FamilyKind, FamilyRealization};
pub use matkernel::{Complex, ComplexMatrix};
pub use quantum::{BinaryQubitMeasurement, MeasurementAssembly, PureState, RealizationFile};
pub use scenario::{Behavior, FamilyParams, Scenario, ValidationReport};
