//! Constructive maps between the three layers of bipartite quantum
//! correlation.
//!
//! Mixing a qudit-qubit state `τ` with the product partner
//! `τ_A ⊗ (𝟙 + cσ_z)/2` at visibility `μ` yields a state that admits a local
//! hidden-state model whenever `τ` admits a local hidden-variable model,
//! provided `(μ, c)` lies in the region `0 ≤ μ ≤ 1/√3`,
//! `0 ≤ c ≤ (√(1 - 2μ²) - μ)/(1 - μ)`. The mirrored construction on
//! qubit-qudit states turns local hidden-state models into separable ones.
//!
//! The crate builds those models explicitly for finite ensembles
//! ([`constructions`]), decides the `(μ, c)` region by vertex enumeration
//! ([`mapping`]), and provides witnesses for checking the implications on
//! concrete state families ([`witnesses`]).
//!
//! Conventions: subsystem A is the left tensor factor; qubit outcome `0` is
//! the `+1` eigenvalue of the measured Pauli direction.

pub mod constructions;
pub mod linalg;
pub mod mapping;
pub mod measurements;
pub mod models;
pub mod states;
pub mod witnesses;

pub use constructions::{
    theorem1_certificate, theorem2_certificate, verify_lhs_identity, verify_spm_identity, ConstructionError,
    Theorem1Certificate, Theorem2Certificate, Verification, VertexWitness,
};
pub use linalg::{CMatrix, LinalgError, Subsystem, C64};
pub use mapping::{
    analytic_c_max, corollary1_partner, corollary3_partner, feasible, map_m, map_n, region_scan, MapParams,
    MappingError, RegionPoint, MU_MAX,
};
pub use measurements::{MeasurementError, ProjMeasurement};
pub use models::{born_joint, model_joint, FiniteModel, ModelError, ModelKind, Response, ResponseTable, Setting};
pub use states::{werner, BlochVector, DensityMatrix, StateError};
pub use witnesses::{chsh_horodecki, f3_steering, negativity, werner_steerable_oracle, WitnessError, WitnessReport};
