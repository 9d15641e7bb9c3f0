//! Lattice laboratory for gauged nonlinear Schrödinger equations whose
//! nonlinearity is complex, with the Doebner-Goldin family as the built-in
//! instance.
//!
//! The crate evolves `psi` under the original equation or under either of
//! the two transformed equations, and checks that both routes describe the
//! same physics.

pub mod error;
pub mod fields;
pub mod grid;
pub mod potentials;
pub mod presets;
pub mod transforms;
pub mod evolve;
pub mod verify;

pub use error::{Error, Result};
pub use evolve::{Equation, Evolution, EvolutionState, GaugeMode, IntegratorConfig};
pub use fields::{FieldStrength, GaugeField, HydroFields, WaveField};
pub use grid::{ComplexField, Lattice, PhysicalConstants, ScalarField, VectorField};
pub use potentials::{DgParams, Model, PotentialSpec};
pub use presets::{GaugePreset, InitialPreset};
pub use transforms::{Generator, Route};
pub use verify::{Scenario, VerificationReport};
