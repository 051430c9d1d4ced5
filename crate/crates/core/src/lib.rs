//! Quantum Landau-Lifshitz-Gilbert dynamics of interacting spins.
//!
//! The crate integrates the damped, purity-conserving master equation
//! `ρ̇ = (i/ħ)[ρ, H] + iκ[ρ, ρ̇]` for spin-s systems, its explicit
//! Landau-Lifshitz counterpart (q-LL) and the classical LLG equations for
//! coupled moments, together with the observables used to compare them:
//! Bloch vectors, the two-qubit correlation matrix, Bell nonlocality and
//! entropies.
//!
//! Units throughout: meV, ps, tesla; spin operators in units of ħ,
//! classical moments in units of μ_B.

pub mod cldyn;
pub mod error;
pub mod linalg;
pub mod models;
pub mod observables;
pub mod qdyn;
pub mod series;
pub mod spin;

pub use cldyn::{ClassicalParams, ClassicalState};
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, EigDecomposition};
pub use models::{CouplingScale, HamiltonianSpec, PhysicalConstants, UnitSystem};
pub use observables::{CorrelationMatrix, Observable, QuantumProbe};
pub use qdyn::{Equation, Integrator, PurePropagator, QDynParams};
pub use series::TimeSeries;
pub use spin::{Bell, DensityOperator, Spin, SpinSystem};
