//! Fixtures shared by the benchmarks.

use nalgebra::Vector3;
use qllg_core::models::build_quantum_hamiltonian;
use qllg_core::spin::parse_state;
use qllg_core::{CMatrix, DensityOperator, HamiltonianSpec, PhysicalConstants, Spin, SpinSystem};

/// Spin-s dimer in 1 T along x with |J| = μ_B·B₀, started from `|+s⟩⊗|−s⟩`.
pub fn spin_dimer(twice_s: u32, exchange_sign: f64) -> (DensityOperator, CMatrix) {
    let s = Spin::from_twice(twice_s).expect("valid spin");
    let system = SpinSystem::uniform(s, 2).expect("two sites");
    let c = PhysicalConstants::paper();
    let spec = HamiltonianSpec::new(system.clone(), Vector3::x(), c)
        .with_coupling(0, 1, exchange_sign * c.mu_b, Vector3::new(0.0, 0.0, 0.6 * c.mu_b))
        .expect("pair coupling");
    let h = build_quantum_hamiltonian(&spec).expect("hamiltonian");
    let rho = parse_state(&format!("projector:+{s},-{s}"), &system).expect("state");
    (rho, h)
}
