//! Built-in scenarios for the dimer figures and the spin-s sweeps.
//!
//! All presets use `paper` units, B₀ = 1 T, |J| = 1 μ_B·B₀ and
//! κ = α = 0.5. Horizons are engineering choices long enough for every
//! asymptote to settle: 100 ps for the dimer figures (runs stop early once
//! ρ is stationary) and 20 ps for the spin-s sweeps.

use qllg_core::{Integrator, UnitSystem};

use crate::config::{
    ClassicalCompare, DynamicsConfig, Engine, HamiltonianConfig, OutputConfig, RunConfig, ScenarioConfig,
    SystemConfig,
};
use crate::error::CliError;

pub const PRESETS: [&str; 10] = [
    "fig1a", "fig1b", "fig1c", "fig1d", "fig2a", "fig2b", "fig3", "fig4", "sm_afm", "sm_fm",
];

const KAPPA: f64 = 0.5;
const DT: f64 = 1e-3;
const STRIDE: usize = 10;
const DIMER_T_MAX: f64 = 100.0;
const SM_T_MAX: f64 = 20.0;
const X: [f64; 3] = [1.0, 0.0, 0.0];
const Z: [f64; 3] = [0.0, 0.0, 1.0];

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn vector_names(prefix: &str) -> Vec<String> {
    ["x", "y", "z", "mag"].iter().map(|c| format!("{prefix}_{c}")).collect()
}

fn hamiltonian(b: [f64; 3], j: f64, d_over_j: f64) -> HamiltonianConfig {
    HamiltonianConfig {
        b_field: b,
        exchange: None,
        exchange_over_zeeman: Some(j),
        dmi: None,
        dmi_over_exchange: (d_over_j != 0.0).then_some(d_over_j),
        dmi_axis: (d_over_j != 0.0).then_some(Z),
        coupling_scale: None,
    }
}

fn qllg(t_max: f64) -> DynamicsConfig {
    DynamicsConfig {
        engine: Engine::Qllg,
        kappa: Some(KAPPA),
        alpha: None,
        dt: DT,
        t_max,
        integrator: Some(Integrator::Rk4),
        steady_tol: None,
    }
}

fn dimer_run(label: &str, state: &str, observables: Vec<String>, h: HamiltonianConfig) -> RunConfig {
    RunConfig {
        label: label.into(),
        initial_state: Some(state.into()),
        moments: None,
        observables,
        system: SystemConfig {
            spins: vec![0.5, 0.5],
        },
        hamiltonian: h,
        dynamics: qllg(DIMER_T_MAX),
        classical: None,
    }
}

fn scenario(name: &str, runs: Vec<RunConfig>, plot: Vec<String>) -> ScenarioConfig {
    ScenarioConfig {
        units: UnitSystem::Paper,
        seed: 0,
        output: OutputConfig {
            csv: format!("{name}.csv"),
            svg: Some(format!("{name}.svg")),
            plot: Some(plot),
            sample_stride: STRIDE,
        },
        runs,
    }
}

/// `|↑↓⟩` dimer in B₀x̂ with a classical companion run.
fn fig1(name: &str, j: f64, d_over_j: f64) -> ScenarioConfig {
    let mut observables = vector_names("r1");
    observables.extend(vector_names("r2"));
    observables.push("purity".into());
    observables.extend(vector_names("m1"));
    observables.extend(vector_names("m2"));
    let mut run = dimer_run(name, "ket:up,down", observables, hamiltonian(X, j, d_over_j));
    run.classical = Some(ClassicalCompare {
        alpha: KAPPA,
        moments: vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]],
    });
    scenario(name, vec![run], names(&["r1_x", "r1_y", "r1_z", "m1_x", "m1_y", "m1_z"]))
}

/// Antiferromagnetic dimer, correlation-matrix columns.
fn fig2(name: &str, d_over_j: f64) -> ScenarioConfig {
    let mut observables: Vec<String> = ["x", "y", "z"]
        .iter()
        .flat_map(|a| ["x", "y", "z"].iter().map(move |b| format!("T_{a}{b}")))
        .collect();
    observables.extend(vector_names("r1"));
    let plot = observables[..9].to_vec();
    let run = dimer_run(name, "ket:up,down", observables, hamiltonian(X, 1.0, d_over_j));
    scenario(name, vec![run], plot)
}

/// Ψ₊ input, with and without a DMI perpendicular to B.
fn fig3() -> ScenarioConfig {
    let observables = names(&["bell_B", "purity", "singlet", "r1_mag"]);
    let runs = [("D0", 0.0), ("D0.1", 0.1)]
        .iter()
        .map(|&(label, d)| dimer_run(label, "bell:psi+", observables.clone(), hamiltonian(X, 1.0, d)))
        .collect();
    scenario("fig3", runs, names(&["bell_B"]))
}

/// Werner inputs (p = 0.9) in an oblique field, both signs of J.
fn fig4() -> ScenarioConfig {
    let b = 1.0 / 3f64.sqrt();
    let observables = names(&["bell_B", "purity", "singlet"]);
    let mut runs = Vec::new();
    for (coupling, j) in [("afm", 1.0), ("fm", -1.0)] {
        for (tag, bell) in [("phip", "phi+"), ("phim", "phi-"), ("psip", "psi+"), ("psim", "psi-")] {
            runs.push(dimer_run(
                &format!("{coupling}_{tag}"),
                &format!("werner:{bell}:0.9"),
                observables.clone(),
                hamiltonian([b, b, b], j, 0.4),
            ));
        }
    }
    scenario("fig4", runs, names(&["bell_B"]))
}

fn fmt_spin(twice: u32) -> String {
    if twice.is_multiple_of(2) {
        format!("{}", twice / 2)
    } else {
        format!("{twice}/2")
    }
}

/// Spin-s dimers `|+s⟩⊗|−s⟩` for s = ½ … 5 via the closed-form pure-state
/// solution, plus the classical reference run.
fn sm(name: &str, j: f64) -> ScenarioConfig {
    let mut observables = vector_names("S1");
    observables.extend(vector_names("S2"));
    let mut runs: Vec<RunConfig> = (1..=10u32)
        .map(|twice| {
            let s = fmt_spin(twice);
            RunConfig {
                label: format!("s{}", f64::from(twice) / 2.0),
                initial_state: Some(format!("projector:+{s},-{s}")),
                moments: None,
                observables: observables.clone(),
                system: SystemConfig {
                    spins: vec![f64::from(twice) / 2.0; 2],
                },
                hamiltonian: hamiltonian(X, j, 0.0),
                dynamics: DynamicsConfig {
                    engine: Engine::Exact,
                    integrator: None,
                    ..qllg(SM_T_MAX)
                },
                classical: None,
            }
        })
        .collect();
    let mut cl_obs = vector_names("m1");
    cl_obs.extend(vector_names("m2"));
    runs.push(RunConfig {
        label: "classical".into(),
        initial_state: None,
        moments: Some(vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]),
        observables: cl_obs,
        system: SystemConfig {
            spins: vec![0.5, 0.5],
        },
        hamiltonian: hamiltonian(X, j, 0.0),
        dynamics: DynamicsConfig {
            engine: Engine::Classical,
            kappa: None,
            alpha: Some(KAPPA),
            dt: DT,
            t_max: SM_T_MAX,
            integrator: Some(Integrator::Rk4),
            steady_tol: None,
        },
        classical: None,
    });
    scenario(name, runs, names(&["S1_x", "S1_y", "S1_z", "m1_x", "m1_y", "m1_z"]))
}

pub fn figure_preset(name: &str) -> Result<ScenarioConfig, CliError> {
    Ok(match name {
        "fig1a" => fig1(name, -1.0, 0.0),
        "fig1b" => fig1(name, 1.0, 0.0),
        "fig1c" => fig1(name, -1.0, 0.6),
        "fig1d" => fig1(name, 1.0, 0.6),
        "fig2a" => fig2(name, 0.0),
        "fig2b" => fig2(name, 0.6),
        "fig3" => fig3(),
        "fig4" => fig4(),
        "sm_afm" => sm(name, 1.0),
        "sm_fm" => sm(name, -1.0),
        other => {
            return Err(CliError::Config(format!(
                "unknown preset `{other}` (known: {})",
                PRESETS.join(", ")
            )))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    #[test]
    fn every_preset_round_trips_and_prepares() {
        for name in PRESETS {
            let c = figure_preset(name).unwrap();
            let text = c.to_toml();
            assert_eq!(ScenarioConfig::from_toml(&text).unwrap(), c, "{name}");
            crate::runner::prepare(&c, Path::new(".")).unwrap();
        }
        assert!(figure_preset("fig5").is_err());
    }

    #[test]
    fn preset_shapes() {
        let fig1a = figure_preset("fig1a").unwrap();
        let obs = &fig1a.runs[0].observables;
        assert!(obs.contains(&"r1_x".to_string()) && obs.contains(&"m1_x".to_string()));
        assert!(fig1a.runs[0].classical.is_some());
        assert_eq!(figure_preset("fig4").unwrap().runs.len(), 8);
        let sm = figure_preset("sm_afm").unwrap();
        assert_eq!(sm.runs.len(), 11);
        assert_eq!(sm.runs.iter().filter(|r| r.dynamics.engine == Engine::Exact).count(), 10);
        assert!(sm.runs[..10].iter().all(|r| r.observables.contains(&"S1_mag".to_string())));
        assert_eq!(sm.runs[9].initial_state.as_deref(), Some("projector:+5,-5"));
        assert_eq!(sm.runs[2].initial_state.as_deref(), Some("projector:+3/2,-3/2"));
    }
}
