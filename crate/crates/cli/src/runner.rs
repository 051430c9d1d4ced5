//! Turning a scenario into trajectories and files.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use qllg_core::cldyn::{integrate_classical_with, ClassicalParams, ClassicalState};
use qllg_core::models::build_quantum_hamiltonian;
use qllg_core::observables::evaluate_classical;
use qllg_core::qdyn::{integrate_with, RunSummary};
use qllg_core::spin::parse_state;
use qllg_core::{
    CMatrix, DensityOperator, Equation, HamiltonianSpec, Observable, PhysicalConstants, PurePropagator,
    QDynParams, QuantumProbe, Spin, SpinSystem, TimeSeries,
};
use rayon::prelude::*;

use crate::config::{Engine, RunConfig, ScenarioConfig};
use crate::error::CliError;
use crate::plot;

/// A run with every name resolved and every operator built.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub label: String,
    pub engine: Engine,
    pub spec: HamiltonianSpec,
    pub hamiltonian: CMatrix,
    /// Quantum engines only.
    pub initial_state: Option<DensityOperator>,
    pub observables: Vec<Observable>,
    /// Integration settings of quantum engines. The exact engine samples
    /// on the same grid.
    pub qparams: QDynParams,
    /// Classical engine run, or the comparison run of a quantum one.
    pub classical: Option<(ClassicalState, ClassicalParams)>,
    propagator: Option<PurePropagator>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub label: String,
    pub series: TimeSeries,
    pub summary: RunSummary,
}

fn config_err(label: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("run `{label}`: {msg}"))
}

fn moments_of(raw: &[[f64; 3]]) -> Vec<Vector3<f64>> {
    raw.iter().map(|m| Vector3::from(*m)).collect()
}

/// Read a density matrix written as whitespace-separated rows of complex
/// numbers (`0.5`, `0.5+0.5i`, `-1e-3i`); `#` starts a comment.
pub fn read_matrix_file(path: &Path) -> Result<CMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<Complex64>().map_err(|_| {
                    CliError::Config(format!("{}:{}: bad matrix entry `{tok}`", path.display(), n + 1))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(CliError::Config(format!("{}: matrix is not square", path.display())));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

impl PreparedRun {
    pub fn prepare(run: &RunConfig, config: &ScenarioConfig, base_dir: &Path) -> Result<Self, CliError> {
        let label = run.label.as_str();
        let err = |msg: String| config_err(label, msg);
        let constants = PhysicalConstants::for_units(config.units);

        let sites = run
            .system
            .spins
            .iter()
            .map(|&s| Spin::new(s))
            .collect::<qllg_core::Result<Vec<_>>>()?;
        let system = SpinSystem::new(sites)?;

        let h = &run.hamiltonian;
        let b = Vector3::from(h.b_field);
        let mut spec = HamiltonianSpec::new(system.clone(), b, constants);
        if let Some(scale) = h.coupling_scale {
            spec.coupling_scale = scale;
        }
        let exchange = match (h.exchange, h.exchange_over_zeeman) {
            (Some(j), _) => j,
            (None, Some(r)) => r * constants.mu_b * b.norm(),
            (None, None) => 0.0,
        };
        let dmi = match (h.dmi, h.dmi_over_exchange) {
            (Some(d), _) => Vector3::from(d),
            (None, Some(r)) => {
                let axis = Vector3::from(h.dmi_axis.unwrap_or([0.0, 0.0, 1.0]));
                if axis.norm() == 0.0 {
                    return Err(err("D_axis must be nonzero".into()));
                }
                axis.normalize() * (r * exchange.abs())
            }
            (None, None) => Vector3::zeros(),
        };
        if exchange != 0.0 || dmi != Vector3::zeros() {
            for k in 1..system.n_sites() {
                spec.set_coupling(k - 1, k, exchange, dmi)?;
            }
        }
        let hamiltonian = build_quantum_hamiltonian(&spec)?;

        let observables = run
            .observables
            .iter()
            .map(|name| name.parse::<Observable>())
            .collect::<qllg_core::Result<Vec<_>>>()?;
        let has_classical_obs = observables.iter().any(Observable::is_classical);

        let d = &run.dynamics;
        let integrator = d.integrator.unwrap_or_default();
        let mut qparams = QDynParams {
            hbar: constants.hbar,
            integrator,
            dt: d.dt,
            t_max: d.t_max,
            sample_stride: config.output.sample_stride,
            ..QDynParams::default()
        };
        if let Some(k) = d.kappa {
            qparams.kappa = k;
        }
        if let Some(tol) = d.steady_tol {
            qparams.steady_tol = tol;
        }
        qparams.validate()?;
        let classical_params = |alpha: f64| -> Result<ClassicalParams, CliError> {
            let p = ClassicalParams {
                alpha,
                dt: d.dt,
                t_max: d.t_max,
                integrator,
                sample_stride: config.output.sample_stride,
            };
            p.validate()?;
            Ok(p)
        };
        let classical_state = |raw: &[[f64; 3]]| -> Result<ClassicalState, CliError> {
            if raw.len() != system.n_sites() {
                return Err(err(format!("{} moments for {} sites", raw.len(), system.n_sites())));
            }
            Ok(ClassicalState::new(moments_of(raw))?)
        };

        let mut prepared = PreparedRun {
            label: run.label.clone(),
            engine: d.engine,
            spec,
            hamiltonian,
            initial_state: None,
            observables,
            qparams,
            classical: None,
            propagator: None,
        };

        if d.engine == Engine::Classical {
            if run.initial_state.is_some() || run.classical.is_some() {
                return Err(err("the classical engine takes `moments`, not `initial_state` or `classical`".into()));
            }
            if let Some(o) = prepared.observables.iter().find(|o| !o.is_classical()) {
                return Err(err(format!("`{o}` is not defined for the classical engine")));
            }
            let moments = run
                .moments
                .as_ref()
                .ok_or_else(|| err("the classical engine needs `moments`".into()))?;
            let alpha = d.alpha.unwrap_or(ClassicalParams::default().alpha);
            prepared.classical = Some((classical_state(moments)?, classical_params(alpha)?));
            return Ok(prepared);
        }

        if run.moments.is_some() {
            return Err(err("`moments` belongs to the classical engine; use [run.classical]".into()));
        }
        let state_spec = run
            .initial_state
            .as_deref()
            .ok_or_else(|| err(format!("the {} engine needs `initial_state`", d.engine)))?;
        let rho0 = if let Some(file) = state_spec.strip_prefix("file:") {
            let matrix = read_matrix_file(&base_dir.join(file.trim()))?;
            DensityOperator::new(matrix, system.clone())?
        } else if state_spec.trim() == "random" {
            parse_state(&format!("random:{}", config.seed), &system)?
        } else {
            parse_state(state_spec, &system)?
        };
        if d.engine == Engine::Exact {
            prepared.propagator = Some(PurePropagator::new(
                &rho0,
                &prepared.hamiltonian,
                prepared.qparams.kappa,
                constants.hbar,
            )?);
        }
        prepared.initial_state = Some(rho0);

        match &run.classical {
            Some(cmp) => {
                prepared.classical = Some((classical_state(&cmp.moments)?, classical_params(cmp.alpha)?));
            }
            None if has_classical_obs => {
                return Err(err("classical observables need a [run.classical] comparison".into()));
            }
            None => {}
        }
        for o in prepared.observables.iter().filter(|o| !o.is_classical()) {
            o.check(&system)?;
        }
        Ok(prepared)
    }

    pub fn execute(&self) -> Result<RunOutput, CliError> {
        self.execute_with(|_, _| Ok(()))
    }

    /// Run, also handing every sampled density matrix to `on_state`.
    pub fn execute_with<F>(&self, mut on_state: F) -> Result<RunOutput, CliError>
    where
        F: FnMut(f64, &CMatrix) -> qllg_core::Result<()>,
    {
        let names: Vec<String> = self.observables.iter().map(|o| o.to_string()).collect();
        let mut series = TimeSeries::new(names);

        if self.engine == Engine::Classical {
            let (state, params) = self.classical.as_ref().expect("prepared classical run");
            let mut times = Vec::new();
            integrate_classical_with(state, &self.spec, params, |t, m| {
                series.push(t, &evaluate_classical(&self.observables, m, &self.spec)?)?;
                times.push(t);
                Ok(())
            })?;
            let t_end = params.n_steps() as f64 * params.dt;
            return Ok(RunOutput {
                label: self.label.clone(),
                series,
                summary: RunSummary {
                    steps: params.n_steps(),
                    t_end,
                    stopped_early: false,
                },
            });
        }

        let (q_idx, q_obs): (Vec<usize>, Vec<Observable>) = self
            .observables
            .iter()
            .enumerate()
            .filter(|(_, o)| !o.is_classical())
            .map(|(i, o)| (i, *o))
            .unzip();
        let c_idx: Vec<usize> = (0..self.observables.len()).filter(|i| !q_idx.contains(i)).collect();
        let c_obs: Vec<Observable> = c_idx.iter().map(|&i| self.observables[i]).collect();
        let system = self.spec.system.clone();
        let probe = QuantumProbe::new(q_obs, system, self.hamiltonian.clone())?;
        let rho0 = self.initial_state.as_ref().expect("prepared quantum run");

        let mut times = Vec::new();
        let mut q_rows = Vec::new();
        let mut record = |t: f64, rho: &CMatrix| -> qllg_core::Result<()> {
            on_state(t, rho)?;
            times.push(t);
            q_rows.push(probe.evaluate(rho)?);
            Ok(())
        };
        let p = &self.qparams;
        let summary = match (self.engine, &self.propagator) {
            (Engine::Exact, Some(prop)) => {
                let n_steps = p.n_steps();
                for n in (0..=n_steps).step_by(p.sample_stride) {
                    let t = n as f64 * p.dt;
                    record(t, &prop.matrix_at(t)?)?;
                }
                RunSummary {
                    steps: n_steps,
                    t_end: n_steps as f64 * p.dt,
                    stopped_early: false,
                }
            }
            (Engine::Qll, _) => integrate_with(rho0, &self.hamiltonian, p, Equation::Qll, record)?,
            _ => integrate_with(rho0, &self.hamiltonian, p, Equation::Qllg, record)?,
        };

        let c_rows = match &self.classical {
            Some((state, params)) => self.classical_on_grid(state, params, &times, &c_obs)?,
            None => vec![Vec::new(); times.len()],
        };
        let mut row = vec![0.0; self.observables.len()];
        for ((t, q), c) in times.iter().zip(&q_rows).zip(&c_rows) {
            for (&i, &v) in q_idx.iter().zip(q) {
                row[i] = v;
            }
            for (&i, &v) in c_idx.iter().zip(c) {
                row[i] = v;
            }
            series.push(*t, &row)?;
        }
        Ok(RunOutput {
            label: self.label.clone(),
            series,
            summary,
        })
    }

    /// Classical comparison evaluated at the quantum sample times, which
    /// all lie on the shared step grid.
    fn classical_on_grid(
        &self,
        state: &ClassicalState,
        params: &ClassicalParams,
        times: &[f64],
        obs: &[Observable],
    ) -> Result<Vec<Vec<f64>>, CliError> {
        let steps: Vec<usize> = times.iter().map(|t| (t / params.dt).round() as usize).collect();
        let last = *steps.last().unwrap_or(&0);
        let mut rows = Vec::with_capacity(times.len());
        if last == 0 {
            rows.push(evaluate_classical(obs, state.moments(), &self.spec)?);
            return Ok(rows);
        }
        let params = ClassicalParams {
            t_max: last as f64 * params.dt,
            sample_stride: 1,
            ..*params
        };
        let mut next = 0;
        integrate_classical_with(state, &self.spec, &params, |t, m| {
            if next < steps.len() && (t / params.dt).round() as usize == steps[next] {
                rows.push(evaluate_classical(obs, m, &self.spec)?);
                next += 1;
            }
            Ok(())
        })?;
        Ok(rows)
    }
}

pub fn prepare(config: &ScenarioConfig, base_dir: &Path) -> Result<Vec<PreparedRun>, CliError> {
    config.check()?;
    config
        .runs
        .iter()
        .map(|run| PreparedRun::prepare(run, config, base_dir))
        .collect()
}

/// Run every trajectory of the scenario; runs execute concurrently and
/// come back in config order.
pub fn run_scenario(config: &ScenarioConfig, base_dir: &Path) -> Result<Vec<RunOutput>, CliError> {
    let runs = prepare(config, base_dir)?;
    runs.par_iter().map(PreparedRun::execute).collect()
}

/// `dir/name` for one run, `dir/<stem>_<label>.<ext>` when there are several.
pub fn output_path(dir: &Path, name: &str, label: &str, n_runs: usize) -> PathBuf {
    let path = dir.join(name);
    if n_runs <= 1 {
        return path;
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let file = match path.extension() {
        Some(ext) => format!("{stem}_{label}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{label}"),
    };
    path.with_file_name(file)
}

/// Write the CSV (and SVG when configured) of every run; returns the paths.
pub fn write_outputs(
    config: &ScenarioConfig,
    outputs: &[RunOutput],
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for out in outputs {
        let csv = output_path(out_dir, &config.output.csv, &out.label, outputs.len());
        if let Some(parent) = csv.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        out.series.save_csv(&csv)?;
        written.push(csv);
        if let Some(svg_name) = &config.output.svg {
            let svg = output_path(out_dir, svg_name, &out.label, outputs.len());
            let selected: Vec<String> = match &config.output.plot {
                Some(cols) => cols
                    .iter()
                    .filter(|c| out.series.column(c).is_some())
                    .cloned()
                    .collect(),
                None => out.series.names().to_vec(),
            };
            let text = plot::render_svg(&out.series, &selected, &out.label)?;
            std::fs::write(&svg, text).map_err(|e| CliError::io(&svg, e))?;
            written.push(svg);
        }
    }
    Ok(written)
}
