//! Classical Landau-Lifshitz-Gilbert dynamics of coupled moments.
//!
//! The Gilbert form `ṁ = γ m × B − (α/|m|) m × ṁ` is implicit in `ṁ`.
//! Solving it algebraically (using `m·ṁ = 0`) gives the Landau-Lifshitz form
//! `ṁ = γ̃ m × B − (λ/|m|) m × (m × B)` with `γ̃ = γ/(1+α²)` and
//! `λ = αγ/(1+α²)`, which is what the integrators use. The fixed-point
//! solver of the Gilbert form is kept for cross-checks.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::models::{effective_fields, HamiltonianSpec};
use crate::qdyn::Integrator;

/// Moments in units of μ_B with their lengths fixed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalState {
    moments: Vec<Vector3<f64>>,
    magnitudes: Vec<f64>,
}

impl ClassicalState {
    pub fn new(moments: Vec<Vector3<f64>>) -> Result<Self> {
        let magnitudes: Vec<f64> = moments.iter().map(|m| m.norm()).collect();
        if let Some(k) = magnitudes.iter().position(|&n| !(n > 0.0 && n.is_finite())) {
            return Err(Error::InvalidState(format!("moment {k} has zero or non-finite length")));
        }
        Ok(ClassicalState { moments, magnitudes })
    }

    pub fn moments(&self) -> &[Vector3<f64>] {
        &self.moments
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    fn renormalize(&mut self) {
        for (m, &len) in self.moments.iter_mut().zip(&self.magnitudes) {
            *m *= len / m.norm();
        }
    }
}

/// Landau-Lifshitz velocities `ṁ_k` in μ_B/ps.
pub fn llg_rhs(moments: &[Vector3<f64>], spec: &HamiltonianSpec, alpha: f64) -> Result<Vec<Vector3<f64>>> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    let fields = effective_fields(moments, spec)?;
    let denom = 1.0 + alpha * alpha;
    let gamma_t = spec.gamma_g / denom;
    let lambda = alpha * spec.gamma_g / denom;
    moments
        .iter()
        .zip(&fields)
        .enumerate()
        .map(|(k, (m, b))| {
            let len = m.norm();
            if len == 0.0 {
                return Err(Error::InvalidState(format!("moment {k} has zero length")));
            }
            let mxb = m.cross(b);
            Ok(mxb * gamma_t - m.cross(&mxb) * (lambda / len))
        })
        .collect()
}

/// Gilbert-form velocities by iterating `ṁ ← γ m × B − (α/|m|) m × ṁ`.
/// Converges for `α < 1`.
pub fn llg_rhs_implicit(moments: &[Vector3<f64>], spec: &HamiltonianSpec, alpha: f64) -> Result<Vec<Vector3<f64>>> {
    const TOL: f64 = 1e-14;
    const MAX_ITER: usize = 2000;
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "fixed-point Gilbert solve needs 0 <= alpha < 1, got {alpha}"
        )));
    }
    let fields = effective_fields(moments, spec)?;
    moments
        .iter()
        .zip(&fields)
        .map(|(m, b)| {
            let len = m.norm();
            let drive = m.cross(b) * spec.gamma_g;
            let mut v = drive;
            for _ in 0..MAX_ITER {
                let next = drive - m.cross(&v) * (alpha / len);
                let change = (next - v).norm();
                v = next;
                if change <= TOL * drive.norm() || change == 0.0 {
                    return Ok(v);
                }
            }
            Err(Error::InvalidParameter("Gilbert fixed point did not converge".into()))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalParams {
    pub alpha: f64,
    /// ps
    pub dt: f64,
    /// ps
    pub t_max: f64,
    pub integrator: Integrator,
    pub sample_stride: usize,
}

impl Default for ClassicalParams {
    fn default() -> Self {
        ClassicalParams {
            alpha: 0.5,
            dt: 1e-3,
            t_max: 50.0,
            integrator: Integrator::Rk4,
            sample_stride: 1,
        }
    }
}

impl ClassicalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.t_max.is_finite() && self.t_max >= self.dt) {
            return Err(Error::InvalidParameter(format!(
                "need dt > 0 and t_max >= dt, got dt = {}, t_max = {}",
                self.dt, self.t_max
            )));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidParameter("sample_stride must be positive".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

fn axpy(base: &[Vector3<f64>], k: &[Vector3<f64>], h: f64) -> Vec<Vector3<f64>> {
    base.iter().zip(k).map(|(m, v)| m + v * h).collect()
}

/// One fixed step followed by renormalization of every moment.
pub fn step_classical(
    state: &mut ClassicalState,
    spec: &HamiltonianSpec,
    alpha: f64,
    dt: f64,
    integrator: Integrator,
) -> Result<()> {
    let m = &state.moments;
    let next = match integrator {
        Integrator::Euler => axpy(m, &llg_rhs(m, spec, alpha)?, dt),
        Integrator::Rk4 => {
            let k1 = llg_rhs(m, spec, alpha)?;
            let k2 = llg_rhs(&axpy(m, &k1, 0.5 * dt), spec, alpha)?;
            let k3 = llg_rhs(&axpy(m, &k2, 0.5 * dt), spec, alpha)?;
            let k4 = llg_rhs(&axpy(m, &k3, dt), spec, alpha)?;
            m.iter()
                .enumerate()
                .map(|(i, mi)| mi + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0))
                .collect()
        }
    };
    state.moments = next;
    state.renormalize();
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ClassicalTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Vector3<f64>>>,
}

/// Integrate, calling `observe(t, moments)` at `t = 0` and every
/// `sample_stride` steps.
pub fn integrate_classical_with<F>(
    state0: &ClassicalState,
    spec: &HamiltonianSpec,
    params: &ClassicalParams,
    mut observe: F,
) -> Result<()>
where
    F: FnMut(f64, &[Vector3<f64>]) -> Result<()>,
{
    params.validate()?;
    if state0.moments.len() != spec.system.n_sites() {
        return Err(Error::DimensionMismatch(format!(
            "{} moments for {} sites",
            state0.moments.len(),
            spec.system.n_sites()
        )));
    }
    let mut state = state0.clone();
    observe(0.0, &state.moments)?;
    for n in 1..=params.n_steps() {
        let t = n as f64 * params.dt;
        step_classical(&mut state, spec, params.alpha, params.dt, params.integrator)?;
        if state.moments.iter().any(|m| !m.iter().all(|x| x.is_finite())) {
            return Err(Error::NonFinite { t });
        }
        if n % params.sample_stride == 0 {
            observe(t, &state.moments)?;
        }
    }
    Ok(())
}

pub fn integrate_classical(
    state0: &ClassicalState,
    spec: &HamiltonianSpec,
    params: &ClassicalParams,
) -> Result<ClassicalTrajectory> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    integrate_classical_with(state0, spec, params, |t, m| {
        times.push(t);
        states.push(m.to_vec());
        Ok(())
    })?;
    Ok(ClassicalTrajectory { times, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{classical_energy, PhysicalConstants};
    use crate::spin::{Spin, SpinSystem};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(n: usize, b: Vector3<f64>, j_over: f64, d_over_j: f64) -> HamiltonianSpec {
        let c = PhysicalConstants::paper();
        let j = j_over * c.mu_b * b.norm().max(1.0);
        let mut s = HamiltonianSpec::new(SpinSystem::uniform(Spin::HALF, n).unwrap(), b, c);
        for i in 0..n {
            for k in (i + 1)..n {
                s.set_coupling(i, k, j, Vector3::new(0.0, 0.0, d_over_j * j.abs())).unwrap();
            }
        }
        s
    }

    #[test]
    fn aligned_moment_is_fixed_point() {
        let s = spec(1, Vector3::new(0.0, 1.0, 0.0), 0.0, 0.0);
        let v = llg_rhs(&[Vector3::new(0.0, 2.0, 0.0)], &s, 0.5).unwrap();
        assert_eq!(v[0], Vector3::zeros());
    }

    #[test]
    fn single_moment_velocity() {
        let s = spec(1, Vector3::new(1.0, 0.0, 0.0), 0.0, 0.0);
        let v = llg_rhs(&[Vector3::z()], &s, 0.5).unwrap()[0];
        let expected = Vector3::new(0.5, 1.0, 0.0) * (s.gamma_g / 1.25);
        assert!((v - expected).norm() < 1e-14);
    }

    #[test]
    fn large_damping_asymptotics() {
        let s = spec(1, Vector3::new(1.0, 0.0, 0.0), 0.0, 0.0);
        let m = [Vector3::new(0.0, 0.6, 0.8)];
        let b = s.b_field;
        for alpha in [10.0, 100.0, 1000.0] {
            let v = llg_rhs(&m, &s, alpha).unwrap()[0];
            let precession = m[0].cross(&b);
            // precession share falls as 1/α², relaxation as 1/α
            let prec_part = v.dot(&precession) / precession.norm();
            assert!(prec_part.abs() <= 1.01 * s.gamma_g * precession.norm() / (alpha * alpha));
            assert!(v.norm() <= 1.01 * s.gamma_g / alpha);
        }
    }

    #[test]
    fn rejects_zero_moment() {
        assert!(ClassicalState::new(vec![Vector3::zeros()]).is_err());
        let s = spec(1, Vector3::x(), 0.0, 0.0);
        assert!(llg_rhs(&[Vector3::zeros()], &s, 0.5).is_err());
        assert!(llg_rhs(&[Vector3::z()], &s, -0.5).is_err());
    }

    #[test]
    fn gilbert_and_landau_lifshitz_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let s = spec(3, Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0)), 1.0, 0.6);
            let m: Vec<Vector3<f64>> = (0..3)
                .map(|_| Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0)))
                .collect();
            for alpha in [0.0, 0.1, 0.5, 0.9] {
                let ll = llg_rhs(&m, &s, alpha).unwrap();
                let gil = llg_rhs_implicit(&m, &s, alpha).unwrap();
                for (a, b) in ll.iter().zip(&gil) {
                    assert!((a - b).norm() <= 1e-8 * a.norm().max(1e-12));
                }
            }
        }
    }

    #[test]
    fn gilbert_trajectory_matches_landau_lifshitz_trajectory() {
        let s = spec(2, Vector3::new(1.0, 0.0, 0.0), -1.0, 0.6);
        let mut a = ClassicalState::new(vec![Vector3::z(), -Vector3::z() + Vector3::new(0.01, 0.0, 0.0)]).unwrap();
        let mut b = a.clone();
        let dt = 1e-3;
        for _ in 0..5000 {
            step_classical(&mut a, &s, 0.5, dt, Integrator::Rk4).unwrap();
            // same RK4 scheme driven by the Gilbert fixed point
            let m = b.moments.clone();
            let f = |x: &[Vector3<f64>]| llg_rhs_implicit(x, &s, 0.5).unwrap();
            let k1 = f(&m);
            let k2 = f(&axpy(&m, &k1, 0.5 * dt));
            let k3 = f(&axpy(&m, &k2, 0.5 * dt));
            let k4 = f(&axpy(&m, &k3, dt));
            b.moments = (0..2).map(|i| m[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0)).collect();
            b.renormalize();
        }
        for (x, y) in a.moments().iter().zip(b.moments()) {
            assert!((x - y).norm() <= 1e-8);
        }
    }

    #[test]
    fn single_moment_relaxes_along_field() {
        let s = spec(1, Vector3::new(1.0, 0.0, 0.0), 0.0, 0.0);
        let state = ClassicalState::new(vec![Vector3::new(0.0, 0.0, 1.3)]).unwrap();
        let params = ClassicalParams {
            t_max: 300.0,
            sample_stride: 1000,
            ..Default::default()
        };
        let traj = integrate_classical(&state, &s, &params).unwrap();
        let last = traj.states.last().unwrap()[0];
        assert!((last - Vector3::new(1.3, 0.0, 0.0)).norm() < 1e-6, "{last}");
    }

    #[test]
    fn magnitudes_conserved_and_energy_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for trial in 0..6 {
            let j_over = if trial % 2 == 0 { 1.0 } else { -1.0 };
            let s = spec(3, Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0)), j_over, 0.4);
            let m0: Vec<Vector3<f64>> = (0..3)
                .map(|_| Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0)))
                .collect();
            let state = ClassicalState::new(m0).unwrap();
            let params = ClassicalParams {
                t_max: 20.0,
                ..Default::default()
            };
            let mut prev = f64::INFINITY;
            integrate_classical_with(&state, &s, &params, |_, m| {
                for (mk, len) in m.iter().zip(state.magnitudes()) {
                    assert!((mk.norm() - len).abs() <= 1e-8 * len);
                }
                let e = classical_energy(m, &s)?;
                assert!(e <= prev + 1e-8, "energy rose: {prev} -> {e}");
                prev = e;
                Ok(())
            })
            .unwrap();
        }
    }
}
