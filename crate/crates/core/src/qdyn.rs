//! Density-operator dynamics.
//!
//! The damped master equation
//!
//! ```text
//! ρ̇ = (i/ħ)[ρ, H] + iκ[ρ, ρ̇]
//! ```
//!
//! has `ρ̇` on both sides. In the eigenbasis of `ρ = V Λ V†` the implicit
//! term is diagonal in the index pair, `(iκ[ρ, X])_ij = iκ(λ_i − λ_j) X_ij`,
//! so the equation is solved exactly entry by entry:
//!
//! ```text
//! ρ̇_ij = L_ij / (1 − iκ(λ_i − λ_j)),   L = (i/ħ)[ρ, H] in that basis.
//! ```
//!
//! The denominator has modulus at least one for real `λ`, so the solve is
//! always well posed. The explicit q-LL form
//! `ρ̇ = (i/ħ)[ρ, H] − (κ/ħ)[ρ, [ρ, H]]` is provided alongside, as is the
//! closed-form propagator for pure states.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, EigDecomposition, I};
use crate::spin::DensityOperator;

/// Monitor thresholds applied during integration.
pub const MONITOR_TRACE_TOL: f64 = 1e-6;
pub const MONITOR_POSITIVITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    Euler,
    #[default]
    Rk4,
}

impl std::str::FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(Integrator::Euler),
            "rk4" => Ok(Integrator::Rk4),
            other => Err(Error::InvalidParameter(format!("unknown integrator `{other}`"))),
        }
    }
}

impl std::fmt::Display for Integrator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Integrator::Euler => "euler",
            Integrator::Rk4 => "rk4",
        })
    }
}

/// Which equation of motion drives the density operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Equation {
    /// Damped equation with the implicit term solved in closed form.
    #[default]
    Qllg,
    /// Same equation solved by fixed-point iteration; cross-check only.
    QllgFixedPoint,
    /// Explicit damped equation (q-LL).
    Qll,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QDynParams {
    /// Dimensionless damping κ ≥ 0.
    pub kappa: f64,
    /// meV·ps
    pub hbar: f64,
    pub integrator: Integrator,
    /// ps
    pub dt: f64,
    /// ps
    pub t_max: f64,
    pub sample_stride: usize,
    /// Stop once `‖Δρ‖_F` per step falls below this; zero disables.
    pub steady_tol: f64,
}

impl Default for QDynParams {
    fn default() -> Self {
        QDynParams {
            kappa: 0.5,
            hbar: crate::models::HBAR_MEV_PS,
            integrator: Integrator::Rk4,
            dt: 1e-3,
            t_max: 50.0,
            sample_stride: 1,
            steady_tol: 1e-9,
        }
    }
}

impl QDynParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return bad(format!("kappa must be >= 0, got {}", self.kappa));
        }
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return bad(format!("hbar must be > 0, got {}", self.hbar));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.t_max.is_finite() && self.t_max >= self.dt) {
            return bad(format!("t_max = {} must be at least dt = {}", self.t_max, self.dt));
        }
        if self.sample_stride == 0 {
            return bad("sample_stride must be positive".into());
        }
        if !(self.steady_tol >= 0.0) {
            return bad(format!("steady_tol must be >= 0, got {}", self.steady_tol));
        }
        Ok(())
    }

    /// Number of fixed steps covering `[0, t_max]`.
    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

fn check_operands(rho: &CMatrix, h: &CMatrix) -> Result<()> {
    if !rho.is_square() || rho.shape() != h.shape() {
        return Err(Error::DimensionMismatch(format!(
            "state {:?} and Hamiltonian {:?}",
            rho.shape(),
            h.shape()
        )));
    }
    Ok(())
}

/// Solve `X = L + iκ[ρ, X]` given the eigendecomposition of `ρ`, with `L`
/// already expressed in the eigenbasis. Returns `X` in the eigenbasis.
fn solve_implicit_in_eigenbasis(eig: &EigDecomposition, l_tilde: &CMatrix, kappa: f64) -> CMatrix {
    let lam = &eig.eigenvalues;
    CMatrix::from_fn(lam.len(), lam.len(), |i, j| {
        l_tilde[(i, j)] / Complex64::new(1.0, -kappa * (lam[i] - lam[j]))
    })
}

/// Right-hand side of the damped master equation, via the exact eigenbasis
/// solve of the implicit term. Units ps⁻¹.
pub fn qllg_rhs(rho: &CMatrix, h: &CMatrix, kappa: f64, hbar: f64) -> Result<CMatrix> {
    check_operands(rho, h)?;
    let eig = linalg::eig_hermitian(rho)?;
    let v = &eig.eigenvectors;
    let h_tilde = v.adjoint() * h * v;
    let lam = &eig.eigenvalues;
    let coeff = I / hbar;
    let l_tilde = CMatrix::from_fn(lam.len(), lam.len(), |i, j| {
        coeff * (lam[i] - lam[j]) * h_tilde[(i, j)]
    });
    let x_tilde = solve_implicit_in_eigenbasis(&eig, &l_tilde, kappa);
    Ok(linalg::hermitian_part(&(v * x_tilde * v.adjoint())))
}

/// Fixed-point iteration `X_{k+1} = L + iκ[ρ, X_k]` for the same implicit
/// equation. Converges when `κ (λ_max − λ_min) < 1`.
pub fn qllg_rhs_fixed_point(rho: &CMatrix, h: &CMatrix, kappa: f64, hbar: f64) -> Result<CMatrix> {
    const TOL: f64 = 1e-12;
    const MAX_ITER: usize = 200;
    check_operands(rho, h)?;
    let l = (rho * h - h * rho) * (I / hbar);
    let scale = linalg::max_abs(&l).max(f64::MIN_POSITIVE);
    let mut x = l.clone();
    for _ in 0..MAX_ITER {
        let next = &l + (rho * &x - &x * rho) * (I * kappa);
        let change = linalg::max_abs(&(&next - &x));
        x = next;
        if change <= TOL * scale {
            return Ok(linalg::hermitian_part(&x));
        }
    }
    Err(Error::InvalidParameter(format!(
        "fixed-point solve did not converge in {MAX_ITER} iterations (kappa too large?)"
    )))
}

/// `(i/ħ)[ρ, H] − (κ/ħ)[ρ, [ρ, H]]`, units ps⁻¹.
pub fn qll_rhs(rho: &CMatrix, h: &CMatrix, kappa: f64, hbar: f64) -> Result<CMatrix> {
    check_operands(rho, h)?;
    let c = rho * h - h * rho;
    let cc = rho * &c - &c * rho;
    let out = c * (I / hbar) - cc * Complex64::new(kappa / hbar, 0.0);
    Ok(linalg::hermitian_part(&out))
}

pub fn rhs(equation: Equation, rho: &CMatrix, h: &CMatrix, kappa: f64, hbar: f64) -> Result<CMatrix> {
    match equation {
        Equation::Qllg => qllg_rhs(rho, h, kappa, hbar),
        Equation::QllgFixedPoint => qllg_rhs_fixed_point(rho, h, kappa, hbar),
        Equation::Qll => qll_rhs(rho, h, kappa, hbar),
    }
}

/// One fixed step; the result is symmetrized but not otherwise corrected.
pub fn step(
    equation: Equation,
    integrator: Integrator,
    rho: &CMatrix,
    h: &CMatrix,
    kappa: f64,
    hbar: f64,
    dt: f64,
) -> Result<CMatrix> {
    let f = |r: &CMatrix| rhs(equation, r, h, kappa, hbar);
    let next = match integrator {
        Integrator::Euler => rho + f(rho)? * Complex64::from(dt),
        Integrator::Rk4 => {
            let half = Complex64::from(0.5 * dt);
            let k1 = f(rho)?;
            let k2 = f(&(rho + &k1 * half))?;
            let k3 = f(&(rho + &k2 * half))?;
            let k4 = f(&(rho + &k3 * Complex64::from(dt)))?;
            rho + (k1 + (k2 + k3) * Complex64::from(2.0) + k4) * Complex64::from(dt / 6.0)
        }
    };
    Ok(linalg::hermitian_part(&next))
}

/// Outcome of an integration run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    /// Final time reached, ps.
    pub t_end: f64,
    /// Set when the steady-state criterion ended the run early.
    pub stopped_early: bool,
}

/// Sampled density-operator trajectory.
#[derive(Debug, Clone)]
pub struct QTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMatrix>,
    pub summary: RunSummary,
}

fn monitor(rho: &CMatrix, t: f64, check_spectrum: bool) -> Result<()> {
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite { t });
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > MONITOR_TRACE_TOL || tr.im.abs() > MONITOR_TRACE_TOL {
        return Err(Error::Monitor {
            t,
            reason: format!("trace drifted to {tr}"),
        });
    }
    if check_spectrum {
        let min = linalg::eig_hermitian(rho)?.eigenvalues[0];
        if min < -MONITOR_POSITIVITY_TOL {
            return Err(Error::Monitor {
                t,
                reason: format!("eigenvalue {min:e} went negative"),
            });
        }
    }
    Ok(())
}

/// Integrate from `rho0`, calling `observe(t, ρ)` at `t = 0` and every
/// `sample_stride` steps thereafter (and at the stopping time when the
/// steady-state criterion fires between samples).
pub fn integrate_with<F>(
    rho0: &DensityOperator,
    h: &CMatrix,
    params: &QDynParams,
    equation: Equation,
    mut observe: F,
) -> Result<RunSummary>
where
    F: FnMut(f64, &CMatrix) -> Result<()>,
{
    params.validate()?;
    check_operands(rho0.matrix(), h)?;
    let n_steps = params.n_steps();
    let mut rho = rho0.matrix().clone();
    observe(0.0, &rho)?;
    for n in 1..=n_steps {
        let t = n as f64 * params.dt;
        let next = step(equation, params.integrator, &rho, h, params.kappa, params.hbar, params.dt)?;
        let sampled = n % params.sample_stride == 0;
        monitor(&next, t, sampled)?;
        let steady = params.steady_tol > 0.0
            && linalg::frobenius_norm(&(&next - &rho)) < params.steady_tol;
        rho = next;
        if sampled || steady {
            observe(t, &rho)?;
        }
        if steady {
            return Ok(RunSummary {
                steps: n,
                t_end: t,
                stopped_early: true,
            });
        }
    }
    Ok(RunSummary {
        steps: n_steps,
        t_end: n_steps as f64 * params.dt,
        stopped_early: false,
    })
}

/// Integrate and keep every sampled state.
pub fn integrate(
    rho0: &DensityOperator,
    h: &CMatrix,
    params: &QDynParams,
    equation: Equation,
) -> Result<QTrajectory> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    let summary = integrate_with(rho0, h, params, equation, |t, rho| {
        times.push(t);
        states.push(rho.clone());
        Ok(())
    })?;
    Ok(QTrajectory {
        times,
        states,
        summary,
    })
}

/// Closed-form pure-state solution
/// `ρ(t) = M ρ₀ M† / Tr(M ρ₀ M†)`, `M = exp(−i H_eff t/ħ)`,
/// `H_eff = (1 − iκ)/(1 + κ²) · H`.
///
/// The spectrum of `H` is computed once; each evaluation then costs one
/// matrix-vector product.
#[derive(Debug, Clone)]
pub struct PurePropagator {
    eig: EigDecomposition,
    /// `⟨k|ψ₀⟩` in the energy eigenbasis.
    coeffs: CVector,
    kappa: f64,
    hbar: f64,
    /// Lowest populated energy; subtracting it keeps the damping factors ≤ 1.
    e_ref: f64,
}

/// Purity tolerance for inputs to the exact propagator.
pub const PURE_TOL: f64 = 1e-8;

impl PurePropagator {
    pub fn new(rho0: &DensityOperator, h: &CMatrix, kappa: f64, hbar: f64) -> Result<Self> {
        check_operands(rho0.matrix(), h)?;
        let purity = rho0.purity();
        if (purity - 1.0).abs() > PURE_TOL {
            return Err(Error::NotPure { purity });
        }
        let rho_eig = linalg::eig_hermitian(rho0.matrix())?;
        let psi0 = rho_eig.eigenvectors.column(rho_eig.dim() - 1).into_owned();
        Self::from_vector(&psi0, h, kappa, hbar)
    }

    pub fn from_vector(psi0: &CVector, h: &CMatrix, kappa: f64, hbar: f64) -> Result<Self> {
        let eig = linalg::eig_hermitian(h)?;
        if psi0.len() != eig.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state of length {} for Hamiltonian of dimension {}",
                psi0.len(),
                eig.dim()
            )));
        }
        let coeffs = eig.eigenvectors.adjoint() * psi0;
        let e_ref = eig
            .eigenvalues
            .iter()
            .zip(coeffs.iter())
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(e, _)| *e)
            .fold(f64::INFINITY, f64::min);
        if !e_ref.is_finite() {
            return Err(Error::InvalidState("zero initial state vector".into()));
        }
        Ok(PurePropagator {
            eig,
            coeffs,
            kappa,
            hbar,
            e_ref,
        })
    }

    /// Normalized state vector at time `t`.
    pub fn vector_at(&self, t: f64) -> Result<CVector> {
        let k2 = 1.0 + self.kappa * self.kappa;
        let amp = CVector::from_fn(self.eig.dim(), |k, _| {
            let e = self.eig.eigenvalues[k] - self.e_ref;
            // exp(−i (1 − iκ) e t / (ħ (1 + κ²)))
            let arg = Complex64::new(-self.kappa * e * t, -e * t) / (self.hbar * k2);
            self.coeffs[k] * arg.exp()
        });
        let psi = &self.eig.eigenvectors * amp;
        let norm_sqr = psi.norm_squared();
        if !(norm_sqr > 1e-300) {
            return Err(Error::VanishingNormalization { t });
        }
        Ok(psi.unscale(norm_sqr.sqrt()))
    }

    pub fn matrix_at(&self, t: f64) -> Result<CMatrix> {
        let psi = self.vector_at(t)?;
        Ok(&psi * psi.adjoint())
    }
}

/// `ρ(t)` from the closed-form pure-state solution.
pub fn exact_pure_propagator(
    rho0: &DensityOperator,
    h: &CMatrix,
    kappa: f64,
    hbar: f64,
    t: f64,
) -> Result<DensityOperator> {
    let prop = PurePropagator::new(rho0, h, kappa, hbar)?;
    DensityOperator::new_unchecked(prop.matrix_at(t)?, rho0.system().clone())
}

/// Distance of the damped-equation velocity from the best scalar multiple
/// of the q-LL velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    /// `min_c ‖A − c B‖_F / ‖A‖_F`
    pub value: f64,
    /// Least-squares scalar `c`.
    pub scale: f64,
    /// `ρ̇ = 0`: nothing to compare.
    pub stationary: bool,
}

/// Non-proportionality of the two equations' velocities at `rho`. Zero
/// (up to round-off) whenever the two equations differ only by a rescaling
/// of time at this state.
pub fn inequivalence_certificate(rho: &CMatrix, h: &CMatrix, kappa: f64, hbar: f64) -> Result<Certificate> {
    let a = qllg_rhs(rho, h, kappa, hbar)?;
    let b = qll_rhs(rho, h, kappa, hbar)?;
    let na = linalg::frobenius_norm(&a);
    let nb2: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    if na <= 1e-14 || nb2 == 0.0 {
        return Ok(Certificate {
            value: 0.0,
            scale: 0.0,
            stationary: true,
        });
    }
    // Hermitian A, B: ⟨B, A⟩ = Tr(B A) is real
    let dot: f64 = b.iter().zip(a.iter()).map(|(x, y)| (x.conj() * y).re).sum();
    let c = dot / nb2;
    let resid = linalg::frobenius_norm(&(&a - &b * Complex64::from(c)));
    Ok(Certificate {
        value: resid / na,
        scale: c,
        stationary: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs, trace_distance};
    use crate::models::{build_quantum_hamiltonian, HamiltonianSpec, PhysicalConstants, HBAR_MEV_PS};
    use crate::spin::{
        bell_state, linear_spin_state, parse_state, random_pure_state, werner_state, Bell,
        Spin, SpinSystem,
    };
    use nalgebra::Vector3;

    const HBAR: f64 = HBAR_MEV_PS;

    fn dimer_h(b: Vector3<f64>, j_over: f64, d_over_j: f64) -> CMatrix {
        let c = PhysicalConstants::paper();
        let j = j_over * c.mu_b * b.norm().max(1.0);
        let spec = HamiltonianSpec::new(SpinSystem::qubit_pair(), b, c)
            .with_coupling(0, 1, j, Vector3::new(0.0, 0.0, d_over_j * j.abs()))
            .unwrap();
        build_quantum_hamiltonian(&spec).unwrap()
    }

    fn single_spin_h(s: Spin, b: Vector3<f64>) -> CMatrix {
        let c = PhysicalConstants::paper();
        let spec = HamiltonianSpec::new(SpinSystem::new(vec![s]).unwrap(), b, c);
        build_quantum_hamiltonian(&spec).unwrap()
    }

    fn bloch(rho: &CMatrix) -> Vector3<f64> {
        let [_, sx, sy, sz] = linalg::pauli();
        Vector3::new((rho * sx).trace().re, (rho * sy).trace().re, (rho * sz).trace().re)
    }

    #[test]
    fn rhs_satisfies_the_implicit_equation() {
        let h = dimer_h(Vector3::new(1.0, 0.3, -0.2), 1.0, 0.6);
        for (i, rho) in [werner_state(Bell::PsiPlus, 0.9).unwrap(), random_pure_state(&SpinSystem::qubit_pair(), 3)]
            .iter()
            .enumerate()
        {
            let x = qllg_rhs(rho.matrix(), &h, 0.5, HBAR).unwrap();
            let residual = &x
                - commutator(rho.matrix(), &h).unwrap() * (I / HBAR)
                - commutator(rho.matrix(), &x).unwrap() * (I * 0.5);
            assert!(max_abs(&residual) < 1e-14, "case {i}");
            assert!(linalg::hermiticity_defect(&x) < 1e-14);
            assert!(x.trace().norm() < 1e-14);
            let fp = qllg_rhs_fixed_point(rho.matrix(), &h, 0.5, HBAR).unwrap();
            assert!(max_abs(&(fp - &x)) < 1e-12);
        }
    }

    #[test]
    fn stationary_and_von_neumann_limits() {
        let h = dimer_h(Vector3::new(1.0, 0.0, 0.0), 1.0, 0.0);
        // an energy eigenprojector commutes with H
        let eig = linalg::eig_hermitian(&h).unwrap();
        let gs = eig.eigenvectors.column(0).into_owned();
        let rho = &gs * gs.adjoint();
        assert!(max_abs(&qllg_rhs(&rho, &h, 0.5, HBAR).unwrap()) < 1e-14);

        let rho = random_pure_state(&SpinSystem::qubit_pair(), 8);
        let vn = commutator(rho.matrix(), &h).unwrap() * (I / HBAR);
        assert!(max_abs(&(qllg_rhs(rho.matrix(), &h, 0.0, HBAR).unwrap() - &vn)) < 1e-14);
        assert!(max_abs(&(qll_rhs(rho.matrix(), &h, 0.0, HBAR).unwrap() - &vn)) < 1e-14);
    }

    #[test]
    fn single_spin_bloch_velocity() {
        // r = ẑ, B = B₀x̂, κ = 0.5: ṙ = γ_g B₀/1.25 · (0.5, 1, 0)
        let b0 = 1.0;
        let h = single_spin_h(Spin::HALF, Vector3::new(b0, 0.0, 0.0));
        let gamma = PhysicalConstants::paper().gamma_g();
        let rho = parse_state("ket:up", &SpinSystem::new(vec![Spin::HALF]).unwrap()).unwrap();
        let rdot = bloch(&qllg_rhs(rho.matrix(), &h, 0.5, HBAR).unwrap());
        let expected = Vector3::new(0.5, 1.0, 0.0) * (gamma * b0 / 1.25);
        assert!((rdot - expected).norm() < 1e-12, "{rdot} vs {expected}");

        // independent route: central difference of the closed-form propagator
        let prop = PurePropagator::new(&rho, &h, 0.5, HBAR).unwrap();
        let dt = 1e-4;
        let fd = (bloch(&prop.matrix_at(dt).unwrap()) - bloch(&prop.matrix_at(-dt).unwrap())) / (2.0 * dt);
        assert!((fd - expected).norm() < 1e-7 * expected.norm());
    }

    #[test]
    fn pure_states_rescale_by_one_plus_kappa_squared() {
        let h = dimer_h(Vector3::new(0.4, -1.0, 0.7), -1.0, 0.4);
        for seed in 0..50 {
            let rho = random_pure_state(&SpinSystem::qubit_pair(), seed);
            for kappa in [0.1, 0.5, 2.0] {
                let a = qllg_rhs(rho.matrix(), &h, kappa, HBAR).unwrap();
                let b = qll_rhs(rho.matrix(), &h, kappa, HBAR).unwrap() / Complex64::from(1.0 + kappa * kappa);
                assert!(max_abs(&(a - b)) <= 1e-9);
            }
        }
    }

    #[test]
    fn single_spin_mixed_states_rescale_by_eta() {
        let dir = Vector3::new(0.2, 0.9, -0.4).normalize();
        for twice in 1..=6 {
            let s = Spin::from_twice(twice).unwrap();
            let d = s.dim() as f64;
            let h = single_spin_h(s, Vector3::new(0.3, -0.8, 1.1));
            for frac in [0.3, 0.8] {
                let eta = dir * (frac / s.value());
                let rho = linear_spin_state(s, &eta).unwrap();
                let kappa = 0.5;
                // η here is already ħη, so the factor is 1 + κ²|η|²/(2s+1)²
                let factor = 1.0 + kappa * kappa * eta.norm_squared() / (d * d);
                let a = qllg_rhs(rho.matrix(), &h, kappa, HBAR).unwrap();
                let b = qll_rhs(rho.matrix(), &h, kappa, HBAR).unwrap() / Complex64::from(factor);
                assert!(max_abs(&(a - b)) <= 1e-9, "s = {s}");
            }
        }
    }

    #[test]
    fn certificate_cases() {
        let fig4 = dimer_h(Vector3::new(1.0, 1.0, 1.0) / 3f64.sqrt(), 1.0, 0.4);
        let pure = random_pure_state(&SpinSystem::qubit_pair(), 1);
        let c = inequivalence_certificate(pure.matrix(), &fig4, 0.5, HBAR).unwrap();
        assert!(c.value <= 1e-9 && !c.stationary);
        assert!((c.scale - 1.0 / 1.25).abs() < 1e-9);

        // Werner states have one nondegenerate eigenvalue over a degenerate
        // background, so ρ = a𝟙 + bP and both velocities are multiples of [P, H].
        let w = werner_state(Bell::PsiPlus, 0.9).unwrap();
        let c = inequivalence_certificate(w.matrix(), &fig4, 0.5, HBAR).unwrap();
        assert!(c.value <= 1e-9, "{c:?}");
        assert!((c.scale - 1.0 / (1.0 + 0.25 * 0.81)).abs() < 1e-9);

        // three distinct eigenvalues with local polarisation
        let mixed3 = werner_state(Bell::PsiPlus, 0.6).unwrap().into_matrix() * Complex64::from(0.7)
            + parse_state("ket:+x,up", &SpinSystem::qubit_pair()).unwrap().into_matrix() * Complex64::from(0.3);
        let c = inequivalence_certificate(&mixed3, &fig4, 0.5, HBAR).unwrap();
        assert!(c.value > 1e-3, "{c:?}");

        let mixed = CMatrix::identity(4, 4) / Complex64::from(4.0);
        let c = inequivalence_certificate(&mixed, &fig4, 0.5, HBAR).unwrap();
        assert!(c.stationary && c.value == 0.0);
    }

    #[test]
    fn zero_hamiltonian_is_frozen() {
        let h = CMatrix::zeros(4, 4);
        let rho0 = werner_state(Bell::PhiMinus, 0.7).unwrap();
        let params = QDynParams {
            t_max: 1.0,
            steady_tol: 0.0,
            sample_stride: 100,
            ..Default::default()
        };
        let traj = integrate(&rho0, &h, &params, Equation::Qllg).unwrap();
        assert_eq!(traj.states.len(), 11);
        for s in &traj.states {
            assert_eq!(s, rho0.matrix());
        }
    }

    #[test]
    fn steady_state_stops_early() {
        let h = CMatrix::zeros(4, 4);
        let rho0 = bell_state(Bell::PsiPlus);
        let params = QDynParams {
            t_max: 1.0,
            steady_tol: 1e-9,
            sample_stride: 100,
            ..Default::default()
        };
        let traj = integrate(&rho0, &h, &params, Equation::Qllg).unwrap();
        assert!(traj.summary.stopped_early);
        assert_eq!(traj.summary.steps, 1);
        assert_eq!(traj.times, vec![0.0, 1e-3]);
    }

    #[test]
    fn rk4_matches_exact_propagator() {
        let h = dimer_h(Vector3::new(1.0, 0.0, 0.0), 1.0, 0.0);
        let rho0 = random_pure_state(&SpinSystem::qubit_pair(), 21);
        let params = QDynParams {
            t_max: 10.0,
            steady_tol: 0.0,
            sample_stride: 10_000,
            ..Default::default()
        };
        let traj = integrate(&rho0, &h, &params, Equation::Qllg).unwrap();
        let exact = exact_pure_propagator(&rho0, &h, 0.5, HBAR, 10.0).unwrap();
        let dist = trace_distance(traj.states.last().unwrap(), exact.matrix()).unwrap();
        assert!(dist <= 1e-6, "{dist:e}");
    }

    #[test]
    fn exact_propagator_properties() {
        let h = dimer_h(Vector3::new(1.0, 0.0, 0.0), 1.0, 0.0);
        let eig = linalg::eig_hermitian(&h).unwrap();
        let sys = SpinSystem::qubit_pair();
        // κ = 0 keeps an eigenstate put
        let e2 = eig.eigenvectors.column(2).into_owned();
        let rho = DensityOperator::from_pure(&e2, sys.clone()).unwrap();
        let out = exact_pure_propagator(&rho, &h, 0.0, HBAR, 7.3).unwrap();
        assert!(max_abs(&(out.matrix() - rho.matrix())) < 1e-12);

        // damping drives any state with ground-state weight to the ground state
        let rho = parse_state("ket:up,down", &sys).unwrap();
        let out = exact_pure_propagator(&rho, &h, 0.5, HBAR, 400.0).unwrap();
        let gs = eig.eigenvectors.column(0).into_owned();
        let target = &gs * gs.adjoint();
        assert!(max_abs(&(out.matrix() - target)) < 1e-9);
        for t in [0.0, 1.0, 10.0, 50.0] {
            let out = exact_pure_propagator(&rho, &h, 0.5, HBAR, t).unwrap();
            assert!((out.purity() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            exact_pure_propagator(&werner_state(Bell::PsiPlus, 0.9).unwrap(), &h, 0.5, HBAR, 1.0),
            Err(Error::NotPure { .. })
        ));
    }

    #[test]
    fn exact_propagator_ground_state_weight_follows_damping_law() {
        // Amplitude ratio of eigencomponents decays as exp(−κ ΔE t/(ħ(1+κ²))).
        let h = dimer_h(Vector3::new(1.0, 0.0, 0.0), 1.0, 0.0);
        let eig = linalg::eig_hermitian(&h).unwrap();
        let rho = parse_state("ket:up,down", &SpinSystem::qubit_pair()).unwrap();
        let prop = PurePropagator::new(&rho, &h, 0.5, HBAR).unwrap();
        let psi0 = eig.eigenvectors.adjoint() * rho.matrix() * &eig.eigenvectors;
        let t = 50.0;
        let psi = eig.eigenvectors.adjoint() * prop.vector_at(t).unwrap();
        let w0 = psi0[(0, 0)].re;
        for k in 1..4 {
            let wk0 = psi0[(k, k)].re;
            if wk0 < 1e-12 {
                continue;
            }
            let de = eig.eigenvalues[k] - eig.eigenvalues[0];
            let expected = (wk0 / w0).sqrt() * (-0.5 * de * t / (HBAR * 1.25)).exp();
            let got = psi[k].norm() / psi[0].norm();
            assert!((got - expected).abs() <= 1e-9 * expected.max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn monitor_aborts_on_runaway_step() {
        // a huge Euler step breaks positivity
        let h = dimer_h(Vector3::new(1.0, 0.0, 0.0), 1.0, 0.0);
        let rho0 = parse_state("ket:up,down", &SpinSystem::qubit_pair()).unwrap();
        let params = QDynParams {
            integrator: Integrator::Euler,
            dt: 20.0,
            t_max: 200.0,
            steady_tol: 0.0,
            ..Default::default()
        };
        let err = integrate(&rho0, &h, &params, Equation::Qllg).unwrap_err();
        assert!(err.is_numerical_abort(), "{err}");
    }

    #[test]
    fn params_validation() {
        let ok = QDynParams::default();
        ok.validate().unwrap();
        for bad in [
            QDynParams { dt: 0.0, ..ok },
            QDynParams { t_max: 1e-4, ..ok },
            QDynParams { kappa: -1.0, ..ok },
            QDynParams { sample_stride: 0, ..ok },
            QDynParams { steady_tol: f64::NAN, ..ok },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
