//! Magnetic Hamiltonians: the quantum spin Hamiltonian with Zeeman,
//! Heisenberg and Dzyaloshinskii–Moriya terms, and its classical
//! counterpart for interacting moments.
//!
//! Units: energies in meV, times in ps, fields in tesla. Spin operators are
//! dimensionless (units of ħ) and classical moments are given in units of
//! the Bohr magneton.
//!
//! Pair couplings are stored once per unordered pair `(i, j)` with `i < j`.
//! The quantum pair term is `c_ij [J S_i·S_j + D·(S_i × S_j)]` with
//! `c_ij = 4` for two spin-½ sites, so that it equals
//! `J σ_i·σ_j + D·(σ_i × σ_j)`; see [`CouplingScale`] for larger spins.
//! The classical pair term is `J m_i·m_j/μ_B² + D·(m_i × m_j)/μ_B²`.
//! Reading a pair in the reverse order returns `D_ji = −D_ij`.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::spin::SpinSystem;

/// ħ in meV·ps.
pub const HBAR_MEV_PS: f64 = 0.658_211_956_9;
/// Bohr magneton in meV/T (CODATA 2018).
pub const MU_B_CODATA: f64 = 0.057_883_818_060;
/// The Bohr magneton figure `6.58 × 10⁻² meV/T` used for the figure
/// presets in `paper` units.
pub const MU_B_PAPER: f64 = 0.0658;

/// Which value of the Bohr magneton to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnitSystem {
    #[default]
    Codata,
    Paper,
}

impl std::str::FromStr for UnitSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "codata" => Ok(UnitSystem::Codata),
            "paper" => Ok(UnitSystem::Paper),
            other => Err(Error::InvalidParameter(format!(
                "unknown unit system `{other}` (expected `codata` or `paper`)"
            ))),
        }
    }
}

impl std::fmt::Display for UnitSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            UnitSystem::Codata => "codata",
            UnitSystem::Paper => "paper",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// meV·ps
    pub hbar: f64,
    /// meV/T
    pub mu_b: f64,
    pub g_factor: f64,
}

impl PhysicalConstants {
    pub fn codata() -> Self {
        PhysicalConstants {
            hbar: HBAR_MEV_PS,
            mu_b: MU_B_CODATA,
            g_factor: 2.0,
        }
    }

    pub fn paper() -> Self {
        PhysicalConstants {
            mu_b: MU_B_PAPER,
            ..Self::codata()
        }
    }

    pub fn for_units(units: UnitSystem) -> Self {
        match units {
            UnitSystem::Codata => Self::codata(),
            UnitSystem::Paper => Self::paper(),
        }
    }

    /// `γ_g = g μ_B / ħ` in rad·ps⁻¹·T⁻¹, taken positive.
    pub fn gamma_g(&self) -> f64 {
        self.g_factor * self.mu_b / self.hbar
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.hbar, self.mu_b, self.g_factor]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("constants must be positive: {self:?}")))
        }
    }
}

/// Prefactor of the quantum pair term for spins longer than ½.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingScale {
    /// `c_ij = 2/√(s_i s_j)`. The exchange precession frequency of a spin
    /// then does not depend on `s`, so a spin-s dimer and a classical dimer
    /// with the same `J` share their classical limit.
    #[default]
    SpinScaled,
    /// `c_ij = 4` for every spin length.
    Uniform,
}

impl CouplingScale {
    pub fn factor(self, s_i: f64, s_j: f64) -> f64 {
        match self {
            CouplingScale::SpinScaled => 2.0 / (s_i * s_j).sqrt(),
            CouplingScale::Uniform => 4.0,
        }
    }
}

impl std::str::FromStr for CouplingScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spin_scaled" => Ok(CouplingScale::SpinScaled),
            "uniform" => Ok(CouplingScale::Uniform),
            other => Err(Error::InvalidParameter(format!(
                "unknown coupling scale `{other}` (expected spin_scaled or uniform)"
            ))),
        }
    }
}

impl std::fmt::Display for CouplingScale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CouplingScale::SpinScaled => "spin_scaled",
            CouplingScale::Uniform => "uniform",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCoupling {
    pub i: usize,
    pub j: usize,
    /// Heisenberg exchange in meV; positive is antiferromagnetic.
    pub exchange: f64,
    /// DMI vector in meV, oriented for `i < j`.
    pub dmi: Vector3<f64>,
}

/// Physical parameters of a spin Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub system: SpinSystem,
    /// Tesla.
    pub b_field: Vector3<f64>,
    pub constants: PhysicalConstants,
    /// rad·ps⁻¹·T⁻¹
    pub gamma_g: f64,
    pub coupling_scale: CouplingScale,
    couplings: Vec<PairCoupling>,
}

impl HamiltonianSpec {
    pub fn new(system: SpinSystem, b_field: Vector3<f64>, constants: PhysicalConstants) -> Self {
        HamiltonianSpec {
            system,
            b_field,
            gamma_g: constants.gamma_g(),
            constants,
            coupling_scale: CouplingScale::default(),
            couplings: Vec::new(),
        }
    }

    /// Add or replace the coupling of pair `(i, j)`. `dmi` is oriented as
    /// `D_ij`, so passing the pair reversed flips its sign.
    pub fn set_coupling(&mut self, i: usize, j: usize, exchange: f64, dmi: Vector3<f64>) -> Result<()> {
        let n = self.system.n_sites();
        if i == j || i >= n || j >= n {
            return Err(Error::InvalidSite {
                site: i.max(j),
                n_sites: n,
            });
        }
        let (i, j, dmi) = if i < j { (i, j, dmi) } else { (j, i, -dmi) };
        self.couplings.retain(|c| (c.i, c.j) != (i, j));
        self.couplings.push(PairCoupling { i, j, exchange, dmi });
        self.couplings.sort_by_key(|c| (c.i, c.j));
        Ok(())
    }

    pub fn with_coupling(mut self, i: usize, j: usize, exchange: f64, dmi: Vector3<f64>) -> Result<Self> {
        self.set_coupling(i, j, exchange, dmi)?;
        Ok(self)
    }

    pub fn couplings(&self) -> &[PairCoupling] {
        &self.couplings
    }

    /// `J_kl = J_lk`
    pub fn exchange(&self, k: usize, l: usize) -> f64 {
        let (a, b) = if k < l { (k, l) } else { (l, k) };
        self.couplings
            .iter()
            .find(|c| (c.i, c.j) == (a, b))
            .map_or(0.0, |c| c.exchange)
    }

    /// `D_kl = −D_lk`
    pub fn dmi(&self, k: usize, l: usize) -> Vector3<f64> {
        let (a, b, sign) = if k < l { (k, l, 1.0) } else { (l, k, -1.0) };
        self.couplings
            .iter()
            .find(|c| (c.i, c.j) == (a, b))
            .map_or(Vector3::zeros(), |c| c.dmi * sign)
    }
}

/// Quantum spin Hamiltonian in meV:
/// `−γ_g B·Σ_k S_k + Σ_{i<j} c_ij [J_ij S_i·S_j + D_ij·(S_i × S_j)]`
/// with `S` in units of ħ.
pub fn build_quantum_hamiltonian(spec: &HamiltonianSpec) -> Result<CMatrix> {
    spec.constants.validate()?;
    let sys = &spec.system;
    let d = sys.dim();
    let spins = (0..sys.n_sites())
        .map(|k| sys.site_spin(k))
        .collect::<Result<Vec<_>>>()?;

    let zeeman = spec.gamma_g * spec.constants.hbar;
    let mut h = CMatrix::zeros(d, d);
    for s in &spins {
        h -= s.dot(&spec.b_field).scale(zeeman);
    }
    for c in spec.couplings() {
        let [ix, iy, iz] = spins[c.i].components();
        let [jx, jy, jz] = spins[c.j].components();
        let scale = spec
            .coupling_scale
            .factor(sys.sites()[c.i].value(), sys.sites()[c.j].value());
        if c.exchange != 0.0 {
            let heis = ix * jx + iy * jy + iz * jz;
            h += heis.scale(scale * c.exchange);
        }
        if c.dmi != Vector3::zeros() {
            let cross = [
                iy * jz - iz * jy,
                iz * jx - ix * jz,
                ix * jy - iy * jx,
            ];
            for (comp, dk) in cross.iter().zip(c.dmi.iter()) {
                if *dk != 0.0 {
                    h += comp.scale(scale * dk);
                }
            }
        }
    }
    if !linalg::is_hermitian(&h, 1e-12) {
        return Err(Error::InvalidState(
            "assembled Hamiltonian is not Hermitian".into(),
        ));
    }
    Ok(h)
}

fn check_moments(moments: &[Vector3<f64>], spec: &HamiltonianSpec) -> Result<()> {
    if moments.len() != spec.system.n_sites() {
        return Err(Error::DimensionMismatch(format!(
            "{} moments for {} sites",
            moments.len(),
            spec.system.n_sites()
        )));
    }
    Ok(())
}

/// Classical energy in meV of moments given in units of μ_B:
/// `−Σ_k B·m_k + μ_B⁻² Σ_{i<j} [J_ij m_i·m_j + D_ij·(m_i × m_j)]`.
pub fn classical_energy(moments: &[Vector3<f64>], spec: &HamiltonianSpec) -> Result<f64> {
    check_moments(moments, spec)?;
    let mu_b = spec.constants.mu_b;
    let zeeman: f64 = moments.iter().map(|m| -mu_b * spec.b_field.dot(m)).sum();
    let pairs: f64 = spec
        .couplings()
        .iter()
        .map(|c| {
            let (mi, mj) = (&moments[c.i], &moments[c.j]);
            c.exchange * mi.dot(mj) + c.dmi.dot(&mi.cross(mj))
        })
        .sum();
    Ok(zeeman + pairs)
}

/// Effective field `B_k = −∂H/∂m_k` in tesla.
pub fn effective_field(moments: &[Vector3<f64>], spec: &HamiltonianSpec, k: usize) -> Result<Vector3<f64>> {
    check_moments(moments, spec)?;
    if k >= moments.len() {
        return Err(Error::InvalidSite {
            site: k,
            n_sites: moments.len(),
        });
    }
    let mut pair = Vector3::zeros();
    for (l, ml) in moments.iter().enumerate() {
        if l == k {
            continue;
        }
        // ∂/∂m_k of D_kl·(m_k × m_l) is m_l × D_kl
        pair += ml * spec.exchange(k, l) + ml.cross(&spec.dmi(k, l));
    }
    Ok(spec.b_field - pair / spec.constants.mu_b)
}

pub fn effective_fields(moments: &[Vector3<f64>], spec: &HamiltonianSpec) -> Result<Vec<Vector3<f64>>> {
    (0..moments.len()).map(|k| effective_field(moments, spec, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig_hermitian, max_abs};
    use crate::spin::{Bell, Spin};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dimer(b: Vector3<f64>, j: f64, d: Vector3<f64>) -> HamiltonianSpec {
        HamiltonianSpec::new(SpinSystem::qubit_pair(), b, PhysicalConstants::paper())
            .with_coupling(0, 1, j, d)
            .unwrap()
    }

    /// Eigenvalues of a Hermitian 4×4 by Jacobi rotations on the equivalent
    /// real symmetric 8×8 embedding `[[Re, -Im], [Im, Re]]`; every
    /// eigenvalue appears twice.
    fn jacobi_eigenvalues(h: &CMatrix) -> Vec<f64> {
        let n = h.nrows();
        let m = 2 * n;
        let mut a = vec![vec![0.0; m]; m];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = h[(i, j)].re;
                a[i + n][j + n] = h[(i, j)].re;
                a[i][j + n] = -h[(i, j)].im;
                a[i + n][j] = h[(i, j)].im;
            }
        }
        for _ in 0..100 {
            let off: f64 = (0..m)
                .flat_map(|i| (0..m).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..m {
                for q in (p + 1)..m {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..m {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..m {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
        ev.sort_by(|x, y| x.total_cmp(y));
        ev.into_iter().step_by(2).collect()
    }

    #[test]
    fn heisenberg_singlet_triplet_splitting() {
        let j = 0.0658;
        let h = build_quantum_hamiltonian(&dimer(Vector3::zeros(), j, Vector3::zeros())).unwrap();
        let oracle = jacobi_eigenvalues(&h);
        let expected = [-3.0 * j, j, j, j];
        for (o, e) in oracle.iter().zip(expected) {
            assert!((o - e).abs() < 1e-12, "{oracle:?}");
        }
        let eig = eig_hermitian(&h).unwrap();
        for (l, e) in eig.eigenvalues.iter().zip(expected) {
            assert!((l - e).abs() < 1e-12);
        }
    }

    #[test]
    fn zeeman_ladder() {
        let spec = dimer(Vector3::new(1.0, 0.0, 0.0), 0.0, Vector3::zeros());
        let h = build_quantum_hamiltonian(&spec).unwrap();
        // per site ±γ_g ħ B₀/2; combined −γħB, 0, 0, +γħB
        let e = spec.gamma_g * spec.constants.hbar;
        let oracle = jacobi_eigenvalues(&h);
        for (o, x) in oracle.iter().zip([-e, 0.0, 0.0, e]) {
            assert!((o - x).abs() < 1e-12);
        }
        assert!((e - 2.0 * MU_B_PAPER).abs() < 1e-15);
    }

    #[test]
    fn dmi_matrix_elements() {
        let dz = 0.04;
        let h = build_quantum_hamiltonian(&dimer(Vector3::zeros(), 0.0, Vector3::new(0.0, 0.0, dz)))
            .unwrap();
        // D·(σ1×σ2) with D ∥ z: D(σx σy − σy σx) couples |↑↓⟩ and |↓↑⟩ by ∓2iD
        let mut expected = CMatrix::zeros(4, 4);
        expected[(1, 2)] = Complex64::new(0.0, 2.0 * dz);
        expected[(2, 1)] = Complex64::new(0.0, -2.0 * dz);
        assert!(max_abs(&(&h - &expected)) < 1e-15, "{h}");
        let psi_m = Bell::PsiMinus.ket();
        let psi_p = Bell::PsiPlus.ket();
        let elem = (psi_m.adjoint() * &h * &psi_p)[(0, 0)];
        assert!((elem.norm() - 2.0 * dz).abs() < 1e-12);
    }

    #[test]
    fn singlet_decoupled_without_dmi() {
        let h = build_quantum_hamiltonian(&dimer(
            Vector3::new(0.3, -0.7, 1.1),
            0.0658,
            Vector3::zeros(),
        ))
        .unwrap();
        assert!(linalg::is_hermitian(&h, 1e-12));
        let singlet = Bell::PsiMinus.ket();
        for other in [Bell::PsiPlus, Bell::PhiPlus, Bell::PhiMinus] {
            let elem: Complex64 = (singlet.adjoint() * &h * other.ket())[(0, 0)];
            assert!(elem.norm() < 1e-15);
        }
        // and with DMI it does couple
        let h = build_quantum_hamiltonian(&dimer(
            Vector3::new(1.0, 0.0, 0.0),
            0.0658,
            Vector3::new(0.0, 0.0, 0.6 * 0.0658),
        ))
        .unwrap();
        let elem: Complex64 = (singlet.adjoint() * &h * Bell::PsiPlus.ket())[(0, 0)];
        assert!((elem.norm() - 2.0 * 0.6 * 0.0658).abs() < 1e-12);
    }

    #[test]
    fn general_spin_hamiltonian_is_hermitian() {
        let sys = SpinSystem::new(vec![Spin::new(1.5).unwrap(), Spin::new(1.0).unwrap(), Spin::HALF]).unwrap();
        let mut spec = HamiltonianSpec::new(sys, Vector3::new(0.2, 0.5, -1.0), PhysicalConstants::codata());
        spec.set_coupling(0, 1, 0.05, Vector3::new(0.01, 0.02, -0.03)).unwrap();
        spec.set_coupling(2, 1, -0.02, Vector3::new(0.0, 0.01, 0.0)).unwrap();
        let h = build_quantum_hamiltonian(&spec).unwrap();
        assert_eq!(h.nrows(), 24);
        assert!(linalg::hermiticity_defect(&h) < 1e-15);
        assert_eq!(spec.dmi(1, 2), Vector3::new(0.0, -0.01, 0.0));
        assert_eq!(spec.exchange(1, 2), -0.02);
        assert!(spec.set_coupling(1, 1, 0.0, Vector3::zeros()).is_err());
        assert!(spec.set_coupling(0, 5, 0.0, Vector3::zeros()).is_err());
    }

    #[test]
    fn exchange_spectrum_for_larger_spins() {
        // c J S₁·S₂ = (c J / 2)[S_tot(S_tot + 1) − 2s(s + 1)], multiplicity 2S_tot + 1
        for twice in [2u32, 3, 5] {
            let s = Spin::from_twice(twice).unwrap();
            let sv = s.value();
            for scale in [CouplingScale::SpinScaled, CouplingScale::Uniform] {
                let mut spec = HamiltonianSpec::new(
                    SpinSystem::uniform(s, 2).unwrap(),
                    Vector3::zeros(),
                    PhysicalConstants::paper(),
                )
                .with_coupling(0, 1, 0.0658, Vector3::zeros())
                .unwrap();
                spec.coupling_scale = scale;
                let c = scale.factor(sv, sv);
                let mut expected = Vec::new();
                for k in 0..=twice {
                    let st = k as f64;
                    let e = 0.5 * c * 0.0658 * (st * (st + 1.0) - 2.0 * sv * (sv + 1.0));
                    expected.extend(std::iter::repeat(e).take(2 * k as usize + 1));
                }
                expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let got = eig_hermitian(&build_quantum_hamiltonian(&spec).unwrap()).unwrap().eigenvalues;
                for (g, e) in got.iter().zip(&expected) {
                    assert!((g - e).abs() < 1e-12, "{scale} s={sv}: {g} vs {e}");
                }
            }
        }
        assert_eq!(CouplingScale::SpinScaled.factor(0.5, 0.5), 4.0);
        assert_eq!("uniform".parse::<CouplingScale>().unwrap(), CouplingScale::Uniform);
        assert!("quadratic".parse::<CouplingScale>().is_err());
    }

    #[test]
    fn classical_examples() {
        let free = dimer(Vector3::new(0.4, 0.0, 1.0), 0.0, Vector3::zeros());
        let m = [Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 1.0, 0.0)];
        for k in 0..2 {
            assert_eq!(effective_field(&m, &free, k).unwrap(), free.b_field);
        }
        let j = 0.0658;
        let afm = dimer(Vector3::zeros(), j, Vector3::zeros());
        let up = [Vector3::z(), Vector3::z()];
        assert!((classical_energy(&up, &afm).unwrap() - j).abs() < 1e-15);
        let b1 = effective_field(&up, &afm, 0).unwrap();
        assert!((b1 - Vector3::new(0.0, 0.0, -j / MU_B_PAPER)).norm() < 1e-14);
        assert!(effective_field(&up, &afm, 2).is_err());
        assert!(classical_energy(&up[..1], &afm).is_err());
    }

    #[test]
    fn effective_field_is_negative_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let sys = SpinSystem::uniform(Spin::HALF, 3).unwrap();
        for _ in 0..200 {
            let mut spec = HamiltonianSpec::new(
                sys.clone(),
                Vector3::from_fn(|_, _| rng.random_range(-2.0..2.0)),
                PhysicalConstants::codata(),
            );
            for (i, j) in [(0, 1), (1, 2), (2, 0)] {
                let d = Vector3::from_fn(|_, _| rng.random_range(-0.1..0.1));
                spec.set_coupling(i, j, rng.random_range(-0.1..0.1), d).unwrap();
            }
            let moments: Vec<Vector3<f64>> = (0..3)
                .map(|_| Vector3::from_fn(|_, _| rng.random_range(-1.5..1.5)))
                .collect();
            let mu_b = spec.constants.mu_b;
            for k in 0..3 {
                let field = effective_field(&moments, &spec, k).unwrap();
                let h = 1e-6;
                let mut fd = Vector3::zeros();
                for a in 0..3 {
                    let mut plus = moments.clone();
                    let mut minus = moments.clone();
                    plus[k][a] += h;
                    minus[k][a] -= h;
                    let dh = classical_energy(&plus, &spec).unwrap() - classical_energy(&minus, &spec).unwrap();
                    // moments are in μ_B, so ∂H/∂m = (1/μ_B) ∂H/∂u
                    fd[a] = -dh / (2.0 * h) / mu_b;
                }
                assert!((field - fd).norm() <= 1e-6 * field.norm().max(1.0), "{field} vs {fd}");
            }
        }
    }

    #[test]
    fn units() {
        assert!((PhysicalConstants::paper().gamma_g() - 2.0 * 0.0658 / HBAR_MEV_PS).abs() < 1e-15);
        assert_eq!("paper".parse::<UnitSystem>().unwrap(), UnitSystem::Paper);
        assert!("si".parse::<UnitSystem>().is_err());
        let bad = PhysicalConstants { hbar: -1.0, ..PhysicalConstants::codata() };
        assert!(bad.validate().is_err());
    }
}
