//! Spin-s operators, tensor-product spin systems, and state factories.
//!
//! Spin operators are dimensionless: every matrix returned here is the
//! physical operator divided by ħ. Basis states are ordered by descending
//! projection, `|+s⟩, |s-1⟩, …, |-s⟩`, and multi-site bases are
//! lexicographic in `(m_1, m_2, …)` with site 0 most significant. For two
//! spin-½ sites this gives `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, I, ONE, ZERO};

/// Hermiticity tolerance for a valid density operator.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Unit-trace tolerance for a valid density operator.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue tolerated in a valid density operator.
pub const POSITIVITY_TOL: f64 = 1e-8;

/// A spin quantum number, stored as `2s` so half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin(u32);

impl Spin {
    pub const HALF: Spin = Spin(1);

    pub fn from_twice(twice_s: u32) -> Result<Self> {
        if twice_s == 0 {
            return Err(Error::InvalidSpin(0.0));
        }
        Ok(Spin(twice_s))
    }

    pub fn new(s: f64) -> Result<Self> {
        let twice = 2.0 * s;
        if !twice.is_finite() || twice < 1.0 || (twice - twice.round()).abs() > 1e-12 || twice > 1e6 {
            return Err(Error::InvalidSpin(s));
        }
        Ok(Spin(twice.round() as u32))
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// Basis index of projection `m` (index 0 is `m = +s`).
    pub fn index_of(self, m: f64) -> Result<usize> {
        let s = self.value();
        let twice_m = 2.0 * m;
        let ok = m.is_finite()
            && m.abs() <= s + 1e-12
            && (twice_m - twice_m.round()).abs() < 1e-12
            && ((twice_m.round() as i64) - i64::from(self.0)).rem_euclid(2) == 0;
        if !ok {
            return Err(Error::InvalidProjection { s, m });
        }
        Ok((s - m).round() as usize)
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// `(S_x, S_y, S_z)` in units of ħ.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub x: CMatrix,
    pub y: CMatrix,
    pub z: CMatrix,
}

impl SpinOperators {
    pub fn components(&self) -> [&CMatrix; 3] {
        [&self.x, &self.y, &self.z]
    }

    /// `a · S`
    pub fn dot(&self, a: &Vector3<f64>) -> CMatrix {
        self.x.scale(a.x) + self.y.scale(a.y) + self.z.scale(a.z)
    }
}

/// Spin matrices for spin `s`, built from the ladder operators.
pub fn spin_operators(s: Spin) -> SpinOperators {
    let d = s.dim();
    let sv = s.value();
    let mut raise = CMatrix::zeros(d, d);
    for i in 1..d {
        // S+ |m⟩ = sqrt(s(s+1) - m(m+1)) |m+1⟩ with m = s - i
        let m = sv - i as f64;
        raise[(i - 1, i)] = Complex64::new((sv * (sv + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    let x = (&raise + &lower).scale(0.5);
    let y = (&raise - &lower).map(|z| z / (2.0 * I));
    let z = CMatrix::from_diagonal(&CVector::from_iterator(
        d,
        (0..d).map(|i| Complex64::new(sv - i as f64, 0.0)),
    ));
    SpinOperators { x, y, z }
}

/// An ordered list of spins spanning a tensor-product Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinSystem {
    sites: Vec<Spin>,
}

impl SpinSystem {
    pub fn new(sites: Vec<Spin>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidParameter("a spin system needs at least one site".into()));
        }
        Ok(SpinSystem { sites })
    }

    pub fn uniform(s: Spin, n_sites: usize) -> Result<Self> {
        Self::new(vec![s; n_sites])
    }

    pub fn qubit_pair() -> Self {
        SpinSystem {
            sites: vec![Spin::HALF, Spin::HALF],
        }
    }

    pub fn sites(&self) -> &[Spin] {
        &self.sites
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn site(&self, k: usize) -> Result<Spin> {
        self.sites.get(k).copied().ok_or(Error::InvalidSite {
            site: k,
            n_sites: self.sites.len(),
        })
    }

    pub fn dims(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s.dim()).collect()
    }

    pub fn dim(&self) -> usize {
        self.sites.iter().map(|s| s.dim()).product()
    }

    pub fn is_qubit_pair(&self) -> bool {
        self.sites == [Spin::HALF, Spin::HALF]
    }

    /// Embed a single-site operator at `site`, identity elsewhere.
    pub fn embed(&self, site: usize, op: &CMatrix) -> Result<CMatrix> {
        let s = self.site(site)?;
        if op.shape() != (s.dim(), s.dim()) {
            return Err(Error::DimensionMismatch(format!(
                "site {site} has dimension {} but operator is {:?}",
                s.dim(),
                op.shape()
            )));
        }
        let mut out = CMatrix::identity(1, 1);
        for (k, sk) in self.sites.iter().enumerate() {
            out = if k == site {
                linalg::kron(&out, op)
            } else {
                linalg::kron(&out, &CMatrix::identity(sk.dim(), sk.dim()))
            };
        }
        Ok(out)
    }

    /// Spin operators of `site`, embedded in the full space.
    pub fn site_spin(&self, site: usize) -> Result<SpinOperators> {
        let local = spin_operators(self.site(site)?);
        Ok(SpinOperators {
            x: self.embed(site, &local.x)?,
            y: self.embed(site, &local.y)?,
            z: self.embed(site, &local.z)?,
        })
    }
}

/// A Hermitian, unit-trace, positive semidefinite operator on a spin system.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    system: SpinSystem,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix, system: SpinSystem) -> Result<Self> {
        let rho = Self::new_unchecked(matrix, system)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Checks only dimensions.
    pub fn new_unchecked(matrix: CMatrix, system: SpinSystem) -> Result<Self> {
        let d = system.dim();
        if matrix.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "density matrix is {:?} but the system has dimension {d}",
                matrix.shape()
            )));
        }
        Ok(DensityOperator { matrix, system })
    }

    pub fn validate(&self) -> Result<()> {
        let herm = linalg::hermiticity_defect(&self.matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = self.matrix.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min = linalg::eig_hermitian(&self.matrix)?.eigenvalues[0];
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`
    pub fn from_pure(psi: &CVector, system: SpinSystem) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let psi = psi.unscale(norm);
        Self::new_unchecked(&psi * psi.adjoint(), system)
    }

    pub fn maximally_mixed(system: SpinSystem) -> Self {
        let d = system.dim();
        DensityOperator {
            matrix: CMatrix::identity(d, d).unscale(d as f64),
            system,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn system(&self) -> &SpinSystem {
        &self.system
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(linalg::eig_hermitian(&self.matrix)?.eigenvalues)
    }

    /// Reduced state of `site`.
    pub fn reduced(&self, site: usize) -> Result<CMatrix> {
        linalg::partial_trace(&self.matrix, &self.system.dims(), site)
    }
}

/// `|m⟩` for spin `s`.
pub fn basis_ket(s: Spin, m: f64) -> Result<CVector> {
    let mut v = CVector::zeros(s.dim());
    v[s.index_of(m)?] = ONE;
    Ok(v)
}

/// Pure product state `|ψ_1⟩ ⊗ |ψ_2⟩ ⊗ …`; each ket is normalized first.
pub fn product_state(kets: &[CVector]) -> Result<DensityOperator> {
    let mut sites = Vec::with_capacity(kets.len());
    let mut psi = CVector::from_element(1, ONE);
    for k in kets {
        if k.len() < 2 {
            return Err(Error::InvalidState("single-site ket of dimension < 2".into()));
        }
        sites.push(Spin::from_twice(k.len() as u32 - 1)?);
        let norm = k.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero ket".into()));
        }
        psi = psi.kronecker(&k.unscale(norm));
    }
    DensityOperator::from_pure(&psi, SpinSystem::new(sites)?)
}

/// The four two-qubit Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl Bell {
    pub const ALL: [Bell; 4] = [Bell::PhiPlus, Bell::PhiMinus, Bell::PsiPlus, Bell::PsiMinus];

    pub fn ket(self) -> CVector {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b, sign) = match self {
            Bell::PhiPlus => (0, 3, 1.0),
            Bell::PhiMinus => (0, 3, -1.0),
            Bell::PsiPlus => (1, 2, 1.0),
            Bell::PsiMinus => (1, 2, -1.0),
        };
        let mut v = CVector::zeros(4);
        v[a] = Complex64::new(r, 0.0);
        v[b] = Complex64::new(sign * r, 0.0);
        v
    }

    pub fn label(self) -> &'static str {
        match self {
            Bell::PhiPlus => "phi+",
            Bell::PhiMinus => "phi-",
            Bell::PsiPlus => "psi+",
            Bell::PsiMinus => "psi-",
        }
    }
}

impl fmt::Display for Bell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Bell {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "phi+" => Ok(Bell::PhiPlus),
            "phi-" => Ok(Bell::PhiMinus),
            "psi+" => Ok(Bell::PsiPlus),
            "psi-" => Ok(Bell::PsiMinus),
            other => Err(Error::StateSpec {
                spec: other.to_string(),
                reason: "expected one of phi+, phi-, psi+, psi-".into(),
            }),
        }
    }
}

pub fn bell_state(which: Bell) -> DensityOperator {
    DensityOperator::from_pure(&which.ket(), SpinSystem::qubit_pair())
        .expect("Bell kets are normalized")
}

/// `(1-p)/4 · 𝟙 + p |ψ⟩⟨ψ|`
pub fn werner_state(which: Bell, p: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "Werner mixing parameter p = {p} outside [0, 1]"
        )));
    }
    let bell = bell_state(which).into_matrix();
    let matrix = CMatrix::identity(4, 4).scale((1.0 - p) / 4.0) + bell.scale(p);
    DensityOperator::new_unchecked(matrix, SpinSystem::qubit_pair())
}

/// Single-spin state `(𝟙 + η·S)/(2s+1)`, with `η` in units of 1/ħ so that
/// `η·S` is dimensionless.
pub fn linear_spin_state(s: Spin, eta: &Vector3<f64>) -> Result<DensityOperator> {
    let d = s.dim() as f64;
    let ops = spin_operators(s);
    let matrix = (CMatrix::identity(s.dim(), s.dim()) + ops.dot(eta)).unscale(d);
    DensityOperator::new(matrix, SpinSystem::new(vec![s])?)
}

/// Haar-random pure state on `system`, reproducible from `seed`.
pub fn random_pure_state(system: &SpinSystem, seed: u64) -> DensityOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_pure_state_with(system, &mut rng)
}

pub fn random_pure_state_with<R: Rng>(system: &SpinSystem, rng: &mut R) -> DensityOperator {
    let d = system.dim();
    let psi = CVector::from_fn(d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    DensityOperator::from_pure(&psi, system.clone()).expect("gaussian vector is non-zero")
}

fn spin_half_ket(token: &str) -> Option<CVector> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (a, b) = match token {
        "up" | "+z" => (ONE, ZERO),
        "down" | "-z" => (ZERO, ONE),
        "+x" => (Complex64::new(r, 0.0), Complex64::new(r, 0.0)),
        "-x" => (Complex64::new(r, 0.0), Complex64::new(-r, 0.0)),
        "+y" => (Complex64::new(r, 0.0), Complex64::new(0.0, r)),
        "-y" => (Complex64::new(r, 0.0), Complex64::new(0.0, -r)),
        _ => return None,
    };
    Some(CVector::from_vec(vec![a, b]))
}

fn parse_projection(token: &str) -> Option<f64> {
    let t = token.trim().trim_start_matches('+');
    match t.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().ok()?;
            let den: f64 = den.trim().parse().ok()?;
            (den != 0.0).then_some(num / den)
        }
        None => t.parse().ok(),
    }
}

/// Build an initial state from its textual description.
///
/// | form | meaning |
/// |------|---------|
/// | `ket:up,down` | spin-½ product state; tokens `up`, `down`, `±x`, `±y`, `±z` |
/// | `bell:psi-` | Bell state (`phi±`, `psi±`) |
/// | `werner:psi+:0.9` | Werner mixture with the given Bell state and `p` |
/// | `projector:+5,-5` | product of `|m_k⟩` projectors, one projection per site |
/// | `mixed` | maximally mixed state |
/// | `random:42` | Haar-random pure state from the given seed |
pub fn parse_state(spec: &str, system: &SpinSystem) -> Result<DensityOperator> {
    let bad = |reason: String| Error::StateSpec {
        spec: spec.to_string(),
        reason,
    };
    let (kind, rest) = spec.trim().split_once(':').unwrap_or((spec.trim(), ""));
    let rho = match kind {
        "ket" => {
            let tokens: Vec<&str> = rest.split(',').map(str::trim).collect();
            if tokens.len() != system.n_sites() {
                return Err(bad(format!(
                    "{} kets given for {} sites",
                    tokens.len(),
                    system.n_sites()
                )));
            }
            if system.sites().iter().any(|&s| s != Spin::HALF) {
                return Err(bad("`ket:` tokens are only defined for spin-1/2 sites".into()));
            }
            let kets = tokens
                .iter()
                .map(|t| spin_half_ket(t).ok_or_else(|| bad(format!("unknown ket `{t}`"))))
                .collect::<Result<Vec<_>>>()?;
            product_state(&kets)?
        }
        "projector" => {
            let tokens: Vec<&str> = rest.split(',').map(str::trim).collect();
            if tokens.len() != system.n_sites() {
                return Err(bad(format!(
                    "{} projections given for {} sites",
                    tokens.len(),
                    system.n_sites()
                )));
            }
            let kets = tokens
                .iter()
                .zip(system.sites())
                .map(|(t, &s)| {
                    let m = parse_projection(t).ok_or_else(|| bad(format!("bad projection `{t}`")))?;
                    basis_ket(s, m)
                })
                .collect::<Result<Vec<_>>>()?;
            product_state(&kets)?
        }
        "bell" | "werner" => {
            if !system.is_qubit_pair() {
                return Err(bad("Bell and Werner states need two spin-1/2 sites".into()));
            }
            let mut parts = rest.split(':');
            let which: Bell = parts.next().unwrap_or("").parse()?;
            if kind == "bell" {
                bell_state(which)
            } else {
                let p: f64 = parts
                    .next()
                    .and_then(|p| p.trim().parse().ok())
                    .ok_or_else(|| bad("expected `werner:<bell>:<p>`".into()))?;
                werner_state(which, p)?
            }
        }
        "mixed" => DensityOperator::maximally_mixed(system.clone()),
        "random" => {
            let seed: u64 = rest
                .trim()
                .parse()
                .map_err(|_| bad("expected `random:<seed>`".into()))?;
            random_pure_state(system, seed)
        }
        other => return Err(bad(format!("unknown state kind `{other}`"))),
    };
    if rho.system() != system {
        return Err(bad("state does not match the configured spin system".into()));
    }
    Ok(rho)
}
