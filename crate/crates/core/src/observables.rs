//! Quantities measured along trajectories, and the string registry that
//! names them as CSV columns.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::models::{classical_energy, HamiltonianSpec};
use crate::spin::{Bell, Spin, SpinOperators, SpinSystem};

/// Two-qubit expansion coefficients `T_αβ = Tr(ρ σ_α⊗σ_β)`, indices
/// `α, β ∈ {0, x, y, z}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationMatrix(pub [[f64; 4]; 4]);

impl CorrelationMatrix {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.0[a][b]
    }

    /// Spatial 3×3 block `T_kl`.
    pub fn block(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|k, l| self.0[k + 1][l + 1])
    }

    /// `T_k0`
    pub fn bloch_first(&self) -> Vector3<f64> {
        Vector3::new(self.0[1][0], self.0[2][0], self.0[3][0])
    }

    /// `T_0l`
    pub fn bloch_second(&self) -> Vector3<f64> {
        Vector3::new(self.0[0][1], self.0[0][2], self.0[0][3])
    }

    /// `¼ Σ T_αβ σ_α⊗σ_β`
    pub fn reconstruct(&self) -> CMatrix {
        let p = linalg::pauli();
        let mut out = CMatrix::zeros(4, 4);
        for a in 0..4 {
            for b in 0..4 {
                out += linalg::kron(&p[a], &p[b]) * Complex64::from(0.25 * self.0[a][b]);
            }
        }
        out
    }
}

fn require_two_qubits(rho: &CMatrix) -> Result<()> {
    if rho.shape() != (4, 4) {
        return Err(Error::DimensionMismatch(format!(
            "two spin-1/2 sites required, got a {:?} state",
            rho.shape()
        )));
    }
    Ok(())
}

pub fn correlation_matrix(rho: &CMatrix) -> Result<CorrelationMatrix> {
    require_two_qubits(rho)?;
    let p = linalg::pauli();
    let mut t = [[0.0; 4]; 4];
    for (a, row) in t.iter_mut().enumerate() {
        for (b, entry) in row.iter_mut().enumerate() {
            let op = linalg::kron(&p[a], &p[b]);
            // Tr(ρ P) without forming the product
            *entry = rho
                .iter()
                .zip(op.transpose().iter())
                .map(|(x, y)| (x * y).re)
                .sum();
        }
    }
    Ok(CorrelationMatrix(t))
}

/// `B = sqrt(max(u₁² + u₂² − 1, 0))` from the two largest singular values
/// of the spatial block.
pub fn bell_nonlocality_of(t: &CorrelationMatrix) -> f64 {
    let block = t.block();
    let [_, _, u3] = linalg::svd3(&block);
    // u₁² + u₂² = ‖T‖²_F − u₃², accurate near product states where u₃ ≈ 0
    (block.norm_squared() - u3 * u3 - 1.0).max(0.0).sqrt()
}

pub fn bell_nonlocality(rho: &CMatrix) -> Result<f64> {
    Ok(bell_nonlocality_of(&correlation_matrix(rho)?))
}

/// Bloch vector `Tr(ρ_site σ)` of a spin-½ site.
pub fn bloch_vector(rho: &CMatrix, system: &SpinSystem, site: usize) -> Result<Vector3<f64>> {
    if system.site(site)? != Spin::HALF {
        return Err(Error::InvalidParameter(format!("site {site} is not spin-1/2")));
    }
    let red = linalg::partial_trace(rho, &system.dims(), site)?;
    Ok(Vector3::new(
        2.0 * red[(0, 1)].re,
        -2.0 * red[(0, 1)].im,
        (red[(0, 0)] - red[(1, 1)]).re,
    ))
}

/// `⟨S⟩` of `site` in units of ħ.
pub fn spin_expectation(rho: &CMatrix, system: &SpinSystem, site: usize) -> Result<Vector3<f64>> {
    let ops = crate::spin::spin_operators(system.site(site)?);
    let red = linalg::partial_trace(rho, &system.dims(), site)?;
    Ok(expectation3(&red, &ops))
}

fn expect(rho: &CMatrix, op: &CMatrix) -> f64 {
    // Tr(ρ A) = Σ_ij ρ_ij A_ji
    rho.iter().zip(op.transpose().iter()).map(|(x, y)| (x * y).re).sum()
}

fn expectation3(rho: &CMatrix, ops: &SpinOperators) -> Vector3<f64> {
    Vector3::new(expect(rho, &ops.x), expect(rho, &ops.y), expect(rho, &ops.z))
}

pub fn purity(rho: &CMatrix) -> f64 {
    rho.iter().map(|z| z.norm_sqr()).sum()
}

/// `Tr ρⁿ`, computed from the spectrum.
pub fn trace_power(rho: &CMatrix, n: u32) -> Result<f64> {
    let eig = linalg::eig_hermitian(rho)?;
    Ok(eig.eigenvalues.iter().map(|l| l.powi(n as i32)).sum())
}

/// `S_δ = ln(Tr ρ^δ) / (1 − δ)`
pub fn renyi_entropy(rho: &CMatrix, delta: f64) -> Result<f64> {
    if (delta - 1.0).abs() < 1e-12 {
        return Err(Error::InvalidParameter(
            "Renyi order 1 is the von Neumann entropy; use von_neumann_entropy".into(),
        ));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("Renyi order must be > 0, got {delta}")));
    }
    let eig = linalg::eig_hermitian(rho)?;
    let sum: f64 = eig
        .eigenvalues
        .iter()
        .map(|&l| if l > 1e-300 { l.powf(delta) } else { 0.0 })
        .sum();
    Ok(sum.ln() / (1.0 - delta))
}

/// `−Tr ρ ln ρ`, with `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &CMatrix) -> Result<f64> {
    let eig = linalg::eig_hermitian(rho)?;
    Ok(-eig
        .eigenvalues
        .iter()
        .filter(|&&l| l > 1e-300)
        .map(|&l| l * l.ln())
        .sum::<f64>())
}

/// `⟨Ψ₋|ρ|Ψ₋⟩`
pub fn singlet_overlap(rho: &CMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let psi = Bell::PsiMinus.ket();
    Ok((psi.adjoint() * rho * psi)[(0, 0)].re)
}

/// `Tr(ρ H)`
pub fn energy(rho: &CMatrix, h: &CMatrix) -> f64 {
    expect(rho, h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    X,
    Y,
    Z,
    Magnitude,
}

impl Component {
    fn suffix(self) -> &'static str {
        match self {
            Component::X => "x",
            Component::Y => "y",
            Component::Z => "z",
            Component::Magnitude => "mag",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "x" => Some(Component::X),
            "y" => Some(Component::Y),
            "z" => Some(Component::Z),
            "mag" => Some(Component::Magnitude),
            _ => None,
        }
    }

    pub fn of(self, v: &Vector3<f64>) -> f64 {
        match self {
            Component::X => v.x,
            Component::Y => v.y,
            Component::Z => v.z,
            Component::Magnitude => v.norm(),
        }
    }
}

const PAULI_LABELS: [char; 4] = ['0', 'x', 'y', 'z'];

/// A named column. Site numbers in names are 1-based (`r1_x` is site 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    Trace,
    Purity,
    /// `Tr ρ³`
    TraceCubed,
    Renyi2,
    Renyi3,
    Entropy,
    BellB,
    Singlet,
    /// `Tr(ρH)`, meV
    Energy,
    /// `T_αβ`
    Correlation(usize, usize),
    /// Bloch vector of a spin-½ site.
    Bloch(usize, Component),
    /// `⟨S⟩` in units of ħ.
    Spin(usize, Component),
    /// Classical moment in μ_B.
    Moment(usize, Component),
    /// Classical energy, meV.
    ClassicalEnergy,
}

impl Observable {
    pub fn is_classical(&self) -> bool {
        matches!(self, Observable::Moment(..) | Observable::ClassicalEnergy)
    }

    pub fn needs_two_qubits(&self) -> bool {
        matches!(
            self,
            Observable::BellB | Observable::Singlet | Observable::Correlation(..)
        )
    }

    fn site(&self) -> Option<usize> {
        match self {
            Observable::Bloch(k, _) | Observable::Spin(k, _) | Observable::Moment(k, _) => Some(*k),
            _ => None,
        }
    }

    /// Check that this observable can be evaluated on `system`.
    pub fn check(&self, system: &SpinSystem) -> Result<()> {
        if self.needs_two_qubits() && !system.is_qubit_pair() {
            return Err(Error::InvalidParameter(format!(
                "observable `{self}` needs two spin-1/2 sites"
            )));
        }
        if let Some(k) = self.site() {
            let s = system.site(k)?;
            if matches!(self, Observable::Bloch(..)) && s != Spin::HALF {
                return Err(Error::InvalidParameter(format!(
                    "observable `{self}` needs a spin-1/2 site"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Trace => f.write_str("trace"),
            Observable::Purity => f.write_str("purity"),
            Observable::TraceCubed => f.write_str("tr_rho3"),
            Observable::Renyi2 => f.write_str("renyi2"),
            Observable::Renyi3 => f.write_str("renyi3"),
            Observable::Entropy => f.write_str("entropy"),
            Observable::BellB => f.write_str("bell_B"),
            Observable::Singlet => f.write_str("singlet"),
            Observable::Energy => f.write_str("energy"),
            Observable::Correlation(a, b) => write!(f, "T_{}{}", PAULI_LABELS[*a], PAULI_LABELS[*b]),
            Observable::Bloch(k, c) => write!(f, "r{}_{}", k + 1, c.suffix()),
            Observable::Spin(k, c) => write!(f, "S{}_{}", k + 1, c.suffix()),
            Observable::Moment(k, c) => write!(f, "m{}_{}", k + 1, c.suffix()),
            Observable::ClassicalEnergy => f.write_str("energy_cl"),
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownObservable(s.to_string());
        let simple = match s {
            "trace" => Some(Observable::Trace),
            "purity" => Some(Observable::Purity),
            "tr_rho3" => Some(Observable::TraceCubed),
            "renyi2" => Some(Observable::Renyi2),
            "renyi3" => Some(Observable::Renyi3),
            "entropy" => Some(Observable::Entropy),
            "bell_B" => Some(Observable::BellB),
            "singlet" => Some(Observable::Singlet),
            "energy" => Some(Observable::Energy),
            "energy_cl" => Some(Observable::ClassicalEnergy),
            _ => None,
        };
        if let Some(o) = simple {
            return Ok(o);
        }
        if let Some(rest) = s.strip_prefix("T_") {
            let idx: Vec<usize> = rest
                .chars()
                .map(|c| PAULI_LABELS.iter().position(|&p| p == c))
                .collect::<Option<_>>()
                .ok_or_else(unknown)?;
            return match idx[..] {
                [a, b] => Ok(Observable::Correlation(a, b)),
                _ => Err(unknown()),
            };
        }
        let mut chars = s.chars();
        let kind = chars.next().ok_or_else(unknown)?;
        let (site, comp) = chars.as_str().split_once('_').ok_or_else(unknown)?;
        let site: usize = site.parse().map_err(|_| unknown())?;
        if site == 0 {
            return Err(unknown());
        }
        let comp = Component::parse(comp).ok_or_else(unknown)?;
        match kind {
            'r' => Ok(Observable::Bloch(site - 1, comp)),
            'S' => Ok(Observable::Spin(site - 1, comp)),
            'm' => Ok(Observable::Moment(site - 1, comp)),
            _ => Err(unknown()),
        }
    }
}

/// The 3×3 correlation-block column names `T_xx … T_zz`.
pub fn correlation_block_names() -> Vec<String> {
    (1..4)
        .flat_map(|a| (1..4).map(move |b| Observable::Correlation(a, b).to_string()))
        .collect()
}

/// Evaluates a fixed list of quantum observables on density matrices of one
/// system. Local spin operators are built once.
#[derive(Debug, Clone)]
pub struct QuantumProbe {
    observables: Vec<Observable>,
    system: SpinSystem,
    hamiltonian: CMatrix,
    local_spins: Vec<SpinOperators>,
}

impl QuantumProbe {
    pub fn new(observables: Vec<Observable>, system: SpinSystem, hamiltonian: CMatrix) -> Result<Self> {
        for o in &observables {
            if o.is_classical() {
                return Err(Error::InvalidParameter(format!(
                    "`{o}` is a classical observable"
                )));
            }
            o.check(&system)?;
        }
        let local_spins = system
            .sites()
            .iter()
            .map(|&s| crate::spin::spin_operators(s))
            .collect();
        Ok(QuantumProbe {
            observables,
            system,
            hamiltonian,
            local_spins,
        })
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn evaluate(&self, rho: &CMatrix) -> Result<Vec<f64>> {
        let dims = self.system.dims();
        let mut t_cache: Option<CorrelationMatrix> = None;
        let mut out = Vec::with_capacity(self.observables.len());
        for o in &self.observables {
            let v = match *o {
                Observable::Trace => rho.trace().re,
                Observable::Purity => purity(rho),
                Observable::TraceCubed => trace_power(rho, 3)?,
                Observable::Renyi2 => renyi_entropy(rho, 2.0)?,
                Observable::Renyi3 => renyi_entropy(rho, 3.0)?,
                Observable::Entropy => von_neumann_entropy(rho)?,
                Observable::Energy => energy(rho, &self.hamiltonian),
                Observable::Singlet => singlet_overlap(rho)?,
                Observable::BellB | Observable::Correlation(..) => {
                    let t = match t_cache {
                        Some(t) => t,
                        None => {
                            let t = correlation_matrix(rho)?;
                            t_cache = Some(t);
                            t
                        }
                    };
                    match *o {
                        Observable::Correlation(a, b) => t.get(a, b),
                        _ => bell_nonlocality_of(&t),
                    }
                }
                Observable::Bloch(k, c) => {
                    let red = linalg::partial_trace(rho, &dims, k)?;
                    // σ = 2S for spin-½
                    c.of(&(expectation3(&red, &self.local_spins[k]) * 2.0))
                }
                Observable::Spin(k, c) => {
                    let red = linalg::partial_trace(rho, &dims, k)?;
                    c.of(&expectation3(&red, &self.local_spins[k]))
                }
                Observable::Moment(..) | Observable::ClassicalEnergy => unreachable!(),
            };
            out.push(v);
        }
        Ok(out)
    }
}

/// Evaluate classical observables; quantum ones are rejected.
pub fn evaluate_classical(
    observables: &[Observable],
    moments: &[Vector3<f64>],
    spec: &HamiltonianSpec,
) -> Result<Vec<f64>> {
    observables
        .iter()
        .map(|o| match *o {
            Observable::Moment(k, c) => moments
                .get(k)
                .map(|m| c.of(m))
                .ok_or(Error::InvalidSite {
                    site: k,
                    n_sites: moments.len(),
                }),
            Observable::ClassicalEnergy => classical_energy(moments, spec),
            _ => Err(Error::InvalidParameter(format!("`{o}` is not a classical observable"))),
        })
        .collect()
}
