//! Two-qubit states in the basis order `|00⟩, |01⟩, |10⟩, |11⟩` (qubit A
//! first).

mod file;

pub use file::StateSpec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_unit_interval, ChshError, Result};
use crate::linalg::{cmat4_mul, cmat4_trace, cmat4_zero, hermitian_eigenvalues4, kron2, CMat4, Vec3};

/// Tolerance for normalization, Hermiticity, trace and positivity checks.
pub const STATE_TOL: f64 = 1e-10;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);
const CI: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) const PAULI_ID: [[Complex64; 2]; 2] = [[C1, C0], [C0, C1]];
pub(crate) const PAULI: [[[Complex64; 2]; 2]; 3] = [
    [[C0, C1], [C1, C0]],
    [[C0, Complex64::new(0.0, -1.0)], [CI, C0]],
    [[C1, C0], [C0, Complex64::new(-1.0, 0.0)]],
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    amplitudes: [Complex64; 4],
}

impl PureState {
    pub fn new(amplitudes: [Complex64; 4]) -> Result<Self> {
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(ChshError::InvalidState("non-finite amplitude".into()));
        }
        let n: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (n - 1.0).abs() > STATE_TOL {
            return Err(ChshError::InvalidState(format!(
                "squared amplitudes sum to {n}, expected 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Real amplitudes, convenient for tests and examples.
    pub fn from_real(amplitudes: [f64; 4]) -> Result<Self> {
        Self::new(amplitudes.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn amplitudes(&self) -> &[Complex64; 4] {
        &self.amplitudes
    }
}

/// Pure state in its Schmidt form, fixed entirely by the concurrence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchmidtState {
    concurrence: f64,
}

impl SchmidtState {
    pub fn new(concurrence: f64) -> Result<Self> {
        check_unit_interval("concurrence", concurrence)?;
        Ok(Self { concurrence })
    }

    pub fn concurrence(&self) -> f64 {
        self.concurrence
    }
}

/// A validated 4×4 density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    matrix: CMat4,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity, all to [`STATE_TOL`].
    pub fn new(matrix: CMat4) -> Result<Self> {
        for i in 0..4 {
            for j in 0..4 {
                let z = matrix[i][j];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(ChshError::InvalidState("non-finite matrix entry".into()));
                }
                if (z - matrix[j][i].conj()).norm() > STATE_TOL {
                    return Err(ChshError::InvalidState(format!(
                        "matrix is not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        let tr = cmat4_trace(&matrix);
        if (tr - C1).norm() > STATE_TOL {
            return Err(ChshError::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min_eig = hermitian_eigenvalues4(&matrix)[0];
        if min_eig < -STATE_TOL {
            return Err(ChshError::InvalidState(format!(
                "matrix has negative eigenvalue {min_eig}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CMat4 {
        &self.matrix
    }

    /// `tr(ρ O)` for a 4×4 observable `O`.
    pub fn expectation(&self, observable: &CMat4) -> Complex64 {
        let mut acc = C0;
        for i in 0..4 {
            for j in 0..4 {
                acc += self.matrix[i][j] * observable[j][i];
            }
        }
        acc
    }

    pub fn purity(&self) -> f64 {
        cmat4_trace(&cmat4_mul(&self.matrix, &self.matrix)).re
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        hermitian_eigenvalues4(&self.matrix)
    }
}

/// Local Bloch vectors `r_A`, `r_B` of the two reduced states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVectorPair {
    pub r_a: Vec3,
    pub r_b: Vec3,
}

/// Any of the supported ways to specify a two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TwoQubitState {
    Pure(PureState),
    Schmidt(SchmidtState),
    Mixed(DensityMatrix),
    Werner { p: f64 },
    Mixture { p: f64, concurrence_psi: f64, concurrence_phi: f64 },
}

impl TwoQubitState {
    pub fn density(&self) -> Result<DensityMatrix> {
        match *self {
            TwoQubitState::Pure(p) => Ok(pure_to_density(&p)),
            TwoQubitState::Schmidt(s) => Ok(pure_to_density(&schmidt_to_pure(s))),
            TwoQubitState::Mixed(rho) => Ok(rho),
            TwoQubitState::Werner { p } => make_werner(p),
            TwoQubitState::Mixture { p, concurrence_psi, concurrence_phi } => {
                make_two_state_mixture(p, concurrence_psi, concurrence_phi)
            }
        }
    }
}

/// Schmidt amplitudes `√((1 ± √(1−C²))/2)`, larger first.
fn schmidt_coefficients(c: f64) -> (f64, f64) {
    let root = (1.0 - c * c).max(0.0).sqrt();
    (((1.0 + root) / 2.0).sqrt(), ((1.0 - root) / 2.0).sqrt())
}

/// `α|01⟩ − β|10⟩` with `α ≥ β` set by the concurrence.
pub fn schmidt_to_pure(s: SchmidtState) -> PureState {
    let (alpha, beta) = schmidt_coefficients(s.concurrence);
    PureState {
        amplitudes: [C0, Complex64::new(alpha, 0.0), Complex64::new(-beta, 0.0), C0],
    }
}

/// Pure-state concurrence `2|a₀₀a₁₁ − a₀₁a₁₀|`.
pub fn concurrence(p: &PureState) -> f64 {
    let a = &p.amplitudes;
    (2.0 * (a[0] * a[3] - a[1] * a[2]).norm()).min(1.0)
}

pub fn pure_to_density(p: &PureState) -> DensityMatrix {
    let a = &p.amplitudes;
    let mut m = cmat4_zero();
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = a[i] * a[j].conj();
        }
    }
    DensityMatrix { matrix: m }
}

/// Random state `GG†/tr(GG†)` with `G` a 4×`rank` complex Gaussian matrix.
///
/// `rank = 4` samples the Hilbert–Schmidt ensemble; `rank = 1` gives
/// Haar-random pure states.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, rank: usize) -> Result<DensityMatrix> {
    if !(1..=4).contains(&rank) {
        return Err(crate::error::domain(format!("rank must be in 1..=4, got {rank}")));
    }
    let mut g = [[C0; 4]; 4];
    for row in g.iter_mut() {
        for z in row.iter_mut().take(rank) {
            *z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
    }
    let mut m = cmat4_zero();
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = (0..rank).map(|k| g[i][k] * g[j][k].conj()).sum();
        }
    }
    let tr = cmat4_trace(&m).re;
    for (i, row) in m.iter_mut().enumerate() {
        for (j, z) in row.iter_mut().enumerate() {
            *z /= tr;
            if i == j {
                z.im = 0.0;
            }
        }
    }
    DensityMatrix::new(m)
}

fn singlet_projector() -> CMat4 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    pure_to_density(&PureState::from_real([0.0, h, -h, 0.0]).expect("singlet is normalized")).matrix
}

/// `p|Ψ⁻⟩⟨Ψ⁻| + (1−p)/4 · 1`.
pub fn make_werner(p: f64) -> Result<DensityMatrix> {
    check_unit_interval("p", p)?;
    let mut m = singlet_projector();
    for (i, row) in m.iter_mut().enumerate() {
        for (j, z) in row.iter_mut().enumerate() {
            *z *= p;
            if i == j {
                *z += (1.0 - p) / 4.0;
            }
        }
    }
    DensityMatrix::new(m)
}

/// `p|Ψ⟩⟨Ψ| + (1−p)|Φ⟩⟨Φ|` with `|Ψ⟩` the Schmidt state of concurrence
/// `c_psi` and `|Φ⟩ = α|00⟩ + β|11⟩` of concurrence `c_phi`.
pub fn make_two_state_mixture(p: f64, c_psi: f64, c_phi: f64) -> Result<DensityMatrix> {
    check_unit_interval("p", p)?;
    check_unit_interval("concurrence_psi", c_psi)?;
    check_unit_interval("concurrence_phi", c_phi)?;
    let psi = pure_to_density(&schmidt_to_pure(SchmidtState { concurrence: c_psi })).matrix;
    let (alpha, beta) = schmidt_coefficients(c_phi);
    let phi = pure_to_density(&PureState {
        amplitudes: [Complex64::new(alpha, 0.0), C0, C0, Complex64::new(beta, 0.0)],
    })
    .matrix;
    let mut m = cmat4_zero();
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = psi[i][j] * p + phi[i][j] * (1.0 - p);
        }
    }
    DensityMatrix::new(m)
}

pub fn local_bloch_vectors(rho: &DensityMatrix) -> BlochVectorPair {
    let mut r_a = [0.0; 3];
    let mut r_b = [0.0; 3];
    for i in 0..3 {
        r_a[i] = rho.expectation(&kron2(&PAULI[i], &PAULI_ID)).re;
        r_b[i] = rho.expectation(&kron2(&PAULI_ID, &PAULI[i])).re;
    }
    BlochVectorPair { r_a, r_b }
}

/// Transpose over qubit B.
pub fn partial_transpose_b(rho: &DensityMatrix) -> CMat4 {
    let m = &rho.matrix;
    let mut pt = cmat4_zero();
    for ia in 0..2 {
        for ib in 0..2 {
            for ja in 0..2 {
                for jb in 0..2 {
                    pt[2 * ia + ib][2 * ja + jb] = m[2 * ia + jb][2 * ja + ib];
                }
            }
        }
    }
    pt
}

/// Peres–Horodecki test: entangled iff the partial transpose has an
/// eigenvalue below `−STATE_TOL`.
pub fn ppt_entangled(rho: &DensityMatrix) -> bool {
    hermitian_eigenvalues4(&partial_transpose_b(rho))[0] < -STATE_TOL
}
