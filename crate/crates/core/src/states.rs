//! Bipartite density matrices, the Werner family, steered (conditional)
//! states, and the Bloch parameterization of qubit operators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, pauli, CMatrix, LinalgError, Subsystem, C64};

/// Hermiticity, trace and positivity tolerance for [`DensityMatrix`].
pub const STATE_TOL: f64 = 1e-10;

/// Slack on `|r|² ≤ 1` when deciding whether a Bloch vector is physical.
pub const BLOCH_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("subsystem dimensions must be at least 2, got {dim_a}x{dim_b}")]
    BadDims { dim_a: usize, dim_b: usize },
    #[error("expected a {expected}x{expected} matrix, got {rows}x{cols}")]
    Shape { expected: usize, rows: usize, cols: usize },
    #[error("state is not Hermitian: max |m - m†| = {deviation:e}")]
    NotHermitian { deviation: f64 },
    #[error("trace is not 1: |tr - 1| = {deviation:e}")]
    Trace { deviation: f64 },
    #[error("state is not positive semidefinite: min eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },
    #[error("parameter {name} = {value} outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("not a projector: {0}")]
    BadProjector(String),
    #[error("invalid state file: {0}")]
    Format(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type StateResult<T> = Result<T, StateError>;

/// A validated bipartite state on `C^{dim_a} ⊗ C^{dim_b}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim_a: usize,
    dim_b: usize,
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validate `mat` as a state; see [`make_density`].
    pub fn new(mat: CMatrix, dim_a: usize, dim_b: usize) -> StateResult<Self> {
        if dim_a < 2 || dim_b < 2 {
            return Err(StateError::BadDims { dim_a, dim_b });
        }
        let n = dim_a * dim_b;
        check_qudit_state(&mat, n)?;
        Ok(Self { dim_a, dim_b, mat })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// `tr_B ρ`.
    pub fn reduced_a(&self) -> CMatrix {
        linalg::partial_trace(&self.mat, self.dim_a, self.dim_b, Subsystem::A)
            .expect("dims validated at construction")
    }

    /// `tr_A ρ`.
    pub fn reduced_b(&self) -> CMatrix {
        linalg::partial_trace(&self.mat, self.dim_a, self.dim_b, Subsystem::B)
            .expect("dims validated at construction")
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    /// `tr[(X ⊗ Y) ρ]`.
    pub fn expectation(&self, x: &CMatrix, y: &CMatrix) -> StateResult<C64> {
        let op = linalg::kron(x, y);
        Ok(op.matmul(&self.mat)?.trace())
    }
}

/// Check that `mat` is an `n`-dimensional density operator.
pub(crate) fn check_qudit_state(mat: &CMatrix, n: usize) -> StateResult<()> {
    if mat.rows() != n || mat.cols() != n {
        return Err(StateError::Shape { expected: n, rows: mat.rows(), cols: mat.cols() });
    }
    let deviation = mat.hermitian_deviation();
    if deviation > STATE_TOL {
        return Err(StateError::NotHermitian { deviation });
    }
    let deviation = (mat.trace() - C64::new(1.0, 0.0)).norm();
    if deviation > STATE_TOL {
        return Err(StateError::Trace { deviation });
    }
    let min_eigenvalue = linalg::hermitian_eigen(mat)?.values[0];
    if min_eigenvalue < -STATE_TOL {
        return Err(StateError::NotPositive { min_eigenvalue });
    }
    Ok(())
}

/// Validate a raw matrix as a bipartite state.
///
/// Errors name the violated invariant together with the measured deviation.
pub fn make_density(mat: CMatrix, dim_a: usize, dim_b: usize) -> StateResult<DensityMatrix> {
    DensityMatrix::new(mat, dim_a, dim_b)
}

/// `|ψ⁻⟩⟨ψ⁻|` with `|ψ⁻⟩ = (|01⟩ - |10⟩)/√2`.
pub fn singlet_projector() -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = [C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0), C64::new(0.0, 0.0)];
    CMatrix::outer(&v, &v)
}

/// `|φ⁺⟩⟨φ⁺|` with `|φ⁺⟩ = (|00⟩ + |11⟩)/√2`.
pub fn bell_phi_plus() -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = [C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0)];
    DensityMatrix::new(CMatrix::outer(&v, &v), 2, 2).expect("Bell projector is a state")
}

/// `1/(dA dB)` times the identity.
pub fn maximally_mixed(dim_a: usize, dim_b: usize) -> StateResult<DensityMatrix> {
    let n = dim_a * dim_b;
    DensityMatrix::new(CMatrix::identity(n).scale(1.0 / n as f64), dim_a, dim_b)
}

/// Product state `alpha ⊗ beta` of two single-party density matrices.
pub fn product_state(alpha: &CMatrix, beta: &CMatrix) -> StateResult<DensityMatrix> {
    DensityMatrix::new(linalg::kron(alpha, beta), alpha.rows(), beta.rows())
}

/// Werner state `p |ψ⁻⟩⟨ψ⁻| + (1 - p) 𝟙/4`.
pub fn werner(p: f64) -> StateResult<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(StateError::OutOfRange { name: "p", value: p });
    }
    let mixed = CMatrix::identity(4).scale((1.0 - p) / 4.0);
    let mat = &singlet_projector().scale(p) + &mixed;
    DensityMatrix::new(mat, 2, 2)
}

/// Real 3-vector attached to a qubit operator via `r · σ`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub rx: f64,
    pub ry: f64,
    pub rz: f64,
}

impl BlochVector {
    pub const ZERO: Self = Self { rx: 0.0, ry: 0.0, rz: 0.0 };

    pub fn new(rx: f64, ry: f64, rz: f64) -> Self {
        Self { rx, ry, rz }
    }

    pub fn components(&self) -> [f64; 3] {
        [self.rx, self.ry, self.rz]
    }

    pub fn norm_sq(&self) -> f64 {
        self.rx * self.rx + self.ry * self.ry + self.rz * self.rz
    }

    /// Whether `(𝟙 + r·σ)/2` is a density matrix, i.e. `|r|² ≤ 1` up to
    /// [`BLOCH_TOL`].
    pub fn is_physical(&self) -> bool {
        self.norm_sq() <= 1.0 + BLOCH_TOL
    }

    /// `r · σ`.
    pub fn sigma_dot(&self) -> CMatrix {
        let [sx, sy, sz] = pauli();
        &(&sx.scale(self.rx) + &sy.scale(self.ry)) + &sz.scale(self.rz)
    }

    /// `(𝟙 + r·σ)/2`.
    pub fn to_qubit_state(&self) -> CMatrix {
        (&CMatrix::identity(2) + &self.sigma_dot()).scale(0.5)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.rx - other.rx).abs().max((self.ry - other.ry).abs()).max((self.rz - other.rz).abs())
    }
}

/// Decompose a Hermitian 2x2 matrix as `m = t 𝟙 + r·σ`.
///
/// For `m = [[ν11, ν12], [ν21, ν22]]` this gives `t = (ν11 + ν22)/2`,
/// `r = (Re ν12, -Im ν12, (ν11 - ν22)/2)`.
pub fn bloch_from_qubit(m: &CMatrix) -> StateResult<(f64, BlochVector)> {
    if m.rows() != 2 || m.cols() != 2 {
        return Err(StateError::Shape { expected: 2, rows: m.rows(), cols: m.cols() });
    }
    let deviation = m.hermitian_deviation();
    if deviation > STATE_TOL {
        return Err(StateError::NotHermitian { deviation });
    }
    let n11 = m[(0, 0)].re;
    let n22 = m[(1, 1)].re;
    let n12 = m[(0, 1)];
    Ok(((n11 + n22) / 2.0, BlochVector::new(n12.re, -n12.im, (n11 - n22) / 2.0)))
}

/// Check that `pi` is a `dim`-dimensional orthogonal projector.
pub(crate) fn check_projector(pi: &CMatrix, dim: usize) -> StateResult<()> {
    if pi.rows() != dim || pi.cols() != dim {
        return Err(StateError::Shape { expected: dim, rows: pi.rows(), cols: pi.cols() });
    }
    let herm = pi.hermitian_deviation();
    if herm > STATE_TOL {
        return Err(StateError::BadProjector(format!("max |Π - Π†| = {herm:e}")));
    }
    let idem = (pi * pi).max_abs_diff(pi);
    if idem > STATE_TOL {
        return Err(StateError::BadProjector(format!("max |Π² - Π| = {idem:e}")));
    }
    Ok(())
}

/// Bob's unnormalized steered state `tr_A[(Π_A ⊗ 𝟙) ρ]`.
///
/// Its trace is the probability of the outcome `Π_A` on Alice's side.
pub fn conditional_state(rho: &DensityMatrix, pi_a: &CMatrix) -> StateResult<CMatrix> {
    check_projector(pi_a, rho.dim_a)?;
    let lifted = linalg::kron(pi_a, &CMatrix::identity(rho.dim_b));
    let m = lifted.matmul(&rho.mat)?;
    Ok(linalg::partial_trace(&m, rho.dim_a, rho.dim_b, Subsystem::B)?)
}

/// One term `weight · alpha ⊗ beta` of a separable decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductTerm {
    pub weight: f64,
    pub alpha: CMatrix,
    pub beta: CMatrix,
}

/// A separable decomposition `Σ_i w_i α_i ⊗ β_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableEnsemble {
    pub dim_a: usize,
    pub dim_b: usize,
    pub terms: Vec<ProductTerm>,
}

impl SeparableEnsemble {
    pub fn assemble(&self) -> StateResult<DensityMatrix> {
        let n = self.dim_a * self.dim_b;
        let mut mat = CMatrix::zeros(n, n);
        for t in &self.terms {
            mat = &mat + &linalg::kron(&t.alpha, &t.beta).scale(t.weight);
        }
        DensityMatrix::new(mat, self.dim_a, self.dim_b)
    }
}

/// Haar-random unit vector in `C^dim` from normalized complex Gaussians.
pub fn random_pure_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim)
            .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let v = random_pure_vector(dim, rng);
    CMatrix::outer(&v, &v)
}

/// Uniform point of the probability simplex with `k` vertices.
pub fn random_simplex<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Random `k`-term separable state from an explicit generator.
pub fn random_separable_with<R: Rng + ?Sized>(
    dim_a: usize,
    dim_b: usize,
    k: usize,
    rng: &mut R,
) -> StateResult<(DensityMatrix, SeparableEnsemble)> {
    if dim_a < 2 || dim_b < 2 {
        return Err(StateError::BadDims { dim_a, dim_b });
    }
    if k == 0 {
        return Err(StateError::Format("separable ensemble needs at least one member".into()));
    }
    let weights = random_simplex(k, rng);
    let terms = weights
        .into_iter()
        .map(|weight| ProductTerm {
            weight,
            alpha: random_pure_state(dim_a, rng),
            beta: random_pure_state(dim_b, rng),
        })
        .collect();
    let ensemble = SeparableEnsemble { dim_a, dim_b, terms };
    Ok((ensemble.assemble()?, ensemble))
}

/// Random `k`-term separable state, deterministic in `seed`.
pub fn random_separable(
    dim_a: usize,
    dim_b: usize,
    k: usize,
    seed: u64,
) -> StateResult<(DensityMatrix, SeparableEnsemble)> {
    random_separable_with(dim_a, dim_b, k, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// On-disk state layout: `{"dims": [dA, dB], "re": [[..]], "im": [[..]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: [usize; 2],
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&DensityMatrix> for StateFile {
    fn from(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let n = m.rows();
        StateFile {
            dims: [rho.dim_a, rho.dim_b],
            re: (0..n).map(|i| m.row(i).iter().map(|z| z.re).collect()).collect(),
            im: (0..n).map(|i| m.row(i).iter().map(|z| z.im).collect()).collect(),
        }
    }
}

impl TryFrom<StateFile> for DensityMatrix {
    type Error = StateError;

    fn try_from(f: StateFile) -> StateResult<Self> {
        let [dim_a, dim_b] = f.dims;
        let n = dim_a * dim_b;
        for (name, part) in [("re", &f.re), ("im", &f.im)] {
            if part.len() != n {
                return Err(StateError::Format(format!(
                    "field \"{name}\": {} rows, expected {n} for dims [{dim_a}, {dim_b}]",
                    part.len()
                )));
            }
            if let Some((i, row)) = part.iter().enumerate().find(|(_, r)| r.len() != n) {
                return Err(StateError::Format(format!(
                    "field \"{name}\": row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        let data = f
            .re
            .iter()
            .zip(&f.im)
            .flat_map(|(r, i)| r.iter().zip(i).map(|(&a, &b)| C64::new(a, b)))
            .collect();
        DensityMatrix::new(CMatrix::from_vec(n, n, data)?, dim_a, dim_b)
    }
}

/// Parse and validate a state from JSON text.
pub fn state_from_json(text: &str) -> StateResult<DensityMatrix> {
    let file: StateFile = serde_json::from_str(text)
        .map_err(|e| StateError::Format(format!("line {} column {}: {e}", e.line(), e.column())))?;
    DensityMatrix::try_from(file)
}

pub fn state_to_json(rho: &DensityMatrix) -> String {
    serde_json::to_string_pretty(&StateFile::from(rho)).expect("state file serializes")
}
