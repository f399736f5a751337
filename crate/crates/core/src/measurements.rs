//! Projective measurements: qubit measurements along Bloch directions,
//! rank-one qudit measurements from orthonormal bases, and the fixed
//! `{x, y, z}` Pauli settings.
//!
//! Outcome labels are indices `0..d`. For qubits, outcome `0` is the `+1`
//! eigenspace of `n·σ`, so `Π_a = (𝟙 + (-1)^a n·σ)/2`.

use rand::Rng;
use thiserror::Error;

use crate::linalg::{pauli, CMatrix, C64};
use crate::states::{random_pure_vector, DensityMatrix, StateError};

/// Tolerance for the projector invariants.
pub const MEASUREMENT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasurementError {
    #[error("direction has norm {norm}, expected a unit vector")]
    NotUnit { norm: f64 },
    #[error("basis is not orthonormal: max |⟨v_i|v_j⟩ - δ_ij| = {deviation:e}")]
    NotOrthonormal { deviation: f64 },
    #[error("invalid measurement: {0}")]
    Invalid(String),
    #[error("outcome {outcome} out of range for a {outcomes}-outcome measurement")]
    Outcome { outcome: usize, outcomes: usize },
    #[error("measurement acts on dimension {measurement}, state factor has dimension {state}")]
    DimMismatch { measurement: usize, state: usize },
    #[error(transparent)]
    State(#[from] StateError),
}

pub type MeasurementResult<T> = Result<T, MeasurementError>;

/// A complete set of orthogonal projectors on `C^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjMeasurement {
    dim: usize,
    projectors: Vec<CMatrix>,
}

impl ProjMeasurement {
    /// Validate a list of projectors as a projective measurement.
    pub fn new(projectors: Vec<CMatrix>) -> MeasurementResult<Self> {
        let dim = projectors
            .first()
            .ok_or_else(|| MeasurementError::Invalid("no projectors".into()))?
            .rows();
        let mut total = CMatrix::zeros(dim, dim);
        for (a, p) in projectors.iter().enumerate() {
            if p.rows() != dim || p.cols() != dim {
                return Err(MeasurementError::Invalid(format!("projector {a} is not {dim}x{dim}")));
            }
            let herm = p.hermitian_deviation();
            let idem = (p * p).max_abs_diff(p);
            if herm > MEASUREMENT_TOL || idem > MEASUREMENT_TOL {
                return Err(MeasurementError::Invalid(format!(
                    "projector {a}: |Π - Π†| = {herm:e}, |Π² - Π| = {idem:e}"
                )));
            }
            total = &total + p;
        }
        let completeness = total.max_abs_diff(&CMatrix::identity(dim));
        if completeness > MEASUREMENT_TOL {
            return Err(MeasurementError::Invalid(format!("projectors sum to 𝟙 only within {completeness:e}")));
        }
        for a in 0..projectors.len() {
            for b in (a + 1)..projectors.len() {
                let overlap = (&projectors[a] * &projectors[b]).max_abs();
                if overlap > MEASUREMENT_TOL {
                    return Err(MeasurementError::Invalid(format!(
                        "projectors {a} and {b} are not orthogonal ({overlap:e})"
                    )));
                }
            }
        }
        Ok(Self { dim, projectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.projectors.len()
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn projector(&self, outcome: usize) -> MeasurementResult<&CMatrix> {
        self.projectors
            .get(outcome)
            .ok_or(MeasurementError::Outcome { outcome, outcomes: self.projectors.len() })
    }

    /// `tr[Π_a ρ]` for a single-party operator `rho`, unclamped.
    pub fn probability(&self, rho: &CMatrix, outcome: usize) -> MeasurementResult<f64> {
        let p = self.projector(outcome)?;
        if rho.rows() != self.dim {
            return Err(MeasurementError::DimMismatch { measurement: self.dim, state: rho.rows() });
        }
        Ok(p.matmul(rho).map_err(StateError::from)?.trace().re)
    }
}

/// Qubit measurement `{(𝟙 + n·σ)/2, (𝟙 - n·σ)/2}` along the unit vector `n`.
pub fn qubit_measurement(n: [f64; 3]) -> MeasurementResult<ProjMeasurement> {
    let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > MEASUREMENT_TOL {
        return Err(MeasurementError::NotUnit { norm });
    }
    let [sx, sy, sz] = pauli();
    let n_sigma = &(&sx.scale(n[0]) + &sy.scale(n[1])) + &sz.scale(n[2]);
    let id = CMatrix::identity(2);
    ProjMeasurement::new(vec![(&id + &n_sigma).scale(0.5), (&id - &n_sigma).scale(0.5)])
}

/// The `x`, `y`, `z` qubit measurements, in that order.
pub fn pauli_settings() -> [ProjMeasurement; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        .map(|n| qubit_measurement(n).expect("axis directions are unit vectors"))
}

/// Rank-one measurement `{|v_k⟩⟨v_k|}` from an orthonormal basis.
pub fn qudit_measurement(basis: &[Vec<C64>]) -> MeasurementResult<ProjMeasurement> {
    let d = basis.len();
    if d == 0 || basis.iter().any(|v| v.len() != d) {
        return Err(MeasurementError::Invalid(format!("basis must be {d} vectors of length {d}")));
    }
    let mut deviation = 0.0_f64;
    for (i, vi) in basis.iter().enumerate() {
        for (j, vj) in basis.iter().enumerate() {
            let ip: C64 = vi.iter().zip(vj).map(|(a, b)| a.conj() * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            deviation = deviation.max((ip - target).norm());
        }
    }
    if deviation > MEASUREMENT_TOL {
        return Err(MeasurementError::NotOrthonormal { deviation });
    }
    ProjMeasurement::new(basis.iter().map(|v| CMatrix::outer(v, v)).collect())
}

pub fn computational_basis(dim: usize) -> Vec<Vec<C64>> {
    (0..dim)
        .map(|k| (0..dim).map(|i| C64::new(if i == k { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect()
}

/// Orthonormalize `vectors` in order by modified Gram-Schmidt. Returns `None`
/// if they are (numerically) linearly dependent.
pub fn gram_schmidt(vectors: &[Vec<C64>]) -> Option<Vec<Vec<C64>>> {
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for u in &out {
            let ip: C64 = u.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= ip * ui;
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-10 {
            return None;
        }
        out.push(w.into_iter().map(|z| z / norm).collect());
    }
    Some(out)
}

/// Random orthonormal basis of `C^dim` (Gram-Schmidt on Gaussian vectors).
pub fn random_basis<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Vec<C64>> {
    loop {
        let raw: Vec<Vec<C64>> = (0..dim).map(|_| random_pure_vector(dim, rng)).collect();
        if let Some(basis) = gram_schmidt(&raw) {
            return basis;
        }
    }
}

pub fn random_qudit_measurement<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ProjMeasurement {
    qudit_measurement(&random_basis(dim, rng)).expect("Gram-Schmidt output is orthonormal")
}

/// Uniformly random unit vector in R³.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.map(|x| x / norm);
        }
    }
}

pub fn random_qubit_measurement<R: Rng + ?Sized>(rng: &mut R) -> ProjMeasurement {
    qubit_measurement(random_direction(rng)).expect("normalized direction")
}

/// Born probabilities of every outcome of `m_a ⊗ m_b` on `rho`, unclamped.
pub fn joint_distribution(
    rho: &DensityMatrix,
    m_a: &ProjMeasurement,
    m_b: &ProjMeasurement,
) -> MeasurementResult<Vec<Vec<f64>>> {
    if m_a.dim != rho.dim_a() {
        return Err(MeasurementError::DimMismatch { measurement: m_a.dim, state: rho.dim_a() });
    }
    if m_b.dim != rho.dim_b() {
        return Err(MeasurementError::DimMismatch { measurement: m_b.dim, state: rho.dim_b() });
    }
    m_a.projectors
        .iter()
        .map(|pa| {
            m_b.projectors
                .iter()
                .map(|pb| Ok(rho.expectation(pa, pb)?.re))
                .collect::<MeasurementResult<Vec<f64>>>()
        })
        .collect()
}
