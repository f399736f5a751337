//! Sufficient-condition detectors for entanglement, steering and Bell
//! nonlocality.
//!
//! None of these decide membership: a value at or below threshold never
//! certifies that a state is separable, unsteerable or local.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, pauli, CMatrix, LinalgError, Subsystem};
use crate::states::DensityMatrix;

/// CHSH values above this certify Bell nonlocality.
pub const CHSH_THRESHOLD: f64 = 2.0;

/// F3 values above `√3` certify steering from Alice to Bob.
pub const F3_THRESHOLD: f64 = 1.732_050_807_568_877_2;

/// Positive negativity certifies entanglement.
pub const NEGATIVITY_THRESHOLD: f64 = 0.0;

/// Werner states `W(v)` are steerable with all projective measurements
/// exactly when `v` exceeds this.
pub const WERNER_STEERING_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WitnessError {
    #[error("witness needs dims {expected}, got {got:?}")]
    Dims { expected: &'static str, got: (usize, usize) },
    #[error("visibility {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type WitnessResult<T> = Result<T, WitnessError>;

/// Negativity with the partial transpose on B: the total weight of negative
/// eigenvalues of `ρ^{T_B}`, i.e. `(‖ρ^{T_B}‖₁ - tr ρ)/2`.
pub fn negativity(rho: &DensityMatrix) -> WitnessResult<f64> {
    let (da, db) = rho.dims();
    let pt = linalg::partial_transpose(rho.matrix(), da, db, Subsystem::B)?;
    let eig = linalg::hermitian_eigen(&pt)?;
    Ok(eig.values.iter().filter(|&&x| x < 0.0).map(|x| -x).sum())
}

/// Correlation matrix `T_jk = tr[(σ_j ⊗ σ_k) ρ]` of a two-qubit state.
pub fn correlation_matrix(rho: &DensityMatrix) -> WitnessResult<[[f64; 3]; 3]> {
    if rho.dims() != (2, 2) {
        return Err(WitnessError::Dims { expected: "2x2", got: rho.dims() });
    }
    let s = pauli();
    let mut t = [[0.0; 3]; 3];
    for (j, sj) in s.iter().enumerate() {
        for (k, sk) in s.iter().enumerate() {
            t[j][k] = linalg::kron(sj, sk).matmul(rho.matrix())?.trace().re;
        }
    }
    Ok(t)
}

/// Maximal CHSH value `2√(m₁ + m₂)`, with `m₁ ≥ m₂` the two largest
/// eigenvalues of `TᵀT`.
pub fn chsh_horodecki(rho: &DensityMatrix) -> WitnessResult<f64> {
    let t = correlation_matrix(rho)?;
    let mut tt = vec![vec![0.0; 3]; 3];
    for (i, row) in tt.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = (0..3).map(|k| t[k][i] * t[k][j]).sum();
        }
    }
    let tt = CMatrix::from_real_rows(&tt)?;
    let m = linalg::hermitian_eigen(&tt)?.values;
    Ok(2.0 * (m[2] + m[1]).max(0.0).sqrt())
}

/// Linear steering functional `Σ_k ‖tr_B[(𝟙 ⊗ σ_k) ρ]‖₁` for a qubit Bob.
pub fn f3_steering(rho: &DensityMatrix) -> WitnessResult<f64> {
    let (da, db) = rho.dims();
    if db != 2 {
        return Err(WitnessError::Dims { expected: "d x 2", got: rho.dims() });
    }
    let id = CMatrix::identity(da);
    let mut total = 0.0;
    for s in pauli() {
        let weighted = linalg::kron(&id, &s).matmul(rho.matrix())?;
        let c = linalg::partial_trace(&weighted, da, db, Subsystem::A)?;
        total += linalg::trace_norm(&c)?;
    }
    Ok(total)
}

/// Whether `W(v)` is steerable under all projective measurements (`v > 1/2`).
/// This threshold is external knowledge about the Werner family, not computed
/// here.
pub fn werner_steerable_oracle(v: f64) -> WitnessResult<bool> {
    if !(0.0..=1.0).contains(&v) {
        return Err(WitnessError::OutOfRange(v));
    }
    Ok(v > WERNER_STEERING_THRESHOLD)
}

/// All applicable witnesses for a state. `chsh` is present only for 2x2, `f3`
/// only when Bob is a qubit.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub negativity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chsh: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f3: Option<f64>,
}

impl WitnessReport {
    pub fn analyze(rho: &DensityMatrix) -> WitnessResult<Self> {
        let chsh = if rho.dims() == (2, 2) { Some(chsh_horodecki(rho)?) } else { None };
        let f3 = if rho.dim_b() == 2 { Some(f3_steering(rho)?) } else { None };
        Ok(Self { negativity: negativity(rho)?, chsh, f3 })
    }

    pub fn entangled(&self) -> bool {
        self.negativity > NEGATIVITY_THRESHOLD
    }

    pub fn bell_nonlocal(&self) -> bool {
        self.chsh.is_some_and(|v| v > CHSH_THRESHOLD)
    }

    pub fn steerable(&self) -> bool {
        self.f3.is_some_and(|v| v > F3_THRESHOLD)
    }
}
