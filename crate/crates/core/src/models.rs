//! Finite hidden-variable models and their joint-probability evaluators.
//!
//! A [`FiniteModel`] is a list of hidden values ξ with weights `P_ξ` and, per ξ
//! and party, a [`Response`]: either a hidden quantum state (probabilities
//! from the Born rule) or an explicit table over a declared set of settings.
//! Which parties respond quantumly determines the model kind:
//!
//! | Alice   | Bob     | kind |
//! |---------|---------|------|
//! | quantum | quantum | separable (SPM) |
//! | table   | quantum | local hidden state (LHS) |
//! | any     | table   | local hidden variable (LHV) |
//!
//! Integrals over ξ are finite sums throughout.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::CMatrix;
use crate::measurements::{pauli_settings, MeasurementError, ProjMeasurement};
use crate::states::{check_qudit_state, DensityMatrix, SeparableEnsemble, StateError};

/// Tolerance on weights and response probabilities.
pub const PROBABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("model has no hidden values")]
    Empty,
    #[error("invalid weights: {0}")]
    Weights(String),
    #[error("{party} responses: expected {expected}, got {got}")]
    Length { party: &'static str, expected: usize, got: usize },
    #[error("probability {value} outside [0, 1] ({context})")]
    Probability { value: f64, context: String },
    #[error("setting \"{0}\" is not declared in a response table")]
    UnknownSetting(String),
    #[error("outcome {outcome} out of range for setting \"{setting}\" with {outcomes} outcomes")]
    Outcome { setting: String, outcome: usize, outcomes: usize },
    #[error("hidden state for ξ = {xi}: {source}")]
    HiddenState { xi: usize, source: StateError },
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
}

pub type ModelResult<T> = Result<T, ModelError>;

/// A named projective measurement. Table responses are keyed by the label;
/// quantum responses use the projectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Setting {
    pub label: String,
    pub measurement: ProjMeasurement,
}

impl Setting {
    pub fn new(label: impl Into<String>, measurement: ProjMeasurement) -> Self {
        Self { label: label.into(), measurement }
    }

    pub fn outcomes(&self) -> usize {
        self.measurement.outcomes()
    }
}

/// Bob's fixed settings, labeled `"x"`, `"y"`, `"z"`.
pub fn pauli_setting_triple() -> [Setting; 3] {
    let [x, y, z] = pauli_settings();
    [Setting::new("x", x), Setting::new("y", y), Setting::new("z", z)]
}

/// Outcome distributions keyed by setting label.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ResponseTable {
    entries: BTreeMap<String, Vec<f64>>,
}

impl ResponseTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declare the outcome distribution for `label`.
    pub fn with(mut self, label: impl Into<String>, probs: Vec<f64>) -> Self {
        self.entries.insert(label.into(), probs);
        self
    }

    /// Binary table over the labels `x`, `y`, `z` from `P(0|k)`.
    pub fn xyz(p0: [f64; 3]) -> Self {
        Self::new()
            .with("x", vec![p0[0], 1.0 - p0[0]])
            .with("y", vec![p0[1], 1.0 - p0[1]])
            .with("z", vec![p0[2], 1.0 - p0[2]])
    }

    pub fn get(&self, label: &str) -> Option<&[f64]> {
        self.entries.get(label).map(Vec::as_slice)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    fn validate(&self) -> ModelResult<()> {
        for (label, probs) in &self.entries {
            for &p in probs {
                if !(-PROBABILITY_TOL..=1.0 + PROBABILITY_TOL).contains(&p) {
                    return Err(ModelError::Probability { value: p, context: format!("table entry \"{label}\"") });
                }
            }
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > PROBABILITY_TOL {
                return Err(ModelError::Probability {
                    value: total,
                    context: format!("outcomes of \"{label}\" must sum to 1"),
                });
            }
        }
        Ok(())
    }
}

/// One party's response for a single hidden value.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Response {
    /// Hidden state `ρ_ξ`; `P(a|A,ξ) = tr[Π_a ρ_ξ]`.
    Quantum(CMatrix),
    /// Explicit distributions over declared settings.
    Table(ResponseTable),
}

impl Response {
    pub fn is_quantum(&self) -> bool {
        matches!(self, Response::Quantum(_))
    }

    pub fn hidden_state(&self) -> Option<&CMatrix> {
        match self {
            Response::Quantum(rho) => Some(rho),
            Response::Table(_) => None,
        }
    }

    /// `P(outcome | setting, ξ)`, clamped to `[0, 1]` after a tolerance check.
    pub fn probability(&self, setting: &Setting, outcome: usize) -> ModelResult<f64> {
        match self {
            Response::Quantum(rho) => {
                let p = setting.measurement.probability(rho, outcome)?;
                clamp_probability(p, || format!("Born probability for setting \"{}\"", setting.label))
            }
            Response::Table(table) => {
                let probs =
                    table.get(&setting.label).ok_or_else(|| ModelError::UnknownSetting(setting.label.clone()))?;
                probs.get(outcome).copied().ok_or_else(|| ModelError::Outcome {
                    setting: setting.label.clone(),
                    outcome,
                    outcomes: probs.len(),
                })
            }
        }
    }
}

fn clamp_probability(p: f64, context: impl FnOnce() -> String) -> ModelResult<f64> {
    if !(-PROBABILITY_TOL..=1.0 + PROBABILITY_TOL).contains(&p) {
        return Err(ModelError::Probability { value: p, context: context() });
    }
    Ok(p.clamp(0.0, 1.0))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ModelKind {
    /// Both parties respond with hidden quantum states.
    Separable,
    /// Bob responds with hidden quantum states.
    LocalHiddenState,
    /// Unconstrained local responses.
    LocalHiddenVariable,
}

/// A finite ensemble `{P_ξ, alice_ξ, bob_ξ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteModel {
    weights: Vec<f64>,
    alice: Vec<Response>,
    bob: Vec<Response>,
}

impl FiniteModel {
    pub fn new(weights: Vec<f64>, alice: Vec<Response>, bob: Vec<Response>) -> ModelResult<Self> {
        if weights.is_empty() {
            return Err(ModelError::Empty);
        }
        if let Some((xi, w)) = weights.iter().enumerate().find(|(_, &w)| w < 0.0 || !w.is_finite()) {
            return Err(ModelError::Weights(format!("weight {xi} is {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(ModelError::Weights(format!("weights sum to {total}")));
        }
        for (party, responses) in [("alice", &alice), ("bob", &bob)] {
            if responses.len() != weights.len() {
                return Err(ModelError::Length { party, expected: weights.len(), got: responses.len() });
            }
            for (xi, r) in responses.iter().enumerate() {
                match r {
                    Response::Quantum(rho) => check_qudit_state(rho, rho.rows())
                        .map_err(|source| ModelError::HiddenState { xi, source })?,
                    Response::Table(t) => t.validate()?,
                }
            }
        }
        Ok(Self { weights, alice, bob })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn alice(&self) -> &[Response] {
        &self.alice
    }

    pub fn bob(&self) -> &[Response] {
        &self.bob
    }

    pub fn kind(&self) -> ModelKind {
        let alice_q = self.alice.iter().all(Response::is_quantum);
        let bob_q = self.bob.iter().all(Response::is_quantum);
        match (alice_q, bob_q) {
            (true, true) => ModelKind::Separable,
            (false, true) => ModelKind::LocalHiddenState,
            _ => ModelKind::LocalHiddenVariable,
        }
    }

    /// `P(a|A,ξ)`.
    pub fn alice_probability(&self, xi: usize, setting: &Setting, a: usize) -> ModelResult<f64> {
        self.alice[xi].probability(setting, a)
    }

    /// `P(b|B,ξ)`.
    pub fn bob_probability(&self, xi: usize, setting: &Setting, b: usize) -> ModelResult<f64> {
        self.bob[xi].probability(setting, b)
    }

    /// `Σ_ξ P_ξ ρ^B_ξ`, when every Bob response is quantum.
    pub fn bob_average_state(&self) -> Option<CMatrix> {
        average_state(&self.weights, &self.bob)
    }

    /// `Σ_ξ P_ξ ρ^A_ξ`, when every Alice response is quantum.
    pub fn alice_average_state(&self) -> Option<CMatrix> {
        average_state(&self.weights, &self.alice)
    }
}

fn average_state(weights: &[f64], responses: &[Response]) -> Option<CMatrix> {
    let first = responses.first()?.hidden_state()?;
    let mut total = CMatrix::zeros(first.rows(), first.cols());
    for (w, r) in weights.iter().zip(responses) {
        total = &total + &r.hidden_state()?.scale(*w);
    }
    Some(total)
}

/// `tr[(Π_a ⊗ Π_b) ρ]`, clamped to `[0, 1]` after a tolerance check.
pub fn born_joint(
    rho: &DensityMatrix,
    m_a: &ProjMeasurement,
    m_b: &ProjMeasurement,
    a: usize,
    b: usize,
) -> ModelResult<f64> {
    if m_a.dim() != rho.dim_a() {
        return Err(MeasurementError::DimMismatch { measurement: m_a.dim(), state: rho.dim_a() }.into());
    }
    if m_b.dim() != rho.dim_b() {
        return Err(MeasurementError::DimMismatch { measurement: m_b.dim(), state: rho.dim_b() }.into());
    }
    let pa = m_a.projector(a)?;
    let pb = m_b.projector(b)?;
    let p = rho.expectation(pa, pb).map_err(MeasurementError::from)?.re;
    clamp_probability(p, || format!("joint Born probability ({a}, {b})"))
}

/// `Σ_ξ P_ξ P(a|A,ξ) P(b|B,ξ)`.
pub fn model_joint(m: &FiniteModel, setting_a: &Setting, setting_b: &Setting, a: usize, b: usize) -> ModelResult<f64> {
    let mut total = 0.0;
    for (xi, &w) in m.weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        total += w * m.alice_probability(xi, setting_a, a)? * m.bob_probability(xi, setting_b, b)?;
    }
    Ok(total)
}

/// Separable model whose hidden value indexes the ensemble members; both
/// parties respond with the member's local states.
pub fn model_from_separable(ensemble: &SeparableEnsemble) -> ModelResult<FiniteModel> {
    if ensemble.terms.is_empty() {
        return Err(ModelError::Empty);
    }
    let weights = ensemble.terms.iter().map(|t| t.weight).collect();
    let alice = ensemble.terms.iter().map(|t| Response::Quantum(t.alpha.clone())).collect();
    let bob = ensemble.terms.iter().map(|t| Response::Quantum(t.beta.clone())).collect();
    FiniteModel::new(weights, alice, bob)
}
