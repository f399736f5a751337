//! Explicit hidden-state and separable models for mixed states, built from
//! finite models of their components, with numerical checks of the defining
//! identities.
//!
//! **Hidden-state model for `ρ = μ τ + (1 - μ) τ'` (qudit-qubit).** Given LHV
//! models of `τ` and `τ'` sharing the weights `P_ξ`, set
//!
//! ```text
//! ℘(a|A,ξ) = μ P(a|A,ξ) + (1 - μ) P'(a|A,ξ)
//! η(k)     = μ P(a|A,ξ) P(0|k,ξ) + (1 - μ) P'(a|A,ξ) P'(0|k,ξ),   k ∈ {x, y, z}
//! r_k      = 2 η(k) / ℘(a|A,ξ) - 1
//! ```
//!
//! and `ρ_ξ = (𝟙 + r·σ)/2`. Then Bob's steered states satisfy
//! `tr_A[(Π_a ⊗ 𝟙) ρ] = Σ_ξ ℘(a|A,ξ) ρ_ξ P_ξ` whenever every `ρ_ξ` is
//! physical. In general `r` depends on `(A, a)`; for partners whose Alice
//! response equals τ's (`P' = P` on Alice's side) the dependence cancels and
//! the ensemble is a genuine hidden-state model.
//!
//! **Separable model for `σ = μ ρ + (1 - μ) ρ'` (qubit-qudit).** Given LHS
//! models of `ρ` and `ρ'` with the same weights and Bob hidden states, Alice's
//! hidden qubit is `r_k = 2(μ P(0|k,ξ) + (1 - μ) P'(0|k,ξ)) - 1` and Bob's
//! hidden states carry over.
//!
//! When `℘(a|A,ξ) = 0` the hidden state's contribution vanishes; it is set to
//! the maximally mixed qubit and flagged as degenerate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::CMatrix;
use crate::mapping::{self, biased_qubit, MappingError};
use crate::measurements::{computational_basis, qudit_measurement, random_qubit_measurement, random_qudit_measurement};
use crate::models::{
    born_joint, model_from_separable, pauli_setting_triple, FiniteModel, ModelError, Response, ResponseTable, Setting,
};
use crate::states::{self, BlochVector, DensityMatrix, SeparableEnsemble, StateError};

/// Tolerance on weight agreement and on response sums.
pub const SHARED_TOL: f64 = 1e-12;

/// Responses `℘ ≤` this are treated as zero when dividing.
pub const ZERO_RESPONSE: f64 = 1e-14;

/// Default tolerance for the identity checks.
pub const VERIFY_TOL: f64 = 1e-10;

/// Default number of random Alice settings for the hidden-state check.
pub const DEFAULT_ALICE_SETTINGS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("models do not share the same weights P_ξ: {0}")]
    WeightMismatch(String),
    #[error("Bob responses differ between the models at ξ = {xi}")]
    BobMismatch { xi: usize },
    #[error(
        "unphysical hidden state at ξ = {xi}, setting \"{setting}\", outcome {outcome}: |r|² = {norm_sq}"
    )]
    UnphysicalHiddenState { xi: usize, setting: String, outcome: usize, norm_sq: f64 },
    #[error("unphysical Alice hidden state at ξ = {xi}: |r|² = {norm_sq}")]
    UnphysicalAliceState { xi: usize, norm_sq: f64 },
    #[error("certificate does not match the given settings: {0}")]
    SettingMismatch(String),
    #[error("mu = {0} outside [0, 1]")]
    MuOutOfRange(f64),
    #[error("state dims {got:?} do not fit the certificate: {expected}")]
    Dims { got: (usize, usize), expected: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    State(#[from] StateError),
}

pub type ConstructionResult<T> = Result<T, ConstructionError>;

/// Bob's measurement axis in the fixed setting set.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

fn check_mu(mu: f64) -> ConstructionResult<()> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(ConstructionError::MuOutOfRange(mu));
    }
    Ok(())
}

fn check_shared_weights(m: &FiniteModel, m_prime: &FiniteModel) -> ConstructionResult<()> {
    if m.len() != m_prime.len() {
        return Err(ConstructionError::WeightMismatch(format!("{} vs {} hidden values", m.len(), m_prime.len())));
    }
    for (xi, (w, w_prime)) in m.weights().iter().zip(m_prime.weights()).enumerate() {
        if (w - w_prime).abs() > SHARED_TOL {
            return Err(ConstructionError::WeightMismatch(format!("ξ = {xi}: {w} vs {w_prime}")));
        }
    }
    Ok(())
}

/// `η(B) = μ P(a|A,ξ) P(0|B,ξ) + (1 - μ) P'(a|A,ξ) P'(0|B,ξ)`.
pub fn eta(
    axis: Axis,
    xi: usize,
    a: usize,
    setting_a: &Setting,
    mu: f64,
    model_tau: &FiniteModel,
    model_tau_prime: &FiniteModel,
) -> ConstructionResult<f64> {
    check_mu(mu)?;
    check_shared_weights(model_tau, model_tau_prime)?;
    let bob = &pauli_setting_triple()[axis.index()];
    let p = model_tau.alice_probability(xi, setting_a, a)?;
    let p_prime = model_tau_prime.alice_probability(xi, setting_a, a)?;
    let b = model_tau.bob_probability(xi, bob, 0)?;
    let b_prime = model_tau_prime.bob_probability(xi, bob, 0)?;
    Ok(mu * p * b + (1.0 - mu) * p_prime * b_prime)
}

/// One `(A, a, ξ)` entry of a hidden-state certificate.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct HiddenEntry {
    /// `℘(a|A,ξ)`.
    pub response: f64,
    /// Bloch vector of `ρ_ξ`.
    pub bloch: BlochVector,
    /// `℘ = 0`; the hidden state is a placeholder.
    pub degenerate: bool,
}

/// Hidden-state data for one Alice setting; `outcomes[a][ξ]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SettingBlock {
    pub label: String,
    pub outcomes: Vec<Vec<HiddenEntry>>,
}

/// Hidden-state ensemble `{℘_ξ, ℘(a|A,ξ), ρ_ξ}` for `μ τ + (1 - μ) τ'`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem1Certificate {
    pub mu: f64,
    pub weights: Vec<f64>,
    pub settings: Vec<SettingBlock>,
}

impl Theorem1Certificate {
    /// Largest absolute difference between hidden Bloch vectors across all
    /// settings and outcomes, per ξ (degenerate entries skipped).
    pub fn setting_dependence(&self) -> f64 {
        let mut worst = 0.0_f64;
        for xi in 0..self.weights.len() {
            let blochs: Vec<BlochVector> = self
                .settings
                .iter()
                .flat_map(|s| s.outcomes.iter().map(move |o| o[xi]))
                .filter(|e| !e.degenerate)
                .map(|e| e.bloch)
                .collect();
            if let Some(first) = blochs.first() {
                for b in &blochs[1..] {
                    worst = worst.max(first.max_abs_diff(b));
                }
            }
        }
        worst
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// Build the hidden-state ensemble for `μ τ + (1 - μ) τ'` from LHV models of
/// `τ` and `τ'` sharing their weights. Bob responses must be defined at the
/// `x`, `y`, `z` settings.
///
/// Fails with [`ConstructionError::UnphysicalHiddenState`] at the first
/// `(ξ, A, a)` whose hidden Bloch vector leaves the unit ball.
pub fn theorem1_certificate(
    model_tau: &FiniteModel,
    model_tau_prime: &FiniteModel,
    mu: f64,
    alice_settings: &[Setting],
) -> ConstructionResult<Theorem1Certificate> {
    check_mu(mu)?;
    check_shared_weights(model_tau, model_tau_prime)?;
    let bob = pauli_setting_triple();
    let n = model_tau.len();

    // P(0|k,ξ) and P'(0|k,ξ) do not depend on Alice's setting
    let mut bob0 = Vec::with_capacity(n);
    let mut bob0_prime = Vec::with_capacity(n);
    for xi in 0..n {
        let mut row = [0.0; 3];
        let mut row_prime = [0.0; 3];
        for (k, s) in bob.iter().enumerate() {
            row[k] = model_tau.bob_probability(xi, s, 0)?;
            row_prime[k] = model_tau_prime.bob_probability(xi, s, 0)?;
        }
        bob0.push(row);
        bob0_prime.push(row_prime);
    }

    let mut settings = Vec::with_capacity(alice_settings.len());
    for setting in alice_settings {
        let mut outcomes = Vec::with_capacity(setting.outcomes());
        for a in 0..setting.outcomes() {
            let mut entries = Vec::with_capacity(n);
            for xi in 0..n {
                let p = model_tau.alice_probability(xi, setting, a)?;
                let p_prime = model_tau_prime.alice_probability(xi, setting, a)?;
                let response = mu * p + (1.0 - mu) * p_prime;
                if response <= ZERO_RESPONSE {
                    entries.push(HiddenEntry { response, bloch: BlochVector::ZERO, degenerate: true });
                    continue;
                }
                let r: [f64; 3] = std::array::from_fn(|k| {
                    let eta = mu * p * bob0[xi][k] + (1.0 - mu) * p_prime * bob0_prime[xi][k];
                    2.0 * eta / response - 1.0
                });
                let bloch = BlochVector::new(r[0], r[1], r[2]);
                if !bloch.is_physical() {
                    return Err(ConstructionError::UnphysicalHiddenState {
                        xi,
                        setting: setting.label.clone(),
                        outcome: a,
                        norm_sq: bloch.norm_sq(),
                    });
                }
                entries.push(HiddenEntry { response, bloch, degenerate: false });
            }
            outcomes.push(entries);
        }
        settings.push(SettingBlock { label: setting.label.clone(), outcomes });
    }
    Ok(Theorem1Certificate { mu, weights: model_tau.weights().to_vec(), settings })
}

/// Outcome of an identity check.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct Verification {
    pub max_residual: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Verification {
    fn new(max_residual: f64, tol: f64) -> Self {
        Self { max_residual, tol, passed: max_residual <= tol }
    }
}

/// Compare Bob's steered states `tr_A[(Π_a ⊗ 𝟙) ρ]` against the certificate's
/// ensemble `Σ_ξ ℘(a|A,ξ) ρ_ξ P_ξ`, entrywise, over every listed setting and
/// outcome.
pub fn verify_lhs_identity(
    rho_ab: &DensityMatrix,
    cert: &Theorem1Certificate,
    alice_settings: &[Setting],
    tol: f64,
) -> ConstructionResult<Verification> {
    if rho_ab.dim_b() != 2 {
        return Err(ConstructionError::Dims { got: rho_ab.dims(), expected: "Bob must be a qubit".into() });
    }
    if cert.settings.len() != alice_settings.len() {
        return Err(ConstructionError::SettingMismatch(format!(
            "{} certificate blocks for {} settings",
            cert.settings.len(),
            alice_settings.len()
        )));
    }
    let mut worst = 0.0_f64;
    for (block, setting) in cert.settings.iter().zip(alice_settings) {
        if block.label != setting.label || block.outcomes.len() != setting.outcomes() {
            return Err(ConstructionError::SettingMismatch(format!("block \"{}\" vs setting \"{}\"", block.label, setting.label)));
        }
        for (a, entries) in block.outcomes.iter().enumerate() {
            let steered = states::conditional_state(rho_ab, setting.measurement.projector(a).map_err(ModelError::from)?)?;
            let mut ensemble = CMatrix::zeros(2, 2);
            for (entry, &w) in entries.iter().zip(&cert.weights) {
                ensemble = &ensemble + &entry.bloch.to_qubit_state().scale(entry.response * w);
            }
            worst = worst.max(steered.max_abs_diff(&ensemble));
        }
    }
    Ok(Verification::new(worst, tol))
}

/// Separable ensemble `{℘_ξ, ρ^A_ξ, ρ^B_ξ}` for `μ ρ + (1 - μ) ρ'`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem2Certificate {
    pub mu: f64,
    pub weights: Vec<f64>,
    /// Bloch vectors of Alice's hidden qubits.
    pub alice: Vec<BlochVector>,
    /// Bob's responses, carried over from the source models.
    pub bob: Vec<Response>,
}

impl Theorem2Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

fn same_response(a: &Response, b: &Response) -> bool {
    match (a, b) {
        (Response::Quantum(x), Response::Quantum(y)) => x.max_abs_diff(y) <= SHARED_TOL,
        (Response::Table(x), Response::Table(y)) => x == y,
        _ => false,
    }
}

/// Build the separable ensemble for `μ ρ + (1 - μ) ρ'` from models of `ρ` and
/// `ρ'` with identical weights and Bob responses. Alice responses must be
/// defined at the `x`, `y`, `z` settings.
pub fn theorem2_certificate(
    model_rho: &FiniteModel,
    model_rho_prime: &FiniteModel,
    mu: f64,
) -> ConstructionResult<Theorem2Certificate> {
    check_mu(mu)?;
    check_shared_weights(model_rho, model_rho_prime)?;
    for (xi, (b, b_prime)) in model_rho.bob().iter().zip(model_rho_prime.bob()).enumerate() {
        if !same_response(b, b_prime) {
            return Err(ConstructionError::BobMismatch { xi });
        }
    }
    let axes = pauli_setting_triple();
    let mut alice = Vec::with_capacity(model_rho.len());
    for xi in 0..model_rho.len() {
        let mut r = [0.0; 3];
        for (k, s) in axes.iter().enumerate() {
            let p = model_rho.alice_probability(xi, s, 0)?;
            let p_prime = model_rho_prime.alice_probability(xi, s, 0)?;
            r[k] = 2.0 * (mu * p + (1.0 - mu) * p_prime) - 1.0;
        }
        let bloch = BlochVector::new(r[0], r[1], r[2]);
        if !bloch.is_physical() {
            return Err(ConstructionError::UnphysicalAliceState { xi, norm_sq: bloch.norm_sq() });
        }
        alice.push(bloch);
    }
    Ok(Theorem2Certificate { mu, weights: model_rho.weights().to_vec(), alice, bob: model_rho.bob().to_vec() })
}

/// Compare `P(a,b|A,B,σ)` against `Σ_ξ tr[Π_a ρ^A_ξ] P(b|B,ξ) ℘_ξ` for
/// `n_samples` seeded random measurement pairs (Alice along a random Bloch
/// direction, Bob in a random orthonormal basis) and all outcomes.
pub fn verify_spm_identity(
    sigma_ab: &DensityMatrix,
    cert: &Theorem2Certificate,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> ConstructionResult<Verification> {
    if sigma_ab.dim_a() != 2 {
        return Err(ConstructionError::Dims { got: sigma_ab.dims(), expected: "Alice must be a qubit".into() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alice_states: Vec<CMatrix> = cert.alice.iter().map(BlochVector::to_qubit_state).collect();
    let mut worst = 0.0_f64;
    for _ in 0..n_samples {
        let sa = Setting::new("A", random_qubit_measurement(&mut rng));
        let sb = Setting::new("B", random_qudit_measurement(sigma_ab.dim_b(), &mut rng));
        for a in 0..sa.outcomes() {
            for b in 0..sb.outcomes() {
                let quantum = born_joint(sigma_ab, &sa.measurement, &sb.measurement, a, b)?;
                let mut model = 0.0;
                for ((w, rho_a), bob) in cert.weights.iter().zip(&alice_states).zip(&cert.bob) {
                    let pa = Response::Quantum(rho_a.clone()).probability(&sa, a)?;
                    model += w * pa * bob.probability(&sb, b)?;
                }
                worst = worst.max((quantum - model).abs());
            }
        }
    }
    Ok(Verification::new(worst, tol))
}

/// LHV models of a separable `τ` and of `τ_A ⊗ (𝟙 + cσ_z)/2`, sharing weights
/// and Alice responses.
pub fn corollary1_models(ensemble: &SeparableEnsemble, c: f64) -> ConstructionResult<(FiniteModel, FiniteModel)> {
    let tau = model_from_separable(ensemble)?;
    let bias = Response::Quantum(biased_qubit(c));
    let partner = FiniteModel::new(tau.weights().to_vec(), tau.alice().to_vec(), vec![bias; tau.len()])?;
    Ok((tau, partner))
}

/// LHS models of a separable `ρ` and of `(𝟙 + cσ_z)/2 ⊗ ρ_B`, sharing weights
/// and Bob hidden states.
pub fn corollary3_models(ensemble: &SeparableEnsemble, c: f64) -> ConstructionResult<(FiniteModel, FiniteModel)> {
    let rho = model_from_separable(ensemble)?;
    let bias = Response::Quantum(biased_qubit(c));
    let partner = FiniteModel::new(rho.weights().to_vec(), vec![bias; rho.len()], rho.bob().to_vec())?;
    Ok((rho, partner))
}

/// Computational basis followed by `n_random` random rank-one bases.
pub fn alice_settings<R: Rng + ?Sized>(dim: usize, n_random: usize, rng: &mut R) -> Vec<Setting> {
    let mut out = vec![Setting::new(
        "computational",
        qudit_measurement(&computational_basis(dim)).expect("computational basis is orthonormal"),
    )];
    out.extend((0..n_random).map(|i| Setting::new(format!("A{i}"), random_qudit_measurement(dim, rng))));
    out
}

/// A response profile at a corner of `[0,1]³` that forces an unphysical
/// hidden state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexWitness {
    /// `(P(0|x,ξ), P(0|y,ξ), P(0|z,ξ))` at the offending hidden value.
    pub vertex: [f64; 3],
    pub norm_sq: f64,
}

/// LHV models with one hidden value per vertex of the response box: Bob
/// answers deterministically at the vertex, Alice is maximally mixed, and the
/// partner's Bob answers `P'(0|k) = (1 + c δ_kz)/2`.
pub fn box_vertex_models(dim_a: usize, c: f64) -> ConstructionResult<(FiniteModel, FiniteModel)> {
    if !(0.0..=1.0).contains(&c) {
        return Err(MappingError::OutOfRange { name: "c", value: c, lo: 0.0, hi: 1.0 }.into());
    }
    let vertices = mapping::box_vertices();
    let weights = vec![1.0 / vertices.len() as f64; vertices.len()];
    let alice = vec![Response::Quantum(CMatrix::identity(dim_a).scale(1.0 / dim_a as f64)); vertices.len()];
    let bob = vertices.iter().map(|&v| Response::Table(ResponseTable::xyz(v))).collect();
    let bob_prime = vec![Response::Table(ResponseTable::xyz([0.5, 0.5, (1.0 + c) / 2.0])); vertices.len()];
    Ok((
        FiniteModel::new(weights.clone(), alice.clone(), bob)?,
        FiniteModel::new(weights, alice, bob_prime)?,
    ))
}

/// Run the hidden-state builder on [`box_vertex_models`]; `Some` iff it
/// reports an unphysical hidden state.
pub fn infeasibility_witness(dim_a: usize, mu: f64, c: f64) -> ConstructionResult<Option<VertexWitness>> {
    let (tau, tau_prime) = box_vertex_models(dim_a, c)?;
    let settings = [Setting::new(
        "computational",
        qudit_measurement(&computational_basis(dim_a)).expect("computational basis is orthonormal"),
    )];
    match theorem1_certificate(&tau, &tau_prime, mu, &settings) {
        Ok(_) => Ok(None),
        Err(ConstructionError::UnphysicalHiddenState { xi, norm_sq, .. }) => {
            Ok(Some(VertexWitness { vertex: mapping::box_vertices()[xi], norm_sq }))
        }
        Err(e) => Err(e),
    }
}

/// One randomized hidden-state trial: a `k`-term separable `dim_a ⊗ 2` state,
/// its partner at bias `c`, and the identity checked over the computational
/// basis plus `n_settings` random Alice bases.
pub fn theorem1_trial<R: Rng + ?Sized>(
    rng: &mut R,
    dim_a: usize,
    k: usize,
    mu: f64,
    c: f64,
    n_settings: usize,
    tol: f64,
) -> ConstructionResult<Verification> {
    let (tau, ensemble) = states::random_separable_with(dim_a, 2, k, rng)?;
    let (model, model_prime) = corollary1_models(&ensemble, c)?;
    let rho = mapping::map_m(&tau, &mapping::corollary1_partner(&tau, c)?, mu)?;
    let settings = alice_settings(dim_a, n_settings, rng);
    let cert = theorem1_certificate(&model, &model_prime, mu, &settings)?;
    verify_lhs_identity(&rho, &cert, &settings, tol)
}

/// One randomized separable-model trial on a `k`-term separable `2 ⊗ dim_b`
/// state with `n_samples` random measurement pairs.
pub fn theorem2_trial<R: Rng + ?Sized>(
    rng: &mut R,
    dim_b: usize,
    k: usize,
    mu: f64,
    c: f64,
    n_samples: usize,
    tol: f64,
) -> ConstructionResult<Verification> {
    let (rho, ensemble) = states::random_separable_with(2, dim_b, k, rng)?;
    let (model, model_prime) = corollary3_models(&ensemble, c)?;
    let sigma = mapping::map_n(&rho, &mapping::corollary3_partner(&rho, c)?, mu)?;
    let cert = theorem2_certificate(&model, &model_prime, mu)?;
    verify_spm_identity(&sigma, &cert, n_samples, rng.random(), tol)
}
