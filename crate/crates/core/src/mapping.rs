//! The mixing maps `M` (qudit-qubit) and `N` (qubit-qudit), their product
//! mixing partners, and the `(μ, c)` feasibility region.
//!
//! For the partner family `τ' = τ_A ⊗ (𝟙 + cσ_z)/2` (and its mirror
//! `(𝟙 + cσ_z)/2 ⊗ ρ_B`) the hidden Bloch vector built from local response
//! probabilities `p_k = P(0|k,ξ)` is
//!
//! ```text
//! r = (2μ p_x - μ,  2μ p_y - μ,  2μ p_z + c - μc - μ)
//! ```
//!
//! Every component is affine in one box variable, so `|r|²` is convex on
//! `[0,1]³` and the condition "`|r|² ≤ 1` for every response profile" is
//! decided exactly by its 8 vertices. The closed-form solution is
//! `0 ≤ μ ≤ 1/√3`, `0 ≤ c ≤ (√(1 - 2μ²) - μ)/(1 - μ)`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{kron, CMatrix};
use crate::states::{BlochVector, DensityMatrix, StateError, BLOCH_TOL};

/// `1/√3`, the largest admissible visibility.
pub const MU_MAX: f64 = 0.577_350_269_189_625_8;

/// Default number of grid points for [`region_scan`].
pub const DEFAULT_GRID: usize = 200;

/// Default bisection tolerance for [`region_scan`].
pub const DEFAULT_BISECT_TOL: f64 = 1e-10;

// accept a visibility a few ulps above 1/√3 as the endpoint itself
const MU_MAX_SLACK: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MappingError {
    #[error("states have dims {left:?} and {right:?}")]
    DimMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("parameter {name} = {value} outside [{lo}, {hi}]")]
    OutOfRange { name: &'static str, value: f64, lo: f64, hi: f64 },
    #[error("{party} side must be a qubit, got dimension {dim}")]
    NotQubit { party: &'static str, dim: usize },
    #[error(transparent)]
    State(#[from] StateError),
}

pub type MappingResult<T> = Result<T, MappingError>;

fn check_unit(name: &'static str, value: f64) -> MappingResult<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(MappingError::OutOfRange { name, value, lo: 0.0, hi: 1.0 });
    }
    Ok(())
}

/// Visibility and partner bias.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct MapParams {
    pub mu: f64,
    pub c: f64,
}

impl MapParams {
    pub fn new(mu: f64, c: f64) -> MappingResult<Self> {
        check_unit("mu", mu)?;
        check_unit("c", c)?;
        Ok(Self { mu, c })
    }

    pub fn is_feasible(&self) -> bool {
        feasible(self.mu, self.c)
    }
}

fn mix(target: &DensityMatrix, partner: &DensityMatrix, mu: f64) -> MappingResult<DensityMatrix> {
    check_unit("mu", mu)?;
    if target.dims() != partner.dims() {
        return Err(MappingError::DimMismatch { left: target.dims(), right: partner.dims() });
    }
    let mat = &target.matrix().scale(mu) + &partner.matrix().scale(1.0 - mu);
    let (da, db) = target.dims();
    Ok(DensityMatrix::new(mat, da, db)?)
}

/// `M(τ) = μ τ + (1 - μ) τ'` on a qudit-qubit system.
pub fn map_m(tau: &DensityMatrix, tau_prime: &DensityMatrix, mu: f64) -> MappingResult<DensityMatrix> {
    mix(tau, tau_prime, mu)
}

/// `N(ρ) = μ ρ + (1 - μ) ρ'` on a qubit-qudit system.
pub fn map_n(rho: &DensityMatrix, rho_prime: &DensityMatrix, mu: f64) -> MappingResult<DensityMatrix> {
    mix(rho, rho_prime, mu)
}

/// `(𝟙 + c σ_z)/2`.
pub fn biased_qubit(c: f64) -> CMatrix {
    CMatrix::diag(&[(1.0 + c) / 2.0, (1.0 - c) / 2.0])
}

/// `τ_A ⊗ (𝟙 + c σ_z)/2` with `τ_A = tr_B τ`; requires Bob to be a qubit.
pub fn corollary1_partner(tau: &DensityMatrix, c: f64) -> MappingResult<DensityMatrix> {
    check_unit("c", c)?;
    if tau.dim_b() != 2 {
        return Err(MappingError::NotQubit { party: "Bob", dim: tau.dim_b() });
    }
    Ok(DensityMatrix::new(kron(&tau.reduced_a(), &biased_qubit(c)), tau.dim_a(), 2)?)
}

/// `(𝟙 + c σ_z)/2 ⊗ ρ_B` with `ρ_B = tr_A ρ`; requires Alice to be a qubit.
pub fn corollary3_partner(rho: &DensityMatrix, c: f64) -> MappingResult<DensityMatrix> {
    check_unit("c", c)?;
    if rho.dim_a() != 2 {
        return Err(MappingError::NotQubit { party: "Alice", dim: rho.dim_a() });
    }
    Ok(DensityMatrix::new(kron(&biased_qubit(c), &rho.reduced_b()), 2, rho.dim_b())?)
}

/// Closed-form region boundary `(√(1 - 2μ²) - μ)/(1 - μ)` for `0 ≤ μ ≤ 1/√3`.
pub fn analytic_c_max(mu: f64) -> MappingResult<f64> {
    if !(0.0..=MU_MAX + MU_MAX_SLACK).contains(&mu) {
        return Err(MappingError::OutOfRange { name: "mu", value: mu, lo: 0.0, hi: MU_MAX });
    }
    let c = ((1.0 - 2.0 * mu * mu).max(0.0).sqrt() - mu) / (1.0 - mu);
    Ok(c.clamp(0.0, 1.0))
}

/// Hidden Bloch vector of the partner family from response probabilities
/// `p_k = P(0|k,ξ)`.
pub fn corollary_r_vector(px: f64, py: f64, pz: f64, mu: f64, c: f64) -> MappingResult<BlochVector> {
    check_unit("P(0|x)", px)?;
    check_unit("P(0|y)", py)?;
    check_unit("P(0|z)", pz)?;
    check_unit("mu", mu)?;
    check_unit("c", c)?;
    Ok(BlochVector::new(2.0 * mu * px - mu, 2.0 * mu * py - mu, 2.0 * mu * pz + c - mu * c - mu))
}

/// The 8 vertices of the response box `[0,1]³`.
pub fn box_vertices() -> [[f64; 3]; 8] {
    std::array::from_fn(|k| [(k & 1) as f64, ((k >> 1) & 1) as f64, ((k >> 2) & 1) as f64])
}

/// Vertex of the response box maximizing `|r|²`, with that value.
pub fn worst_vertex(mu: f64, c: f64) -> ([f64; 3], f64) {
    box_vertices()
        .into_iter()
        .map(|v| {
            let r = BlochVector::new(2.0 * mu * v[0] - mu, 2.0 * mu * v[1] - mu, 2.0 * mu * v[2] + c - mu * c - mu);
            (v, r.norm_sq())
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("box has vertices")
}

/// Whether every response profile in `[0,1]³` yields a physical hidden state.
///
/// Parameters outside `[0,1]²` are reported infeasible.
pub fn feasible(mu: f64, c: f64) -> bool {
    if !(0.0..=1.0).contains(&mu) || !(0.0..=1.0).contains(&c) {
        return false;
    }
    worst_vertex(mu, c).1 <= 1.0 + BLOCH_TOL
}

/// One point of the reconstructed region boundary.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct RegionPoint {
    pub mu: f64,
    pub c_numeric: f64,
    pub c_analytic: f64,
}

impl RegionPoint {
    pub fn abs_err(&self) -> f64 {
        (self.c_numeric - self.c_analytic).abs()
    }
}

/// Largest `c ∈ [0,1]` with `feasible(mu, c)`, by bisection to `tol`.
/// Returns `None` when even `c = 0` is infeasible.
pub fn bisect_c_max(mu: f64, tol: f64) -> Option<f64> {
    if !feasible(mu, 0.0) {
        return None;
    }
    if feasible(mu, 1.0) {
        return Some(1.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mu, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Uniform grid of `n_grid` visibilities over `[0, 1/√3]`.
pub fn mu_grid(n_grid: usize) -> Vec<f64> {
    let last = (n_grid.max(2) - 1) as f64;
    (0..n_grid).map(|i| if i + 1 == n_grid { MU_MAX } else { MU_MAX * i as f64 / last }).collect()
}

/// Numeric region boundary on a uniform μ grid, alongside the closed form.
///
/// Grid points are evaluated in parallel and assembled by index.
pub fn region_scan(n_grid: usize, bisect_tol: f64) -> MappingResult<Vec<RegionPoint>> {
    if n_grid < 2 {
        return Err(MappingError::OutOfRange { name: "n_grid", value: n_grid as f64, lo: 2.0, hi: f64::INFINITY });
    }
    if bisect_tol.is_nan() || bisect_tol <= 0.0 {
        return Err(MappingError::OutOfRange { name: "tol", value: bisect_tol, lo: 0.0, hi: f64::INFINITY });
    }
    mu_grid(n_grid)
        .into_par_iter()
        .map(|mu| {
            Ok(RegionPoint {
                mu,
                c_numeric: bisect_c_max(mu, bisect_tol).unwrap_or(0.0),
                c_analytic: analytic_c_max(mu)?,
            })
        })
        .collect()
}

/// Format like C's `%.{sig}g`.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= sig as i32 {
        let mantissa = trim_zeros(mantissa);
        format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV text with header `mu,c_max_numeric,c_max_analytic,abs_err`.
pub fn region_csv(points: &[RegionPoint]) -> String {
    let mut out = String::from("mu,c_max_numeric,c_max_analytic,abs_err\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_sig(p.mu, 12),
            format_sig(p.c_numeric, 12),
            format_sig(p.c_analytic, 12),
            format_sig(p.abs_err(), 12)
        );
    }
    out
}
