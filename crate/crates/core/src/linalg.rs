//! Dense complex matrices sized for few-qudit work.
//!
//! Storage is row-major. For bipartite operators the composite index is
//! `i = i_a * dim_b + i_b`, i.e. subsystem A is the left (slow-varying) tensor
//! factor everywhere in this crate.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout.
pub type C64 = Complex64;

/// Maximum allowed deviation `max |m - m†|` for a matrix to count as Hermitian
/// in [`hermitian_eigen`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Off-diagonal threshold at which Jacobi sweeping stops, relative to
/// `max(1, max |m_ij|)`.
pub const JACOBI_OFF_TOL: f64 = 1e-14;

/// Sweep cap for the Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian: max |m - m†| = {deviation:e}")]
    NotHermitian { deviation: f64 },
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal max {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },
}

pub type LinalgResult<T> = Result<T, LinalgError>;

/// Which tensor factor of a bipartite operator an operation acts on.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

/// A dense complex matrix.
///
/// Construction never normalizes or symmetrizes; validity (Hermiticity,
/// positivity, ...) is checked explicitly by callers.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Build from row-major entries. Fails if the length is not `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> LinalgResult<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from nested rows. Fails on ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> LinalgResult<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * m);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(LinalgError::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_vec(n, m, data)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> LinalgResult<Self> {
        let rows: Vec<Vec<C64>> =
            rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// `|v⟩⟨w|`.
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        let mut m = Self::zeros(v.len(), w.len());
        for (i, vi) in v.iter().enumerate() {
            for (j, wj) in w.iter().enumerate() {
                m[(i, j)] = vi * wj.conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    /// Matrix product; fails on inner-dimension mismatch.
    pub fn matmul(&self, rhs: &Self) -> LinalgResult<Self> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, v: &[C64]) -> LinalgResult<Vec<C64>> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect())
    }

    /// Elementwise combination of two equally-shaped matrices.
    pub fn zip_with(&self, rhs: &Self, f: impl Fn(C64, C64) -> C64) -> LinalgResult<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    /// `max_ij |self_ij - other_ij|`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |m - m†|`, or infinity for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }
}

/// Serialized as `{"re": [[..]], "im": [[..]]}`, row-major.
impl serde::Serialize for CMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let part = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..self.rows).map(|i| self.row(i).iter().map(f).collect()).collect()
        };
        let mut st = serializer.serialize_struct("CMatrix", 2)?;
        st.serialize_field("re", &part(|z| z.re))?;
        st.serialize_field("im", &part(|z| z.im))?;
        st.end()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

// Operator impls panic on shape mismatch, like the std numeric operators do on
// overflow in debug builds; the fallible forms are `matmul` and `zip_with`.
impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.zip_with(rhs, |a, b| a + b).expect("matrix addition shape mismatch")
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.zip_with(rhs, |a, b| a - b).expect("matrix subtraction shape mismatch")
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

/// The Pauli matrices σ_x, σ_y, σ_z.
pub fn pauli() -> [CMatrix; 3] {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        CMatrix { rows: 2, cols: 2, data: vec![o, one, one, o] },
        CMatrix { rows: 2, cols: 2, data: vec![o, -i, i, o] },
        CMatrix { rows: 2, cols: 2, data: vec![one, o, o, -one] },
    ]
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = CMatrix::zeros(rows, cols);
    for ia in 0..a.rows {
        for ja in 0..a.cols {
            let x = a[(ia, ja)];
            for ib in 0..b.rows {
                for jb in 0..b.cols {
                    out[(ia * b.rows + ib, ja * b.cols + jb)] = x * b[(ib, jb)];
                }
            }
        }
    }
    out
}

fn check_bipartite(m: &CMatrix, dim_a: usize, dim_b: usize) -> LinalgResult<()> {
    let n = dim_a * dim_b;
    if m.rows != n || m.cols != n {
        return Err(LinalgError::DimensionMismatch(format!(
            "expected a {n}x{n} operator for dims {dim_a}x{dim_b}, got {}x{}",
            m.rows, m.cols
        )));
    }
    Ok(())
}

/// Trace out one factor of a bipartite operator, keeping `keep`.
pub fn partial_trace(m: &CMatrix, dim_a: usize, dim_b: usize, keep: Subsystem) -> LinalgResult<CMatrix> {
    check_bipartite(m, dim_a, dim_b)?;
    let out = match keep {
        Subsystem::B => {
            let mut out = CMatrix::zeros(dim_b, dim_b);
            for i in 0..dim_b {
                for j in 0..dim_b {
                    out[(i, j)] = (0..dim_a).map(|a| m[(a * dim_b + i, a * dim_b + j)]).sum();
                }
            }
            out
        }
        Subsystem::A => {
            let mut out = CMatrix::zeros(dim_a, dim_a);
            for i in 0..dim_a {
                for j in 0..dim_a {
                    out[(i, j)] = (0..dim_b).map(|b| m[(i * dim_b + b, j * dim_b + b)]).sum();
                }
            }
            out
        }
    };
    Ok(out)
}

/// Transpose the `on` factor of a bipartite operator.
pub fn partial_transpose(m: &CMatrix, dim_a: usize, dim_b: usize, on: Subsystem) -> LinalgResult<CMatrix> {
    check_bipartite(m, dim_a, dim_b)?;
    let n = dim_a * dim_b;
    let mut out = CMatrix::zeros(n, n);
    for ia in 0..dim_a {
        for ib in 0..dim_b {
            for ja in 0..dim_a {
                for jb in 0..dim_b {
                    let src = match on {
                        Subsystem::B => (ia * dim_b + jb, ja * dim_b + ib),
                        Subsystem::A => (ja * dim_b + ib, ia * dim_b + jb),
                    };
                    out[(ia * dim_b + ib, ja * dim_b + jb)] = m[src];
                }
            }
        }
    }
    Ok(out)
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigen {
    /// Real eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary whose `k`-th column is the eigenvector for `values[k]`.
    pub vectors: CMatrix,
}

impl Eigen {
    /// `V · diag(λ) · V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::diag(&self.values);
        &(&self.vectors * &d) * &self.vectors.adjoint()
    }
}

fn off_diagonal_max(m: &CMatrix) -> f64 {
    let mut off = 0.0_f64;
    for i in 0..m.rows {
        for j in 0..m.cols {
            if i != j {
                off = off.max(m[(i, j)].norm());
            }
        }
    }
    off
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot `m_pq`, then applies a
/// real plane rotation zeroing it. Sweeps stop once every off-diagonal entry
/// is below [`JACOBI_OFF_TOL`] (scaled by the largest entry when that exceeds
/// one) or after [`JACOBI_MAX_SWEEPS`].
pub fn hermitian_eigen(m: &CMatrix) -> LinalgResult<Eigen> {
    if !m.is_square() {
        return Err(LinalgError::DimensionMismatch(format!(
            "eigendecomposition of a non-square {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(LinalgError::NotHermitian { deviation });
    }
    let n = m.rows;
    // symmetrize once so the iteration works on an exactly Hermitian matrix
    let adj = m.adjoint();
    let mut a = m.zip_with(&adj, |x, y| (x + y) * 0.5)?;
    let mut v = CMatrix::identity(n);
    let threshold = JACOBI_OFF_TOL * a.max_abs().max(1.0);

    let mut sweeps = 0;
    let mut off = off_diagonal_max(&a);
    while off >= threshold {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(LinalgError::NoConvergence { sweeps, off_diagonal: off });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        off = off_diagonal_max(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, k)] = v[(i, src)];
        }
    }
    Ok(Eigen { values, vectors })
}

/// One Jacobi step on the `(p, q)` plane: `a <- G† a G`, `v <- v G`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r; // e^{iφ}
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = phase.conj() * (-s);
    let g_qq = phase.conj() * c;

    let n = a.rows;
    for i in 0..n {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * g_pp + aiq * g_qp;
        a[(i, q)] = aip * g_pq + aiq * g_qq;
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * g_pp + viq * g_qp;
        v[(i, q)] = vip * g_pq + viq * g_qq;
    }
    for j in 0..n {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = g_pp.conj() * apj + g_qp.conj() * aqj;
        a[(q, j)] = g_pq.conj() * apj + g_qq.conj() * aqj;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> LinalgResult<f64> {
    Ok(hermitian_eigen(m)?.values.iter().map(|x| x.abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// `det(m)` by Laplace expansion along the first row; test-only oracle.
    fn det(m: &CMatrix) -> C64 {
        let n = m.rows();
        if n == 1 {
            return m[(0, 0)];
        }
        let mut total = C64::new(0.0, 0.0);
        for j in 0..n {
            let minor: Vec<Vec<C64>> = (1..n)
                .map(|i| (0..n).filter(|&k| k != j).map(|k| m[(i, k)]).collect())
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            total += m[(0, j)] * det(&CMatrix::from_rows(&minor).unwrap()) * sign;
        }
        total
    }

    fn bell_phi_plus() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = vec![c(s), c(0.0), c(0.0), c(s)];
        CMatrix::outer(&v, &v)
    }

    fn singlet() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = vec![c(0.0), c(s), c(-s), c(0.0)];
        CMatrix::outer(&v, &v)
    }

    #[test]
    fn kron_identities() {
        let i2 = CMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4));
        let [sx, _, sz] = pauli();
        assert_eq!(kron(&sz, &i2), CMatrix::diag(&[1.0, 1.0, -1.0, -1.0]));
        // σx⊗σx |00⟩ = |11⟩
        let out = kron(&sx, &sx).mat_vec(&[c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        assert_eq!(out, vec![c(0.0), c(0.0), c(0.0), c(1.0)]);
    }

    #[test]
    fn partial_trace_examples() {
        let rho = partial_trace(&bell_phi_plus(), 2, 2, Subsystem::B).unwrap();
        assert!(rho.max_abs_diff(&CMatrix::identity(2).scale(0.5)) < 1e-15);

        let mixed = CMatrix::identity(6).scale(1.0 / 6.0);
        let rho_a = partial_trace(&mixed, 3, 2, Subsystem::A).unwrap();
        assert!(rho_a.max_abs_diff(&CMatrix::identity(3).scale(1.0 / 3.0)) < 1e-15);

        let alpha = CMatrix::from_real_rows(&[vec![1.0, 2.0, 0.0], vec![3.0, 4.0, 1.0], vec![0.0, 1.0, 5.0]])
            .unwrap();
        let beta = CMatrix::from_real_rows(&[vec![2.0, -1.0], vec![7.0, 3.0]]).unwrap();
        let ab = kron(&alpha, &beta);
        assert_eq!(partial_trace(&ab, 3, 2, Subsystem::B).unwrap(), beta.scale_complex(alpha.trace()));
        assert_eq!(partial_trace(&ab, 3, 2, Subsystem::A).unwrap(), alpha.scale_complex(beta.trace()));
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = CMatrix::identity(5);
        assert!(matches!(partial_trace(&m, 2, 2, Subsystem::A), Err(LinalgError::DimensionMismatch(_))));
        assert!(partial_transpose(&m, 3, 2, Subsystem::B).is_err());
    }

    #[test]
    fn partial_transpose_of_product_and_involution() {
        let alpha = CMatrix::from_rows(&[
            vec![c(1.0), C64::new(0.0, 2.0)],
            vec![C64::new(3.0, -1.0), c(4.0)],
        ])
        .unwrap();
        let beta = CMatrix::from_rows(&[
            vec![c(1.0), C64::new(2.0, 1.0), c(0.0)],
            vec![c(5.0), c(1.0), C64::new(0.0, -1.0)],
            vec![c(2.0), c(3.0), c(7.0)],
        ])
        .unwrap();
        let ab = kron(&alpha, &beta);
        assert_eq!(partial_transpose(&ab, 2, 3, Subsystem::B).unwrap(), kron(&alpha, &beta.transpose()));
        assert_eq!(partial_transpose(&ab, 2, 3, Subsystem::A).unwrap(), kron(&alpha.transpose(), &beta));
        let twice = partial_transpose(&partial_transpose(&ab, 2, 3, Subsystem::B).unwrap(), 2, 3, Subsystem::B)
            .unwrap();
        assert_eq!(twice, ab);
    }

    #[test]
    fn partial_transpose_of_bell_state() {
        let pt = partial_transpose(&bell_phi_plus(), 2, 2, Subsystem::B).unwrap();
        let eig = hermitian_eigen(&pt).unwrap();
        assert!((eig.values[0] + 0.5).abs() < 1e-14);
    }

    #[test]
    fn pauli_spectra() {
        let [sx, sy, sz] = pauli();
        for s in [sx, sy, sz] {
            let e = hermitian_eigen(&s).unwrap();
            assert!((e.values[0] + 1.0).abs() < 1e-14);
            assert!((e.values[1] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn singlet_partial_transpose_spectrum_matches_characteristic_polynomial() {
        let pt = partial_transpose(&singlet(), 2, 2, Subsystem::B).unwrap();
        // oracle: the characteristic polynomial det(pt - λ I) vanishes at
        // λ = -1/2 (simple) and λ = 1/2 (triple: the derivative-free check is
        // on pt - λ I having rank one, i.e. all 2x2 minors vanishing)
        let shifted = |lambda: f64| &pt - &CMatrix::identity(4).scale(lambda);
        assert!(det(&shifted(-0.5)).norm() < 1e-15);
        assert!(det(&shifted(0.5)).norm() < 1e-15);
        let s = shifted(0.5);
        let mut rank_one = true;
        for (i, k) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            for (j, l) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
                let minor = s[(i, j)] * s[(k, l)] - s[(i, l)] * s[(k, j)];
                rank_one &= minor.norm() < 1e-15;
            }
        }
        assert!(rank_one);
        let e = hermitian_eigen(&pt).unwrap();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (got, want) in e.values.iter().zip(expected) {
            assert!((got - want).abs() < 1e-14, "{:?}", e.values);
        }
    }

    #[test]
    fn eigen_residuals_and_ordering() {
        let m = CMatrix::from_rows(&[
            vec![c(2.0), C64::new(1.0, -1.0), c(0.5)],
            vec![C64::new(1.0, 1.0), c(-1.0), C64::new(0.0, 2.0)],
            vec![c(0.5), C64::new(0.0, -2.0), c(3.0)],
        ])
        .unwrap();
        let e = hermitian_eigen(&m).unwrap();
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        for (k, &lambda) in e.values.iter().enumerate() {
            let v = e.vectors.column(k);
            let mv = m.mat_vec(&v).unwrap();
            let res = mv.iter().zip(&v).map(|(x, y)| (x - y * lambda).norm()).fold(0.0, f64::max);
            assert!(res <= 1e-10, "residual {res}");
        }
        assert!(e.reconstruct().max_abs_diff(&m) < 1e-12);
        let tr: f64 = e.values.iter().sum();
        assert!((tr - 4.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let m = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eigen(&m), Err(LinalgError::NotHermitian { .. })));
    }

    #[test]
    fn trace_norm_examples() {
        let [sx, _, sz] = pauli();
        assert!((trace_norm(&sz).unwrap() - 2.0).abs() < 1e-14);
        assert!((trace_norm(&CMatrix::identity(3)).unwrap() - 3.0).abs() < 1e-14);
        let p = 0.37;
        assert!((trace_norm(&sx.scale(-p / 2.0)).unwrap() - p).abs() < 1e-14);
    }

    #[test]
    fn degenerate_and_diagonal_inputs() {
        let e = hermitian_eigen(&CMatrix::identity(4)).unwrap();
        assert_eq!(e.values, vec![1.0; 4]);
        let e = hermitian_eigen(&CMatrix::diag(&[3.0, -1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
        assert!(e.reconstruct().max_abs_diff(&CMatrix::diag(&[3.0, -1.0, 2.0])) < 1e-15);
    }
}
