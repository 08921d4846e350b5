//! Domain types for quantum states and the scalar functionals of their spectra.
//!
//! Matrices are stored row-major as `Complex64`; [`ComplexMatrix::interleaved`]
//! flattens them into `(re, im)` pairs for serialization. Eigen-decompositions
//! go through `nalgebra` and are reordered so that eigenvalues are descending,
//! with ties kept in the solver's original index order.

use std::f64::consts::FRAC_PI_4;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance;

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "matrix shape {rows}x{cols} must be positive"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
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

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Row-major `(re, im)` pairs.
    pub fn interleaved(&self) -> Vec<f64> {
        self.data.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
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

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[l * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// `A A†`, Hermitian by construction (the lower triangle mirrors the upper).
    pub fn gram(&self) -> Self {
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            let ri = &self.data[i * self.cols..(i + 1) * self.cols];
            for j in i..n {
                let rj = &self.data[j * self.cols..(j + 1) * self.cols];
                let s: Complex64 = ri.iter().zip(rj).map(|(a, b)| a * b.conj()).sum();
                out[(i, j)] = s;
                out[(j, i)] = s.conj();
            }
            out[(i, i)].im = 0.0;
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max |U†U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let g = self.adjoint().matmul(self).expect("square");
        g.max_abs_diff(&Self::identity(self.rows))
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        let (rows, cols) = m.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(m[(i, j)]);
            }
        }
        Self { rows, cols, data }
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates all three invariants, including positivity via diagonalization.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        let defect = matrix.hermiticity_defect();
        if defect > tolerance::HERMITIAN {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {defect:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tolerance::TRACE || tr.im.abs() > tolerance::TRACE {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = raw_eigenvalues(&matrix)?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < -tolerance::POSITIVITY {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// For matrices that are Hermitian PSD unit-trace by construction.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square());
        debug_assert!(matrix.hermiticity_defect() <= tolerance::HERMITIAN);
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `U ϱ U†` for a unitary `U` of matching size.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        let m = u.matmul(&self.matrix)?.matmul(&u.adjoint())?;
        Ok(Self::from_trusted(hermitize(m)))
    }

    /// Eigenvalues as a [`Spectrum`], without eigenvectors.
    pub fn spectrum(&self) -> Result<Spectrum> {
        Spectrum::from_eigenvalues(raw_eigenvalues(&self.matrix)?)
    }
}

/// Symmetrizes away rounding noise in a matrix that is Hermitian in exact arithmetic.
pub(crate) fn hermitize(mut m: ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in i + 1..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    m
}

/// Unit vector in `C^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter("empty state vector".into()));
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > tolerance::TRACE {
            return Err(Error::InvalidState(format!("squared norm {norm}")));
        }
        Ok(Self { amplitudes })
    }

    /// Divides by the Euclidean norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm < tolerance::ZERO_MATRIX {
            return Err(Error::ZeroMatrix { trace: norm });
        }
        let inv = norm.sqrt().recip();
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z * inv).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Shannon entropy of the squared moduli, in nats.
    pub fn shannon_entropy(&self) -> f64 {
        self.probabilities()
            .into_iter()
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.ln())
            .sum()
    }
}

/// Pure state of an `N × K` composite system, stored as the matrix `ψ_{ik}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartitePureState {
    amplitudes: ComplexMatrix,
}

/// Subsystem removed by a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    /// First factor, dimension `N`; the result is `K × K`.
    A,
    /// Second factor, dimension `K`; the result is `N × N`.
    B,
}

impl BipartitePureState {
    pub fn new(amplitudes: ComplexMatrix) -> Result<Self> {
        let norm = amplitudes.frobenius_norm_sqr();
        if (norm - 1.0).abs() > tolerance::TRACE {
            return Err(Error::InvalidState(format!("squared norm {norm}")));
        }
        Ok(Self { amplitudes })
    }

    /// Reads a vector of length `n k` in the product basis `|i⟩⊗|k⟩` as `ψ_{ik}`.
    pub fn from_state(state: &PureState, n: usize, k: usize) -> Result<Self> {
        if state.dim() != n * k {
            return Err(Error::DimensionMismatch {
                expected: n * k,
                found: state.dim(),
            });
        }
        Self::new(ComplexMatrix::new(n, k, state.amplitudes().to_vec())?)
    }

    pub fn n(&self) -> usize {
        self.amplitudes.rows()
    }

    pub fn k(&self) -> usize {
        self.amplitudes.cols()
    }

    pub fn amplitudes(&self) -> &ComplexMatrix {
        &self.amplitudes
    }

    /// Applies `I ⊗ V` for a `K × K` matrix `V`, i.e. `ψ → ψ V`.
    pub fn apply_right(&self, v: &ComplexMatrix) -> Result<Self> {
        Self::new(self.amplitudes.matmul(v)?)
    }
}

/// Descending-sorted point of the probability simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Sorts descending (stable) and checks nonnegativity and unit sum.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty spectrum".into()));
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Domain(format!("spectrum entry {bad}")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > tolerance::TRACE {
            return Err(Error::InvalidState(format!("spectrum sums to {sum}")));
        }
        sort_descending(&mut values);
        Ok(Self { values })
    }

    /// Clamps eigenvalues within `POSITIVITY` of `[0, 1]` before validating.
    pub fn from_eigenvalues(values: Vec<f64>) -> Result<Self> {
        let mut clamped = Vec::with_capacity(values.len());
        for v in values {
            if !(-tolerance::POSITIVITY..=1.0 + tolerance::TRACE).contains(&v) {
                return Err(Error::InvalidState(format!("eigenvalue {v} outside [0, 1]")));
            }
            clamped.push(v.clamp(0.0, 1.0));
        }
        Self::new(clamped)
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            values: vec![1.0 / n as f64; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Stable descending sort; equal values keep their input order.
pub(crate) fn sort_descending(values: &mut [f64]) {
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite values"));
}

/// Eigenvalues with the matching unitary of eigenvectors (as columns).
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub spectrum: Spectrum,
    pub vectors: ComplexMatrix,
}

impl EigenSystem {
    /// `U diag(λ) U†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::diagonal(self.spectrum.values());
        let m = self
            .vectors
            .matmul(&d)
            .and_then(|m| m.matmul(&self.vectors.adjoint()))
            .expect("square factors");
        hermitize(m)
    }
}

fn raw_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if m.rows() == 1 {
        return Ok(vec![m[(0, 0)].re]);
    }
    if m.rows() == 2 {
        // closed form keeps 2x2 Monte Carlo loops cheap
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = m[(0, 1)];
        let half = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        return Ok(vec![half + r, half - r]);
    }
    let eig = nalgebra::SymmetricEigen::try_new(m.to_nalgebra(), f64::EPSILON, 10_000)
        .ok_or(Error::NonConvergence {
            residual: f64::INFINITY,
        })?;
    Ok(eig.eigenvalues.iter().copied().collect())
}

/// `A A† / tr(A A†)`.
pub fn project_hs(a: &ComplexMatrix) -> Result<DensityMatrix> {
    let g = a.gram();
    let tr = g.trace().re;
    if !(tr >= tolerance::ZERO_MATRIX) {
        return Err(Error::ZeroMatrix { trace: tr });
    }
    Ok(DensityMatrix::from_trusted(g.scale(1.0 / tr)))
}

/// Reduced density matrix after removing `traced`.
///
/// Tracing out `B` gives `ϱ^A_{ij} = Σ_k ψ_{ik} ψ*_{jk}` (size `N`);
/// tracing out `A` gives `ϱ^B_{kl} = Σ_i ψ_{ik} ψ*_{il}` (size `K`).
pub fn partial_trace(psi: &BipartitePureState, traced: Subsystem) -> DensityMatrix {
    let m = match traced {
        Subsystem::B => psi.amplitudes().gram(),
        // ϱ^B = ψᵀ ψ*, the conjugate of the Gram matrix of ψᵀ
        Subsystem::A => {
            let mut g = psi.amplitudes().adjoint().gram();
            for z in g.data.iter_mut() {
                *z = z.conj();
            }
            g
        }
    };
    DensityMatrix::from_trusted(m)
}

/// Full Hermitian eigen-decomposition with descending eigenvalues.
///
/// Degenerate eigenspaces come back with whatever orthonormal basis the
/// solver picked; no phase convention is imposed on eigenvectors.
pub fn hermitian_eigensystem(rho: &DensityMatrix) -> Result<EigenSystem> {
    let n = rho.dim();
    let eig = nalgebra::SymmetricEigen::try_new(
        rho.matrix().to_nalgebra(),
        f64::EPSILON,
        10_000,
    )
    .ok_or(Error::NonConvergence {
        residual: f64::INFINITY,
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("finite eigenvalues")
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, dst)] = eig.eigenvectors[(row, src)];
        }
    }
    let raw = EigenSystem {
        spectrum: Spectrum {
            values: values.clone(),
        },
        vectors: vectors.clone(),
    };
    let residual = raw.reconstruct().max_abs_diff(rho.matrix());
    if residual > tolerance::HERMITIAN {
        return Err(Error::NonConvergence { residual });
    }
    Ok(EigenSystem {
        spectrum: Spectrum::from_eigenvalues(values)?,
        vectors,
    })
}

/// Squared Schmidt coefficients, `min(N, K)` of them.
pub fn schmidt_spectrum(psi: &BipartitePureState) -> Result<Spectrum> {
    let reduced = if psi.n() <= psi.k() {
        partial_trace(psi, Subsystem::B)
    } else {
        partial_trace(psi, Subsystem::A)
    };
    reduced.spectrum()
}

/// Von Neumann entropy `-Σ λ ln λ` in nats, with `0 ln 0 = 0`.
pub fn entropy(s: &Spectrum) -> f64 {
    s.values()
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum::<f64>()
        .max(0.0)
}

/// `Σ λ^ν`, with `0^ν = 0` for `ν > 0`.
pub fn trace_power(s: &Spectrum, nu: f64) -> f64 {
    s.values()
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| l.powf(nu))
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PurityFunctionals {
    /// `Tr ϱ²`.
    pub purity: f64,
    /// `1 / Tr ϱ²`.
    pub participation: f64,
}

pub fn purity_functionals(s: &Spectrum) -> PurityFunctionals {
    let purity: f64 = s.values().iter().map(|l| l * l).sum();
    PurityFunctionals {
        purity,
        participation: purity.recip(),
    }
}

/// Two-level entanglement quantities of a reduced spectrum `(λ₁, λ₂)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct N2Entanglement {
    /// Bloch radius, `λ₁,₂ = 1/2 ± r`.
    pub r: f64,
    /// Schmidt angle in `[0, π/4]`.
    pub alpha: f64,
    pub tangle: f64,
    pub concurrence: f64,
}

pub fn n2_entanglement(s: &Spectrum) -> Result<N2Entanglement> {
    if s.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: s.len(),
        });
    }
    let (l1, l2) = (s.values()[0], s.values()[1]);
    let tangle = (4.0 * l1 * l2).clamp(0.0, 1.0);
    Ok(N2Entanglement {
        r: 0.5 * (l1 - l2),
        alpha: l1.sqrt().clamp(0.0, 1.0).acos().min(FRAC_PI_4),
        tangle,
        concurrence: tangle.sqrt(),
    })
}
