//! Random matrices, pure states and density matrices.
//!
//! Every sampler draws exclusively from the [`RandomStream`] it is handed, so
//! a fixed `(seed, stream)` pair reproduces its output exactly.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::qstate::{
    hermitize, partial_trace, project_hs, sort_descending, BipartitePureState, ComplexMatrix,
    DensityMatrix, PureState, Spectrum, Subsystem,
};
use crate::rng::RandomStream;
use crate::special::gauss_laguerre_nodes;
use crate::tolerance;

/// Largest dimension accepted by the rejection samplers (Bures and `β = 4`).
pub const REJECTION_MAX_N: usize = 6;

/// Consecutive rejections after which a rejection sampler reports
/// [`Error::EfficiencyFailure`].
pub const REJECTION_WINDOW: u64 = 1_000_000;

/// Dyson index of the symmetry class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Beta {
    Real = 1,
    Complex = 2,
    Quaternion = 4,
}

impl Beta {
    pub fn value(self) -> f64 {
        self as u8 as f64
    }
}

impl TryFrom<u32> for Beta {
    type Error = Error;
    fn try_from(b: u32) -> Result<Self> {
        match b {
            1 => Ok(Beta::Real),
            2 => Ok(Beta::Complex),
            4 => Ok(Beta::Quaternion),
            other => Err(Error::InvalidParameter(format!("beta must be 1, 2 or 4, got {other}"))),
        }
    }
}

/// Measure on `N × N` density matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeasureSpec {
    /// Reduction of a random pure state on `N × K` (or its real/quaternionic analogue).
    Induced { n: usize, k: usize, beta: Beta },
    /// Dirichlet(`s`) spectrum with Haar eigenvectors.
    ProductDirichlet { n: usize, s: f64 },
    /// Bures spectrum with Haar eigenvectors.
    Bures { n: usize },
}

impl MeasureSpec {
    pub fn hilbert_schmidt(n: usize) -> Self {
        MeasureSpec::Induced {
            n,
            k: n,
            beta: Beta::Complex,
        }
    }

    pub fn unitary(n: usize) -> Self {
        MeasureSpec::ProductDirichlet { n, s: 1.0 }
    }

    pub fn orthogonal(n: usize) -> Self {
        MeasureSpec::ProductDirichlet { n, s: 0.5 }
    }

    pub fn n(&self) -> usize {
        match *self {
            MeasureSpec::Induced { n, .. }
            | MeasureSpec::ProductDirichlet { n, .. }
            | MeasureSpec::Bures { n } => n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n() == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        match *self {
            MeasureSpec::Induced { n, k, beta } => {
                if k == 0 {
                    return Err(Error::InvalidParameter("k must be at least 1".into()));
                }
                if beta == Beta::Quaternion && (k < n || n > REJECTION_MAX_N) {
                    return Err(Error::InvalidParameter(format!(
                        "beta = 4 needs k >= n and n <= {REJECTION_MAX_N}"
                    )));
                }
            }
            MeasureSpec::ProductDirichlet { s, .. } => {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::InvalidParameter(format!("Dirichlet s = {s}")));
                }
            }
            MeasureSpec::Bures { n } => {
                if n > REJECTION_MAX_N {
                    return Err(Error::InvalidParameter(format!(
                        "Bures sampler supports n <= {REJECTION_MAX_N}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Eigenvalues of one random density matrix, skipping eigenvectors where
    /// the measure factorizes.
    pub fn sample_spectrum(&self, stream: &mut RandomStream) -> Result<Spectrum> {
        match *self {
            MeasureSpec::Induced {
                n,
                k,
                beta: Beta::Quaternion,
            } => beta_spectrum(n, k, Beta::Quaternion, stream),
            MeasureSpec::Induced { n, k, beta } => {
                induced_density_matrix(n, k, beta, stream)?.spectrum()
            }
            MeasureSpec::ProductDirichlet { n, s } => dirichlet_spectrum(n, s, stream),
            MeasureSpec::Bures { n } => bures_spectrum(n, stream),
        }
    }

    pub fn sample_density_matrix(&self, stream: &mut RandomStream) -> Result<DensityMatrix> {
        match *self {
            MeasureSpec::Induced {
                n,
                k,
                beta: Beta::Quaternion,
            } => {
                let spectrum = beta_spectrum(n, k, Beta::Quaternion, stream)?;
                rotate_spectrum(&spectrum, stream)
            }
            MeasureSpec::Induced { n, k, beta } => induced_density_matrix(n, k, beta, stream),
            MeasureSpec::ProductDirichlet { n, s } => product_measure_density_matrix(n, s, stream),
            MeasureSpec::Bures { n } => bures_density_matrix(n, stream),
        }
    }
}

fn complex_normal(stream: &mut RandomStream) -> Complex64 {
    let re: f64 = StandardNormal.sample(stream);
    let im: f64 = StandardNormal.sample(stream);
    Complex64::new(re, im)
}

/// Ginibre matrix. `β = 2`: independent standard normal real and imaginary
/// parts (`E|a|² = 2`); `β = 1`: real standard normal entries.
pub fn gaussian_matrix(
    rows: usize,
    cols: usize,
    beta: Beta,
    stream: &mut RandomStream,
) -> Result<ComplexMatrix> {
    let data = match beta {
        Beta::Complex => (0..rows * cols).map(|_| complex_normal(stream)).collect(),
        Beta::Real => (0..rows * cols)
            .map(|_| Complex64::new(StandardNormal.sample(stream), 0.0))
            .collect(),
        Beta::Quaternion => {
            return Err(Error::InvalidParameter(
                "no quaternionic Ginibre matrices; use beta_spectrum".into(),
            ))
        }
    };
    ComplexMatrix::new(rows, cols, data)
}

/// Haar-distributed unitary from the QR factorization of a complex Ginibre
/// matrix, with column `j` of `Q` multiplied by `R_jj / |R_jj|` so that the
/// factorization has a positive diagonal.
pub fn haar_unitary(n: usize, stream: &mut RandomStream) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let g = gaussian_matrix(n, n, Beta::Complex, stream)?;
    let qr = g.to_nalgebra().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        let phase = if norm > 0.0 {
            d / norm
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    Ok(ComplexMatrix::from_nalgebra(&q))
}

/// Hurwitz angles of a pure state in `C^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct HurwitzAngles {
    /// `ϑ_1, …, ϑ_{n-1}` in `[0, π/2]`.
    pub thetas: Vec<f64>,
    /// `φ_1, …, φ_{n-1}` in `[0, 2π)`.
    pub phis: Vec<f64>,
}

impl HurwitzAngles {
    /// `ϑ_k = arcsin(ξ_k^{1/(2k)})`, so that uniform `ξ_k` give the
    /// unitarily invariant measure.
    pub fn from_uniforms(xis: &[f64], phis: &[f64]) -> Result<Self> {
        if xis.len() != phis.len() {
            return Err(Error::DimensionMismatch {
                expected: xis.len(),
                found: phis.len(),
            });
        }
        if let Some(&bad) = xis.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Domain(format!("xi = {bad} outside [0, 1]")));
        }
        let thetas = xis
            .iter()
            .enumerate()
            .map(|(i, &xi)| xi.powf(1.0 / (2.0 * (i + 1) as f64)).asin())
            .collect();
        Ok(Self {
            thetas,
            phis: phis.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.thetas.len() + 1
    }

    /// `(cos ϑ_{n-1}, sin ϑ_{n-1} cos ϑ_{n-2} e^{iφ_{n-1}}, …,
    /// sin ϑ_{n-1} ⋯ sin ϑ_1 e^{iφ_1})`.
    pub fn to_state(&self) -> PureState {
        let m = self.thetas.len();
        let mut amps = Vec::with_capacity(m + 1);
        let mut sines = 1.0;
        for j in 0..=m {
            // component j uses ϑ_{m-j} and φ_{m-j+1}
            let modulus = if j < m {
                sines * self.thetas[m - 1 - j].cos()
            } else {
                sines
            };
            let phase = if j == 0 { 0.0 } else { self.phis[m - j] };
            amps.push(Complex64::from_polar(modulus, phase));
            if j < m {
                sines *= self.thetas[m - 1 - j].sin();
            }
        }
        PureState::normalized(amps).expect("unit modulus by construction")
    }
}

/// Random pure state through the Hurwitz parametrization.
pub fn pure_state_hurwitz(n: usize, stream: &mut RandomStream) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidParameter("Hurwitz states need n >= 2".into()));
    }
    let xis: Vec<f64> = (1..n).map(|_| stream.random::<f64>()).collect();
    let phis: Vec<f64> = (1..n).map(|_| TAU * stream.random::<f64>()).collect();
    Ok(HurwitzAngles::from_uniforms(&xis, &phis)?.to_state())
}

/// Random pure state as a normalized vector of complex Gaussians.
pub fn pure_state_gaussian(m: usize, stream: &mut RandomStream) -> Result<PureState> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    loop {
        let amps: Vec<Complex64> = (0..m).map(|_| complex_normal(stream)).collect();
        match PureState::normalized(amps) {
            Ok(state) => return Ok(state),
            Err(Error::ZeroMatrix { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// `A A† / tr(A A†)` with `A` an `n × k` Ginibre matrix.
pub fn induced_density_matrix(
    n: usize,
    k: usize,
    beta: Beta,
    stream: &mut RandomStream,
) -> Result<DensityMatrix> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter("n and k must be at least 1".into()));
    }
    loop {
        let a = gaussian_matrix(n, k, beta, stream)?;
        match project_hs(&a) {
            Ok(rho) => return Ok(rho),
            Err(Error::ZeroMatrix { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Reduction of a random pure state on `C^{nk}` over the `k`-dimensional factor.
pub fn induced_via_purification(n: usize, k: usize, stream: &mut RandomStream) -> Result<DensityMatrix> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter("n and k must be at least 1".into()));
    }
    let state = pure_state_gaussian(n * k, stream)?;
    let psi = BipartitePureState::from_state(&state, n, k)?;
    Ok(partial_trace(&psi, Subsystem::B))
}

/// Dirichlet(`s`) point of the simplex in draw order (unsorted).
pub fn dirichlet_sample(n: usize, s: f64, stream: &mut RandomStream) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("Dirichlet s = {s}")));
    }
    let gamma = Gamma::new(s, 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    loop {
        let draws: Vec<f64> = (0..n).map(|_| gamma.sample(stream)).collect();
        let sum: f64 = draws.iter().sum();
        if sum > 0.0 {
            return Ok(draws.into_iter().map(|g| g / sum).collect());
        }
    }
}

/// Dirichlet(`s`) spectrum, sorted descending.
pub fn dirichlet_spectrum(n: usize, s: f64, stream: &mut RandomStream) -> Result<Spectrum> {
    let mut values = dirichlet_sample(n, s, stream)?;
    sort_descending(&mut values);
    Ok(trusted_spectrum(values))
}

fn trusted_spectrum(values: Vec<f64>) -> Spectrum {
    Spectrum::new(values).expect("normalized nonnegative values")
}

/// `U diag(λ) U†` with `U` Haar.
pub fn rotate_spectrum(spectrum: &Spectrum, stream: &mut RandomStream) -> Result<DensityMatrix> {
    let u = haar_unitary(spectrum.len(), stream)?;
    let d = ComplexMatrix::diagonal(spectrum.values());
    let m = u.matmul(&d)?.matmul(&u.adjoint())?;
    Ok(DensityMatrix::from_trusted(hermitize(m)))
}

/// Dirichlet(`s`) spectrum rotated by a Haar unitary.
pub fn product_measure_density_matrix(
    n: usize,
    s: f64,
    stream: &mut RandomStream,
) -> Result<DensityMatrix> {
    let spectrum = dirichlet_spectrum(n, s, stream)?;
    rotate_spectrum(&spectrum, stream)
}

/// Acceptance probability `∏_{i<j} (λ_i - λ_j)² / (λ_i + λ_j)` for a
/// Dirichlet(1/2) proposal; each factor is at most `|λ_i - λ_j| ≤ 1`.
pub fn bures_acceptance(lambda: &[f64]) -> f64 {
    let mut p = 1.0;
    for i in 0..lambda.len() {
        for j in i + 1..lambda.len() {
            let sum = lambda[i] + lambda[j];
            if sum <= 0.0 {
                return 0.0;
            }
            let d = lambda[i] - lambda[j];
            p *= d * d / sum;
        }
    }
    p.clamp(0.0, 1.0)
}

/// Acceptance probability `∏_{i<j} |λ_i - λ_j|^β`.
pub fn vandermonde_acceptance(lambda: &[f64], beta: f64) -> f64 {
    let mut p = 1.0;
    for i in 0..lambda.len() {
        for j in i + 1..lambda.len() {
            p *= (lambda[i] - lambda[j]).abs().powf(beta);
        }
    }
    p.clamp(0.0, 1.0)
}

/// `max ∏_{i<j} |λ_i - λ_j|` over the `n`-component simplex.
///
/// `log ∏|Δ|` is concave on each ordered chamber, so the maximizer is unique up
/// to permutation: `0` together with the zeros of `L^{(1)}_{n-1}` scaled to
/// unit sum.
pub fn vandermonde_max(n: usize) -> Result<f64> {
    static CACHE: [OnceLock<f64>; REJECTION_MAX_N + 1] = [const { OnceLock::new() }; REJECTION_MAX_N + 1];
    if n <= 2 {
        return Ok(1.0);
    }
    if let Some(&m) = CACHE.get(n).and_then(|c| c.get()) {
        return Ok(m);
    }
    let zeros = gauss_laguerre_nodes(n - 1, 1.0)?.nodes;
    let sum: f64 = zeros.iter().sum();
    let mut point: Vec<f64> = zeros.iter().map(|z| z / sum).collect();
    point.push(0.0);
    let m = vandermonde_acceptance(&point, 1.0);
    if let Some(c) = CACHE.get(n) {
        let _ = c.set(m);
    }
    Ok(m)
}

/// Bound used to rescale acceptance ratios; slightly above the computed
/// maximum so rounding in the maximizer cannot push ratios past 1.
fn envelope_bound(n: usize, beta: f64) -> Result<f64> {
    Ok(vandermonde_max(n)?.powf(beta) * (1.0 + 1e-12))
}

/// Exact rejection from a Dirichlet(`s`) envelope; `ratio` must not exceed 1.
fn rejection_sample<F>(n: usize, s: f64, ratio: F, stream: &mut RandomStream) -> Result<Spectrum>
where
    F: Fn(&[f64]) -> f64,
{
    let mut proposals = 0u64;
    loop {
        let proposal = dirichlet_sample(n, s, stream)?;
        proposals += 1;
        let p = ratio(&proposal);
        if !(0.0..=1.0 + 1e-9).contains(&p) {
            return Err(Error::InvalidState(format!(
                "acceptance ratio {p} outside [0, 1] at {proposal:?}"
            )));
        }
        if stream.random::<f64>() < p {
            let mut values = proposal;
            sort_descending(&mut values);
            return Ok(trusted_spectrum(values));
        }
        if proposals == REJECTION_WINDOW {
            return Err(Error::EfficiencyFailure {
                accepted: 0,
                proposals,
            });
        }
    }
}

/// Spectrum distributed by the Bures measure, by exact rejection from a
/// Dirichlet(1/2) envelope with ratio `bures_acceptance / vandermonde_max`.
pub fn bures_spectrum(n: usize, stream: &mut RandomStream) -> Result<Spectrum> {
    if n == 0 || n > REJECTION_MAX_N {
        return Err(Error::InvalidParameter(format!(
            "Bures sampler supports 1 <= n <= {REJECTION_MAX_N}, got {n}"
        )));
    }
    if n == 1 {
        return Ok(trusted_spectrum(vec![1.0]));
    }
    // bures_acceptance ≤ ∏|Δ| since |λ_i - λ_j| ≤ λ_i + λ_j
    let bound = envelope_bound(n, 1.0)?;
    rejection_sample(n, 0.5, |l| bures_acceptance(l) / bound, stream)
}

pub fn bures_density_matrix(n: usize, stream: &mut RandomStream) -> Result<DensityMatrix> {
    let spectrum = bures_spectrum(n, stream)?;
    rotate_spectrum(&spectrum, stream)
}

/// Dirichlet parameter of the envelope for the `β`-ensemble: `β(K-N)/2 + β/2`.
pub fn beta_envelope_s(n: usize, k: usize, beta: Beta) -> f64 {
    let b = beta.value();
    0.5 * b * (k as f64 - n as f64) + 0.5 * b
}

/// Spectrum of the `β`-generalized induced ensemble `P^(β)_{N,K}`.
///
/// `β = 2` and `β = 1` reduce complex resp. real Ginibre matrices; `β = 4`
/// rejects Dirichlet proposals with probability `∏|λ_i - λ_j|^4 / vandermonde_max^4`.
pub fn beta_spectrum(n: usize, k: usize, beta: Beta, stream: &mut RandomStream) -> Result<Spectrum> {
    if n == 0 || k < n {
        return Err(Error::InvalidParameter(format!(
            "beta_spectrum needs k >= n >= 1, got n = {n}, k = {k}"
        )));
    }
    match beta {
        Beta::Complex | Beta::Real => induced_density_matrix(n, k, beta, stream)?.spectrum(),
        Beta::Quaternion => {
            if n > REJECTION_MAX_N {
                return Err(Error::InvalidParameter(format!(
                    "beta = 4 sampler supports n <= {REJECTION_MAX_N}"
                )));
            }
            if n == 1 {
                return Ok(trusted_spectrum(vec![1.0]));
            }
            let s = beta_envelope_s(n, k, beta);
            let bound = envelope_bound(n, 4.0)?;
            rejection_sample(n, s, |l| vandermonde_acceptance(l, 4.0) / bound, stream)
        }
    }
}

/// Divides nonnegative values by their sum and sorts descending.
pub fn rescale_to_simplex(values: &[f64]) -> Result<Spectrum> {
    if let Some(&bad) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("negative or non-finite value {bad}")));
    }
    let sum: f64 = values.iter().sum();
    if !(sum > tolerance::ZERO_MATRIX) {
        return Err(Error::ZeroSum);
    }
    let mut scaled: Vec<f64> = values.iter().map(|v| v / sum).collect();
    sort_descending(&mut scaled);
    Spectrum::new(scaled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{purity_functionals, schmidt_spectrum};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_6;

    fn mean_std(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn gaussian_moments_complex() {
        let mut st = RandomStream::new(1, 0);
        let mut re = Vec::new();
        let mut sq = Vec::new();
        for _ in 0..25_000 {
            let a = gaussian_matrix(2, 2, Beta::Complex, &mut st).unwrap();
            for z in a.as_slice() {
                re.push(z.re);
                sq.push(z.norm_sqr());
            }
        }
        let (m, se) = mean_std(&re);
        assert!(m.abs() < 3.0 * se, "mean {m} ± {se}");
        let (m, se) = mean_std(&sq);
        assert!((m - 2.0).abs() < 3.0 * se, "E|a|² {m} ± {se}");
    }

    #[test]
    fn gaussian_variance_real() {
        let mut st = RandomStream::new(2, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| {
                let a = gaussian_matrix(1, 1, Beta::Real, &mut st).unwrap();
                assert_eq!(a[(0, 0)].im, 0.0);
                a[(0, 0)].re
            })
            .collect();
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let (m, se) = mean_std(&sq);
        assert!((m - 1.0).abs() < 3.0 * se, "var {m} ± {se}");
    }

    #[test]
    fn gaussian_determinism() {
        let a = gaussian_matrix(3, 2, Beta::Complex, &mut RandomStream::new(42, 0)).unwrap();
        let b = gaussian_matrix(3, 2, Beta::Complex, &mut RandomStream::new(42, 0)).unwrap();
        assert_eq!(a, b);
        assert!(gaussian_matrix(2, 2, Beta::Quaternion, &mut RandomStream::new(0, 0)).is_err());
    }

    #[test]
    fn haar_scalar_phase_mean_zero() {
        let mut st = RandomStream::new(3, 0);
        let n = 100_000;
        let (mut sr, mut si) = (0.0, 0.0);
        for _ in 0..n {
            let u = haar_unitary(1, &mut st).unwrap();
            assert_abs_diff_eq!(u[(0, 0)].norm(), 1.0, epsilon = 1e-12);
            sr += u[(0, 0)].re;
            si += u[(0, 0)].im;
        }
        // each component has variance 1/2
        let se = (0.5 / n as f64).sqrt();
        assert!((sr / n as f64).abs() < 3.0 * se);
        assert!((si / n as f64).abs() < 3.0 * se);
    }

    #[test]
    fn haar_unitarity() {
        let mut st = RandomStream::new(4, 0);
        for n in 1..=8 {
            let u = haar_unitary(n, &mut st).unwrap();
            assert!(u.unitarity_defect() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn haar_fourth_moment() {
        // E|U_11|⁴ = 2 / (n (n+1)) for Haar U(n); biased phase conventions miss it
        // on the diagonal entry, so check U_11 and U_22.
        let mut st = RandomStream::new(0, 0);
        let n = 3;
        let draws = 200_000;
        let mut d1 = Vec::with_capacity(draws);
        let mut d2 = Vec::with_capacity(draws);
        let mut phase = Complex64::new(0.0, 0.0);
        for _ in 0..draws {
            let u = haar_unitary(n, &mut st).unwrap();
            d1.push(u[(0, 0)].norm_sqr().powi(2));
            d2.push(u[(1, 1)].norm_sqr().powi(2));
            phase += u[(0, 0)] / u[(0, 0)].norm();
        }
        let expected = 2.0 / (n * (n + 1)) as f64;
        for d in [d1, d2] {
            let (m, se) = mean_std(&d);
            assert!((m - expected).abs() < 3.5 * se, "{m} ± {se} vs {expected}");
        }
        // diagonal phases are uniform
        let se = (0.5 / draws as f64).sqrt();
        assert!((phase.re / draws as f64).abs() < 3.5 * se);
        assert!((phase.im / draws as f64).abs() < 3.5 * se);
    }

    #[test]
    fn hurwitz_boundary_and_hand_values() {
        let s = HurwitzAngles::from_uniforms(&[1.0], &[0.7]).unwrap().to_state();
        assert_abs_diff_eq!(s.amplitudes()[0].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            (s.amplitudes()[1] - Complex64::from_polar(1.0, 0.7)).norm(),
            0.0,
            epsilon = 1e-15
        );

        let angles = HurwitzAngles::from_uniforms(&[0.25], &[0.0]).unwrap();
        assert_abs_diff_eq!(angles.thetas[0], FRAC_PI_6, epsilon = 1e-15);
        assert_abs_diff_eq!(angles.to_state().probabilities()[0], 0.75, epsilon = 1e-15);
    }

    #[test]
    fn hurwitz_four_component_layout() {
        let angles = HurwitzAngles {
            thetas: vec![0.3, 0.5, 0.9],
            phis: vec![0.1, 0.2, 0.4],
        };
        let s = angles.to_state();
        let (t1, t2, t3) = (0.3f64, 0.5f64, 0.9f64);
        let expected = [
            Complex64::new(t3.cos(), 0.0),
            Complex64::from_polar(t3.sin() * t2.cos(), 0.4),
            Complex64::from_polar(t3.sin() * t2.sin() * t1.cos(), 0.2),
            Complex64::from_polar(t3.sin() * t2.sin() * t1.sin(), 0.1),
        ];
        for (a, b) in s.amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn gaussian_state_single_component() {
        let s = pure_state_gaussian(1, &mut RandomStream::new(6, 0)).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn induced_scalar_and_purity() {
        let mut st = RandomStream::new(7, 0);
        let rho = induced_density_matrix(1, 1, Beta::Complex, &mut st).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, 1.0, epsilon = 1e-15);

        for (k, expected) in [(2usize, 0.8), (4, 2.0 / 3.0)] {
            let ps: Vec<f64> = (0..100_000)
                .map(|_| {
                    let rho = induced_density_matrix(2, k, Beta::Complex, &mut st).unwrap();
                    purity_functionals(&rho.spectrum().unwrap()).purity
                })
                .collect();
            let (m, se) = mean_std(&ps);
            assert!((m - expected).abs() < 3.0 * se, "k={k}: {m} ± {se}");
        }
    }

    #[test]
    fn purification_shares_schmidt_values() {
        let mut st = RandomStream::new(8, 0);
        let state = pure_state_gaussian(6, &mut st).unwrap();
        let psi = BipartitePureState::from_state(&state, 2, 3).unwrap();
        let a = partial_trace(&psi, Subsystem::B).spectrum().unwrap();
        let b = partial_trace(&psi, Subsystem::A).spectrum().unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(a.values()[i], b.values()[i], epsilon = 1e-12);
        }
        assert!(b.values()[2] < 1e-12);
        assert_eq!(schmidt_spectrum(&psi).unwrap().len(), 2);

        let rho = induced_via_purification(1, 4, &mut st).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn dirichlet_large_s_concentrates() {
        let s = dirichlet_spectrum(4, 1e4, &mut RandomStream::new(9, 0)).unwrap();
        for &l in s.values() {
            assert!((l - 0.25).abs() < 0.02, "{l}");
        }
    }

    #[test]
    fn product_measure_purities() {
        let mut st = RandomStream::new(10, 0);
        for (s, expected) in [(1.0, 2.0 / 3.0), (0.5, 0.75)] {
            let ps: Vec<f64> = (0..100_000)
                .map(|_| {
                    let rho = product_measure_density_matrix(2, s, &mut st).unwrap();
                    purity_functionals(&rho.spectrum().unwrap()).purity
                })
                .collect();
            let (m, se) = mean_std(&ps);
            assert!((m - expected).abs() < 3.0 * se, "s={s}: {m} ± {se}");
        }
    }

    #[test]
    fn acceptance_hand_values() {
        assert_abs_diff_eq!(bures_acceptance(&[0.9, 0.1]), 0.64, epsilon = 1e-15);
        assert_eq!(bures_acceptance(&[0.5, 0.5]), 0.0);
        assert_eq!(bures_acceptance(&[1.0, 0.0, 0.0]), 0.0);
        assert_abs_diff_eq!(
            vandermonde_acceptance(&[0.9, 0.1], 4.0),
            0.4096,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(beta_envelope_s(2, 2, Beta::Quaternion), 2.0);
        assert_abs_diff_eq!(beta_envelope_s(2, 3, Beta::Real), 1.0);
    }

    #[test]
    fn vandermonde_max_values() {
        assert_eq!(vandermonde_max(2).unwrap(), 1.0);
        // (1/2 + 1/√12, 1/2 - 1/√12, 0)
        assert_abs_diff_eq!(vandermonde_max(3).unwrap(), 1.0 / (6.0 * 3f64.sqrt()), epsilon = 1e-15);
        assert_abs_diff_eq!(vandermonde_max(4).unwrap(), 1.0 / 1728.0, epsilon = 1e-16);
        // random search never beats the bound
        let mut st = RandomStream::new(31, 0);
        for n in 3..=REJECTION_MAX_N {
            let m = vandermonde_max(n).unwrap();
            for _ in 0..20_000 {
                let l = dirichlet_sample(n, 0.7, &mut st).unwrap();
                assert!(vandermonde_acceptance(&l, 1.0) <= m * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn rejection_practical_up_to_cap() {
        let mut st = RandomStream::new(32, 0);
        for n in 1..=REJECTION_MAX_N {
            bures_spectrum(n, &mut st).unwrap();
            beta_spectrum(n, n, Beta::Quaternion, &mut st).unwrap();
        }
    }

    #[test]
    fn bures_outputs_valid_and_purity() {
        let mut st = RandomStream::new(11, 0);
        let rho = bures_density_matrix(3, &mut st).unwrap();
        DensityMatrix::new(rho.into_matrix()).unwrap();
        let ps: Vec<f64> = (0..100_000)
            .map(|_| purity_functionals(&bures_spectrum(2, &mut st).unwrap()).purity)
            .collect();
        let (m, se) = mean_std(&ps);
        assert!((m - 0.875).abs() < 3.0 * se, "{m} ± {se}");
        assert!(bures_spectrum(7, &mut st).is_err());
    }

    #[test]
    fn beta_spectrum_preconditions() {
        let mut st = RandomStream::new(12, 0);
        assert!(beta_spectrum(3, 2, Beta::Complex, &mut st).is_err());
        assert!(beta_spectrum(7, 7, Beta::Quaternion, &mut st).is_err());
        let s = beta_spectrum(3, 3, Beta::Quaternion, &mut st).unwrap();
        assert_eq!(s.len(), 3);
        assert_abs_diff_eq!(s.values().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rescale_examples() {
        assert_eq!(rescale_to_simplex(&[2.0, 2.0]).unwrap().values(), &[0.5, 0.5]);
        assert_eq!(rescale_to_simplex(&[1.0, 3.0]).unwrap().values(), &[0.75, 0.25]);
        assert_eq!(rescale_to_simplex(&[0.0, 0.0]).unwrap_err(), Error::ZeroSum);
        assert!(rescale_to_simplex(&[-1.0, 2.0]).is_err());
    }

    #[test]
    fn measure_validation() {
        assert!(MeasureSpec::ProductDirichlet { n: 2, s: 0.0 }.validate().is_err());
        assert!(MeasureSpec::Bures { n: 0 }.validate().is_err());
        assert!(MeasureSpec::Induced {
            n: 3,
            k: 2,
            beta: Beta::Quaternion
        }
        .validate()
        .is_err());
        assert!(MeasureSpec::hilbert_schmidt(3).validate().is_ok());
        assert_eq!(Beta::try_from(3).unwrap_err(), Error::InvalidParameter("beta must be 1, 2 or 4, got 3".into()));
    }

    #[test]
    fn samplers_are_deterministic() {
        let specs = [
            MeasureSpec::hilbert_schmidt(3),
            MeasureSpec::Induced { n: 2, k: 3, beta: Beta::Real },
            MeasureSpec::Induced { n: 2, k: 2, beta: Beta::Quaternion },
            MeasureSpec::orthogonal(3),
            MeasureSpec::Bures { n: 3 },
        ];
        for spec in specs {
            let a = spec.sample_density_matrix(&mut RandomStream::new(99, 5)).unwrap();
            let b = spec.sample_density_matrix(&mut RandomStream::new(99, 5)).unwrap();
            assert_eq!(a, b, "{spec:?}");
            DensityMatrix::new(a.into_matrix()).unwrap();
        }
    }
}
