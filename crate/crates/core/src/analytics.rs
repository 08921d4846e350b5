//! Closed-form densities, normalization constants and moments.
//!
//! Joint eigenvalue densities are for unordered eigenvalues, with respect to
//! Lebesgue measure on `(λ_1, …, λ_{N-1})` after eliminating `λ_N = 1 - Σλ_i`.
//! Multiply by `N!` to compare against sorted samples.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_4, LN_2, PI};
use std::sync::{Mutex, OnceLock};

use crate::ensembles::{bures_acceptance, dirichlet_sample, MeasureSpec};
use crate::error::{Error, Result};
use crate::qstate::Spectrum;
use crate::quadrature::{integrate_simplex, tanh_sinh, tanh_sinh_with_gap};
use crate::rng::RandomStream;
use crate::special::{gauss_laguerre_nodes, laguerre_square_sum, log_gamma, EULER_GAMMA};

/// How a reported value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    Quadrature,
    Asymptotic,
    MonteCarlo,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Quadrature => "quadrature",
            Method::Asymptotic => "asymptotic",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

/// Volume `π^{n-1}/(n-1)!` of the complex projective space `CP^{n-1}`.
pub fn cpn_volume(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let m = (n - 1) as f64;
    Ok((m * PI.ln() - log_gamma(m + 1.0)?).exp())
}

/// `ln C^(β)_{N,K}` for the joint eigenvalue density of the induced ensemble.
pub fn log_norm_constant(n: usize, k: usize, beta: f64) -> Result<f64> {
    if n == 0 || k < n {
        return Err(Error::InvalidParameter(format!(
            "need k >= n >= 1, got n = {n}, k = {k}"
        )));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta = {beta}")));
    }
    let (nf, kf) = (n as f64, k as f64);
    let half = 0.5 * beta;
    let mut c = log_gamma(kf * nf * half)? + nf * log_gamma(1.0 + half)?;
    for j in 0..n {
        let j = j as f64;
        c -= log_gamma((kf - j) * half)? + log_gamma(1.0 + (nf - j) * half)?;
    }
    Ok(c)
}

fn check_nonnegative(lambda: &[f64]) -> Result<()> {
    match lambda.iter().find(|l| !(**l >= 0.0)) {
        Some(bad) => Err(Error::Domain(format!("eigenvalue {bad} is negative"))),
        None => Ok(()),
    }
}

/// `∏ λ_i^a ∏_{i<j} |λ_i - λ_j|^β` in log space; zero factors are resolved
/// before any logarithm is taken.
fn power_vandermonde(lambda: &[f64], a: f64, beta: f64) -> f64 {
    let mut log_v = 0.0;
    for i in 0..lambda.len() {
        for j in i + 1..lambda.len() {
            let d = (lambda[i] - lambda[j]).abs();
            if d == 0.0 {
                return 0.0;
            }
            log_v += d.ln();
        }
    }
    let mut log_p = 0.0;
    for &l in lambda {
        if l == 0.0 {
            if a > 0.0 {
                return 0.0;
            }
            if a < 0.0 {
                return f64::INFINITY;
            }
        } else {
            log_p += l.ln();
        }
    }
    (a * log_p + beta * log_v).exp()
}

/// Normalized joint density of `P^(β)_{N,K}` at a point of the simplex given
/// as raw coordinates (any order).
pub fn joint_density_at(lambda: &[f64], k: usize, beta: f64) -> Result<f64> {
    check_nonnegative(lambda)?;
    let n = lambda.len();
    let log_c = log_norm_constant(n, k, beta)?;
    let a = 0.5 * (beta * (k as f64 - n as f64) + beta - 2.0);
    Ok(log_c.exp() * power_vandermonde(lambda, a, beta))
}

/// `C^(β)_{N,K} ∏ λ_i^{(β(K-N)+β-2)/2} ∏_{i<j} |λ_i - λ_j|^β`.
pub fn joint_eigenvalue_density(lambda: &Spectrum, n: usize, k: usize, beta: f64) -> Result<f64> {
    if lambda.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: lambda.len(),
        });
    }
    joint_density_at(lambda.values(), k, beta)
}

/// Unnormalized Bures density `∏ λ_i^{-1/2} ∏_{i<j} (λ_i - λ_j)² / (λ_i + λ_j)`;
/// `+∞` when an eigenvalue vanishes.
pub fn bures_unnormalized(lambda: &[f64]) -> Result<f64> {
    check_nonnegative(lambda)?;
    if lambda.contains(&0.0) {
        return Ok(f64::INFINITY);
    }
    let inv_sqrt: f64 = lambda.iter().map(|l| l.sqrt()).product::<f64>().recip();
    Ok(inv_sqrt * bures_acceptance(lambda))
}

/// Normalization constant together with its provenance and uncertainty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormConstant {
    pub value: f64,
    /// Zero for quadrature values.
    pub stderr: f64,
    pub method: Method,
}

/// Largest `n` with a Bures normalization constant.
pub const BURES_CONSTANT_MAX_N: usize = 5;
const BURES_MC_SEED: u64 = 0x6275_7265_735f_6d63;
const BURES_MC_SAMPLES: usize = 2_000_000;

/// `C'_n`, making the Bures joint density a probability density.
///
/// Quadrature for `n ≤ 3`; for `n = 4, 5` importance sampling from the
/// Dirichlet(1/2) law, using `∫ unnormalized = π^{n/2}/Γ(n/2) · E[acceptance]`.
/// Values are computed once per process.
pub fn bures_norm_constant(n: usize) -> Result<NormConstant> {
    static CACHE: [OnceLock<Result<NormConstant>>; BURES_CONSTANT_MAX_N + 1] =
        [const { OnceLock::new() }; BURES_CONSTANT_MAX_N + 1];
    if n == 0 || n > BURES_CONSTANT_MAX_N {
        return Err(Error::InvalidParameter(format!(
            "Bures constant available for 1 <= n <= {BURES_CONSTANT_MAX_N}, got {n}"
        )));
    }
    CACHE[n]
        .get_or_init(|| compute_bures_constant(n))
        .clone()
}

fn compute_bures_constant(n: usize) -> Result<NormConstant> {
    if n <= 3 {
        let q = integrate_simplex(n, |l| bures_unnormalized(l).unwrap_or(f64::NAN), 1e-10)?;
        return Ok(NormConstant {
            value: 1.0 / q.value,
            stderr: 0.0,
            method: Method::Quadrature,
        });
    }
    let mut stream = RandomStream::new(BURES_MC_SEED, n as u64);
    let (mut mean, mut m2) = (0.0, 0.0);
    for i in 0..BURES_MC_SAMPLES {
        let x = bures_acceptance(&dirichlet_sample(n, 0.5, &mut stream)?);
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let count = BURES_MC_SAMPLES as f64;
    let se_mean = (m2 / (count - 1.0) / count).sqrt();
    let scale = (0.5 * n as f64 * PI.ln() - log_gamma(0.5 * n as f64)?).exp();
    let integral = scale * mean;
    Ok(NormConstant {
        value: 1.0 / integral,
        stderr: se_mean / mean / integral,
        method: Method::MonteCarlo,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuresDensity {
    pub unnormalized: f64,
    /// Present for `n ≤ BURES_CONSTANT_MAX_N`.
    pub normalized: Option<f64>,
}

pub fn bures_joint_density(lambda: &Spectrum, n: usize) -> Result<BuresDensity> {
    if lambda.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: lambda.len(),
        });
    }
    let unnormalized = bures_unnormalized(lambda.values())?;
    let normalized = if n <= BURES_CONSTANT_MAX_N {
        Some(bures_norm_constant(n)?.value * unnormalized)
    } else {
        None
    };
    Ok(BuresDensity {
        unnormalized,
        normalized,
    })
}

/// Measures on `2 × 2` density matrices with a closed-form Bloch-radius law.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum N2Measure {
    /// Dirichlet(1) spectrum.
    Unitary,
    /// Dirichlet(1/2) spectrum.
    Orthogonal,
    HilbertSchmidt,
    Bures,
    /// Complex induced measure with environment dimension `K ≥ 2`.
    Induced(usize),
}

impl N2Measure {
    /// The radial law of a two-dimensional measure, when one exists.
    pub fn from_spec(spec: &MeasureSpec) -> Option<Self> {
        use crate::ensembles::Beta;
        match *spec {
            MeasureSpec::Induced {
                n: 2,
                k: 2,
                beta: Beta::Complex,
            } => Some(N2Measure::HilbertSchmidt),
            MeasureSpec::Induced {
                n: 2,
                k,
                beta: Beta::Complex,
            } if k > 2 => Some(N2Measure::Induced(k)),
            MeasureSpec::ProductDirichlet { n: 2, s: 1.0 } => Some(N2Measure::Unitary),
            MeasureSpec::ProductDirichlet { n: 2, s: 0.5 } => Some(N2Measure::Orthogonal),
            MeasureSpec::Bures { n: 2 } => Some(N2Measure::Bures),
            _ => None,
        }
    }

    pub fn label(self) -> String {
        match self {
            N2Measure::Unitary => "unitary".into(),
            N2Measure::Orthogonal => "orthogonal".into(),
            N2Measure::HilbertSchmidt => "hs".into(),
            N2Measure::Bures => "bures".into(),
            N2Measure::Induced(k) => format!("induced({k})"),
        }
    }
}

fn induced_radial_constant(k: usize) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&c) = cache.lock().expect("cache lock").get(&k) {
        return Ok(c);
    }
    let m = (k - 2) as i32;
    let q = tanh_sinh_with_gap(
        |r, gap| r * r * (gap * (0.5 + r)).powi(m),
        0.0,
        0.5,
        1e-14,
    )?;
    let c = 1.0 / q.value;
    cache.lock().expect("cache lock").insert(k, c);
    Ok(c)
}

/// Density of the Bloch radius `r = |λ_1 - 1/2|` of a random qubit state.
pub fn radial_density_n2(measure: N2Measure, r: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&r) {
        return Err(Error::Domain(format!("radius {r} outside [0, 1/2)")));
    }
    radial_density_n2_gap(measure, r, 0.5 - r)
}

/// [`radial_density_n2`] with `gap = 1/2 - r` supplied exactly, so laws that
/// diverge at the pure states stay accurate next to `r = 1/2`.
pub fn radial_density_n2_gap(measure: N2Measure, r: f64, gap: f64) -> Result<f64> {
    if !(r >= 0.0 && gap > 0.0) {
        return Err(Error::Domain(format!("radius {r} outside [0, 1/2)")));
    }
    // 1 - 4r² = 4 gap (1/2 + r)
    let one_minus_4r2 = 4.0 * gap * (0.5 + r);
    Ok(match measure {
        N2Measure::Unitary => 2.0,
        N2Measure::Orthogonal => 4.0 / (PI * one_minus_4r2.sqrt()),
        N2Measure::HilbertSchmidt => 24.0 * r * r,
        N2Measure::Bures => 32.0 * r * r / (PI * one_minus_4r2.sqrt()),
        N2Measure::Induced(k) => {
            if k < 2 {
                return Err(Error::InvalidParameter(format!(
                    "induced radial law needs K >= 2, got {k}"
                )));
            }
            induced_radial_constant(k)? * r * r * (0.25 * one_minus_4r2).powi(k as i32 - 2)
        }
    })
}

/// Density `3 cos(2α) sin(4α)` of the Schmidt angle of a random pure state on `C² ⊗ C²`.
pub fn schmidt_angle_density(alpha: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_4).contains(&alpha) {
        return Err(Error::Domain(format!("Schmidt angle {alpha} outside [0, π/4]")));
    }
    Ok(3.0 * (2.0 * alpha).cos() * (4.0 * alpha).sin())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EntanglementKind {
    Tangle,
    Concurrence,
}

/// Density of the tangle or concurrence of a random pure state on `C² ⊗ C²`.
pub fn entanglement_density_n2(kind: EntanglementKind, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{x} outside [0, 1]")));
    }
    Ok(match kind {
        EntanglementKind::Tangle => 1.5 * (1.0 - x).sqrt(),
        EntanglementKind::Concurrence => 3.0 * x * (1.0 - x * x).sqrt(),
    })
}

/// `⟨Tr ϱ^ν⟩` under a measure, with provenance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentReport {
    pub n: usize,
    pub k: usize,
    pub beta: u32,
    pub nu: f64,
    pub value: f64,
    pub method: Method,
}

/// Closed forms of `⟨Tr ϱ^ν⟩` under the Hilbert-Schmidt measure for `ν ∈ {1, 2, 3, 4}`.
pub fn hs_moment_closed_form(n: usize, nu: f64) -> Option<f64> {
    let n = n as f64;
    let n2 = n * n;
    if nu == 1.0 {
        Some(1.0)
    } else if nu == 2.0 {
        Some(2.0 * n / (n2 + 1.0))
    } else if nu == 3.0 {
        Some((5.0 * n2 + 1.0) / ((n2 + 1.0) * (n2 + 2.0)))
    } else if nu == 4.0 {
        Some((14.0 * n2 * n + 10.0 * n) / ((n2 + 1.0) * (n2 + 2.0) * (n2 + 3.0)))
    } else {
        None
    }
}

fn check_moment_args(n: usize, nu: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(nu > -1.0 && nu.is_finite()) {
        return Err(Error::Domain(format!("moment order {nu} must exceed -1")));
    }
    Ok(())
}

/// `B_{N,ν} ∫_0^∞ x^ν Σ_{m<N} L_m(x)² e^{-x} dx` with `B_{N,ν} = Γ(N²)/Γ(N²+ν)`,
/// by generalized Gauss-Laguerre quadrature with weight `x^ν e^{-x}`.
///
/// The remaining integrand is a polynomial of degree `2N - 2`, so `N` nodes
/// are exact; two node counts are compared as a guard.
pub fn hs_moment_quadrature(n: usize, nu: f64) -> Result<MomentReport> {
    check_moment_args(n, nu)?;
    let n2 = (n * n) as f64;
    let b = (log_gamma(n2)? - log_gamma(n2 + nu)?).exp();
    let integral = |count: usize| -> Result<f64> {
        Ok(gauss_laguerre_nodes(count, nu)?.integrate(|x| laguerre_square_sum(n, x)))
    };
    let coarse = integral(n + 2)?;
    let fine = integral(n + 4)?;
    let residual = (fine - coarse).abs() / fine.abs();
    if !(residual <= 1e-11) {
        return Err(Error::QuadratureFailure { residual });
    }
    Ok(MomentReport {
        n,
        k: n,
        beta: 2,
        nu,
        value: b * fine,
        method: Method::Quadrature,
    })
}

/// `⟨Tr ϱ^ν⟩` under the Hilbert-Schmidt measure on `N × N` density matrices.
pub fn hs_moment_exact(n: usize, nu: f64) -> Result<MomentReport> {
    check_moment_args(n, nu)?;
    match hs_moment_closed_form(n, nu) {
        Some(value) => Ok(MomentReport {
            n,
            k: n,
            beta: 2,
            nu,
            value,
            method: Method::ClosedForm,
        }),
        None => hs_moment_quadrature(n, nu),
    }
}

/// `⟨Tr ϱ²⟩ = (N + K)/(NK + 1)` under `P_{N,K}`.
pub fn purity_induced_exact(n: usize, k: usize) -> Result<f64> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter("n and k must be at least 1".into()));
    }
    let (n, k) = (n as f64, k as f64);
    Ok((n + k) / (n * k + 1.0))
}

/// Largest `n` accepted by [`hs_mean_entropy_exact`].
pub const ENTROPY_MAX_N: usize = 64;
const ENTROPY_STEP: f64 = 1e-4;

/// Mean von Neumann entropy under the Hilbert-Schmidt measure, as
/// `-d/dν ⟨Tr ϱ^ν⟩` at `ν = 1` (central difference, one Richardson step).
pub fn hs_mean_entropy_exact(n: usize) -> Result<f64> {
    if n == 0 || n > ENTROPY_MAX_N {
        return Err(Error::InvalidParameter(format!(
            "mean entropy available for 1 <= n <= {ENTROPY_MAX_N}, got {n}"
        )));
    }
    if n == 1 {
        return Ok(0.0);
    }
    let moment = |nu: f64| hs_moment_quadrature(n, nu).map(|m| m.value);
    let central = |h: f64| -> Result<f64> { Ok((moment(1.0 + h)? - moment(1.0 - h)?) / (2.0 * h)) };
    let h = ENTROPY_STEP;
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    Ok(-(4.0 * fine - coarse) / 3.0)
}

/// Large-`N` approximations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Asymptotics {
    /// `Γ(1+2ν) N^{1-ν} / (Γ(1+ν) Γ(2+ν))`.
    pub moment: f64,
    /// Mean Hilbert-Schmidt entropy `ln N - 1/2`.
    pub entropy: f64,
    /// Mean entropy of random pure-state probabilities `ln N - 1 + γ`.
    pub pure_entropy: f64,
}

pub fn asymptotics(n: usize, nu: f64) -> Result<Asymptotics> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(nu > -0.5) {
        return Err(Error::Domain(format!("moment order {nu} must exceed -1/2")));
    }
    let ln_n = (n as f64).ln();
    let log_moment = log_gamma(1.0 + 2.0 * nu)? - log_gamma(1.0 + nu)? - log_gamma(2.0 + nu)?
        + (1.0 - nu) * ln_n;
    Ok(Asymptotics {
        moment: log_moment.exp(),
        entropy: ln_n - 0.5,
        pure_entropy: ln_n - 1.0 + EULER_GAMMA,
    })
}

/// Exact `N = 2` averages under a measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceMeans {
    pub measure: N2Measure,
    /// Nats.
    pub mean_entropy: f64,
    pub mean_purity: f64,
    /// `1 / mean_purity`.
    pub participation: f64,
}

pub fn n2_reference_means(measure: N2Measure) -> Result<ReferenceMeans> {
    let (mean_entropy, mean_purity) = match measure {
        N2Measure::HilbertSchmidt | N2Measure::Induced(2) => (1.0 / 3.0, 0.8),
        N2Measure::Unitary => (0.5, 2.0 / 3.0),
        N2Measure::Orthogonal => (2.0 * LN_2 - 1.0, 0.75),
        N2Measure::Bures => (2.0 * LN_2 - 7.0 / 6.0, 0.875),
        N2Measure::Induced(k) => {
            return Err(Error::InvalidParameter(format!(
                "no reference means for induced({k})"
            )))
        }
    };
    Ok(ReferenceMeans {
        measure,
        mean_entropy,
        mean_purity,
        participation: 1.0 / mean_purity,
    })
}

/// Density of `x_1/(x_1 + x_2)` for independent uniform `x_1, x_2`.
pub fn uniform_rescale_density_n2(y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::Domain(format!("{y} outside [0, 1]")));
    }
    let m = if y < 0.5 { 1.0 - y } else { y };
    Ok(0.5 / (m * m))
}

/// Mean of `g(r)` under a radial law, by quadrature.
pub fn radial_expectation<G: Fn(f64) -> f64>(measure: N2Measure, g: G, tol: f64) -> Result<f64> {
    let q = tanh_sinh_with_gap(
        |r, gap| radial_density_n2_gap(measure, r, gap).unwrap_or(f64::NAN) * g(r),
        0.0,
        0.5,
        tol,
    )?;
    Ok(q.value)
}

/// Mean of `g(x)` under a tangle or concurrence density, by quadrature.
pub fn entanglement_expectation<G: Fn(f64) -> f64>(
    kind: EntanglementKind,
    g: G,
    tol: f64,
) -> Result<f64> {
    let q = tanh_sinh(
        |x| entanglement_density_n2(kind, x).unwrap_or(f64::NAN) * g(x),
        0.0,
        1.0,
        tol,
    )?;
    Ok(q.value)
}
