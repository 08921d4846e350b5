//! Monte Carlo estimation, histograms and goodness-of-fit tests.

use std::f64::consts::PI;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::analytics::{
    hs_mean_entropy_exact, hs_moment_exact, n2_reference_means, purity_induced_exact,
    radial_expectation, N2Measure, ENTROPY_MAX_N,
};
use crate::ensembles::{Beta, MeasureSpec};
use crate::error::{Error, Result};
use crate::qstate::{entropy, n2_entanglement, purity_functionals, trace_power, Spectrum};
use crate::quadrature::tanh_sinh_with_gap;
use crate::rng::RandomStream;

/// Smallest sample count accepted by [`mc_estimate`].
pub const MIN_SAMPLES: u64 = 100;

/// Spectral functional averaged by [`mc_estimate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Functional {
    /// Von Neumann entropy in nats.
    Entropy,
    /// `Tr ϱ²`.
    Purity,
    /// `1/⟨Tr ϱ²⟩`, reported together with `⟨1/Tr ϱ²⟩`.
    Participation,
    /// `4 λ₁ λ₂`; two-level spectra only.
    Tangle,
    /// `2 √(λ₁ λ₂)`; two-level spectra only.
    Concurrence,
    /// `Tr ϱ^ν`.
    TracePower(f64),
}

impl Functional {
    pub fn label(&self) -> String {
        match self {
            Functional::Entropy => "entropy".into(),
            Functional::Purity => "purity".into(),
            Functional::Participation => "participation".into(),
            Functional::Tangle => "tangle".into(),
            Functional::Concurrence => "concurrence".into(),
            Functional::TracePower(nu) => format!("trace_power({nu})"),
        }
    }

    /// Per-sample value; participation samples the purity.
    pub fn evaluate(&self, s: &Spectrum) -> Result<f64> {
        Ok(match *self {
            Functional::Entropy => entropy(s),
            Functional::Purity | Functional::Participation => purity_functionals(s).purity,
            Functional::Tangle => n2_entanglement(s)?.tangle,
            Functional::Concurrence => n2_entanglement(s)?.concurrence,
            Functional::TracePower(nu) => trace_power(s, nu),
        })
    }

    /// Exact expectation under `measure`, where a closed form or quadrature exists.
    pub fn exact_value(&self, measure: &MeasureSpec) -> Option<f64> {
        if let Some(m) = N2Measure::from_spec(measure) {
            let radial = |g: &dyn Fn(f64) -> f64| radial_expectation(m, g, 1e-12).ok();
            return match *self {
                Functional::Entropy => match n2_reference_means(m) {
                    Ok(means) => Some(means.mean_entropy),
                    Err(_) => radial(&|r| {
                        let h = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
                        h(0.5 + r) + h(0.5 - r)
                    }),
                },
                Functional::Purity => radial(&|r| 0.5 + 2.0 * r * r),
                Functional::Participation => radial(&|r| 0.5 + 2.0 * r * r).map(f64::recip),
                Functional::Tangle => radial(&|r| 1.0 - 4.0 * r * r),
                Functional::Concurrence => radial(&|r| (1.0 - 4.0 * r * r).max(0.0).sqrt()),
                Functional::TracePower(nu) => {
                    radial(&|r| (0.5 + r).powf(nu) + if r < 0.5 { (0.5 - r).powf(nu) } else { 0.0 })
                }
            };
        }
        let MeasureSpec::Induced {
            n,
            k,
            beta: Beta::Complex,
        } = *measure
        else {
            return None;
        };
        match *self {
            Functional::Purity => purity_induced_exact(n, k).ok(),
            Functional::Participation => purity_induced_exact(n, k).ok().map(f64::recip),
            Functional::TracePower(2.0) => purity_induced_exact(n, k).ok(),
            Functional::TracePower(nu) if k == n => hs_moment_exact(n, nu).ok().map(|m| m.value),
            Functional::Entropy if k == n && n <= ENTROPY_MAX_N => hs_mean_entropy_exact(n).ok(),
            _ => None,
        }
    }
}

/// Mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanValue {
    pub mean: f64,
    pub stderr: f64,
}

/// Welford accumulator; partial results merge exactly in a fixed order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunningMean {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningMean {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / total as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.count as f64 * w;
        self.count = total;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation divided by `√count`.
    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        (self.m2 / (n - 1.0) / n).sqrt()
    }

    pub fn value(&self) -> MeanValue {
        MeanValue {
            mean: self.mean,
            stderr: self.stderr(),
        }
    }
}

/// Runs `work(quota, stream)` on `workers` threads, worker `w` drawing from
/// `RandomStream(seed, w)`, and returns the results in worker order.
fn fan_out<A, F>(samples: u64, workers: usize, seed: u64, work: F) -> Result<Vec<A>>
where
    A: Send,
    F: Fn(u64, &mut RandomStream) -> Result<A> + Sync,
{
    if workers == 0 {
        return Err(Error::InvalidParameter("workers must be at least 1".into()));
    }
    let w = workers as u64;
    let quota = |i: u64| samples / w + u64::from(i < samples % w);
    if workers == 1 {
        return Ok(vec![work(samples, &mut RandomStream::new(seed, 0))?]);
    }
    let results: Vec<Result<A>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..w)
            .map(|i| {
                let work = &work;
                scope.spawn(move || work(quota(i), &mut RandomStream::new(seed, i)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    results.into_iter().collect()
}

/// `samples` draws of `f`, concatenated in worker order.
pub fn mc_collect<T, F>(samples: u64, workers: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RandomStream) -> Result<T> + Sync,
{
    let parts = fan_out(samples, workers, seed, |quota, stream| {
        (0..quota).map(|_| f(stream)).collect::<Result<Vec<T>>>()
    })?;
    Ok(parts.into_iter().flatten().collect())
}

/// Mean and standard error of `f` over `samples` draws.
pub fn mc_mean<F>(samples: u64, workers: usize, seed: u64, f: F) -> Result<MeanValue>
where
    F: Fn(&mut RandomStream) -> Result<f64> + Sync,
{
    let parts = fan_out(samples, workers, seed, |quota, stream| {
        let mut acc = RunningMean::default();
        for _ in 0..quota {
            acc.push(f(stream)?);
        }
        Ok(acc)
    })?;
    let mut total = RunningMean::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(total.value())
}

/// Monte Carlo average of a spectral functional.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub measure: MeasureSpec,
    pub functional: Functional,
    pub mean: f64,
    pub stderr: f64,
    pub count: u64,
    /// `⟨1/Tr ϱ²⟩`, present for [`Functional::Participation`].
    pub mean_inverse_purity: Option<MeanValue>,
}

pub fn mc_estimate(
    measure: &MeasureSpec,
    functional: Functional,
    samples: u64,
    workers: usize,
    seed: u64,
) -> Result<Estimate> {
    if samples < MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_SAMPLES as usize,
            got: samples as usize,
        });
    }
    measure.validate()?;
    let parts = fan_out(samples, workers, seed, |quota, stream| {
        let mut acc = RunningMean::default();
        let mut inverse = RunningMean::default();
        for _ in 0..quota {
            let x = functional.evaluate(&measure.sample_spectrum(stream)?)?;
            acc.push(x);
            if functional == Functional::Participation {
                inverse.push(x.recip());
            }
        }
        Ok((acc, inverse))
    })?;
    let mut acc = RunningMean::default();
    let mut inverse = RunningMean::default();
    for (a, b) in &parts {
        acc.merge(a);
        inverse.merge(b);
    }
    let (mean, stderr, mean_inverse_purity) = if functional == Functional::Participation {
        // delta method for 1/⟨p⟩
        let p = acc.mean();
        (p.recip(), acc.stderr() / (p * p), Some(inverse.value()))
    } else {
        (acc.mean(), acc.stderr(), None)
    };
    Ok(Estimate {
        measure: *measure,
        functional,
        mean,
        stderr,
        count: acc.count(),
        mean_inverse_purity,
    })
}

/// Counts over `bins` equal cells of `[lo, hi)` plus out-of-range sentinels.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram1d {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    /// Values below `lo`.
    pub underflow: u64,
    /// Values at or above `hi`, and NaN.
    pub overflow: u64,
}

impl Histogram1d {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    pub fn edges(&self) -> Vec<f64> {
        let w = self.width();
        (0..=self.counts.len())
            .map(|i| self.lo + i as f64 * w)
            .collect()
    }
}

pub fn histogram_1d(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Histogram1d> {
    if bins == 0 {
        return Err(Error::InvalidParameter("bins must be at least 1".into()));
    }
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!("empty range [{lo}, {hi})")));
    }
    let mut h = Histogram1d {
        lo,
        hi,
        counts: vec![0; bins],
        underflow: 0,
        overflow: 0,
    };
    let scale = bins as f64 / (hi - lo);
    for &v in values {
        if v < lo {
            h.underflow += 1;
        } else if v < hi {
            let i = (((v - lo) * scale) as usize).min(bins - 1);
            h.counts[i] += 1;
        } else {
            h.overflow += 1;
        }
    }
    Ok(h)
}

/// Counts over the `resolution²` triangles of an equilateral subdivision of
/// the `N = 3` probability simplex.
///
/// Row `i` holds points with `λ₁ ∈ [i/R, (i+1)/R]`; within it, cell
/// `j = 2b` is the upward and `j = 2b + 1` the downward triangle of the
/// band `λ₂ ∈ [b/R, (b+1)/R]`. Row `i` has `2(R-i) - 1` cells. Points on a
/// cell boundary go to the lower index.
#[derive(Clone, Debug, PartialEq)]
pub struct TernaryHistogram {
    resolution: usize,
    counts: Vec<Vec<u64>>,
}

/// Cell of `x·R` along one axis, with boundary ties sent down.
fn axis_cell(scaled: f64, cells: usize) -> usize {
    if cells == 0 {
        return 0;
    }
    let c = scaled.ceil() - 1.0;
    if c <= 0.0 {
        0
    } else {
        (c as usize).min(cells - 1)
    }
}

impl TernaryHistogram {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::InvalidParameter("resolution must be at least 1".into()));
        }
        let counts = (0..resolution)
            .map(|i| vec![0; 2 * (resolution - i) - 1])
            .collect();
        Ok(Self { resolution, counts })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// `(i, j)` of the cell containing barycentric point `λ`.
    pub fn cell_of(&self, lambda: [f64; 3]) -> (usize, usize) {
        let r = self.resolution;
        let a = lambda[0] * r as f64;
        let i = axis_cell(a, r);
        let b = lambda[1] * r as f64;
        let jb = axis_cell(b, r - i);
        let fa = a - i as f64;
        let fb = b - jb as f64;
        let downward = fa + fb > 1.0 && i + jb + 1 < r;
        (i, 2 * jb + usize::from(downward))
    }

    /// Barycentric centroid of cell `(i, j)`.
    pub fn centroid(&self, i: usize, j: usize) -> [f64; 3] {
        let r = self.resolution as f64;
        let (b, down) = (j / 2, j % 2 == 1);
        let (ci, cb) = if down {
            (i as f64 + 2.0 / 3.0, b as f64 + 2.0 / 3.0)
        } else {
            (i as f64 + 1.0 / 3.0, b as f64 + 1.0 / 3.0)
        };
        let (l1, l2) = (ci / r, cb / r);
        [l1, l2, 1.0 - l1 - l2]
    }

    pub fn add(&mut self, lambda: [f64; 3]) {
        let (i, j) = self.cell_of(lambda);
        self.counts[i][j] += 1;
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i][j]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn cell_count(&self) -> usize {
        self.resolution * self.resolution
    }

    /// `(i, j, count)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &c)| (i, j, c)))
    }

    /// Counts in cell order, matching [`TernaryHistogram::cells`].
    pub fn flat_counts(&self) -> Vec<u64> {
        self.counts.iter().flatten().copied().collect()
    }
}

/// Histogram of three-component points, taken in the order given.
pub fn ternary_histogram(spectra: &[Vec<f64>], resolution: usize) -> Result<TernaryHistogram> {
    let mut h = TernaryHistogram::new(resolution)?;
    for s in spectra {
        if s.len() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                found: s.len(),
            });
        }
        h.add([s[0], s[1], s[2]]);
    }
    Ok(h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GofKind {
    Ks,
    ChiSquare,
    TwoSampleKs,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GofResult {
    pub kind: GofKind,
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom of a chi-square test.
    pub dof: Option<usize>,
}

/// Smallest sample accepted by the KS tests.
pub const KS_MIN_SAMPLES: usize = 20;
/// Smallest expected bin count accepted by [`chi2_test`].
pub const CHI2_MIN_EXPECTED: f64 = 5.0;

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // √(2π)/λ Σ exp(-(2j-1)² π² / (8λ²)), accurate for small λ
        let c = -PI * PI / (8.0 * lambda * lambda);
        let s: f64 = (1..=6)
            .map(|j| {
                let m = (2 * j - 1) as f64;
                (c * m * m).exp()
            })
            .sum();
        return (1.0 - (2.0 * PI).sqrt() / lambda * s).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        s += if j % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

fn ks_p_value(d: f64, effective_n: f64) -> f64 {
    let sqrt_n = effective_n.sqrt();
    kolmogorov_survival((sqrt_n + 0.12 + 0.11 / sqrt_n) * d)
}

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<GofResult> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: KS_MIN_SAMPLES,
            got: samples.len(),
        });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(GofResult {
        kind: GofKind::Ks,
        statistic: d,
        p_value: ks_p_value(d, n),
        dof: None,
    })
}

/// Two-sample Kolmogorov-Smirnov test.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> Result<GofResult> {
    let smaller = a.len().min(b.len());
    if smaller < KS_MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: KS_MIN_SAMPLES,
            got: smaller,
        });
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(GofResult {
        kind: GofKind::TwoSampleKs,
        statistic: d,
        p_value: ks_p_value(d, na * nb / (na + nb)),
        dof: None,
    })
}

/// Pearson chi-square test with `bins - 1 - constraints` degrees of freedom.
pub fn chi2_test_with_constraints(
    observed: &[u64],
    expected: &[f64],
    constraints: usize,
) -> Result<GofResult> {
    if observed.len() != expected.len() {
        return Err(Error::DimensionMismatch {
            expected: expected.len(),
            found: observed.len(),
        });
    }
    let min = expected.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min >= CHI2_MIN_EXPECTED) {
        return Err(Error::InsufficientData {
            needed: CHI2_MIN_EXPECTED as usize,
            got: if min.is_finite() { min.max(0.0) as usize } else { 0 },
        });
    }
    if observed.len() < constraints + 2 {
        return Err(Error::InsufficientData {
            needed: constraints + 2,
            got: observed.len(),
        });
    }
    let statistic: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let dof = observed.len() - 1 - constraints;
    let chi = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(GofResult {
        kind: GofKind::ChiSquare,
        statistic,
        p_value: chi.sf(statistic).clamp(0.0, 1.0),
        dof: Some(dof),
    })
}

/// Pearson chi-square test with `bins - 1` degrees of freedom.
pub fn chi2_test(observed: &[u64], expected: &[f64]) -> Result<GofResult> {
    chi2_test_with_constraints(observed, expected, 0)
}

const CDF_PANELS: usize = 64;
const CDF_TOL: f64 = 1e-12;

type GapDensity = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// CDF of a density on `[lo, hi]` by adaptive quadrature.
///
/// Panel totals are cumulated once; a query integrates from its panel's left
/// edge and is clamped into the panel's cumulative range, so the CDF is
/// nondecreasing across panels.
pub struct NumericCdf {
    lo: f64,
    hi: f64,
    edges: Vec<f64>,
    cumulative: Vec<f64>,
    density: GapDensity,
}

impl std::fmt::Debug for NumericCdf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NumericCdf")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("mass", &self.mass())
            .finish()
    }
}

impl NumericCdf {
    /// Total mass `∫_lo^hi density`.
    pub fn mass(&self) -> f64 {
        *self.cumulative.last().expect("at least one panel")
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return self.mass();
        }
        let p = self.edges.partition_point(|&e| e <= x).saturating_sub(1).min(CDF_PANELS - 1);
        let (a, b) = (self.edges[p], self.edges[p + 1]);
        // hi - t = (hi - b) + (b - x) + (x - t), the last term exact
        let offset = (self.hi - b) + (b - x);
        let partial = tanh_sinh_with_gap(|t, gap| (self.density)(t, offset + gap), a, x, CDF_TOL)
            .map(|q| q.value)
            .unwrap_or(f64::NAN);
        let (c0, c1) = (self.cumulative[p], self.cumulative[p + 1]);
        if partial.is_nan() {
            return c0;
        }
        (c0 + partial).clamp(c0, c1)
    }
}

/// [`NumericCdf`] of a density given as `density(x, hi - x)`, where the
/// second argument is the exact distance to the upper endpoint.
pub fn numeric_cdf_with_gap<F>(density: F, lo: f64, hi: f64) -> Result<NumericCdf>
where
    F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!("CDF range [{lo}, {hi}]")));
    }
    let width = (hi - lo) / CDF_PANELS as f64;
    let mut edges: Vec<f64> = (0..=CDF_PANELS).map(|i| lo + i as f64 * width).collect();
    edges[CDF_PANELS] = hi;
    let mut cumulative = Vec::with_capacity(CDF_PANELS + 1);
    cumulative.push(0.0);
    let mut total = 0.0;
    for w in edges.windows(2) {
        let tail = hi - w[1];
        let q = tanh_sinh_with_gap(|x, gap| density(x, tail + gap), w[0], w[1], CDF_TOL)?;
        if !(q.value >= -1e-15) {
            return Err(Error::Domain(format!("negative density mass {}", q.value)));
        }
        total += q.value.max(0.0);
        cumulative.push(total);
    }
    Ok(NumericCdf {
        lo,
        hi,
        edges,
        cumulative,
        density: Box::new(density),
    })
}

/// [`NumericCdf`] of `density` on `[lo, hi]`.
pub fn numeric_cdf<F>(density: F, lo: f64, hi: f64) -> Result<NumericCdf>
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    numeric_cdf_with_gap(move |x, _| density(x), lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::radial_density_n2_gap;
    use crate::ensembles::dirichlet_sample;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn running_mean_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1013) as f64 / 1013.0).collect();
        let mut whole = RunningMean::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = RunningMean::default();
        let mut b = RunningMean::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_eq!(a.count(), 1000);
        assert_abs_diff_eq!(a.mean(), whole.mean(), epsilon = 1e-14);
        assert_abs_diff_eq!(a.stderr(), whole.stderr(), epsilon = 1e-14);
    }

    #[test]
    fn estimate_examples() {
        let hs = MeasureSpec::hilbert_schmidt(2);
        let e = mc_estimate(&hs, Functional::Entropy, 100_000, 4, 1).unwrap();
        assert_eq!(e.count, 100_000);
        assert!((e.mean - 1.0 / 3.0).abs() < 3.0 * e.stderr, "{e:?}");

        let e = mc_estimate(&MeasureSpec::hilbert_schmidt(3), Functional::Purity, 100_000, 4, 2).unwrap();
        assert!((e.mean - 0.6).abs() < 3.0 * e.stderr, "{e:?}");

        let e = mc_estimate(&MeasureSpec::Bures { n: 2 }, Functional::Purity, 100_000, 4, 3).unwrap();
        assert!((e.mean - 0.875).abs() < 3.0 * e.stderr, "{e:?}");
    }

    #[test]
    fn estimate_participation_labels_both() {
        let e = mc_estimate(&MeasureSpec::unitary(2), Functional::Participation, 50_000, 2, 4).unwrap();
        assert!((e.mean - 1.5).abs() < 3.0 * e.stderr, "{e:?}");
        let inv = e.mean_inverse_purity.unwrap();
        // ⟨1/p⟩ exceeds 1/⟨p⟩ by Jensen's inequality
        assert!(inv.mean > e.mean);
        let e = mc_estimate(&MeasureSpec::unitary(2), Functional::Purity, 1000, 1, 4).unwrap();
        assert!(e.mean_inverse_purity.is_none());
    }

    #[test]
    fn estimate_is_deterministic_per_worker_count() {
        let spec = MeasureSpec::hilbert_schmidt(3);
        let a = mc_estimate(&spec, Functional::Entropy, 2000, 3, 17).unwrap();
        let b = mc_estimate(&spec, Functional::Entropy, 2000, 3, 17).unwrap();
        assert_eq!(a, b);
        let c = mc_estimate(&spec, Functional::Entropy, 2000, 2, 17).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn estimate_preconditions() {
        let spec = MeasureSpec::hilbert_schmidt(2);
        assert_eq!(
            mc_estimate(&spec, Functional::Entropy, 99, 1, 0).unwrap_err(),
            Error::InsufficientData { needed: 100, got: 99 }
        );
        assert!(mc_estimate(&spec, Functional::Entropy, 100, 0, 0).is_err());
        assert!(mc_estimate(&MeasureSpec::hilbert_schmidt(3), Functional::Tangle, 100, 1, 0).is_err());
    }

    #[test]
    fn stderr_scales_with_count() {
        let spec = MeasureSpec::hilbert_schmidt(2);
        let small = mc_estimate(&spec, Functional::Purity, 10_000, 2, 5).unwrap();
        let large = mc_estimate(&spec, Functional::Purity, 100_000, 2, 6).unwrap();
        let ratio = small.stderr / large.stderr;
        assert!((ratio / 10f64.sqrt() - 1.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn exact_values() {
        let hs2 = MeasureSpec::hilbert_schmidt(2);
        assert_abs_diff_eq!(Functional::Entropy.exact_value(&hs2).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(Functional::Concurrence.exact_value(&hs2).unwrap(), 3.0 * PI / 16.0, epsilon = 1e-10);
        assert_abs_diff_eq!(Functional::Tangle.exact_value(&hs2).unwrap(), 0.4, epsilon = 1e-10);
        let ind = MeasureSpec::Induced { n: 2, k: 4, beta: Beta::Complex };
        assert_abs_diff_eq!(Functional::Purity.exact_value(&ind).unwrap(), 2.0 / 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(
            Functional::Participation.exact_value(&MeasureSpec::Bures { n: 2 }).unwrap(),
            8.0 / 7.0,
            epsilon = 1e-9
        );
        let hs3 = MeasureSpec::hilbert_schmidt(3);
        assert_abs_diff_eq!(
            Functional::TracePower(3.0).exact_value(&hs3).unwrap(),
            46.0 / 110.0,
            epsilon = 1e-15
        );
        assert!(Functional::Entropy.exact_value(&MeasureSpec::Bures { n: 3 }).is_none());
        let ind = MeasureSpec::Induced { n: 3, k: 5, beta: Beta::Complex };
        assert!(Functional::Entropy.exact_value(&ind).is_none());
    }

    #[test]
    fn exact_concurrence_matches_simulation() {
        let hs2 = MeasureSpec::hilbert_schmidt(2);
        let e = mc_estimate(&hs2, Functional::Concurrence, 100_000, 2, 8).unwrap();
        let exact = Functional::Concurrence.exact_value(&hs2).unwrap();
        assert!((e.mean - exact).abs() < 3.0 * e.stderr, "{e:?}");
    }

    #[test]
    fn histogram_examples() {
        let h = histogram_1d(&[], 0.0, 1.0, 4).unwrap();
        assert_eq!(h.counts, vec![0; 4]);
        let h = histogram_1d(&[0.3], 0.0, 1.0, 4).unwrap();
        assert_eq!(h.counts, vec![0, 1, 0, 0]);
        let h = histogram_1d(&[-1.0, 1.0, 2.0, f64::NAN, 0.999], 0.0, 1.0, 2).unwrap();
        assert_eq!((h.underflow, h.overflow, h.counts.clone()), (1, 3, vec![0, 1]));
        assert_eq!(h.total(), 5);
        assert!(histogram_1d(&[], 1.0, 1.0, 2).is_err());
        assert!(histogram_1d(&[], 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn histogram_uniform_fill() {
        let mut st = RandomStream::new(10, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| st.random::<f64>()).collect();
        let h = histogram_1d(&xs, 0.0, 1.0, 20).unwrap();
        let expected = 5000.0;
        let sigma = (100_000.0 * 0.05 * 0.95f64).sqrt();
        for &c in &h.counts {
            assert!((c as f64 - expected).abs() < 4.0 * sigma, "{c}");
        }
    }

    #[test]
    fn ternary_examples() {
        let h = ternary_histogram(&[vec![1.0 / 3.0; 3]], 10).unwrap();
        let (i, j) = h.cell_of([1.0 / 3.0; 3]);
        assert_eq!(h.count(i, j), 1);
        let c = h.centroid(i, j);
        for x in c {
            assert_abs_diff_eq!(x, 1.0 / 3.0, epsilon = 1e-12);
        }
        let h = TernaryHistogram::new(10).unwrap();
        assert_eq!(h.cell_of([1.0, 0.0, 0.0]), (9, 0));
        assert_eq!(h.cell_of([0.0, 1.0, 0.0]), (0, 18));
        assert_eq!(h.cell_of([0.0, 0.0, 1.0]), (0, 0));
        assert_eq!(h.cell_count(), 100);
        assert_eq!(h.cells().count(), 100);
        assert!(ternary_histogram(&[vec![0.5, 0.5]], 4).is_err());
    }

    #[test]
    fn ternary_boundary_ties_go_down() {
        let h = TernaryHistogram::new(4).unwrap();
        // λ₁ = 1/2 sits on the row boundary between rows 1 and 2
        assert_eq!(h.cell_of([0.5, 0.1, 0.4]).0, 1);
        // on the diagonal edge shared by an upward and a downward triangle
        assert_eq!(h.cell_of([0.125, 0.125, 0.75]), (0, 0));
    }

    #[test]
    fn ternary_cells_tile_simplex() {
        // uniform points fill every cell, each with the same expected area
        let mut st = RandomStream::new(11, 0);
        let mut h = TernaryHistogram::new(6).unwrap();
        let n = 180_000;
        for _ in 0..n {
            let d = dirichlet_sample(3, 1.0, &mut st).unwrap();
            h.add([d[0], d[1], d[2]]);
        }
        assert_eq!(h.total(), n);
        let expected = vec![n as f64 / 36.0; 36];
        let g = chi2_test(&h.flat_counts(), &expected).unwrap();
        assert!(g.p_value > 1e-3, "{g:?}");
    }

    proptest! {
        #[test]
        fn ternary_symmetric_under_permutation(
            raw in proptest::collection::vec(0.001f64..1.0, 3),
            r in 1usize..12,
            perm in 0usize..6,
        ) {
            let s: f64 = raw.iter().sum();
            let l = [raw[0] / s, raw[1] / s, raw[2] / s];
            let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            let p = perms[perm];
            let h = TernaryHistogram::new(r).unwrap();
            let (i, j) = h.cell_of(l);
            prop_assert!(j < 2 * (r - i) - 1);
            let c = h.centroid(i, j);
            let permuted_point = [l[p[0]], l[p[1]], l[p[2]]];
            let permuted_centroid = [c[p[0]], c[p[1]], c[p[2]]];
            // skip points numerically on a cell boundary
            let a = permuted_point.map(|x| x * r as f64);
            let near_edge = a.iter().any(|x| (x - x.round()).abs() < 1e-9);
            if !near_edge {
                prop_assert_eq!(h.cell_of(permuted_point), h.cell_of(permuted_centroid));
            }
        }
    }

    #[test]
    fn ks_self_consistency() {
        let mut rejections = 0;
        for rep in 0..500u64 {
            let mut st = RandomStream::new(rep, 77);
            let xs: Vec<f64> = (0..200).map(|_| st.random::<f64>()).collect();
            if ks_test(&xs, |x| x.clamp(0.0, 1.0)).unwrap().p_value < 0.01 {
                rejections += 1;
            }
        }
        // Binomial(500, 0.01): mean 5, generous band
        assert!(rejections <= 15, "{rejections}");
    }

    #[test]
    fn ks_rejects_gross_mismatch() {
        let mut st = RandomStream::new(12, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| 0.5 * st.random::<f64>()).collect();
        let g = ks_test(&xs, |r| 8.0 * r * r * r).unwrap();
        assert!(g.p_value < 1e-6, "{g:?}");
        assert!(ks_test(&xs[..10], |r| r).is_err());
    }

    #[test]
    fn two_sample_identical_is_zero() {
        let mut st = RandomStream::new(13, 0);
        let xs: Vec<f64> = (0..500).map(|_| st.random::<f64>()).collect();
        let g = two_sample_ks(&xs, &xs).unwrap();
        assert_eq!(g.statistic, 0.0);
        assert_eq!(g.p_value, 1.0);
        let ys: Vec<f64> = (0..500).map(|_| st.random::<f64>() + 0.3).collect();
        assert!(two_sample_ks(&xs, &ys).unwrap().p_value < 1e-6);
    }

    #[test]
    fn kolmogorov_branches_agree() {
        for lambda in [0.9, 0.95, 1.0, 1.05] {
            let small = {
                let c = -PI * PI / (8.0 * lambda * lambda);
                let s: f64 = (1..=20).map(|j| (c * ((2 * j - 1) as f64).powi(2)).exp()).sum();
                1.0 - (2.0 * PI).sqrt() / lambda * s
            };
            let large: f64 = 2.0
                * (1..=100)
                    .map(|j| {
                        let t = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
                        if j % 2 == 1 { t } else { -t }
                    })
                    .sum::<f64>();
            assert_abs_diff_eq!(small, large, epsilon = 1e-12);
            assert_abs_diff_eq!(kolmogorov_survival(lambda), large, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(kolmogorov_survival(1.358), 0.05, epsilon = 1e-3);
    }

    #[test]
    fn chi2_examples() {
        let g = chi2_test(&[10, 10, 10], &[10.0, 10.0, 10.0]).unwrap();
        assert_eq!((g.statistic, g.p_value, g.dof), (0.0, 1.0, Some(2)));
        assert!(matches!(
            chi2_test(&[1, 2], &[1.0, 2.0]).unwrap_err(),
            Error::InsufficientData { .. }
        ));
        let g = chi2_test(&[100, 0], &[50.0, 50.0]).unwrap();
        assert!(g.p_value < 1e-20);
    }

    #[test]
    fn numeric_cdf_examples() {
        let cdf = numeric_cdf(|r| 24.0 * r * r, 0.0, 0.5).unwrap();
        assert_abs_diff_eq!(cdf.eval(0.0), 0.0);
        assert_abs_diff_eq!(cdf.eval(0.5), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(cdf.eval(0.25), 0.125, epsilon = 1e-12);
        assert_abs_diff_eq!(cdf.eval(0.1234), 8.0 * 0.1234f64.powi(3), epsilon = 1e-12);

        let bures = numeric_cdf_with_gap(
            |r, gap| radial_density_n2_gap(N2Measure::Bures, r, gap).unwrap_or(0.0),
            0.0,
            0.5,
        )
        .unwrap();
        assert_abs_diff_eq!(bures.eval(0.5), 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(bures.mass(), 1.0, epsilon = 1e-8);
        let orth = numeric_cdf_with_gap(
            |r, gap| radial_density_n2_gap(N2Measure::Orthogonal, r, gap).unwrap_or(0.0),
            0.0,
            0.5,
        )
        .unwrap();
        for r in [0.1, 0.3, 0.49, 0.4999999] {
            assert_abs_diff_eq!(orth.eval(r), 2.0 / PI * (2.0 * r).asin(), epsilon = 1e-10);
        }
    }

    #[test]
    fn numeric_cdf_monotone() {
        let cdf = numeric_cdf_with_gap(
            |r, gap| radial_density_n2_gap(N2Measure::Bures, r, gap).unwrap_or(0.0),
            0.0,
            0.5,
        )
        .unwrap();
        let mut prev = 0.0;
        for i in 0..=2000 {
            let v = cdf.eval(i as f64 / 4000.0);
            assert!(v >= prev, "{i}");
            prev = v;
        }
    }
}
