//! Adaptive tanh-sinh (double-exponential) quadrature.
//!
//! The rule clusters nodes doubly-exponentially at both endpoints, which
//! makes it accurate for the algebraic endpoint singularities that appear in
//! the densities here (`λ^{-1/2}`, `(1-4r²)^{-1/2}`). Interior kinks must be
//! handled by splitting the interval at the kink.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const T_MAX: f64 = 4.5;
const MAX_LEVEL: usize = 11;
const MIN_LEVEL: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub error: f64,
}

/// `∫_a^b f(x) dx`, where `f` receives `(x, b - x)`.
///
/// The second argument is the exact distance to the upper endpoint, so
/// integrands singular at `b` need not recompute it from a rounded `x`.
pub fn tanh_sinh_with_gap<F>(f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature>
where
    F: Fn(f64, f64) -> f64,
{
    tanh_sinh_dyn(&f, a, b, tol)
}

fn tanh_sinh_dyn(f: &dyn Fn(f64, f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
        });
    }
    if a > b {
        let q = tanh_sinh_dyn(&|x, _| f(x, b - x), b, a, tol)?;
        return Ok(Quadrature {
            value: -q.value,
            error: q.error,
        });
    }
    let half = 0.5 * (b - a);

    // Contribution of the node pair at parameter t (both t and -t).
    let pair = |t: f64| -> Result<f64> {
        let u = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u).exp();
        // 1 - tanh(u) computed without cancellation
        let delta = 2.0 * e / (1.0 + e);
        let weight = FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        let gap = half * delta;
        if weight == 0.0 || gap == 0.0 {
            return Ok(0.0);
        }
        // nodes that round onto an endpoint are kept when the integrand is
        // still finite there (it sees the exact gap) and dropped otherwise
        let mut s = 0.0;
        let lo = a + gap;
        let v = f(lo, b - lo);
        if v.is_finite() {
            s += v;
        } else if lo > a && lo < b {
            return Err(Error::QuadratureFailure { residual: v });
        }
        let hi = b - gap;
        let v = f(hi, gap);
        if v.is_finite() {
            s += v;
        } else if hi > a && hi < b {
            return Err(Error::QuadratureFailure { residual: v });
        }
        Ok(weight * half * s)
    };

    let centre = {
        let v = f(a + half, half);
        if !v.is_finite() {
            return Err(Error::QuadratureFailure { residual: v });
        }
        FRAC_PI_2 * half * v
    };

    let mut h = 1.0;
    let mut sum = centre;
    let mut k = 1;
    while (k as f64) * h <= T_MAX {
        sum += pair(k as f64 * h)?;
        k += 1;
    }
    let mut estimate = h * sum;
    let mut error = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= T_MAX {
            sum += pair(k as f64 * h)?;
            k += 2;
        }
        let next = h * sum;
        error = (next - estimate).abs();
        estimate = next;
        if level >= MIN_LEVEL && error <= tol * estimate.abs().max(f64::MIN_POSITIVE) {
            return Ok(Quadrature {
                value: estimate,
                error,
            });
        }
    }
    // tolerance below the attainable noise floor still yields a usable value
    if error <= 1e3 * tol * estimate.abs() {
        return Ok(Quadrature {
            value: estimate,
            error,
        });
    }
    Err(Error::QuadratureFailure { residual: error })
}

/// `∫_a^b f(x) dx` to relative tolerance `tol`.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    tanh_sinh_with_gap(|x, _| f(x), a, b, tol)
}

/// Sum of [`tanh_sinh`] over consecutive pieces `[p_0, p_1], [p_1, p_2], …`.
pub fn tanh_sinh_split<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: f64) -> Result<Quadrature> {
    let mut total = Quadrature {
        value: 0.0,
        error: 0.0,
    };
    for w in points.windows(2) {
        let q = tanh_sinh(&f, w[0], w[1], tol)?;
        total.value += q.value;
        total.error += q.error;
    }
    Ok(total)
}

/// Integral over the probability simplex `{λ ≥ 0, Σλ = 1}` in `n` components,
/// with respect to Lebesgue measure on `(λ₁, …, λ_{n-1})`.
///
/// Nested one-dimensional rules; practical for `n ≤ 4`.
pub fn integrate_simplex<F>(n: usize, f: F, tol: f64) -> Result<Quadrature>
where
    F: Fn(&[f64]) -> f64,
{
    if n == 0 {
        return Err(Error::InvalidParameter("empty simplex".into()));
    }
    if n == 1 {
        return Ok(Quadrature {
            value: f(&[1.0]),
            error: 0.0,
        });
    }
    let value = nest(&f, &[], n, 1.0, tol)?;
    Ok(Quadrature {
        value,
        error: tol * value.abs(),
    })
}

fn nest<F>(f: &F, prefix: &[f64], n: usize, remaining: f64, tol: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let point = |x: f64| {
        let mut point = Vec::with_capacity(n);
        point.extend_from_slice(prefix);
        point.push(x);
        point
    };
    if prefix.len() + 2 == n {
        // split at the diagonal λ_{n-1} = λ_n, where |Δ|^β kinks for odd β;
        // the upper piece sees the last coordinate as its exact gap
        let half = 0.5 * remaining;
        let lower = tanh_sinh_with_gap(
            |x, _| {
                let mut p = point(x);
                p.push(remaining - x);
                f(&p)
            },
            0.0,
            half,
            tol,
        )?;
        let upper = tanh_sinh_with_gap(
            |x, gap| {
                let mut p = point(x);
                p.push(gap);
                f(&p)
            },
            half,
            remaining,
            tol,
        )?;
        return Ok(lower.value + upper.value);
    }
    let failure = std::cell::Cell::new(None);
    let q = tanh_sinh_with_gap(
        |x, gap| {
            // inner integrals run tighter so their noise stays below `tol`
            nest(f, &point(x), n, gap, tol * 1e-2).unwrap_or_else(|e| {
                failure.set(Some(e));
                0.0
            })
        },
        0.0,
        remaining,
        tol,
    )?;
    match failure.take() {
        Some(e) => Err(e),
        None => Ok(q.value),
    }
}
