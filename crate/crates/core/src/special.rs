//! Log-gamma, digamma, Laguerre polynomials and Gauss-Laguerre rules.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma({x})")));
    }
    Ok(ln_gamma_pos(x))
}

pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma_pos(1.0 - x);
    }
    // small integers are common (factorials in normalization constants)
    if x <= 30.0 && x.fract() == 0.0 {
        return (2..x as u64).map(|k| (k as f64).ln()).sum();
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// `ψ(x) = d/dx ln Γ(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("digamma({x})")));
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < 12.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    // Bernoulli tail Σ B_2k / (2k x^2k)
    const TAIL: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32_760.0,
        1.0 / 12.0,
    ];
    let inv2 = 1.0 / (x * x);
    let tail = TAIL.iter().rev().fold(0.0, |acc, &c| acc * inv2 + c) * inv2;
    Ok(shift + x.ln() - 0.5 / x - tail)
}

/// Laguerre polynomial `L_m(x)` via the three-term recurrence
/// `(m+1) L_{m+1} = (2m+1-x) L_m - m L_{m-1}`.
pub fn laguerre(m: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = 1.0 - x;
    for j in 1..m {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 - x) * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `Σ_{m<n} L_m(x)²`.
pub fn laguerre_square_sum(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut prev = 1.0;
    let mut sum = 1.0;
    if n == 1 {
        return sum;
    }
    let mut cur = 1.0 - x;
    sum += cur * cur;
    for j in 1..n - 1 {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 - x) * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
        sum += cur * cur;
    }
    sum
}

/// Gauss rule for `∫₀^∞ x^α e^{-x} f(x) dx`.
#[derive(Clone, Debug)]
pub struct GaussLaguerre {
    pub alpha: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Nodes and weights of the `count`-point generalized Gauss-Laguerre rule
/// (weight `x^α e^{-x}`, `α > -1`), exact for polynomials of degree `< 2 count`.
///
/// Roots are found by Newton iteration on the generalized Laguerre
/// recurrence, so tiny weights keep full relative precision.
pub fn gauss_laguerre_nodes(count: usize, alpha: f64) -> Result<GaussLaguerre> {
    if count == 0 {
        return Err(Error::InvalidParameter("zero Gauss-Laguerre nodes".into()));
    }
    if !(alpha > -1.0) {
        return Err(Error::Domain(format!("Gauss-Laguerre alpha {alpha}")));
    }
    let n = count as f64;
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let log_norm = ln_gamma_pos(alpha + n) - ln_gamma_pos(n);
    let mut z = 0.0f64;
    for i in 0..count {
        z = match i {
            0 => (1.0 + alpha) * (3.0 + 0.92 * alpha) / (1.0 + 2.4 * n + 1.8 * alpha),
            1 => z + (15.0 + 6.25 * alpha) / (1.0 + 0.9 * alpha + 2.5 * n),
            _ => {
                let ai = (i - 1) as f64;
                z + ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * alpha / (1.0 + 3.5 * ai))
                    * (z - nodes[i - 2])
                    / (1.0 + 0.3 * alpha)
            }
        };
        let mut converged = false;
        let (mut pn, mut dp) = (0.0, 1.0);
        for _ in 0..200 {
            let (p, q) = generalized_laguerre_pair(count, alpha, z);
            pn = p;
            dp = (n * p - (n + alpha) * q) / z;
            let step = pn / dp;
            z -= step;
            if step.abs() <= 4.0 * f64::EPSILON * z.abs() {
                converged = true;
                break;
            }
        }
        converged |= (pn / dp).abs() <= 1e-12 * z.abs();
        if !converged || !z.is_finite() {
            return Err(Error::QuadratureFailure {
                residual: (pn / dp).abs(),
            });
        }
        let (p, q) = generalized_laguerre_pair(count, alpha, z);
        dp = (n * p - (n + alpha) * q) / z;
        nodes[i] = z;
        weights[i] = -log_norm.exp() / (dp * n * q);
    }
    Ok(GaussLaguerre {
        alpha,
        nodes,
        weights,
    })
}

/// `(L_n^α(z), L_{n-1}^α(z))`.
fn generalized_laguerre_pair(n: usize, alpha: f64, z: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = ((2.0 * jf - 1.0 + alpha - z) * p2 - (jf - 1.0 + alpha) * p3) / jf;
    }
    (p1, p2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_gamma_integers() {
        assert_relative_eq!(log_gamma(5.0).unwrap(), 24f64.ln(), max_relative = 1e-14);
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
        let lf100: f64 = (2..100).map(|k| (k as f64).ln()).sum();
        assert_relative_eq!(log_gamma(100.0).unwrap(), lf100, max_relative = 1e-13);
    }

    #[test]
    fn log_gamma_half_integers() {
        let sqrt_pi = PI.sqrt();
        assert_relative_eq!(log_gamma(0.5).unwrap(), sqrt_pi.ln(), max_relative = 1e-13);
        assert_relative_eq!(
            log_gamma(1.5).unwrap(),
            (0.5 * sqrt_pi).ln(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            log_gamma(4.5).unwrap(),
            (105.0 / 16.0 * sqrt_pi).ln(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn log_gamma_against_statrs() {
        for &x in &[0.01, 0.3, 0.77, 1.25, 3.6, 12.5, 40.2, 257.0, 1e4 + 0.5] {
            let ours = log_gamma(x).unwrap();
            let reference = statrs::function::gamma::ln_gamma(x);
            assert!(
                (ours - reference).abs() <= 1e-12 * reference.abs().max(1.0),
                "x={x}: {ours} vs {reference}"
            );
        }
    }

    #[test]
    fn log_gamma_domain() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-2.5).is_err());
        assert!(digamma(0.0).is_err());
    }

    /// ψ(x) = -γ + Σ_{k≥0} (1/(k+1) - 1/(k+x)), summed with a tail correction.
    fn digamma_series(x: f64) -> f64 {
        let terms = 2_000_000u64;
        let mut s = 0.0;
        for k in (0..terms).rev() {
            let kf = k as f64;
            s += 1.0 / (kf + 1.0) - 1.0 / (kf + x);
        }
        // remainder Σ_{k≥K} (x-1)/((k+1)(k+x)) ≈ (x-1)/K
        s += (x - 1.0) / terms as f64;
        -EULER_GAMMA + s
    }

    #[test]
    fn digamma_one_is_minus_gamma() {
        assert_relative_eq!(digamma(1.0).unwrap(), -EULER_GAMMA, max_relative = 1e-14);
        assert_relative_eq!(digamma(1.0).unwrap(), digamma_series(1.0), max_relative = 1e-9);
    }

    #[test]
    fn digamma_against_series_and_statrs() {
        for &x in &[0.25, 0.5, 2.0, 3.7, 11.0, 55.5] {
            let ours = digamma(x).unwrap();
            assert!((ours - digamma_series(x)).abs() < 1e-8, "x = {x}");
            assert!((ours - statrs::function::gamma::digamma(x)).abs() < 1e-12, "x = {x}");
        }
        // ψ(1/2) = -γ - 2 ln 2
        assert_relative_eq!(
            digamma(0.5).unwrap(),
            -EULER_GAMMA - 2.0 * 2f64.ln(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn laguerre_low_orders() {
        for &x in &[0.0, 0.3, 2.0, 7.5] {
            assert_eq!(laguerre(0, x), 1.0);
            assert_eq!(laguerre(1, x), 1.0 - x);
            assert_relative_eq!(
                laguerre(2, x),
                0.5 * (x * x - 4.0 * x + 2.0),
                epsilon = 1e-14
            );
            assert_relative_eq!(
                laguerre(3, x),
                (-x * x * x + 9.0 * x * x - 18.0 * x + 6.0) / 6.0,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn laguerre_square_sum_matches_terms() {
        let x = 1.7;
        let direct: f64 = (0..6).map(|m| laguerre(m, x).powi(2)).sum();
        assert_relative_eq!(laguerre_square_sum(6, x), direct, max_relative = 1e-14);
    }

    #[test]
    fn gauss_laguerre_moments() {
        for &alpha in &[0.0, 0.5, 1.0, 1.3, -0.4] {
            for &count in &[1usize, 5, 20, 70] {
                let rule = gauss_laguerre_nodes(count, alpha).unwrap();
                for p in 0..(2 * count).min(12) {
                    let exact = (ln_gamma_pos(alpha + p as f64 + 1.0)).exp();
                    let got = rule.integrate(|x| x.powi(p as i32));
                    assert_relative_eq!(got, exact, max_relative = 1e-11);
                }
            }
        }
    }

    #[test]
    fn gauss_laguerre_orthogonality() {
        // ∫ L_m L_n e^{-x} dx = δ_mn
        let rule = gauss_laguerre_nodes(30, 0.0).unwrap();
        for m in 0..25 {
            for n in 0..25 {
                let v = rule.integrate(|x| laguerre(m, x) * laguerre(n, x));
                let expected = if m == n { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-9, "m={m} n={n} v={v}");
            }
        }
    }
}
