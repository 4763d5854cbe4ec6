//! Orthogonal polynomial sequences and the handful of classical special
//! functions the spectral models are built from.
//!
//! Two flavours of each polynomial family are provided. The raw sequences
//! (`laguerre_sequence`, `hermite_sequence`) are the textbook three-term
//! recursions. The normalized variants divide out the orthogonality norm so
//! that degrees in the hundreds stay in floating-point range; they satisfy the
//! same recursion after rescaling and are what the model and coefficient
//! layers consume.

use crate::error::{Error, Result};

/// `Gamma(x)`.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `ln |Gamma(x)|`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

const RESCALE_AT: f64 = 1e150;

/// `L_n^{(alpha)}(x)` for `n = 0..=n_max`.
pub fn laguerre_sequence(n_max: usize, alpha: f64, x: f64) -> Result<Vec<f64>> {
    check_laguerre_args(alpha, x)?;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max >= 1 {
        out.push(-x + alpha + 1.0);
    }
    for n in 2..=n_max {
        let nf = n as f64;
        let next = (2.0 + (alpha - 1.0 - x) / nf) * out[n - 1] - (1.0 + (alpha - 1.0) / nf) * out[n - 2];
        out.push(next);
    }
    Ok(out)
}

/// Physicists' Hermite polynomials `H_n(x)` for `n = 0..=n_max`.
pub fn hermite_sequence(n_max: usize, x: f64) -> Result<Vec<f64>> {
    if !x.is_finite() {
        return Err(Error::domain(format!("hermite argument must be finite, got {x}")));
    }
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max >= 1 {
        out.push(2.0 * x);
    }
    for n in 2..=n_max {
        let next = 2.0 * x * out[n - 1] - 2.0 * (n as f64 - 1.0) * out[n - 2];
        out.push(next);
    }
    Ok(out)
}

fn check_laguerre_args(alpha: f64, x: f64) -> Result<()> {
    if !(alpha > -1.0) {
        return Err(Error::domain(format!("laguerre order must exceed -1, got {alpha}")));
    }
    if !x.is_finite() {
        return Err(Error::domain(format!("laguerre argument must be finite, got {x}")));
    }
    Ok(())
}

/// Runs `p_n = a_n p_{n-1} - b_n p_{n-2}` from `(p0, p1)` and returns
/// `p_n * exp(ln_prefactor)`, carrying a running log-scale so that neither the
/// recursion nor the prefactor overflows on its own.
fn scaled_recursion(
    n_max: usize,
    p1: f64,
    ln_prefactor: f64,
    coeffs: impl Fn(usize) -> (f64, f64),
) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut log_scale = 0.0_f64;
    let mut prev = 1.0_f64;
    out.push(ln_prefactor.exp());
    if n_max == 0 {
        return out;
    }
    let mut cur = p1;
    out.push(cur * ln_prefactor.exp());
    for n in 2..=n_max {
        let (a, b) = coeffs(n);
        let next = a * cur - b * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            prev /= RESCALE_AT;
            log_scale += RESCALE_AT.ln();
        }
        out.push(cur * (ln_prefactor + log_scale).exp());
    }
    out
}

fn laguerre_coeffs(alpha: f64, x: f64) -> impl Fn(usize) -> (f64, f64) {
    move |n| {
        let nf = n as f64;
        let denom = (nf * (nf + alpha)).sqrt();
        let a = (2.0 * nf + alpha - 1.0 - x) / denom;
        let b = ((nf - 1.0) * (nf + alpha - 1.0)).sqrt() / denom;
        (a, b)
    }
}

/// `L_n^{(alpha)}(x) * sqrt(n! / Gamma(n + alpha + 1))`, the Laguerre
/// polynomials scaled to unit norm against `x^alpha e^{-x}`.
pub fn laguerre_normalized(n_max: usize, alpha: f64, x: f64) -> Result<Vec<f64>> {
    check_laguerre_args(alpha, x)?;
    let p1 = (alpha + 1.0 - x) / (alpha + 1.0).sqrt();
    Ok(scaled_recursion(n_max, p1, -0.5 * ln_gamma(alpha + 1.0), laguerre_coeffs(alpha, x)))
}

/// Orthonormal Laguerre functions
/// `sqrt(n!/Gamma(n+alpha+1)) L_n^{(alpha)}(x) e^{-x/2} x^{alpha/2}` for `x > 0`.
pub fn laguerre_functions(n_max: usize, alpha: f64, x: f64) -> Result<Vec<f64>> {
    check_laguerre_args(alpha, x)?;
    if !(x > 0.0) {
        return Err(Error::domain(format!("laguerre functions need x > 0, got {x}")));
    }
    let p1 = (alpha + 1.0 - x) / (alpha + 1.0).sqrt();
    let ln_pref = -0.5 * x + 0.5 * alpha * x.ln() - 0.5 * ln_gamma(alpha + 1.0);
    Ok(scaled_recursion(n_max, p1, ln_pref, laguerre_coeffs(alpha, x)))
}

/// `exp(ln_pref) * laguerre_normalized(..)`, with the prefactor folded into
/// the running scale so that a tiny prefactor times a huge polynomial does not
/// underflow first.
pub(crate) fn laguerre_normalized_scaled(n_max: usize, alpha: f64, x: f64, ln_pref: f64) -> Result<Vec<f64>> {
    check_laguerre_args(alpha, x)?;
    let p1 = (alpha + 1.0 - x) / (alpha + 1.0).sqrt();
    Ok(scaled_recursion(n_max, p1, ln_pref - 0.5 * ln_gamma(alpha + 1.0), laguerre_coeffs(alpha, x)))
}

/// `exp(ln_pref) * hermite_normalized(..)`.
pub(crate) fn hermite_normalized_scaled(n_max: usize, x: f64, ln_pref: f64) -> Result<Vec<f64>> {
    if !x.is_finite() {
        return Err(Error::domain(format!("hermite argument must be finite, got {x}")));
    }
    let ln_pref = ln_pref - 0.25 * std::f64::consts::PI.ln();
    Ok(scaled_recursion(n_max, std::f64::consts::SQRT_2 * x, ln_pref, hermite_coeffs(x)))
}

fn hermite_coeffs(x: f64) -> impl Fn(usize) -> (f64, f64) {
    move |n| {
        let nf = n as f64;
        ((2.0 / nf).sqrt() * x, ((nf - 1.0) / nf).sqrt())
    }
}

/// `H_n(x) / sqrt(2^n n! sqrt(pi))`.
pub fn hermite_normalized(n_max: usize, x: f64) -> Result<Vec<f64>> {
    if !x.is_finite() {
        return Err(Error::domain(format!("hermite argument must be finite, got {x}")));
    }
    let ln_pref = -0.25 * std::f64::consts::PI.ln();
    Ok(scaled_recursion(n_max, std::f64::consts::SQRT_2 * x, ln_pref, hermite_coeffs(x)))
}

/// Orthonormal Hermite functions `H_n(x) e^{-x^2/2} / sqrt(2^n n! sqrt(pi))`.
pub fn hermite_functions(n_max: usize, x: f64) -> Result<Vec<f64>> {
    if !x.is_finite() {
        return Err(Error::domain(format!("hermite argument must be finite, got {x}")));
    }
    let ln_pref = -0.5 * x * x - 0.25 * std::f64::consts::PI.ln();
    Ok(scaled_recursion(n_max, std::f64::consts::SQRT_2 * x, ln_pref, hermite_coeffs(x)))
}

/// `ln P(a, x)`, the log of the regularized lower incomplete gamma function.
///
/// Series for `x < a + 1`, Lentz continued fraction for the complement
/// otherwise.
pub fn ln_regularized_lower_gamma(a: f64, x: f64) -> Result<f64> {
    check_gamma_args(a, x)?;
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        Ok(ln_gamma_series(a, x) - ln_gamma(a))
    } else {
        let q = upper_gamma_fraction(a, x).exp();
        Ok((-q).ln_1p())
    }
}

/// `P(a, x) = gamma(a, x) / Gamma(a)`.
pub fn regularized_lower_gamma(a: f64, x: f64) -> Result<f64> {
    ln_regularized_lower_gamma(a, x).map(f64::exp)
}

/// Lower incomplete gamma `gamma(a, x) = int_0^x e^{-y} y^{a-1} dy`.
pub fn lower_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    check_gamma_args(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        Ok(ln_gamma_series(a, x).exp())
    } else {
        let ln_g = ln_gamma(a);
        let q = upper_gamma_fraction(a, x).exp();
        Ok(ln_g.exp() * (-q).ln_1p().exp())
    }
}

fn check_gamma_args(a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("incomplete gamma needs a > 0, got {a}")));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!("incomplete gamma needs x >= 0, got {x}")));
    }
    Ok(())
}

/// `ln gamma(a, x)` by the power series `e^{-x} x^a sum x^n / (a)_{n+1}`.
fn ln_gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..10_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    -x + a * x.ln() + sum.ln()
}

/// `ln Q(a, x)` by the modified Lentz continued fraction.
fn upper_gamma_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    -x + a * x.ln() - ln_gamma(a) + h.ln()
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal CDF, evaluated through `erfc` so both tails keep
/// relative accuracy.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `(Erf(x), Phi(x))`.
pub fn erf_and_normal_cdf(x: f64) -> Result<(f64, f64)> {
    if x.is_nan() {
        return Err(Error::domain("erf argument is NaN"));
    }
    Ok((erf(x), normal_cdf(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use approx::assert_relative_eq;

    #[test]
    fn laguerre_examples() {
        assert_eq!(laguerre_sequence(0, 0.5, 7.3).unwrap(), vec![1.0]);
        assert_eq!(laguerre_sequence(1, 0.5, 2.0).unwrap(), vec![1.0, -0.5]);
        // (x^2 - 4x + 2) / 2 at x = 1
        let l = laguerre_sequence(2, 0.0, 1.0).unwrap();
        assert_relative_eq!(l[2], -0.5, epsilon = 1e-15);
    }

    #[test]
    fn laguerre_rejects_bad_order() {
        assert!(laguerre_sequence(3, -1.0, 1.0).is_err());
        assert!(laguerre_sequence(3, 0.5, f64::NAN).is_err());
        assert!(laguerre_normalized(3, -1.5, 1.0).is_err());
    }

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite_sequence(0, 5.0).unwrap(), vec![1.0]);
        assert_eq!(hermite_sequence(1, 3.0).unwrap(), vec![1.0, 6.0]);
        assert_eq!(hermite_sequence(2, 1.0).unwrap()[2], 2.0);
        assert!(hermite_sequence(2, f64::INFINITY).is_err());
    }

    #[test]
    fn hermite_parity() {
        for &x in &[0.1, 0.7, 1.9, 3.3, 5.0, 8.0] {
            let pos = hermite_sequence(60, x).unwrap();
            let neg = hermite_sequence(60, -x).unwrap();
            for n in 0..=60 {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let scale = pos[n].abs().max(1e-300);
                assert!((neg[n] - sign * pos[n]).abs() <= 1e-12 * scale, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn normalized_sequences_match_raw() {
        for &alpha in &[-0.5, 0.0, 0.5, 2.7] {
            for &x in &[0.05, 1.0, 7.5, 30.0] {
                let raw = laguerre_sequence(40, alpha, x).unwrap();
                let nrm = laguerre_normalized(40, alpha, x).unwrap();
                let fun = laguerre_functions(40, alpha, x).unwrap();
                for n in 0..=40 {
                    let scale = (ln_gamma(n as f64 + 1.0) - ln_gamma(n as f64 + alpha + 1.0)).exp().sqrt();
                    let expect = raw[n] * scale;
                    assert_relative_eq!(nrm[n], expect, max_relative = 1e-11, epsilon = 1e-12);
                    let w = (-0.5 * x + 0.5 * alpha * x.ln()).exp();
                    assert_relative_eq!(fun[n], expect * w, max_relative = 1e-11, epsilon = 1e-14);
                }
            }
        }
        let raw = hermite_sequence(50, 1.3).unwrap();
        let nrm = hermite_normalized(50, 1.3).unwrap();
        let fun = hermite_functions(50, 1.3).unwrap();
        for n in 0..=50 {
            let ln_norm = 0.5 * (n as f64 * 2f64.ln() + ln_gamma(n as f64 + 1.0) + 0.5 * std::f64::consts::PI.ln());
            assert_relative_eq!(nrm[n], raw[n] / ln_norm.exp(), max_relative = 1e-11, epsilon = 1e-13);
            assert_relative_eq!(fun[n], nrm[n] * (-0.5f64 * 1.3 * 1.3).exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn normalized_sequences_survive_high_degree() {
        let h = hermite_functions(2000, 12.0).unwrap();
        assert!(h.iter().all(|v| v.is_finite()));
        // Hermite functions are bounded by pi^{-1/4}.
        assert!(h.iter().all(|v| v.abs() < 0.76));
        let l = laguerre_functions(800, 2.5, 40.0).unwrap();
        assert!(l.iter().all(|v| v.is_finite() && v.abs() < 1.0));
    }

    #[test]
    fn incomplete_gamma_examples() {
        assert_eq!(lower_incomplete_gamma(1.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(lower_incomplete_gamma(1.0, 1.0).unwrap(), 1.0 - (-1.0f64).exp(), max_relative = 1e-14);
        // Oracle: adaptive quadrature of the defining integral.
        let oracle = quad::integrate(|y| (-y).exp() * y.powf(1.5), 0.0, 3.0, 1e-14).unwrap();
        assert_relative_eq!(lower_incomplete_gamma(2.5, 3.0).unwrap(), oracle, max_relative = 1e-12);
        assert!(lower_incomplete_gamma(0.0, 1.0).is_err());
        assert!(lower_incomplete_gamma(1.0, -1.0).is_err());
    }

    #[test]
    fn incomplete_gamma_limit_is_complete_gamma() {
        // Complete gamma from Gamma(a+1) = a Gamma(a) products.
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let cases: Vec<(f64, f64)> = vec![
            (0.5, sqrt_pi),
            (1.5, 0.5 * sqrt_pi),
            (3.5, 2.5 * 1.5 * 0.5 * sqrt_pi),
            (5.0, 24.0),
            (10.0, 362_880.0),
            (12.5, (0..12).fold(sqrt_pi, |acc, k| acc * (0.5 + k as f64))),
        ];
        for (a, g) in cases {
            let v = lower_incomplete_gamma(a, 200.0).unwrap();
            assert_relative_eq!(v, g, max_relative = 1e-10);
        }
    }

    #[test]
    fn incomplete_gamma_monotone_in_x() {
        for &a in &[0.255, 1.0, 4.3, 30.0] {
            let mut prev = 0.0;
            for k in 0..200 {
                let x = k as f64 * 0.37;
                let v = regularized_lower_gamma(a, x).unwrap();
                assert!(v >= prev - 1e-16, "a={a} x={x}");
                assert!(v <= 1.0 + 1e-15);
                prev = v;
            }
        }
    }

    #[test]
    fn erf_examples_and_identity() {
        let (e0, p0) = erf_and_normal_cdf(0.0).unwrap();
        assert_eq!(e0, 0.0);
        assert_eq!(p0, 0.5);
        let (einf, pinf) = erf_and_normal_cdf(f64::INFINITY).unwrap();
        assert_eq!((einf, pinf), (1.0, 1.0));
        let oracle = quad::integrate(|t| (-t * t).exp(), 0.0, 1.0, 1e-15).unwrap() * 2.0 / std::f64::consts::PI.sqrt();
        assert_relative_eq!(erf(1.0), oracle, max_relative = 1e-14);
        for k in -80..=80 {
            let x = k as f64 * 0.1;
            let (e, p) = erf_and_normal_cdf(x).unwrap();
            assert!((p - 0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))).abs() <= 1e-14);
            assert!((erf(-x) + e).abs() <= 1e-15);
        }
    }
}
