//! Restricted inner products of eigenfunctions and the discounted-strike
//! projections used by the coefficient recursion.
//!
//! Everything is computed in normalized form. For each model there is a
//! cumulative matrix `F(x)` with `F(l) = 0`, `F(r) = I` and
//! `pi_{m,n}(x, y) = F(y) - F(x)`, and likewise a cumulative projection vector
//! `G(x)` with `p_n(x, y) = G(y) - G(x)`. The raw textbook integrals
//! (`laguerre_a`, `laguerre_b`, `hermite_a`, `hermite_b`) are recovered from
//! the normalized tables by multiplying the norms back in.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::models::{DiffusionModel, ModelKind};
use crate::series::Truncation;
use crate::specfun::{self, ln_gamma};
use crate::subordinators::PricingModel;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(Error::domain(format!("laguerre order must exceed -1, got {alpha}")));
    }
    Ok(())
}

fn check_nonneg_abscissa(x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("laguerre integral upper limit must be >= 0, got {x}")));
    }
    Ok(())
}

/// `ln sqrt(Gamma(n + alpha + 1) / n!)`, the Laguerre norm.
fn ln_laguerre_norm(n: usize, alpha: f64) -> f64 {
    0.5 * (ln_gamma(n as f64 + alpha + 1.0) - ln_gamma(n as f64 + 1.0))
}

/// `ln sqrt(2^n n! sqrt(pi))`, the Hermite norm.
fn ln_hermite_norm(n: usize) -> f64 {
    0.5 * (n as f64 * 2f64.ln() + ln_gamma(n as f64 + 1.0) + 0.5 * PI.ln())
}

/// Normalized Laguerre overlaps
/// `int_0^x l_m(y) l_n(y) y^alpha e^{-y} dy` for `m, n <= n_max`, where `l_n`
/// are the unit-norm Laguerre polynomials. `x = inf` gives the identity.
pub fn laguerre_overlap_table(n_max: usize, alpha: f64, x: f64) -> Result<DMatrix<f64>> {
    check_alpha(alpha)?;
    check_nonneg_abscissa(x)?;
    let size = n_max + 1;
    if x == 0.0 {
        return Ok(DMatrix::zeros(size, size));
    }
    if x.is_infinite() {
        return Ok(DMatrix::identity(size, size));
    }
    // ell[j] holds the Laguerre functions of order alpha + j up to degree
    // n_max - j (at least degree 0 for the off-diagonal formula's order + 1).
    let ell: Vec<Vec<f64>> = (0..=size)
        .map(|j| specfun::laguerre_functions(n_max.saturating_sub(j), alpha + j as f64, x))
        .collect::<Result<_>>()?;
    let sx = x.sqrt();

    // Diagonal chain: d_j[n] is the (n, n) entry at order alpha + j, built
    // from the order-(alpha + j + 1) entry of one degree less.
    let mut upper: Vec<f64> = Vec::new();
    for j in (0..size).rev() {
        let mut cur = Vec::with_capacity(size - j);
        cur.push(specfun::regularized_lower_gamma(alpha + j as f64 + 1.0, x)?);
        for n in 1..(size - j) {
            let step = ell[j][n] * ell[j + 1][n - 1] * sx / (n as f64).sqrt();
            cur.push(step + upper[n - 1]);
        }
        upper = cur;
    }
    let diag = upper;

    let l0 = &ell[0];
    let l1 = &ell[1];
    let lm1 = |k: usize| if k == 0 { 0.0 } else { l1[k - 1] };
    let mut out = DMatrix::zeros(size, size);
    for m in 0..size {
        out[(m, m)] = diag[m];
        for n in 0..m {
            let (mf, nf) = (m as f64, n as f64);
            let v = sx / (mf - nf) * (mf.sqrt() * l0[n] * lm1(m) - nf.sqrt() * l0[m] * lm1(n));
            out[(m, n)] = v;
            out[(n, m)] = v;
        }
    }
    Ok(out)
}

/// `a_{n,m}^{(alpha)}(x) = int_0^x L_n L_m e^{-y} y^alpha dy`.
pub fn laguerre_a(n: usize, m: usize, alpha: f64, x: f64) -> Result<f64> {
    let table = laguerre_overlap_table(n.max(m), alpha, x)?;
    Ok(table[(n, m)] * (ln_laguerre_norm(n, alpha) + ln_laguerre_norm(m, alpha)).exp())
}

/// Normalized `int_0^x y^alpha e^{-s y} l_n(y) dy` for `n <= n_max`.
pub fn laguerre_b_table(n_max: usize, alpha: f64, s: f64, x: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    check_nonneg_abscissa(x)?;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(format!("laguerre_b needs s > 0, got {s}")));
    }
    let size = n_max + 1;
    if x == 0.0 {
        return Ok(vec![0.0; size]);
    }
    if x.is_infinite() {
        let sm1 = s - 1.0;
        return Ok((0..size)
            .map(|n| {
                if sm1 == 0.0 && n > 0 {
                    return 0.0;
                }
                let nf = n as f64;
                let ln = ln_laguerre_norm(n, alpha) + nf * sm1.abs().ln() - (alpha + nf + 1.0) * s.ln();
                let sign = if sm1 < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
                sign * ln.exp()
            })
            .collect());
    }
    let ln_x = x.ln();
    // t[j][i] = e^{-s x} x^{alpha + j} l_i^{(alpha + j)}(x), j >= 1.
    let t: Vec<Vec<f64>> = (0..=size)
        .map(|j| {
            if j == 0 {
                return Ok(Vec::new());
            }
            let order = alpha + j as f64;
            specfun::laguerre_normalized_scaled(n_max.saturating_sub(j), order, x, -s * x + order * ln_x)
        })
        .collect::<Result<_>>()?;
    let mut upper: Vec<f64> = Vec::new();
    for j in (0..size).rev() {
        let order = alpha + j as f64;
        let ln_seed =
            -(order + 1.0) * s.ln() + specfun::ln_regularized_lower_gamma(order + 1.0, s * x)? + 0.5 * ln_gamma(order + 1.0);
        let mut cur = Vec::with_capacity(size - j);
        cur.push(ln_seed.exp());
        for n in 1..(size - j) {
            cur.push((t[j + 1][n - 1] + (s - 1.0) * upper[n - 1]) / (n as f64).sqrt());
        }
        upper = cur;
    }
    Ok(upper)
}

/// `b_n^{(alpha)}(s, x) = int_0^x y^alpha e^{-s y} L_n^{(alpha)}(y) dy`.
pub fn laguerre_b(n: usize, alpha: f64, s: f64, x: f64) -> Result<f64> {
    let table = laguerre_b_table(n, alpha, s, x)?;
    Ok(table[n] * ln_laguerre_norm(n, alpha).exp())
}

/// Normalized Hermite overlaps `int_{-inf}^x psi_m psi_n dy` with `psi_n` the
/// Hermite functions.
pub fn hermite_overlap_table(n_max: usize, x: f64) -> Result<DMatrix<f64>> {
    if x.is_nan() {
        return Err(Error::domain("hermite integral upper limit is NaN"));
    }
    let size = n_max + 1;
    if x == f64::NEG_INFINITY {
        return Ok(DMatrix::zeros(size, size));
    }
    if x == f64::INFINITY {
        return Ok(DMatrix::identity(size, size));
    }
    let psi = specfun::hermite_functions(n_max + 1, x)?;
    let mut out = DMatrix::zeros(size, size);
    let mut d = 0.5 * specfun::erfc(-x);
    out[(0, 0)] = d;
    for n in 1..size {
        d -= psi[n - 1] * psi[n] / (2.0 * n as f64).sqrt();
        out[(n, n)] = d;
    }
    for m in 0..size {
        for n in 0..m {
            let (mf, nf) = (m as f64, n as f64);
            let v = ((2.0 * (mf + 1.0)).sqrt() * psi[n] * psi[m + 1] - (2.0 * (nf + 1.0)).sqrt() * psi[m] * psi[n + 1])
                / (2.0 * (mf - nf));
            out[(m, n)] = v;
            out[(n, m)] = v;
        }
    }
    Ok(out)
}

/// `a_{n,m}(x) = int_{-inf}^x e^{-y^2} H_n H_m dy`.
pub fn hermite_a(n: usize, m: usize, x: f64) -> Result<f64> {
    let table = hermite_overlap_table(n.max(m), x)?;
    Ok(table[(n, m)] * (ln_hermite_norm(n) + ln_hermite_norm(m)).exp())
}

/// `int_{-inf}^x e^{s y - y^2} H_n(y) dy / sqrt(2^n n!)` for `n <= n_max`.
pub fn hermite_b_table(n_max: usize, s: f64, x: f64) -> Result<Vec<f64>> {
    if x.is_nan() || !s.is_finite() {
        return Err(Error::domain(format!("hermite_b arguments must be finite, got s={s}, x={x}")));
    }
    let size = n_max + 1;
    if x == f64::NEG_INFINITY {
        return Ok(vec![0.0; size]);
    }
    let ln_base = 0.25 * s * s + 0.5 * PI.ln();
    if x == f64::INFINITY {
        return Ok((0..size)
            .map(|n| {
                if s == 0.0 && n > 0 {
                    return 0.0;
                }
                let nf = n as f64;
                let ln = ln_base + nf * s.abs().ln() - 0.5 * (nf * 2f64.ln() + ln_gamma(nf + 1.0));
                let sign = if s < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
                sign * ln.exp()
            })
            .collect());
    }
    // pi^{1/4} psi_{n-1}(x) e^{s x - x^2 / 2}
    let h = specfun::hermite_normalized_scaled(n_max, x, s * x - x * x + 0.25 * PI.ln())?;
    let mut out = Vec::with_capacity(size);
    out.push(0.5 * ln_base.exp() * specfun::erfc(0.5 * (s - 2.0 * x)));
    for n in 1..size {
        let v = (-h[n - 1] + s * out[n - 1]) / (2.0 * n as f64).sqrt();
        out.push(v);
    }
    Ok(out)
}

/// `b_n(s, x) = int_{-inf}^x e^{s y - y^2} H_n(y) dy`.
pub fn hermite_b(n: usize, s: f64, x: f64) -> Result<f64> {
    let table = hermite_b_table(n, s, x)?;
    let nf = n as f64;
    Ok(table[n] * (0.5 * (nf * 2f64.ln() + ln_gamma(nf + 1.0))).exp())
}

fn check_closure(model: &DiffusionModel, x: f64) -> Result<()> {
    let ok = match model.kind() {
        ModelKind::Vasicek => !x.is_nan(),
        _ => x >= 0.0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!("{x} is outside the closed {} state space", model.kind().name())))
    }
}

/// Cumulative overlap `F(x)` of size `(n_max + 1)^2`, so that
/// `pi_{m,n}(x, y) = F(y)_{m,n} - F(x)_{m,n}`.
pub fn cumulative_overlap(model: &DiffusionModel, n_max: usize, x: f64) -> Result<DMatrix<f64>> {
    check_closure(model, x)?;
    let s2 = model.sigma() * model.sigma();
    match model.kind() {
        ModelKind::Cir => {
            let (g, b) = model.cir_params();
            laguerre_overlap_table(n_max, b - 1.0, 2.0 * g * x / s2)
        }
        ModelKind::Vasicek => hermite_overlap_table(n_max, vasicek_u(model, x)),
        ModelKind::ThreeHalves => {
            let (_, beta, m) = model.three_halves_params();
            let z = if x == 0.0 { f64::INFINITY } else { beta / x };
            let a = laguerre_overlap_table(n_max, 2.0 * m, z)?;
            Ok(DMatrix::identity(n_max + 1, n_max + 1) - a)
        }
    }
}

fn vasicek_u(model: &DiffusionModel, x: f64) -> f64 {
    if x.is_infinite() {
        return x;
    }
    model.kappa().sqrt() * (x - model.theta()) / model.sigma() + model.vasicek_a()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    pub entries: DMatrix<f64>,
    pub interval: (f64, f64),
    pub kind: ModelKind,
}

/// `pi_{m,n}(x_lo, x_hi) = int_{x_lo}^{x_hi} phi_m phi_n m(z) dz` for
/// `m, n <= n_max`. Endpoints may be the state-space boundaries, including
/// infinities.
pub fn overlap_matrix(model: &DiffusionModel, n_max: usize, x_lo: f64, x_hi: f64) -> Result<OverlapMatrix> {
    if x_lo > x_hi || x_lo.is_nan() || x_hi.is_nan() {
        return Err(Error::Interval { lo: x_lo, hi: x_hi });
    }
    let size = n_max + 1;
    let entries = if x_lo == x_hi {
        check_closure(model, x_lo)?;
        DMatrix::zeros(size, size)
    } else {
        cumulative_overlap(model, n_max, x_hi)? - cumulative_overlap(model, n_max, x_lo)?
    };
    Ok(OverlapMatrix { entries, interval: (x_lo, x_hi), kind: model.kind() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionRoute {
    /// Exact integral of the affine bond price against each eigenfunction.
    ClosedFormAffine,
    /// Expansion of the bond price in the eigenbasis, truncated adaptively.
    EigenExpansion,
}

impl ProjectionRoute {
    /// Closed form where it exists, expansion otherwise.
    pub fn preferred(model: &PricingModel) -> Self {
        if !model.is_subordinated() && model.base().kind() != ModelKind::ThreeHalves {
            ProjectionRoute::ClosedFormAffine
        } else {
            ProjectionRoute::EigenExpansion
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrikeProjection {
    pub entries: Vec<f64>,
    pub notice_delta: f64,
    pub route: ProjectionRoute,
    /// Inner expansion terms used (0 for the closed-form route).
    pub inner_terms: usize,
}

/// Number of terms of `sum_k p_k e^{-Lambda_k delta} F_{k,n}` the adaptive
/// rule keeps. Since `|F_{k,n}| <= 1`, truncating on the absolute weights
/// bounds the error of every entry at once.
pub fn projection_inner_terms(model: &PricingModel, delta: f64, truncation: &Truncation) -> Result<usize> {
    let base = model.base();
    let (_, n) = truncation.sum_with(
        |k| (base.unit_payoff_coefficient(k).abs().ln() - model.eigenvalue(k) * delta).exp(),
        "strike projection inner sum",
    )?;
    Ok(n)
}

/// Cumulative strike projection `G(x)`, so that
/// `p_n(x, y) = int_x^y P(delta, z) phi_n(z) m(z) dz = G(y)_n - G(x)_n`.
///
/// `overlap` may carry a precomputed `F(x)` of at least `n_max + 1` columns
/// and `inner_terms + 1` rows; it is only read on the expansion route.
pub fn cumulative_projection(
    model: &PricingModel,
    n_max: usize,
    x: f64,
    delta: f64,
    route: ProjectionRoute,
    inner_terms: usize,
    overlap: Option<&DMatrix<f64>>,
) -> Result<Vec<f64>> {
    let base = model.base();
    check_closure(base, x)?;
    if !(delta >= 0.0) {
        return Err(Error::domain(format!("notice period must be nonnegative, got {delta}")));
    }
    let size = n_max + 1;
    match route {
        ProjectionRoute::ClosedFormAffine => {
            if model.is_subordinated() || base.kind() == ModelKind::ThreeHalves {
                return Err(Error::InconsistentRoute);
            }
            let (a, bcoef) = base.affine_coefficients(delta)?;
            let (k, th, sig) = (base.kappa(), base.theta(), base.sigma());
            let s2 = sig * sig;
            match base.kind() {
                ModelKind::Cir => {
                    let (g, b) = base.cir_params();
                    let s = bcoef * s2 / (2.0 * g) + (k + g) / (2.0 * g);
                    let k0 = sig / 2f64.sqrt() * (2.0 * g / s2).powf(1.0 - 0.5 * b) / g;
                    let table = laguerre_b_table(n_max, b - 1.0, s, 2.0 * g * x / s2)?;
                    Ok(table.into_iter().map(|v| a * k0 * v).collect())
                }
                ModelKind::Vasicek => {
                    let av = base.vasicek_a();
                    let s = av - bcoef * sig / k.sqrt();
                    let pref = a
                        * (-0.5 * av * av - bcoef * (th - av * sig / k.sqrt())).exp()
                        * (2.0 / (sig * k.sqrt() * PI.sqrt())).sqrt();
                    let table = hermite_b_table(n_max, s, vasicek_u(base, x))?;
                    Ok(table.into_iter().map(|v| pref * v).collect())
                }
                ModelKind::ThreeHalves => unreachable!(),
            }
        }
        ProjectionRoute::EigenExpansion => {
            let rows = inner_terms + 1;
            let dim = rows.max(size);
            let owned;
            let f = match overlap {
                Some(f) if f.nrows() >= rows && f.ncols() >= size => f,
                _ => {
                    owned = cumulative_overlap(base, dim - 1, x)?;
                    &owned
                }
            };
            let weights: Vec<f64> =
                (0..rows).map(|k| base.unit_payoff_coefficient(k) * (-model.eigenvalue(k) * delta).exp()).collect();
            Ok((0..size)
                .map(|n| {
                    let mut acc = crate::series::KahanSum::default();
                    for (k, w) in weights.iter().enumerate() {
                        acc.add(w * f[(k, n)]);
                    }
                    acc.value()
                })
                .collect())
        }
    }
}

/// `p_n(x_lo, x_hi)` for `n <= n_max`.
pub fn strike_projection(
    model: &PricingModel,
    n_max: usize,
    x_lo: f64,
    x_hi: f64,
    delta: f64,
    route: ProjectionRoute,
    truncation: &Truncation,
) -> Result<StrikeProjection> {
    if x_lo > x_hi || x_lo.is_nan() || x_hi.is_nan() {
        return Err(Error::Interval { lo: x_lo, hi: x_hi });
    }
    if route == ProjectionRoute::ClosedFormAffine
        && (model.is_subordinated() || model.base().kind() == ModelKind::ThreeHalves)
    {
        return Err(Error::InconsistentRoute);
    }
    let inner_terms = match route {
        ProjectionRoute::ClosedFormAffine => 0,
        ProjectionRoute::EigenExpansion => projection_inner_terms(model, delta, truncation)?,
    };
    let entries = if x_lo == x_hi {
        vec![0.0; n_max + 1]
    } else {
        let hi = cumulative_projection(model, n_max, x_hi, delta, route, inner_terms, None)?;
        let lo = cumulative_projection(model, n_max, x_lo, delta, route, inner_terms, None)?;
        hi.iter().zip(&lo).map(|(h, l)| h - l).collect()
    };
    Ok(StrikeProjection { entries, notice_delta: delta, route, inner_terms })
}
