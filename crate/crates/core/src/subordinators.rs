//! Lévy subordinators used as stochastic clocks, and the subordinate model
//! that pairs a diffusion with one of them.
//!
//! Time-changing the diffusion keeps its eigenfunctions and maps each
//! eigenvalue through the Laplace exponent, so the only extra numerics are the
//! exponent itself and the short-rate function of the subordinate model.

use crate::error::{Error, Result};
use crate::models::{DiffusionModel, ModelKind};
use crate::quad;
use crate::specfun;

/// `e^{-eta s}` is below this beyond the integration cutoff of the Lévy
/// measure tail.
const TAIL_CUTOFF: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SubordinatorSpec {
    /// Deterministic unit-speed clock.
    #[default]
    None,
    /// Inverse Gaussian with drift `gamma`, mean rate `mu` and variance rate
    /// `nu` of the jump part.
    InverseGaussian { gamma: f64, mu: f64, nu: f64 },
    /// Gamma process (tempered stable with `p = 0`).
    Gamma { gamma: f64, c: f64, eta: f64 },
    /// Tempered stable with Lévy density `c s^{-p-1} e^{-eta s}`.
    TemperedStable { gamma: f64, c: f64, p: f64, eta: f64 },
}

impl SubordinatorSpec {
    pub fn inverse_gaussian(gamma: f64, mu: f64, nu: f64) -> Result<Self> {
        let s = SubordinatorSpec::InverseGaussian { gamma, mu, nu };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        let drift = match *self {
            SubordinatorSpec::None => return Ok(()),
            SubordinatorSpec::InverseGaussian { gamma, mu, nu } => {
                if !(mu > 0.0 && mu.is_finite() && nu > 0.0 && nu.is_finite()) {
                    return bad(format!("IG subordinator needs mu > 0 and nu > 0, got mu={mu}, nu={nu}"));
                }
                gamma
            }
            SubordinatorSpec::Gamma { gamma, c, eta } => {
                if !(c > 0.0 && c.is_finite() && eta > 0.0 && eta.is_finite()) {
                    return bad(format!("gamma subordinator needs c > 0 and eta > 0, got c={c}, eta={eta}"));
                }
                gamma
            }
            SubordinatorSpec::TemperedStable { gamma, c, p, eta } => {
                if !(c > 0.0 && c.is_finite()) {
                    return bad(format!("tempered stable subordinator needs c > 0, got {c}"));
                }
                if !(p < 1.0 && p.is_finite()) {
                    return bad(format!("tempered stable index must be below 1, got {p}"));
                }
                let eta_ok = if p > 0.0 { eta >= 0.0 } else { eta > 0.0 };
                if !(eta_ok && eta.is_finite()) {
                    return bad(format!("tempered stable tempering eta={eta} is invalid for p={p}"));
                }
                gamma
            }
        };
        if !(drift >= 0.0 && drift.is_finite()) {
            return bad(format!("subordinator drift must be nonnegative, got {drift}"));
        }
        Ok(())
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, SubordinatorSpec::None)
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            SubordinatorSpec::None => "none",
            SubordinatorSpec::InverseGaussian { .. } => "ig",
            SubordinatorSpec::Gamma { .. } => "gamma",
            SubordinatorSpec::TemperedStable { .. } => "tempered_stable",
        }
    }

    pub fn drift(&self) -> f64 {
        match *self {
            SubordinatorSpec::None => 1.0,
            SubordinatorSpec::InverseGaussian { gamma, .. }
            | SubordinatorSpec::Gamma { gamma, .. }
            | SubordinatorSpec::TemperedStable { gamma, .. } => gamma,
        }
    }

    /// Lévy density as `(c, p, eta)` in `c s^{-p-1} e^{-eta s}`; `None` for
    /// the trivial clock.
    pub fn levy_density_params(&self) -> Option<(f64, f64, f64)> {
        match *self {
            SubordinatorSpec::None => None,
            SubordinatorSpec::InverseGaussian { mu, nu, .. } => {
                Some((mu * (mu / (2.0 * std::f64::consts::PI * nu)).sqrt(), 0.5, mu / (2.0 * nu)))
            }
            SubordinatorSpec::Gamma { c, eta, .. } => Some((c, 0.0, eta)),
            SubordinatorSpec::TemperedStable { c, p, eta, .. } => Some((c, p, eta)),
        }
    }

    /// Laplace exponent `phi(lambda)`, extended analytically to negative
    /// `lambda` while the closed form stays real.
    pub fn laplace_exponent(&self, lambda: f64) -> Result<f64> {
        if lambda.is_nan() {
            return Err(Error::domain("Laplace exponent argument is NaN"));
        }
        match *self {
            SubordinatorSpec::None => Ok(lambda),
            SubordinatorSpec::InverseGaussian { gamma, mu, nu } => {
                let arg = 1.0 + 2.0 * nu * lambda / mu;
                if arg < 0.0 {
                    return Err(Error::domain(format!(
                        "IG Laplace exponent undefined at lambda={lambda} (root argument {arg} < 0)"
                    )));
                }
                // sqrt(1+z) - 1 = z / (sqrt(1+z) + 1) keeps small lambda accurate.
                let z = arg - 1.0;
                Ok(gamma * lambda + mu * mu / nu * z / (arg.sqrt() + 1.0))
            }
            SubordinatorSpec::Gamma { gamma, c, eta } => {
                let z = lambda / eta;
                if z <= -1.0 {
                    return Err(Error::domain(format!("gamma Laplace exponent undefined at lambda={lambda}")));
                }
                Ok(gamma * lambda + c * z.ln_1p())
            }
            SubordinatorSpec::TemperedStable { gamma, c, p, eta } => {
                if p == 0.0 {
                    return SubordinatorSpec::Gamma { gamma, c, eta }.laplace_exponent(lambda);
                }
                if lambda + eta < 0.0 {
                    return Err(Error::domain(format!(
                        "tempered stable Laplace exponent undefined at lambda={lambda}"
                    )));
                }
                Ok(gamma * lambda - c * gamma_neg(p) * ((lambda + eta).powf(p) - eta.powf(p)))
            }
        }
    }

    /// `E[T_1] = gamma + int s nu(ds)`.
    pub fn mean_rate(&self) -> Result<f64> {
        match *self {
            SubordinatorSpec::None => Ok(1.0),
            SubordinatorSpec::InverseGaussian { gamma, mu, .. } => Ok(gamma + mu),
            SubordinatorSpec::Gamma { gamma, c, eta } => Ok(gamma + c / eta),
            SubordinatorSpec::TemperedStable { gamma, c, p, eta } => {
                if eta == 0.0 {
                    return Err(Error::DivergentMoment);
                }
                Ok(gamma + c * specfun::gamma(1.0 - p) * eta.powf(p - 1.0))
            }
        }
    }
}

/// `Gamma(-p)` for `p < 1`, `p != 0`.
fn gamma_neg(p: f64) -> f64 {
    specfun::gamma(-p)
}

/// A diffusion run on a (possibly trivial) subordinator clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingModel {
    diffusion: DiffusionModel,
    sub: SubordinatorSpec,
}

impl PricingModel {
    /// Pairs a diffusion with a clock. Rejects pairs where the Laplace
    /// exponent is undefined at the bottom of the diffusion spectrum.
    pub fn new(diffusion: DiffusionModel, sub: SubordinatorSpec) -> Result<Self> {
        sub.validate()?;
        let lambda0 = diffusion.ground_eigenvalue();
        let phi0 = sub.laplace_exponent(lambda0).map_err(|e| {
            Error::Parameter(format!(
                "subordinator cannot be applied to this {} model with ground eigenvalue {lambda0}: {e}",
                diffusion.kind().name()
            ))
        })?;
        if !phi0.is_finite() {
            return Err(Error::Parameter("subordinate ground eigenvalue is not finite".into()));
        }
        Ok(PricingModel { diffusion, sub })
    }

    pub fn diffusion(diffusion: DiffusionModel) -> Self {
        PricingModel { diffusion, sub: SubordinatorSpec::None }
    }

    pub fn base(&self) -> &DiffusionModel {
        &self.diffusion
    }

    pub fn subordinator(&self) -> &SubordinatorSpec {
        &self.sub
    }

    pub fn is_subordinated(&self) -> bool {
        !self.sub.is_trivial()
    }

    /// `phi(lambda_n)`; equals `lambda_n` for the trivial clock.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        // Construction guarantees the exponent is defined on the spectrum.
        self.sub.laplace_exponent(self.diffusion.eigenvalue(n)).unwrap_or(f64::NAN)
    }

    pub fn eigenvalues(&self, n_max: usize) -> Vec<f64> {
        (0..=n_max).map(|n| self.eigenvalue(n)).collect()
    }

    pub fn short_rate(&self, x: f64) -> Result<f64> {
        short_rate_map(&self.diffusion, &self.sub, x)
    }
}

pub fn laplace_exponent(sub: &SubordinatorSpec, lambda: f64) -> Result<f64> {
    sub.laplace_exponent(lambda)
}

pub fn subordinate_eigenvalue(model: &DiffusionModel, sub: &SubordinatorSpec, n: usize) -> Result<f64> {
    sub.laplace_exponent(model.eigenvalue(n))
}

pub fn mean_rate(sub: &SubordinatorSpec) -> Result<f64> {
    sub.mean_rate()
}

/// Short rate of the subordinate model,
/// `r^phi(x) = gamma r(x) + int (1 - P(s, x)) nu(ds)`.
pub fn short_rate_map(model: &DiffusionModel, sub: &SubordinatorSpec, x: f64) -> Result<f64> {
    model.check_state(x)?;
    let Some((c, p, eta)) = sub.levy_density_params() else {
        return Ok(model.short_rate(x));
    };
    if model.kind() == ModelKind::ThreeHalves {
        return Err(Error::UnsupportedModel { model: "3/2", what: "subordinate short-rate map" });
    }
    let drift_part = sub.drift() * model.short_rate(x);
    // 1 - P(s, x) written through expm1 so the small-s end keeps its digits.
    let one_minus_p = |s: f64| -> f64 {
        let (a, b) = model.affine_coefficients(s).expect("affine model");
        -(a.ln() - b * x).exp_m1()
    };
    let tol = 1e-13;
    // Head on (0, 1]: s = u^{1/(1-p)} turns c s^{-p-1} ds into
    // c/(1-p) s^{-1} du, and (1 - P)/s stays bounded as s -> 0.
    let head = if p > 0.0 {
        let q = 1.0 / (1.0 - p);
        let f = |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let s = u.powf(q);
            c * q * one_minus_p(s) / s * (-eta * s).exp()
        };
        quad::integrate_tol(f, 0.0, 1.0, tol, tol)?
    } else {
        let f = |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            c * one_minus_p(s) * s.powf(-p - 1.0) * (-eta * s).exp()
        };
        quad::integrate_tol(f, 0.0, 1.0, tol, tol)?
    };
    let tail_density = |s: f64| c * one_minus_p(s) * s.powf(-p - 1.0) * (-eta * s).exp();
    let tail = if eta > 0.0 {
        let s_max = (-TAIL_CUTOFF.ln() / eta).max(1.0);
        // Split into unit-ish panels so the adaptive rule sees the decay.
        let mut acc = 0.0;
        let mut lo = 1.0;
        while lo < s_max {
            let hi = (lo * 2.0).min(s_max);
            acc += quad::integrate_tol(tail_density, lo, hi, tol, tol)?;
            lo = hi;
        }
        acc
    } else {
        // Pure stable tail: s = 1/v maps [1, inf) onto (0, 1].
        quad::integrate_tol(|v: f64| if v <= 0.0 { 0.0 } else { tail_density(1.0 / v) / (v * v) }, 0.0, 1.0, tol, tol)?
    };
    Ok(drift_part + head + tail)
}
