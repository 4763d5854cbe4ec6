//! Short-rate diffusions with discrete spectrum: CIR, Vasicek and the 3/2
//! model. Each exposes its eigenvalues, orthonormal eigenfunctions (against
//! the speed measure), the expansion coefficients of the unit payoff and, for
//! the affine pair, the closed-form zero-coupon bond.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specfun::{self, ln_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Cir,
    Vasicek,
    ThreeHalves,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Cir => "CIR",
            ModelKind::Vasicek => "Vasicek",
            ModelKind::ThreeHalves => "3/2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionModel {
    kind: ModelKind,
    kappa: f64,
    theta: f64,
    sigma: f64,
}

impl DiffusionModel {
    pub fn new(kind: ModelKind, kappa: f64, theta: f64, sigma: f64) -> Result<Self> {
        for (name, v) in [("kappa", kappa), ("theta", theta), ("sigma", sigma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        let model = DiffusionModel { kind, kappa, theta, sigma };
        if kind == ModelKind::ThreeHalves {
            let (alpha, _, m) = model.three_halves_params();
            if !(m - alpha + 0.5 > 0.0) {
                return Err(Error::Parameter("3/2 model needs m - alpha + 1/2 > 0".into()));
            }
        }
        Ok(model)
    }

    pub fn cir(kappa: f64, theta: f64, sigma: f64) -> Result<Self> {
        Self::new(ModelKind::Cir, kappa, theta, sigma)
    }

    pub fn vasicek(kappa: f64, theta: f64, sigma: f64) -> Result<Self> {
        Self::new(ModelKind::Vasicek, kappa, theta, sigma)
    }

    pub fn three_halves(kappa: f64, theta: f64, sigma: f64) -> Result<Self> {
        Self::new(ModelKind::ThreeHalves, kappa, theta, sigma)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// CIR `(gamma, b)` with `gamma = sqrt(kappa^2 + 2 sigma^2)` and
    /// `b = 2 kappa theta / sigma^2`.
    pub fn cir_params(&self) -> (f64, f64) {
        let s2 = self.sigma * self.sigma;
        ((self.kappa * self.kappa + 2.0 * s2).sqrt(), 2.0 * self.kappa * self.theta / s2)
    }

    /// Vasicek `a = sigma / kappa^{3/2}`.
    pub fn vasicek_a(&self) -> f64 {
        self.sigma / self.kappa.powf(1.5)
    }

    /// 3/2 `(alpha, beta, m)`.
    pub fn three_halves_params(&self) -> (f64, f64, f64) {
        let s2 = self.sigma * self.sigma;
        let alpha = self.kappa / s2 + 1.0;
        let beta = 2.0 * self.kappa * self.theta / s2;
        let m = ((self.kappa / s2 + 0.5).powi(2) + 2.0 / s2).sqrt();
        (alpha, beta, m)
    }

    /// Endpoints `(l, r)` of the state space.
    pub fn state_space(&self) -> (f64, f64) {
        match self.kind {
            ModelKind::Vasicek => (f64::NEG_INFINITY, f64::INFINITY),
            _ => (0.0, f64::INFINITY),
        }
    }

    pub fn check_state(&self, x: f64) -> Result<()> {
        let ok = match self.kind {
            ModelKind::Cir => x >= 0.0 && x.is_finite(),
            ModelKind::Vasicek => x.is_finite(),
            ModelKind::ThreeHalves => x > 0.0 && x.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("state {x} is outside the {} state space", self.kind.name())))
        }
    }

    /// Short rate as a function of the state; the identity for all three
    /// models.
    pub fn short_rate(&self, x: f64) -> f64 {
        x
    }

    pub fn eigenvalue_gap(&self) -> f64 {
        match self.kind {
            ModelKind::Cir => self.cir_params().0,
            ModelKind::Vasicek => self.kappa,
            ModelKind::ThreeHalves => self.kappa * self.theta,
        }
    }

    pub fn ground_eigenvalue(&self) -> f64 {
        match self.kind {
            ModelKind::Cir => {
                let (g, b) = self.cir_params();
                0.5 * b * (g - self.kappa)
            }
            ModelKind::Vasicek => self.theta - self.sigma * self.sigma / (2.0 * self.kappa * self.kappa),
            ModelKind::ThreeHalves => {
                let (alpha, _, m) = self.three_halves_params();
                self.kappa * self.theta * (m - alpha + 0.5)
            }
        }
    }

    pub fn eigenvalue(&self, n: usize) -> f64 {
        self.ground_eigenvalue() + n as f64 * self.eigenvalue_gap()
    }

    /// `phi_0(x), .., phi_{n_max}(x)`.
    pub fn eigenfunctions(&self, n_max: usize, x: f64) -> Result<Vec<f64>> {
        self.check_state(x)?;
        let s2 = self.sigma * self.sigma;
        match self.kind {
            ModelKind::Cir => {
                let (g, b) = self.cir_params();
                let ln_pref = 0.5 * (0.5 * s2).ln() + 0.5 * b * (2.0 * g / s2).ln() + (self.kappa - g) * x / s2;
                specfun::laguerre_normalized_scaled(n_max, b - 1.0, 2.0 * g * x / s2, ln_pref)
            }
            ModelKind::Vasicek => {
                let a = self.vasicek_a();
                let xi = self.kappa.sqrt() * (x - self.theta) / self.sigma;
                let ln_pref = 0.5 * (0.5 * self.kappa.sqrt() * self.sigma).ln() - a * xi - 0.5 * a * a;
                specfun::hermite_normalized_scaled(n_max, xi + a, ln_pref)
            }
            ModelKind::ThreeHalves => {
                let (alpha, beta, m) = self.three_halves_params();
                let ln_pref = 0.5 * (0.5 * s2).ln() + (m + 0.5) * beta.ln() + (alpha - m - 0.5) * x.ln();
                specfun::laguerre_normalized_scaled(n_max, 2.0 * m, beta / x, ln_pref)
            }
        }
    }

    pub fn eigenfunction(&self, n: usize, x: f64) -> Result<f64> {
        Ok(self.eigenfunctions(n, x)?[n])
    }

    /// `ln N_n`, the eigenfunction normalization constant in front of the raw
    /// polynomial.
    pub fn ln_norm_constant(&self, n: usize) -> f64 {
        let nf = n as f64;
        let s2 = self.sigma * self.sigma;
        match self.kind {
            ModelKind::Cir => {
                let (g, b) = self.cir_params();
                0.5 * (s2.ln() + ln_gamma(nf + 1.0) - 2f64.ln() - ln_gamma(b + nf)) + 0.5 * b * (2.0 * g / s2).ln()
            }
            ModelKind::Vasicek => {
                0.5 * ((self.kappa / PI).sqrt().ln() + self.sigma.ln() - (nf + 1.0) * 2f64.ln() - ln_gamma(nf + 1.0))
            }
            ModelKind::ThreeHalves => {
                let (_, beta, m) = self.three_halves_params();
                0.5 * (s2.ln() + (2.0 * m + 1.0) * beta.ln() + ln_gamma(nf + 1.0)
                    - 2f64.ln()
                    - ln_gamma(2.0 * m + nf + 1.0))
            }
        }
    }

    /// `p_n = (1, phi_n)`, the coefficients of the constant payoff 1.
    pub fn unit_payoff_coefficients(&self, n_max: usize) -> Vec<f64> {
        (0..=n_max).map(|n| self.unit_payoff_coefficient(n)).collect()
    }

    pub fn unit_payoff_coefficient(&self, n: usize) -> f64 {
        let nf = n as f64;
        let s2 = self.sigma * self.sigma;
        let ln_n = self.ln_norm_constant(n);
        match self.kind {
            ModelKind::Cir => {
                let (g, b) = self.cir_params();
                let ratio = (self.kappa - g) / (self.kappa + g);
                let ln_abs = 2f64.ln() + ln_n + ln_gamma(b + nf) - s2.ln() - ln_gamma(nf + 1.0)
                    + b * (s2 / (self.kappa + g)).ln()
                    + nf * ratio.abs().ln();
                let sign = if n % 2 == 1 && ratio < 0.0 { -1.0 } else { 1.0 };
                sign * ln_abs.exp()
            }
            ModelKind::Vasicek => {
                let a = self.vasicek_a();
                let ln_abs = (2.0 / self.sigma).ln() + 0.5 * (PI / self.kappa).ln() + ln_n + nf * a.ln() - 0.25 * a * a;
                ln_abs.exp()
            }
            ModelKind::ThreeHalves => {
                let (alpha, beta, m) = self.three_halves_params();
                let ln_abs = (2.0 / s2).ln() + ln_n - (alpha + m + 0.5) * beta.ln()
                    + ln_gamma(alpha + m + 0.5)
                    + ln_gamma(m + nf - alpha + 0.5)
                    - ln_gamma(nf + 1.0)
                    - ln_gamma(m - alpha + 0.5);
                ln_abs.exp()
            }
        }
    }

    /// `(A(t), B(t))` of the affine bond price `A(t) exp(-B(t) x)`.
    pub fn affine_coefficients(&self, t: f64) -> Result<(f64, f64)> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("bond maturity must be nonnegative, got {t}")));
        }
        let (k, th, s) = (self.kappa, self.theta, self.sigma);
        match self.kind {
            ModelKind::Cir => {
                let (g, b) = self.cir_params();
                let em1 = (g * t).exp_m1();
                let den = (g + k) * em1 + 2.0 * g;
                // Written in logs to survive long maturities.
                let ln_a = b * ((2.0 * g).ln() + 0.5 * (k + g) * t - den.ln());
                Ok((ln_a.exp(), 2.0 * em1 / den))
            }
            ModelKind::Vasicek => {
                let bt = -(-k * t).exp_m1() / k;
                let ln_a = (bt - t) * (k * k * th - 0.5 * s * s) / (k * k) - s * s * bt * bt / (4.0 * k);
                Ok((ln_a.exp(), bt))
            }
            ModelKind::ThreeHalves => {
                Err(Error::UnsupportedModel { model: "3/2", what: "closed-form zero-coupon bond" })
            }
        }
    }

    pub fn closed_form_bond(&self, t: f64, x: f64) -> Result<f64> {
        self.check_state(x)?;
        let (a, b) = self.affine_coefficients(t)?;
        Ok(a * (-b * x).exp())
    }

    pub fn speed_density(&self, x: f64) -> Result<f64> {
        self.check_state(x)?;
        let s2 = self.sigma * self.sigma;
        match self.kind {
            ModelKind::Cir => {
                if x == 0.0 {
                    return Err(Error::domain("CIR speed density is evaluated on the open interval"));
                }
                let (_, b) = self.cir_params();
                Ok(2.0 / s2 * ((b - 1.0) * x.ln() - 2.0 * self.kappa * x / s2).exp())
            }
            ModelKind::Vasicek => Ok(2.0 / s2 * (-self.kappa * (self.theta - x).powi(2) / s2).exp()),
            ModelKind::ThreeHalves => {
                let (alpha, beta, _) = self.three_halves_params();
                Ok(2.0 / s2 * ((-2.0 * alpha - 1.0) * x.ln() - beta / x).exp())
            }
        }
    }

    /// Total mass of the speed measure over the state space.
    pub fn speed_mass(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        match self.kind {
            ModelKind::Cir => {
                let (_, b) = self.cir_params();
                2.0 / s2 * (ln_gamma(b) + b * (s2 / (2.0 * self.kappa)).ln()).exp()
            }
            ModelKind::Vasicek => 2.0 / s2 * (PI * s2 / self.kappa).sqrt(),
            ModelKind::ThreeHalves => {
                let (alpha, beta, _) = self.three_halves_params();
                2.0 / s2 * (ln_gamma(2.0 * alpha) - 2.0 * alpha * beta.ln()).exp()
            }
        }
    }

    /// CDF of the stationary distribution (the normalized speed measure).
    pub fn stationary_cdf(&self, x: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        match self.kind {
            ModelKind::Cir => {
                let (_, b) = self.cir_params();
                if x <= 0.0 {
                    return 0.0;
                }
                specfun::regularized_lower_gamma(b, 2.0 * self.kappa * x / s2).unwrap_or(1.0)
            }
            ModelKind::Vasicek => specfun::normal_cdf((x - self.theta) / (s2 / (2.0 * self.kappa)).sqrt()),
            ModelKind::ThreeHalves => {
                let (alpha, beta, _) = self.three_halves_params();
                if x <= 0.0 {
                    return 0.0;
                }
                1.0 - specfun::regularized_lower_gamma(2.0 * alpha, beta / x).unwrap_or(1.0)
            }
        }
    }

    /// Upper tail `1 - F(x)` with relative accuracy deep in the tail.
    pub fn stationary_sf(&self, x: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        match self.kind {
            ModelKind::Cir => {
                let (_, b) = self.cir_params();
                if x <= 0.0 {
                    return 1.0;
                }
                let ln_p = specfun::ln_regularized_lower_gamma(b, 2.0 * self.kappa * x / s2).unwrap_or(0.0);
                -ln_p.exp_m1()
            }
            ModelKind::Vasicek => specfun::normal_cdf(-(x - self.theta) / (s2 / (2.0 * self.kappa)).sqrt()),
            ModelKind::ThreeHalves => {
                let (alpha, beta, _) = self.three_halves_params();
                if x <= 0.0 {
                    return 1.0;
                }
                specfun::regularized_lower_gamma(2.0 * alpha, beta / x).unwrap_or(1.0)
            }
        }
    }

    /// Stationary quantile by bisection; `p` in (0, 1). Lower tails use the
    /// CDF and upper tails the survival function so both ends are accurate.
    pub fn stationary_quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("quantile level must lie in (0, 1), got {p}")));
        }
        let sd = match self.kind {
            ModelKind::Vasicek => self.sigma / (2.0 * self.kappa).sqrt(),
            _ => self.theta,
        };
        let (mut lo, mut hi) = match self.kind {
            ModelKind::Vasicek => (self.theta - sd, self.theta + sd),
            _ => (self.theta * 0.5, self.theta * 2.0),
        };
        let below = |x: f64| if p < 0.5 { self.stationary_cdf(x) < p } else { self.stationary_sf(x) > 1.0 - p };
        while below(hi) {
            hi = if self.kind == ModelKind::Vasicek { hi + (hi - self.theta) } else { hi * 2.0 };
        }
        while !below(lo) {
            if self.kind == ModelKind::Vasicek {
                lo -= self.theta - lo;
            } else {
                lo *= 0.5;
                if lo < 1e-300 {
                    return Ok(0.0);
                }
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.abs().max(1e-300) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}
