//! Independent validators: a value-function dynamic program on a quadrature
//! grid and a Monte Carlo zero-coupon estimator.
//!
//! Neither touches the coefficient recursion. The dynamic program applies the
//! pricing semigroup through the truncated transition density
//! `sum_n e^{-Lambda_n t} phi_n(x) phi_n(y) m(y)` integrated on the grid, and
//! takes the exercise decision node by node.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, InverseGaussian, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{DiffusionModel, ModelKind};
use crate::pricer::BondSchedule;
use crate::quad;
use crate::subordinators::{PricingModel, SubordinatorSpec};

/// Nodes and weights against the speed density on a truncated state interval.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    /// Gauss-Legendre weights times `m(x)` (times the Jacobian of any
    /// change of variable).
    pub weights: Vec<f64>,
    pub bounds: (f64, f64),
}

type Map = Box<dyn Fn(f64) -> f64>;
type ClockSampler = Box<dyn Fn(&mut ChaCha8Rng) -> f64 + Send + Sync>;

const GL_ORDER: usize = 8;
const TAIL_MASS: f64 = 1e-11;
const DENSITY_TAIL: f64 = 1e-12;
const MAX_DENSITY_TERMS: usize = 2000;

/// Composite Gauss-Legendre grid with about `grid_size` nodes covering all but
/// `1e-11` of stationary mass in each tail. When the CIR speed density is
/// singular at zero (`b < 1`) nodes are placed in `u = x^b` down to zero,
/// which absorbs the `x^{b-1}` factor; 3/2 nodes are placed in `log x`.
pub fn quadrature_grid(model: &DiffusionModel, grid_size: usize) -> Result<QuadratureGrid> {
    if grid_size < GL_ORDER {
        return Err(Error::Parameter(format!("grid needs at least {GL_ORDER} nodes, got {grid_size}")));
    }
    let hi = model.stationary_quantile(1.0 - TAIL_MASS)?;
    let lo = model.stationary_quantile(TAIL_MASS)?;
    let b = match model.kind() {
        ModelKind::Cir => model.cir_params().1,
        _ => 1.0,
    };
    // (map from the integration variable to x, dx/dv, v-range)
    let (to_x, jac, v_lo, v_hi): (Map, Map, f64, f64) = match model.kind() {
        ModelKind::Cir if b < 1.0 => (
            Box::new(move |u: f64| u.powf(1.0 / b)),
            Box::new(move |u: f64| u.powf(1.0 / b - 1.0) / b),
            0.0,
            hi.powf(b),
        ),
        ModelKind::Cir | ModelKind::Vasicek => (Box::new(|v| v), Box::new(|_| 1.0), lo, hi),
        ModelKind::ThreeHalves => (Box::new(f64::exp), Box::new(f64::exp), lo.ln(), hi.ln()),
    };
    let panels = grid_size.div_ceil(GL_ORDER);
    let (gx, gw) = quad::gauss_legendre(GL_ORDER);
    let width = (v_hi - v_lo) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * GL_ORDER);
    let mut weights = Vec::with_capacity(panels * GL_ORDER);
    for p in 0..panels {
        let mid = v_lo + (p as f64 + 0.5) * width;
        for (z, w) in gx.iter().zip(&gw) {
            let v = mid + 0.5 * width * z;
            let x = to_x(v);
            nodes.push(x);
            weights.push(0.5 * width * w * jac(v) * model.speed_density(x)?);
        }
    }
    Ok(QuadratureGrid { nodes, weights, bounds: (to_x(v_lo), to_x(v_hi)) })
}

fn affine(model: &PricingModel) -> bool {
    !model.is_subordinated() && model.base().kind() != ModelKind::ThreeHalves
}

/// Zero-coupon bond from the first `n` terms of its expansion, or the closed
/// form when there is one.
fn bond(model: &PricingModel, lambdas: &[f64], payoff: &[f64], t: f64, x: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(1.0);
    }
    if affine(model) {
        return model.base().closed_form_bond(t, x);
    }
    let phi = model.base().eigenfunctions(lambdas.len() - 1, x)?;
    Ok((0..lambdas.len()).map(|n| payoff[n] * (-lambdas[n] * t).exp() * phi[n]).sum())
}

/// Smallest density expansion length whose tail factor
/// `e^{-(Lambda_N - Lambda_0) t}` is below `1e-12` at horizon `t`.
pub fn density_terms(model: &PricingModel, t: f64) -> Result<usize> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("horizon must be positive, got {t}")));
    }
    let l0 = model.eigenvalue(0);
    let target = -DENSITY_TAIL.ln() / t;
    (1..=MAX_DENSITY_TERMS)
        .find(|&n| model.eigenvalue(n) - l0 >= target)
        .map(|n| (n + 1).max(2))
        .ok_or(Error::DensityTruncation {
            t,
            min_t: -DENSITY_TAIL.ln() / (model.eigenvalue(MAX_DENSITY_TERMS) - l0),
            max_terms: MAX_DENSITY_TERMS,
        })
}

/// Shortest horizon the dynamic program applies the density over.
pub fn shortest_horizon(schedule: &BondSchedule) -> f64 {
    let k = schedule.coupon_count();
    let kstar = schedule.protection_index;
    let first = if kstar < k { schedule.decision_time(kstar) } else { schedule.maturity() };
    schedule.decision_indices().map(|i| schedule.step(i)).fold(first, f64::min)
}

/// Prices the bond by backward induction of the value function on a
/// quadrature grid, applying the pricing operator through the transition
/// density truncated at `n_density` terms.
pub fn quadrature_dp_price(
    model: &PricingModel,
    schedule: &BondSchedule,
    x0: f64,
    grid_size: usize,
    n_density: usize,
) -> Result<f64> {
    schedule.validate()?;
    if grid_size < 200 {
        return Err(Error::Parameter(format!("grid size must be at least 200, got {grid_size}")));
    }
    if n_density < 2 {
        return Err(Error::Parameter("density expansion needs at least two terms".into()));
    }
    let base = model.base();
    base.check_state(x0)?;
    let k = schedule.coupon_count();
    let kstar = schedule.protection_index;
    let lambdas = model.eigenvalues(n_density - 1);
    let payoff = base.unit_payoff_coefficients(n_density - 1);

    let t_first = if kstar < k { schedule.decision_time(kstar) } else { schedule.maturity() };
    let t_min = shortest_horizon(schedule);
    let spread = lambdas[n_density - 1] - lambdas[0];
    if (-spread * t_min).exp() > DENSITY_TAIL {
        return Err(Error::DensityTruncation {
            t: t_min,
            min_t: -DENSITY_TAIL.ln() / spread,
            max_terms: n_density,
        });
    }

    let grid = quadrature_grid(base, grid_size)?;
    let g = grid.nodes.len();
    let phi: Vec<Vec<f64>> = grid.nodes.iter().map(|&x| base.eigenfunctions(n_density - 1, x)).collect::<Result<_>>()?;
    // a_n = sum_j w_j phi_n(y_j) v_j, the projection of nodal values.
    let project = |v: &[f64]| -> Vec<f64> {
        let mut a = vec![0.0; n_density];
        for j in 0..g {
            let wv = grid.weights[j] * v[j];
            for (an, p) in a.iter_mut().zip(&phi[j]) {
                *an += wv * p;
            }
        }
        a
    };
    let delta = schedule.notice_delta;
    let p_delta: Vec<f64> =
        grid.nodes.iter().map(|&x| bond(model, &lambdas, &payoff, delta, x)).collect::<Result<_>>()?;

    let mut v = vec![1.0 + schedule.coupon; g];
    for i in schedule.decision_indices().rev() {
        let a = project(&v);
        let e: Vec<f64> = lambdas.iter().map(|l| (-l * schedule.step(i)).exp()).collect();
        for j in 0..g {
            let cont: f64 = (0..n_density).map(|n| e[n] * a[n] * phi[j][n]).sum();
            let mut val = cont;
            if let Some(kc) = schedule.call_price(i) {
                val = val.min(kc * p_delta[j]);
            }
            if let Some(kp) = schedule.put_price(i) {
                val = val.max(kp * p_delta[j]);
            }
            v[j] = val + schedule.coupon * p_delta[j];
        }
    }
    let a = project(&v);
    let phi0 = base.eigenfunctions(n_density - 1, x0)?;
    let mut value: f64 = (0..n_density).map(|n| (-lambdas[n] * t_first).exp() * a[n] * phi0[n]).sum();
    for i in 1..kstar.min(k) {
        value += schedule.coupon * bond(model, &lambdas, &payoff, schedule.coupon_time(i), x0)?;
    }
    Ok(value)
}

/// Euler step of the state over `dt` with standard normal `z`.
fn euler_step(model: &DiffusionModel, x: f64, dt: f64, z: f64) -> f64 {
    let (k, th, s) = (model.kappa(), model.theta(), model.sigma());
    match model.kind() {
        // Full truncation keeps drift and diffusion defined below zero.
        ModelKind::Cir => {
            let xp = x.max(0.0);
            x + k * (th - xp) * dt + s * (xp * dt).sqrt() * z
        }
        ModelKind::Vasicek => x + k * (th - x) * dt + s * dt.sqrt() * z,
        // Log-Euler keeps the 3/2 state positive.
        ModelKind::ThreeHalves => {
            let drift = k * (th - x) - 0.5 * s * s * x;
            x * (drift * dt + s * (x * dt).sqrt() * z).exp()
        }
    }
}

fn clock_sampler(sub: &SubordinatorSpec, t: f64) -> Result<ClockSampler> {
    match *sub {
        SubordinatorSpec::None => Ok(Box::new(move |_| t)),
        SubordinatorSpec::InverseGaussian { gamma, mu, nu } => {
            let ig = InverseGaussian::new(mu * t, mu * mu * mu * t * t / nu)
                .map_err(|e| Error::Parameter(format!("inverse Gaussian clock: {e}")))?;
            Ok(Box::new(move |rng| gamma * t + ig.sample(rng)))
        }
        SubordinatorSpec::Gamma { gamma, c, eta } => {
            let gd = Gamma::new(c * t, 1.0 / eta).map_err(|e| Error::Parameter(format!("gamma clock: {e}")))?;
            Ok(Box::new(move |rng| gamma * t + gd.sample(rng)))
        }
        SubordinatorSpec::TemperedStable { .. } => {
            Err(Error::UnsupportedModel { model: "tempered stable", what: "Monte Carlo clock sampling" })
        }
    }
}

const CHUNKS: usize = 256;

/// Monte Carlo estimate of the unit zero-coupon bond with its standard error.
///
/// Each path draws the clock value `T_t` and integrates the diffusion short
/// rate up to `T_t`; averaging `exp(-int_0^{T_t} r(X_s) ds)` over clock and
/// path is the subordinate bond price. Without a clock `T_t = t`. Paths are
/// split into fixed chunks with their own generator streams, so the result
/// does not depend on the thread count.
pub fn mc_zero_coupon(
    model: &PricingModel,
    t: f64,
    x0: f64,
    paths: usize,
    steps_per_year: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if steps_per_year < 250 {
        return Err(Error::Parameter(format!("need at least 250 steps per year, got {steps_per_year}")));
    }
    if paths < 2 {
        return Err(Error::Parameter("need at least two paths".into()));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("maturity must be nonnegative, got {t}")));
    }
    let base = *model.base();
    base.check_state(x0)?;
    let clock = clock_sampler(model.subordinator(), t)?;
    let per_chunk = paths.div_ceil(CHUNKS);
    let sums: Vec<(f64, f64, usize)> = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = per_chunk.min(paths.saturating_sub(c * per_chunk));
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let horizon = clock(&mut rng);
                let n = ((horizon * steps_per_year as f64).ceil() as usize).max(1);
                let dt = horizon / n as f64;
                let mut x = x0;
                let mut integral = 0.0;
                for _ in 0..n {
                    let z: f64 = rng.sample(StandardNormal);
                    let next = euler_step(&base, x, dt, z);
                    let rate = |v: f64| if base.kind() == ModelKind::Cir { v.max(0.0) } else { v };
                    integral += 0.5 * (rate(x) + rate(next)) * dt;
                    x = next;
                }
                let d = (-integral).exp();
                s1 += d;
                s2 += d * d;
            }
            (s1, s2, count)
        })
        .collect();
    let (mut s1, mut s2, mut n) = (0.0, 0.0, 0usize);
    for (a, b, c) in sums {
        s1 += a;
        s2 += b;
        n += c;
    }
    let mean = s1 / n as f64;
    let var = ((s2 / n as f64 - mean * mean) * n as f64 / (n - 1) as f64).max(0.0);
    Ok((mean, (var / n as f64).sqrt()))
}
