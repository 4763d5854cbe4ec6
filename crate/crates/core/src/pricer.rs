//! Zero-coupon pricing and the backward coefficient recursion for callable
//! and putable coupon bonds.
//!
//! At each decision date `tau_i` the bond value is
//! `V^i = max{Kp P(delta), min{Kc P(delta), C^i}} + C P(delta)` with
//! continuation value `C^i = P_{h_i} V^{i+1}`. Every `V^i` is carried as its
//! eigenfunction coefficients, so a date costs two root searches and one pass
//! over the restricted overlap matrices.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::coeffs::{self, ProjectionRoute};
use crate::error::{Error, Result};
use crate::models::ModelKind;
use crate::subordinators::PricingModel;

pub use crate::series::{adaptive_truncation, StoppingRule, Truncation};

/// Coupon dates, option ladders and notice period of a bond with unit face.
///
/// Coupon dates are `t_1 < .. < t_k`, 1-based in all index arguments below.
/// Ladders hold the prices for `i = k*, .., k-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BondSchedule {
    pub coupon: f64,
    pub coupon_times: Vec<f64>,
    pub protection_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub call_prices: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub put_prices: Option<Vec<f64>>,
    pub notice_delta: f64,
}

const SWISS_CALL: [f64; 10] = [1.025, 1.020, 1.015, 1.010, 1.005, 1.0, 1.0, 1.0, 1.0, 1.0];
const SWISS_PUT: [f64; 10] = [1.015, 1.010, 1.005, 1.000, 0.995, 0.990, 0.990, 0.990, 0.990, 0.990];

impl BondSchedule {
    /// The 1987 Swiss Confederation bond: 21 annual coupons of 4.25% ending
    /// at 20.172 years, two-month notice, callable from the 11th coupon.
    pub fn swiss1987(with_put: bool) -> Self {
        BondSchedule {
            coupon: 0.0425,
            coupon_times: (1..=21).map(|i| i as f64 - 0.828).collect(),
            protection_index: 11,
            call_prices: Some(SWISS_CALL.to_vec()),
            put_prices: with_put.then(|| SWISS_PUT.to_vec()),
            notice_delta: 0.1666,
        }
    }

    /// A plain zero-coupon bond maturing at `t`.
    pub fn zero_coupon(t: f64) -> Self {
        BondSchedule {
            coupon: 0.0,
            coupon_times: vec![t],
            protection_index: 1,
            call_prices: None,
            put_prices: None,
            notice_delta: 0.0,
        }
    }

    /// Number of coupons `k`.
    pub fn coupon_count(&self) -> usize {
        self.coupon_times.len()
    }

    pub fn maturity(&self) -> f64 {
        *self.coupon_times.last().unwrap_or(&0.0)
    }

    pub fn coupon_time(&self, i: usize) -> f64 {
        self.coupon_times[i - 1]
    }

    /// `tau_i = t_i - delta`.
    pub fn decision_time(&self, i: usize) -> f64 {
        self.coupon_time(i) - self.notice_delta
    }

    /// `h_i = tau_{i+1} - tau_i`, except `h_{k-1} = t_k - tau_{k-1}`.
    pub fn step(&self, i: usize) -> f64 {
        let k = self.coupon_count();
        if i + 1 == k {
            self.coupon_time(k) - self.decision_time(i)
        } else {
            self.decision_time(i + 1) - self.decision_time(i)
        }
    }

    /// Decision indices `k*, .., k-1` in increasing order.
    pub fn decision_indices(&self) -> std::ops::Range<usize> {
        self.protection_index..self.coupon_count()
    }

    pub fn call_price(&self, i: usize) -> Option<f64> {
        self.call_prices.as_ref().map(|v| v[i - self.protection_index])
    }

    pub fn put_price(&self, i: usize) -> Option<f64> {
        self.put_prices.as_ref().map(|v| v[i - self.protection_index])
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Schedule(msg));
        let k = self.coupon_count();
        if k == 0 {
            return bad("at least one coupon date is required".into());
        }
        if !(self.coupon >= 0.0) || !self.coupon.is_finite() {
            return bad(format!("coupon must be finite and nonnegative, got {}", self.coupon));
        }
        if !(self.notice_delta >= 0.0) || !self.notice_delta.is_finite() {
            return bad(format!("notice period must be finite and nonnegative, got {}", self.notice_delta));
        }
        let mut prev = 0.0;
        for (j, &t) in self.coupon_times.iter().enumerate() {
            if !(t > prev) || !t.is_finite() {
                return bad(format!("coupon time {} ({t}) is not after the previous date", j + 1));
            }
            if j > 0 && !(self.notice_delta < t - prev) {
                return bad(format!("notice period {} is not shorter than coupon spacing {}", self.notice_delta, t - prev));
            }
            prev = t;
        }
        if self.protection_index < 1 || self.protection_index > k {
            return bad(format!("protection index {} must lie in 1..={k}", self.protection_index));
        }
        if self.protection_index < k && !(self.decision_time(self.protection_index) > 0.0) {
            return bad("first decision time must be positive".into());
        }
        let dates = k - self.protection_index;
        for (name, ladder) in [("call", &self.call_prices), ("put", &self.put_prices)] {
            if let Some(v) = ladder {
                if v.len() != dates {
                    return bad(format!("{name} ladder has {} prices for {dates} exercise dates", v.len()));
                }
                if let Some(p) = v.iter().find(|p| !(**p > 0.0) || !p.is_finite()) {
                    return bad(format!("{name} price {p} must be positive"));
                }
            }
        }
        if let (Some(c), Some(p)) = (&self.call_prices, &self.put_prices) {
            if let Some(j) = (0..dates).find(|&j| !(c[j] > p[j])) {
                return bad(format!(
                    "call price {} must exceed put price {} at date {}",
                    c[j],
                    p[j],
                    j + self.protection_index
                ));
            }
        }
        Ok(())
    }
}

/// Eigenfunction coefficients of the value function at decision date
/// `decision_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientState {
    pub coeffs: Vec<f64>,
    pub decision_index: usize,
    /// Number of terms of the next-later coefficients that entered the
    /// assembly (`M_i + 1`); the vector length for the terminal state.
    pub truncation_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionKind {
    #[default]
    Call,
    Put,
}

impl OptionKind {
    pub fn name(self) -> &'static str {
        match self {
            OptionKind::Call => "call",
            OptionKind::Put => "put",
        }
    }
}

/// How many terms of `c^{i+1}` enter the assembly of `c^i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AssemblyTruncation {
    /// The largest `N` the adaptive rule chose while locating this date's
    /// break-even states.
    #[default]
    BisectionMax,
    /// The whole coefficient vector.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricerOptions {
    pub rule: StoppingRule,
    pub assembly: AssemblyTruncation,
    /// Bisection stops once the bracket is narrower than this.
    pub root_tol: f64,
    /// Count sign changes on a 64-point grid over each bracket and refuse
    /// to bisect if there is more than one.
    pub scan_roots: bool,
    /// Strike projection route; the closed form where available if unset.
    pub route: Option<ProjectionRoute>,
    /// Map break-even states to short rates in the result.
    pub report_short_rates: bool,
    /// Override of the coefficient vector length.
    pub coefficient_terms: Option<usize>,
}

impl Default for PricerOptions {
    fn default() -> Self {
        PricerOptions {
            rule: StoppingRule::default(),
            assembly: AssemblyTruncation::default(),
            root_tol: 1e-7,
            scan_roots: false,
            route: None,
            report_short_rates: true,
            coefficient_terms: None,
        }
    }
}

/// Break-even states of one decision date. `None` means no exercise region;
/// a state-space endpoint means exercise is optimal everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BreakEven {
    pub index: usize,
    pub decision_time: f64,
    pub call: Option<f64>,
    pub put: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationStats {
    pub average: f64,
    pub max: usize,
    pub evaluations: usize,
}

impl TruncationStats {
    fn from_counts(counts: &[usize]) -> Self {
        if counts.is_empty() {
            return TruncationStats { average: 0.0, max: 0, evaluations: 0 };
        }
        let sum: usize = counts.iter().sum();
        TruncationStats {
            average: sum as f64 / counts.len() as f64,
            max: *counts.iter().max().unwrap(),
            evaluations: counts.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PricingResult {
    /// One value per requested initial state.
    pub values: Vec<f64>,
    /// Latest decision date first.
    pub break_even_states: Vec<BreakEven>,
    /// Same layout as the states; absent when the model has no short-rate
    /// map or reporting was switched off.
    pub break_even_short_rates: Option<Vec<BreakEven>>,
    /// One entry per decision date (latest first), then one for the final
    /// evaluation at time zero across all initial states.
    pub truncation_stats: Vec<TruncationStats>,
    pub tolerance: f64,
    pub coefficient_terms: usize,
}

const MAX_TERMS: usize = crate::series::DEFAULT_MAX_TERMS;

/// Index past which `e^{-(Lambda_n - Lambda_0) t}` drops below `cut`.
fn decay_length(model: &PricingModel, t: f64, cut: f64) -> usize {
    let l0 = model.eigenvalue(0);
    let target = -cut.ln() / t.max(1e-12);
    (1..MAX_TERMS).find(|&n| model.eigenvalue(n) - l0 >= target).unwrap_or(MAX_TERMS)
}

/// Length of `|p_n| e^{-Lambda_n t}` before it falls below `1e-17` of the
/// head.
fn payoff_length(model: &PricingModel, t: f64) -> usize {
    let base = model.base();
    let ln_w = |n: usize| base.unit_payoff_coefficient(n).abs().ln() - model.eigenvalue(n) * t;
    let head = ln_w(0);
    let mut below = 0;
    for n in 1..MAX_TERMS {
        if ln_w(n) < head - 17.0 * std::f64::consts::LN_10 {
            below += 1;
            if below == 3 {
                return n + 1;
            }
        } else {
            below = 0;
        }
    }
    MAX_TERMS
}

fn has_affine_bond(model: &PricingModel) -> bool {
    !model.is_subordinated() && model.base().kind() != ModelKind::ThreeHalves
}

/// `P(t, x) = sum_n p_n e^{-Lambda_n t} phi_n(x)` cut by the adaptive rule.
/// Returns the price and the last index used.
pub fn zero_coupon_price_terms(model: &PricingModel, t: f64, x: f64, truncation: &Truncation) -> Result<(f64, usize)> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("maturity must be positive, got {t}")));
    }
    let base = model.base();
    base.check_state(x)?;
    let len = payoff_length(model, t);
    let phi = base.eigenfunctions(len - 1, x)?;
    let terms: Vec<f64> = (0..len)
        .map(|n| base.unit_payoff_coefficient(n) * (-model.eigenvalue(n) * t).exp() * phi[n])
        .collect();
    truncation.sum(&terms, "zero-coupon bond expansion")
}

/// Unit-face zero-coupon bond price by eigenfunction expansion.
pub fn zero_coupon_price(model: &PricingModel, t: f64, x: f64, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(zero_coupon_price_terms(model, t, x, &Truncation::new(eps))?.0)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1e-3) {
        return Err(Error::Parameter(format!("tolerance must lie in (0, 1e-3], got {eps}")));
    }
    Ok(())
}

/// `C(x) = sum_n c_n e^{-Lambda_n h} phi_n(x)` cut by the adaptive rule.
/// Returns the value and the last index used.
pub fn continuation_value(
    model: &PricingModel,
    state: &CoefficientState,
    h: f64,
    x: f64,
    truncation: &Truncation,
) -> Result<(f64, usize)> {
    if !(h > 0.0) {
        return Err(Error::domain(format!("holding period must be positive, got {h}")));
    }
    let len = state.coeffs.len();
    if len == 0 {
        return Ok((0.0, 0));
    }
    let phi = model.base().eigenfunctions(len - 1, x)?;
    let terms: Vec<f64> =
        (0..len).map(|n| state.coeffs[n] * (-model.eigenvalue(n) * h).exp() * phi[n]).collect();
    truncation.sum(&terms, "continuation value")
}

/// State where `strike * P(delta, x)` meets the continuation value built from
/// `state`, or `None` if that option is never exercised.
#[allow(clippy::too_many_arguments)]
pub fn find_break_even(
    model: &PricingModel,
    kind: OptionKind,
    strike: f64,
    state: &CoefficientState,
    h: f64,
    delta: f64,
    truncation: &Truncation,
    options: &PricerOptions,
) -> Result<Option<f64>> {
    if !(strike > 0.0) {
        return Err(Error::domain(format!("strike must be positive, got {strike}")));
    }
    if !(h > 0.0) {
        return Err(Error::domain(format!("holding period must be positive, got {h}")));
    }
    let engine = Engine::new(model, *truncation, options, delta, state.coeffs.len())?;
    let disc = engine.discounts(h);
    let mut counts = Vec::new();
    engine.break_even(kind, strike, &state.coeffs, &disc, &mut counts)
}

/// Shared per-bond precomputation: eigenvalues, the expansion of
/// `P(delta, .)` and the bracket.
struct Engine<'a> {
    model: &'a PricingModel,
    trunc: Truncation,
    opts: &'a PricerOptions,
    delta: f64,
    /// Coefficient vector length `L + 1`.
    len: usize,
    lambdas: Vec<f64>,
    payoff: Vec<f64>,
    /// `p_n e^{-Lambda_n delta}`.
    strike: Vec<f64>,
    affine: bool,
    /// Increasing states probed to bracket a break-even state.
    probes: Vec<f64>,
    /// Probe where the bracketing walk starts.
    home: usize,
}

impl<'a> Engine<'a> {
    fn new(model: &'a PricingModel, trunc: Truncation, opts: &'a PricerOptions, delta: f64, len: usize) -> Result<Self> {
        let base = model.base();
        let strike_len = if delta > 0.0 { payoff_length(model, delta) } else { len };
        let all = len.max(strike_len);
        let lambdas = model.eigenvalues(all - 1);
        let payoff = base.unit_payoff_coefficients(all - 1);
        let strike: Vec<f64> = (0..strike_len).map(|n| payoff[n] * (-lambdas[n] * delta).exp()).collect();
        let (th, sig, kap) = (base.theta(), base.sigma(), base.kappa());
        let (probes, home) = match base.kind() {
            ModelKind::Vasicek => {
                // theta +- 12 stationary standard deviations, walked outwards
                // from theta so the far tails are only visited when needed.
                let sd = sig / (2.0 * kap).sqrt();
                ((-12..=12).map(|j| th + j as f64 * sd).collect(), 12)
            }
            kind => {
                let lower = if kind == ModelKind::ThreeHalves { base.stationary_quantile(1e-12)? } else { 0.0 };
                let mut probes = vec![lower];
                let mut u = th;
                while u < 50.0 * th {
                    probes.push(u);
                    u *= 2.0;
                }
                probes.push(50.0 * th);
                // The lower boundary is checked first.
                (probes, 0)
            }
        };
        Ok(Engine {
            model,
            trunc,
            opts,
            delta,
            len,
            lambdas,
            payoff,
            strike,
            affine: has_affine_bond(model),
            probes,
            home,
        })
    }

    fn discounts(&self, h: f64) -> Vec<f64> {
        self.lambdas[..self.len].iter().map(|l| (-l * h).exp()).collect()
    }

    /// `(C(x), P(delta, x), N)` for continuation coefficients `coeffs`
    /// discounted by `disc`.
    fn evaluate(&self, coeffs: &[f64], disc: &[f64], x: f64) -> Result<(f64, f64, usize)> {
        let base = self.model.base();
        let need = if self.affine { self.len } else { self.len.max(self.strike.len()) };
        let phi = base.eigenfunctions(need - 1, x)?;
        let terms: Vec<f64> = (0..coeffs.len()).map(|n| coeffs[n] * disc[n] * phi[n]).collect();
        let (cont, n) = self.trunc.sum(&terms, "continuation value")?;
        let p = if self.affine {
            base.closed_form_bond(self.delta, x)?
        } else if self.delta == 0.0 {
            1.0
        } else {
            let terms: Vec<f64> = self.strike.iter().zip(&phi).map(|(s, f)| s * f).collect();
            self.trunc.sum(&terms, "notice-period discount")?.0
        };
        Ok((cont, p, n))
    }

    /// Signed gap that is positive inside the exercise region.
    fn gap(&self, kind: OptionKind, strike: f64, coeffs: &[f64], disc: &[f64], x: f64, counts: &mut Vec<usize>) -> Result<f64> {
        let (cont, p, n) = self.evaluate(coeffs, disc, x)?;
        counts.push(n);
        Ok(match kind {
            OptionKind::Call => cont - strike * p,
            OptionKind::Put => strike * p - cont,
        })
    }

    fn break_even(
        &self,
        kind: OptionKind,
        strike: f64,
        coeffs: &[f64],
        disc: &[f64],
        counts: &mut Vec<usize>,
    ) -> Result<Option<f64>> {
        let mut g = |x: f64| self.gap(kind, strike, coeffs, disc, x, counts);
        let inside = |v: f64| match kind {
            OptionKind::Call => v > 0.0,
            OptionKind::Put => v >= 0.0,
        };
        // Walk the probe grid from the home point towards the boundary. The
        // call region sits at low states and the put region at high ones, so
        // a call that is optimal at home means the root lies above it.
        let probes = &self.probes;
        let mut j = self.home;
        let at_home = inside(g(probes[j])?);
        let walk_up = matches!((kind, at_home), (OptionKind::Call, true) | (OptionKind::Put, false));
        let (lo, hi) = loop {
            let next = if walk_up { j + 1 } else { j.wrapping_sub(1) };
            if next >= probes.len() {
                // Ran off the grid without a sign change: either no exercise
                // region, or one covering the whole state space, whose
                // break-even state is then the far boundary.
                let (l, r) = self.model.base().state_space();
                return Ok(match (kind, at_home) {
                    (_, false) => None,
                    (OptionKind::Call, true) => Some(r),
                    (OptionKind::Put, true) => Some(l),
                });
            }
            if inside(g(probes[next])?) != at_home {
                break if walk_up { (probes[j], probes[next]) } else { (probes[next], probes[j]) };
            }
            j = next;
        };
        if self.opts.scan_roots {
            let grid = 64;
            let mut prev = inside(g(lo)?);
            let mut crossings = 0;
            for j in 1..=grid {
                let x = lo + (hi - lo) * j as f64 / grid as f64;
                let cur = inside(g(x)?);
                if cur != prev {
                    crossings += 1;
                }
                prev = cur;
            }
            if crossings > 1 {
                return Err(Error::MultipleRoots { kind: kind.name(), crossings });
            }
        }
        let (mut a, mut b) = (lo, hi);
        while b - a >= self.opts.root_tol {
            let mid = 0.5 * (a + b);
            let is_in = inside(g(mid)?);
            match (kind, is_in) {
                (OptionKind::Call, true) | (OptionKind::Put, false) => a = mid,
                _ => b = mid,
            }
        }
        Ok(Some(0.5 * (a + b)))
    }

    fn route(&self) -> ProjectionRoute {
        self.opts.route.unwrap_or_else(|| ProjectionRoute::preferred(self.model))
    }

    /// `c^i` from `c^{i+1}` given the break-even states.
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        &self,
        next: &[f64],
        disc: &[f64],
        inner: usize,
        call: Option<(f64, f64)>,
        put: Option<(f64, f64)>,
        coupon: f64,
    ) -> Result<Vec<f64>> {
        let base = self.model.base();
        let (l, r) = base.state_space();
        let route = self.route();
        let expansion = route == ProjectionRoute::EigenExpansion;
        let dim = if expansion { self.len.max(self.strike.len()) } else { self.len };
        let x_c = call.map_or(l, |c| c.0);
        let x_p = put.map_or(r, |p| p.0);
        let f_c = coeffs::cumulative_overlap(base, dim - 1, x_c)?;
        let f_p = coeffs::cumulative_overlap(base, dim - 1, x_p)?;
        let projection = |x: f64, f: &DMatrix<f64>| {
            coeffs::cumulative_projection(self.model, self.len - 1, x, self.delta, route, self.strike.len() - 1, Some(f))
        };
        let weights: Vec<f64> = (0..=inner.min(self.len - 1)).map(|m| next[m] * disc[m]).collect();
        let mut out = vec![0.0; self.len];
        for (n, slot) in out.iter_mut().enumerate() {
            let mut acc = crate::series::KahanSum::default();
            for (m, w) in weights.iter().enumerate() {
                acc.add(w * (f_p[(m, n)] - f_c[(m, n)]));
            }
            *slot = acc.value();
        }
        let full: Vec<f64> = (0..self.len).map(|n| self.payoff[n] * (-self.lambdas[n] * self.delta).exp()).collect();
        if let Some((x, k)) = call {
            let g = projection(x, &f_c)?;
            for n in 0..self.len {
                out[n] += k * g[n];
            }
        }
        if let Some((x, k)) = put {
            let g = projection(x, &f_p)?;
            for n in 0..self.len {
                out[n] += k * (full[n] - g[n]);
            }
        }
        for n in 0..self.len {
            out[n] += coupon * full[n];
        }
        if let Some(n) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("coefficient {n} is not finite")));
        }
        Ok(out)
    }
}

/// Coefficient vector length: enough terms that `e^{-(Lambda_n - Lambda_0) h}`
/// over the shortest holding period is far below the tolerance.
fn coefficient_length(model: &PricingModel, schedule: &BondSchedule, eps: f64) -> usize {
    let h_min = schedule
        .decision_indices()
        .map(|i| schedule.step(i))
        .fold(schedule.maturity(), f64::min);
    decay_length(model, h_min, eps * 1e-3).clamp(8, MAX_TERMS) + 1
}

/// Prices the bond at each initial state.
pub fn price_bond(
    model: &PricingModel,
    schedule: &BondSchedule,
    initial_states: &[f64],
    eps: f64,
    options: &PricerOptions,
) -> Result<PricingResult> {
    check_eps(eps)?;
    schedule.validate()?;
    if initial_states.is_empty() {
        return Err(Error::Parameter("no initial states given".into()));
    }
    for &x in initial_states {
        model.base().check_state(x)?;
    }
    if !(options.root_tol > 0.0) {
        return Err(Error::Parameter(format!("root tolerance must be positive, got {}", options.root_tol)));
    }
    if options.route == Some(ProjectionRoute::ClosedFormAffine) && !has_affine_bond(model) {
        return Err(Error::InconsistentRoute);
    }
    let trunc = Truncation::new(eps).with_rule(options.rule);
    let len = options.coefficient_terms.map_or_else(|| coefficient_length(model, schedule, eps), |n| n.max(3));
    let engine = Engine::new(model, trunc, options, schedule.notice_delta, len)?;
    let k = schedule.coupon_count();
    let kstar = schedule.protection_index;
    let coupon = schedule.coupon;

    let mut coeffs: Vec<f64> = engine.payoff[..len].iter().map(|p| (1.0 + coupon) * p).collect();
    let mut states = Vec::new();
    let mut stats = Vec::new();
    for i in schedule.decision_indices().rev() {
        let mut step = || -> Result<Vec<f64>> {
            let disc = engine.discounts(schedule.step(i));
            let mut counts = Vec::new();
            let call = match schedule.call_price(i) {
                Some(kc) => engine.break_even(OptionKind::Call, kc, &coeffs, &disc, &mut counts)?.map(|x| (x, kc)),
                None => None,
            };
            let put = match schedule.put_price(i) {
                Some(kp) => engine.break_even(OptionKind::Put, kp, &coeffs, &disc, &mut counts)?.map(|x| (x, kp)),
                None => None,
            };
            if let (Some((xc, _)), Some((xp, _))) = (call, put) {
                if !(xc < xp) {
                    return Err(Error::Bracket {
                        kind: "call",
                        detail: format!("call break-even {xc} is not below put break-even {xp}"),
                    });
                }
            }
            let inner = match options.assembly {
                AssemblyTruncation::BisectionMax if !counts.is_empty() => *counts.iter().max().unwrap(),
                _ => len - 1,
            };
            states.push(BreakEven {
                index: i,
                decision_time: schedule.decision_time(i),
                call: call.map(|c| c.0),
                put: put.map(|p| p.0),
            });
            stats.push(TruncationStats::from_counts(&counts));
            let inner = inner.min(coeffs.len() - 1);
            engine.assemble(&coeffs, &disc, inner, call, put, coupon)
        };
        coeffs = step().map_err(|e| e.at_decision(i))?;
    }

    let t_first = if kstar < k { schedule.decision_time(kstar) } else { schedule.maturity() };
    let disc = engine.discounts(t_first);
    let base = model.base();
    let mut values = Vec::with_capacity(initial_states.len());
    let mut counts = Vec::with_capacity(initial_states.len());
    for &x in initial_states {
        let phi = base.eigenfunctions(len - 1, x)?;
        let terms: Vec<f64> = (0..coeffs.len()).map(|n| coeffs[n] * disc[n] * phi[n]).collect();
        let (mut v, n) = trunc.sum(&terms, "time-zero value")?;
        counts.push(n);
        for i in 1..kstar.min(k) {
            let t = schedule.coupon_time(i);
            let p = if engine.affine { base.closed_form_bond(t, x)? } else { zero_coupon_price_terms(model, t, x, &trunc)?.0 };
            v += coupon * p;
        }
        values.push(v);
    }
    stats.push(TruncationStats::from_counts(&counts));

    let short_rates = if options.report_short_rates {
        let map = |x: Option<f64>| -> Result<Option<f64>> {
            x.map(|x| {
                if model.is_subordinated() && x.is_finite() {
                    model.short_rate(x)
                } else {
                    Ok(base.short_rate(x))
                }
            })
            .transpose()
        };
        let mut out = Vec::with_capacity(states.len());
        let mut ok = true;
        for s in &states {
            match (map(s.call), map(s.put)) {
                (Ok(call), Ok(put)) => out.push(BreakEven { call, put, ..*s }),
                (Err(Error::UnsupportedModel { .. }), _) | (_, Err(Error::UnsupportedModel { .. })) => {
                    ok = false;
                    break;
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
        ok.then_some(out)
    } else {
        None
    };

    Ok(PricingResult {
        values,
        break_even_states: states,
        break_even_short_rates: short_rates,
        truncation_stats: stats,
        tolerance: eps,
        coefficient_terms: len,
    })
}

/// State whose short rate is `r`: `r` itself for a plain diffusion, the
/// inverse of the subordinate short-rate map otherwise.
pub fn state_for_short_rate(model: &PricingModel, r: f64) -> Result<f64> {
    let base = model.base();
    if !model.is_subordinated() {
        base.check_state(r)?;
        return Ok(r);
    }
    // Surfaces models without a short-rate map before any bracketing.
    model.short_rate(base.theta())?;
    let f = |x: f64| model.short_rate(x).map(|v| v - r);
    let (mut lo, mut hi) = match base.kind() {
        ModelKind::Vasicek => (r - 1.0, r + 1.0),
        _ => (0.0, r.max(base.theta())),
    };
    if base.kind() != ModelKind::Vasicek && f(lo)? > 0.0 {
        return Err(Error::domain(format!("short rate {r} is below the model's lowest short rate")));
    }
    let mut guard = 0;
    while f(hi)? < 0.0 {
        hi = lo.max(0.0) + 2.0 * (hi - lo.max(0.0)).max(1e-3);
        guard += 1;
        if guard > 60 {
            return Err(Error::Bracket { kind: "short rate", detail: format!("cannot bracket {r}") });
        }
    }
    guard = 0;
    while base.kind() == ModelKind::Vasicek && f(lo)? > 0.0 {
        lo -= 2.0 * (hi - lo);
        guard += 1;
        if guard > 60 {
            return Err(Error::Bracket { kind: "short rate", detail: format!("cannot bracket {r}") });
        }
    }
    while hi - lo > 1e-13 * (1.0 + r.abs()) {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
