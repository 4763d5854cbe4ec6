#![allow(dead_code)]

use eigenbond::benchmark::{Config, RATES};
use eigenbond::pricer::{price_bond, state_for_short_rate, BondSchedule, PricerOptions, PricingResult};
use eigenbond::quad::gauss_legendre;
use eigenbond::specfun::{hermite_sequence, laguerre_sequence, ln_gamma};
use eigenbond::{DiffusionModel, ModelKind};

/// Composite 16-point Gauss-Legendre rule with equal panels.
pub fn composite(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(16);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        total += x.iter().zip(&w).map(|(z, wi)| wi * f(mid + 0.5 * h * z)).sum::<f64>() * 0.5 * h;
    }
    total
}

/// Returns `(int f, int |f|)`; the second serves as the error scale.
pub fn with_scale(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> (f64, f64) {
    (composite(&f, a, b, panels), composite(|y| f(y).abs(), a, b, panels))
}

/// `int_0^x f` for `f ~ c y^alpha` at the origin: geometrically graded
/// panels on `[0, min(x, 1)]`, uniform ones above, and the last sliver
/// `[0, e]` integrated from the leading power.
pub fn graded_with_scale(f: impl Fn(f64) -> f64, alpha: f64, x: f64) -> (f64, f64) {
    let head = x.min(1.0);
    let (mut v, mut a) = (0.0, 0.0);
    let mut hi = head;
    for _ in 0..80 {
        let lo = 0.5 * hi;
        let (pv, pa) = with_scale(&f, lo, hi, 1);
        v += pv;
        a += pa;
        hi = lo;
    }
    let sliver = f(hi) * hi / (alpha + 1.0);
    v += sliver;
    a += sliver.abs();
    if x > head {
        let (pv, pa) = with_scale(&f, head, x, 400);
        v += pv;
        a += pa;
    }
    (v, a)
}

/// `int_0^x L_n L_m e^{-y} y^alpha dy`.
pub fn laguerre_a_by_quadrature(n: usize, m: usize, alpha: f64, x: f64) -> (f64, f64) {
    let f = |y: f64| {
        let l = laguerre_sequence(n.max(m), alpha, y).unwrap();
        l[n] * l[m] * (alpha * y.ln() - y).exp()
    };
    graded_with_scale(f, alpha, x)
}

/// `int_0^x y^alpha e^{-s y} L_n dy`.
pub fn laguerre_b_by_quadrature(n: usize, alpha: f64, s: f64, x: f64) -> (f64, f64) {
    let f = |y: f64| laguerre_sequence(n, alpha, y).unwrap()[n] * (alpha * y.ln() - s * y).exp();
    graded_with_scale(f, alpha, x)
}

pub fn hermite_a_by_quadrature(n: usize, m: usize, x: f64) -> (f64, f64) {
    let lo = -(((2 * n.max(m) + 1) as f64).sqrt() + 12.0);
    let f = |y: f64| {
        let h = hermite_sequence(n.max(m), y).unwrap();
        h[n] * h[m] * (-y * y).exp()
    };
    if x <= lo {
        return (0.0, 0.0);
    }
    with_scale(f, lo, x, 400)
}

pub fn hermite_b_by_quadrature(n: usize, s: f64, x: f64) -> (f64, f64) {
    let lo = 0.5 * s - (((2 * n + 1) as f64).sqrt() + 12.0);
    let f = |y: f64| hermite_sequence(n, y).unwrap()[n] * (s * y - y * y).exp();
    if x <= lo {
        return (0.0, 0.0);
    }
    with_scale(f, lo, x, 400)
}

/// `sqrt(Gamma(n + alpha + 1) / n!)`.
pub fn laguerre_norm(n: usize, alpha: f64) -> f64 {
    (0.5 * (ln_gamma(n as f64 + alpha + 1.0) - ln_gamma(n as f64 + 1.0))).exp()
}

/// Gram matrix of `phi_0..phi_{n_max}` against the speed measure, integrated
/// in each model's natural polynomial variable over a range wide enough for
/// degree `n_max`.
pub fn gram(model: &DiffusionModel, n_max: usize) -> Vec<Vec<f64>> {
    let s2 = model.sigma() * model.sigma();
    let reach = 4.0 * n_max as f64 + 80.0;
    // (x of the integration variable, dx/dv, range)
    let (to_x, jac, lo, hi): (Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>, f64, f64) = match model.kind() {
        ModelKind::Cir => {
            let (g, b) = model.cir_params();
            let scale = s2 / (2.0 * g);
            (
                Box::new(move |u: f64| scale * u.powf(1.0 / b)),
                Box::new(move |u: f64| scale * u.powf(1.0 / b - 1.0) / b),
                0.0,
                reach.powf(b),
            )
        }
        ModelKind::Vasicek => {
            let (k, th, s) = (model.kappa(), model.theta(), model.sigma());
            let a = model.vasicek_a();
            let half = ((2 * n_max + 1) as f64).sqrt() + 12.0;
            (
                Box::new(move |xi: f64| th + s * xi / k.sqrt()),
                Box::new(move |_| s / k.sqrt()),
                -a - half,
                -a + half,
            )
        }
        ModelKind::ThreeHalves => {
            let (_, beta, _) = model.three_halves_params();
            (Box::new(move |z: f64| beta / z), Box::new(move |z: f64| beta / (z * z)), 0.0, reach)
        }
    };
    let mut g = vec![vec![0.0; n_max + 1]; n_max + 1];
    let (xs, ws) = gauss_legendre(16);
    let panels = 800;
    let h = (hi - lo) / panels as f64;
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * h;
        for (z, w) in xs.iter().zip(&ws) {
            let v = mid + 0.5 * h * z;
            let x = to_x(v);
            if model.check_state(x).is_err() || x == 0.0 {
                continue;
            }
            let weight = 0.5 * h * w * jac(v) * model.speed_density(x).unwrap();
            if weight == 0.0 || !weight.is_finite() {
                continue;
            }
            let phi = model.eigenfunctions(n_max, x).unwrap();
            for i in 0..=n_max {
                for j in 0..=i {
                    g[i][j] += weight * phi[i] * phi[j];
                }
            }
        }
    }
    for i in 0..=n_max {
        for j in 0..i {
            g[j][i] = g[i][j];
        }
    }
    g
}

pub fn three_halves() -> DiffusionModel {
    DiffusionModel::three_halves(2.0, 0.08, 0.8).unwrap()
}

pub fn benchmark_run(config: Config, with_put: bool, eps: f64, opts: &PricerOptions) -> PricingResult {
    let model = config.model().unwrap();
    let states: Vec<f64> = RATES.iter().map(|&r| state_for_short_rate(&model, r).unwrap()).collect();
    price_bond(&model, &BondSchedule::swiss1987(with_put), &states, eps, opts).unwrap()
}

/// Three decision dates: coupons at 0.5, .., 4.5, call from the second.
pub fn reduced_schedule() -> BondSchedule {
    BondSchedule {
        coupon: 0.0425,
        coupon_times: vec![0.5, 1.5, 2.5, 3.5, 4.5],
        protection_index: 2,
        call_prices: Some(vec![1.02, 1.01, 1.0]),
        put_prices: None,
        notice_delta: 0.1666,
    }
}
