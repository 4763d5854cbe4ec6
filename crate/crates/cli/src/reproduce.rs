//! Benchmark tables for the 1987 Swiss bond, each with the published values
//! alongside.

use std::time::Instant;

use eigenbond::benchmark::{convergence_rows, Config, RATES};
use eigenbond::pricer::{price_bond, state_for_short_rate, BondSchedule, PricerOptions, PricingResult};
use eigenbond::Result;
use rayon::prelude::*;

use crate::table::{fixed, opt, sci, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "UPPER")]
pub enum TableId {
    T3,
    T4,
    T5,
    T6,
    T7,
    T9,
    T10,
}

/// Break-even tables default to a tighter tolerance than value tables: at
/// `1e-7` a few roots of the pure-jump models are still `~3e-6` from their
/// limit.
pub const VALUE_EPS: f64 = 1e-7;
pub const ROOT_EPS: f64 = 1e-9;

pub fn default_eps(id: TableId) -> f64 {
    match id {
        TableId::T3 | TableId::T9 => ROOT_EPS,
        _ => VALUE_EPS,
    }
}

fn run(config: Config, with_put: bool, eps: f64) -> Result<PricingResult> {
    let model = config.model()?;
    let states = RATES.iter().map(|&r| state_for_short_rate(&model, r)).collect::<Result<Vec<_>>>()?;
    price_bond(&model, &BondSchedule::swiss1987(with_put), &states, eps, &PricerOptions::default())
}

fn diff(a: Option<f64>, b: Option<f64>) -> String {
    match (a, b) {
        (Some(a), Some(b)) => sci((a - b).abs()),
        (None, None) => "0".into(),
        _ => "mismatch".into(),
    }
}

fn values(configs: &[Config], with_put: bool, eps: f64) -> Result<Table> {
    let results: Vec<_> = configs.par_iter().map(|&c| run(c, with_put, eps)).collect::<Result<_>>()?;
    let mut t = Table::new(["config", "rate", "value", "paper", "abs_diff"]);
    for (c, res) in configs.iter().zip(results) {
        let gold = if with_put { c.callable_putable_values() } else { c.callable_values() };
        for ((r, v), g) in RATES.iter().zip(res.values).zip(gold) {
            t.push(vec![c.label().into(), format!("{r:.2}"), fixed(v), fixed(g), sci((v - g).abs())]);
        }
    }
    Ok(t)
}

fn break_evens(with_put: bool, eps: f64) -> Result<Table> {
    let results: Vec<_> = Config::ALL.par_iter().map(|&c| run(c, with_put, eps)).collect::<Result<_>>()?;
    let mut t = Table::new(["config", "kind", "date", "time", "value", "paper", "abs_diff"]);
    for (c, res) in Config::ALL.iter().zip(results) {
        let rows = res.break_even_short_rates.expect("benchmark models map states to short rates");
        let calls: Vec<Option<f64>> = if with_put {
            c.call_break_evens_with_put().iter().map(|v| Some(*v)).collect()
        } else {
            c.call_break_evens().to_vec()
        };
        let puts = c.put_break_evens();
        for (j, b) in rows.iter().enumerate() {
            let date = format!("tau{}", b.index);
            let time = format!("{:.3}", b.decision_time);
            t.push(vec![
                c.label().into(),
                "call".into(),
                date.clone(),
                time.clone(),
                opt(b.call),
                opt(calls[j]),
                diff(b.call, calls[j]),
            ]);
            if with_put {
                let p = Some(puts[j]);
                t.push(vec![c.label().into(), "put".into(), date, time, opt(b.put), opt(p), diff(b.put, p)]);
            }
        }
    }
    Ok(t)
}

const CONVERGENCE_EPS: [f64; 3] = [1e-5, 1e-6, 1e-7];
const TIMING_REPS: usize = 10;

fn convergence() -> Result<Table> {
    let mut t = Table::new([
        "config",
        "eps",
        "value",
        "price_change",
        "median_ms",
        "date",
        "max_n",
        "paper_max_n",
        "avg_n",
        "paper_avg_n",
        "avg_n_caveat",
    ]);
    let rate_index = RATES.iter().position(|r| *r == 0.05).unwrap();
    for c in [Config::Cir, Config::Vasicek] {
        let model = c.model()?;
        let x = state_for_short_rate(&model, RATES[rate_index])?;
        let sched = BondSchedule::swiss1987(false);
        let paper = convergence_rows(c).expect("convergence profile published for CIR and Vasicek");
        let mut prev: Option<f64> = None;
        for (eps, row) in CONVERGENCE_EPS.iter().zip(paper.iter()) {
            let mut times = Vec::with_capacity(TIMING_REPS);
            let mut res = None;
            for _ in 0..TIMING_REPS {
                let start = Instant::now();
                res = Some(price_bond(&model, &sched, &[x], *eps, &PricerOptions::default())?);
                times.push(start.elapsed().as_secs_f64() * 1e3);
            }
            let res = res.unwrap();
            times.sort_by(f64::total_cmp);
            let v = res.values[0];
            let change = prev.map(|p| sci((v - p).abs())).unwrap_or_else(|| "-".into());
            prev = Some(v);
            let dates = res.break_even_states.iter().map(|b| format!("tau{}", b.index)).chain(["t0".to_string()]);
            for (j, (date, st)) in dates.zip(&res.truncation_stats).enumerate() {
                t.push(vec![
                    c.label().into(),
                    sci(*eps),
                    fixed(v),
                    change.clone(),
                    format!("{:.3}", times[TIMING_REPS / 2]),
                    date,
                    st.max.to_string(),
                    row.max_terms[j].to_string(),
                    format!("{:.1}", st.average),
                    format!("{:.1}", row.average_terms[j]),
                    "order-of-magnitude".into(),
                ]);
            }
        }
    }
    Ok(t)
}

pub fn reproduce(id: TableId, eps: f64) -> Result<Table> {
    match id {
        TableId::T3 => break_evens(false, eps),
        TableId::T9 => break_evens(true, eps),
        TableId::T4 => convergence(),
        TableId::T5 => values(&[Config::Cir], false, eps),
        TableId::T6 => values(&[Config::Vasicek], false, eps),
        TableId::T7 => values(&Config::ALL[2..], false, eps),
        TableId::T10 => values(&Config::ALL, true, eps),
    }
}
