mod config;
mod reproduce;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eigenbond::oracle::{density_terms, mc_zero_coupon, quadrature_dp_price, shortest_horizon};
use eigenbond::pricer::{price_bond, state_for_short_rate, PricerOptions};
use eigenbond::subordinators::PricingModel;
use eigenbond::Error;

use config::{ClockPreset, Format, KindName, ModelBlock, RunConfig};
use reproduce::{default_eps, reproduce, TableId};
use table::{fixed, opt, sci, Table};

const BUILD_ID: &str = env!("EIGENBOND_BUILD_ID");
const DP_GRID: usize = 1600;

#[derive(Parser)]
#[command(name = "eigenbond", version, about = "Callable and putable bond pricing by eigenfunction expansion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price a bond at a list of initial short rates.
    Price(PriceArgs),
    /// Recompute a benchmark table next to its published values.
    Reproduce(ReproduceArgs),
    /// Time full bond pricings at three tolerances.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Swiss1987,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Oracle {
    /// Quadrature dynamic program on the same schedule.
    Dp,
    /// Monte Carlo zero-coupon bond to maturity.
    Mc,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in bond; used when no config is given.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Add the put ladder to the preset.
    #[arg(long, conflicts_with = "config")]
    put: bool,
    /// Replace the model block with this model at its default parameters.
    #[arg(long, value_enum)]
    model: Option<KindName>,
    /// Subordinate the model with a named inverse Gaussian clock.
    #[arg(long, value_enum)]
    clock: Option<ClockPreset>,
    #[arg(long)]
    eps: Option<f64>,
    /// Comma-separated initial short rates.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    rates: Option<Vec<f64>>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct PriceArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Append an independent check of each value.
    #[arg(long, value_enum)]
    oracle: Option<Oracle>,
    /// Seed of the Monte Carlo oracle.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(value_enum)]
    table: TableId,
    /// Defaults to 1e-9 for break-even tables and 1e-7 otherwise.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 20)]
    repetitions: usize,
}

enum Failure {
    Invalid(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnsupportedModel { .. } | Error::Parameter(_) | Error::Schedule(_) => Failure::Invalid(e.to_string()),
            e => Failure::Numerical(e.to_string()),
        }
    }
}

fn load(args: &RunArgs) -> Result<(RunConfig, PricingModel), Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&text).map_err(Failure::Invalid)?
        }
        None => match args.preset.unwrap_or(Preset::Swiss1987) {
            Preset::Swiss1987 => RunConfig::swiss1987(args.put),
        },
    };
    if let Some(kind) = args.model {
        cfg.model = ModelBlock::default_for(kind);
    }
    if let Some(clock) = args.clock {
        cfg.subordinator = Some(clock.block());
    }
    if let Some(eps) = args.eps {
        cfg.run.eps = eps;
    }
    if let Some(rates) = &args.rates {
        cfg.run.rates = rates.clone();
    }
    if let Some(out) = &args.output {
        cfg.run.output = Some(out.clone());
    }
    if let Some(f) = args.format {
        cfg.run.format = f;
    }
    let model = cfg.validate().map_err(Failure::Invalid)?;
    Ok((cfg, model))
}

fn emit(text: &str, output: Option<&str>) -> Result<(), Failure> {
    match output {
        None | Some("-") => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Invalid(format!("cannot write {path}: {e}"))),
    }
}

fn states(model: &PricingModel, rates: &[f64]) -> Result<Vec<f64>, Failure> {
    rates.iter().map(|&r| state_for_short_rate(model, r).map_err(Failure::from)).collect()
}

fn cmd_price(args: &PriceArgs) -> Result<(), Failure> {
    let (cfg, model) = load(&args.run)?;
    let xs = states(&model, &cfg.run.rates)?;
    let res = price_bond(&model, &cfg.schedule, &xs, cfg.run.eps, &PricerOptions::default())?;
    let with_put = cfg.schedule.put_prices.is_some();
    let levels = res.break_even_short_rates.as_ref().unwrap_or(&res.break_even_states);

    let mut header: Vec<String> = ["rate", "state", "value", "coefficient_terms", "max_n", "avg_n_t0"].map(String::from).into();
    for b in levels {
        header.push(format!("call_tau{}", b.index));
        if with_put {
            header.push(format!("put_tau{}", b.index));
        }
    }
    match args.oracle {
        Some(Oracle::Dp) => header.extend(["dp_value", "dp_abs_diff"].map(String::from)),
        Some(Oracle::Mc) => header.extend(["zcb_maturity", "zcb_expansion", "zcb_mc", "zcb_se"].map(String::from)),
        None => {}
    }
    let mut table = Table::new(header);
    let max_n = res.truncation_stats.iter().map(|s| s.max).max().unwrap_or(0);
    let t0 = res.truncation_stats.last().map(|s| s.average).unwrap_or(0.0);
    let n_density = match args.oracle {
        Some(Oracle::Dp) => density_terms(&model, shortest_horizon(&cfg.schedule))?,
        _ => 0,
    };
    for ((r, x), v) in cfg.run.rates.iter().zip(&xs).zip(&res.values) {
        let mut row = vec![fixed(*r), fixed(*x), fixed(*v), res.coefficient_terms.to_string(), max_n.to_string(), format!("{t0:.1}")];
        for b in levels {
            row.push(opt(b.call));
            if with_put {
                row.push(opt(b.put));
            }
        }
        match args.oracle {
            Some(Oracle::Dp) => {
                let d = quadrature_dp_price(&model, &cfg.schedule, *x, DP_GRID, n_density)?;
                row.extend([fixed(d), sci((d - v).abs())]);
            }
            Some(Oracle::Mc) => {
                let t = cfg.schedule.maturity();
                let z = eigenbond::pricer::zero_coupon_price(&model, t, *x, cfg.run.eps)?;
                let (m, se) = mc_zero_coupon(&model, t, *x, args.paths, 250, args.seed)?;
                row.extend([format!("{t:.4}"), fixed(z), fixed(m), sci(se)]);
            }
            None => {}
        }
        table.push(row);
    }
    let comment = format!("eigenbond price model={} eps={:e} build={BUILD_ID}", cfg.description(), cfg.run.eps);
    emit(&table.render(cfg.run.format, &comment), cfg.run.output.as_deref())
}

fn cmd_reproduce(args: &ReproduceArgs) -> Result<(), Failure> {
    let eps = args.eps.unwrap_or_else(|| default_eps(args.table));
    if !(eps > 0.0 && eps <= 1e-3) {
        return Err(Failure::Invalid(format!("eps must lie in (0, 1e-3], got {eps}")));
    }
    let table = reproduce(args.table, eps)?;
    let comment = format!("eigenbond reproduce {:?} eps={eps:e} build={BUILD_ID}", args.table);
    emit(&table.render(args.format, &comment), args.output.as_deref())
}

const BENCH_EPS: [f64; 3] = [1e-5, 1e-6, 1e-7];

fn cmd_bench(args: &BenchArgs) -> Result<(), Failure> {
    if args.repetitions < 10 {
        return Err(Failure::Invalid(format!("need at least 10 repetitions, got {}", args.repetitions)));
    }
    let (cfg, model) = load(&args.run)?;
    let xs = states(&model, &cfg.run.rates)?;
    let mut table = Table::new(["eps", "median_ms", "p95_ms", "samples"]);
    for eps in BENCH_EPS {
        let mut times = Vec::with_capacity(args.repetitions * xs.len());
        for _ in 0..args.repetitions {
            for x in &xs {
                let start = Instant::now();
                price_bond(&model, &cfg.schedule, &[*x], eps, &PricerOptions::default())?;
                times.push(start.elapsed().as_secs_f64() * 1e3);
            }
        }
        times.sort_by(f64::total_cmp);
        let pick = |q: f64| times[((times.len() - 1) as f64 * q).round() as usize];
        table.push(vec![sci(eps), format!("{:.4}", pick(0.5)), format!("{:.4}", pick(0.95)), times.len().to_string()]);
    }
    let comment = format!("eigenbond bench model={} build={BUILD_ID}", cfg.description());
    emit(&table.render(cfg.run.format, &comment), cfg.run.output.as_deref())
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("EIGENBOND_THREADS") else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Invalid(format!("EIGENBOND_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Invalid(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Price(a) => cmd_price(a),
        Command::Reproduce(a) => cmd_reproduce(a),
        Command::Bench(a) => cmd_bench(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
