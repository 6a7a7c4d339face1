use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Instant;

use dpgdp::compare::default_eps_grid;
use dpgdp::regret::DEFAULT_TOL;
use dpgdp::{
    calibrate_mu_to_adp, compare, gdp_tradeoff, Accounting, Direction, MechanismEntry, MechanismSpec, Report, RunConfig,
};
use serde::Serialize;

use crate::args::{AccountArgs, CompareArgs, ConvertArgs, SweepArgs, TradeoffArgs};
use crate::config::{emit, grid_step_fallback, resolve, CliError, CliResult};

const TABLE_EPSILONS: [f64; 8] = [0.1, 0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0];
const TABLE_DELTAS: [f64; 3] = [1e-5, 1e-6, 1e-9];
const GRID_POINTS: usize = 1000;
const DEFAULT_DELTA: f64 = 1e-5;

#[derive(Serialize)]
struct AccountOutput<'a> {
    #[serde(flatten)]
    report: &'a Report,
    runtime_ms: u128,
    config_echo: &'a RunConfig,
}

pub fn account(args: &AccountArgs) -> CliResult<()> {
    let mut config = resolve(&args.run)?;
    if args.delta.is_some() {
        config.delta_query = args.delta;
    }
    if args.epsilon.is_some() {
        config.epsilon_query = args.epsilon;
    }
    config.validate()?;
    let start = Instant::now();
    let report = dpgdp::account(&config)?;
    let out = AccountOutput { report: &report, runtime_ms: start.elapsed().as_millis(), config_echo: &config };
    let mut json = serde_json::to_string_pretty(&out).expect("report serializes");
    json.push('\n');
    emit(config.output.as_deref(), &json)
}

fn check_convert_range(eps: f64, delta: f64) -> CliResult<()> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(CliError::Usage(format!("epsilon must be finite and nonnegative, got {eps}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CliError::Usage(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

pub fn convert(args: &ConvertArgs) -> CliResult<()> {
    let mut out = String::new();
    if args.table {
        out.push_str("epsilon");
        for d in TABLE_DELTAS {
            let _ = write!(out, ",delta={d:e}");
        }
        out.push('\n');
        for e in TABLE_EPSILONS {
            let _ = write!(out, "{e}");
            for d in TABLE_DELTAS {
                let _ = write!(out, ",{:.2}", calibrate_mu_to_adp(e, d)?);
            }
            out.push('\n');
        }
    } else {
        let (eps, delta) = (args.epsilon.expect("clap requires epsilon"), args.delta.expect("clap requires delta"));
        check_convert_range(eps, delta)?;
        let mu = calibrate_mu_to_adp(eps, delta)?;
        let _ = writeln!(out, "epsilon,delta,mu_rounded,mu\n{eps},{delta:e},{mu:.2},{mu}");
    }
    emit(args.output.as_deref(), &out)
}

pub fn tradeoff(args: &TradeoffArgs) -> CliResult<()> {
    let config = resolve(&args.run)?;
    let acc = Accounting::from_config(&config)?;
    let mu = acc.fit_mu()?.mu;
    let curve = acc.tradeoff()?;
    let mut rows: Vec<(f64, f64)> = curve.breakpoints().iter().map(|b| (b.alpha, b.beta)).collect();
    rows.extend((0..GRID_POINTS).map(|i| {
        let a = i as f64 / (GRID_POINTS - 1) as f64;
        (a, curve.eval(a))
    }));
    rows.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.total_cmp(&y.1)));
    rows.dedup();
    let mut out = String::from("alpha,beta,beta_gdp\n");
    for (a, b) in rows {
        let _ = writeln!(out, "{a:.16e},{b:.16e},{:.16e}", gdp_tradeoff(mu, a));
    }
    emit(config.output.as_deref(), &out)
}

pub fn compare_cmd(args: &CompareArgs) -> CliResult<()> {
    let config = resolve(&args.run)?;
    let delta = args.delta.or(config.delta_query).unwrap_or(DEFAULT_DELTA);
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CliError::Usage(format!("delta must lie in (0, 1), got {delta}")));
    }
    let acc = Accounting::from_config(&config)?;
    let rows = compare(&acc, &config.mechanisms, &args.representations, delta, &default_eps_grid())?;
    let mut out = String::from("representation,parameter,regret_percent\n");
    for r in rows {
        let param = r.parameter.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{param},{:.2}", r.representation, 100.0 * r.regret);
    }
    emit(config.output.as_deref(), &out)
}

/// (μ, regret) of one sweep cell.
type CellResult = dpgdp::Result<(f64, f64)>;

struct Cell {
    sigma: f64,
    q: f64,
    t: u64,
}

pub fn sweep(args: &SweepArgs) -> CliResult<()> {
    if args.sigma.is_empty() || args.sample_rate.is_empty() || args.steps.is_empty() {
        return Err(CliError::Usage("the sweep grid is empty".into()));
    }
    let step = grid_step_fallback(args.grid_step)?;
    let direction: Direction = args.direction.map(Into::into).unwrap_or_default();
    let mut cells = Vec::new();
    for &sigma in &args.sigma {
        for &q in &args.sample_rate {
            for &t in &args.steps {
                let mut cfg = RunConfig::new(vec![MechanismEntry::new(
                    MechanismSpec::subsampled_gaussian(sigma, q).with_direction(direction),
                    t,
                )]);
                cfg.grid_step = step;
                cfg.validate()?;
                cells.push(Cell { sigma, q, t });
            }
        }
    }

    let workers = args
        .threads
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, cells.len());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<CellResult>>> = Mutex::new((0..cells.len()).map(|_| None).collect());
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(c) = cells.get(i) else { break };
                let entry = MechanismEntry::new(MechanismSpec::subsampled_gaussian(c.sigma, c.q).with_direction(direction), c.t);
                let r = Accounting::run(&[entry], step, &Default::default())
                    .and_then(|acc| acc.mu_and_regret(DEFAULT_TOL))
                    .map(|(b, _)| (b.mu, b.regret.unwrap_or(0.0)));
                results.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });

    let mut out = String::from("sigma,q,t,mu,regret\n");
    let (mut checked, mut failing) = (0usize, Vec::new());
    let mut worst: f64 = 0.0;
    for (c, r) in cells.iter().zip(results.into_inner().expect("no worker panicked")) {
        let (mu, regret) = r.expect("every cell ran")?;
        let _ = writeln!(out, "{},{},{},{mu},{regret}", c.sigma, c.q, c.t);
        if c.sigma >= 2.0 && c.t >= 400 {
            checked += 1;
            worst = worst.max(regret);
            if regret >= args.threshold {
                failing.push(format!("sigma={} q={} t={} regret={regret:.4}", c.sigma, c.q, c.t));
            }
        }
    }
    emit(args.output.as_deref(), &out)?;
    if failing.is_empty() {
        eprintln!(
            "PASS: {checked} cells with sigma >= 2 and t >= 400, max regret {worst:.4e} < {}",
            args.threshold
        );
    } else {
        eprintln!(
            "FAIL: {} of {checked} cells with sigma >= 2 and t >= 400 have regret >= {}: {}",
            failing.len(),
            args.threshold,
            failing.join("; ")
        );
    }
    Ok(())
}
