//! `omegastop` — command-line front end for the omega-killed stable
//! optimal-stopping library.
//!
//! Three subcommands, one report shape: every run prints a single JSON
//! object on stdout with the keys `command`, `model`, `result`,
//! `diagnostics`, `version`, `wall_ms`, and logs on stderr. Floats are
//! serialized with 17 significant digits so reports round-trip exactly;
//! the supercritical regime reports the string `"infinite"` instead of a
//! number. Exit codes: 0 success, 2 user error (bad flags, inadmissible
//! parameters, boundary regime), 3 numeric failure inside the solver.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use omegastop::simulate::{
    estimate_killing_probability, estimate_policy_value, estimate_sup_moment, write_paths_csv,
};
use omegastop::stopping::mgf_sup;
use omegastop::{
    CrossDirection, Error, GainSpec, OmegaClock, PathConfig, Regime, StableModel, StableParams,
    StoppingSolution, Value,
};

#[derive(Parser)]
#[command(
    name = "omegastop",
    version,
    about = "Optimal stopping of a stable process killed by an omega clock",
    long_about = "Computes the closed-form solution of the optimal stopping problem for a \
                  strictly stable process killed at state-dependent rate k*(-x)^(-alpha) on \
                  the negative half-line, and cross-checks it by Monte Carlo simulation. \
                  All reports are JSON on stdout; logs go to stderr."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Model flags shared by every subcommand.
#[derive(Args)]
struct ModelArgs {
    /// Stability index alpha; admissible in (0,1) or (1,2), or exactly 1 with rho = 1/2
    #[arg(long)]
    alpha: f64,

    /// Positivity parameter rho = P(X_1 > 0)
    #[arg(long)]
    rho: f64,

    /// Killing level k >= 0 in the clock rate omega(x) = k (-x)^(-alpha)
    #[arg(long)]
    k: f64,

    /// Worker threads for simulation (0 = automatic)
    #[arg(long, env = "OMEGASTOP_THREADS", default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived model constants and the gamma-identity residual
    Model {
        #[command(flatten)]
        model: ModelArgs,
    },

    /// Solve the stopping problem: regime, exercise threshold, values
    Solve {
        #[command(flatten)]
        model: ModelArgs,

        /// Payoff exponent r in g(x) = (x^r - K)+ (finite nonzero)
        #[arg(long, allow_hyphen_values = true)]
        r: f64,

        /// Strike K in the payoff (x^r - K)+
        #[arg(long, default_value_t = 1.0)]
        strike: f64,

        /// State at which to evaluate the value function; repeatable
        #[arg(long = "x", allow_hyphen_values = true)]
        xs: Vec<f64>,
    },

    /// Monte Carlo estimators with closed-form comparators
    Simulate {
        #[command(flatten)]
        model: ModelArgs,

        /// What to estimate
        #[arg(long, value_enum)]
        mode: SimMode,

        /// Number of simulated paths
        #[arg(long, default_value_t = 10_000)]
        n: usize,

        /// Euler time step
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,

        /// Simulation horizon (paths still open at the horizon are censored)
        #[arg(long, default_value_t = 200.0)]
        horizon: f64,

        /// Seed of the counter-based RNG; same seed => same report payload
        #[arg(long, default_value_t = 1)]
        seed: u64,

        /// Stopping threshold (policy mode only; value mode derives it)
        #[arg(long)]
        threshold: Option<f64>,

        /// Payoff exponent (policy, value, supmoment modes)
        #[arg(long, allow_hyphen_values = true)]
        r: Option<f64>,

        /// Strike K (policy and value modes)
        #[arg(long, default_value_t = 1.0)]
        strike: f64,

        /// Start state of the paths (policy and value modes)
        #[arg(long, default_value_t = 1.0)]
        x0: f64,

        /// Override the clock-rate cap band near zero (default dt^(1/alpha)/10)
        #[arg(long)]
        zero_band: Option<f64>,

        /// Write the simulated paths as CSV (path_id,t,x,a,alive) to this file
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SimMode {
    /// Probability that the clock kills before the path returns to [0, inf)
    P,
    /// Expected payoff of a fixed threshold-crossing stopping rule
    Policy,
    /// Expected payoff under the optimal rule, against the closed-form value
    Value,
    /// Moment E[sup^r] of the running supremum at the killing time
    Supmoment,
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cli = Cli::parse();
    match run(cli, started) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_numeric() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(cli: Cli, started: Instant) -> omegastop::Result<Json> {
    match cli.command {
        Command::Model { model } => cmd_model(&model, started),
        Command::Solve {
            model,
            r,
            strike,
            xs,
        } => cmd_solve(&model, r, strike, &xs, started),
        Command::Simulate {
            model,
            mode,
            n,
            dt,
            horizon,
            seed,
            threshold,
            r,
            strike,
            x0,
            zero_band,
            dump,
        } => {
            let sim = SimArgs {
                mode,
                n,
                dt,
                horizon,
                seed,
                threshold,
                r,
                strike,
                x0,
                zero_band,
                dump,
            };
            cmd_simulate(&model, &sim, started)
        }
    }
}

fn build_model(args: &ModelArgs) -> omegastop::Result<StableModel> {
    init_threads(args.threads);
    let params = StableParams::new(args.alpha, args.rho)?;
    let clock = OmegaClock::new(args.k)?;
    StableModel::new(params, clock)
}

fn init_threads(threads: usize) {
    if threads > 0 {
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("warning: worker pool already configured: {err}");
        }
    }
}

/// Serialize a float with 17 significant digits, or as the string
/// `"infinite"` when the quantity diverges.
fn num(x: f64) -> Json {
    if x.is_finite() {
        let literal = format!("{x:.16e}");
        Json::Number(serde_json::Number::from_str(&literal).expect("float formats as JSON number"))
    } else if x == f64::INFINITY {
        Json::String("infinite".into())
    } else {
        Json::String(format!("{x}"))
    }
}

fn opt_num(x: Option<f64>) -> Json {
    x.map(num).unwrap_or(Json::Null)
}

fn value_json(v: Value) -> Json {
    match v {
        Value::Finite(x) => num(x),
        Value::Infinite => Json::String("infinite".into()),
    }
}

fn report(
    command: &str,
    model: &StableModel,
    result: Json,
    diagnostics: Json,
    started: Instant,
) -> Json {
    json!({
        "command": command,
        "model": {
            "alpha": num(model.alpha()),
            "rho": num(model.rho()),
            "k": num(model.k()),
            "c_plus": num(model.c_plus()),
            "c_minus": num(model.c_minus()),
            "p": num(model.p()),
            "delta": num(model.delta()),
            "q": num(model.q()),
        },
        "result": result,
        "diagnostics": diagnostics,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_ms": started.elapsed().as_millis() as u64,
    })
}

fn cmd_model(args: &ModelArgs, started: Instant) -> omegastop::Result<Json> {
    let model = build_model(args)?;
    eprintln!(
        "model: alpha={} rho={} k={} => p={:.6} delta={:.6}",
        model.alpha(),
        model.rho(),
        model.k(),
        model.p(),
        model.delta()
    );
    let result = json!({
        "rho_hat": num(model.rho_hat()),
        "delta_identity_residual": num(model.delta_identity_residual()),
    });
    let mut diagnostics = json!({});
    if let Ok(q_gamma) = model.q_gamma_form() {
        diagnostics["q_gamma_form"] = num(q_gamma);
        diagnostics["q_formula_gap"] = num((q_gamma - model.q()).abs());
    }
    Ok(report("model", &model, result, diagnostics, started))
}

fn cmd_solve(
    args: &ModelArgs,
    r: f64,
    strike: f64,
    xs: &[f64],
    started: Instant,
) -> omegastop::Result<Json> {
    let model = build_model(args)?;
    let gain = GainSpec::new(r, strike)?;
    let solution = StoppingSolution::solve(&model, gain)?;
    eprintln!(
        "solve: regime {:?}, b* = {:?}",
        solution.regime(),
        solution.b_star()
    );

    let b_star = match solution.regime() {
        Regime::InfiniteValue => Json::String("infinite".into()),
        _ => opt_num(solution.b_star()),
    };
    let mut values = Vec::with_capacity(xs.len());
    for &x in xs {
        let v = solution.value_at(x)?;
        let stops = solution
            .stop_region_contains(x)
            .map(Json::Bool)
            .unwrap_or(Json::Null);
        values.push(json!({
            "x": num(x),
            "value": value_json(v),
            "stop_now": stops,
        }));
    }
    let result = json!({
        "regime": format!("{:?}", solution.regime()),
        "b_star": b_star,
        "mgf_factor": opt_num(solution.mgf_factor()),
        "values": values,
    });
    let diagnostics = json!({
        "r": num(r),
        "strike": num(strike),
    });
    Ok(report("solve", &model, result, diagnostics, started))
}

struct SimArgs {
    mode: SimMode,
    n: usize,
    dt: f64,
    horizon: f64,
    seed: u64,
    threshold: Option<f64>,
    r: Option<f64>,
    strike: f64,
    x0: f64,
    zero_band: Option<f64>,
    dump: Option<PathBuf>,
}

fn cmd_simulate(args: &ModelArgs, sim: &SimArgs, started: Instant) -> omegastop::Result<Json> {
    let model = build_model(args)?;
    let mut config = PathConfig::new(sim.n, sim.dt, sim.horizon, sim.seed)?;
    if let Some(band) = sim.zero_band {
        config = config.with_zero_band(band)?;
    }
    eprintln!(
        "simulate: mode {:?}, n={} dt={} horizon={} seed={}",
        sim.mode, sim.n, sim.dt, sim.horizon, sim.seed
    );

    let need_r = || {
        sim.r.ok_or_else(|| {
            Error::InvalidInput(format!("--mode {:?} requires --r", sim.mode).to_lowercase())
        })
    };

    // Each mode yields (report, comparator, start state of the dumped paths).
    let (rep, comparator, dump_x0) = match sim.mode {
        SimMode::P => {
            if sim.threshold.is_some() {
                return Err(Error::InvalidInput(
                    "--threshold applies only to --mode policy".into(),
                ));
            }
            let rep = estimate_killing_probability(&config, &model)?;
            (rep, Some(model.p()), 0.0)
        }
        SimMode::Policy => {
            let r = need_r()?;
            let threshold = sim.threshold.ok_or_else(|| {
                Error::InvalidInput("--mode policy requires --threshold".into())
            })?;
            let gain = GainSpec::new(r, sim.strike)?;
            let direction = if r > 0.0 {
                CrossDirection::UpCross
            } else {
                CrossDirection::DownEntry
            };
            let rep = estimate_policy_value(
                &config, &model, gain, threshold, direction, sim.x0, None,
            )?;
            (rep, None, sim.x0)
        }
        SimMode::Value => {
            let r = need_r()?;
            if sim.threshold.is_some() {
                return Err(Error::InvalidInput(
                    "--mode value derives its threshold; use --mode policy to set one".into(),
                ));
            }
            let gain = GainSpec::new(r, sim.strike)?;
            let solution = StoppingSolution::solve(&model, gain)?;
            let (threshold, direction) = match solution.regime() {
                Regime::CallFinite => (
                    solution.b_star().expect("finite regime has a threshold"),
                    CrossDirection::UpCross,
                ),
                Regime::PutFinite => (
                    1.0 / solution.b_star().expect("finite regime has a threshold"),
                    CrossDirection::DownEntry,
                ),
                _ => {
                    return Err(Error::InvalidInput(
                        "--mode value needs a finite-value regime".into(),
                    ))
                }
            };
            // Censored paths are scored with the closed-form continuation
            // value, which removes the finite-horizon bias from the
            // comparison; a numeric hiccup falls back to the payoff (a
            // lower bound, so the estimate stays conservative).
            let residual = |x: f64| -> f64 {
                match solution.value_at(x) {
                    Ok(Value::Finite(v)) => v,
                    _ => gain.payoff(x),
                }
            };
            let rep = estimate_policy_value(
                &config,
                &model,
                gain,
                threshold,
                direction,
                sim.x0,
                Some(&residual),
            )?;
            let comparator = solution.value_at(sim.x0)?.finite();
            (rep, comparator, sim.x0)
        }
        SimMode::Supmoment => {
            let r = need_r()?;
            if sim.threshold.is_some() {
                return Err(Error::InvalidInput(
                    "--threshold applies only to --mode policy".into(),
                ));
            }
            let rep = estimate_sup_moment(&config, &model, r)?;
            (rep, Some(mgf_sup(r, &model)?), 1.0)
        }
    };

    if let Some(path) = &sim.dump {
        let file = std::fs::File::create(path).map_err(|e| {
            Error::InvalidInput(format!("cannot create dump file {}: {e}", path.display()))
        })?;
        let mut out = std::io::BufWriter::new(file);
        write_paths_csv(&mut out, &config, &model, dump_x0)
            .and_then(|()| out.flush())
            .map_err(|e| {
                Error::InvalidInput(format!("cannot write dump file {}: {e}", path.display()))
            })?;
        eprintln!("dumped {} paths to {}", sim.n, path.display());
    }

    let z_score = match comparator {
        Some(c) if rep.std_error > 0.0 => Some((rep.estimate - c) / rep.std_error),
        _ => None,
    };
    let result = json!({
        "mode": format!("{:?}", sim.mode).to_lowercase(),
        "estimate": num(rep.estimate),
        "std_error": num(rep.std_error),
        "n_effective": rep.n_effective,
        "comparator": opt_num(comparator),
        "z_score": opt_num(z_score),
        "notes": rep.bias_notes,
    });
    let diagnostics = json!({
        "n": sim.n,
        "dt": num(sim.dt),
        "horizon": num(sim.horizon),
        "seed": sim.seed,
        "zero_band": opt_num(config.zero_band()),
        "threshold": opt_num(sim.threshold),
        "r": opt_num(sim.r),
        "strike": num(sim.strike),
        "x0": num(sim.x0),
        "dump": sim.dump.as_ref().map(|p| p.display().to_string()),
    });
    Ok(report("simulate", &model, result, diagnostics, started))
}
