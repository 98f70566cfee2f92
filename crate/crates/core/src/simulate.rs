//! Monte Carlo ground truth: path sampling of the omega-killed stable
//! process with Euler stepping and exponential clock thinning, plus
//! ensemble estimators for the killing probability, threshold-policy
//! values, supremum moments, and fixed-time values. Every closed form in
//! the library can be cross-checked against these estimators at desk
//! scale.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{GainSpec, StableModel, StableParams};
use crate::numerics::{cos_pi, sin_pi};

/// Simulation parameters shared by all estimators.
#[derive(Debug, Clone, Copy)]
pub struct PathConfig {
    n_paths: usize,
    dt: f64,
    horizon: f64,
    seed: u64,
    zero_band: Option<f64>,
}

impl PathConfig {
    pub fn new(n_paths: usize, dt: f64, horizon: f64, seed: u64) -> Result<Self> {
        if n_paths == 0 {
            return Err(Error::InvalidInput("n_paths must be at least 1".into()));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        if !(horizon >= dt) || !horizon.is_finite() {
            return Err(Error::InvalidInput(format!(
                "horizon must be finite and at least dt, got {horizon}"
            )));
        }
        Ok(Self {
            n_paths,
            dt,
            horizon,
            seed,
            zero_band: None,
        })
    }

    /// Override the cutoff below zero at which the killing rate is capped
    /// (default: dt^{1/alpha} / 10, one tenth of a typical step).
    pub fn with_zero_band(mut self, band: f64) -> Result<Self> {
        if !(band > 0.0) || !band.is_finite() {
            return Err(Error::InvalidInput(format!(
                "zero_band must be positive, got {band}"
            )));
        }
        self.zero_band = Some(band);
        Ok(self)
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn zero_band(&self) -> Option<f64> {
        self.zero_band
    }
}

/// One discretized trajectory of the killed process.
#[derive(Debug, Clone)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    /// Accumulated killing exposure A_t = integral of omega(X_s) ds.
    pub clock_value: Vec<f64>,
    pub killed: bool,
    pub kill_time: Option<f64>,
}

/// Ensemble estimate with its sampling error and diagnostics.
#[derive(Debug, Clone)]
pub struct PathEnsembleReport {
    pub estimate: f64,
    /// Sample standard deviation / sqrt(n_effective).
    pub std_error: f64,
    /// Paths that contributed a value to the estimate.
    pub n_effective: usize,
    pub config: PathConfig,
    pub bias_notes: Vec<String>,
}

/// Which first-passage rule a policy estimator follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossDirection {
    /// Stop at the first time the state reaches or exceeds the threshold.
    UpCross,
    /// Stop at the first time the state lies in (0, threshold].
    DownEntry,
}

/// Skewness parameter of the standard S1 stable parameterization that
/// reproduces the positivity parameter rho:
///     rho = 1/2 + arctan(beta tan(pi alpha / 2)) / (pi alpha).
/// The admissible set pins rho = 1/2 when alpha = 1, where the relation
/// degenerates and the answer is 0 by symmetry.
pub fn rho_to_skewness(params: &StableParams) -> f64 {
    let a = params.alpha();
    if a == 1.0 {
        return 0.0;
    }
    let phase = a * (params.rho() - 0.5);
    (sin_pi(phase) / cos_pi(phase)) / (sin_pi(0.5 * a) / cos_pi(0.5 * a))
}

/// Time-rescale factor bridging the S1 sampler to the target
/// normalization: the target exponent is |theta|^alpha e^{-i pi alpha
/// (rho - 1/2) sgn theta}, the S1 exponent has modulus sec(pi alpha (rho
/// - 1/2)) |theta|^alpha, so running the sampled process at speed
/// cos(pi alpha (rho - 1/2)) matches laws exactly.
fn time_rescale(params: &StableParams) -> f64 {
    cos_pi(params.alpha() * (params.rho() - 0.5))
}

/// Chambers-Mallows-Stuck sampler for the standard S1 stable law with
/// the skewness matching the model's positivity parameter.
#[derive(Debug, Clone, Copy)]
struct CmsSampler {
    alpha: f64,
    shift: f64,
    scale: f64,
    cauchy: bool,
}

impl CmsSampler {
    fn new(params: &StableParams) -> Self {
        let alpha = params.alpha();
        if alpha == 1.0 {
            return Self {
                alpha,
                shift: 0.0,
                scale: 1.0,
                cauchy: true,
            };
        }
        let beta = rho_to_skewness(params);
        let tan_half = sin_pi(0.5 * alpha) / cos_pi(0.5 * alpha);
        let bt = beta * tan_half;
        Self {
            alpha,
            shift: bt.atan() / alpha,
            scale: (1.0 + bt * bt).powf(0.5 / alpha),
            cauchy: false,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = (rng.gen::<f64>() - 0.5) * PI;
        if self.cauchy {
            return v.tan();
        }
        // Unit exponential, floored so the power below never divides by
        // an exact zero (a measure-zero draw).
        let w = (-(1.0 - rng.gen::<f64>()).ln()).max(1e-300);
        let avb = self.alpha * (v + self.shift);
        self.scale * avb.sin() / v.cos().powf(1.0 / self.alpha)
            * ((v - avb).cos() / w).powf((1.0 - self.alpha) / self.alpha)
    }
}

/// One increment of the target-normalized stable process over dt: a
/// standard S1 sample run at the bridging time rescale.
pub fn sample_stable_increment<R: Rng + ?Sized>(
    rng: &mut R,
    dt: f64,
    params: &StableParams,
) -> f64 {
    let sampler = CmsSampler::new(params);
    (time_rescale(params) * dt).powf(1.0 / params.alpha()) * sampler.draw(rng)
}

/// Killing-rate trapezoid increment over one step, with the rate capped
/// at its value one zero-band below the origin.
fn trapezoid_clock(model: &StableModel, band: f64, x0: f64, x1: f64, dt: f64) -> f64 {
    let rate = |x: f64| {
        if x >= 0.0 {
            0.0
        } else {
            model.k() * (-x).max(band).powf(-model.alpha())
        }
    };
    0.5 * (rate(x0) + rate(x1)) * dt
}

/// Single-path Euler driver. Each path owns a counter-based RNG stream
/// keyed by (seed, path index), so ensembles are reproducible under any
/// parallel schedule. In scale-adaptive mode the step size follows the
/// current state magnitude (dt |x|^alpha, increments scaled by |x|); the
/// law is unchanged because both the stable scaling and the killing rate
/// are scale-covariant, and far scales are reached in logarithmically
/// many steps.
struct Stepper<'m> {
    model: &'m StableModel,
    sampler: CmsSampler,
    dt: f64,
    root_dt: f64,
    band: f64,
    adaptive: bool,
    rng: ChaCha8Rng,
    t: f64,
    x: f64,
    clock: f64,
    alive: bool,
    kill_time: Option<f64>,
    /// Consecutive completed steps whose both endpoints sat in (-band, 0).
    trapped_steps: u32,
}

impl<'m> Stepper<'m> {
    fn new(
        model: &'m StableModel,
        config: &PathConfig,
        x0: f64,
        path_index: u64,
        adaptive: bool,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(path_index);
        let params = model.params();
        let band = config
            .zero_band
            .unwrap_or_else(|| config.dt.powf(1.0 / model.alpha()) / 10.0);
        Self {
            model,
            sampler: CmsSampler::new(&params),
            dt: config.dt,
            root_dt: (time_rescale(&params) * config.dt).powf(1.0 / model.alpha()),
            band,
            adaptive,
            rng,
            t: 0.0,
            x: x0,
            clock: 0.0,
            alive: true,
            kill_time: None,
            trapped_steps: 0,
        }
    }

    /// Advance one step; returns liveness after the step. Kill decisions
    /// (thinning against the trapezoid exposure, or the forced kill once
    /// the path stays trapped against the rate singularity in (-band, 0)
    /// for more than one full step) are made before any crossing checks
    /// by callers.
    fn step(&mut self) -> bool {
        if !self.alive {
            return false;
        }
        // Floor keeps the adaptive step strictly positive if a state ever
        // rounds to exactly 0.0; the killing clock, not the floor, is what
        // stops near-zero dives (exposure per adaptive step is scale-free).
        let scale = if self.adaptive {
            self.x.abs().max(1e-150)
        } else {
            1.0
        };
        let dt = if self.adaptive {
            self.dt * scale.powf(self.model.alpha())
        } else {
            self.dt
        };
        let band = self.band * scale;
        let x0 = self.x;
        let x1 = x0 + scale * self.root_dt * self.sampler.draw(&mut self.rng);
        let exposure = trapezoid_clock(self.model, band, x0, x1, dt);
        self.t += dt;
        self.x = x1;
        if (-band < x0 && x0 < 0.0) && (-band < x1 && x1 < 0.0) {
            self.trapped_steps += 1;
        } else {
            self.trapped_steps = 0;
        }
        if exposure > 0.0 {
            self.clock += exposure;
            if self.trapped_steps > 1 || self.rng.gen::<f64>() > (-exposure).exp() {
                self.alive = false;
                self.kill_time = Some(self.t);
            }
        }
        self.alive
    }
}

/// Simulate one full trajectory (stream 0 of the seed) and return it.
/// Ensemble estimators do not materialize trajectories; this entry point
/// serves dumps and diagnostics.
pub fn simulate_omega_killed_path(
    config: &PathConfig,
    model: &StableModel,
    x0: f64,
) -> PathSample {
    sample_path_with_index(config, model, x0, 0)
}

fn sample_path_with_index(
    config: &PathConfig,
    model: &StableModel,
    x0: f64,
    path_index: u64,
) -> PathSample {
    let mut stepper = Stepper::new(model, config, x0, path_index, false);
    let mut times = vec![0.0];
    let mut states = vec![x0];
    let mut clock_value = vec![0.0];
    while stepper.alive && stepper.t < config.horizon - 0.5 * config.dt {
        stepper.step();
        times.push(stepper.t);
        states.push(stepper.x);
        clock_value.push(stepper.clock);
    }
    PathSample {
        times,
        states,
        clock_value,
        killed: !stepper.alive,
        kill_time: stepper.kill_time,
    }
}

/// Dump `config.n_paths` trajectories as CSV rows
/// `path_id,t,x,a,alive`, one row per step.
pub fn write_paths_csv<W: Write>(
    out: &mut W,
    config: &PathConfig,
    model: &StableModel,
    x0: f64,
) -> std::io::Result<()> {
    writeln!(out, "path_id,t,x,a,alive")?;
    for pid in 0..config.n_paths {
        let path = sample_path_with_index(config, model, x0, pid as u64);
        let last = path.times.len() - 1;
        for i in 0..=last {
            let alive = !(path.killed && i == last);
            writeln!(
                out,
                "{},{},{},{},{}",
                pid, path.times[i], path.states[i], path.clock_value[i], alive
            )?;
        }
    }
    Ok(())
}

/// Deterministic ensemble runner: paths are distributed over the rayon
/// pool, results land in path order, and the reduction below is a
/// sequential compensated sum, so reports are bit-identical regardless
/// of the worker count.
fn run_ensemble<T, F>(config: &PathConfig, per_path: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..config.n_paths as u64)
        .into_par_iter()
        .map(per_path)
        .collect()
}

fn kahan_sum<I: Iterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

fn report_from_values(
    values: &[f64],
    config: &PathConfig,
    bias_notes: Vec<String>,
) -> PathEnsembleReport {
    let n = values.len();
    let estimate = if n > 0 {
        kahan_sum(values.iter().copied()) / n as f64
    } else {
        f64::NAN
    };
    let std_error = if n > 1 {
        let ss = kahan_sum(values.iter().map(|v| (v - estimate) * (v - estimate)));
        (ss / (n - 1) as f64 / n as f64).sqrt()
    } else {
        f64::NAN
    };
    PathEnsembleReport {
        estimate,
        std_error,
        n_effective: n,
        config: *config,
        bias_notes,
    }
}

/// Fraction of first negative excursions from x0 = 1 that end in a kill
/// rather than a return to [0, infinity). The per-excursion kill
/// probability is scale-free, so the entry law does not matter; paths
/// whose excursion has not started or not resolved by the horizon are
/// excluded and counted in the bias notes.
pub fn estimate_killing_probability(
    config: &PathConfig,
    model: &StableModel,
) -> Result<PathEnsembleReport> {
    if model.k() <= 0.0 {
        return Err(Error::InvalidInput(
            "killing-probability estimation needs k > 0".into(),
        ));
    }
    let outcomes = run_ensemble(config, |pid| {
        let mut s = Stepper::new(model, config, 1.0, pid, false);
        // Phase 1: wait for the first entry into the negative half-line.
        while s.x >= 0.0 {
            if s.t >= config.horizon || !s.step() {
                return None; // horizon, or a kill cannot happen while x >= 0
            }
        }
        // Phase 2: resolve the excursion - killed, or back above zero.
        loop {
            if !s.alive {
                return Some(1.0);
            }
            if s.x >= 0.0 {
                return Some(0.0);
            }
            if s.t >= config.horizon {
                return None;
            }
            s.step();
        }
    });
    let unresolved = outcomes.iter().filter(|o| o.is_none()).count();
    let values: Vec<f64> = outcomes.into_iter().flatten().collect();
    let mut notes = Vec::new();
    if unresolved > 0 {
        notes.push(format!(
            "{unresolved} of {} paths had no resolved negative excursion within horizon {} (excluded)",
            config.n_paths, config.horizon
        ));
    }
    Ok(report_from_values(&values, config, notes))
}

/// Mean of g(X_tau) 1{tau < kill} under the first-passage policy given
/// by (threshold, direction), started from x0. Paths killed first score
/// zero. Paths still running at the horizon score zero as well - a
/// downward bias noted in the report - unless a `residual` closure is
/// supplied, in which case they score residual(state at horizon); pass
/// the exact continuation value there to remove the horizon bias.
pub fn estimate_policy_value(
    config: &PathConfig,
    model: &StableModel,
    gain: GainSpec,
    threshold: f64,
    direction: CrossDirection,
    x0: f64,
    residual: Option<&(dyn Fn(f64) -> f64 + Sync)>,
) -> Result<PathEnsembleReport> {
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(Error::InvalidInput(format!(
            "policy threshold must be positive, got {threshold}"
        )));
    }
    if !x0.is_finite() {
        return Err(Error::InvalidInput(format!(
            "starting state must be finite, got {x0}"
        )));
    }
    let crossed = |x: f64| match direction {
        CrossDirection::UpCross => x >= threshold,
        CrossDirection::DownEntry => 0.0 < x && x <= threshold,
    };
    // status: 0 stopped, 1 killed, 2 censored at horizon
    let outcomes: Vec<(f64, u8)> = run_ensemble(config, |pid| {
        if crossed(x0) {
            return (gain.payoff(x0), 0);
        }
        let mut s = Stepper::new(model, config, x0, pid, false);
        loop {
            if !s.step() {
                return (0.0, 1);
            }
            if crossed(s.x) {
                return (gain.payoff(s.x), 0);
            }
            if s.t >= config.horizon {
                return match residual {
                    Some(f) => (f(s.x), 2),
                    None => (0.0, 2),
                };
            }
        }
    });
    let values: Vec<f64> = outcomes.iter().map(|(v, _)| *v).collect();
    let killed = outcomes.iter().filter(|(_, s)| *s == 1).count();
    let censored = outcomes.iter().filter(|(_, s)| *s == 2).count();
    let mut notes = vec![format!("{killed} of {} paths killed before stopping", config.n_paths)];
    if censored > 0 {
        notes.push(match residual {
            Some(_) => format!(
                "{censored} paths censored at horizon {} scored their closed-form residual value",
                config.horizon
            ),
            None => format!(
                "{censored} paths censored at horizon {} scored 0 (estimate biased downward)",
                config.horizon
            ),
        });
    }
    Ok(report_from_values(&values, config, notes))
}

/// Mean of (sup of the positive part of the path over its lifetime,
/// truncated at the horizon)^r from x0 = 1. Stepping is scale-adaptive:
/// the supremum law has a heavy delta-index tail, so the fixed-step
/// scheme could never reach the scales that carry its mean; the adaptive
/// scheme is exact in law by the scaling property. Finite only for
/// 0 < r < delta, which is enforced.
pub fn estimate_sup_moment(
    config: &PathConfig,
    model: &StableModel,
    r: f64,
) -> Result<PathEnsembleReport> {
    let d = model.delta();
    if !r.is_finite() || r <= 0.0 || r >= d {
        return Err(Error::Domain(format!(
            "supremum moment of order {r} is finite only for r in (0, {d})"
        )));
    }
    // status flag: true when the path was still alive at the horizon
    let outcomes: Vec<(f64, bool)> = run_ensemble(config, |pid| {
        let mut s = Stepper::new(model, config, 1.0, pid, true);
        let mut sup = 1.0f64;
        loop {
            if !s.step() {
                return (sup.powf(r), false);
            }
            sup = sup.max(s.x);
            if s.t >= config.horizon {
                return (sup.powf(r), true);
            }
        }
    });
    let values: Vec<f64> = outcomes.iter().map(|(v, _)| *v).collect();
    let censored = outcomes.iter().filter(|(_, c)| *c).count();
    let mut notes = Vec::new();
    if censored > 0 {
        notes.push(format!(
            "{censored} of {} paths alive at horizon {}; their running supremum was used (downward bias)",
            config.n_paths, config.horizon
        ));
    }
    Ok(report_from_values(&values, config, notes))
}

/// Mean of g(X_t) 1{t < kill} at each requested time, over one common
/// set of paths (so estimates across times share random numbers). Times
/// must be positive, nondecreasing, and within the horizon; each is read
/// at the first step boundary at or past it.
pub fn estimate_fixed_time_values(
    config: &PathConfig,
    model: &StableModel,
    gain: GainSpec,
    times: &[f64],
    x0: f64,
) -> Result<Vec<PathEnsembleReport>> {
    if times.is_empty() {
        return Err(Error::InvalidInput("no evaluation times given".into()));
    }
    if times.windows(2).any(|w| w[0] > w[1]) || times[0] <= 0.0 {
        return Err(Error::InvalidInput(
            "evaluation times must be positive and nondecreasing".into(),
        ));
    }
    let t_max = *times.last().unwrap();
    if t_max > config.horizon {
        return Err(Error::InvalidInput(format!(
            "last evaluation time {t_max} exceeds horizon {}",
            config.horizon
        )));
    }
    let per_path: Vec<Vec<f64>> = run_ensemble(config, |pid| {
        let mut s = Stepper::new(model, config, x0, pid, false);
        let mut snapshots = Vec::with_capacity(times.len());
        let mut next = 0;
        while next < times.len() {
            if s.t >= times[next] {
                snapshots.push(gain.payoff(s.x));
                next += 1;
                continue;
            }
            if !s.step() {
                // killed: zero from here on
                snapshots.resize(times.len(), 0.0);
                break;
            }
        }
        snapshots
    });
    Ok((0..times.len())
        .map(|i| {
            let values: Vec<f64> = per_path.iter().map(|p| p[i]).collect();
            report_from_values(&values, config, Vec::new())
        })
        .collect())
}
