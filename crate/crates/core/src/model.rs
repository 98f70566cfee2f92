//! Model inputs and the handful of constants everything else is built
//! from: the two-sided jump intensities, the killing weight p, the
//! factorization exponent delta, and the effective discount rate q.

use crate::error::{Error, Result};
use crate::numerics::{cos_pi, lgamma_sign, real_gamma, sin_pi};

/// Stability index alpha and positivity parameter rho = P(X_1 > 0) of a
/// strictly stable process, restricted to the two-sided-jump window where
/// both tails are active and first passage happens by a jump:
/// alpha in (0,1) with rho in (0,1), alpha in (1,2) with rho in
/// (1 - 1/alpha, 1/alpha), or the Cauchy point (1, 1/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    alpha: f64,
    rho: f64,
}

impl StableParams {
    pub fn new(alpha: f64, rho: f64) -> Result<Self> {
        if !alpha.is_finite() || !rho.is_finite() {
            return Err(Error::Inadmissible {
                alpha,
                rho,
                detail: "parameters must be finite".into(),
            });
        }
        let detail = if alpha <= 0.0 || alpha >= 2.0 {
            Some("alpha must lie in (0, 2)".to_string())
        } else if alpha < 1.0 {
            (rho <= 0.0 || rho >= 1.0).then(|| "rho must lie in (0, 1) for alpha < 1".to_string())
        } else if alpha == 1.0 {
            (rho != 0.5).then(|| "alpha = 1 is admissible only with rho = 1/2".to_string())
        } else {
            let (lo, hi) = (1.0 - 1.0 / alpha, 1.0 / alpha);
            (rho <= lo || rho >= hi).then(|| {
                format!("rho must lie in (1 - 1/alpha, 1/alpha) = ({lo}, {hi}) for alpha = {alpha}")
            })
        };
        match detail {
            Some(detail) => Err(Error::Inadmissible { alpha, rho, detail }),
            None => Ok(Self { alpha, rho }),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Negativity parameter rho-hat = P(X_1 < 0) = 1 - rho.
    pub fn rho_hat(&self) -> f64 {
        1.0 - self.rho
    }
}

/// State-dependent killing clock: below zero the process dies at rate
/// k (-x)^{-alpha}, which blows up on approach to the boundary; above zero
/// it is immortal. k carries units of rate x length^alpha.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaClock {
    k: f64,
}

impl OmegaClock {
    pub fn new(k: f64) -> Result<Self> {
        if !k.is_finite() || k < 0.0 {
            return Err(Error::InvalidInput(format!(
                "killing coefficient k must be finite and nonnegative, got {k}"
            )));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

/// Instantaneous killing rate at state x: k (-x)^{-alpha} below zero, 0 at
/// and above zero. Diverges as x approaches 0 from below.
pub fn omega_rate(x: f64, clock: OmegaClock, params: StableParams) -> f64 {
    if x < 0.0 {
        clock.k() * (-x).powf(-params.alpha())
    } else {
        0.0
    }
}

/// Factorization exponent delta = (alpha - arccos(p cos(pi(ar - ar-hat)) +
/// (1-p) cos(pi alpha)) / pi) / 2 for a killing weight p in [0, 1].
///
/// The arccos argument is clamped when it spills out of [-1, 1] by at most
/// 1e-14; a larger excursion means the inputs are inconsistent and is
/// reported as a numeric error.
pub fn compute_delta(params: StableParams, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!(
            "killing weight p must lie in [0, 1], got {p}"
        )));
    }
    let alpha = params.alpha();
    if p == 0.0 {
        return Ok((alpha - 1.0).max(0.0));
    }
    let spread = alpha * params.rho() - alpha * params.rho_hat();
    let blend = p * cos_pi(spread) + (1.0 - p) * cos_pi(alpha);
    if blend.abs() > 1.0 + 1e-14 {
        return Err(Error::NonConvergence {
            context: "delta arccos argument",
            detail: format!("blend {blend} left [-1, 1] beyond the roundoff band"),
        });
    }
    Ok(0.5 * (alpha - blend.clamp(-1.0, 1.0).acos() / std::f64::consts::PI))
}

/// Absolute residual of the defining identity for delta,
/// |(1-p) sin(pi ar) sin(pi ar-hat) - sin(pi(ar-d)) sin(pi(ar-hat-d))|,
/// evaluated at an arbitrary candidate exponent d.
pub fn delta_identity_residual(params: StableParams, p: f64, d: f64) -> f64 {
    let ar = params.alpha() * params.rho();
    let arh = params.alpha() * params.rho_hat();
    ((1.0 - p) * sin_pi(ar) * sin_pi(arh) - sin_pi(ar - d) * sin_pi(arh - d)).abs()
}

/// Simplified exponent formula valid in the symmetric case rho = 1/2:
/// alpha/2 - asin(sqrt(1-p) sin(pi alpha/2)) / pi.
pub fn symmetric_delta(alpha: f64, p: f64) -> f64 {
    let s = ((1.0 - p).sqrt() * sin_pi(alpha / 2.0)).clamp(-1.0, 1.0);
    alpha / 2.0 - s.asin() / std::f64::consts::PI
}

/// Payoff specification g(x) = (x^r - K)+ on x >= 0: exponent r != 0 and
/// strike K > 0. Positive r rewards large states (call flavor); negative r
/// rewards small positive states (put flavor).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSpec {
    r: f64,
    strike: f64,
}

impl GainSpec {
    pub fn new(r: f64, strike: f64) -> Result<Self> {
        if !r.is_finite() || r == 0.0 {
            return Err(Error::InvalidInput(format!(
                "payoff exponent r must be finite and nonzero, got {r}"
            )));
        }
        if !strike.is_finite() || strike <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "strike K must be finite and positive, got {strike}"
            )));
        }
        Ok(Self { r, strike })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    /// Gain collected on exercise at state x: (x^r - K)+ for x >= 0, zero
    /// below zero where the claim cannot be exercised.
    pub fn payoff(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        (x.powf(self.r) - self.strike).max(0.0)
    }
}

/// A stable process together with its killing clock and every derived
/// constant used downstream. Construction is the only place these are
/// computed; the accessors are plain reads.
#[derive(Debug, Clone, Copy)]
pub struct StableModel {
    params: StableParams,
    clock: OmegaClock,
    c_plus: f64,
    c_minus: f64,
    p: f64,
    delta: f64,
    q: f64,
}

impl StableModel {
    pub fn new(params: StableParams, clock: OmegaClock) -> Result<Self> {
        let alpha = params.alpha();
        let rho = params.rho();
        let rho_hat = params.rho_hat();
        let k = clock.k();

        // Jump intensities of the Levy measure, c+- = Gamma(alpha+1)
        // sin(pi alpha rho+-) / pi.
        let gamma_a1 = real_gamma(alpha + 1.0)?;
        let c_plus = gamma_a1 * sin_pi(alpha * rho) / std::f64::consts::PI;
        let c_minus = gamma_a1 * sin_pi(alpha * rho_hat) / std::f64::consts::PI;

        // Probability that a single negative excursion gets killed; k = 0
        // maps to p = 0 exactly, which compute_delta snaps to the
        // boundary value max(0, alpha-1).
        let p = if k == 0.0 { 0.0 } else { k / (c_plus / alpha + k) };
        let delta = compute_delta(params, p)?;

        // Effective discount rate generated by the clock.
        let q = c_minus / alpha * p;

        Ok(Self {
            params,
            clock,
            c_plus,
            c_minus,
            p,
            delta,
            q,
        })
    }

    pub fn params(&self) -> StableParams {
        self.params
    }

    pub fn clock(&self) -> OmegaClock {
        self.clock
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha()
    }

    pub fn rho(&self) -> f64 {
        self.params.rho()
    }

    pub fn rho_hat(&self) -> f64 {
        self.params.rho_hat()
    }

    pub fn k(&self) -> f64 {
        self.clock.k()
    }

    pub fn c_plus(&self) -> f64 {
        self.c_plus
    }

    pub fn c_minus(&self) -> f64 {
        self.c_minus
    }

    /// Probability that one excursion below zero is killed by the clock.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Factorization exponent delta in [max(0, alpha-1), min(alpha rho,
    /// alpha rho-hat)), nondecreasing in the killing rate.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Effective discount rate q = (c-/alpha) p.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Killing rate at state x: k (-x)^{-alpha} below zero, 0 above.
    pub fn omega_rate(&self, x: f64) -> f64 {
        omega_rate(x, self.clock, self.params)
    }

    /// The same q through the gamma-product route
    /// Gamma(ar) Gamma(a) Gamma(1-ar) /
    /// (Gamma(d) Gamma(a-d) Gamma(d+1-a) Gamma(1-d)),
    /// which degenerates to 0 through a denominator pole when delta sits at
    /// either end of its range.
    pub fn q_gamma_form(&self) -> Result<f64> {
        let a = self.alpha();
        let ar = a * self.rho();
        let d = self.delta;
        if d.abs() <= 1e-12 || (d + 1.0 - a).abs() <= 1e-12 {
            return Ok(0.0);
        }
        let mut lg = 0.0;
        for v in [ar, a, 1.0 - ar] {
            lg += lgamma_sign(v)?.0;
        }
        for v in [d, a - d, d + 1.0 - a, 1.0 - d] {
            lg -= lgamma_sign(v)?.0;
        }
        Ok(lg.exp())
    }

    /// Absolute residual of the defining identity at this model's delta;
    /// zero up to roundoff for a correctly computed exponent.
    pub fn delta_identity_residual(&self) -> f64 {
        delta_identity_residual(self.params, self.p, self.delta)
    }

    /// The symmetric-case shortcut for delta, available when rho = 1/2.
    pub fn symmetric_delta(&self) -> Option<f64> {
        (self.rho() == 0.5).then(|| symmetric_delta(self.alpha(), self.p))
    }
}

/// Proptest strategy over the full admissible parameter set, shared by the
/// property suites of the dependent modules.
#[cfg(test)]
pub(crate) fn arb_admissible() -> impl proptest::strategy::Strategy<Value = StableParams> {
    use proptest::prelude::*;
    prop_oneof![
        (0.2f64..0.99, 0.15f64..0.85)
            .prop_map(|(alpha, rho)| StableParams::new(alpha, rho).unwrap()),
        (1.01f64..1.95, 0.05f64..0.95).prop_map(|(alpha, t)| {
            let lo = 1.0 - 1.0 / alpha;
            let hi = 1.0 / alpha;
            StableParams::new(alpha, lo + t * (hi - lo)).unwrap()
        }),
    ]
}
