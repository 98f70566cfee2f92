//! Tanh-sinh (double-exponential) quadrature on (0, 1), plus a
//! semi-infinite wrapper built on the same engine.
//!
//! Integrands receive both x and 1 - x, each computed stably from the node
//! parameter, so endpoint-singular factors like x^{a-1} (1-x)^{b-1} can be
//! evaluated without catastrophic cancellation near either end.

use crate::error::{Error, Result};

/// Converged (or best-effort) value of a quadrature together with its
/// internal error estimate and the number of integrand evaluations spent.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: u64,
}

/// Truncation point of the double-exponential node range; beyond |u| = 6
/// the distances to the endpoints underflow f64 entirely.
const U_MAX: f64 = 6.0;

/// Maximum number of grid halvings (final step 2^-12).
const MAX_LEVEL: u32 = 12;

struct Accum {
    sum: f64,
    comp: f64,
    evaluations: u64,
}

impl Accum {
    fn add(&mut self, v: f64) {
        // Kahan compensation: node weights span ~270 orders of magnitude.
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// One node: x = 1/(1+e^{-2s}), weight (pi/4) cosh(u) sech^2(s) with
/// s = (pi/2) sinh(u). sech is computed from e^{-|s|} to avoid overflow.
fn eval_node<F: Fn(f64, f64) -> f64>(f: &F, acc: &mut Accum, u: f64) -> Result<()> {
    let s = std::f64::consts::FRAC_PI_2 * u.sinh();
    let x = 1.0 / (1.0 + (-2.0 * s).exp());
    let omx = 1.0 / (1.0 + (2.0 * s).exp());
    if x == 0.0 || omx == 0.0 {
        return Ok(());
    }
    let sech = 2.0 * (-s.abs()).exp() / (1.0 + (-2.0 * s.abs()).exp());
    let w = std::f64::consts::FRAC_PI_4 * u.cosh() * sech * sech;
    let fv = f(x, omx);
    acc.evaluations += 1;
    let contribution = w * fv;
    if !contribution.is_finite() {
        return Err(Error::Domain(format!(
            "integrand produced a non-finite contribution at x = {x} (f = {fv})"
        )));
    }
    acc.add(contribution);
    Ok(())
}

/// Integrate f over (0, 1) to the requested tolerance, interpreted
/// relative to max(1, |I|). The integrand is called as f(x, 1 - x).
pub fn integrate_01<F: Fn(f64, f64) -> f64>(f: F, tol: f64) -> Result<QuadratureResult> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidInput(format!(
            "quadrature tolerance must be positive and finite, got {tol}"
        )));
    }
    let mut acc = Accum { sum: 0.0, comp: 0.0, evaluations: 0 };

    // Level 0: unit-step trapezoid over u in [-U_MAX, U_MAX].
    let mut n_steps = U_MAX as i64;
    for i in -n_steps..=n_steps {
        eval_node(&f, &mut acc, i as f64)?;
    }
    let mut h = 1.0;
    let mut prev = h * acc.sum;
    let mut best_err = f64::INFINITY;

    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        n_steps *= 2;
        // New nodes sit at odd multiples of the refined step; n_steps * h
        // stays pinned at U_MAX, so i < n_steps keeps u inside the range.
        let mut i = 1;
        while i < n_steps {
            let u = i as f64 * h;
            eval_node(&f, &mut acc, u)?;
            eval_node(&f, &mut acc, -u)?;
            i += 2;
        }
        let total = h * acc.sum;
        best_err = (total - prev).abs();
        if level >= 2 && best_err <= tol * total.abs().max(1.0) {
            return Ok(QuadratureResult {
                value: total,
                abs_error_estimate: best_err,
                evaluations: acc.evaluations,
            });
        }
        prev = total;
    }
    Err(Error::QuadratureBudget {
        best: prev,
        error_estimate: best_err,
        evaluations: acc.evaluations,
    })
}

/// Integrate f over (lower, infinity) via x = lower - ln(1 - t).
///
/// The integrand is called as f(x, e) where e = e^{-(x - lower)} is exact;
/// callers that need e^{-x} should form e^{-lower} * e rather than
/// exponentiating the (large) node x themselves.
pub fn integrate_semi_infinite<F: Fn(f64, f64) -> f64>(
    f: F,
    lower: f64,
    tol: f64,
) -> Result<QuadratureResult> {
    if !lower.is_finite() {
        return Err(Error::InvalidInput(format!(
            "semi-infinite lower bound must be finite, got {lower}"
        )));
    }
    integrate_01(
        |t, omt| {
            // ln(1 - t) from whichever of t, 1 - t is exact at this node.
            let log_omt = if omt <= 0.5 { omt.ln() } else { (-t).ln_1p() };
            f(lower - log_omt, omt) / omt
        },
        tol,
    )
}
