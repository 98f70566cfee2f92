//! Gauss hypergeometric function 2F1(a, b; c; x) for real parameters and
//! real argument x in (-1, 1].
//!
//! Strategy: the defining power series for x <= 0.5 (it terminates on its
//! own when a or b is a nonpositive integer), and the linear connection
//! formula in 1 - x for x in (0.5, 1), which is where the renewal densities
//! evaluate it. When c - a - b sits close to an integer the connection
//! coefficients blow up, so we fall back to the plain series with a large
//! term budget instead of juggling the logarithmic limit expansion.

use crate::error::{Error, Result};
use crate::numerics::gamma::{is_near_pole, lgamma_sign, POLE_TOL};
use num_complex::Complex64;

/// Hard cap on series terms before reporting non-convergence.
const MAX_TERMS: u64 = 5_000_000;

/// Distance of c - a - b to the nearest integer below which the 1 - x
/// connection formula is considered ill-conditioned.
const CONNECTION_GAP: f64 = 0.05;

/// 2F1(a, b; c; x) for x in (-1, 1]. See [`hyp2f1_with_complement`] for the
/// variant that takes a stably computed 1 - x.
pub fn hyp2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    hyp2f1_with_complement(a, b, c, x, 1.0 - x)
}

/// 2F1(a, b; c; x) with the complement 1 - x supplied by the caller.
///
/// For arguments of the form x = 1 - e^{-t} the complement e^{-t} is exact
/// while 1.0 - x loses all precision once t exceeds ~36; the connection
/// formula needs the complement, not x itself, so accepting both keeps the
/// far tail of the renewal densities meaningful.
pub fn hyp2f1_with_complement(a: f64, b: f64, c: f64, x: f64, one_minus_x: f64) -> Result<f64> {
    for (name, v) in [("a", a), ("b", b), ("c", c), ("x", x)] {
        if !v.is_finite() {
            return Err(Error::InvalidInput(format!(
                "hyp2f1 parameter {name} must be finite, got {v}"
            )));
        }
    }
    if x <= -1.0 || one_minus_x < 0.0 {
        return Err(Error::Domain(format!(
            "hyp2f1 argument must lie in (-1, 1], got {x}"
        )));
    }
    if is_near_pole(Complex64::new(c, 0.0), POLE_TOL) && !terminates_before(a, b, c) {
        return Err(Error::GammaPole { re: c, im: 0.0 });
    }
    if one_minus_x == 0.0 {
        return gauss_limit(a, b, c);
    }
    if x <= 0.5 {
        return series(a, b, c, x);
    }
    let s = c - a - b;
    if (s - s.round()).abs() < CONNECTION_GAP {
        return series(a, b, c, x);
    }
    connection(a, b, c, one_minus_x, s)
}

/// 2F1(a, b; c; 1) = Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b)),
/// finite only when c - a - b > 0.
fn gauss_limit(a: f64, b: f64, c: f64) -> Result<f64> {
    let s = c - a - b;
    if s <= 0.0 {
        return Err(Error::Domain(format!(
            "hyp2f1 diverges at x = 1 when c - a - b = {s} <= 0"
        )));
    }
    let (lc, sc) = lgamma_sign(c)?;
    let (ls, ss) = lgamma_sign(s)?;
    let (lca, sca) = lgamma_sign(c - a)?;
    let (lcb, scb) = lgamma_sign(c - b)?;
    Ok(sc * ss * sca * scb * (lc + ls - lca - lcb).exp())
}

/// True when the series for (a, b, c) terminates at an index strictly below
/// the first index where c + n crosses a pole; only then is a nonpositive
/// integer c harmless.
fn terminates_before(a: f64, b: f64, c: f64) -> bool {
    let stop = |p: f64| {
        let n = -p;
        (p.round() - p).abs() <= POLE_TOL && n >= 0.0
    };
    let c_hit = -c.round();
    let term_at = [a, b]
        .into_iter()
        .filter(|&p| stop(p))
        .map(|p| -p.round())
        .fold(f64::INFINITY, f64::min);
    term_at < c_hit
}

/// Defining power series sum_n (a)_n (b)_n / ((c)_n n!) x^n.
fn series(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut small_streak = 0u32;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let cn = c + nf;
        if cn.abs() <= POLE_TOL {
            return Err(Error::GammaPole { re: c, im: 0.0 });
        }
        term *= (a + nf) * (b + nf) / (cn * (nf + 1.0)) * x;
        if term == 0.0 {
            return Ok(sum);
        }
        sum += term;
        if term.abs() <= f64::EPSILON * sum.abs().max(f64::MIN_POSITIVE) {
            small_streak += 1;
            if small_streak >= 2 {
                return Ok(sum);
            }
        } else {
            small_streak = 0;
        }
    }
    Err(Error::NonConvergence {
        context: "hyp2f1 series",
        detail: format!("a={a}, b={b}, c={c}, x={x}: {MAX_TERMS} terms exhausted"),
    })
}

/// Linear transformation to argument 1 - x:
/// F(a,b;c;x) = C1 F(a,b;a+b-c+1;1-x) + C2 (1-x)^s F(c-a,c-b;s+1;1-x)
/// with s = c-a-b. Valid when s is not an integer.
fn connection(a: f64, b: f64, c: f64, omx: f64, s: f64) -> Result<f64> {
    let coeff = |num: &[f64], den: &[f64]| -> Result<f64> {
        // A pole in a denominator gamma kills the whole coefficient.
        for &d in den {
            if is_near_pole(Complex64::new(d, 0.0), POLE_TOL) {
                return Ok(0.0);
            }
        }
        let mut lg = 0.0;
        let mut sign = 1.0;
        for &v in num {
            let (l, sg) = lgamma_sign(v)?;
            lg += l;
            sign *= sg;
        }
        for &v in den {
            let (l, sg) = lgamma_sign(v)?;
            lg -= l;
            sign *= sg;
        }
        Ok(sign * lg.exp())
    };

    let c1 = coeff(&[c, s], &[c - a, c - b])?;
    let c2 = coeff(&[c, -s], &[a, b])?;
    let mut total = 0.0;
    if c1 != 0.0 {
        total += c1 * series(a, b, a + b - c + 1.0, omx)?;
    }
    if c2 != 0.0 {
        total += c2 * (s * omx.ln()).exp() * series(c - a, c - b, s + 1.0, omx)?;
    }
    Ok(total)
}
