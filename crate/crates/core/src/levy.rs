//! Characteristic exponent of the killed process and its Wiener-Hopf
//! factors.
//!
//! Two independent routes to the exponent are kept side by side: the
//! structural one assembled from the free exponent plus the
//! compound-Poisson correction generated by the clock, and the closed
//! gamma-product form built on the exponent delta. Their agreement across
//! theta is one of the main correctness gates for the whole model layer.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::StableModel;
use crate::numerics::{is_near_pole, lgamma_sign, log_gamma};

/// Distance to a gamma pole below which a factor argument is considered to
/// sit on it: numerator hits are errors, denominator hits force the ratio
/// to zero.
const NEAR_POLE_TOL: f64 = 1e-8;

fn gamma_ratio(num: &[Complex64], den: &[Complex64]) -> Result<Complex64> {
    for &z in num {
        if is_near_pole(z, NEAR_POLE_TOL) {
            return Err(Error::GammaPole { re: z.re, im: z.im });
        }
    }
    for &z in den {
        if is_near_pole(z, NEAR_POLE_TOL) {
            return Ok(Complex64::new(0.0, 0.0));
        }
    }
    let mut lg = Complex64::new(0.0, 0.0);
    for &z in num {
        lg += log_gamma(z)?;
    }
    for &z in den {
        lg -= log_gamma(z)?;
    }
    Ok(lg.exp())
}

fn gamma_ratio_real(num: &[f64], den: &[f64]) -> Result<f64> {
    for &x in num {
        if is_near_pole(Complex64::new(x, 0.0), NEAR_POLE_TOL) {
            return Err(Error::GammaPole { re: x, im: 0.0 });
        }
    }
    for &x in den {
        if is_near_pole(Complex64::new(x, 0.0), NEAR_POLE_TOL) {
            return Ok(0.0);
        }
    }
    let mut lg = 0.0;
    let mut sign = 1.0;
    for &x in num {
        let (l, s) = lgamma_sign(x)?;
        lg += l;
        sign *= s;
    }
    for &x in den {
        let (l, s) = lgamma_sign(x)?;
        lg -= l;
        sign *= s;
    }
    Ok(sign * lg.exp())
}

fn check_theta(theta: Complex64) -> Result<()> {
    if !theta.re.is_finite() || !theta.im.is_finite() {
        return Err(Error::InvalidInput(format!(
            "exponent argument must be finite, got {theta}"
        )));
    }
    Ok(())
}

/// Laplace-type exponent of the free process shifted so that the clock's
/// discounting appears as a plain constant: at theta = 0 it equals
/// c-/alpha.
pub fn psi_star(m: &StableModel, theta: Complex64) -> Result<Complex64> {
    check_theta(theta)?;
    let a = m.alpha();
    let arh = a * m.rho_hat();
    let it = Complex64::new(0.0, 1.0) * theta;
    gamma_ratio(
        &[Complex64::new(a, 0.0) - it, Complex64::new(1.0, 0.0) + it],
        &[Complex64::new(arh, 0.0) - it, Complex64::new(1.0 - arh, 0.0) + it],
    )
}

/// Exponent of the compound-Poisson component the clock injects: zero at
/// theta = 0 and bounded by c-/alpha in modulus.
pub fn psi_compound_poisson(m: &StableModel, theta: Complex64) -> Result<Complex64> {
    check_theta(theta)?;
    let a = m.alpha();
    let ar = a * m.rho();
    let it = Complex64::new(0.0, 1.0) * theta;
    let ratio = gamma_ratio(
        &[
            Complex64::new(1.0 - ar, 0.0) + it,
            Complex64::new(ar, 0.0) - it,
            Complex64::new(1.0, 0.0) + it,
            Complex64::new(a, 0.0) - it,
        ],
        &[
            Complex64::new(ar, 0.0),
            Complex64::new(1.0 - ar, 0.0),
            Complex64::new(a, 0.0),
        ],
    )?;
    Ok(m.c_minus() / a * (Complex64::new(1.0, 0.0) - ratio))
}

/// Exponent of the killed process assembled from its structural pieces:
/// psi* + (1-p) psi_cpp - (1-p) c-/alpha. Equals q at theta = 0.
pub fn psi_structural(m: &StableModel, theta: Complex64) -> Result<Complex64> {
    let base = psi_star(m, theta)?;
    let cpp = psi_compound_poisson(m, theta)?;
    let omp = 1.0 - m.p();
    Ok(base + omp * cpp - omp * m.c_minus() / m.alpha())
}

/// Exponent of the killed process in closed gamma-product form, the one
/// which factorizes termwise into [`wh_plus`] and [`wh_minus`].
pub fn psi(m: &StableModel, theta: Complex64) -> Result<Complex64> {
    check_theta(theta)?;
    let a = m.alpha();
    let ar = a * m.rho();
    let d = m.delta();
    let it = Complex64::new(0.0, 1.0) * theta;
    gamma_ratio(
        &[
            Complex64::new(a, 0.0) - it,
            Complex64::new(ar, 0.0) - it,
            Complex64::new(1.0, 0.0) + it,
            Complex64::new(1.0 - ar, 0.0) + it,
        ],
        &[
            Complex64::new(a - d, 0.0) - it,
            Complex64::new(d, 0.0) - it,
            Complex64::new(d + 1.0 - a, 0.0) + it,
            Complex64::new(1.0 - d, 0.0) + it,
        ],
    )
}

/// Ascending Wiener-Hopf factor kappa(z) = Gamma(ar+z) Gamma(a+z) /
/// (Gamma(d+z) Gamma(a-d+z)), defined for z > -alpha rho. Vanishes at
/// z = -delta through the denominator pole.
pub fn wh_plus(m: &StableModel, z: f64) -> Result<f64> {
    let a = m.alpha();
    let ar = a * m.rho();
    let d = m.delta();
    if !z.is_finite() || z <= -ar {
        return Err(Error::Domain(format!(
            "ascending factor needs z > {}, got {z}",
            -ar
        )));
    }
    gamma_ratio_real(&[ar + z, a + z], &[d + z, a - d + z])
}

/// Descending Wiener-Hopf factor kappa-hat(z) = Gamma(1-ar+z) Gamma(1+z) /
/// (Gamma(d+1-a+z) Gamma(1-d+z)), defined for z > alpha rho - 1. Vanishes
/// at z = -(d+1-a) through the denominator pole.
pub fn wh_minus(m: &StableModel, z: f64) -> Result<f64> {
    let a = m.alpha();
    let ar = a * m.rho();
    let d = m.delta();
    if !z.is_finite() || z <= ar - 1.0 {
        return Err(Error::Domain(format!(
            "descending factor needs z > {}, got {z}",
            ar - 1.0
        )));
    }
    gamma_ratio_real(&[1.0 - ar + z, 1.0 + z], &[d + 1.0 - a + z, 1.0 - d + z])
}

/// [`wh_plus`] continued to complex arguments (used on the line z = -i
/// theta when checking the factorization).
pub fn wh_plus_complex(m: &StableModel, z: Complex64) -> Result<Complex64> {
    let a = m.alpha();
    let ar = a * m.rho();
    let d = m.delta();
    gamma_ratio(
        &[Complex64::new(ar, 0.0) + z, Complex64::new(a, 0.0) + z],
        &[Complex64::new(d, 0.0) + z, Complex64::new(a - d, 0.0) + z],
    )
}

/// [`wh_minus`] continued to complex arguments.
pub fn wh_minus_complex(m: &StableModel, z: Complex64) -> Result<Complex64> {
    let a = m.alpha();
    let ar = a * m.rho();
    let d = m.delta();
    gamma_ratio(
        &[
            Complex64::new(1.0 - ar, 0.0) + z,
            Complex64::new(1.0, 0.0) + z,
        ],
        &[
            Complex64::new(d + 1.0 - a, 0.0) + z,
            Complex64::new(1.0 - d, 0.0) + z,
        ],
    )
}

/// Normalized factorization defect
/// |psi_structural(theta) - kappa(-i theta) kappa-hat(i theta)| /
/// (1 + |psi(theta)|). The two sides share no code path beyond log-gamma.
pub fn factorization_residual(m: &StableModel, theta: f64) -> Result<f64> {
    let it = Complex64::new(0.0, theta);
    let lhs = psi_structural(m, Complex64::new(theta, 0.0))?;
    let rhs = wh_plus_complex(m, -it)? * wh_minus_complex(m, it)?;
    Ok((lhs - rhs).norm() / (1.0 + rhs.norm()))
}
