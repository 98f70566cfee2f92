//! Self-contained special functions and quadrature used by the model layer.

pub mod gamma;
pub mod hyp2f1;
pub mod quad;

pub use gamma::{cos_pi, gamma as real_gamma, is_near_pole, lgamma_sign, log_gamma, sin_pi, POLE_TOL};
pub use hyp2f1::{hyp2f1, hyp2f1_with_complement};
pub use quad::{integrate_01, integrate_semi_infinite, QuadratureResult};
