//! Tolerances, settings and small numeric helpers shared by the engine.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::Value;

/// Absolute tolerance for matrix identities (unitarity, modular relations).
pub const MATRIX_TOL: f64 = 1e-9;
/// Maximum distance from an integer before rounding is refused.
pub const ROUNDING_TOL: f64 = 1e-6;
/// Significant digits in rendered reports.
pub const REPORT_DIGITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Settings {
    /// Feeds every randomized internal (Burnside retries).
    pub seed: u64,
    pub matrix_tol: f64,
    pub rounding_tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { seed: 0, matrix_tol: MATRIX_TOL, rounding_tol: ROUNDING_TOL }
    }
}

pub type CMatrix = DMatrix<Complex64>;

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Nearest integer, provided `x` is within `tol` of it.
pub fn round_if_integral(x: f64, tol: f64) -> Option<i64> {
    let r = x.round();
    ((x - r).abs() <= tol).then_some(r as i64)
}

/// `x` rounded to [`REPORT_DIGITS`] significant digits, with values below
/// `1e-12` in magnitude flushed to zero.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x.abs() < 1e-12 {
        return if x.is_finite() { 0.0 } else { x };
    }
    let s = format!("{:.*e}", REPORT_DIGITS - 1, x);
    s.parse().unwrap_or(x)
}

pub fn real_json(x: f64) -> Value {
    serde_json::Number::from_f64(round_sig(x)).map(Value::Number).unwrap_or(Value::Null)
}

/// `[re, im]`
pub fn complex_json(z: Complex64) -> Value {
    Value::Array(vec![real_json(z.re), real_json(z.im)])
}
