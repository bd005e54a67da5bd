use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this |q| the fourth-order boundary series are no longer trustworthy.
pub const SERIES_VALIDITY_Q: f64 = 0.9;

/// Mathieu q from a pseudopotential-only secular frequency: q = 2√2·ω/Ω.
pub fn mathieu_q(omega_pseudo_only: f64, omega_rf: f64) -> Result<f64> {
    if !(omega_rf > 0.0) || !omega_rf.is_finite() {
        return Err(Error::Domain("RF drive frequency must be positive".into()));
    }
    if !(omega_pseudo_only >= 0.0) || !omega_pseudo_only.is_finite() {
        return Err(Error::Domain("secular frequency must be non-negative".into()));
    }
    Ok(2.0 * std::f64::consts::SQRT_2 * omega_pseudo_only / omega_rf)
}

/// Mathieu a from the full secular frequency: a = (2ω/Ω)² − q²/2.
pub fn mathieu_a(omega_secular: f64, q: f64, omega_rf: f64) -> f64 {
    let r = 2.0 * omega_secular / omega_rf;
    r * r - q * q / 2.0
}

/// Lower boundary a₀(q) of the first stability region (series to q⁴).
pub fn boundary_a0(q: f64) -> f64 {
    let q2 = q * q;
    -q2 / 2.0 + 7.0 * q2 * q2 / 128.0
}

/// Upper boundary b₁(q) of the first stability region (series to q⁴).
pub fn boundary_b1(q: f64) -> f64 {
    let q = q.abs();
    let q2 = q * q;
    1.0 - q - q2 / 8.0 + q2 * q / 64.0 - q2 * q2 / 1536.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub stable: bool,
    /// Signed distance in a at fixed q to the nearest relevant boundary:
    /// `b₁ − a` while a ≥ a₀ (so 1 at the origin), `a − a₀` (negative) below.
    pub margin: f64,
    pub margin_to_upper: f64,
    pub margin_to_lower: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Is (a, q) inside the first (lowest) stability region?
pub fn stability_check(a: f64, q: f64) -> Stability {
    let (lo, hi) = (boundary_a0(q), boundary_b1(q));
    let margin_to_upper = hi - a;
    let margin_to_lower = a - lo;
    let margin = if a >= lo { margin_to_upper } else { margin_to_lower };
    let warning = (q.abs() >= SERIES_VALIDITY_Q).then(|| {
        format!("|q| = {:.3} is outside the validity of the q^4 boundary series (|q| < {SERIES_VALIDITY_Q})", q.abs())
    });
    Stability { stable: a >= lo && a <= hi, margin, margin_to_upper, margin_to_lower, warning }
}
