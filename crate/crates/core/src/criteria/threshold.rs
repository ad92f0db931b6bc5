use crate::error::{Error, Result};

/// `(1 − q)(γ + s) − C_q`, the lower end of the region that may contain
/// essential spectrum when `1_{V₊ ≤ s}` is relatively compact.
pub fn thm_main1_threshold(q: f64, c_q: f64, gamma: f64, s: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::KlmnViolation { q, c: c_q });
    }
    Ok((1.0 - q) * (gamma + s) - c_q)
}
