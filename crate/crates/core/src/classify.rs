//! Where an index value sits relative to the Jones discrete series
//! `{4cos²(π/k) : k ≥ 3}` and the continuous range `[4, ∞)`.

use std::f64::consts::PI;

use serde::Serialize;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const K_MAX: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "k")]
pub enum IndexClass {
    JonesDiscrete(u64),
    ContinuousRange,
    BelowOneInvalid,
    GapForbidden,
}

/// `4cos²(π/k)`.
pub fn jones_value(k: u64) -> f64 {
    4.0 * (PI / k as f64).cos().powi(2)
}

/// Classifies a candidate index `c`.
///
/// Anything at or above `4 − tol` is reported as `ContinuousRange`, so the
/// tail of the discrete series within `tol` of 4 is absorbed there.
pub fn classify_index(c: f64, tol: f64) -> IndexClass {
    if c < 1.0 - tol {
        return IndexClass::BelowOneInvalid;
    }
    if c >= 4.0 - tol {
        return IndexClass::ContinuousRange;
    }
    // The series increases with k, so matching k form a contiguous run.
    // Start just below the real solution of 4cos²(π/k) = c − tol and walk up.
    let lower = (c - tol).clamp(1.0, 4.0);
    let k_real = PI / (lower.sqrt() / 2.0).clamp(0.0, 1.0).acos();
    let mut k = (k_real.floor() as u64).saturating_sub(1).max(3);
    while k <= K_MAX {
        let v = jones_value(k);
        if v > c + tol {
            break;
        }
        if v >= c - tol {
            return IndexClass::JonesDiscrete(k);
        }
        k += 1;
    }
    IndexClass::GapForbidden
}
