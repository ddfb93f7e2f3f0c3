//! Byte-stable number formatting for reports.

/// Formats a float with 12 significant digits in scientific notation.
///
/// Non-finite values print as `nan`, `inf` or `-inf`.
pub fn sig12(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if x == 0.0 {
        // Avoid "-0.00000000000e0".
        "0.00000000000e0".to_string()
    } else {
        format!("{x:.11e}")
    }
}

/// Rounds to 12 significant digits; the value `sig12` would print.
pub fn round12(x: f64) -> f64 {
    if x.is_finite() {
        sig12(x).parse().unwrap_or(x)
    } else {
        x
    }
}
