//! Deterministic text formatting shared by the CSV exporters.

/// Shortest round-trip decimal representation of `x`.
///
/// Magnitudes outside `[1e-4, 1e15)` use exponent notation so tiny spectral
/// densities stay short. Output depends only on the bits of `x`.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
