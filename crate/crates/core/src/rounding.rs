//! Publication rounding.

/// Rounds half-up (away from zero for positive values) to `decimals` places.
///
/// Values whose decimal representation sits on a tie, such as `19.55`, are
/// stored in binary slightly off the tie. A relative slack of a few ulps in
/// the scaled value makes them round the way they read.
pub fn round_half_up(value: f64, decimals: u32) -> f64 {
    if !value.is_finite() {
        return value;
    }
    let scale = 10f64.powi(decimals as i32);
    let scaled = value.abs() * scale;
    let slack = scaled * 4.0 * f64::EPSILON;
    let rounded = (scaled + 0.5 + slack).floor() / scale;
    rounded.copysign(value)
}

/// Fixed-decimal text for CSV output, with `-0.000` normalised to `0.000`.
pub fn fixed(value: f64, decimals: usize) -> String {
    let r = round_half_up(value, decimals as u32);
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r:.decimals$}")
}
