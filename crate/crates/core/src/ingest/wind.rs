use crate::error::{Error, Result};

/// The 16 compass points in clockwise order starting from north.
pub const COMPASS_POINTS: [&str; 16] = [
    "N", "NNE", "NE", "ENE", "E", "ESE", "SE", "SSE", "S", "SSW", "SW", "WSW", "W", "WNW", "NW", "NNW",
];

/// Encodes a 16-point compass label as `(sin θ, cos θ)` with θ measured
/// clockwise from north in steps of 22.5°.
pub fn encode_wind_direction(label: &str) -> Result<(f64, f64)> {
    let key = label.trim().to_ascii_uppercase();
    let index = COMPASS_POINTS
        .iter()
        .position(|p| *p == key)
        .ok_or_else(|| Error::UnknownDirection(label.to_string()))?;
    let theta = (index as f64 * 22.5).to_radians();
    Ok((theta.sin(), theta.cos()))
}
