//! Number formatting shared by CSV and summary output.

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    format!("{x:.16e}")
}

/// Fixed 6 decimals for human-readable summaries.
pub fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

pub fn csv_row(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}
