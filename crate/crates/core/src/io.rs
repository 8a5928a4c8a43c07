//! Number formatting shared by all CSV writers.

/// Scientific notation with 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}
