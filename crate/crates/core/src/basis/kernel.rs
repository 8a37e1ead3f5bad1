/// Cubic spline kernel of the normalized distance `r`, supported on `[0, 1)`.
pub fn kernel_value(r: f64) -> f64 {
    if r <= 0.5 {
        2.0 * (2.0 / 3.0 + 4.0 * (r - 1.0) * r * r)
    } else if r <= 1.0 {
        2.0 * (4.0 / 3.0) * (1.0 - r).powi(3)
    } else {
        0.0
    }
}
