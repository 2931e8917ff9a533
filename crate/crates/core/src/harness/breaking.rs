/// Steepness detector: fires when the forward difference of the surface
/// between two adjacent nodes exceeds one. Returns the position midway
/// between the steepest such pair and the slope there.
pub fn detect_breaking(zeta: &[f64], dx: f64) -> Option<(f64, f64)> {
    let mut worst: Option<(usize, f64)> = None;
    for (i, w) in zeta.windows(2).enumerate() {
        let s = (w[1] - w[0]) / dx;
        if s > 1.0 && worst.is_none_or(|(_, b)| s > b) {
            worst = Some((i, s));
        }
    }
    worst.map(|(i, s)| ((i as f64 + 0.5) * dx, s))
}
