//! Central finite-difference gradients for checking analytic derivatives.

/// d f / d x[i] by central differences at step `eps`.
pub fn central_difference(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], i: usize, eps: f64) -> f64 {
    let mut plus = x.to_vec();
    let mut minus = x.to_vec();
    plus[i] += eps;
    minus[i] -= eps;
    (f(&plus) - f(&minus)) / (2.0 * eps)
}

/// Full numeric gradient of `f` at `x`.
pub fn numeric_gradient(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], eps: f64) -> Vec<f64> {
    (0..x.len()).map(|i| central_difference(f, x, i, eps)).collect()
}

/// |a - b| / max(|a|, |b|, floor): symmetric relative error with an absolute
/// floor so near-zero gradients compare sanely.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
