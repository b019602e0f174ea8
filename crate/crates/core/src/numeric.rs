//! Small floating-point helpers shared by the spectral code.

use std::f64::consts::PI;
use std::ops::Add;

/// `sin(pi x)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    // r in [-1, 1], sin(pi x) = sin(pi r)
    let r = x - 2.0 * (x / 2.0).round();
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

/// `cos(pi x)` with exact zeros at the half-integers.
pub fn cos_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    (PI * (0.5 - r.abs())).sin()
}

/// Normalized sinc, `sin(pi x) / (pi x)`, equal to 1 at 0.
pub fn sinc(x: f64) -> f64 {
    let t = PI * x;
    if t.abs() < 1e-3 {
        let t2 = t * t;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        sin_pi(x) / t
    }
}

/// Pairwise (cascade) summation. The split points depend only on the
/// length, so the result does not depend on how callers chunk work.
pub fn pairwise_sum<T>(values: &[T]) -> T
where
    T: Copy + Default + Add<Output = T>,
{
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        return values.iter().fold(T::default(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
