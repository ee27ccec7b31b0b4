//! Gamma-family special functions.

pub(crate) use statrs::function::gamma::{digamma, ln_gamma};

/// Trigamma ψ₁(x) for x > 0: recurrence up to x ≥ 10, then the asymptotic
/// series.
pub(crate) fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    // 1/x + 1/2x² + Σ B_2k / x^(2k+1)
    let tail = r2
        * (1.0 / 6.0
            - r2 * (1.0 / 30.0 - r2 * (1.0 / 42.0 - r2 * (1.0 / 30.0 - r2 * (5.0 / 66.0)))));
    acc + r + 0.5 * r2 + r * tail
}

/// Solves ψ(x) = y for x > 0 by Newton's method.
pub(crate) fn inv_digamma(y: f64) -> f64 {
    let mut x = if y >= -2.22 {
        y.exp() + 0.5
    } else {
        -1.0 / (y - digamma(1.0))
    };
    for _ in 0..50 {
        let step = (digamma(x) - y) / trigamma(x);
        let next = x - step;
        x = if next > 0.0 { next } else { x / 2.0 };
        if step.abs() <= 1e-15 * x {
            break;
        }
    }
    x
}
