//! Adaptive Gauss–Legendre quadrature.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 16;
const MAX_DEPTH: u32 = 40;

/// Nodes and weights of the `ORDER`-point rule on [-1, 1], by Newton iteration
/// on the Legendre polynomial.
fn rule() -> &'static [(f64, f64); ORDER] {
    static RULE: OnceLock<[(f64, f64); ORDER]> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut out = [(0.0, 0.0); ORDER];
        for (i, node) in out.iter_mut().enumerate() {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *node = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        out
    })
}

fn fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule().iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by recursive bisection.
///
/// A panel is accepted when its single-rule value and the sum over its two halves
/// agree within the panel's share of the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::argument(format!("quadrature tolerance must be positive, got {tol}")));
    }
    if a == b {
        return Ok(0.0);
    }
    let whole = fixed(&f, a, b);
    let mut worst = 0.0_f64;
    let value = refine(&f, a, b, whole, tol, 0, &mut worst);
    if worst > tol {
        return Err(Error::Quadrature {
            achieved: worst,
            requested: tol,
        });
    }
    Ok(value)
}

fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    unresolved: &mut f64,
) -> f64 {
    let mid = 0.5 * (a + b);
    let left = fixed(f, a, mid);
    let right = fixed(f, mid, b);
    let err = (left + right - whole).abs();
    // Below a few ulps of the panel value the halves cannot agree any better.
    if err <= tol.max(8.0 * f64::EPSILON * (left.abs() + right.abs())) {
        return left + right;
    }
    if !err.is_finite() {
        *unresolved = f64::INFINITY;
        return left + right;
    }
    if depth >= MAX_DEPTH {
        *unresolved += err;
        return left + right;
    }
    refine(f, a, mid, left, 0.5 * tol, depth + 1, unresolved)
        + refine(f, mid, b, right, 0.5 * tol, depth + 1, unresolved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn weights_sum_to_interval_length() {
        let total: f64 = rule().iter().map(|&(_, w)| w).sum();
        assert_abs_diff_eq!(total, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn exact_for_high_degree_polynomials() {
        // A 16-point rule integrates degree 31 exactly.
        let v = fixed(&|x: f64| x.powi(30), -1.0, 1.0);
        assert_abs_diff_eq!(v, 2.0 / 31.0, epsilon = 1e-14);
    }

    #[test]
    fn resolves_peaked_integrand() {
        let eps = 1e-3;
        let v = integrate(|x| eps / (x * x + eps * eps), -1.0, 1.0, 1e-10).unwrap();
        assert_abs_diff_eq!(v, 2.0 * (1.0 / eps).atan(), epsilon = 1e-9);
    }

    #[test]
    fn sine_over_half_period() {
        let v = integrate(f64::sin, 0.0, PI, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        assert!(integrate(|x| x, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn reports_non_convergence() {
        let err = integrate(|x: f64| 1.0 / x.abs().sqrt().max(1e-300).powi(4), -1.0, 1.0, 1e-12);
        assert!(matches!(err, Err(Error::Quadrature { .. })));
    }
}
