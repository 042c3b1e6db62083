//! Derivative-free golden-section search for strictly unimodal objectives.
//!
//! The search is driven by a comparator returning the signed difference
//! `φ(x) - φ(y)`. Callers that can evaluate that difference without forming
//! both values (see [`crate::moments`]) keep full relative precision near the
//! minimum, where `φ(x)` and `φ(y)` agree to almost every digit.

/// `1/φ` for the golden ratio `φ`.
const INV_GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Hard cap; a bracket of width 1e300 shrinks below 1e-300 in ~2900 steps.
const MAX_ITER: usize = 4000;

/// Shrinks `[lo, hi]` around the minimizer until its width is at most `tol`
/// and returns the midpoint of the final bracket.
pub fn golden_section_by<C>(lo: f64, hi: f64, tol: f64, mut diff: C) -> f64
where
    C: FnMut(f64, f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut iter = 0;
    while b - a > tol && iter < MAX_ITER {
        let step = (b - a) * INV_GOLDEN;
        let c = b - step;
        let d = a + step;
        if !(a < c && c < d && d < b) {
            // bracket is at floating-point resolution
            break;
        }
        if diff(c, d) < 0.0 {
            b = d;
        } else {
            a = c;
        }
        iter += 1;
    }
    0.5 * (a + b)
}

/// Value-based convenience wrapper around [`golden_section_by`].
pub fn golden_section<F>(lo: f64, hi: f64, tol: f64, f: F) -> f64
where
    F: Fn(f64) -> f64,
{
    golden_section_by(lo, hi, tol, |x, y| f(x) - f(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quadratic() {
        let x = golden_section(-10.0, 10.0, 1e-10, |x| (x - 1.234).powi(2));
        assert!((x - 1.234).abs() < 1e-9);
    }

    #[test]
    fn minimizer_at_the_edge() {
        let x = golden_section(0.0, 1.0, 1e-10, |x| x);
        assert!(x < 1e-9);
        let x = golden_section(0.0, 1.0, 1e-10, |x| -x);
        assert!(x > 1.0 - 1e-9);
    }

    #[test]
    fn degenerate_bracket() {
        assert_eq!(golden_section(2.0, 2.0, 1e-10, |x| x * x), 2.0);
        let x = golden_section(3.0, -3.0, 1e-10, |x| (x + 1.0).abs());
        assert!((x + 1.0).abs() < 1e-9);
    }

    #[test]
    fn kinked_objective() {
        // |x - a|^1.1 is strictly convex but barely differentiable at a
        let x = golden_section(-5.0, 5.0, 1e-10, |x| (x - 0.3f64).abs().powf(1.1));
        assert!((x - 0.3).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn finds_convex_minimum(center in -50.0f64..50.0, width in 0.1f64..10.0, p in 1.2f64..4.0) {
            let lo = center - width * 0.7;
            let hi = center + width * 0.3;
            let x = golden_section(lo, hi, 1e-10, |x| (x - center).abs().powf(p) + 0.1 * (x - center).powi(2));
            prop_assert!((x - center).abs() < 1e-8);
        }
    }
}
