//! Safeguarded scalar root finding.

/// Finds a root of `g` inside `[lo, hi]`, assuming a sign change across the
/// bracket. Newton steps from `dg` are taken while they stay inside the
/// current bracket; every third iteration bisects so that tangential roots
/// still converge. Iterates until the bracket collapses to a few ulps.
///
/// If `g` does not change sign, the endpoint with the smaller residual is
/// returned.
pub(crate) fn solve_bracketed<G, D>(g: G, dg: D, lo: f64, hi: f64) -> f64
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let g_lo = g(lo);
    let g_hi = g(hi);
    if g_lo == 0.0 {
        return lo;
    }
    if g_hi == 0.0 {
        return hi;
    }
    if (g_lo < 0.0) == (g_hi < 0.0) {
        return if g_lo.abs() <= g_hi.abs() { lo } else { hi };
    }
    let rising = g_lo < 0.0;

    let mut x = 0.5 * (lo + hi);
    for iter in 0..400 {
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        if (gx < 0.0) == rising {
            lo = x;
        } else {
            hi = x;
        }
        let width = hi - lo;
        if width <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) || width <= f64::MIN_POSITIVE {
            return if g(lo).abs() <= g(hi).abs() { lo } else { hi };
        }
        let d = dg(x);
        let newton = x - gx / d;
        let next = if iter % 3 != 2 && d != 0.0 && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == x {
            return x;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = solve_bracketed(|x| x * x - 2.0, |x| 2.0 * x, 0.0, 2.0);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tangential_root_converges() {
        // (x - 0.3)^3 has a triple root; Newton alone is linear there.
        let r = solve_bracketed(|x| (x - 0.3f64).powi(3), |x| 3.0 * (x - 0.3f64).powi(2), 0.0, 1.0);
        assert!((r - 0.3).abs() < 1e-5);
    }

    #[test]
    fn no_sign_change_returns_best_endpoint() {
        let r = solve_bracketed(|x| x + 1.0, |_| 1.0, 0.0, 1.0);
        assert_eq!(r, 0.0);
    }
}
