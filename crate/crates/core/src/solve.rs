//! Scalar root finding and minimization.

/// Stopping rule for [`find_root`]: the bracket (or Newton step) is below
/// `abs + rel * |x|`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const TIGHT: Tolerance = Tolerance { abs: 1e-15, rel: 1e-13 };

    fn at(&self, x: f64) -> f64 {
        self.abs + self.rel * x.abs()
    }
}

fn split(lo: f64, hi: f64) -> f64 {
    if lo > 0.0 && hi > 8.0 * lo {
        (lo * hi).sqrt()
    } else if hi < 0.0 && lo < 8.0 * hi {
        -(lo * hi).sqrt()
    } else {
        0.5 * (lo + hi)
    }
}

/// Root of a monotone function on `[lo, hi]` by Newton steps safeguarded
/// with bisection.
///
/// `f` returns the value and the derivative; a non-finite derivative simply
/// forces a bisection step. The endpoint values must have opposite signs
/// (either may be infinite); otherwise the endpoint closest to zero is
/// returned.
pub fn find_root<F>(mut f: F, mut lo: f64, mut hi: f64, tol: Tolerance) -> f64
where
    F: FnMut(f64) -> (f64, f64),
{
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return if flo.abs() <= fhi.abs() { lo } else { hi };
    }
    let increasing = flo < 0.0;
    let mut x = split(lo, hi);
    let mut width_check = hi - lo;
    for iter in 0..400 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx.is_nan() {
            // Treat as the far side of the root; only happens in underflowed tails.
            hi = x;
        } else if (fx < 0.0) == increasing {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= tol.at(x) {
            return 0.5 * (lo + hi);
        }
        let newton = x - fx / dfx;
        let mut next = if newton.is_finite() && newton > lo && newton < hi { newton } else { split(lo, hi) };
        // Force a bisection when Newton stalls the bracket.
        if iter % 4 == 3 {
            if hi - lo > 0.5 * width_check {
                next = split(lo, hi);
            }
            width_check = hi - lo;
        }
        if (next - x).abs() <= 0.5 * tol.at(next) {
            return next;
        }
        x = next;
    }
    x
}

/// Result of a one-dimensional minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
///
/// Equal function values keep the left sub-interval, so flat stretches
/// resolve toward the smaller argument.
pub fn golden_section<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Minimum
where
    F: FnMut(f64) -> f64,
{
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evaluations = 2;
    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
        evaluations += 1;
    }
    if fc <= fd {
        Minimum { x: c, value: fc, evaluations }
    } else {
        Minimum { x: d, value: fd, evaluations }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_of_cubic() {
        let r = find_root(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 5.0, Tolerance::TIGHT);
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
    }

    #[test]
    fn root_of_decreasing_function_over_many_decades() {
        // 1/x^3 = 1e-30 at x = 1e10.
        let r = find_root(|x: f64| (-3.0 * x.ln() + 30.0 * 10f64.ln(), -3.0 / x), 1.0, 1e40, Tolerance::TIGHT);
        assert!((r / 1e10 - 1.0).abs() < 1e-12, "{r}");
    }

    #[test]
    fn root_without_derivative_bisects() {
        let r = find_root(|x| (x - 0.3, f64::NAN), 0.0, 1.0, Tolerance::TIGHT);
        assert!((r - 0.3).abs() < 1e-14);
    }

    #[test]
    fn golden_finds_parabola_minimum() {
        let m = golden_section(|x| (x - 1.25).powi(2) + 2.0, -3.0, 4.0, 1e-9);
        // Function values cannot resolve x below about sqrt(eps).
        assert!((m.x - 1.25).abs() < 1e-7);
        assert!((m.value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn golden_prefers_left_on_flat_floor() {
        let m = golden_section(|x: f64| if x.abs() < 1.0 { 0.0 } else { x.abs() - 1.0 }, -3.0, 3.0, 1e-9);
        // The left edge of the floor.
        assert!((m.x + 1.0).abs() < 1e-6, "{}", m.x);
    }
}
