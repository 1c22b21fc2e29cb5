//! Adaptive Gauss–Kronrod quadrature.
//!
//! The 15-point Kronrod extension of the 7-point Gauss–Legendre rule is
//! applied on a set of panels; the panel with the largest error estimate is
//! bisected until the requested tolerance is met. Infinite ranges are mapped
//! onto `(0, 1]` by `x = a + (1 - t) / t`.

// Tabulated constants keep every published digit.
#![allow(clippy::excessive_precision)]

use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 0.0, rel_tol: 1e-10, max_panels: 500 }
    }
}

impl QuadOptions {
    pub fn relative(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Applies the G7/K15 pair on `[a, b]`, returning (Kronrod value, |K15 - G7|).
pub fn gauss_kronrod_15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

const ROUNDOFF_FACTOR: f64 = 64.0;

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Quadrature {
    if a == b {
        return Quadrature { value: 0.0, abs_error: 0.0, evaluations: 0, converged: true };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (value, error) = gauss_kronrod_15(&mut f, lo, hi);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a: lo, b: hi, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut converged = false;
    loop {
        // Errors below accumulated roundoff cannot be reduced by splitting.
        let roundoff = ROUNDOFF_FACTOR * f64::EPSILON * heap.iter().map(|p| p.value.abs()).sum::<f64>();
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs()).max(roundoff);
        if total_err <= tol || !total.is_finite() {
            converged = total.is_finite();
            break;
        }
        if heap.len() >= opts.max_panels {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in floating point.
            heap.push(Panel { error: 0.0, ..worst });
            total_err -= worst.error;
            continue;
        }
        let (v1, e1) = gauss_kronrod_15(&mut f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_15(&mut f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to shed the drift of the running updates.
    let (value, abs_error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Quadrature { value: sign * value, abs_error, evaluations, converged }
}

/// Integrates `f` over `[a, +inf)`.
pub fn integrate_upper<F: FnMut(f64) -> f64>(mut f: F, a: f64, opts: QuadOptions) -> Quadrature {
    integrate(
        |t: f64| {
            let s = (1.0 - t) / t;
            let v = f(a + s);
            if v == 0.0 {
                0.0
            } else {
                v / (t * t)
            }
        },
        0.0,
        1.0,
        opts,
    )
}

/// Integrates `f` over `(-inf, b]`.
pub fn integrate_lower<F: FnMut(f64) -> f64>(mut f: F, b: f64, opts: QuadOptions) -> Quadrature {
    integrate(
        |t: f64| {
            let s = (1.0 - t) / t;
            let v = f(b - s);
            if v == 0.0 {
                0.0
            } else {
                v / (t * t)
            }
        },
        0.0,
        1.0,
        opts,
    )
}

/// Integrates over `[a, b]` where either bound may be infinite. Doubly
/// infinite ranges are split at `split`.
pub fn integrate_range<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, split: f64, opts: QuadOptions) -> Quadrature {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => integrate(f, a, b, opts),
        (true, false) => integrate_upper(f, a, opts),
        (false, true) => integrate_lower(f, b, opts),
        (false, false) => {
            let lower = integrate_lower(&mut f, split, opts);
            let upper = integrate_upper(&mut f, split, opts);
            lower.combine(upper)
        }
    }
}

impl Quadrature {
    pub fn combine(self, other: Quadrature) -> Quadrature {
        Quadrature {
            value: self.value + other.value,
            abs_error: self.abs_error + other.abs_error,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, QuadOptions::default());
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((q.value - exact).abs() < 1e-13);
        assert!(q.converged);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let q = integrate(|x| x.exp(), 1.0, 0.0, QuadOptions::default());
        assert!((q.value + (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let q = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, QuadOptions::relative(1e-10));
        assert!((q.value - 2.0).abs() < 1e-8, "{q:?}");
    }

    #[test]
    fn gaussian_over_real_line() {
        let q =
            integrate_range(|x| (-0.5 * x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, 0.0, QuadOptions::default());
        assert!((q.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn cauchy_tail() {
        let q = integrate_upper(|x| 1.0 / (1.0 + x * x), 0.0, QuadOptions::default());
        assert!((q.value - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }
}
