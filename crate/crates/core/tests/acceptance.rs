//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use validim_core::choquet::{choquet_upper, level_sup};
use validim_core::contour::{binomial_contour, location_contour, LocationKernel, PossibilityContour};
use validim_core::decision::{make_loss, minimize_expected_loss, minimize_upper_loss, ActionSearchSpec, LossSpec};
use validim_core::fiducial::{confidence_distribution_test, stochastic_order_check, ConfidenceDistribution};
use validim_core::model::ModelSpec;
use validim_core::oracle::{min_ratio, ActionGrid, RatioSpec, RatioVariant};
use validim_core::validity::{
    coverage_check, default_alphas, simulate_ratio_cdf, ExperimentConfig, SamplingMode, Simulation,
};
use validim_core::{Distribution, LossFunction};

// Pinned tolerances and budgets.
const CHOQUET_REL_TOL: f64 = 1e-4;
const CHOQUET_BUDGET: Duration = Duration::from_secs(10);
const FIDUCIAL_REL_TOL: f64 = 1e-6;
const MINIMIZER_TOL: f64 = 1e-6;
const SKEW_MINIMIZER_TOL: f64 = 1e-4;
const RATIO_BOUND_SLACK: f64 = 1e-6;
const FIG2_REPLICATIONS: usize = 10_000;
const FIG2_SEED: u64 = 20_240_917;
const FIG2_BUDGET: Duration = Duration::from_secs(300);
const FIG4_BUDGET: Duration = Duration::from_secs(120);
const IDENTITY_TOL: f64 = 1e-6;
const CONVEXITY_SLACK: f64 = 1e-7;
const COVERAGE_REPLICATIONS: usize = 10_000;
const COVERAGE_SEED: u64 = 7;

// t(3): E|U| = 2 sqrt(3) / pi and V(U) = 3.
const T3_ABS_MEAN: f64 = 1.102_657_790_843_584_1;
const T3_VARIANCE: f64 = 3.0;

type Outcome = Result<String, String>;

fn t3() -> Distribution {
    Distribution::student_t(3.0).unwrap()
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn rel_err(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs()
}

type Criterion = (&'static str, fn() -> Outcome);

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let kernel = LocationKernel::new(t3()).unwrap();
    let loss = LossFunction::squared_error();
    let mut worst: f64 = 0.0;
    for y in grid(-3.0, 3.0, 20) {
        let c = PossibilityContour::location(kernel.clone(), y).unwrap();
        for a in grid(-3.0, 3.0, 20) {
            let d = (y - a).abs();
            let exact = d * d + 2.0 * d * T3_ABS_MEAN + T3_VARIANCE;
            let value = choquet_upper(&c, &loss, a, 1e-6).map_err(|e| e.to_string())?.value;
            worst = worst.max(rel_err(value, exact));
        }
    }
    let elapsed = start.elapsed();
    let detail = format!("worst relative error {worst:.2e}, {elapsed:.2?}");
    if worst <= CHOQUET_REL_TOL && elapsed < CHOQUET_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_2() -> Outcome {
    let loss = LossFunction::squared_error();
    let mut worst: f64 = 0.0;
    for y in grid(-3.0, 3.0, 20) {
        let c = location_contour(&t3(), y).unwrap();
        let q = ConfidenceDistribution::fiducial_for(&c).unwrap();
        for a in grid(-3.0, 3.0, 20) {
            let exact = (y - a).powi(2) + T3_VARIANCE;
            let value = q.expected_loss(&loss, a, 1e-9).map_err(|e| e.to_string())?;
            worst = worst.max(rel_err(value, exact));
        }
    }
    let detail = format!("worst relative error {worst:.2e}");
    if worst <= FIDUCIAL_REL_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let kernel = LocationKernel::new(t3()).unwrap();
    let loss = LossFunction::squared_error();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let y = rng.random_range(-5.0..5.0);
        let c = PossibilityContour::location(kernel.clone(), y).unwrap();
        let q = ConfidenceDistribution::fiducial_for(&c).unwrap();
        let spec = ActionSearchSpec::for_contour(&c);
        let upper = minimize_upper_loss(&c, &loss, &spec).map_err(|e| e.to_string())?;
        let fid = minimize_expected_loss(&q, &loss, &spec).map_err(|e| e.to_string())?;
        worst = worst.max((upper.action - y).abs()).max((fid.action - y).abs());
    }
    let sn = LocationKernel::new(Distribution::skew_normal(3.0).unwrap()).unwrap();
    let mut worst_sn: f64 = 0.0;
    for y in [0.0, -1.7, 2.4] {
        let c = PossibilityContour::location(sn.clone(), y).unwrap();
        let g = make_loss(&LossSpec::GroupInvariant { c: 0.2 }, &c).unwrap();
        let spec = ActionSearchSpec::for_contour(&c);
        let upper = minimize_upper_loss(&c, &g, &spec).map_err(|e| e.to_string())?;
        worst_sn = worst_sn.max((upper.action - y).abs());
    }
    let detail = format!("t3 worst |a - y| {worst:.2e}; skew-normal worst {worst_sn:.2e}");
    if worst <= MINIMIZER_TOL && worst_sn <= SKEW_MINIMIZER_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_4() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    let mut record = |contour: &PossibilityContour, loss: &LossFunction, theta: f64| -> Result<(), String> {
        let pl = contour.plausibility(theta);
        for variant in [RatioVariant::Plain, RatioVariant::Modified] {
            let spec = RatioSpec::new(ActionGrid::DataCentered { points: 101 }, variant);
            let r = min_ratio(contour, loss, &spec, theta).map_err(|e| e.to_string())?;
            worst = worst.min(r - pl);
            checked += 1;
        }
        Ok(())
    };
    let squared = LossFunction::squared_error();
    for y in grid(-2.0, 2.0, 10) {
        let c = location_contour(&t3(), y).unwrap();
        for theta in grid(-2.5, 2.5, 10) {
            record(&c, &squared, theta)?;
        }
    }
    let weighted = LossFunction::weighted_squared_error();
    for y in [1, 3, 5, 7, 9, 10, 12, 14, 16, 17] {
        let c = binomial_contour(18, y).unwrap();
        for theta in grid(0.05, 0.95, 10) {
            record(&c, &weighted, theta)?;
        }
    }
    let detail = format!("min over {checked} ratios of R - pi = {worst:.3e}");
    if worst >= -RATIO_BOUND_SLACK {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::new(ModelSpec::TLocation { df: 3.0 }, 0.0, LossSpec::SquaredError);
    cfg.replications = FIG2_REPLICATIONS;
    cfg.seed = FIG2_SEED;
    cfg.sampling = SamplingMode::MonteCarlo;
    let reports = simulate_ratio_cdf(&cfg).map_err(|e| e.to_string())?;
    let (im, fid) = (&reports[0], &reports[1]);
    let elapsed = start.elapsed();
    let detail = format!(
        "im worst cdf - a - 3se {:.4} at {}; fiducial {:.4} at {}; {elapsed:.2?}",
        im.worst_excess, im.worst_level, fid.worst_excess, fid.worst_level
    );
    if im.pass && fid.exceeds_diagonal() && elapsed < FIG2_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::new(ModelSpec::Binomial { n: 50 }, 0.3, LossSpec::WeightedSquaredError);
    cfg.sampling = SamplingMode::Exact;
    let reports = simulate_ratio_cdf(&cfg).map_err(|e| e.to_string())?;
    let (im, fid) = (&reports[0], &reports[1]);
    let elapsed = start.elapsed();
    let below = im.cdf.iter().zip(&im.levels).all(|(p, a)| p <= a);
    let above = fid.cdf.iter().zip(&fid.levels).any(|(p, a)| p > a);
    let detail = format!(
        "{} outcomes; im max cdf - a {:.4}; fiducial max cdf - a {:.4} at {}; {elapsed:.2?}",
        im.replications, im.worst_excess, fid.worst_excess, fid.worst_level
    );
    if im.mode == SamplingMode::Exact && below && above && elapsed < FIG4_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_7() -> Outcome {
    let alphas = default_alphas();
    let mut worst: f64 = 0.0;
    for law in [t3(), Distribution::skew_normal(3.0).unwrap()] {
        for y in [0.0, 1.3] {
            let c = location_contour(&law, y).unwrap();
            let q = ConfidenceDistribution::fiducial_for(&c).unwrap();
            for &alpha in &alphas {
                let outside = 1.0 - q.prob_region(&c.region(alpha));
                worst = worst.max((outside - alpha).abs());
            }
        }
    }
    let detail = format!("worst |Q*(C^c) - a| {worst:.2e}");
    if worst <= IDENTITY_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_8() -> Outcome {
    let alphas = default_alphas();
    let kernel = LocationKernel::new(t3()).unwrap();
    let y = 0.4;
    let c = PossibilityContour::location(kernel.clone(), y).unwrap();
    let q_star = ConfidenceDistribution::location(kernel.clone(), y).unwrap();
    let verdict = |q: &ConfidenceDistribution| -> Result<(bool, bool), String> {
        let cd = confidence_distribution_test(q, &c, &alphas).map_err(|e| e.to_string())?;
        let order = stochastic_order_check(q, &q_star, &c, &alphas).map_err(|e| e.to_string())?;
        Ok((cd.pass, order.pass))
    };
    let mut lines = Vec::new();
    let mut ok = true;
    for s in [0.0, 0.25, 0.5, 1.0] {
        let q = ConfidenceDistribution::scaled_location(kernel.clone(), y, s, 0.0).unwrap();
        let (a, b) = verdict(&q)?;
        ok &= a && b;
        lines.push(format!("s={s}: {a}/{b}"));
    }
    let wide = ConfidenceDistribution::scaled_location(kernel.clone(), y, 2.0, 0.0).unwrap();
    let shifted = ConfidenceDistribution::scaled_location(kernel.clone(), y, 1.0, 0.5).unwrap();
    for (name, q) in [("s=2", wide), ("shift 0.5", shifted)] {
        let (a, b) = verdict(&q)?;
        ok &= !a && !b;
        lines.push(format!("{name}: {a}/{b}"));
    }
    let detail = lines.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let alphas: Vec<f64> = (1..=200).map(|i| i as f64 / 201.0).collect();
    let second_difference_min = |c: &PossibilityContour, l: &LossFunction, a: f64| {
        let h: Vec<f64> = alphas.iter().map(|&al| level_sup(c, l, a, al)).collect();
        h.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).fold(f64::INFINITY, f64::min)
    };
    let mut worst = f64::INFINITY;
    let squared = LossFunction::squared_error();
    for _ in 0..50 {
        let y = rng.random_range(-3.0..3.0);
        let a = rng.random_range(-3.0..3.0);
        let c = location_contour(&t3(), y).unwrap();
        worst = worst.min(second_difference_min(&c, &squared, a));
    }
    let weighted = LossFunction::weighted_squared_error();
    for _ in 0..50 {
        let y = rng.random_range(1..18u64);
        let a = rng.random_range(0.01..0.99);
        let c = binomial_contour(18, y).unwrap();
        worst = worst.min(second_difference_min(&c, &weighted, a));
    }
    let detail = format!("smallest second difference {worst:.3e}");
    if worst >= -CONVEXITY_SLACK {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_10() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let sim = Simulation::monte_carlo(COVERAGE_REPLICATIONS, COVERAGE_SEED);
    for alpha in [0.05, 0.1, 0.2] {
        let r = coverage_check(&ModelSpec::TLocation { df: 3.0 }, 0.0, alpha, &sim).map_err(|e| e.to_string())?;
        ok &= r.pass && r.coverage <= 1.0;
        lines.push(format!("t3 a={alpha}: {:.4}+-{:.4}", r.coverage, r.se));
    }
    for theta in [0.1, 0.3, 0.5] {
        for alpha in [0.05, 0.1, 0.2] {
            let r = coverage_check(&ModelSpec::Binomial { n: 50 }, theta, alpha, &Simulation::exact())
                .map_err(|e| e.to_string())?;
            ok &= r.mode == SamplingMode::Exact && r.coverage >= 1.0 - alpha;
            if theta == 0.3 {
                lines.push(format!("binomial a={alpha}: {:.4}", r.coverage));
            }
        }
    }
    let detail = lines.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("closed-form upper risk for t3", criterion_1),
        ("closed-form fiducial risk for t3", criterion_2),
        ("minimizer agreement", criterion_3),
        ("minimum ratio bounds", criterion_4),
        ("t3 ratio CDF (Monte Carlo)", criterion_5),
        ("binomial ratio CDF (exact)", criterion_6),
        ("credal identity", criterion_7),
        ("credal membership tests", criterion_8),
        ("convexity of the level supremum", criterion_9),
        ("coverage", criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail})", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {}: {name} ({detail})", i + 1);
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
