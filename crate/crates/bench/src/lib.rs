//! Fixtures shared by the benchmarks in `benches/`.

use validim_core::contour::{binomial_contour, location_contour};
use validim_core::{ConfidenceDistribution, Distribution, LossFunction, PossibilityContour};

/// A contour with the loss and fiducial distribution it is usually paired with.
pub struct Fixture {
    pub name: &'static str,
    pub contour: PossibilityContour,
    pub loss: LossFunction,
    pub fiducial: ConfidenceDistribution,
    pub action: f64,
}

fn fixture(name: &'static str, contour: PossibilityContour, loss: LossFunction, action: f64) -> Fixture {
    let fiducial = ConfidenceDistribution::fiducial_for(&contour).expect("fixture contours have fiducials");
    Fixture { name, contour, loss, fiducial, action }
}

pub fn t3() -> Fixture {
    let law = Distribution::student_t(3.0).expect("valid law");
    fixture("t3", location_contour(&law, 0.7).expect("finite data"), LossFunction::squared_error(), 0.2)
}

pub fn skew_normal() -> Fixture {
    let law = Distribution::skew_normal(3.0).expect("valid law");
    fixture("skew-normal", location_contour(&law, 0.0).expect("finite data"), LossFunction::squared_error(), -0.6)
}

pub fn binomial() -> Fixture {
    let contour = binomial_contour(18, 7).expect("valid counts");
    fixture("binomial", contour, LossFunction::weighted_squared_error(), 0.4)
}

pub fn all() -> Vec<Fixture> {
    vec![t3(), skew_normal(), binomial()]
}
