//! Pass/fail evidence shared by the inequality checks.

use num_rational::BigRational;
use serde::{Serialize, Serializer};

use crate::poly::{rat_string, rat_to_f64};

/// Relative slack allowed when comparing a measured constant with a predicted one.
pub const CONSTANT_SLACK: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InequalityId {
    Gradient,
    DistanceCritical,
    DistanceZero,
    GradientDistance,
    GradientDistanceAnalytic,
}

impl InequalityId {
    pub fn as_str(self) -> &'static str {
        match self {
            InequalityId::Gradient => "gradient",
            InequalityId::DistanceCritical => "distance-critical",
            InequalityId::DistanceZero => "distance-zero",
            InequalityId::GradientDistance => "gradient-distance",
            InequalityId::GradientDistanceAnalytic => "gradient-distance-analytic",
        }
    }
}

/// Outcome of sampling one inequality `LHS >= C * RHS^exponent`.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheckReport {
    pub inequality_id: InequalityId,
    #[serde(serialize_with = "ser_rational")]
    pub exponent: BigRational,
    /// Largest constant for which the inequality holds on every sample.
    pub measured_constant: f64,
    pub predicted_constant: Option<f64>,
    pub pass: bool,
    pub sample_count: usize,
    /// `(sigma, delta)`; `delta` is absent for checks without an inner ball.
    pub ball_radii: (f64, Option<f64>),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl InequalityCheckReport {
    /// Builds a report, deriving `pass` from the measured and predicted constants.
    pub fn new(
        inequality_id: InequalityId,
        exponent: BigRational,
        measured_constant: f64,
        predicted_constant: Option<f64>,
        sample_count: usize,
        ball_radii: (f64, Option<f64>),
    ) -> Self {
        let pass = measured_passes(measured_constant, predicted_constant);
        InequalityCheckReport { inequality_id, exponent, measured_constant, predicted_constant, pass, sample_count, ball_radii, note: None }
    }

    /// A sub-check that could not run; it never passes.
    pub fn aborted(inequality_id: InequalityId, exponent: BigRational, ball_radii: (f64, Option<f64>), note: String) -> Self {
        InequalityCheckReport {
            inequality_id,
            exponent,
            measured_constant: 0.0,
            predicted_constant: None,
            pass: false,
            sample_count: 0,
            ball_radii,
            note: Some(note),
        }
    }

    pub fn exponent_f64(&self) -> f64 {
        rat_to_f64(&self.exponent)
    }
}

pub fn measured_passes(measured: f64, predicted: Option<f64>) -> bool {
    measured.is_finite() && measured > 0.0 && predicted.is_none_or(|c| measured >= c * (1.0 - CONSTANT_SLACK))
}

pub(crate) fn ser_rational<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rat_string(q))
}

pub(crate) fn ser_rational_opt<S: Serializer>(q: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_str(&rat_string(q)),
        None => s.serialize_none(),
    }
}

pub(crate) fn ser_rational_pair<S: Serializer>(q: &(BigRational, BigRational), s: S) -> Result<S::Ok, S::Error> {
    [rat_string(&q.0), rat_string(&q.1)].serialize(s)
}
