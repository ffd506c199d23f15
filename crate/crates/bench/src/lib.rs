//! Fixtures shared by the criterion benches.

use ashgeo::frw::DEFAULT_TIME;
use ashgeo::{parse, Binding, Curvature, EndoField, Expr, FrwModel, SampleRng, SliceMetric};

/// A closed FRW slice at `τ0 = 1` with `a = exp(τ/2)`.
pub fn frw_closed() -> (SliceMetric, EndoField) {
    let m = FrwModel::new(Curvature::Closed, parse("exp(0.5*t)").unwrap(), DEFAULT_TIME).unwrap();
    (m.slice_metric(1.0).unwrap(), m.weingarten_field(1.0).unwrap())
}

/// A seeded random metric with a compatible random Weingarten map.
pub fn random_slice(seed: u64) -> (SliceMetric, EndoField) {
    let mut rng = SampleRng::new(seed);
    let q = rng.metric_field(2);
    let w = rng.weingarten_field(&q, 1);
    (q, w)
}

/// A moderately deep random scalar expression.
pub fn scalar(seed: u64) -> Expr {
    SampleRng::new(seed).smooth_scalar(4)
}

pub fn point() -> Binding {
    Binding::slice([1.1, 0.7, -0.4])
}
