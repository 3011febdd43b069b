//! Fixtures shared by the benchmarks.

use std::f64::consts::FRAC_PI_2;

use geogap_core::frame::FramePoint;
use geogap_core::quad::FrameTriple;
use geogap_core::{ConnectionChart, GeometrySpec};

/// Unit sphere with a g-orthonormal pair at the equator.
pub fn sphere_fixture() -> (ConnectionChart, FrameTriple) {
    let chart = ConnectionChart::sphere(1.0).expect("unit sphere");
    (chart, FrameTriple::new([FRAC_PI_2, 0.0], [0.0, 1.0], [-1.0, 0.0]))
}

/// The unit sphere again, but with Christoffel symbols derived from the metric
/// expressions at every evaluation.
pub fn metric_sphere_fixture() -> (ConnectionChart, FrameTriple) {
    let spec: GeometrySpec = serde_json::from_str(
        r#"{"kind":"metric","dim":2,"g":{"1,1":"1","2,2":"sin(x1)^2"},"domain":[[0.2,2.9],[null,null]]}"#,
    )
    .expect("static spec");
    let chart = spec.resolve().expect("metric sphere");
    (chart, FrameTriple::new([FRAC_PI_2, 0.0], [0.0, 1.0], [-1.0, 0.0]))
}

pub fn torsion_fixture() -> (ConnectionChart, FrameTriple) {
    let chart = ConnectionChart::constant_torsion(0.3).expect("constant torsion");
    (chart, FrameTriple::new([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]))
}

pub fn frame_fixture() -> (ConnectionChart, FramePoint) {
    let chart = ConnectionChart::sphere(1.0).expect("unit sphere");
    let y = FramePoint::orthonormal(&chart, [1.1, 0.4]).expect("orthonormal frame");
    (chart, y)
}
