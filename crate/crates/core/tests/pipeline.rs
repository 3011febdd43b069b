use std::f64::consts::FRAC_PI_2;

use geogap_core::analysis::{default_ladder, ladder};
use geogap_core::frame::{verify_frame_bracket, xi_coords, FramePoint, DEFAULT_BRACKET_STEP};
use geogap_core::oracle::{ambient_to_chart, chart_to_ambient, chart_vector_to_ambient, oracle_vertices_from, OracleFrame, OracleModel};
use geogap_core::quad::{flow_gap_fii, FrameTriple};
use geogap_core::*;

fn spec(json: &str) -> ConnectionChart {
    serde_json::from_str::<GeometrySpec>(json).unwrap().resolve().unwrap()
}

#[test]
fn metric_spec_reproduces_builtin_sphere() {
    let from_metric = spec(r#"{"kind":"metric","dim":2,"g":{"1,1":"1","2,2":"sin(x1)^2"},
        "domain":[[0.2,2.9],[null,null]]}"#);
    let builtin = ConnectionChart::sphere(1.0).unwrap();
    let cfg = IntegratorConfig::default();
    let t = FrameTriple::new([1.0, 0.2], [0.3, 0.5], [-0.4, 0.6]);
    let a = gap_ladder(&from_metric, &t, &default_ladder(), &cfg).unwrap();
    let b = gap_ladder(&builtin, &t, &default_ladder(), &cfg).unwrap();
    for (x, y) in a.vertices.iter().zip(&b.vertices) {
        assert!(x.max_abs_diff(y) < 1e-12);
    }
}

#[test]
fn custom_spec_torsion_reconstruction() {
    let c = spec(r#"{"kind":"custom","dim":3,"gamma":{"1,2,3":"0.2","3,1,2":"-0.1*x1"}}"#);
    let p = [0.5, 0.0, 0.0];
    let rec = torsion_from_gaps(&c, &p, &default_ladder(), &IntegratorConfig::default()).unwrap();
    // T^i_mn = Γ^i_nm − Γ^i_mn
    let exact = c.torsion_at(&p).unwrap();
    assert!((exact[(0, 1, 2)] + 0.2).abs() < 1e-15);
    assert!((exact[(2, 0, 1)] - 0.05).abs() < 1e-15);
    assert!(rec.torsion.max_abs_diff(&exact) < 1e-6, "{:?}", rec.torsion);
}

#[test]
fn curvature_refused_with_torsion() {
    let c = ConnectionChart::constant_torsion(0.3).unwrap();
    let err = curvature_from_gaps(&c, &[0.0, 0.0], &default_ladder(), &IntegratorConfig::default()).unwrap_err();
    assert!(matches!(err, Error::TorsionPresent { .. }));
}

#[test]
fn chart_pipeline_agrees_with_oracle_vertices() {
    // P0 at (θ, φ) = (1.1, 0.4), u, v g-orthonormal; both routes in chart coordinates
    let r = 1.0;
    let c = ConnectionChart::sphere(r).unwrap();
    let x = [1.1, 0.4];
    let u = [1.0, 0.0];
    let v = [0.0, 1.0 / 1.1f64.sin()];
    let p = chart_to_ambient(OracleModel::Sphere, r, &x).unwrap();
    let ua = chart_vector_to_ambient(OracleModel::Sphere, r, &x, &u).unwrap();
    let va = chart_vector_to_ambient(OracleModel::Sphere, r, &x, &v).unwrap();
    let frame = Matrix::from_columns(&[p.scaled(1.0 / r), ua, va]).unwrap();
    let frame = OracleFrame::new(frame, OracleModel::Sphere, r).unwrap();
    let t = FrameTriple::new(x, u, v);
    let cfg = IntegratorConfig::default();
    for s in ladder(0.2, 4).unwrap() {
        let o = oracle_vertices_from(&frame, s).unwrap();
        let q = quad_vertices(&c, &t, s, &cfg).unwrap();
        for (amb, chart) in o.all().iter().zip(q.all()) {
            let mapped = ambient_to_chart(OracleModel::Sphere, r, amb).unwrap();
            assert!(mapped.max_abs_diff(chart) < 1e-10, "s = {s}");
        }
    }
}

#[test]
fn frame_flow_commutator_matches_bracket() {
    let c = ConnectionChart::sphere(1.0).unwrap();
    let y = FramePoint::orthonormal(&c, [FRAC_PI_2, 0.0]).unwrap();
    let report = verify_frame_bracket(&c, &y, DEFAULT_BRACKET_STEP).unwrap();
    let z = y.to_coords();
    let cfg = IntegratorConfig::default();
    let xi = |w: &[f64]| xi_coords(&c, 0, w);
    let eta = |w: &[f64]| xi_coords(&c, 1, w);
    let samples: Vec<(f64, Vector)> = ladder(0.05, 5)
        .unwrap()
        .into_iter()
        .map(|s| (s, flow_gap_fii(xi, eta, None, &z, s, &cfg).unwrap()))
        .collect();
    let lim = estimate_limit(&samples, 2).unwrap().limit;
    let bracket = &report.pairs[0].bracket;
    let mut expect = bracket.base.as_slice().to_vec();
    expect.extend_from_slice(bracket.vert.as_slice());
    assert!(lim.max_abs_diff(&expect) < 1e-4, "{lim:?} vs {expect:?}");
}

#[test]
fn frame_bracket_equivariant_under_change_of_frame() {
    let c = ConnectionChart::sphere(1.0).unwrap();
    let y = FramePoint::orthonormal(&c, [1.0, 0.0]).unwrap();
    let a = Matrix::from_row_major(vec![2.0, 0.5, -0.3, 1.5]).unwrap();
    let ya = FramePoint::new(&c, y.x.clone(), y.frame.matmul(&a).unwrap()).unwrap();
    let r = verify_frame_bracket(&c, &ya, DEFAULT_BRACKET_STEP).unwrap();
    assert!(r.max_vertical_deviation.unwrap() < 1e-4);
    assert!(r.max_base_deviation < 1e-8);
}

#[test]
fn domain_exit_is_reported_with_leg() {
    let c = ConnectionChart::sphere(1.0).unwrap();
    let t = FrameTriple::new([0.25, 0.0], [-1.0, 0.0], [0.0, 1.0]);
    let err = quad_vertices(&c, &t, 0.1, &IntegratorConfig::default()).unwrap_err();
    assert_eq!(err.class(), ErrorClass::Domain);
    assert!(err.to_string().contains("P0->P1"), "{err}");
}
