use std::fs;

use geogap_core::analysis::{
    bertrand_puiseux, curvature_from_gaps, gap_ladder, ladder, taylor_check,
    taylor_ladder, torsion_from_gaps, BertrandPuiseux, GapKind, GapReport, LimitFit, TaylorCheck, TORSION_GUARD,
};
use geogap_core::frame::{verify_frame_bracket, FramePoint};
use geogap_core::oracle::{oracle_gap_limits, oracle_limits, oracle_vertices, OracleFrame, OracleModel};
use geogap_core::quad::{check_trust, FrameTriple, QuadVertices, DEFAULT_TRUST_S};
use geogap_core::{
    contract_gamma, curvature_apply, ConnectionChart, Error, GeometrySpec, IntegratorConfig, Matrix, Vector, VERSION,
};
use serde::Serialize;

use crate::cli::{BpArgs, Components, FrameArgs, GapArgs, Model, OracleArgs, Output, ReconstructArgs, Site, Tensor};
use crate::output::{self, Table};

/// Failure of a command, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Rejected before any computation (exit 2).
    Input(String),
    Core(Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Core(e) => match e.class() {
                geogap_core::ErrorClass::InvalidInput => 2,
                geogap_core::ErrorClass::Domain => 3,
                geogap_core::ErrorClass::Fit => 4,
            },
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CmdResult = Result<(), CliError>;

fn input<T>(r: geogap_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Input(e.to_string()))
}

/// Everything a run depends on, echoed into the report.
#[derive(Debug, Serialize)]
struct RunConfig {
    geometry: GeometrySpec,
    point: Components,
    #[serde(skip_serializing_if = "Option::is_none")]
    u: Option<Components>,
    #[serde(skip_serializing_if = "Option::is_none")]
    v: Option<Components>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_values: Option<Vec<f64>>,
    steps_per_unit: usize,
    allow_large_s: bool,
}

fn load_geometry(src: &str) -> Result<GeometrySpec, CliError> {
    let text = if src.trim_start().starts_with('{') {
        src.to_string()
    } else {
        fs::read_to_string(src).map_err(|e| CliError::Input(format!("cannot read geometry file `{src}`: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("geometry spec: {e}")))
}

/// Resolves the geometry and checks the point against its dimension and domain.
fn prepare(site: &Site, out: &Output) -> Result<(GeometrySpec, ConnectionChart, IntegratorConfig), CliError> {
    if out.format == crate::cli::Format::Both && out.out.is_none() {
        return Err(CliError::Input("--format both needs --out".into()));
    }
    let spec = load_geometry(&site.geometry)?;
    let chart = input(spec.resolve())?;
    if site.point.0.len() != chart.dim() {
        return Err(CliError::Input(format!(
            "--point has {} components, chart `{}` has dimension {}",
            site.point.0.len(),
            chart.name(),
            chart.dim()
        )));
    }
    input(chart.domain().check(&site.point.0))?;
    let cfg = input(IntegratorConfig::new(out.steps_per_unit))?;
    Ok((spec, chart, cfg))
}

fn check_vector(name: &str, v: &Components, d: usize) -> CmdResult {
    if v.0.len() != d {
        return Err(CliError::Input(format!("--{name} has {} components, expected {d}", v.0.len())));
    }
    Ok(())
}

fn write_report<C: Serialize, R: Serialize>(
    command: &'static str,
    out: &Output,
    config: &C,
    result: &R,
    table: &Table,
) -> CmdResult {
    #[derive(Serialize)]
    struct Report<'a, C, R> {
        tool: &'static str,
        version: &'static str,
        command: &'static str,
        config: &'a C,
        result: &'a R,
    }
    let report = Report {
        tool: "geogap",
        version: VERSION,
        command,
        config,
        result,
    };
    output::write(out, &report, table)?;
    Ok(())
}

fn indexed(prefix: &str, d: usize) -> impl Iterator<Item = String> + '_ {
    (1..=d).map(move |i| format!("{prefix}_{i}"))
}

#[derive(Serialize)]
struct Comparison {
    expected: Vector,
    deviation: f64,
}

fn compare(limit: &Vector, expected: Option<Vector>) -> Option<Comparison> {
    expected.map(|e| Comparison {
        deviation: limit.max_abs_diff(&e),
        expected: e,
    })
}

#[derive(Serialize)]
struct OrderSection {
    #[serde(rename = "GI")]
    gi: GapReport,
    #[serde(rename = "GII")]
    gii: GapReport,
    #[serde(rename = "GI_vs_analytic", skip_serializing_if = "Option::is_none")]
    gi_vs_analytic: Option<Comparison>,
    #[serde(rename = "GII_vs_analytic", skip_serializing_if = "Option::is_none")]
    gii_vs_analytic: Option<Comparison>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Order3 {
    Measured(Box<OrderSection>),
    Skipped(&'static str),
}

#[derive(Serialize)]
struct GapResult {
    chart: String,
    order2: OrderSection,
    order3: Order3,
    slope_estimates: SlopePair,
}

#[derive(Serialize)]
struct SlopePair {
    #[serde(rename = "GI")]
    gi: Option<f64>,
    #[serde(rename = "GII")]
    gii: Option<f64>,
}

pub fn gap(args: &GapArgs) -> CmdResult {
    let (spec, chart, cfg) = prepare(&args.site, &args.output)?;
    let d = chart.dim();
    check_vector("u", &args.u, d)?;
    check_vector("v", &args.v, d)?;
    input(check_trust(args.ladder.s_max, DEFAULT_TRUST_S, args.output.allow_large_s))?;
    let s_values = input(ladder(args.ladder.s_max, args.ladder.levels))?;
    let t = FrameTriple::new(args.site.point.0.clone(), args.u.0.clone(), args.v.0.clone());
    let lad = gap_ladder(&chart, &t, &s_values, &cfg)?;

    // −T(u,v) and, for symmetric Γ, ½R(u,v)(u+v); unavailable near the domain edge
    let torsion = chart.torsion_at(&t.p)?;
    let minus_t = contract_gamma(&torsion, &t.u, &t.v).ok().map(|v| v.scaled(-1.0));
    let half_r = if torsion.max_abs() == 0.0 {
        chart
            .curvature_at(&t.p)
            .ok()
            .and_then(|r| curvature_apply(&r, &t.u, &t.v, &(&t.u + &t.v)).ok())
            .map(|v| v.scaled(0.5))
    } else {
        None
    };

    let gi2 = lad.report(GapKind::GI, 2)?;
    let gii2 = lad.report(GapKind::GII, 2)?;
    let measured_torsion = gi2.limit.norm_inf().max(gii2.limit.norm_inf());
    let order3 = if measured_torsion > TORSION_GUARD {
        Order3::Skipped("skipped: torsion present")
    } else {
        let gi3 = lad.report(GapKind::GI, 3)?;
        let gii3 = lad.report(GapKind::GII, 3)?;
        Order3::Measured(Box::new(OrderSection {
            gi_vs_analytic: compare(&gi3.limit, half_r.clone()),
            gii_vs_analytic: compare(&gii3.limit, half_r.map(|v| v.scaled(-1.0))),
            gi: gi3,
            gii: gii3,
        }))
    };
    let result = GapResult {
        chart: chart.name().to_string(),
        slope_estimates: SlopePair {
            gi: gi2.slope_estimate,
            gii: gii2.slope_estimate,
        },
        order2: OrderSection {
            gi_vs_analytic: compare(&gi2.limit, minus_t.clone()),
            gii_vs_analytic: compare(&gii2.limit, minus_t),
            gi: gi2,
            gii: gii2,
        },
        order3,
    };
    let mut header = vec!["s".to_string()];
    header.extend(indexed("GI", d));
    header.extend(indexed("GII", d));
    let rows = lad
        .vertices
        .iter()
        .map(|q| {
            let mut row = vec![q.s];
            row.extend_from_slice(q.gap_i().as_slice());
            row.extend_from_slice(q.gap_ii().as_slice());
            row
        })
        .collect();
    let config = RunConfig {
        geometry: spec,
        point: args.site.point.clone(),
        u: Some(args.u.clone()),
        v: Some(args.v.clone()),
        s_values: Some(s_values),
        steps_per_unit: cfg.steps_per_unit,
        allow_large_s: args.output.allow_large_s,
    };
    write_report("gap", &args.output, &config, &result, &Table { header, rows })
}

#[derive(Serialize)]
struct TensorComparison {
    max_abs_deviation: f64,
    analytic: serde_json::Value,
}

#[derive(Serialize)]
struct ReconstructResult {
    chart: String,
    tensor: Tensor,
    entries: serde_json::Value,
    residual: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic: Option<TensorComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    torsion_entries: Option<serde_json::Value>,
}

fn nested<T: Serialize>(t: T) -> serde_json::Value {
    serde_json::to_value(t).unwrap_or(serde_json::Value::Null)
}

pub fn reconstruct(args: &ReconstructArgs) -> CmdResult {
    let (spec, chart, cfg) = prepare(&args.site, &args.output)?;
    input(check_trust(args.ladder.s_max, DEFAULT_TRUST_S, args.output.allow_large_s))?;
    let s_values = input(ladder(args.ladder.s_max, args.ladder.levels))?;
    let p = &args.site.point.0;
    let d = chart.dim();
    let (result, rows, header) = match args.tensor {
        Tensor::Torsion => {
            let rec = torsion_from_gaps(&chart, p, &s_values, &cfg)?;
            let analytic = chart.torsion_at(p).ok().map(|a| TensorComparison {
                max_abs_deviation: rec.torsion.max_abs_diff(&a),
                analytic: nested(a.to_nested()),
            });
            let mut rows = Vec::new();
            for i in 0..d {
                for m in 0..d {
                    for n in 0..d {
                        let (i1, m1, n1) = ((i + 1) as f64, (m + 1) as f64, (n + 1) as f64);
                        rows.push(vec![i1, m1, n1, rec.torsion[(i, m, n)], rec.residual[(i, m, n)]]);
                    }
                }
            }
            let result = ReconstructResult {
                chart: chart.name().to_string(),
                tensor: Tensor::Torsion,
                entries: nested(rec.torsion.to_nested()),
                residual: nested(rec.residual.to_nested()),
                analytic,
                torsion_entries: None,
            };
            (result, rows, vec!["i", "m", "n", "value", "residual"])
        }
        Tensor::Curvature => {
            let rec = curvature_from_gaps(&chart, p, &s_values, &cfg)?;
            let analytic = chart.curvature_at(p).ok().map(|a| TensorComparison {
                max_abs_deviation: rec.curvature.max_abs_diff(&a),
                analytic: nested(a.to_nested()),
            });
            let mut rows = Vec::new();
            for i in 0..d {
                for pp in 0..d {
                    for q in 0..d {
                        for r in 0..d {
                            let idx = [i, pp, q, r].map(|k| (k + 1) as f64);
                            let mut row = idx.to_vec();
                            row.push(rec.curvature[(i, pp, q, r)]);
                            row.push(rec.residual[(i, pp, q, r)]);
                            rows.push(row);
                        }
                    }
                }
            }
            let result = ReconstructResult {
                chart: chart.name().to_string(),
                tensor: Tensor::Curvature,
                entries: nested(rec.curvature.to_nested()),
                residual: nested(rec.residual.to_nested()),
                analytic,
                torsion_entries: Some(nested(rec.torsion.torsion.to_nested())),
            };
            (result, rows, vec!["i", "p", "q", "r", "value", "residual"])
        }
    };
    let config = RunConfig {
        geometry: spec,
        point: args.site.point.clone(),
        u: None,
        v: None,
        s_values: Some(s_values),
        steps_per_unit: cfg.steps_per_unit,
        allow_large_s: args.output.allow_large_s,
    };
    let table = Table {
        header: header.into_iter().map(String::from).collect(),
        rows,
    };
    write_report("reconstruct", &args.output, &config, &result, &table)
}

#[derive(Serialize)]
struct OracleConfig {
    model: Model,
    radius: f64,
    s_values: Vec<f64>,
    allow_large_s: bool,
}

#[derive(Serialize)]
struct OracleLimits {
    #[serde(rename = "GI")]
    gi: LimitFit,
    #[serde(rename = "Q2_minus_P2")]
    q2_minus_p2: LimitFit,
    expected: Vector,
    deviation: f64,
}

#[derive(Serialize)]
struct OracleResult {
    kappa: f64,
    vertices: Vec<QuadVertices>,
    #[serde(skip_serializing_if = "Option::is_none")]
    order3: Option<OracleLimits>,
}

pub fn oracle(args: &OracleArgs) -> CmdResult {
    let out = &args.output;
    if out.format == crate::cli::Format::Both && out.out.is_none() {
        return Err(CliError::Input("--format both needs --out".into()));
    }
    let model = match args.model {
        Model::Sphere => OracleModel::Sphere,
        Model::Hyperboloid => OracleModel::Hyperboloid,
    };
    let s_values = match args.s {
        Some(s) => {
            input(check_trust(s, DEFAULT_TRUST_S, out.allow_large_s))?;
            vec![s]
        }
        None => {
            input(check_trust(args.ladder.s_max, DEFAULT_TRUST_S, out.allow_large_s))?;
            input(ladder(args.ladder.s_max, args.ladder.levels))?
        }
    };
    let vertices = s_values
        .iter()
        .map(|&s| input(oracle_vertices(model, args.radius, s)))
        .collect::<Result<Vec<_>, _>>()?;
    let limits = oracle_gap_limits(model, args.radius);
    let order3 = if args.s.is_none() {
        let frame = input(OracleFrame::identity(model, args.radius))?;
        let fits = oracle_limits(&frame, &s_values)?;
        let expected = limits.ambient(&frame);
        Some(OracleLimits {
            deviation: fits
                .gap_i
                .limit
                .max_abs_diff(&expected)
                .max(fits.q2_minus_p2.limit.max_abs_diff(&expected)),
            gi: fits.gap_i,
            q2_minus_p2: fits.q2_minus_p2,
            expected,
        })
    } else {
        None
    };
    let mut header = vec!["s".to_string()];
    header.extend(indexed("GI", 3));
    header.extend(indexed("GII", 3));
    let rows = vertices
        .iter()
        .map(|q| {
            let mut row = vec![q.s];
            row.extend_from_slice(q.gap_i().as_slice());
            row.extend_from_slice(q.gap_ii().as_slice());
            row
        })
        .collect();
    let config = OracleConfig {
        model: args.model,
        radius: args.radius,
        s_values,
        allow_large_s: out.allow_large_s,
    };
    let result = OracleResult {
        kappa: limits.kappa,
        vertices,
        order3,
    };
    write_report("oracle", out, &config, &result, &Table { header, rows })
}

#[derive(Serialize)]
struct BpResult {
    chart: String,
    #[serde(flatten)]
    estimate: BertrandPuiseux,
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic_kappa: Option<f64>,
}

pub fn bertrand_puiseux_cmd(args: &BpArgs) -> CmdResult {
    let (spec, chart, cfg) = prepare(&args.site, &args.output)?;
    let radii = match &args.radii {
        Some(r) => r.0.clone(),
        None => (0..5).map(|k| 0.1 * 0.5f64.powi(k)).collect(),
    };
    for &r in &radii {
        input(check_trust(r, DEFAULT_TRUST_S, args.output.allow_large_s))?;
    }
    let p = &args.site.point.0;
    let estimate = bertrand_puiseux(&chart, p, &radii, args.directions, &cfg)?;
    let rows = estimate
        .r_values
        .iter()
        .zip(&estimate.circumferences)
        .zip(&estimate.deficits)
        .map(|((r, c), d)| vec![*r, *c, *d])
        .collect();
    let result = BpResult {
        chart: chart.name().to_string(),
        analytic_kappa: chart.gaussian_curvature(p).ok(),
        estimate,
    };
    let config = RunConfig {
        geometry: spec,
        point: args.site.point.clone(),
        u: None,
        v: None,
        s_values: Some(radii),
        steps_per_unit: cfg.steps_per_unit,
        allow_large_s: args.output.allow_large_s,
    };
    let table = Table {
        header: ["r", "circumference", "deficit_over_r3"].map(String::from).to_vec(),
        rows,
    };
    write_report("bertrand-puiseux", &args.output, &config, &result, &table)
}

#[derive(Serialize)]
struct FramePair {
    m: usize,
    n: usize,
    base: Vector,
    expected_base: Vector,
    base_deviation: f64,
    endomorphism: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_endomorphism: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertical_deviation: Option<f64>,
}

#[derive(Serialize)]
struct FrameResult {
    chart: String,
    frame: Vec<Vec<f64>>,
    step: f64,
    symmetric: bool,
    pairs: Vec<FramePair>,
    max_base_deviation: f64,
    max_vertical_deviation: Option<f64>,
}

#[derive(Serialize)]
struct FrameConfig {
    geometry: GeometrySpec,
    point: Components,
    frame: Option<Components>,
    step: f64,
}

pub fn frame_bracket(args: &FrameArgs) -> CmdResult {
    let (spec, chart, _) = prepare(&args.site, &args.output)?;
    let d = chart.dim();
    let x = args.site.point.0.clone();
    let y = match &args.frame {
        Some(f) => {
            if f.0.len() != d * d {
                return Err(CliError::Input(format!("--frame needs {} entries, got {}", d * d, f.0.len())));
            }
            input(FramePoint::new(&chart, x, input(Matrix::from_row_major(f.0.clone()))?))?
        }
        None if chart.has_metric() => input(FramePoint::orthonormal(&chart, x))?,
        None => input(FramePoint::new(&chart, x, Matrix::identity(d)))?,
    };
    let report = verify_frame_bracket(&chart, &y, args.step)?;
    let mut header: Vec<String> = vec!["m".into(), "n".into()];
    header.extend(indexed("base", d));
    header.extend(["base_deviation".into(), "vertical_deviation".into()]);
    let rows = report
        .pairs
        .iter()
        .map(|p| {
            let mut row = vec![(p.m + 1) as f64, (p.n + 1) as f64];
            row.extend_from_slice(p.bracket.base.as_slice());
            row.push(p.base_deviation);
            row.push(p.vertical_deviation.unwrap_or(f64::NAN));
            row
        })
        .collect();
    let result = FrameResult {
        chart: chart.name().to_string(),
        frame: y.frame.rows(),
        step: report.step,
        symmetric: report.symmetric,
        pairs: report
            .pairs
            .into_iter()
            .map(|p| FramePair {
                m: p.m + 1,
                n: p.n + 1,
                base: p.bracket.base,
                expected_base: p.expected_base,
                base_deviation: p.base_deviation,
                endomorphism: p.endomorphism.rows(),
                expected_endomorphism: p.expected_endomorphism.map(|e| e.rows()),
                vertical_deviation: p.vertical_deviation,
            })
            .collect(),
        max_base_deviation: report.max_base_deviation,
        max_vertical_deviation: report.max_vertical_deviation,
    };
    let config = FrameConfig {
        geometry: spec,
        point: args.site.point.clone(),
        frame: args.frame.clone(),
        step: args.step,
    };
    write_report("frame-bracket", &args.output, &config, &result, &Table { header, rows })
}

#[derive(Serialize)]
struct TaylorResult {
    chart: String,
    #[serde(flatten)]
    check: TaylorCheck,
}

pub fn taylor(args: &GapArgs) -> CmdResult {
    let (spec, chart, cfg) = prepare(&args.site, &args.output)?;
    let d = chart.dim();
    check_vector("u", &args.u, d)?;
    check_vector("v", &args.v, d)?;
    let s_values = taylor_ladder();
    let t = FrameTriple::new(args.site.point.0.clone(), args.u.0.clone(), args.v.0.clone());
    let check = taylor_check(&chart, &t, &s_values, &cfg)?;
    let rows = check
        .s_values
        .iter()
        .zip(&check.p2_errors)
        .zip(&check.q2_errors)
        .map(|((s, a), b)| vec![*s, *a, *b])
        .collect();
    let config = RunConfig {
        geometry: spec,
        point: args.site.point.clone(),
        u: Some(args.u.clone()),
        v: Some(args.v.clone()),
        s_values: Some(s_values),
        steps_per_unit: cfg.steps_per_unit,
        allow_large_s: args.output.allow_large_s,
    };
    let result = TaylorResult {
        chart: chart.name().to_string(),
        check,
    };
    let table = Table {
        header: ["s", "p2_error", "q2_error"].map(String::from).to_vec(),
        rows,
    };
    write_report("taylor-check", &args.output, &config, &result, &table)
}
