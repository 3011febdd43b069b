//! Limit extrapolation of gap ladders and recovery of torsion and curvature
//! from measured gaps, plus two independent estimators used as cross-checks:
//! geodesic-circle circumference deficits and the truncated Taylor expansion
//! of the second vertex.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::ConnectionChart;
use crate::error::{check_dim, Error, Result};
use crate::ode::{geodesic_transport, IntegratorConfig, TransportState};
use crate::quad::{quad_vertices, FrameTriple, QuadVertices};
use crate::tensor::{contract_gamma, Tensor3, Tensor4, Vector};

pub const DEFAULT_S_MAX: f64 = 0.1;
pub const DEFAULT_LEVELS: usize = 6;
/// Polynomial terms used by [`estimate_limit`] (capped at samples − 1).
pub const DEFAULT_FIT_TERMS: usize = 4;
pub const MAX_CONDITION: f64 = 1e12;
/// Largest torsion entry tolerated before curvature recovery is refused.
pub const TORSION_GUARD: f64 = 1e-3;
pub const MIN_DIRECTIONS: usize = 64;

/// Geometric ladder `s_max · 2^{−k}`, `k = 0..levels`.
pub fn ladder(s_max: f64, levels: usize) -> Result<Vec<f64>> {
    if !(s_max.is_finite() && s_max > 0.0) {
        return Err(Error::InvalidParameter(format!("s_max must be positive, got {s_max}")));
    }
    if levels < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 ladder levels, got {levels}")));
    }
    Ok((0..levels).map(|k| s_max * 0.5f64.powi(k as i32)).collect())
}

pub fn default_ladder() -> Vec<f64> {
    (0..DEFAULT_LEVELS).map(|k| DEFAULT_S_MAX * 0.5f64.powi(k as i32)).collect()
}

/// Result of extrapolating `gap(s)/s^order` to `s = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitFit {
    pub limit: Vector,
    /// Fitted coefficient of `s^{order+1}` in `gap(s)`.
    pub next_coeff: Vector,
    /// RMS of the fit residuals of `gap/s^order` over all samples and components.
    pub residual_rms: f64,
    /// Per-component change of the limit when one fewer term is fitted.
    pub limit_error: Vector,
    pub condition: f64,
    pub terms: usize,
}

struct PolyFit {
    coeffs: Vec<Vec<f64>>,
    residual_sq: f64,
    condition: f64,
}

fn poly_fit(t: &[f64], ys: &[Vec<f64>], terms: usize) -> Result<PolyFit> {
    let n = t.len();
    let a = DMatrix::from_fn(n, terms, |i, j| t[i].powi(j as i32));
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    let mut coeffs = Vec::with_capacity(ys.len());
    let mut residual_sq = 0.0;
    for y in ys {
        let b = DVector::from_column_slice(y);
        let c = svd
            .solve(&b, 0.0)
            .map_err(|e| Error::Fit(format!("least-squares solve failed: {e}")))?;
        let r = &a * &c - &b;
        residual_sq += r.norm_squared();
        coeffs.push(c.iter().copied().collect());
    }
    Ok(PolyFit {
        coeffs,
        residual_sq,
        condition,
    })
}

/// Extrapolates `lim_{s→0} gap(s)/s^order` with [`DEFAULT_FIT_TERMS`] terms.
pub fn estimate_limit(samples: &[(f64, Vector)], order: u32) -> Result<LimitFit> {
    estimate_limit_with(samples, order, DEFAULT_FIT_TERMS)
}

/// Componentwise least-squares fit of `gap(s)/s^order` by a polynomial in `s`
/// with `terms` coefficients (at most `samples − 1`); the constant term is the
/// limit. With `terms = 2` this is the straight-line fit `c_n + c_{n+1} s`.
pub fn estimate_limit_with(samples: &[(f64, Vector)], order: u32, terms: usize) -> Result<LimitFit> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::Fit(format!("need at least 3 samples, got {n}")));
    }
    if terms < 2 {
        return Err(Error::Fit(format!("need at least 2 fit terms, got {terms}")));
    }
    let terms = terms.min(n - 1);
    let d = samples[0].1.dim();
    let mut sorted: Vec<f64> = samples.iter().map(|(s, _)| s.abs()).collect();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == 0.0 || samples.iter().any(|(s, _)| !s.is_finite()) {
        return Err(Error::Fit("sample parameters must be finite and nonzero".into()));
    }
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Fit("sample parameters must be distinct".into()));
    }
    for (_, g) in samples {
        check_dim(d, g.dim())?;
        if !g.is_finite() {
            return Err(Error::NonFinite("gap sample"));
        }
    }
    let scale = sorted[n - 1];
    let t: Vec<f64> = samples.iter().map(|(s, _)| s / scale).collect();
    let ys: Vec<Vec<f64>> = (0..d)
        .map(|c| samples.iter().map(|(s, g)| g[c] / s.powi(order as i32)).collect())
        .collect();

    let full = poly_fit(&t, &ys, terms)?;
    let reduced = poly_fit(&t, &ys, terms - 1)?;
    let limit: Vector = full.coeffs.iter().map(|c| c[0]).collect();
    let next_coeff: Vector = full.coeffs.iter().map(|c| c[1] / scale).collect();
    let limit_error: Vector = full
        .coeffs
        .iter()
        .zip(&reduced.coeffs)
        .map(|(a, b)| (a[0] - b[0]).abs())
        .collect();
    let residual_rms = (full.residual_sq / (n * d.max(1)) as f64).sqrt();
    Ok(LimitFit {
        limit,
        next_coeff,
        residual_rms,
        limit_error,
        condition: full.condition,
        terms,
    })
}

/// Least-squares slope of `log |g(s)|` against `log s`; `None` when some
/// sample vanishes.
pub fn slope_estimate(samples: &[(f64, Vector)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|(s, g)| (s.abs().ln(), g.norm().ln()))
        .collect();
    if pts.len() < 2 || pts.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GapKind {
    #[serde(rename = "GI")]
    GI,
    #[serde(rename = "GII")]
    GII,
}

/// Quadrilaterals measured on a descending ladder of `s` values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapLadder {
    pub triple: FrameTriple,
    pub s_values: Vec<f64>,
    pub vertices: Vec<QuadVertices>,
}

/// Samples of one gap function with its extrapolated limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub kind: GapKind,
    pub order: u32,
    pub s_values: Vec<f64>,
    pub gaps: Vec<Vector>,
    pub limit: Vector,
    pub next_coeff: Vector,
    pub residual_rms: f64,
    pub limit_error: Vector,
    pub condition: f64,
    /// Log-log order of `|gap|` over the ladder.
    pub slope_estimate: Option<f64>,
}

fn descending(s_values: &[f64]) -> Result<Vec<f64>> {
    let mut s: Vec<f64> = s_values.to_vec();
    if s.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 ladder values, got {}",
            s.len()
        )));
    }
    if s.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidParameter("ladder values must be positive".into()));
    }
    s.sort_by(|a, b| b.total_cmp(a));
    if s.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter("ladder values must be distinct".into()));
    }
    Ok(s)
}

/// Builds the quadrilateral at every ladder value (in parallel, results kept
/// in descending `s` order).
pub fn gap_ladder(
    chart: &ConnectionChart,
    t: &FrameTriple,
    s_values: &[f64],
    cfg: &IntegratorConfig,
) -> Result<GapLadder> {
    t.validate(chart)?;
    let s_values = descending(s_values)?;
    let vertices = s_values
        .par_iter()
        .map(|&s| quad_vertices(chart, t, s, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(GapLadder {
        triple: t.clone(),
        s_values,
        vertices,
    })
}

impl GapLadder {
    pub fn gaps(&self, kind: GapKind) -> Vec<Vector> {
        self.vertices
            .iter()
            .map(|q| match kind {
                GapKind::GI => q.gap_i(),
                GapKind::GII => q.gap_ii(),
            })
            .collect()
    }

    pub fn samples(&self, kind: GapKind) -> Vec<(f64, Vector)> {
        self.s_values.iter().copied().zip(self.gaps(kind)).collect()
    }

    pub fn report(&self, kind: GapKind, order: u32) -> Result<GapReport> {
        let samples = self.samples(kind);
        let fit = estimate_limit(&samples, order)?;
        Ok(GapReport {
            kind,
            order,
            s_values: self.s_values.clone(),
            slope_estimate: slope_estimate(&samples),
            gaps: samples.into_iter().map(|(_, g)| g).collect(),
            limit: fit.limit,
            next_coeff: fit.next_coeff,
            residual_rms: fit.residual_rms,
            limit_error: fit.limit_error,
            condition: fit.condition,
        })
    }
}

/// Torsion recovered from order-2 gap limits, with per-entry uncertainty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorsionReconstruction {
    pub torsion: Tensor3,
    /// Larger of the extrapolation error and the `G_I`/`G_II` disagreement.
    pub residual: Tensor3,
}

/// `T(e_m, e_n) = −lim G_II/s²` for every coordinate pair `m < n`.
pub fn torsion_from_gaps(
    chart: &ConnectionChart,
    p: &[f64],
    s_values: &[f64],
    cfg: &IntegratorConfig,
) -> Result<TorsionReconstruction> {
    let d = chart.dim();
    check_dim(d, p.len())?;
    chart.domain().check(p)?;
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|m| (m + 1..d).map(move |n| (m, n))).collect();
    let limits = pairs
        .par_iter()
        .map(|&(m, n)| {
            let t = FrameTriple::new(p.to_vec(), Vector::basis(d, m), Vector::basis(d, n));
            let lad = gap_ladder(chart, &t, s_values, cfg)?;
            Ok((lad.report(GapKind::GI, 2)?, lad.report(GapKind::GII, 2)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut torsion = Tensor3::zeros(d);
    let mut residual = Tensor3::zeros(d);
    for (&(m, n), (gi, gii)) in pairs.iter().zip(&limits) {
        for i in 0..d {
            let v = -gii.limit[i];
            let r = gii.limit_error[i].max((gi.limit[i] - gii.limit[i]).abs());
            torsion[(i, m, n)] = v;
            torsion[(i, n, m)] = -v;
            residual[(i, m, n)] = r;
            residual[(i, n, m)] = r;
        }
    }
    Ok(TorsionReconstruction { torsion, residual })
}

/// Curvature recovered from order-3 gap limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReconstruction {
    pub curvature: Tensor4,
    /// Propagated extrapolation error per entry.
    pub residual: Tensor4,
    pub torsion: TorsionReconstruction,
}

fn vec_key(a: &Vector, b: &Vector) -> Vec<u64> {
    a.iter().chain(b.iter()).map(|x| x.to_bits()).collect()
}

/// Rebuilds `R^i_pqr` from `G(u,v) = R(u,v)(u+v) = 2 lim G_I/s³`.
///
/// `H(u,v) = R(u,v)u = ½G(2u,v) − G(u,v)`, and then
/// `3 R(u,v)w = −H(v+w,u) + H(v,u) + H(w,u) + H(u+w,v) − H(u,v) − H(w,v)`.
/// Refuses to run when the gap-measured torsion exceeds [`TORSION_GUARD`].
pub fn curvature_from_gaps(
    chart: &ConnectionChart,
    p: &[f64],
    s_values: &[f64],
    cfg: &IntegratorConfig,
) -> Result<CurvatureReconstruction> {
    let d = chart.dim();
    let torsion = torsion_from_gaps(chart, p, s_values, cfg)?;
    let tmax = torsion.torsion.max_abs();
    if tmax > TORSION_GUARD {
        return Err(Error::TorsionPresent {
            max: tmax,
            threshold: TORSION_GUARD,
        });
    }
    let e = |k: usize| Vector::basis(d, k);

    // (p, q, r) with q < r, and the six weighted H(a, b) terms each needs
    type Terms = Vec<(f64, Vector, Vector)>;
    let mut plan: Vec<((usize, usize, usize), Terms)> = Vec::new();
    for q in 0..d {
        for r in q + 1..d {
            for pp in 0..d {
                let (u, v, w) = (e(q), e(r), e(pp));
                let terms = vec![
                    (-1.0, &v + &w, u.clone()),
                    (1.0, v.clone(), u.clone()),
                    (1.0, w.clone(), u.clone()),
                    (1.0, &u + &w, v.clone()),
                    (-1.0, u.clone(), v.clone()),
                    (-1.0, w.clone(), v.clone()),
                ];
                plan.push(((pp, q, r), terms));
            }
        }
    }
    let mut needed: BTreeMap<Vec<u64>, (Vector, Vector)> = BTreeMap::new();
    for (_, terms) in &plan {
        for (_, a, b) in terms {
            let a2 = a.scaled(2.0);
            needed.insert(vec_key(&a2, b), (a2, b.clone()));
            needed.insert(vec_key(a, b), (a.clone(), b.clone()));
        }
    }
    let jobs: Vec<(Vec<u64>, (Vector, Vector))> = needed.into_iter().collect();
    let measured = jobs
        .par_iter()
        .map(|(_, (a, b))| {
            let t = FrameTriple::new(p.to_vec(), a.clone(), b.clone());
            let rep = gap_ladder(chart, &t, s_values, cfg)?.report(GapKind::GI, 3)?;
            Ok((rep.limit.scaled(2.0), rep.limit_error.scaled(2.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    let g: BTreeMap<&Vec<u64>, &(Vector, Vector)> =
        jobs.iter().map(|(k, _)| k).zip(&measured).collect();
    let lookup = |a: &Vector, b: &Vector| g[&vec_key(a, b)];

    let mut curvature = Tensor4::zeros(d);
    let mut residual = Tensor4::zeros(d);
    for ((pp, q, r), terms) in &plan {
        let mut val = Vector::zeros(d);
        let mut err = Vector::zeros(d);
        for (sign, a, b) in terms {
            let (g2, e2) = lookup(&a.scaled(2.0), b);
            let (g1, e1) = lookup(a, b);
            for i in 0..d {
                val[i] += sign * (0.5 * g2[i] - g1[i]);
                err[i] += 0.5 * e2[i] + e1[i];
            }
        }
        for i in 0..d {
            curvature[(i, *pp, *q, *r)] = val[i] / 3.0;
            curvature[(i, *pp, *r, *q)] = -val[i] / 3.0;
            residual[(i, *pp, *q, *r)] = err[i] / 3.0;
            residual[(i, *pp, *r, *q)] = err[i] / 3.0;
        }
    }
    Ok(CurvatureReconstruction {
        curvature,
        residual,
        torsion,
    })
}

/// Curvature estimate from the circumference of small geodesic circles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BertrandPuiseux {
    pub kappa: f64,
    pub kappa_error: f64,
    /// Extrapolated `lim (2πr − C(r))/r³`.
    pub limit: f64,
    pub n_directions: usize,
    pub r_values: Vec<f64>,
    pub circumferences: Vec<f64>,
    pub deficits: Vec<f64>,
}

/// `κ ≈ (3/π) lim (2πr − C(r))/r³`.
///
/// `C(r)` is the length of the polygon through the endpoints of
/// `n_directions` unit-speed geodesics of length `r`, each side measured with
/// the metric at its chart midpoint and rescaled by `(π/n)/sin(π/n)` so that a
/// flat circle is reproduced exactly.
pub fn bertrand_puiseux(
    chart: &ConnectionChart,
    p: &[f64],
    r_values: &[f64],
    n_directions: usize,
    cfg: &IntegratorConfig,
) -> Result<BertrandPuiseux> {
    if chart.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: chart.dim(),
        });
    }
    check_dim(2, p.len())?;
    if n_directions < MIN_DIRECTIONS {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_DIRECTIONS} directions, got {n_directions}"
        )));
    }
    let r_values = descending(r_values)?;
    let g0 = chart.metric(p)?;
    let e1 = Vector::basis(2, 0).scaled(1.0 / g0[(0, 0)].sqrt());
    let mut e2 = Vector::basis(2, 1);
    e2 = e2.axpy(-g0.bilinear(&e2, &e1), &e1);
    let e2 = e2.scaled(1.0 / g0.bilinear(&e2, &e2).sqrt());
    let n = n_directions;
    let correction = (PI / n as f64) / (PI / n as f64).sin();

    let mut circumferences = Vec::with_capacity(r_values.len());
    for &r in &r_values {
        let ends = (0..n)
            .into_par_iter()
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                let dir = e1.scaled(a.cos()).axpy(a.sin(), &e2);
                let st = TransportState::new(p.to_vec(), dir, vec![]);
                Ok(geodesic_transport(chart, &st, r, cfg)?.x)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut length = 0.0;
        for k in 0..n {
            let a = &ends[k];
            let b = &ends[(k + 1) % n];
            let mid = (a + b).scaled(0.5);
            let delta = b - a;
            length += chart.metric(&mid)?.bilinear(&delta, &delta).sqrt();
        }
        circumferences.push(length * correction);
    }
    let deficits: Vec<f64> = r_values
        .iter()
        .zip(&circumferences)
        .map(|(r, c)| (2.0 * PI * r - c) / r.powi(3))
        .collect();
    let samples: Vec<(f64, Vector)> = r_values
        .iter()
        .zip(&deficits)
        .map(|(&r, &y)| (r, Vector::from([y])))
        .collect();
    let fit = estimate_limit(&samples, 0)?;
    Ok(BertrandPuiseux {
        kappa: 3.0 * fit.limit[0] / PI,
        kappa_error: 3.0 * fit.limit_error[0] / PI,
        limit: fit.limit[0],
        n_directions,
        r_values,
        circumferences,
        deficits,
    })
}

/// Third-order Taylor polynomials of the vertices `P2(s)` and `Q2(s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorP2 {
    pub p2: Vector,
    pub q2: Vector,
}

/// `Γ^i_jk,l a^j b^k c^l`
fn contract_dgamma(dg: &Tensor4, a: &[f64], b: &[f64], c: &[f64]) -> Vector {
    let d = a.len();
    (0..d)
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        acc += dg[(i, j, k, l)] * a[j] * b[k] * c[l];
                    }
                }
            }
            acc
        })
        .collect()
}

/// Vertex reached by walking `s` along `a`, then `s` along the transported `b`,
/// through order `s³`, with `Γ(x,y)^i = Γ^i_jk x^j y^k` and
/// `∂Γ(x,y,z)^i = Γ^i_jk,l x^j y^k z^l` taken at the base point:
///
/// ```text
/// x0 + s(a+b) − s²/2 (Γ(a,a) + Γ(b,b)) − s² Γ(b,a)
///   + s³/6 (−∂Γ(a,a,a) + Γ(Γ(a,a),a) + Γ(a,Γ(a,a)))
///   + s³/2 (−∂Γ(b,a,a) + Γ(Γ(b,a),a) + Γ(b,Γ(a,a)))
///   − s³/2 ( ∂Γ(b,b,a) − Γ(Γ(b,a),b) − Γ(b,Γ(b,a)))
///   + s³/6 (−∂Γ(b,b,b) + Γ(Γ(b,b),b) + Γ(b,Γ(b,b)))
/// ```
fn second_vertex(x0: &[f64], a: &[f64], b: &[f64], g: &Tensor3, dg: &Tensor4, s: f64) -> Result<Vector> {
    let gm = |x: &[f64], y: &[f64]| contract_gamma(g, x, y);
    let gaa = gm(a, a)?;
    let gbb = gm(b, b)?;
    let gba = gm(b, a)?;
    let c3a = &(&gm(&gaa, a)? + &gm(a, &gaa)?) - &contract_dgamma(dg, a, a, a);
    let c3b = &(&gm(&gbb, b)? + &gm(b, &gbb)?) - &contract_dgamma(dg, b, b, b);
    let c21 = &(&gm(&gba, a)? + &gm(b, &gaa)?) - &contract_dgamma(dg, b, a, a);
    let c12 = &contract_dgamma(dg, b, b, a) - &(&gm(&gba, b)? + &gm(b, &gba)?);
    let (s2, s3) = (s * s, s * s * s);
    let mut out = Vector::from(x0);
    for i in 0..x0.len() {
        out[i] += s * (a[i] + b[i]) - 0.5 * s2 * (gaa[i] + gbb[i]) - s2 * gba[i]
            + s3 / 6.0 * (c3a[i] + c3b[i])
            + 0.5 * s3 * (c21[i] - c12[i]);
    }
    Ok(out)
}

/// Taylor polynomials of `P2(s)` (u first, then v) and `Q2(s)` (roles swapped).
pub fn taylor_p2(chart: &ConnectionChart, t: &FrameTriple, s: f64) -> Result<TaylorP2> {
    t.validate(chart)?;
    let g = chart.gamma(&t.p)?;
    let dg = chart
        .dgamma(&t.p)?
        .ok_or_else(|| Error::MissingDerivatives(chart.name().to_string()))?;
    Ok(TaylorP2 {
        p2: second_vertex(&t.p, &t.u, &t.v, &g, &dg, s)?,
        q2: second_vertex(&t.p, &t.v, &t.u, &g, &dg, s)?,
    })
}

/// Discrepancy between integrated and Taylor-predicted second vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorCheck {
    pub s_values: Vec<f64>,
    pub p2_errors: Vec<f64>,
    pub q2_errors: Vec<f64>,
    pub p2_slope: Option<f64>,
    pub q2_slope: Option<f64>,
}

/// Logarithmic ladder `10^{-3} … 10^{-1}` (9 points) used for Taylor checks.
pub fn taylor_ladder() -> Vec<f64> {
    (0..9).map(|k| 10f64.powf(-1.0 - k as f64 / 4.0)).collect()
}

pub fn taylor_check(
    chart: &ConnectionChart,
    t: &FrameTriple,
    s_values: &[f64],
    cfg: &IntegratorConfig,
) -> Result<TaylorCheck> {
    let s_values = descending(s_values)?;
    let errs = s_values
        .par_iter()
        .map(|&s| {
            let q = quad_vertices(chart, t, s, cfg)?;
            let tp = taylor_p2(chart, t, s)?;
            Ok((q.p2.max_abs_diff(&tp.p2), q.q2.max_abs_diff(&tp.q2)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (p2_errors, q2_errors): (Vec<f64>, Vec<f64>) = errs.into_iter().unzip();
    let slope = |e: &[f64]| {
        let samples: Vec<(f64, Vector)> =
            s_values.iter().zip(e).map(|(&s, &v)| (s, Vector::from([v]))).collect();
        slope_estimate(&samples)
    };
    Ok(TaylorCheck {
        p2_slope: slope(&p2_errors),
        q2_slope: slope(&q2_errors),
        s_values,
        p2_errors,
        q2_errors,
    })
}
