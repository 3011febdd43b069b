//! The quadrilateral operator `T_s`, its inverse, the open geodesic
//! quadrilateral and the gap functions built from it.

use serde::{Deserialize, Serialize};

use crate::chart::{ConnectionChart, Domain};
use crate::error::{check_dim, Error, Result};
use crate::ode::{flow, geodesic_transport, IntegratorConfig, TransportState};
use crate::tensor::Vector;

/// Largest `|s|` accepted by the command line without an explicit override.
pub const DEFAULT_TRUST_S: f64 = 0.5;

/// A point together with two tangent vectors at it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameTriple {
    pub p: Vector,
    pub u: Vector,
    pub v: Vector,
}

impl FrameTriple {
    pub fn new(p: impl Into<Vector>, u: impl Into<Vector>, v: impl Into<Vector>) -> Self {
        FrameTriple {
            p: p.into(),
            u: u.into(),
            v: v.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn validate(&self, chart: &ConnectionChart) -> Result<()> {
        let d = chart.dim();
        check_dim(d, self.p.dim())?;
        check_dim(d, self.u.dim())?;
        check_dim(d, self.v.dim())?;
        if !self.u.is_finite() || !self.v.is_finite() {
            return Err(Error::NonFinite("tangent vector"));
        }
        chart.domain().check(&self.p)
    }

    /// `(P, λu, λv)`
    pub fn scaled(&self, lambda: f64) -> Self {
        FrameTriple {
            p: self.p.clone(),
            u: self.u.scaled(lambda),
            v: self.v.scaled(lambda),
        }
    }
}

/// Vertices of the open quadrilateral: `P_n` is the location of `T_s^n(P,u,v)`
/// and `Q_n` that of `T_s^{-n}(P,u,v)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadVertices {
    pub s: f64,
    pub p0: Vector,
    pub p1: Vector,
    pub p2: Vector,
    pub p3: Vector,
    pub p4: Vector,
    pub q1: Vector,
    pub q2: Vector,
}

impl QuadVertices {
    /// `G_I = P4 − P0`
    pub fn gap_i(&self) -> Vector {
        &self.p4 - &self.p0
    }

    /// `G_II = P2 − Q2`
    pub fn gap_ii(&self) -> Vector {
        &self.p2 - &self.q2
    }

    pub fn all(&self) -> [&Vector; 7] {
        [&self.p0, &self.p1, &self.p2, &self.p3, &self.p4, &self.q1, &self.q2]
    }

    pub fn max_abs_diff(&self, other: &QuadVertices) -> f64 {
        self.all()
            .iter()
            .zip(other.all())
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

/// `(P, u, v) ↦ (γ(s), v(s), −u(s))` where `γ` is the geodesic with
/// `γ̇(0) = u` and `u(s) = γ̇(s)`, `v(s)` are parallel along it.
pub fn apply_t(
    chart: &ConnectionChart,
    t: &FrameTriple,
    s: f64,
    cfg: &IntegratorConfig,
) -> Result<FrameTriple> {
    t.validate(chart)?;
    let start = TransportState::new(t.p.clone(), t.u.clone(), vec![t.v.clone()]);
    let end = geodesic_transport(chart, &start, s, cfg)?;
    let TransportState {
        x,
        tangent,
        mut carried,
    } = end;
    Ok(FrameTriple {
        p: x,
        u: carried.remove(0),
        v: -tangent,
    })
}

/// Inverse of [`apply_t`]: follow the geodesic with initial velocity `v` for
/// parameter `s`, carrying `u`; return `(endpoint, −γ̇(s), u(s))`.
pub fn apply_t_inv(
    chart: &ConnectionChart,
    t: &FrameTriple,
    s: f64,
    cfg: &IntegratorConfig,
) -> Result<FrameTriple> {
    t.validate(chart)?;
    let start = TransportState::new(t.p.clone(), t.v.clone(), vec![t.u.clone()]);
    let end = geodesic_transport(chart, &start, s, cfg)?;
    let TransportState {
        x,
        tangent,
        mut carried,
    } = end;
    Ok(FrameTriple {
        p: x,
        u: -tangent,
        v: carried.remove(0),
    })
}

const FORWARD_LEGS: [&str; 4] = ["P0->P1", "P1->P2", "P2->P3", "P3->P4"];
const BACKWARD_LEGS: [&str; 2] = ["P0->Q1", "Q1->Q2"];

pub fn quad_vertices(
    chart: &ConnectionChart,
    t: &FrameTriple,
    s: f64,
    cfg: &IntegratorConfig,
) -> Result<QuadVertices> {
    t.validate(chart)?;
    let mut forward = Vec::with_capacity(5);
    forward.push(t.p.clone());
    let mut cur = t.clone();
    for leg in FORWARD_LEGS {
        cur = apply_t(chart, &cur, s, cfg).map_err(|e| Error::leg(leg, e))?;
        forward.push(cur.p.clone());
    }
    let mut backward = Vec::with_capacity(2);
    let mut cur = t.clone();
    for leg in BACKWARD_LEGS {
        cur = apply_t_inv(chart, &cur, s, cfg).map_err(|e| Error::leg(leg, e))?;
        backward.push(cur.p.clone());
    }
    let mut f = forward.into_iter();
    let mut b = backward.into_iter();
    let mut next = move || f.next().unwrap_or_default();
    Ok(QuadVertices {
        s,
        p0: next(),
        p1: next(),
        p2: next(),
        p3: next(),
        p4: next(),
        q1: b.next().unwrap_or_default(),
        q2: b.next().unwrap_or_default(),
    })
}

/// `G_I(s) = P4(s) − P0` in chart coordinates.
pub fn gap_gi(chart: &ConnectionChart, t: &FrameTriple, s: f64, cfg: &IntegratorConfig) -> Result<Vector> {
    Ok(quad_vertices(chart, t, s, cfg)?.gap_i())
}

/// `G_II(s) = P2(s) − Q2(s)` in chart coordinates.
pub fn gap_gii(chart: &ConnectionChart, t: &FrameTriple, s: f64, cfg: &IntegratorConfig) -> Result<Vector> {
    Ok(quad_vertices(chart, t, s, cfg)?.gap_ii())
}

/// Rejects `|s|` beyond `trust` unless `allow_large` is set.
pub fn check_trust(s: f64, trust: f64, allow_large: bool) -> Result<()> {
    if !s.is_finite() {
        return Err(Error::NonFinite("step parameter"));
    }
    if s.abs() > trust && !allow_large {
        return Err(Error::InvalidParameter(format!(
            "|s| = {} exceeds the trusted range {trust}; pass an explicit override to proceed",
            s.abs()
        )));
    }
    Ok(())
}

/// `F_I(s) = ψ_{−s} φ_{−s} ψ_s φ_s (x0) − x0` for the flows `φ` of `xi` and `ψ` of `eta`.
pub fn flow_gap_fi<F, G>(
    xi: F,
    eta: G,
    domain: Option<&Domain>,
    x0: &[f64],
    s: f64,
    cfg: &IntegratorConfig,
) -> Result<Vector>
where
    F: Fn(&[f64]) -> Result<Vector>,
    G: Fn(&[f64]) -> Result<Vector>,
{
    let p1 = flow(&xi, domain, x0, s, cfg).map_err(|e| Error::leg("P0->P1", e))?;
    let p2 = flow(&eta, domain, &p1, s, cfg).map_err(|e| Error::leg("P1->P2", e))?;
    let p3 = flow(&xi, domain, &p2, -s, cfg).map_err(|e| Error::leg("P2->P3", e))?;
    let p4 = flow(&eta, domain, &p3, -s, cfg).map_err(|e| Error::leg("P3->P4", e))?;
    Ok(&p4 - &Vector::from(x0))
}

/// `F_II(s) = ψ_s φ_s (x0) − φ_s ψ_s (x0)`.
pub fn flow_gap_fii<F, G>(
    xi: F,
    eta: G,
    domain: Option<&Domain>,
    x0: &[f64],
    s: f64,
    cfg: &IntegratorConfig,
) -> Result<Vector>
where
    F: Fn(&[f64]) -> Result<Vector>,
    G: Fn(&[f64]) -> Result<Vector>,
{
    let p1 = flow(&xi, domain, x0, s, cfg).map_err(|e| Error::leg("P0->P1", e))?;
    let p2 = flow(&eta, domain, &p1, s, cfg).map_err(|e| Error::leg("P1->P2", e))?;
    let q1 = flow(&eta, domain, x0, s, cfg).map_err(|e| Error::leg("P0->Q1", e))?;
    let q2 = flow(&xi, domain, &q1, s, cfg).map_err(|e| Error::leg("Q1->Q2", e))?;
    Ok(&p2 - &q2)
}
