//! Closed-form quadrilaterals on the round sphere and the hyperboloid model of
//! the hyperbolic plane, realized through the group of frames `(P, u, v)`.
//!
//! A frame is a 3×3 matrix whose columns are `P/r`, `u`, `v`. One step of the
//! quadrilateral with side `s` is right multiplication by `M(s/r)`, where `M` is
//! [`step_matrix`].

use serde::{Deserialize, Serialize};

use crate::analysis::{estimate_limit_with, LimitFit};
use crate::chart::ConnectionChart;
use crate::error::{Error, Result};
use crate::quad::QuadVertices;
use crate::tensor::{Matrix, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleModel {
    Sphere,
    Hyperboloid,
}

impl OracleModel {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "sphere" => Ok(OracleModel::Sphere),
            "hyperboloid" => Ok(OracleModel::Hyperboloid),
            other => Err(Error::UnknownGeometry(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OracleModel::Sphere => "sphere",
            OracleModel::Hyperboloid => "hyperboloid",
        }
    }

    /// The bilinear form preserved by frames: `I` or `η = diag(−1, 1, 1)`.
    pub fn form(self) -> Matrix {
        let mut m = Matrix::identity(3);
        if self == OracleModel::Hyperboloid {
            m[(0, 0)] = -1.0;
        }
        m
    }

    /// Gaussian curvature of the model of radius `r`.
    pub fn curvature(self, r: f64) -> f64 {
        match self {
            OracleModel::Sphere => 1.0 / (r * r),
            OracleModel::Hyperboloid => -1.0 / (r * r),
        }
    }

    /// The intrinsic chart of the same surface.
    pub fn chart(self, r: f64) -> Result<ConnectionChart> {
        match self {
            OracleModel::Sphere => ConnectionChart::sphere(r),
            OracleModel::Hyperboloid => ConnectionChart::hyperboloid(r),
        }
    }
}

const FRAME_TOL: f64 = 1e-12;
const SURFACE_TOL: f64 = 1e-9;

/// A frame `X` (columns `P/r`, `u`, `v`) on one of the model surfaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleFrame {
    pub x: Matrix,
    pub model: OracleModel,
    pub radius: f64,
}

impl OracleFrame {
    /// Checks `XᵀX = I`, `det X = 1` (sphere) or `XᵀηX = η`, `X₀₀ > 0` (hyperboloid).
    pub fn new(x: Matrix, model: OracleModel, radius: f64) -> Result<Self> {
        if x.dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                found: x.dim(),
            });
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
        }
        let form = model.form();
        let gram = x.transpose().matmul(&form)?.matmul(&x)?;
        let dev = gram.max_abs_diff(&form);
        if dev > FRAME_TOL {
            return Err(Error::InvalidParameter(format!(
                "frame does not preserve the {} form (deviation {dev:.3e})",
                model.name()
            )));
        }
        match model {
            OracleModel::Sphere if (x.determinant() - 1.0).abs() > FRAME_TOL => Err(
                Error::InvalidParameter("sphere frame must have determinant 1".into()),
            ),
            OracleModel::Hyperboloid if x[(0, 0)] <= 0.0 => Err(Error::InvalidParameter(
                "hyperboloid frame must be future-pointing".into(),
            )),
            _ => Ok(OracleFrame { x, model, radius }),
        }
    }

    pub fn identity(model: OracleModel, radius: f64) -> Result<Self> {
        Self::new(Matrix::identity(3), model, radius)
    }

    /// Hyperboloid frame boosted by `rapidity` in the `(t, x)` plane, so that
    /// its point sits at `ρ = r·rapidity`, `φ = 0` of the intrinsic chart.
    pub fn boosted(radius: f64, rapidity: f64) -> Result<Self> {
        let (c, s) = (rapidity.cosh(), rapidity.sinh());
        let x = Matrix::from_row_major(vec![c, s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0])?;
        Self::new(x, OracleModel::Hyperboloid, radius)
    }

    pub fn point(&self) -> Vector {
        self.x.column(0).scaled(self.radius)
    }

    pub fn u(&self) -> Vector {
        self.x.column(1)
    }

    pub fn v(&self) -> Vector {
        self.x.column(2)
    }
}

/// `A(s)` for the sphere, `B(s)` for the hyperboloid.
pub fn step_matrix(model: OracleModel, s: f64) -> Matrix {
    let rows = match model {
        OracleModel::Sphere => {
            let (c, sn) = (s.cos(), s.sin());
            [c, 0.0, sn, sn, 0.0, -c, 0.0, 1.0, 0.0]
        }
        OracleModel::Hyperboloid => {
            let (c, sn) = (s.cosh(), s.sinh());
            [c, 0.0, -sn, sn, 0.0, -c, 0.0, 1.0, 0.0]
        }
    };
    Matrix::from_fn(3, |i, j| rows[i * 3 + j])
}

/// Inverse step: `Aᵀ` or `η Bᵀ η`.
pub fn step_matrix_inverse(model: OracleModel, s: f64) -> Matrix {
    let m = step_matrix(model, s).transpose();
    match model {
        OracleModel::Sphere => m,
        OracleModel::Hyperboloid => {
            let eta = model.form();
            eta.matmul(&m).and_then(|x| x.matmul(&eta)).unwrap_or(m)
        }
    }
}

/// Quadrilateral vertices (ambient 3-vectors) starting from the identity frame.
pub fn oracle_vertices(model: OracleModel, radius: f64, s: f64) -> Result<QuadVertices> {
    oracle_vertices_from(&OracleFrame::identity(model, radius)?, s)
}

/// `P_i = r X M(s/r)^i e₁`, `Q_i = r X M(s/r)^{−i} e₁`, powers by repeated products.
pub fn oracle_vertices_from(frame: &OracleFrame, s: f64) -> Result<QuadVertices> {
    let r = frame.radius;
    let step = step_matrix(frame.model, s / r);
    let back = step_matrix_inverse(frame.model, s / r);
    let mut p = vec![frame.point()];
    let mut acc = frame.x.clone();
    for _ in 0..4 {
        acc = acc.matmul(&step)?;
        p.push(acc.column(0).scaled(r));
    }
    let mut q = Vec::with_capacity(2);
    let mut acc = frame.x.clone();
    for _ in 0..2 {
        acc = acc.matmul(&back)?;
        q.push(acc.column(0).scaled(r));
    }
    let mut p = p.into_iter();
    let mut q = q.into_iter();
    let mut next = move || p.next().unwrap_or_default();
    Ok(QuadVertices {
        s,
        p0: next(),
        p1: next(),
        p2: next(),
        p3: next(),
        p4: next(),
        q1: q.next().unwrap_or_default(),
        q2: q.next().unwrap_or_default(),
    })
}

/// `M(s) − M(0)` with `cos s − 1 = −2 sin²(s/2)` (and its hyperbolic
/// counterpart), so small entries keep full relative accuracy.
fn step_delta(model: OracleModel, s: f64) -> Matrix {
    let rows = match model {
        OracleModel::Sphere => {
            let cm1 = -2.0 * (s / 2.0).sin().powi(2);
            [cm1, 0.0, s.sin(), s.sin(), 0.0, -cm1, 0.0, 0.0, 0.0]
        }
        OracleModel::Hyperboloid => {
            let cm1 = 2.0 * (s / 2.0).sinh().powi(2);
            [cm1, 0.0, -s.sinh(), s.sinh(), 0.0, -cm1, 0.0, 0.0, 0.0]
        }
    };
    Matrix::from_fn(3, |i, j| rows[i * 3 + j])
}

/// `(M₀ + D)^n` split as `(M₀^n, (M₀ + D)^n − M₀^n)` without forming the
/// difference of two nearly equal products.
fn power_split(m0: &Matrix, d: &Matrix, n: usize) -> Result<(Matrix, Matrix)> {
    let mut base = Matrix::identity(3);
    let mut delta = Matrix::zeros(3);
    let full = m0 + d;
    for _ in 0..n {
        let next_delta = &delta.matmul(&full)? + &base.matmul(d)?;
        base = base.matmul(m0)?;
        delta = next_delta;
    }
    Ok((base, delta))
}

/// `G_I = P4 − P0` and `Q2 − P2` in ambient components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleGaps {
    pub s: f64,
    pub gap_i: Vector,
    pub q2_minus_p2: Vector,
}

/// The two gaps of the oracle quadrilateral, computed from the deviation of
/// each step matrix from its `s = 0` value. `M(0)⁴ = I` and
/// `M(0)² = M(0)⁻²`, so the leading products cancel exactly and the gaps keep
/// their relative accuracy as `s → 0`.
pub fn oracle_gaps(frame: &OracleFrame, s: f64) -> Result<OracleGaps> {
    let (model, r) = (frame.model, frame.radius);
    let h = s / r;
    let m0 = step_matrix(model, 0.0);
    let n0 = step_matrix_inverse(model, 0.0);
    let dm = step_delta(model, h);
    // Aᵀ − A₀ᵀ = Dᵀ and η Bᵀ η − η B₀ᵀ η = η Dᵀ η
    let dn = match model {
        OracleModel::Sphere => dm.transpose(),
        OracleModel::Hyperboloid => {
            let eta = model.form();
            eta.matmul(&dm.transpose())?.matmul(&eta)?
        }
    };
    let (_, p4) = power_split(&m0, &dm, 4)?;
    let (_, p2) = power_split(&m0, &dm, 2)?;
    let (_, q2) = power_split(&n0, &dn, 2)?;
    let e1 = [1.0, 0.0, 0.0];
    let lift = |m: &Matrix| -> Result<Vector> { Ok(frame.x.mul_vec(&m.mul_vec(&e1)?)?.scaled(r)) };
    Ok(OracleGaps {
        s,
        gap_i: lift(&p4)?,
        q2_minus_p2: lift(&(&q2 - &p2))?,
    })
}

/// Polynomial terms used when extrapolating exact oracle gaps. The data carry
/// no integration noise, so one more term than the ODE default pays off.
pub const ORACLE_FIT_TERMS: usize = 5;

/// Order-3 extrapolations of both oracle gaps over a ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleLimitFits {
    pub gaps: Vec<OracleGaps>,
    pub gap_i: LimitFit,
    pub q2_minus_p2: LimitFit,
}

pub fn oracle_limits(frame: &OracleFrame, s_values: &[f64]) -> Result<OracleLimitFits> {
    let gaps = s_values
        .iter()
        .map(|&s| oracle_gaps(frame, s))
        .collect::<Result<Vec<_>>>()?;
    let gi: Vec<(f64, Vector)> = gaps.iter().map(|g| (g.s, g.gap_i.clone())).collect();
    let qp: Vec<(f64, Vector)> = gaps.iter().map(|g| (g.s, g.q2_minus_p2.clone())).collect();
    Ok(OracleLimitFits {
        gap_i: estimate_limit_with(&gi, 3, ORACLE_FIT_TERMS)?,
        q2_minus_p2: estimate_limit_with(&qp, 3, ORACLE_FIT_TERMS)?,
        gaps,
    })
}

/// `lim (P4 − P0)/s³ = lim (Q2 − P2)/s³ = (κ/2)(u − v)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleGapLimits {
    pub kappa: f64,
    /// Coefficients of `u` and `v`.
    pub uv: [f64; 2],
}

impl OracleGapLimits {
    /// The limit as an ambient vector for the given frame.
    pub fn ambient(&self, frame: &OracleFrame) -> Vector {
        frame.u().scaled(self.uv[0]).axpy(self.uv[1], &frame.v())
    }

    /// The limit in chart components, given the chart images of `u` and `v`.
    pub fn in_chart(&self, u: &[f64], v: &[f64]) -> Vector {
        Vector::from(u).scaled(self.uv[0]).axpy(self.uv[1], v)
    }
}

pub fn oracle_gap_limits(model: OracleModel, radius: f64) -> OracleGapLimits {
    let kappa = model.curvature(radius);
    OracleGapLimits {
        kappa,
        uv: [kappa / 2.0, -kappa / 2.0],
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("radius must be positive, got {r}")))
    }
}

/// Chart coordinates of a point on the surface: `(θ, φ)` with the anchor
/// `(r, 0, 0) ↦ (π/2, 0)` for the sphere; `(ρ, φ)` with
/// `(t, x, y) = (r cosh(ρ/r), r sinh(ρ/r) cos φ, r sinh(ρ/r) sin φ)` for the hyperboloid.
pub fn ambient_to_chart(model: OracleModel, radius: f64, p: &[f64]) -> Result<Vector> {
    check_radius(radius)?;
    if p.len() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: p.len(),
        });
    }
    let r = radius;
    let coords = match model {
        OracleModel::Sphere => {
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            if (n - r).abs() > SURFACE_TOL * r.max(1.0) {
                return Err(Error::InvalidParameter(format!("point {p:?} is off the sphere of radius {r}")));
            }
            let theta = (p[2] / n).clamp(-1.0, 1.0).acos();
            Vector::from([theta, p[1].atan2(p[0])])
        }
        OracleModel::Hyperboloid => {
            let q = -p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            if (q + r * r).abs() > SURFACE_TOL * (r * r).max(1.0) || p[0] <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "point {p:?} is off the upper hyperboloid of radius {r}"
                )));
            }
            let rho = r * (p[1].hypot(p[2]) / r).asinh();
            Vector::from([rho, p[2].atan2(p[1])])
        }
    };
    model.chart(r)?.domain().check(&coords)?;
    Ok(coords)
}

pub fn chart_to_ambient(model: OracleModel, radius: f64, x: &[f64]) -> Result<Vector> {
    check_radius(radius)?;
    model.chart(radius)?.domain().check(x)?;
    let r = radius;
    let (a, phi) = (x[0], x[1]);
    Ok(match model {
        OracleModel::Sphere => Vector::from([
            r * a.sin() * phi.cos(),
            r * a.sin() * phi.sin(),
            r * a.cos(),
        ]),
        OracleModel::Hyperboloid => {
            let h = a / r;
            Vector::from([r * h.cosh(), r * h.sinh() * phi.cos(), r * h.sinh() * phi.sin()])
        }
    })
}

/// Ambient images of the coordinate vectors `∂₁`, `∂₂` at chart point `x`.
fn coordinate_frame(model: OracleModel, r: f64, x: &[f64]) -> [Vector; 2] {
    let (a, phi) = (x[0], x[1]);
    match model {
        OracleModel::Sphere => [
            Vector::from([r * a.cos() * phi.cos(), r * a.cos() * phi.sin(), -r * a.sin()]),
            Vector::from([-r * a.sin() * phi.sin(), r * a.sin() * phi.cos(), 0.0]),
        ],
        OracleModel::Hyperboloid => {
            let h = a / r;
            [
                Vector::from([h.sinh(), h.cosh() * phi.cos(), h.cosh() * phi.sin()]),
                Vector::from([0.0, -r * h.sinh() * phi.sin(), r * h.sinh() * phi.cos()]),
            ]
        }
    }
}

/// Pushes chart components of a tangent vector at `x` to the ambient space.
pub fn chart_vector_to_ambient(model: OracleModel, radius: f64, x: &[f64], w: &[f64]) -> Result<Vector> {
    model.chart(radius)?.domain().check(x)?;
    if w.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: w.len(),
        });
    }
    let [e1, e2] = coordinate_frame(model, radius, x);
    Ok(e1.scaled(w[0]).axpy(w[1], &e2))
}

/// Chart components of an ambient tangent vector at chart point `x`, by
/// projection onto the (orthogonal) coordinate vectors.
pub fn ambient_vector_to_chart(model: OracleModel, radius: f64, x: &[f64], w: &[f64]) -> Result<Vector> {
    model.chart(radius)?.domain().check(x)?;
    if w.len() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: w.len(),
        });
    }
    let form = model.form();
    let frame = coordinate_frame(model, radius, x);
    Ok(frame
        .iter()
        .map(|e| form.bilinear(w, e) / form.bilinear(e, e))
        .collect())
}
