//! The frame bundle in coordinates `(x^i, ẋ^i_j)`, its basic vector fields
//! `ξ_m` and numerical Lie brackets between them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::{ConnectionChart, Domain};
use crate::error::{check_dim, Error, Result};
use crate::tensor::{contract_gamma, Matrix, Vector};

/// Frames with `|det| ≤ FRAME_DET_GUARD` are rejected.
pub const FRAME_DET_GUARD: f64 = 1e-9;
/// Default relative finite-difference step for brackets.
pub const DEFAULT_BRACKET_STEP: f64 = 1e-4;

/// A point of the frame bundle: base point and a frame whose column `j`
/// holds the components of `u_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FramePoint {
    pub x: Vector,
    pub frame: Matrix,
}

impl FramePoint {
    pub fn new(chart: &ConnectionChart, x: impl Into<Vector>, frame: Matrix) -> Result<Self> {
        let y = FramePoint { x: x.into(), frame };
        y.validate(chart)?;
        Ok(y)
    }

    pub fn validate(&self, chart: &ConnectionChart) -> Result<()> {
        check_dim(chart.dim(), self.x.dim())?;
        check_dim(chart.dim(), self.frame.dim())?;
        chart.domain().check(&self.x)?;
        if self.frame.determinant().abs() <= FRAME_DET_GUARD {
            return Err(Error::Singular("frame"));
        }
        Ok(())
    }

    /// Frame obtained by Gram–Schmidt on the coordinate basis with respect to
    /// the chart metric.
    pub fn orthonormal(chart: &ConnectionChart, x: impl Into<Vector>) -> Result<Self> {
        let x = x.into();
        let g = chart.metric(&x)?;
        let d = chart.dim();
        let mut cols: Vec<Vector> = Vec::with_capacity(d);
        for j in 0..d {
            let mut c = Vector::basis(d, j);
            for prev in &cols {
                c = c.axpy(-g.bilinear(&c, prev), prev);
            }
            let n = g.bilinear(&c, &c).sqrt();
            cols.push(c.scaled(1.0 / n));
        }
        Self::new(chart, x, Matrix::from_columns(&cols)?)
    }

    /// Flattened bundle coordinates `(x, frame row-major)`.
    pub fn to_coords(&self) -> Vec<f64> {
        let mut z = self.x.as_slice().to_vec();
        z.extend_from_slice(self.frame.as_slice());
        z
    }

    pub fn from_coords(d: usize, z: &[f64]) -> Result<Self> {
        check_dim(d + d * d, z.len())?;
        Ok(FramePoint {
            x: Vector::from(&z[..d]),
            frame: Matrix::from_row_major(z[d..].to_vec())?,
        })
    }
}

/// Tangent vector to the bundle split into its base part and its components
/// along `∂/∂ẋ^i_l` (stored at `[i][l]`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleVector {
    pub base: Vector,
    pub vert: Matrix,
}

impl BundleVector {
    fn to_coords(&self) -> Vec<f64> {
        let mut z = self.base.as_slice().to_vec();
        z.extend_from_slice(self.vert.as_slice());
        z
    }

    fn from_coords(d: usize, z: &[f64]) -> Result<Self> {
        Ok(BundleVector {
            base: Vector::from(&z[..d]),
            vert: Matrix::from_row_major(z[d..].to_vec())?,
        })
    }
}

/// `ξ_m = ẋ^i_m ∂_i − Γ^i_jk ẋ^j_l ẋ^k_m ∂/∂ẋ^i_l` at `y`.
pub fn xi_field(chart: &ConnectionChart, m: usize, y: &FramePoint) -> Result<BundleVector> {
    let d = chart.dim();
    if m >= d {
        return Err(Error::InvalidParameter(format!("field index {m} out of range for dimension {d}")));
    }
    check_dim(d, y.x.dim())?;
    check_dim(d, y.frame.dim())?;
    let gamma = chart.gamma(&y.x)?;
    let um = y.frame.column(m);
    let mut vert = Matrix::zeros(d);
    for l in 0..d {
        let c = contract_gamma(&gamma, &y.frame.column(l), &um)?;
        for i in 0..d {
            vert[(i, l)] = -c[i];
        }
    }
    Ok(BundleVector { base: um, vert })
}

/// `ξ_m` as a plain vector field on the flattened bundle coordinates.
pub fn xi_coords(chart: &ConnectionChart, m: usize, z: &[f64]) -> Result<Vector> {
    let y = FramePoint::from_coords(chart.dim(), z)?;
    Ok(Vector::from(xi_field(chart, m, &y)?.to_coords()))
}

/// Coordinate box of the bundle: the chart domain times unrestricted frames.
pub fn bundle_domain(chart: &ConnectionChart) -> Domain {
    let d = chart.dim();
    let mut bounds = chart.domain().bounds().to_vec();
    bounds.extend(std::iter::repeat((f64::NEG_INFINITY, f64::INFINITY)).take(d * d));
    Domain::new(bounds).unwrap_or_else(|_| Domain::unbounded(d + d * d))
}

/// Jacobian `∂_b ξ^a` by central differences with steps `h (1 + |z_b|)`.
fn jacobian(chart: &ConnectionChart, m: usize, z: &[f64], h: f64) -> Result<Vec<Vec<f64>>> {
    let n = z.len();
    let d = chart.dim();
    let mut cols = Vec::with_capacity(n);
    let mut zp = z.to_vec();
    for b in 0..n {
        let hb = h * (1.0 + z[b].abs());
        zp[b] = z[b] + hb;
        if b < d && !chart.domain().contains(&zp[..d]) {
            return Err(Error::StencilOutsideDomain { point: zp[..d].to_vec() });
        }
        let plus = xi_coords(chart, m, &zp)?;
        zp[b] = z[b] - hb;
        if b < d && !chart.domain().contains(&zp[..d]) {
            return Err(Error::StencilOutsideDomain { point: zp[..d].to_vec() });
        }
        let minus = xi_coords(chart, m, &zp)?;
        zp[b] = z[b];
        cols.push(plus.iter().zip(minus.iter()).map(|(p, q)| (p - q) / (2.0 * hb)).collect());
    }
    Ok(cols)
}

/// `[ξ_m, ξ_n]^a = ξ_m^b ∂_b ξ_n^a − ξ_n^b ∂_b ξ_m^a` over all `d + d²` bundle
/// coordinates, derivatives by central differences.
pub fn bracket_numeric(
    chart: &ConnectionChart,
    m: usize,
    n: usize,
    y: &FramePoint,
    h: f64,
) -> Result<BundleVector> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter(format!("bracket step must be positive, got {h}")));
    }
    y.validate(chart)?;
    let z = y.to_coords();
    let xm = xi_coords(chart, m, &z)?;
    let xn = xi_coords(chart, n, &z)?;
    let jm = jacobian(chart, m, &z, h)?;
    let jn = jacobian(chart, n, &z, h)?;
    let len = z.len();
    let out: Vec<f64> = (0..len)
        .map(|a| (0..len).map(|b| xm[b] * jn[b][a] - xn[b] * jm[b][a]).sum())
        .collect();
    BundleVector::from_coords(chart.dim(), &out)
}

/// Bracket of one pair of basic fields compared with torsion and curvature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairBracket {
    pub m: usize,
    pub n: usize,
    pub bracket: BundleVector,
    /// `−T(u_m, u_n)`
    pub expected_base: Vector,
    pub base_deviation: f64,
    /// Vertical part as an endomorphism, `vert · frame⁻¹`.
    pub endomorphism: Matrix,
    /// `−R(u_m, u_n)`, only for symmetric connections.
    pub expected_endomorphism: Option<Matrix>,
    pub vertical_deviation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBracketReport {
    pub point: FramePoint,
    pub step: f64,
    pub symmetric: bool,
    pub pairs: Vec<PairBracket>,
    pub max_base_deviation: f64,
    pub max_vertical_deviation: Option<f64>,
}

/// Checks `π_*[ξ_m, ξ_n] = −T(u_m, u_n)` for every pair and, when the
/// connection is symmetric at `x`, `[ξ_m, ξ_n] = −R(u_m, u_n)` with the
/// vertical part read through the frame.
pub fn verify_frame_bracket(chart: &ConnectionChart, y: &FramePoint, h: f64) -> Result<FrameBracketReport> {
    y.validate(chart)?;
    let d = chart.dim();
    let finv = y.frame.inverse()?;
    let torsion = chart.torsion_at(&y.x)?;
    let symmetric = torsion.max_abs() == 0.0;
    let curvature = if symmetric { Some(chart.curvature_at(&y.x)?) } else { None };
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|m| (m + 1..d).map(move |n| (m, n))).collect();
    let reports = pairs
        .par_iter()
        .map(|&(m, n)| {
            let bracket = bracket_numeric(chart, m, n, y, h)?;
            let um = y.frame.column(m);
            let un = y.frame.column(n);
            let expected_base = -contract_torsion(&torsion, &um, &un);
            let base_deviation = bracket.base.max_abs_diff(&expected_base);
            let endomorphism = bracket.vert.matmul(&finv)?;
            let expected_endomorphism = match &curvature {
                Some(r) => Some(r.operator(&um, &un)?.scaled(-1.0)),
                None => None,
            };
            let vertical_deviation = expected_endomorphism.as_ref().map(|e| endomorphism.max_abs_diff(e));
            Ok(PairBracket {
                m,
                n,
                bracket,
                expected_base,
                base_deviation,
                endomorphism,
                expected_endomorphism,
                vertical_deviation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_base_deviation = reports.iter().map(|p| p.base_deviation).fold(0.0, f64::max);
    let max_vertical_deviation = if symmetric {
        Some(reports.iter().filter_map(|p| p.vertical_deviation).fold(0.0, f64::max))
    } else {
        None
    };
    Ok(FrameBracketReport {
        point: y.clone(),
        step: h,
        symmetric,
        pairs: reports,
        max_base_deviation,
        max_vertical_deviation,
    })
}

/// `T(a, b)^i = T^i_mn a^m b^n`
fn contract_torsion(t: &crate::tensor::Tensor3, a: &[f64], b: &[f64]) -> Vector {
    contract_gamma(t, a, b).unwrap_or_else(|_| Vector::zeros(a.len()))
}
