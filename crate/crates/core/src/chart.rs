//! Coordinate charts carrying an affine connection.
//!
//! Convention: `Γ^i_jk` is stored at `[i][j][k]` with `∇_{∂k} ∂j = Γ^i_jk ∂i`.
//! Derivatives `Γ^i_jk,l` are stored at `[i][j][k][l]`, and curvature is
//! `(R(u,v)w)^i = R^i_pqr w^p u^q v^r` with
//! `R^i_pqr = Γ^i_pr,q − Γ^i_pq,r + Γ^i_jq Γ^j_pr − Γ^i_jr Γ^j_pq`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::expr::{parse, Expr};
use crate::tensor::{check_supported, Matrix, Tensor3, Tensor4};

/// Relative step of the central differences used when a chart has no
/// analytic Christoffel derivatives: `h = FD_STEP · (1 + |x_l|)`.
pub const FD_STEP: f64 = 1e-5;

/// Open coordinate box. Infinite bounds mean the coordinate is unrestricted.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    bounds: Vec<(f64, f64)>,
}

impl Domain {
    pub fn unbounded(d: usize) -> Self {
        Domain {
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); d],
        }
    }

    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        for &(lo, hi) in &bounds {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(Error::InvalidParameter(format!(
                    "empty coordinate interval ({lo}, {hi})"
                )));
            }
        }
        Ok(Domain { bounds })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.check(x).is_ok()
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        for (coord, (&xi, &(lo, hi))) in x.iter().zip(&self.bounds).enumerate() {
            if !xi.is_finite() {
                return Err(Error::NonFinite("chart coordinate"));
            }
            if xi <= lo || xi >= hi {
                return Err(Error::OutsideDomain {
                    point: x.to_vec(),
                    coord,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }
}

/// JSON form of a domain: one `[lo, hi]` pair per coordinate, `null` for an
/// unbounded side.
impl Serialize for Domain {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[Option<f64>; 2]> = self
            .bounds
            .iter()
            .map(|&(lo, hi)| [lo.is_finite().then_some(lo), hi.is_finite().then_some(hi)])
            .collect();
        pairs.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[Option<f64>; 2]> = Vec::deserialize(de)?;
        let bounds = pairs
            .into_iter()
            .map(|[lo, hi]| (lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY)))
            .collect();
        Domain::new(bounds).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug)]
enum Field {
    Zero,
    Constant(Tensor3),
    /// Christoffel symbols given directly; `None` entries are zero.
    Expressions {
        gamma: Vec<Option<Expr>>,
        dgamma: Vec<Option<Expr>>,
    },
    /// Levi-Civita connection of a metric, with its first and second partials.
    LeviCivita(Box<MetricExprs>),
}

#[derive(Clone, Debug)]
struct MetricExprs {
    /// `g_ab` at `[a][b]`.
    g: Vec<Expr>,
    /// `∂_m g_ab` at `[a][b][m]`.
    dg: Vec<Expr>,
    /// `∂_n ∂_m g_ab` at `[a][b][m][n]`.
    ddg: Vec<Expr>,
}

/// A single chart with a Christoffel field, optional metric and domain.
#[derive(Clone, Debug)]
pub struct ConnectionChart {
    name: String,
    dim: usize,
    domain: Domain,
    field: Field,
    analytic_derivatives: bool,
}

fn eval_all(exprs: &[Expr], x: &[f64]) -> Result<Vec<f64>> {
    exprs.iter().map(|e| e.eval(x).map_err(Error::from)).collect()
}

impl ConnectionChart {
    /// Flat space in Cartesian coordinates.
    pub fn euclidean(d: usize) -> Result<Self> {
        check_supported(d)?;
        Ok(ConnectionChart {
            name: format!("euclidean({d})"),
            dim: d,
            domain: Domain::unbounded(d),
            field: Field::Zero,
            analytic_derivatives: true,
        })
    }

    /// Round sphere of radius `r` in the chart `(θ, φ)`, metric
    /// `r²(dθ² + sin²θ dφ²)`, with the polar caps `θ ≤ 0.2`, `θ ≥ π − 0.2` removed.
    pub fn sphere(r: f64) -> Result<Self> {
        check_radius(r)?;
        let r2 = r * r;
        let g = [
            ("1,1", format!("{r2:?}")),
            ("2,2", format!("{r2:?}*sin(x1)^2")),
        ];
        let domain = Domain::new(vec![(0.2, PI - 0.2), (f64::NEG_INFINITY, f64::INFINITY)])?;
        let mut chart = Self::levi_civita_from_strings(2, g.iter().map(|(k, v)| (*k, v.as_str())), domain)?;
        chart.name = format!("sphere(r={r:?})");
        Ok(chart)
    }

    /// Hyperbolic plane of curvature `−1/r²` in geodesic polar coordinates
    /// `(ρ, φ)`, metric `dρ² + r² sinh²(ρ/r) dφ²`, `ρ ∈ (0.05, 4)`.
    pub fn hyperboloid(r: f64) -> Result<Self> {
        check_radius(r)?;
        let g = [
            ("1,1", "1".to_string()),
            ("2,2", format!("{:?}*sinh(x1/{r:?})^2", r * r)),
        ];
        let domain = Domain::new(vec![(0.05, 4.0), (f64::NEG_INFINITY, f64::INFINITY)])?;
        let mut chart = Self::levi_civita_from_strings(2, g.iter().map(|(k, v)| (*k, v.as_str())), domain)?;
        chart.name = format!("hyperboloid(r={r:?})");
        Ok(chart)
    }

    /// Two-dimensional flat-torsion connection whose only nonzero coefficient
    /// is `Γ¹₁₂ = c`.
    pub fn constant_torsion(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::InvalidParameter(format!("torsion coefficient {c}")));
        }
        let mut gamma = Tensor3::zeros(2);
        gamma[(0, 0, 1)] = c;
        Ok(ConnectionChart {
            name: format!("constant_torsion(c={c:?})"),
            dim: 2,
            domain: Domain::unbounded(2),
            field: Field::Constant(gamma),
            analytic_derivatives: true,
        })
    }

    /// Constant Christoffel symbols on all of `R^d`.
    pub fn constant(gamma: Tensor3) -> Result<Self> {
        check_supported(gamma.dim())?;
        if gamma.as_slice().iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("constant Christoffel symbols"));
        }
        let d = gamma.dim();
        Ok(ConnectionChart {
            name: "constant".into(),
            dim: d,
            domain: Domain::unbounded(d),
            field: Field::Constant(gamma),
            analytic_derivatives: true,
        })
    }

    /// Christoffel symbols from expressions. Keys are 1-based `(i, j, k)`
    /// triples for `Γ^i_jk`; omitted entries are zero.
    pub fn from_gamma_exprs(
        d: usize,
        entries: impl IntoIterator<Item = ((usize, usize, usize), Expr)>,
        domain: Domain,
    ) -> Result<Self> {
        check_supported(d)?;
        check_dim(d, domain.dim())?;
        let mut gamma: Vec<Option<Expr>> = vec![None; d * d * d];
        for ((i, j, k), e) in entries {
            for idx in [i, j, k] {
                if idx == 0 || idx > d {
                    return Err(Error::InvalidParameter(format!(
                        "Christoffel index ({i},{j},{k}) out of range for dimension {d}"
                    )));
                }
            }
            check_vars(&e, d)?;
            let slot = &mut gamma[((i - 1) * d + (j - 1)) * d + (k - 1)];
            if slot.is_some() {
                return Err(Error::InvalidParameter(format!("duplicate entry ({i},{j},{k})")));
            }
            if !e.is_zero() {
                *slot = Some(e);
            }
        }
        let mut dgamma = Vec::with_capacity(d * d * d * d);
        for g in &gamma {
            for l in 0..d {
                dgamma.push(g.as_ref().map(|e| e.diff(l)).filter(|e| !e.is_zero()));
            }
        }
        Ok(ConnectionChart {
            name: "custom".into(),
            dim: d,
            domain,
            field: Field::Expressions { gamma, dgamma },
            analytic_derivatives: true,
        })
    }

    /// Levi-Civita connection of a metric given by expressions. Keys are
    /// 1-based `(a, b)` pairs; an off-diagonal entry given once is mirrored.
    pub fn levi_civita(
        d: usize,
        entries: impl IntoIterator<Item = ((usize, usize), Expr)>,
        domain: Domain,
    ) -> Result<Self> {
        check_supported(d)?;
        check_dim(d, domain.dim())?;
        let mut g: Vec<Option<Expr>> = vec![None; d * d];
        for ((a, b), e) in entries {
            if a == 0 || b == 0 || a > d || b > d {
                return Err(Error::InvalidParameter(format!(
                    "metric index ({a},{b}) out of range for dimension {d}"
                )));
            }
            check_vars(&e, d)?;
            for (p, q) in [(a - 1, b - 1), (b - 1, a - 1)] {
                match &g[p * d + q] {
                    Some(prev) if *prev != e => {
                        return Err(Error::InvalidParameter(format!(
                            "metric entries ({a},{b}) and ({b},{a}) differ"
                        )))
                    }
                    _ => g[p * d + q] = Some(e.clone()),
                }
            }
        }
        let g: Vec<Expr> = g.into_iter().map(|e| e.unwrap_or(Expr::Num(0.0))).collect();
        let dg: Vec<Expr> = g.iter().flat_map(|e| (0..d).map(move |m| e.diff(m))).collect();
        let ddg: Vec<Expr> = dg.iter().flat_map(|e| (0..d).map(move |n| e.diff(n))).collect();
        Ok(ConnectionChart {
            name: "metric".into(),
            dim: d,
            domain,
            field: Field::LeviCivita(Box::new(MetricExprs { g, dg, ddg })),
            analytic_derivatives: true,
        })
    }

    fn levi_civita_from_strings<'a>(
        d: usize,
        entries: impl IntoIterator<Item = (&'a str, &'a str)>,
        domain: Domain,
    ) -> Result<Self> {
        let mut parsed = Vec::new();
        for (key, src) in entries {
            let idx = parse_index(key, 2)?;
            parsed.push(((idx[0], idx[1]), parse(src, d)?));
        }
        Self::levi_civita(d, parsed, domain)
    }

    /// Resolves a catalog name. Recognized parameters: `dim` (euclidean),
    /// `radius` (sphere, hyperboloid), `c` (constant_torsion).
    pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match name {
            "euclidean" => &["dim"],
            "sphere" | "hyperboloid" => &["radius"],
            "constant_torsion" => &["c"],
            _ => return Err(Error::UnknownGeometry(name.to_string())),
        };
        if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!(
                "`{name}` does not take parameter `{bad}`"
            )));
        }
        let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
        match name {
            "euclidean" => {
                let d = get("dim", 2.0);
                if d.fract() != 0.0 || d < 1.0 {
                    return Err(Error::InvalidParameter(format!("dimension {d}")));
                }
                Self::euclidean(d as usize)
            }
            "sphere" => Self::sphere(get("radius", 1.0)),
            "hyperboloid" => Self::hyperboloid(get("radius", 1.0)),
            _ => {
                let c = params.get("c").copied().ok_or_else(|| {
                    Error::InvalidParameter("constant_torsion needs parameter `c`".into())
                })?;
                Self::constant_torsion(c)
            }
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Same connection, but Christoffel derivatives are taken by central
    /// differences instead of symbolically.
    pub fn without_derivatives(mut self) -> Self {
        self.analytic_derivatives = false;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn has_metric(&self) -> bool {
        matches!(self.field, Field::Zero | Field::LeviCivita(_))
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.analytic_derivatives
    }

    /// Symmetric by construction (Levi-Civita, flat, or with expressions /
    /// constants that are symmetric in the lower indices).
    pub fn is_structurally_symmetric(&self) -> bool {
        let d = self.dim;
        let sym = |f: &dyn Fn(usize, usize, usize) -> bool| {
            (0..d).all(|i| (0..d).all(|j| (0..j).all(|k| f(i, j, k))))
        };
        match &self.field {
            Field::Zero | Field::LeviCivita(_) => true,
            Field::Constant(g) => sym(&|i, j, k| g[(i, j, k)] == g[(i, k, j)]),
            Field::Expressions { gamma, .. } => {
                sym(&|i, j, k| gamma[(i * d + j) * d + k] == gamma[(i * d + k) * d + j])
            }
        }
    }

    /// Christoffel symbols at `x`.
    pub fn gamma(&self, x: &[f64]) -> Result<Tensor3> {
        self.domain.check(x)?;
        let g = self.gamma_unchecked(x)?;
        if g.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Christoffel symbols"));
        }
        Ok(g)
    }

    fn gamma_unchecked(&self, x: &[f64]) -> Result<Tensor3> {
        let d = self.dim;
        match &self.field {
            Field::Zero => Ok(Tensor3::zeros(d)),
            Field::Constant(g) => Ok(g.clone()),
            Field::Expressions { gamma, .. } => {
                let mut out = Tensor3::zeros(d);
                for (slot, e) in out.as_mut_slice().iter_mut().zip(gamma) {
                    if let Some(e) = e {
                        *slot = e.eval(x)?;
                    }
                }
                Ok(out)
            }
            Field::LeviCivita(m) => {
                let parts = MetricParts::eval(m, d, x, false)?;
                Ok(parts.gamma())
            }
        }
    }

    /// Symbolic Christoffel derivatives `Γ^i_jk,l` at `x`, when available.
    pub fn dgamma(&self, x: &[f64]) -> Result<Option<Tensor4>> {
        if !self.analytic_derivatives {
            return Ok(None);
        }
        self.domain.check(x)?;
        let d = self.dim;
        let out = match &self.field {
            Field::Zero | Field::Constant(_) => Tensor4::zeros(d),
            Field::Expressions { dgamma, .. } => {
                let mut out = Tensor4::zeros(d);
                for (slot, e) in out.as_mut_slice().iter_mut().zip(dgamma) {
                    if let Some(e) = e {
                        *slot = e.eval(x)?;
                    }
                }
                out
            }
            Field::LeviCivita(m) => MetricParts::eval(m, d, x, true)?.dgamma(),
        };
        if out.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Christoffel derivatives"));
        }
        Ok(Some(out))
    }

    /// `Γ^i_jk,l` at `x`: symbolic when available, otherwise central
    /// differences with step `FD_STEP · (1 + |x_l|)`.
    pub fn gamma_derivatives(&self, x: &[f64]) -> Result<Tensor4> {
        if let Some(dg) = self.dgamma(x)? {
            return Ok(dg);
        }
        self.domain.check(x)?;
        let d = self.dim;
        let mut out = Tensor4::zeros(d);
        let mut xp = x.to_vec();
        for l in 0..d {
            let h = FD_STEP * (1.0 + x[l].abs());
            xp[l] = x[l] + h;
            let plus = self.stencil_gamma(&xp)?;
            xp[l] = x[l] - h;
            let minus = self.stencil_gamma(&xp)?;
            xp[l] = x[l];
            for ijk in 0..d * d * d {
                out.as_mut_slice()[ijk * d + l] =
                    (plus.as_slice()[ijk] - minus.as_slice()[ijk]) / (2.0 * h);
            }
        }
        Ok(out)
    }

    fn stencil_gamma(&self, x: &[f64]) -> Result<Tensor3> {
        if !self.domain.contains(x) {
            return Err(Error::StencilOutsideDomain { point: x.to_vec() });
        }
        self.gamma(x)
    }

    /// Metric `g_ab` at `x`. Flat charts carry the identity metric.
    pub fn metric(&self, x: &[f64]) -> Result<Matrix> {
        let m = match &self.field {
            Field::LeviCivita(m) => m,
            Field::Zero => {
                self.domain.check(x)?;
                return Ok(Matrix::identity(self.dim));
            }
            _ => return Err(Error::NoMetric(self.name.clone())),
        };
        self.domain.check(x)?;
        let g = eval_all(&m.g, x)?;
        Matrix::from_row_major(g)
    }

    /// `T^i_mn = Γ^i_nm − Γ^i_mn`.
    pub fn torsion_at(&self, x: &[f64]) -> Result<Tensor3> {
        let g = self.gamma(x)?;
        Ok(torsion_of(&g))
    }

    pub fn curvature_at(&self, x: &[f64]) -> Result<Tensor4> {
        let g = self.gamma(x)?;
        let dg = self.gamma_derivatives(x)?;
        Ok(curvature_of(&g, &dg))
    }

    /// `κ = g(R(e1,e2)e2, e1) / det g` for two-dimensional metric charts.
    pub fn gaussian_curvature(&self, x: &[f64]) -> Result<f64> {
        if self.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: self.dim,
            });
        }
        let g = self.metric(x)?;
        let r = self.curvature_at(x)?;
        let num = (0..2).map(|i| g[(0, i)] * r[(i, 1, 0, 1)]).sum::<f64>();
        let det = g.determinant();
        if det == 0.0 {
            return Err(Error::Singular("metric"));
        }
        Ok(num / det)
    }
}

/// `T^i_mn = Γ^i_nm − Γ^i_mn`.
pub fn torsion_of(gamma: &Tensor3) -> Tensor3 {
    Tensor3::from_fn(gamma.dim(), |i, m, n| gamma[(i, n, m)] - gamma[(i, m, n)])
}

/// Curvature from Christoffel symbols and their derivatives.
pub fn curvature_of(gamma: &Tensor3, dgamma: &Tensor4) -> Tensor4 {
    let d = gamma.dim();
    Tensor4::from_fn(d, |i, p, q, r| {
        let mut v = dgamma[(i, p, r, q)] - dgamma[(i, p, q, r)];
        for j in 0..d {
            v += gamma[(i, j, q)] * gamma[(j, p, r)] - gamma[(i, j, r)] * gamma[(j, p, q)];
        }
        v
    })
}

/// Numeric ingredients of a Levi-Civita connection at one point.
struct MetricParts {
    d: usize,
    ginv: Matrix,
    dg: Vec<f64>,
    ddg: Vec<f64>,
}

impl MetricParts {
    fn eval(m: &MetricExprs, d: usize, x: &[f64], second: bool) -> Result<Self> {
        let g = Matrix::from_row_major(eval_all(&m.g, x)?)?;
        let ginv = g.inverse().map_err(|_| Error::Singular("metric"))?;
        let dg = eval_all(&m.dg, x)?;
        let ddg = if second { eval_all(&m.ddg, x)? } else { Vec::new() };
        Ok(MetricParts { d, ginv, dg, ddg })
    }

    fn dg(&self, a: usize, b: usize, m: usize) -> f64 {
        self.dg[(a * self.d + b) * self.d + m]
    }

    fn ddg(&self, a: usize, b: usize, m: usize, n: usize) -> f64 {
        self.ddg[((a * self.d + b) * self.d + m) * self.d + n]
    }

    /// `S_ljk = g_lj,k + g_lk,j − g_jk,l`
    fn s(&self, l: usize, j: usize, k: usize) -> f64 {
        self.dg(l, j, k) + self.dg(l, k, j) - self.dg(j, k, l)
    }

    fn gamma(&self) -> Tensor3 {
        let d = self.d;
        let mut out = Tensor3::zeros(d);
        for i in 0..d {
            for j in 0..d {
                for k in j..d {
                    let v = 0.5 * (0..d).map(|l| self.ginv[(i, l)] * self.s(l, j, k)).sum::<f64>();
                    out[(i, j, k)] = v;
                    out[(i, k, j)] = v;
                }
            }
        }
        out
    }

    fn dgamma(&self) -> Tensor4 {
        let d = self.d;
        // ∂_m g^{il} = −g^{ia} ∂_m g_ab g^{bl}
        let mut dginv = vec![0.0; d * d * d];
        for i in 0..d {
            for l in 0..d {
                for m in 0..d {
                    let mut acc = 0.0;
                    for a in 0..d {
                        for b in 0..d {
                            acc += self.ginv[(i, a)] * self.dg(a, b, m) * self.ginv[(b, l)];
                        }
                    }
                    dginv[(i * d + l) * d + m] = -acc;
                }
            }
        }
        let mut out = Tensor4::zeros(d);
        for i in 0..d {
            for j in 0..d {
                for k in j..d {
                    for m in 0..d {
                        let mut acc = 0.0;
                        for l in 0..d {
                            let ds = self.ddg(l, j, k, m) + self.ddg(l, k, j, m) - self.ddg(j, k, l, m);
                            acc += dginv[(i * d + l) * d + m] * self.s(l, j, k) + self.ginv[(i, l)] * ds;
                        }
                        out[(i, j, k, m)] = 0.5 * acc;
                        out[(i, k, j, m)] = 0.5 * acc;
                    }
                }
            }
        }
        out
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("radius must be positive, got {r}")))
    }
}

fn check_vars(e: &Expr, d: usize) -> Result<()> {
    match e.max_var() {
        Some(v) if v >= d => Err(Error::InvalidParameter(format!(
            "expression `{e}` uses x{} in dimension {d}",
            v + 1
        ))),
        _ => Ok(()),
    }
}

/// Parses a 1-based index key such as `"1,1,2"`.
fn parse_index(key: &str, arity: usize) -> Result<Vec<usize>> {
    let parts: Vec<_> = key.split(',').map(str::trim).collect();
    if parts.len() != arity {
        return Err(Error::InvalidParameter(format!(
            "index key `{key}` should have {arity} comma-separated entries"
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("index key `{key}` is not numeric")))
        })
        .collect()
}

/// Serializable geometry description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeometrySpec {
    Builtin {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    Custom {
        dim: usize,
        /// `"i,j,k" → expression` for `Γ^i_jk` (1-based).
        gamma: BTreeMap<String, String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain: Option<Domain>,
    },
    Metric {
        dim: usize,
        /// `"a,b" → expression` for `g_ab` (1-based).
        g: BTreeMap<String, String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain: Option<Domain>,
    },
}

impl GeometrySpec {
    pub fn builtin(name: &str, params: &[(&str, f64)]) -> Self {
        GeometrySpec::Builtin {
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    pub fn resolve(&self) -> Result<ConnectionChart> {
        match self {
            GeometrySpec::Builtin { name, params } => ConnectionChart::builtin(name, params),
            GeometrySpec::Custom { dim, gamma, domain } => {
                check_supported(*dim)?;
                let mut entries = Vec::new();
                for (key, src) in gamma {
                    let idx = parse_index(key, 3)?;
                    entries.push(((idx[0], idx[1], idx[2]), parse(src, *dim)?));
                }
                let domain = domain.clone().unwrap_or_else(|| Domain::unbounded(*dim));
                ConnectionChart::from_gamma_exprs(*dim, entries, domain)
            }
            GeometrySpec::Metric { dim, g, domain } => {
                check_supported(*dim)?;
                let domain = domain.clone().unwrap_or_else(|| Domain::unbounded(*dim));
                ConnectionChart::levi_civita_from_strings(
                    *dim,
                    g.iter().map(|(k, v)| (k.as_str(), v.as_str())),
                    domain,
                )
            }
        }
    }
}

impl fmt::Display for GeometrySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match serde_json::to_string(self) {
            Ok(s) => f.write_str(&s),
            Err(_) => Err(fmt::Error),
        }
    }
}
