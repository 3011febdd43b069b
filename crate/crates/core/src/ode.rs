//! Fixed-step classical Runge–Kutta integration of geodesics with parallel
//! transport, and of flows of plain vector fields.

use serde::{Deserialize, Serialize};

use crate::chart::{ConnectionChart, Domain};
use crate::error::{check_dim, Error, Result};
use crate::tensor::{contract_gamma, Vector};

pub const DEFAULT_STEPS_PER_UNIT: usize = 512;
pub const MIN_STEPS_PER_UNIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub steps_per_unit: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            steps_per_unit: DEFAULT_STEPS_PER_UNIT,
        }
    }
}

impl IntegratorConfig {
    pub fn new(steps_per_unit: usize) -> Result<Self> {
        let cfg = IntegratorConfig { steps_per_unit };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps_per_unit < MIN_STEPS_PER_UNIT {
            return Err(Error::InvalidParameter(format!(
                "steps_per_unit must be at least {MIN_STEPS_PER_UNIT}, got {}",
                self.steps_per_unit
            )));
        }
        Ok(())
    }

    /// Number of equal steps used for parameter length `s`.
    pub fn steps_for(&self, s: f64) -> usize {
        (s.abs() * self.steps_per_unit as f64).ceil() as usize
    }
}

/// Position, velocity and a list of vectors carried along by parallel transport.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportState {
    pub x: Vector,
    pub tangent: Vector,
    pub carried: Vec<Vector>,
}

impl TransportState {
    pub fn new(x: impl Into<Vector>, tangent: impl Into<Vector>, carried: Vec<Vector>) -> Self {
        TransportState {
            x: x.into(),
            tangent: tangent.into(),
            carried,
        }
    }

    fn pack(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(self.x.dim() * (2 + self.carried.len()));
        y.extend_from_slice(&self.x);
        y.extend_from_slice(&self.tangent);
        for c in &self.carried {
            y.extend_from_slice(c);
        }
        y
    }

    fn unpack(y: &[f64], d: usize) -> Self {
        let mut chunks = y.chunks(d).map(Vector::from);
        let x = chunks.next().unwrap_or_default();
        let tangent = chunks.next().unwrap_or_default();
        TransportState {
            x,
            tangent,
            carried: chunks.collect(),
        }
    }
}

/// Classical RK4 with `n` equal steps over `[0, s]`. Failures of the right-hand
/// side are reported with the (1-based) step at which they happened.
fn rk4(
    mut y: Vec<f64>,
    s: f64,
    n: usize,
    mut rhs: impl FnMut(&[f64], &mut [f64]) -> Result<()>,
) -> Result<Vec<f64>> {
    if n == 0 || s == 0.0 {
        return Ok(y);
    }
    let h = s / n as f64;
    let m = y.len();
    let mut k1 = vec![0.0; m];
    let mut k2 = vec![0.0; m];
    let mut k3 = vec![0.0; m];
    let mut k4 = vec![0.0; m];
    let mut tmp = vec![0.0; m];
    let exit = |step: usize| {
        move |e: Error| Error::DomainExit {
            step,
            steps: n,
            source: Box::new(e),
        }
    };
    for step in 1..=n {
        rhs(&y, &mut k1).map_err(exit(step))?;
        for i in 0..m {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        rhs(&tmp, &mut k2).map_err(exit(step))?;
        for i in 0..m {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        rhs(&tmp, &mut k3).map_err(exit(step))?;
        for i in 0..m {
            tmp[i] = y[i] + h * k3[i];
        }
        rhs(&tmp, &mut k4).map_err(exit(step))?;
        for i in 0..m {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(exit(step)(Error::NonFinite("integrator state")));
        }
    }
    Ok(y)
}

/// Follows the geodesic from `state0.x` with velocity `state0.tangent` for
/// parameter length `s`, parallel-transporting every carried vector.
///
/// Integrates `ẍ^i = −Γ^i_jk ẋ^j ẋ^k` and `v̇^i = −Γ^i_jk v^j ẋ^k` jointly.
pub fn geodesic_transport(
    chart: &ConnectionChart,
    state0: &TransportState,
    s: f64,
    cfg: &IntegratorConfig,
) -> Result<TransportState> {
    cfg.validate()?;
    let d = chart.dim();
    check_dim(d, state0.x.dim())?;
    check_dim(d, state0.tangent.dim())?;
    for c in &state0.carried {
        check_dim(d, c.dim())?;
    }
    if !s.is_finite() {
        return Err(Error::NonFinite("geodesic parameter"));
    }
    chart.domain().check(&state0.x)?;
    let n = cfg.steps_for(s);
    let y = rk4(state0.pack(), s, n, |y, dy| {
        let x = &y[..d];
        let t = &y[d..2 * d];
        let gamma = chart.gamma(x)?;
        dy[..d].copy_from_slice(t);
        for (block, out) in y[d..].chunks(d).zip(dy[d..].chunks_mut(d)) {
            let acc = contract_gamma(&gamma, block, t)?;
            for (o, a) in out.iter_mut().zip(acc.iter()) {
                *o = -a;
            }
        }
        Ok(())
    })?;
    let end = TransportState::unpack(&y, d);
    chart
        .domain()
        .check(&end.x)
        .map_err(|e| Error::DomainExit {
            step: n,
            steps: n,
            source: Box::new(e),
        })?;
    Ok(end)
}

/// Integral curve of `field` through `x0`, evaluated at time `s`.
/// When `domain` is given, every stage point must lie inside it.
pub fn flow(
    field: impl Fn(&[f64]) -> Result<Vector>,
    domain: Option<&Domain>,
    x0: &[f64],
    s: f64,
    cfg: &IntegratorConfig,
) -> Result<Vector> {
    cfg.validate()?;
    let d = x0.len();
    if let Some(dom) = domain {
        dom.check(x0)?;
    }
    if !s.is_finite() {
        return Err(Error::NonFinite("flow parameter"));
    }
    let y = rk4(x0.to_vec(), s, cfg.steps_for(s), |y, dy| {
        if let Some(dom) = domain {
            dom.check(y)?;
        }
        let v = field(y)?;
        check_dim(d, v.dim())?;
        dy.copy_from_slice(&v);
        Ok(())
    })?;
    if let Some(dom) = domain {
        dom.check(&y)?;
    }
    Ok(Vector::from(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::new(15).is_err());
        assert_eq!(IntegratorConfig::new(16).unwrap().steps_for(0.1), 2);
        assert_eq!(cfg().steps_for(-0.1), 52);
        assert_eq!(cfg().steps_for(0.0), 0);
    }

    #[test]
    fn euclidean_geodesics_are_lines() {
        let c = ConnectionChart::euclidean(3).unwrap();
        let st = TransportState::new([1.0, 2.0, 3.0], [0.5, -1.0, 0.25], vec![Vector::from([7.0, 8.0, 9.0])]);
        let end = geodesic_transport(&c, &st, 0.3, &cfg()).unwrap();
        let expect = [1.15, 1.7, 3.075];
        assert!(end.x.max_abs_diff(&expect) < 1e-12);
        assert_eq!(end.tangent, st.tangent);
        assert_eq!(end.carried, st.carried);
    }

    #[test]
    fn zero_parameter_returns_start() {
        let c = ConnectionChart::sphere(1.0).unwrap();
        let st = TransportState::new([1.0, 0.3], [0.2, 0.4], vec![Vector::from([1.0, 1.0])]);
        assert_eq!(geodesic_transport(&c, &st, 0.0, &cfg()).unwrap(), st);
    }

    #[test]
    fn sphere_equator_is_a_geodesic() {
        // great circle θ = π/2 traversed at unit speed: φ(s) = s
        let c = ConnectionChart::sphere(1.0).unwrap();
        let st = TransportState::new([FRAC_PI_2, 0.0], [0.0, 1.0], vec![]);
        let end = geodesic_transport(&c, &st, 0.7, &cfg()).unwrap();
        assert!((end.x[0] - FRAC_PI_2).abs() < 1e-14);
        assert!((end.x[1] - 0.7).abs() < 1e-14);
    }

    #[test]
    fn constant_torsion_matches_fine_reference() {
        let c = ConnectionChart::constant_torsion(0.3).unwrap();
        let st = TransportState::new([0.1, -0.2], [1.0, 0.7], vec![Vector::from([0.3, 1.0])]);
        let coarse = geodesic_transport(&c, &st, 0.5, &cfg()).unwrap();
        let fine = geodesic_transport(&c, &st, 0.5, &IntegratorConfig::new(8 * 512).unwrap()).unwrap();
        assert!(coarse.x.max_abs_diff(&fine.x) < 1e-10);
        assert!(coarse.carried[0].max_abs_diff(&fine.carried[0]) < 1e-10);
    }

    #[test]
    fn domain_exit_reports_step() {
        let c = ConnectionChart::sphere(1.0).unwrap();
        let st = TransportState::new([0.3, 0.0], [-1.0, 0.0], vec![]);
        match geodesic_transport(&c, &st, 0.5, &cfg()) {
            Err(Error::DomainExit { step, steps, .. }) => {
                assert_eq!(steps, 256);
                assert!(step > 40 && step < 60, "step {step}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fourth_order_convergence_on_sphere() {
        let c = ConnectionChart::sphere(1.0).unwrap();
        let st = TransportState::new([1.2, 0.0], [0.6, 0.9], vec![]);
        let s = 1.0;
        let reference = geodesic_transport(&c, &st, s, &IntegratorConfig::new(16 * 64).unwrap()).unwrap();
        let e1 = geodesic_transport(&c, &st, s, &IntegratorConfig::new(32).unwrap())
            .unwrap()
            .x
            .max_abs_diff(&reference.x);
        let e2 = geodesic_transport(&c, &st, s, &IntegratorConfig::new(64).unwrap())
            .unwrap()
            .x
            .max_abs_diff(&reference.x);
        let order = (e1 / e2).log2();
        assert!((3.7..=4.3).contains(&order), "order {order}");
    }

    #[test]
    fn transport_preserves_metric_on_sphere() {
        let c = ConnectionChart::sphere(1.0).unwrap();
        let x0 = [1.3, 0.2];
        let v = Vector::from([0.4, -0.8]);
        let st = TransportState::new(x0, [0.7, 0.5], vec![v.clone()]);
        let g0 = c.metric(&x0).unwrap().bilinear(&v, &v);
        let end = geodesic_transport(&c, &st, 1.0, &cfg()).unwrap();
        let g1 = c.metric(&end.x).unwrap().bilinear(&end.carried[0], &end.carried[0]);
        assert!(((g1 - g0) / g0).abs() < 1e-9);
    }

    #[test]
    fn reversibility() {
        let c = ConnectionChart::hyperboloid(1.0).unwrap();
        let st = TransportState::new([1.0, 0.5], [0.3, 0.6], vec![Vector::from([1.0, -2.0])]);
        let fwd = geodesic_transport(&c, &st, 0.8, &cfg()).unwrap();
        let back = geodesic_transport(&c, &fwd, -0.8, &cfg()).unwrap();
        assert!(back.x.max_abs_diff(&st.x) < 1e-9);
        assert!(back.tangent.max_abs_diff(&st.tangent) < 1e-9);
        assert!(back.carried[0].max_abs_diff(&st.carried[0]) < 1e-9);
    }

    #[test]
    fn constant_field_flow() {
        let c = [0.5, -2.0];
        let x = flow(|_| Ok(Vector::from(c)), None, &[1.0, 1.0], 0.25, &cfg()).unwrap();
        assert!(x.max_abs_diff(&[1.125, 0.5]) < 1e-15);
        let x0 = flow(|_| Ok(Vector::from(c)), None, &[1.0, 1.0], 0.0, &cfg()).unwrap();
        assert_eq!(x0.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn linear_field_matches_matrix_exponential() {
        // exp(sA) x0 summed as a power series until terms vanish
        let a = [[0.3, -0.7], [0.5, 0.1]];
        let x0 = [0.4, -1.2];
        let s = 0.6;
        let mut term = x0;
        let mut sum = x0;
        for k in 1..40 {
            let next = [
                s / k as f64 * (a[0][0] * term[0] + a[0][1] * term[1]),
                s / k as f64 * (a[1][0] * term[0] + a[1][1] * term[1]),
            ];
            term = next;
            sum[0] += term[0];
            sum[1] += term[1];
        }
        let field = |x: &[f64]| Ok(Vector::from([a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]]));
        let end = flow(field, None, &x0, s, &cfg()).unwrap();
        assert!(end.max_abs_diff(&sum) < 1e-9);
    }

    #[test]
    fn flow_leaving_domain_fails() {
        let dom = Domain::new(vec![(-1.0, 1.0)]).unwrap();
        let err = flow(|_| Ok(Vector::from([1.0])), Some(&dom), &[0.5], 1.0, &cfg()).unwrap_err();
        assert!(matches!(err, Error::DomainExit { .. }));
    }
}
