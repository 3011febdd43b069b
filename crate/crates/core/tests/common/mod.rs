//! Independent oracles and the seeded randomized suites shared by the
//! integration tests and the acceptance runner.
#![allow(dead_code)]

use geogap_core::chart::{curvature_of, torsion_of};
use geogap_core::expr::{parse, Expr};
use geogap_core::quad::FrameTriple;
use geogap_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CASES: usize = 200;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `R^i_pqr = K (g_rp δ^i_q − g_qp δ^i_r)` for a surface of constant Gaussian
/// curvature `K`, from `R(u,v)w = K (g(v,w) u − g(u,w) v)`.
pub fn constant_curvature_tensor(k: f64, g: &Matrix) -> Tensor4 {
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    Tensor4::from_fn(g.dim(), |i, p, q, r| k * (g[(r, p)] * delta(i, q) - g[(q, p)] * delta(i, r)))
}

/// Largest entrywise relative error. Entries of `exact` that vanish (below
/// `1e-9` of its largest entry) are measured relative to that largest entry.
pub fn entrywise_relative(got: &Tensor4, exact: &Tensor4) -> f64 {
    let scale = exact.max_abs();
    got.as_slice()
        .iter()
        .zip(exact.as_slice())
        .map(|(a, b)| {
            let denom = if b.abs() > 1e-9 * scale { b.abs() } else { scale };
            (a - b).abs() / denom
        })
        .fold(0.0, f64::max)
}

pub fn relative(got: &[f64], expect: &[f64]) -> f64 {
    let diff: f64 = got.iter().zip(expect).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = expect.iter().map(|b| b * b).sum::<f64>().sqrt();
    diff / norm
}

fn random_poly<R: Rng>(rng: &mut R, d: usize) -> String {
    let mut s = format!("{:.6}", rng.gen_range(-0.5..0.5));
    for _ in 0..2 {
        let i = rng.gen_range(1..=d);
        let j = rng.gen_range(1..=d);
        s.push_str(&format!(" + {:.6}*x{i}*x{j}", rng.gen_range(-0.5..0.5)));
    }
    let i = rng.gen_range(1..=d);
    s.push_str(&format!(" + {:.6}*sin(x{i})", rng.gen_range(-0.5..0.5)));
    s
}

/// A chart whose Christoffel symbols are random polynomial-plus-sine
/// expressions, symmetric in the lower indices when `symmetric`.
pub fn random_expr_chart<R: Rng>(rng: &mut R, d: usize, symmetric: bool) -> ConnectionChart {
    let mut entries: Vec<((usize, usize, usize), Expr)> = Vec::new();
    for i in 1..=d {
        for j in 1..=d {
            for k in 1..=d {
                if symmetric && k < j {
                    continue;
                }
                let e = parse(&random_poly(rng, d), d).unwrap();
                if symmetric && k > j {
                    entries.push(((i, k, j), e.clone()));
                }
                entries.push(((i, j, k), e));
            }
        }
    }
    ConnectionChart::from_gamma_exprs(d, entries, Domain::unbounded(d)).unwrap()
}

pub fn random_point<R: Rng>(rng: &mut R, d: usize, half_width: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-half_width..half_width)).collect()
}

pub fn random_vector<R: Rng>(rng: &mut R, d: usize) -> Vector {
    Vector::from((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>())
}

/// A random 2-D metric `diag(1 + a x1², 1 + b sin(x2)²) + c x1 x2 (off-diagonal)`,
/// positive definite on `|x| < 0.5` for the sampled coefficient ranges.
pub fn random_metric_chart<R: Rng>(rng: &mut R) -> ConnectionChart {
    let a = rng.gen_range(0.0..1.0);
    let b = rng.gen_range(0.0..1.0);
    let c = rng.gen_range(-0.5..0.5);
    let g11 = parse(&format!("1 + {a:.6}*x1^2"), 2).unwrap();
    let g22 = parse(&format!("1 + {b:.6}*sin(x2)^2"), 2).unwrap();
    let g12 = parse(&format!("{c:.6}*x1*x2"), 2).unwrap();
    let domain = Domain::new(vec![(-0.6, 0.6), (-0.6, 0.6)]).unwrap();
    ConnectionChart::levi_civita(2, [((1, 1), g11), ((2, 2), g22), ((1, 2), g12)], domain).unwrap()
}

/// Worst `|T^i_mn + T^i_nm|` over random constant and expression connections.
pub fn torsion_antisymmetry(seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for case in 0..CASES {
        let d = 2 + case % 3;
        let t = if case % 2 == 0 {
            let g = Tensor3::from_fn(d, |_, _, _| r.gen_range(-2.0..2.0));
            torsion_of(&g)
        } else {
            let c = random_expr_chart(&mut r, d, false);
            c.torsion_at(&random_point(&mut r, d, 1.0)).unwrap()
        };
        for i in 0..d {
            for m in 0..d {
                for n in 0..d {
                    worst = worst.max((t[(i, m, n)] + t[(i, n, m)]).abs());
                }
            }
        }
    }
    worst
}

/// Worst `|R^i_pqr + R^i_prq|` with analytic and with finite-difference
/// derivatives of the Christoffel symbols.
pub fn curvature_antisymmetry(seed: u64) -> (f64, f64) {
    let mut r = rng(seed);
    let (mut sym, mut fd): (f64, f64) = (0.0, 0.0);
    for case in 0..CASES {
        let d = 2 + case % 2;
        let c = random_expr_chart(&mut r, d, case % 3 == 0);
        let x = random_point(&mut r, d, 1.0);
        let analytic = c.curvature_at(&x).unwrap();
        let numeric = c.clone().without_derivatives().curvature_at(&x).unwrap();
        for (t, w) in [(&analytic, &mut sym), (&numeric, &mut fd)] {
            for i in 0..d {
                for p in 0..d {
                    for q in 0..d {
                        for rr in 0..d {
                            *w = w.max((t[(i, p, q, rr)] + t[(i, p, rr, q)]).abs());
                        }
                    }
                }
            }
        }
    }
    (sym, fd)
}

/// Worst `|R^i_pqr + R^i_qrp + R^i_rpq| / max|R|` for random symmetric
/// connections in dimension 3 and random metrics in dimension 2.
pub fn algebraic_bianchi(seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for case in 0..CASES {
        let (c, x) = if case % 2 == 0 {
            let c = random_expr_chart(&mut r, 3, true);
            let x = random_point(&mut r, 3, 1.0);
            (c, x)
        } else {
            let c = random_metric_chart(&mut r);
            let x = random_point(&mut r, 2, 0.4);
            (c, x)
        };
        let d = c.dim();
        let t = curvature_of(&c.gamma(&x).unwrap(), &c.gamma_derivatives(&x).unwrap());
        let scale = t.max_abs().max(1e-300);
        for i in 0..d {
            for p in 0..d {
                for q in 0..d {
                    for rr in 0..d {
                        let cyc = t[(i, p, q, rr)] + t[(i, q, rr, p)] + t[(i, rr, p, q)];
                        worst = worst.max(cyc.abs() / scale);
                    }
                }
            }
        }
    }
    worst
}

/// Worst change of `g(v, w)`, relative to `|v| |w|`, after transporting `v`,
/// `w` along a geodesic.
pub fn metric_preservation(seed: u64) -> f64 {
    let mut r = rng(seed);
    let cfg = IntegratorConfig::default();
    let mut worst: f64 = 0.0;
    for case in 0..CASES {
        let (c, x) = match case % 3 {
            0 => (ConnectionChart::sphere(r.gen_range(0.5..2.0)).unwrap(), vec![r.gen_range(0.8..2.3), r.gen_range(-3.0..3.0)]),
            1 => (ConnectionChart::hyperboloid(r.gen_range(0.5..2.0)).unwrap(), vec![r.gen_range(0.5..2.0), r.gen_range(-3.0..3.0)]),
            _ => (random_metric_chart(&mut r), random_point(&mut r, 2, 0.2)),
        };
        let tangent = random_vector(&mut r, 2).scaled(0.5);
        let v = random_vector(&mut r, 2);
        let w = random_vector(&mut r, 2);
        let s = r.gen_range(0.05..0.3);
        let start = TransportState::new(x.clone(), tangent, vec![v.clone(), w.clone()]);
        let end = geodesic_transport(&c, &start, s, &cfg).unwrap();
        let g0 = c.metric(&x).unwrap();
        let before = g0.bilinear(&v, &w);
        let after = c.metric(&end.x).unwrap().bilinear(&end.carried[0], &end.carried[1]);
        let scale = (g0.bilinear(&v, &v) * g0.bilinear(&w, &w)).sqrt();
        worst = worst.max((after - before).abs() / scale);
    }
    worst
}

/// Worst deviation of `T_s⁻¹ T_s (P, u, v)` from `(P, u, v)`.
pub fn t_round_trip(seed: u64) -> f64 {
    let mut r = rng(seed);
    let cfg = IntegratorConfig::default();
    let mut worst: f64 = 0.0;
    for case in 0..CASES {
        let (c, p) = match case % 4 {
            0 => (ConnectionChart::sphere(1.0).unwrap(), vec![r.gen_range(0.8..2.3), r.gen_range(-3.0..3.0)]),
            1 => (ConnectionChart::hyperboloid(1.0).unwrap(), vec![r.gen_range(0.5..2.0), r.gen_range(-3.0..3.0)]),
            2 => (ConnectionChart::constant_torsion(r.gen_range(-1.0..1.0)).unwrap(), random_point(&mut r, 2, 1.0)),
            _ => (random_expr_chart(&mut r, 3, false), random_point(&mut r, 3, 0.5)),
        };
        let d = c.dim();
        let t = FrameTriple::new(p, random_vector(&mut r, d).scaled(0.5), random_vector(&mut r, d).scaled(0.5));
        let s = r.gen_range(0.01..0.2);
        let fwd = apply_t(&c, &t, s, &cfg).unwrap();
        let back = apply_t_inv(&c, &fwd, s, &cfg).unwrap();
        worst = worst
            .max(back.p.max_abs_diff(&t.p))
            .max(back.u.max_abs_diff(&t.u))
            .max(back.v.max_abs_diff(&t.v));
    }
    worst
}

/// Worst vertex difference between `(P, λu, λv)` at `s/λ` and `(P, u, v)` at `s`.
pub fn scale_invariance(seed: u64) -> f64 {
    let mut r = rng(seed);
    let cfg = IntegratorConfig::default();
    let mut worst: f64 = 0.0;
    for case in 0..CASES {
        let (c, p) = match case % 3 {
            0 => (ConnectionChart::sphere(1.0).unwrap(), vec![r.gen_range(0.8..2.3), r.gen_range(-3.0..3.0)]),
            1 => (ConnectionChart::constant_torsion(r.gen_range(-1.0..1.0)).unwrap(), random_point(&mut r, 2, 1.0)),
            _ => (random_expr_chart(&mut r, 2, true), random_point(&mut r, 2, 0.5)),
        };
        let d = c.dim();
        let t = FrameTriple::new(p, random_vector(&mut r, d).scaled(0.5), random_vector(&mut r, d).scaled(0.5));
        let lambda = r.gen_range(0.5..2.0);
        let s = r.gen_range(0.02..0.1);
        let base = quad_vertices(&c, &t, s, &cfg).unwrap();
        let scaled = quad_vertices(&c, &t.scaled(lambda), s / lambda, &cfg).unwrap();
        worst = worst.max(base.max_abs_diff(&scaled));
    }
    worst
}
