//! Small dense vectors, matrices and rank-3/rank-4 arrays.
//!
//! Indices are 0-based throughout the library. Reports print them 1-based.
//! Storage is row-major: `Tensor3[(i, j, k)]` lives at `(i * d + j) * d + k`.

use std::ops::{Add, AddAssign, Deref, DerefMut, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Largest chart dimension the dense representation is meant for.
pub const MAX_DIM: usize = 16;

pub(crate) fn check_supported(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIM {
        Err(Error::UnsupportedDimension(d))
    } else {
        Ok(())
    }
}

/// Chart coordinates of a point, or components of a tangent vector.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(components: Vec<f64>) -> Self {
        Vector(components)
    }

    pub fn zeros(d: usize) -> Self {
        Vector(vec![0.0; d])
    }

    /// The `i`-th coordinate basis vector.
    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = Self::zeros(d);
        v.0[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(&self.0).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, a: f64) -> Self {
        Vector(self.0.iter().map(|x| a * x).collect())
    }

    /// `self + a * other`
    pub fn axpy(&self, a: f64, other: &[f64]) -> Self {
        Vector(self.0.iter().zip(other).map(|(x, y)| x + a * y).collect())
    }

    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(other)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl From<&[f64]> for Vector {
    fn from(v: &[f64]) -> Self {
        Vector(v.to_vec())
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(v: [f64; N]) -> Self {
        Vector(v.to_vec())
    }
}

impl FromIterator<f64> for Vector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Vector(iter.into_iter().collect())
    }
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl Add<&Vector> for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect()
    }
}

impl Sub<&Vector> for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect()
    }
}

impl Add for Vector {
    type Output = Vector;
    fn add(self, rhs: Vector) -> Vector {
        &self + &rhs
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(self, rhs: Vector) -> Vector {
        &self - &rhs
    }
}

impl AddAssign<&Vector> for Vector {
    fn add_assign(&mut self, rhs: &Vector) {
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
    }
}

impl SubAssign<&Vector> for Vector {
    fn sub_assign(&mut self, rhs: &Vector) {
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a -= b;
        }
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scaled(-1.0)
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scaled(-1.0)
    }
}

impl Mul<&Vector> for f64 {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        rhs.scaled(self)
    }
}

impl Mul<Vector> for f64 {
    type Output = Vector;
    fn mul(self, rhs: Vector) -> Vector {
        rhs.scaled(self)
    }
}

/// Square `d × d` matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Matrix { dim, data }
    }

    /// Row-major entries; `entries.len()` must be a perfect square.
    pub fn from_row_major(entries: Vec<f64>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        check_dim(dim * dim, entries.len())?;
        Ok(Matrix { dim, data: entries })
    }

    /// Builds the matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[Vector]) -> Result<Self> {
        let dim = columns.len();
        for c in columns {
            check_dim(dim, c.dim())?;
        }
        Ok(Self::from_fn(dim, |i, j| columns[j][i]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vector> {
        check_dim(self.dim, x.len())?;
        Ok((0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * x[j]).sum())
            .collect())
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        check_dim(self.dim, other.dim)?;
        let d = self.dim;
        Ok(Self::from_fn(d, |i, j| {
            (0..d).map(|k| self[(i, k)] * other[(k, j)]).sum()
        }))
    }

    /// `x^T A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += x[i] * self[(i, j)] * y[j];
            }
        }
        acc
    }

    fn lu(&self) -> Option<(Vec<f64>, Vec<usize>, f64)> {
        let d = self.dim;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..d).collect();
        let mut sign = 1.0;
        for col in 0..d {
            let pivot = (col..d)
                .max_by(|&r, &s| a[r * d + col].abs().total_cmp(&a[s * d + col].abs()))?;
            if a[pivot * d + col] == 0.0 {
                return None;
            }
            if pivot != col {
                for k in 0..d {
                    a.swap(pivot * d + k, col * d + k);
                }
                perm.swap(pivot, col);
                sign = -sign;
            }
            let p = a[col * d + col];
            for r in col + 1..d {
                let f = a[r * d + col] / p;
                a[r * d + col] = f;
                for k in col + 1..d {
                    a[r * d + k] -= f * a[col * d + k];
                }
            }
        }
        Some((a, perm, sign))
    }

    pub fn determinant(&self) -> f64 {
        match self.lu() {
            None => 0.0,
            Some((a, _, sign)) => (0..self.dim).fold(sign, |acc, i| acc * a[i * self.dim + i]),
        }
    }

    pub fn inverse(&self) -> Result<Matrix> {
        let d = self.dim;
        let (a, perm, _) = self.lu().ok_or(Error::Singular("matrix inverse"))?;
        let mut inv = Matrix::zeros(d);
        for col in 0..d {
            // solve L U x = P e_col
            let mut y = vec![0.0; d];
            for i in 0..d {
                let mut s = if perm[i] == col { 1.0 } else { 0.0 };
                for k in 0..i {
                    s -= a[i * d + k] * y[k];
                }
                y[i] = s;
            }
            for i in (0..d).rev() {
                let mut s = y[i];
                for k in i + 1..d {
                    s -= a[i * d + k] * y[k];
                }
                y[i] = s / a[i * d + i];
            }
            for i in 0..d {
                inv[(i, col)] = y[i];
            }
        }
        if inv.data.iter().all(|x| x.is_finite()) {
            Ok(inv)
        } else {
            Err(Error::Singular("matrix inverse"))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn scaled(&self, a: f64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|x| a * x).collect(),
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add<&Matrix> for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub<&Matrix> for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Rank-3 array `[i][j][k]`; holds Christoffel symbols `Γ^i_jk` and torsion `T^i_jk`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor3 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dim: usize) -> Self {
        Tensor3 {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    data.push(f(i, j, k));
                }
            }
        }
        Tensor3 { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Nested `[i][j][k]` arrays, for reports.
    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        let d = self.dim;
        (0..d)
            .map(|i| (0..d).map(|j| (0..d).map(|k| self[(i, j, k)]).collect()).collect())
            .collect()
    }
}

impl Index<(usize, usize, usize)> for Tensor3 {
    type Output = f64;
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &f64 {
        &self.data[(i * self.dim + j) * self.dim + k]
    }
}

impl IndexMut<(usize, usize, usize)> for Tensor3 {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut f64 {
        &mut self.data[(i * self.dim + j) * self.dim + k]
    }
}

/// Rank-4 array `[i][p][q][r]`; holds curvature `R^i_pqr` and Christoffel
/// derivatives `Γ^i_jk,l` (last index = derivative direction).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor4 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(dim: usize) -> Self {
        Tensor4 {
            dim,
            data: vec![0.0; dim * dim * dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim.pow(4));
        for i in 0..dim {
            for p in 0..dim {
                for q in 0..dim {
                    for r in 0..dim {
                        data.push(f(i, p, q, r));
                    }
                }
            }
        }
        Tensor4 { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// The endomorphism `w ↦ R(u,v)w` as a matrix: `M[i][p] = R^i_pqr u^q v^r`.
    pub fn operator(&self, u: &[f64], v: &[f64]) -> Result<Matrix> {
        check_dim(self.dim, u.len())?;
        check_dim(self.dim, v.len())?;
        let d = self.dim;
        Ok(Matrix::from_fn(d, |i, p| {
            let mut acc = 0.0;
            for q in 0..d {
                for r in 0..d {
                    acc += self[(i, p, q, r)] * u[q] * v[r];
                }
            }
            acc
        }))
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<Vec<f64>>>> {
        let d = self.dim;
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|p| {
                        (0..d)
                            .map(|q| (0..d).map(|r| self[(i, p, q, r)]).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }
}

impl Index<(usize, usize, usize, usize)> for Tensor4 {
    type Output = f64;
    fn index(&self, (i, p, q, r): (usize, usize, usize, usize)) -> &f64 {
        let d = self.dim;
        &self.data[((i * d + p) * d + q) * d + r]
    }
}

impl IndexMut<(usize, usize, usize, usize)> for Tensor4 {
    fn index_mut(&mut self, (i, p, q, r): (usize, usize, usize, usize)) -> &mut f64 {
        let d = self.dim;
        &mut self.data[((i * d + p) * d + q) * d + r]
    }
}

/// `Γ(a, b)^i = Γ^i_jk a^j b^k`.
pub fn contract_gamma(gamma: &Tensor3, a: &[f64], b: &[f64]) -> Result<Vector> {
    let d = gamma.dim();
    check_dim(d, a.len())?;
    check_dim(d, b.len())?;
    let mut out = vec![0.0; d];
    for (i, o) in out.iter_mut().enumerate() {
        let block = &gamma.data[i * d * d..(i + 1) * d * d];
        let mut acc = 0.0;
        for (j, aj) in a.iter().enumerate() {
            if *aj == 0.0 {
                continue;
            }
            let row = &block[j * d..(j + 1) * d];
            acc += aj * row.iter().zip(b).map(|(g, bk)| g * bk).sum::<f64>();
        }
        *o = acc;
    }
    Ok(Vector(out))
}

/// `(R(u,v)w)^i = R^i_pqr w^p u^q v^r`.
pub fn curvature_apply(r: &Tensor4, u: &[f64], v: &[f64], w: &[f64]) -> Result<Vector> {
    let op = r.operator(u, v)?;
    op.mul_vec(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_contract(g: &Tensor3, a: &[f64], b: &[f64]) -> Vec<f64> {
        let d = g.dim();
        let mut out = vec![0.0; d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    out[i] += g[(i, j, k)] * a[j] * b[k];
                }
            }
        }
        out
    }

    #[test]
    fn zero_gamma_contracts_to_zero() {
        let g = Tensor3::zeros(3);
        let r = contract_gamma(&g, &[1.0, 2.0, 3.0], &[-1.0, 0.5, 4.0]).unwrap();
        assert_eq!(r.as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn single_entry_contraction() {
        // Γ^1_12 = 0.3 (1-based), a = e1, b = e2
        let mut g = Tensor3::zeros(2);
        g[(0, 0, 1)] = 0.3;
        let r = contract_gamma(&g, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(r.as_slice(), &[0.3, 0.0]);
    }

    #[test]
    fn contraction_matches_naive_loops() {
        let mut seed = 0x9e37_79b9_u64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for d in 1..=5 {
            let g = Tensor3::from_fn(d, |_, _, _| next());
            let a: Vec<f64> = (0..d).map(|_| next()).collect();
            let b: Vec<f64> = (0..d).map(|_| next()).collect();
            let fast = contract_gamma(&g, &a, &b).unwrap();
            let slow = naive_contract(&g, &a, &b);
            assert!(fast.max_abs_diff(&slow) <= 1e-15, "d={d}");
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = Tensor3::zeros(2);
        assert!(matches!(
            contract_gamma(&g, &[1.0, 0.0, 0.0], &[0.0, 1.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
        let r = Tensor4::zeros(2);
        assert!(curvature_apply(&r, &[1.0], &[0.0, 1.0], &[0.0, 1.0]).is_err());
    }

    /// Round sphere, orthonormal coordinates at a point: R(u,v)w = g(v,w)u - g(u,w)v.
    fn unit_sphere_curvature() -> Tensor4 {
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        Tensor4::from_fn(2, |i, p, q, r| delta(r, p) * delta(i, q) - delta(q, p) * delta(i, r))
    }

    #[test]
    fn sphere_curvature_in_orthonormal_frame() {
        let r = unit_sphere_curvature();
        let u = [1.0, 0.0];
        let v = [0.0, 1.0];
        assert_eq!(curvature_apply(&r, &u, &v, &u).unwrap().as_slice(), &[0.0, -1.0]);
        assert_eq!(curvature_apply(&r, &u, &v, &v).unwrap().as_slice(), &[1.0, 0.0]);
        assert_eq!(Tensor4::zeros(2).operator(&u, &v).unwrap(), Matrix::zeros(2));
    }

    #[test]
    fn matrix_inverse_and_determinant() {
        let m = Matrix::from_row_major(vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0]).unwrap();
        let inv = m.inverse().unwrap();
        let id = m.matmul(&inv).unwrap();
        assert!(id.max_abs_diff(&Matrix::identity(3)) < 1e-14);
        // cofactor expansion along the first row: 0·1 − 2·1 + 1·(−3)
        assert!((m.determinant() + 5.0).abs() < 1e-14);
        let singular = Matrix::from_row_major(vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(singular.inverse().is_err());
        assert_eq!(singular.determinant(), 0.0);
    }

    #[test]
    fn from_columns_places_columns() {
        let m = Matrix::from_columns(&[Vector::from([1.0, 2.0]), Vector::from([3.0, 4.0])]).unwrap();
        assert_eq!(m[(0, 1)], 3.0);
        assert_eq!(m.column(0).as_slice(), &[1.0, 2.0]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn vecs(d: usize) -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(-2.0f64..2.0, d)
        }

        proptest! {
            #[test]
            fn contraction_is_bilinear(
                g in vecs(27), a in vecs(3), a2 in vecs(3), b in vecs(3),
                alpha in -3.0f64..3.0, beta in -3.0f64..3.0,
            ) {
                let g = Tensor3::from_fn(3, |i, j, k| g[(i * 3 + j) * 3 + k]);
                let combo: Vec<f64> = a.iter().zip(&a2).map(|(x, y)| alpha * x + beta * y).collect();
                let lhs = contract_gamma(&g, &combo, &b).unwrap();
                let rhs = contract_gamma(&g, &a, &b).unwrap().scaled(alpha)
                    + contract_gamma(&g, &a2, &b).unwrap().scaled(beta);
                let scale = 1.0 + rhs.norm_inf();
                prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * scale);
            }

            #[test]
            fn curvature_apply_is_antisymmetric_in_u_v(
                raw in vecs(16), u in vecs(2), v in vecs(2), w in vecs(2),
            ) {
                let r = Tensor4::from_fn(2, |i, p, q, s| {
                    raw[((i * 2 + p) * 2 + q) * 2 + s] - raw[((i * 2 + p) * 2 + s) * 2 + q]
                });
                let a = curvature_apply(&r, &u, &v, &w).unwrap();
                let b = curvature_apply(&r, &v, &u, &w).unwrap();
                prop_assert!((&a + &b).norm_inf() <= 1e-14);
            }
        }
    }
}
