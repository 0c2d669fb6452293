use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Operator {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Operator { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut op = Self::zeros(n, n);
        for i in 0..n {
            op[(i, i)] = ONE;
        }
        op
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch("operator dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} operator",
                data.len(),
                rows,
                cols
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("operator entries must be finite".into()));
        }
        Ok(Operator { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Operator { rows, cols, data }
    }

    /// Builds a matrix from nested real rows; handy for tests and fixed gates.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        let mut op = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            op[(i, i)] = *v;
        }
        op
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    /// |a⟩⟨b|
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
    }

    /// Column vector |a⟩ as an n×1 operator.
    pub fn column(a: &[C64]) -> Self {
        Operator { rows: a.len(), cols: 1, data: a.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[C64]) {
        for (i, z) in v.iter().enumerate() {
            self[(i, j)] = *z;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Operator { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Operator { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from another operator of the same shape.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn matmul(&self, rhs: &Operator) -> Operator {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Operator::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "apply shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// A X A†
    pub fn conjugate(&self, x: &Operator) -> Operator {
        self.matmul(x).matmul(&self.adjoint())
    }

    /// Kronecker product; the left factor is most significant.
    pub fn kron(&self, rhs: &Operator) -> Operator {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut out = Operator::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out[(i * rhs.rows + k, j * rhs.cols + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Hermitian part (X + X†)/2.
    pub fn hermitian_part(&self) -> Operator {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol * self.max_abs().max(1.0)
    }

    /// max |U†U − I| entrywise.
    pub fn unitary_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.adjoint().matmul(self).max_abs_diff(&Operator::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_deviation() <= tol
    }

    /// tr(A B) without forming the product.
    pub fn trace_product(&self, rhs: &Operator) -> C64 {
        assert_eq!(self.cols, rhs.rows);
        assert_eq!(self.rows, rhs.cols);
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * rhs[(k, i)];
            }
        }
        acc
    }
}

impl Index<(usize, usize)> for Operator {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Operator {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Operator {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Operator {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.matmul(rhs)
    }
}

/// Tensor product of two operators.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    a.kron(b)
}

/// Tensor product of state vectors, left factor most significant.
pub fn tensor_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(a: &mut [C64]) -> f64 {
    let n = norm(a);
    if n > 0.0 {
        for z in a.iter_mut() {
            *z /= n;
        }
    }
    n
}

pub fn basis_vector(dim: usize, index: usize) -> Vec<C64> {
    let mut v = vec![ZERO; dim];
    v[index] = ONE;
    v
}

#[derive(Serialize, Deserialize)]
struct OperatorWire {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorWire {
            rows: self.rows,
            cols: self.cols,
            re: self.data.iter().map(|z| z.re).collect(),
            im: self.data.iter().map(|z| z.im).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = OperatorWire::deserialize(deserializer)?;
        if wire.re.len() != wire.im.len() {
            return Err(serde::de::Error::custom("re and im lengths differ"));
        }
        let data = wire.re.iter().zip(&wire.im).map(|(&r, &i)| C64::new(r, i)).collect();
        Operator::from_vec(wire.rows, wire.cols, data).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_kron(a: &Operator, b: &Operator) -> Operator {
        let mut out = Operator::zeros(a.rows() * b.rows(), a.cols() * b.cols());
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                for k in 0..b.rows() {
                    for l in 0..b.cols() {
                        out[(i * b.rows() + k, j * b.cols() + l)] = a[(i, j)] * b[(k, l)];
                    }
                }
            }
        }
        out
    }

    #[test]
    fn identity_tensor_identity() {
        let i2 = Operator::identity(2);
        assert_eq!(tensor(&i2, &i2), Operator::identity(4));
    }

    #[test]
    fn basis_tensor_bookkeeping() {
        let v = tensor_vec(&basis_vector(2, 0), &basis_vector(2, 1));
        assert_eq!(v, basis_vector(4, 1));
    }

    #[test]
    fn kron_matches_four_loop_reference() {
        let a = Operator::from_fn(2, 2, |i, j| C64::new(i as f64 + 0.3, j as f64 - 1.1));
        let b = Operator::from_fn(2, 2, |i, j| C64::new((i * j) as f64 - 0.5, 0.7 * i as f64));
        assert!(tensor(&a, &b).max_abs_diff(&naive_kron(&a, &b)) < 1e-15);
    }

    #[test]
    fn from_vec_rejects_bad_shapes() {
        assert!(Operator::from_vec(2, 2, vec![ZERO; 3]).is_err());
        assert!(Operator::from_vec(0, 2, vec![]).is_err());
        assert!(Operator::from_vec(1, 1, vec![C64::new(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn json_shape() {
        let op = Operator::from_fn(1, 2, |_, j| C64::new(j as f64, -(j as f64)));
        let s = serde_json::to_string(&op).unwrap();
        assert_eq!(s, r#"{"rows":1,"cols":2,"re":[0.0,1.0],"im":[-0.0,-1.0]}"#);
        let back: Operator = serde_json::from_str(&s).unwrap();
        assert_eq!(back, op);
    }
}
