//! Dense row-major matrices used as block carriers.
//!
//! Element kind is uniform per matrix: exact integers (`i64`) for bit-exact
//! verification, or `f64` for floating-point runs.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar element of a [`Matrix`].
pub trait Element: Copy + Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn mul(self, other: Self) -> Self;

    /// `Σ coeffs[i] · mats[i]`, with exact rational coefficients.
    ///
    /// Integer matrices require the result to be integral.
    fn combine_rational(coeffs: &[BigRational], mats: &[&Matrix<Self>]) -> Result<Matrix<Self>>;
}

impl Element for i64 {
    fn zero() -> Self {
        0
    }
    fn from_i64(v: i64) -> Self {
        v
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }

    fn combine_rational(coeffs: &[BigRational], mats: &[&Matrix<i64>]) -> Result<Matrix<i64>> {
        let (rows, cols) = common_shape(mats)?;
        let denom = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut acc = vec![BigInt::zero(); rows * cols];
        for (c, m) in coeffs.iter().zip(mats) {
            if c.is_zero() {
                continue;
            }
            let scaled = c.numer() * (&denom / c.denom());
            for (slot, &v) in acc.iter_mut().zip(&m.data) {
                *slot += &scaled * BigInt::from(v);
            }
        }
        let data = acc
            .into_iter()
            .map(|v| {
                let (q, r) = v.div_rem(&denom);
                if !r.is_zero() {
                    return Err(Error::Inexact);
                }
                q.to_i64().ok_or(Error::Inexact)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix { rows, cols, data })
    }
}

impl Element for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }

    fn combine_rational(coeffs: &[BigRational], mats: &[&Matrix<f64>]) -> Result<Matrix<f64>> {
        let (rows, cols) = common_shape(mats)?;
        let mut data = vec![0.0; rows * cols];
        for (c, m) in coeffs.iter().zip(mats) {
            if c.is_zero() {
                continue;
            }
            let w = c.to_f64().unwrap_or(f64::NAN);
            for (slot, &v) in data.iter_mut().zip(&m.data) {
                *slot += w * v;
            }
        }
        Ok(Matrix { rows, cols, data })
    }
}

fn common_shape<T>(mats: &[&Matrix<T>]) -> Result<(usize, usize)> {
    let first = mats.first().ok_or_else(|| Error::InvalidArgument("empty combination".into()))?;
    let shape = (first.rows, first.cols);
    if let Some(m) = mats.iter().find(|m| (m.rows, m.cols) != shape) {
        return Err(Error::DimensionMismatch(format!("combining {}x{} with {}x{}", shape.0, shape.1, m.rows, m.cols)));
    }
    Ok(shape)
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type IntMatrix = Matrix<i64>;
pub type FloatMatrix = Matrix<f64>;

impl<T: Element> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::from_i64(1);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!("empty shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_vec(n, m, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == T::zero())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&x, &y)| f(x, y)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, T::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, T::sub)
    }

    pub fn scale(&self, k: i64) -> Self {
        let k = T::from_i64(k);
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| v.mul(k)).collect() }
    }

    /// Conventional triple-loop product. Ground truth for every decoder.
    pub fn naive_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d = d.add(a.mul(b));
                }
            }
        }
        Ok(out)
    }

    fn sub_block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in r0..r0 + rows {
            data.extend_from_slice(&self.data[r * self.cols + c0..r * self.cols + c0 + cols]);
        }
        Self { rows, cols, data }
    }

    /// Splits into quadrants `[X11, X12, X21, X22]`.
    pub fn partition(&self) -> Result<[Self; 4]> {
        if !self.rows.is_multiple_of(2) || !self.cols.is_multiple_of(2) {
            return Err(Error::OddDimension { rows: self.rows, cols: self.cols });
        }
        let (h, w) = (self.rows / 2, self.cols / 2);
        Ok([
            self.sub_block(0, 0, h, w),
            self.sub_block(0, w, h, w),
            self.sub_block(h, 0, h, w),
            self.sub_block(h, w, h, w),
        ])
    }

    /// Inverse of [`Matrix::partition`].
    pub fn assemble(blocks: &[Self; 4]) -> Result<Self> {
        let [b11, b12, b21, b22] = blocks;
        if b11.rows != b12.rows || b21.rows != b22.rows || b11.cols != b21.cols || b12.cols != b22.cols {
            return Err(Error::DimensionMismatch("incompatible quadrant shapes".into()));
        }
        let rows = b11.rows + b21.rows;
        let cols = b11.cols + b12.cols;
        let mut data = Vec::with_capacity(rows * cols);
        for (left, right) in [(b11, b12), (b21, b22)] {
            for r in 0..left.rows {
                data.extend_from_slice(&left.data[r * left.cols..(r + 1) * left.cols]);
                data.extend_from_slice(&right.data[r * right.cols..(r + 1) * right.cols]);
            }
        }
        Ok(Self { rows, cols, data })
    }
}

impl IntMatrix {
    /// Uniform integer entries in `lo..=hi`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, lo: i64, hi: i64) -> Self {
        let data = (0..rows * cols).map(|_| rng.gen_range(lo..=hi)).collect();
        Self { rows, cols, data }
    }

    pub fn to_float(&self) -> FloatMatrix {
        FloatMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| v as f64).collect() }
    }
}

impl FloatMatrix {
    /// Norm-wise relative error `max|self - reference| / max|reference|`.
    pub fn max_relative_error(&self, reference: &Self) -> f64 {
        if self.shape() != reference.shape() {
            return f64::INFINITY;
        }
        let scale = reference.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = self.data.iter().zip(&reference.data).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}
