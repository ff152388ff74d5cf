//! Dense row-major complex matrices over any [`Real`] scalar.

use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::{cabs, cabs2, lift, lower, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct CMat<R> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<R>>,
}

/// Double precision carrier used on public boundaries and for serialization.
pub type ComplexMatrix = CMat<f64>;

impl<R: Real> CMat<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(R::zero(), R::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(R::one(), R::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<R>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex<R>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn diag(d: &[Complex<R>]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
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

    pub fn as_slice(&self) -> &[Complex<R>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<R>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<R>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, k: R) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| Complex::new(z.re * k, z.im * k)).collect(),
        }
    }

    pub fn scale_c(&self, k: Complex<R>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| *z * k).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape());
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| *a - *b).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == R::zero() && a.im == R::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * *b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex<R>]) -> Vec<Complex<R>> {
        assert_eq!(self.cols, v.len(), "vector length differs from column count");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Complex::new(R::zero(), R::zero()), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    pub fn frobenius(&self) -> R {
        self.data.iter().fold(R::zero(), |acc, z| acc + cabs2(*z)).sqrt()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> R {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(R::zero(), |acc, z| acc + cabs(*z)))
            .fold(R::zero(), R::max)
    }

    pub fn max_abs(&self) -> R {
        self.data.iter().map(|z| cabs(*z)).fold(R::zero(), R::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn to_f64(&self) -> ComplexMatrix {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| lower(*z)).collect(),
        }
    }
}

impl ComplexMatrix {
    pub fn lift<S: Real>(&self) -> CMat<S> {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| lift(*z)).collect(),
        }
    }
}

impl<R> Index<(usize, usize)> for CMat<R> {
    type Output = Complex<R>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<R> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<R> IndexMut<(usize, usize)> for CMat<R> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<R> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<R: Real> Mul for &CMat<R> {
    type Output = CMat<R>;

    fn mul(self, rhs: Self) -> CMat<R> {
        self.matmul(rhs)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixWire {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixWire {
            rows: self.rows,
            cols: self.cols,
            entries: self.data.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let w = MatrixWire::deserialize(de)?;
        let data = w.entries.iter().map(|p| Complex::new(p[0], p[1])).collect();
        CMat::from_row_major(w.rows, w.cols, data).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for complex vectors as `[[re, im], ...]`.
pub(crate) mod complex_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_seq(v.iter().map(|z| [z.re, z.im]))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Complex64>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(de)?;
        Ok(raw.into_iter().map(|p| Complex64::new(p[0], p[1])).collect())
    }
}
