//! Small dense row-major matrices over any commutative ring.
//!
//! The same container carries exact Gaussian rationals, floating-point
//! complex numbers and polynomial entries, so the Lax builders are written
//! once against it.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Clone + Zero> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }
}

impl<S: Clone + Zero + One> Mat<S> {
    pub fn identity(n: usize) -> Self {
        Mat::from_fn(n, n, |i, j| if i == j { S::one() } else { S::zero() })
    }
}

impl<S> Mat<S> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: S) {
        self.data[i * self.cols + j] = value;
    }

    pub fn entries(&self) -> impl Iterator<Item = &S> {
        self.data.iter()
    }

    pub fn transpose(&self) -> Mat<S>
    where
        S: Clone,
    {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Mat { rows: self.cols, cols: self.rows, data }
    }

    pub fn map<T>(&self, f: impl FnMut(&S) -> T) -> Mat<T> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }
}

impl<S> Mat<S>
where
    S: Clone + Zero + Add<Output = S> + Mul<Output = S>,
{
    pub fn matmul(&self, rhs: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out: Mat<S> = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.data[idx] = out.data[idx].clone() + a.clone() * b.clone();
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn left_apply(&self, row: &[S]) -> Vec<S> {
        assert_eq!(row.len(), self.rows);
        (0..self.cols)
            .map(|j| {
                row.iter()
                    .enumerate()
                    .fold(S::zero(), |acc, (i, r)| acc + r.clone() * self.get(i, j).clone())
            })
            .collect()
    }

    /// Matrix times column vector.
    pub fn apply(&self, col: &[S]) -> Vec<S> {
        assert_eq!(col.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                col.iter()
                    .enumerate()
                    .fold(S::zero(), |acc, (j, c)| acc + self.get(i, j).clone() * c.clone())
            })
            .collect()
    }

    /// Kronecker product `self ⊗ rhs`; index `(a, b)` maps to `a * rhs.rows + b`.
    pub fn kron(&self, rhs: &Mat<S>) -> Mat<S> {
        Mat::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |i, j| {
            let (a, b) = (i / rhs.rows, i % rhs.rows);
            let (c, d) = (j / rhs.cols, j % rhs.cols);
            self.get(a, c).clone() * rhs.get(b, d).clone()
        })
    }

    pub fn scale(&self, s: &S) -> Mat<S> {
        self.map(|x| s.clone() * x.clone())
    }

    /// Restriction to the given basis indices (rows and columns).
    pub fn restrict(&self, indices: &[usize]) -> Mat<S> {
        Mat::from_fn(indices.len(), indices.len(), |i, j| self.get(indices[i], indices[j]).clone())
    }
}

impl<S> Mat<S>
where
    S: Clone + Zero + Sub<Output = S>,
{
    pub fn commutator(&self, rhs: &Mat<S>) -> Mat<S>
    where
        S: Add<Output = S> + Mul<Output = S>,
    {
        self.matmul(rhs) - rhs.matmul(self)
    }
}

impl<S: Clone + Add<Output = S>> Add for Mat<S> {
    type Output = Mat<S>;
    fn add(self, rhs: Mat<S>) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.into_iter().zip(rhs.data).map(|(a, b)| a + b).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }
}

impl<S: Clone + Sub<Output = S>> Sub for Mat<S> {
    type Output = Mat<S>;
    fn sub(self, rhs: Mat<S>) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.into_iter().zip(rhs.data).map(|(a, b)| a - b).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }
}

impl<S: Clone + Neg<Output = S>> Neg for Mat<S> {
    type Output = Mat<S>;
    fn neg(self) -> Mat<S> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.into_iter().map(|a| -a).collect() }
    }
}

pub type CMat = Mat<Complex64>;

impl CMat {
    pub fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<Complex64>) -> CMat {
        Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Largest singular value.
    pub fn norm2(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.singular_values().into_iter().fold(0.0, f64::max)
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.to_nalgebra().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}
