//! Small dense matrices.
//!
//! Deliberately minimal: the rest of the crate never needs anything beyond
//! dense products, linear solves and matrix exponentials on matrices of at
//! most a few tens of rows, so a row-major `Vec<f64>` with Gaussian
//! elimination is all there is.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

#[cfg(not(feature = "std"))]
use num_traits::Float;

#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatError {
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    Dimension(usize, usize, usize, usize),
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    /// Column vector from a slice.
    pub fn col_vec(v: &[f64]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)];
            }
        }
        out
    }

    pub fn scale(&self, k: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * k).collect(),
        }
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Solve `self * X = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &Mat) -> Result<Mat, MatError> {
        if self.rows != self.cols || self.rows != rhs.rows {
            return Err(MatError::Dimension(self.rows, self.cols, rhs.rows, rhs.cols));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for k in 0..n {
            let mut piv = k;
            for r in k + 1..n {
                if a[(r, k)].abs() > a[(piv, k)].abs() {
                    piv = r;
                }
            }
            if a[(piv, k)].abs() < 1e-300 {
                return Err(MatError::Singular);
            }
            if piv != k {
                for c in 0..n {
                    let t = a[(k, c)];
                    a[(k, c)] = a[(piv, c)];
                    a[(piv, c)] = t;
                }
                for c in 0..b.cols {
                    let t = b[(k, c)];
                    b[(k, c)] = b[(piv, c)];
                    b[(piv, c)] = t;
                }
            }
            for r in k + 1..n {
                let f = a[(r, k)] / a[(k, k)];
                if f == 0.0 {
                    continue;
                }
                for c in k..n {
                    a[(r, c)] -= f * a[(k, c)];
                }
                for c in 0..b.cols {
                    b[(r, c)] -= f * b[(k, c)];
                }
            }
        }
        for k in (0..n).rev() {
            for c in 0..b.cols {
                let mut s = b[(k, c)];
                for j in k + 1..n {
                    s -= a[(k, j)] * b[(j, c)];
                }
                b[(k, c)] = s / a[(k, k)];
            }
        }
        Ok(b)
    }

    pub fn inverse(&self) -> Result<Mat, MatError> {
        self.solve(&Mat::identity(self.rows))
    }

    /// Matrix exponential by scaling-and-squaring with a Taylor series.
    pub fn expm(&self) -> Mat {
        assert_eq!(self.rows, self.cols);
        let norm = self.inf_norm();
        let mut squarings = 0u32;
        let mut scaled = self.clone();
        if norm > 0.5 {
            squarings = (norm / 0.5).log2().ceil() as u32;
            scaled = self.scale(1.0 / 2f64.powi(squarings as i32));
        }
        let mut result = Mat::identity(self.rows);
        let mut term = Mat::identity(self.rows);
        for k in 1..=20 {
            term = &term * &scaled;
            term = term.scale(1.0 / k as f64);
            result = &result + &term;
            if term.max_abs() < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            result = &result * &result;
        }
        result
    }

    /// Spectral radius via Gelfand's formula with repeated squaring.
    ///
    /// Maintains the invariant `A^(2^i) = M_i * exp(log_scale_i)` while
    /// normalizing `M` before every squaring; after `d` doublings the
    /// norm-vs-radius gap vanishes as `(poly in 2^d)^(1/2^d)`.
    pub fn spectral_radius(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let mut log_scale = 0.0f64;
        let doublings = 40;
        for _ in 0..doublings {
            let norm = m.inf_norm();
            if norm == 0.0 {
                return 0.0;
            }
            log_scale = 2.0 * (log_scale + norm.ln());
            let mn = m.scale(1.0 / norm);
            m = &mn * &mn;
        }
        let final_norm = m.inf_norm().max(1e-300);
        ((log_scale + final_norm.ln()) / 2f64.powi(doublings)).exp()
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in mul");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == 0.0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        out
    }
}

impl Add for &Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}
