//! Tiny fixed-dimension linear algebra.
//!
//! The spatial block of every transform in this crate is at most 3 x 3
//! (ambient dimension <= 4, and one coordinate is the weight direction), so
//! a padded `[[f64; 3]; 3]` with an explicit active dimension covers every
//! use without pulling in a general-purpose matrix library. Vectors are
//! `[f64; 3]` with entries at or beyond the active dimension held at zero.

use crate::error::{Error, Result};

/// Point or direction in up to three spatial coordinates; unused trailing
/// entries are zero.
pub type Vec3 = [f64; 3];

pub fn dot(u: Vec3, v: Vec3) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

pub fn norm(u: Vec3) -> f64 {
    libm::sqrt(dot(u, u))
}

pub fn scale(u: Vec3, s: f64) -> Vec3 {
    [u[0] * s, u[1] * s, u[2] * s]
}

pub fn add(u: Vec3, v: Vec3) -> Vec3 {
    [u[0] + v[0], u[1] + v[1], u[2] + v[2]]
}

pub fn sub(u: Vec3, v: Vec3) -> Vec3 {
    [u[0] - v[0], u[1] - v[1], u[2] - v[2]]
}

/// Square matrix of active dimension `d <= 3`, stored row-major in a padded
/// 3 x 3 array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat {
    d: usize,
    m: [[f64; 3]; 3],
}

impl Mat {
    pub fn identity(d: usize) -> Result<Self> {
        let mut m = [[0.0; 3]; 3];
        if d == 0 || d > 3 {
            return Err(Error::domain("matrix dimension must be 1..=3"));
        }
        for (i, row) in m.iter_mut().enumerate().take(d) {
            row[i] = 1.0;
        }
        Ok(Mat { d, m })
    }

    /// Build from `d` rows of `d` finite entries each.
    pub fn from_rows(rows: &[alloc::vec::Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 || d > 3 {
            return Err(Error::domain("matrix dimension must be 1..=3"));
        }
        let mut m = [[0.0; 3]; 3];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::domain("matrix rows must be square"));
            }
            for (j, &x) in row.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::domain("matrix entries must be finite"));
                }
                m[i][j] = x;
            }
        }
        Ok(Mat { d, m })
    }

    pub fn diag(entries: &[f64]) -> Result<Self> {
        let d = entries.len();
        let mut out = Mat::identity(d)?;
        for (i, &x) in entries.iter().enumerate() {
            out.m[i][i] = x;
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.m[i][j] = v;
    }

    pub fn rows(&self) -> alloc::vec::Vec<alloc::vec::Vec<f64>> {
        (0..self.d)
            .map(|i| self.m[i][..self.d].to_vec())
            .collect()
    }

    pub fn matvec(&self, v: Vec3) -> Vec3 {
        let mut out = [0.0; 3];
        for i in 0..self.d {
            out[i] = dot(self.m[i].into(), v);
        }
        out
    }

    /// `A^T v`, used for pulling covectors (gradients) through a transform.
    pub fn transpose_matvec(&self, v: Vec3) -> Vec3 {
        self.transpose().matvec(v)
    }

    pub fn transpose(&self) -> Mat {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.m[j][i];
            }
        }
        Mat { d: self.d, m }
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        debug_assert_eq!(self.d, other.d);
        let mut m = [[0.0; 3]; 3];
        for i in 0..self.d {
            for j in 0..self.d {
                let mut s = 0.0;
                for (k, row) in other.m.iter().enumerate().take(self.d) {
                    s += self.m[i][k] * row[j];
                }
                m[i][j] = s;
            }
        }
        Mat { d: self.d, m }
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        match self.d {
            1 => m[0][0],
            2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
            _ => {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            }
        }
    }

    /// Inverse by adjugate; errors if the determinant is negligible
    /// relative to the entries.
    pub fn inverse(&self) -> Result<Mat> {
        let det = self.det();
        let scale = self
            .m
            .iter()
            .flatten()
            .fold(0.0_f64, |s, &x| s.max(x.abs()))
            .max(1e-300);
        if det.abs() < 1e-14 * libm::pow(scale, self.d as f64) {
            return Err(Error::Degenerate(alloc::format!(
                "matrix is numerically singular (det = {det:e})"
            )));
        }
        let m = &self.m;
        let mut out = [[0.0; 3]; 3];
        match self.d {
            1 => out[0][0] = 1.0 / det,
            2 => {
                out[0][0] = m[1][1] / det;
                out[0][1] = -m[0][1] / det;
                out[1][0] = -m[1][0] / det;
                out[1][1] = m[0][0] / det;
            }
            _ => {
                for i in 0..3 {
                    for j in 0..3 {
                        let r0 = (i + 1) % 3;
                        let r1 = (i + 2) % 3;
                        let c0 = (j + 1) % 3;
                        let c1 = (j + 2) % 3;
                        // Cofactor expansion; note the transpose (j, i).
                        out[j][i] =
                            (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
                    }
                }
            }
        }
        Ok(Mat { d: self.d, m: out })
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: Vec3) -> Result<Vec3> {
        Ok(self.inverse()?.matvec(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn det_and_inverse_3x3() {
        let a = Mat::from_rows(&[
            vec![2.0, 1.0, 0.5],
            vec![0.0, 3.0, -1.0],
            vec![1.0, 0.0, 1.0],
        ])
        .unwrap();
        // Hand expansion: 2*(3*1 - (-1)*0) - 1*(0*1 - (-1)*1) + 0.5*(0 - 3)
        assert!((a.det() - (6.0 - 1.0 - 1.5)).abs() < 1e-14);
        let inv = a.inverse().unwrap();
        let prod = a.matmul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod.get(i, j) - want).abs() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn inverse_2x2_and_1x1() {
        let a = Mat::from_rows(&[vec![3.0, 1.0], vec![2.0, 4.0]]).unwrap();
        let x = a.solve([5.0, 6.0, 0.0]).unwrap();
        assert!((3.0 * x[0] + x[1] - 5.0).abs() < 1e-12);
        assert!((2.0 * x[0] + 4.0 * x[1] - 6.0).abs() < 1e-12);

        let s = Mat::from_rows(&[vec![4.0]]).unwrap();
        assert!((s.inverse().unwrap().get(0, 0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn transpose_is_adjoint() {
        let a = Mat::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![0.5, -1.0, 0.0],
            vec![2.0, 2.0, 1.0],
        ])
        .unwrap();
        let u = [1.0, -2.0, 0.5];
        let v = [0.3, 0.7, -1.1];
        let lhs = dot(a.matvec(u), v);
        let rhs = dot(u, a.transpose_matvec(v));
        assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn singular_is_rejected() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(a.inverse().is_err());
    }

    #[test]
    fn diag_builder() {
        let d = Mat::diag(&[2.0, 3.0]).unwrap();
        assert!((d.det() - 6.0).abs() < 1e-15);
        let v = d.matvec([1.0, 1.0, 0.0]);
        assert!((v[0] - 2.0).abs() < 1e-15 && (v[1] - 3.0).abs() < 1e-15);
    }
}
