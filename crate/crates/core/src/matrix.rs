//! Small dense phase-indexed matrices.

use std::ops::{Add, Deref, DerefMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An `N x N` real matrix indexed by phases.
///
/// Carries point evaluations of the coefficient functions, the weight
/// matrix and the eigenvalue matrices. Entries are stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatrix(DMatrix<f64>);

impl PhaseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Matrix with every entry equal to one (`e_N e_N^*`).
    pub fn ones(n: usize) -> Self {
        Self(DMatrix::from_element(n, n, 1.0))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 }))
    }

    /// Builds a matrix from row slices. Panics if the rows are ragged or
    /// the result is not square.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must form a square matrix");
        Self(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        Self(DMatrix::from_fn(n, n, f))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn diagonal_vec(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)]).collect()
    }

    /// Largest absolute off-diagonal entry.
    pub fn off_diagonal_norm(&self) -> f64 {
        let n = self.dim();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.max(self.0[(i, j)].abs());
                }
            }
        }
        m
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0.row(i).sum()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.0.row(i).iter().copied().collect())
            .collect()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Max elementwise distance to another matrix of the same dimension.
    pub fn max_abs_diff(&self, other: &PhaseMatrix) -> f64 {
        (&self.0 - &other.0).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl From<DMatrix<f64>> for PhaseMatrix {
    fn from(m: DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "phase matrices are square");
        Self(m)
    }
}

impl Deref for PhaseMatrix {
    type Target = DMatrix<f64>;
    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

impl DerefMut for PhaseMatrix {
    fn deref_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.0
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr<&PhaseMatrix> for &PhaseMatrix {
            type Output = PhaseMatrix;
            fn $f(self, rhs: &PhaseMatrix) -> PhaseMatrix {
                PhaseMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<PhaseMatrix> for PhaseMatrix {
            type Output = PhaseMatrix;
            fn $f(self, rhs: PhaseMatrix) -> PhaseMatrix {
                PhaseMatrix(self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Mul<f64> for &PhaseMatrix {
    type Output = PhaseMatrix;
    fn mul(self, rhs: f64) -> PhaseMatrix {
        PhaseMatrix(&self.0 * rhs)
    }
}

impl Neg for PhaseMatrix {
    type Output = PhaseMatrix;
    fn neg(self) -> PhaseMatrix {
        PhaseMatrix(-self.0)
    }
}

impl Serialize for PhaseMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PhaseMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("phase matrix must be square"));
        }
        Ok(PhaseMatrix::from_rows(&rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ones_has_unit_row_sums_times_n() {
        let m = PhaseMatrix::ones(3);
        assert_eq!(m.row_sums(), vec![3.0; 3]);
    }

    #[test]
    fn serde_round_trip_keeps_rows() {
        let m = PhaseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[1.0,2.0],[3.0,4.0]]");
        let back: PhaseMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn ragged_json_is_rejected() {
        assert!(serde_json::from_str::<PhaseMatrix>("[[1.0],[2.0,3.0]]").is_err());
    }
}
