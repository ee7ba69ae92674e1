//! Symmetric 1x1 / 2x2 matrices with closed-form linear algebra.
//!
//! Everything in this crate lives in dimension one or two, so a fixed-size
//! representation with explicit formulas beats a general linear-algebra
//! dependency. Entries are stored as [m00, m01, m11]; dimension 1 uses m00.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    a: [f64; 3],
}

impl SymMatrix {
    pub fn new_1d(v: f64) -> Self {
        SymMatrix { dim: 1, a: [v, 0.0, 0.0] }
    }

    pub fn new_2d(m00: f64, m01: f64, m11: f64) -> Self {
        SymMatrix { dim: 2, a: [m00, m01, m11] }
    }

    /// Builds from a full row-major d x d matrix, checking symmetry to 1e-12.
    pub fn from_full(dim: usize, rows: &[f64]) -> Result<Self> {
        match dim {
            1 => {
                if rows.len() != 1 {
                    return Err(Error::invalid("expected 1 entry for a 1x1 matrix"));
                }
                Ok(SymMatrix::new_1d(rows[0]))
            }
            2 => {
                if rows.len() != 4 {
                    return Err(Error::invalid("expected 4 entries for a 2x2 matrix"));
                }
                if (rows[1] - rows[2]).abs() > SYMMETRY_TOL {
                    return Err(Error::invalid(format!(
                        "matrix not symmetric: m01={} m10={}",
                        rows[1], rows[2]
                    )));
                }
                Ok(SymMatrix::new_2d(rows[0], 0.5 * (rows[1] + rows[2]), rows[3]))
            }
            _ => Err(Error::invalid(format!("unsupported dimension {dim}"))),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        match dim {
            1 => SymMatrix::new_1d(s),
            2 => SymMatrix::new_2d(s, 0.0, s),
            _ => panic!("unsupported dimension {dim}"),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.a[0],
            (0, 1) | (1, 0) => self.a[1],
            (1, 1) => self.a[2],
            _ => panic!("index out of range"),
        }
    }

    pub fn det(&self) -> f64 {
        match self.dim {
            1 => self.a[0],
            _ => self.a[0] * self.a[2] - self.a[1] * self.a[1],
        }
    }

    pub fn trace(&self) -> f64 {
        match self.dim {
            1 => self.a[0],
            _ => self.a[0] + self.a[2],
        }
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        debug_assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            a: [self.a[0] + other.a[0], self.a[1] + other.a[1], self.a[2] + other.a[2]],
        }
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix { dim: self.dim, a: [self.a[0] * s, self.a[1] * s, self.a[2] * s] }
    }

    /// Adds s * v vᵀ (rank-one update).
    pub fn add_outer(&self, v: [f64; 2], s: f64) -> SymMatrix {
        match self.dim {
            1 => SymMatrix::new_1d(self.a[0] + s * v[0] * v[0]),
            _ => SymMatrix::new_2d(
                self.a[0] + s * v[0] * v[0],
                self.a[1] + s * v[0] * v[1],
                self.a[2] + s * v[1] * v[1],
            ),
        }
    }

    pub fn inverse(&self) -> Result<SymMatrix> {
        let det = self.det();
        if det <= 0.0 || !det.is_finite() {
            return Err(Error::domain(format!("matrix not invertible (det={det})")));
        }
        match self.dim {
            1 => Ok(SymMatrix::new_1d(1.0 / self.a[0])),
            _ => Ok(SymMatrix::new_2d(self.a[2] / det, -self.a[1] / det, self.a[0] / det)),
        }
    }

    /// vᵀ M v
    pub fn quad_form(&self, v: [f64; 2]) -> f64 {
        match self.dim {
            1 => self.a[0] * v[0] * v[0],
            _ => self.a[0] * v[0] * v[0] + 2.0 * self.a[1] * v[0] * v[1] + self.a[2] * v[1] * v[1],
        }
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        match self.dim {
            1 => [self.a[0] * v[0], 0.0],
            _ => [
                self.a[0] * v[0] + self.a[1] * v[1],
                self.a[1] * v[0] + self.a[2] * v[1],
            ],
        }
    }

    /// tr(A B) for symmetric A, B.
    pub fn trace_prod(&self, other: &SymMatrix) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        match self.dim {
            1 => self.a[0] * other.a[0],
            _ => self.a[0] * other.a[0] + 2.0 * self.a[1] * other.a[1] + self.a[2] * other.a[2],
        }
    }

    /// Lower-triangular Cholesky factor; fails when the matrix is not
    /// positive definite.
    pub fn cholesky(&self) -> Result<CholFactor> {
        match self.dim {
            1 => {
                if self.a[0] <= 0.0 || !self.a[0].is_finite() {
                    return Err(Error::domain("matrix not positive definite".to_string()));
                }
                Ok(CholFactor { dim: 1, l: [self.a[0].sqrt(), 0.0, 0.0] })
            }
            _ => {
                if self.a[0] <= 0.0 || !self.a[0].is_finite() {
                    return Err(Error::domain("matrix not positive definite".to_string()));
                }
                let l00 = self.a[0].sqrt();
                let l10 = self.a[1] / l00;
                let rest = self.a[2] - l10 * l10;
                if rest <= 0.0 || !rest.is_finite() {
                    return Err(Error::domain("matrix not positive definite".to_string()));
                }
                Ok(CholFactor { dim: 2, l: [l00, l10, rest.sqrt()] })
            }
        }
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_ok()
    }
}

/// Lower-triangular Cholesky factor L with M = L Lᵀ; entries [l00, l10, l11].
#[derive(Clone, Copy, Debug)]
pub struct CholFactor {
    dim: usize,
    l: [f64; 3],
}

impl CholFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn log_det(&self) -> f64 {
        match self.dim {
            1 => 2.0 * self.l[0].ln(),
            _ => 2.0 * (self.l[0].ln() + self.l[2].ln()),
        }
    }

    /// L z for a standard-normal vector z: used to sample N(0, M).
    pub fn mul_vec(&self, z: [f64; 2]) -> [f64; 2] {
        match self.dim {
            1 => [self.l[0] * z[0], 0.0],
            _ => [self.l[0] * z[0], self.l[1] * z[0] + self.l[2] * z[1]],
        }
    }

    /// Solves L w = v by forward substitution.
    pub fn forward_solve(&self, v: [f64; 2]) -> [f64; 2] {
        match self.dim {
            1 => [v[0] / self.l[0], 0.0],
            _ => {
                let w0 = v[0] / self.l[0];
                [w0, (v[1] - self.l[1] * w0) / self.l[2]]
            }
        }
    }

    /// Recomposes L Lᵀ.
    pub fn to_matrix(&self) -> SymMatrix {
        match self.dim {
            1 => SymMatrix::new_1d(self.l[0] * self.l[0]),
            _ => SymMatrix::new_2d(
                self.l[0] * self.l[0],
                self.l[0] * self.l[1],
                self.l[1] * self.l[1] + self.l[2] * self.l[2],
            ),
        }
    }
}
