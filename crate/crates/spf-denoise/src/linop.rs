//! Matrix-free linear operators: the 1-D forward difference and the stacked
//! 2-D discrete gradient, with adjoints and operator-norm estimation.
//!
//! The 2-D gradient acts on the column-major vectorization of an `N x N`
//! image. Its first `N*N` output entries are vertical (within-column)
//! differences, the rest horizontal differences; the isotropic-TV partition
//! pairs entry `j` with entry `N*N + j`.

use crate::penalty::Partition;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinOpError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("power iteration did not converge within {0} iterations")]
    NonConvergence(usize),
}

const POWER_ITER_MAX: usize = 10_000;

/// A matrix-free linear map with an exact adjoint.
pub trait LinearOperator: Sync {
    fn domain_dim(&self) -> usize;
    fn range_dim(&self) -> usize;

    /// `out = A x`; caller guarantees `x.len() == domain_dim()` and
    /// `out.len() == range_dim()`.
    fn apply_into(&self, x: &[f64], out: &mut [f64]);

    /// `out = A^T y`; caller guarantees matching dimensions.
    fn apply_adjoint_into(&self, y: &[f64], out: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>, LinOpError> {
        if x.len() != self.domain_dim() {
            return Err(LinOpError::DimensionMismatch {
                expected: self.domain_dim(),
                actual: x.len(),
            });
        }
        let mut out = vec![0.0; self.range_dim()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>, LinOpError> {
        if y.len() != self.range_dim() {
            return Err(LinOpError::DimensionMismatch {
                expected: self.range_dim(),
                actual: y.len(),
            });
        }
        let mut out = vec![0.0; self.domain_dim()];
        self.apply_adjoint_into(y, &mut out);
        Ok(out)
    }

    /// Largest eigenvalue of `A^T A` by power iteration, stopping when the
    /// relative eigenvalue change drops below `tol`.
    ///
    /// The starting vector is deterministic, so repeated calls return the
    /// same estimate.
    fn op_norm_sq(&self, tol: f64) -> Result<f64, LinOpError> {
        assert!(tol > 0.0);
        let d = self.domain_dim();
        // Deterministic pseudo-random start; a constant vector would sit in
        // the null space of a difference operator.
        let mut state: u64 = 0x9e3779b97f4a7c15;
        let mut v: Vec<f64> = (0..d)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        let mut range_buf = vec![0.0; self.range_dim()];
        let mut w = vec![0.0; d];
        let mut eig_prev = 0.0;
        for k in 0..POWER_ITER_MAX {
            let vn = norm(&v);
            if vn == 0.0 {
                return Ok(0.0);
            }
            for x in v.iter_mut() {
                *x /= vn;
            }
            self.apply_into(&v, &mut range_buf);
            self.apply_adjoint_into(&range_buf, &mut w);
            let eig: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
            if k > 0 && (eig - eig_prev).abs() <= tol * eig.abs().max(f64::MIN_POSITIVE) {
                return Ok(eig);
            }
            eig_prev = eig;
            std::mem::swap(&mut v, &mut w);
        }
        Err(LinOpError::NonConvergence(POWER_ITER_MAX))
    }
}

/// 1-D forward difference with a zero first row:
/// `(Dx)_0 = 0`, `(Dx)_i = x_i - x_{i-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiffOp1d {
    n: usize,
}

impl DiffOp1d {
    pub fn new(n: usize) -> Self {
        assert!(n > 0);
        Self { n }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl LinearOperator for DiffOp1d {
    fn domain_dim(&self) -> usize {
        self.n
    }

    fn range_dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
        for i in 1..self.n {
            out[i] = x[i] - x[i - 1];
        }
    }

    fn apply_adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        // Row 0 of D is zero, so y[0] never contributes.
        let n = self.n;
        for j in 0..n {
            let mut v = if j >= 1 { y[j] } else { 0.0 };
            if j + 1 < n {
                v -= y[j + 1];
            }
            out[j] = v;
        }
    }
}

/// The stacked 2-D gradient `[I (x) D; D (x) I]` on column-major `N x N`
/// images: domain `N^2`, range `2 N^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GradOperator2d {
    n_side: usize,
}

impl GradOperator2d {
    pub fn new(n_side: usize) -> Self {
        assert!(n_side > 0);
        Self { n_side }
    }

    pub fn n_side(&self) -> usize {
        self.n_side
    }

    /// The matching isotropic-TV partition: block `j` pairs the vertical and
    /// horizontal difference at pixel `j`.
    pub fn tv_partition(&self) -> Partition {
        Partition::tv_pairs(self.n_side * self.n_side)
    }

    /// Closed-form squared operator norm `8 sin^2((N-1) pi / (2N))`,
    /// confirmed against the power-iteration estimate in tests.
    pub fn norm_sq_closed_form(&self) -> f64 {
        let n = self.n_side as f64;
        let s = ((n - 1.0) * std::f64::consts::PI / (2.0 * n)).sin();
        8.0 * s * s
    }
}

impl LinearOperator for GradOperator2d {
    fn domain_dim(&self) -> usize {
        self.n_side * self.n_side
    }

    fn range_dim(&self) -> usize {
        2 * self.n_side * self.n_side
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n_side;
        let n2 = n * n;
        // Vertical: D applied within each column (I (x) D).
        for c in 0..n {
            let base = c * n;
            out[base] = 0.0;
            for r in 1..n {
                out[base + r] = x[base + r] - x[base + r - 1];
            }
        }
        // Horizontal: differences across columns (D (x) I).
        for r in 0..n {
            out[n2 + r] = 0.0;
        }
        for c in 1..n {
            let base = c * n;
            for r in 0..n {
                out[n2 + base + r] = x[base + r] - x[base - n + r];
            }
        }
    }

    fn apply_adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        let n = self.n_side;
        let n2 = n * n;
        let (yv, yh) = y.split_at(n2);
        // D^T within columns.
        for c in 0..n {
            let base = c * n;
            for r in 0..n {
                let mut v = if r >= 1 { yv[base + r] } else { 0.0 };
                if r + 1 < n {
                    v -= yv[base + r + 1];
                }
                out[base + r] = v;
            }
        }
        // D^T across columns.
        for c in 0..n {
            let base = c * n;
            for r in 0..n {
                let mut v = if c >= 1 { yh[base + r] } else { 0.0 };
                if c + 1 < n {
                    v -= yh[base + n + r];
                }
                out[base + r] += v;
            }
        }
    }
}

/// The identity map on `R^n`; used when the penalty acts on the variable
/// directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentityOp {
    n: usize,
}

impl IdentityOp {
    pub fn new(n: usize) -> Self {
        assert!(n > 0);
        Self { n }
    }
}

impl LinearOperator for IdentityOp {
    fn domain_dim(&self) -> usize {
        self.n
    }

    fn range_dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }

    fn apply_adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        out.copy_from_slice(y);
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
