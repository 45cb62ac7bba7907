//! Shared helpers for the integration tests: a deterministic RNG, dense
//! reference matrices, brute-force minimizers, and a derivative-free pattern
//! search. These are deliberately independent of the library's own
//! implementations so they can serve as oracles.

use spf_denoise::linop::LinearOperator;

/// Small deterministic RNG (xorshift*), independent of the library's RNG.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x.wrapping_mul(0x2545f4914f6cdd1d)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

/// Dense matrix of a matrix-free operator, built column by column.
pub fn dense_matrix(op: &dyn LinearOperator) -> Vec<Vec<f64>> {
    let (d, r) = (op.domain_dim(), op.range_dim());
    let mut cols = vec![vec![0.0; r]; d];
    let mut e = vec![0.0; d];
    for (j, col) in cols.iter_mut().enumerate() {
        e[j] = 1.0;
        op.apply_into(&e, col);
        e[j] = 0.0;
    }
    // Transpose to row-major.
    let mut m = vec![vec![0.0; d]; r];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..r {
            m[i][j] = col[i];
        }
    }
    m
}

/// Dense forward-difference matrix with a zero first row.
pub fn dense_diff(n: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for i in 1..n {
        m[i][i] = 1.0;
        m[i][i - 1] = -1.0;
    }
    m
}

/// Kronecker product of dense matrices.
pub fn kron(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (ra, ca) = (a.len(), a[0].len());
    let (rb, cb) = (b.len(), b[0].len());
    let mut m = vec![vec![0.0; ca * cb]; ra * rb];
    for ia in 0..ra {
        for ja in 0..ca {
            if a[ia][ja] == 0.0 {
                continue;
            }
            for ib in 0..rb {
                for jb in 0..cb {
                    m[ia * rb + ib][ja * cb + jb] = a[ia][ja] * b[ib][jb];
                }
            }
        }
    }
    m
}

pub fn identity(n: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

/// Stack two dense matrices vertically.
pub fn vstack(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut m = a;
    m.extend(b);
    m
}

/// Brute-force 1-D minimizer of `f` over `[lo, hi]` with the given step;
/// returns (argmin, min).
pub fn grid_min_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let n = ((hi - lo) / step).ceil() as usize;
    let mut best = (lo, f(lo));
    for i in 1..=n {
        let x = lo + step * i as f64;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

/// Coordinate-wise pattern search with shrinking steps; a generic numeric
/// minimizer used as an independent oracle for small dimensions.
pub fn pattern_search(f: impl Fn(&[f64]) -> f64, start: &[f64], step0: f64, tol: f64) -> Vec<f64> {
    let mut x = start.to_vec();
    let mut fx = f(&x);
    let mut step = step0;
    while step > tol {
        let mut improved = false;
        for i in 0..x.len() {
            for delta in [step, -step] {
                let old = x[i];
                x[i] = old + delta;
                let fv = f(&x);
                if fv < fx {
                    fx = fv;
                    improved = true;
                } else {
                    x[i] = old;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    x
}

pub fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    d / l2(b).max(1e-12)
}
