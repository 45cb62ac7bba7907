//! Scalar and block-separable penalty functions.
//!
//! The building block is the scalar MCP-style penalty obtained by subtracting
//! the Moreau envelope (Huber function) from the absolute value:
//! `|x| - env_alpha|x|`. It is quadratic on `[-alpha, alpha]` and constant
//! `alpha/2` beyond, so large entries are left unpenalized at the margin.
//!
//! Block-separable versions are driven by a [`Partition`] of the coordinate
//! indices: the penalty of a vector is the sum over blocks of the scalar
//! penalty applied to the block's Euclidean norm (a "compositional norm" when
//! no envelope is subtracted). All proximity operators reduce blockwise to
//! the scalar case along the block direction.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PenaltyError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("set-valued regime (beta >= alpha); use blockwise prox_l2_mcp directly")]
    SetValuedRegime,
}

/// Soft thresholding: the proximity operator of `beta * |.|`.
pub fn prox_abs(x: f64, beta: f64) -> f64 {
    assert!(beta > 0.0);
    x.signum() * (x.abs() - beta).max(0.0)
}

/// Moreau envelope of the absolute value (Huber function) with index `alpha`.
pub fn env_abs(x: f64, alpha: f64) -> f64 {
    assert!(alpha > 0.0);
    if x.abs() <= alpha {
        x * x / (2.0 * alpha)
    } else {
        x.abs() - 0.5 * alpha
    }
}

/// The scalar MCP penalty `|x| - env_abs(x, alpha)`.
///
/// Quadratic near the origin, constant `alpha/2` for `|x| >= alpha`.
pub fn eval_mcp(x: f64, alpha: f64) -> f64 {
    assert!(alpha > 0.0);
    if x.abs() <= alpha {
        x.abs() - x * x / (2.0 * alpha)
    } else {
        0.5 * alpha
    }
}

/// Scalar MCP penalty with a fixed envelope index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMcp {
    alpha: f64,
}

impl ScalarMcp {
    pub fn new(alpha: f64) -> Self {
        assert!(alpha > 0.0, "envelope index must be positive");
        Self { alpha }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_mcp(x, self.alpha)
    }

    pub fn prox(&self, x: f64, beta: f64) -> ProxResult {
        prox_mcp(x, self.alpha, beta)
    }
}

/// Output of a possibly set-valued proximity operator.
///
/// Every reported point attains the same minimal prox objective value.
#[derive(Debug, Clone, PartialEq)]
pub enum ProxResult {
    Single(f64),
    /// Two distinct minimizers (the tie at `|x| = sqrt(alpha*beta)` when
    /// `beta > alpha`).
    Pair(f64, f64),
    /// A full interval of minimizers (the tie at `|x| = alpha` when
    /// `beta = alpha`), with `lo <= hi`.
    Interval { lo: f64, hi: f64 },
}

impl ProxResult {
    /// Representative points: the listed minimizers, or the interval
    /// endpoints.
    pub fn points(&self) -> Vec<f64> {
        match *self {
            ProxResult::Single(p) => vec![p],
            ProxResult::Pair(a, b) => vec![a, b],
            ProxResult::Interval { lo, hi } => vec![lo, hi],
        }
    }

    /// Deterministic single-value selection: the point of smallest
    /// magnitude, ties broken toward zero.
    pub fn select_sparsest(&self) -> f64 {
        match *self {
            ProxResult::Single(p) => p,
            ProxResult::Pair(a, b) => {
                if a.abs() <= b.abs() {
                    a
                } else {
                    b
                }
            }
            ProxResult::Interval { lo, hi } => {
                if lo <= 0.0 && 0.0 <= hi {
                    0.0
                } else if lo.abs() <= hi.abs() {
                    lo
                } else {
                    hi
                }
            }
        }
    }

    pub fn is_interval(&self) -> bool {
        matches!(self, ProxResult::Interval { .. })
    }
}

fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Proximity operator of `beta * eval_mcp(., alpha)`, covering all three
/// `beta`/`alpha` regimes (set-valued for `beta >= alpha`).
pub fn prox_mcp(x: f64, alpha: f64, beta: f64) -> ProxResult {
    assert!(alpha > 0.0 && beta > 0.0);
    let ax = x.abs();
    let s = sgn(x);
    if beta < alpha {
        if ax <= alpha {
            ProxResult::Single(alpha / (alpha - beta) * s * (ax - beta).max(0.0))
        } else {
            ProxResult::Single(x)
        }
    } else if beta == alpha {
        if ax < alpha {
            ProxResult::Single(0.0)
        } else if ax == alpha {
            let (lo, hi) = if s > 0.0 { (0.0, alpha) } else { (-alpha, 0.0) };
            ProxResult::Interval { lo, hi }
        } else {
            ProxResult::Single(x)
        }
    } else {
        let threshold = (alpha * beta).sqrt();
        if ax < threshold {
            ProxResult::Single(0.0)
        } else if ax == threshold {
            ProxResult::Pair(0.0, s * threshold)
        } else {
            ProxResult::Single(x)
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Proximity operator of `beta * ||.||` (block soft thresholding), with the
/// convention `0/||0|| = 0`.
pub fn prox_l2(x: &[f64], beta: f64) -> Vec<f64> {
    assert!(beta > 0.0);
    let n = norm(x);
    if n == 0.0 {
        return vec![0.0; x.len()];
    }
    let scale = prox_abs(n, beta) / n;
    x.iter().map(|v| v * scale).collect()
}

/// Possibly set-valued vector prox output.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorProx {
    pub points: Vec<Vec<f64>>,
    /// True when the underlying scalar prox was a full interval; `points`
    /// then holds the two endpoint vectors.
    pub interval: bool,
}

/// Proximity operator of the isotropic MCP penalty `beta * eval_mcp(||.||, alpha)`.
///
/// Reduces to the scalar prox along the input direction; each scalar
/// minimizer yields one vector.
pub fn prox_l2_mcp(x: &[f64], alpha: f64, beta: f64) -> VectorProx {
    let n = norm(x);
    if n == 0.0 {
        return VectorProx {
            points: vec![vec![0.0; x.len()]],
            interval: false,
        };
    }
    let scalar = prox_mcp(n, alpha, beta);
    let interval = scalar.is_interval();
    let points = scalar
        .points()
        .into_iter()
        .map(|p| x.iter().map(|v| v * (p / n)).collect())
        .collect();
    VectorProx { points, interval }
}

/// A partition of the index set `{0, .., d-1}` into disjoint nonempty blocks.
///
/// Blocks are stored as index lists; extraction matrices are never
/// materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    dim: usize,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self, PenaltyError> {
        let dim: usize = blocks.iter().map(Vec::len).sum();
        let mut seen = vec![false; dim];
        for block in &blocks {
            if block.is_empty() {
                return Err(PenaltyError::InvalidPartition("empty block".into()));
            }
            for &i in block {
                if i >= dim {
                    return Err(PenaltyError::InvalidPartition(format!(
                        "index {i} out of range for dimension {dim}"
                    )));
                }
                if seen[i] {
                    return Err(PenaltyError::InvalidPartition(format!(
                        "index {i} appears in more than one block"
                    )));
                }
                seen[i] = true;
            }
        }
        Ok(Self { blocks, dim })
    }

    /// One block per coordinate.
    pub fn singletons(d: usize) -> Self {
        Self {
            blocks: (0..d).map(|i| vec![i]).collect(),
            dim: d,
        }
    }

    /// The isotropic-TV pairing over a stacked gradient of `n_pixels`
    /// pixels: block `j` is `{j, n_pixels + j}` (vertical and horizontal
    /// difference at pixel `j`).
    pub fn tv_pairs(n_pixels: usize) -> Self {
        Self {
            blocks: (0..n_pixels).map(|j| vec![j, n_pixels + j]).collect(),
            dim: 2 * n_pixels,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), PenaltyError> {
        if x.len() != self.dim {
            return Err(PenaltyError::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        Ok(())
    }

    fn block_norm(&self, x: &[f64], block: &[usize]) -> f64 {
        block.iter().map(|&i| x[i] * x[i]).sum::<f64>().sqrt()
    }
}

/// A block-separable penalty: the compositional norm when `alpha` is absent,
/// its MCP-style counterpart when present.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionalPenalty {
    pub partition: Partition,
    pub alpha: Option<f64>,
}

impl CompositionalPenalty {
    pub fn eval(&self, x: &[f64]) -> Result<f64, PenaltyError> {
        eval_compositional(x, &self.partition, self.alpha)
    }
}

/// Sum over blocks of the block norm (`alpha` absent) or of the scalar MCP
/// penalty of the block norm (`alpha` present).
pub fn eval_compositional(
    x: &[f64],
    p: &Partition,
    alpha: Option<f64>,
) -> Result<f64, PenaltyError> {
    p.check_dim(x)?;
    let mut total = 0.0;
    for block in p.blocks() {
        let n = p.block_norm(x, block);
        total += match alpha {
            Some(a) => eval_mcp(n, a),
            None => n,
        };
    }
    Ok(total)
}

/// Blockwise prox of the compositional MCP penalty, restricted to the
/// single-valued regime `beta < alpha`.
pub fn prox_compositional_mcp(
    x: &[f64],
    p: &Partition,
    alpha: f64,
    beta: f64,
) -> Result<Vec<f64>, PenaltyError> {
    assert!(alpha > 0.0 && beta > 0.0);
    p.check_dim(x)?;
    if beta >= alpha {
        return Err(PenaltyError::SetValuedRegime);
    }
    let factor = alpha / (alpha - beta);
    let mut out = vec![0.0; x.len()];
    for block in p.blocks() {
        let n = p.block_norm(x, block);
        let scale = if n == 0.0 {
            0.0
        } else if n <= alpha {
            factor * (n - beta).max(0.0) / n
        } else {
            1.0
        };
        for &i in block {
            out[i] = x[i] * scale;
        }
    }
    Ok(out)
}

/// Prox of the conjugate of the compositional norm: blockwise projection
/// onto the closed unit ball. Independent of the prox step size.
///
/// For the scaled penalty `lambda * phi`, project onto the radius-`lambda`
/// ball instead (see [`project_dual_ball`]).
pub fn prox_compositional_conjugate(u: &[f64], p: &Partition) -> Result<Vec<f64>, PenaltyError> {
    project_dual_ball(u, p, 1.0)
}

/// Blockwise Euclidean projection onto the radius-`radius` ball, the prox of
/// the conjugate of `radius * phi` for a compositional norm `phi`.
pub fn project_dual_ball(
    u: &[f64],
    p: &Partition,
    radius: f64,
) -> Result<Vec<f64>, PenaltyError> {
    assert!(radius > 0.0);
    p.check_dim(u)?;
    let mut out = vec![0.0; u.len()];
    for block in p.blocks() {
        let n = p.block_norm(u, block);
        let scale = if n > radius { radius / n } else { 1.0 };
        for &i in block {
            out[i] = u[i] * scale;
        }
    }
    Ok(out)
}

/// Gradient of the Moreau envelope of the compositional norm:
/// `(x - prox_{alpha phi}(x)) / alpha`, computed blockwise.
///
/// Equals `prox_compositional_conjugate(x / alpha, p)` exactly.
pub fn env_gradient(x: &[f64], p: &Partition, alpha: f64) -> Result<Vec<f64>, PenaltyError> {
    assert!(alpha > 0.0);
    p.check_dim(x)?;
    let mut out = vec![0.0; x.len()];
    for block in p.blocks() {
        let n = p.block_norm(x, block);
        // (v - prox_l2(v, alpha)) / alpha collapses to v/alpha inside the
        // ball of radius alpha and to v/||v|| outside.
        let scale = if n <= alpha { 1.0 / alpha } else { 1.0 / n };
        for &i in block {
            out[i] = x[i] * scale;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn prox_abs_soft_threshold() {
        assert_eq!(prox_abs(0.0, 1.0), 0.0);
        assert!((prox_abs(2.0, 1.0) - 1.0).abs() < TOL);
        assert_eq!(prox_abs(-0.5, 1.0), 0.0);
        assert!((prox_abs(-2.0, 1.0) + 1.0).abs() < TOL);
    }

    #[test]
    fn env_abs_huber() {
        assert_eq!(env_abs(0.0, 1.0), 0.0);
        assert!((env_abs(0.5, 1.0) - 0.125).abs() < TOL);
        assert!((env_abs(2.0, 1.0) - 1.5).abs() < TOL);
        assert!((env_abs(-2.0, 1.0) - 1.5).abs() < TOL);
    }

    #[test]
    fn eval_mcp_values() {
        assert_eq!(eval_mcp(0.0, 1.5), 0.0);
        assert!((eval_mcp(1.0, 2.0) - 0.75).abs() < TOL);
        assert!((eval_mcp(10.0, 2.0) - 1.0).abs() < TOL);
        // identity with |x| - env_abs
        for &x in &[-3.0, -0.7, 0.0, 0.2, 1.9, 4.0] {
            let a = 1.3;
            assert!((eval_mcp(x, a) - (x.abs() - env_abs(x, a))).abs() < TOL);
        }
    }

    #[test]
    fn eval_mcp_bounded_and_even() {
        for i in -200..=200 {
            let x = i as f64 * 0.05;
            let v = eval_mcp(x, 1.5);
            assert!(v >= 0.0 && v <= 0.75 + TOL);
            assert_eq!(v, eval_mcp(-x, 1.5));
        }
        assert_eq!(eval_mcp(1.5, 1.5), 0.75);
    }

    #[test]
    fn prox_mcp_branches() {
        // beta < alpha: firm shrinkage
        assert_eq!(prox_mcp(1.5, 2.0, 1.0), ProxResult::Single(1.0));
        assert_eq!(prox_mcp(3.0, 2.0, 1.0), ProxResult::Single(3.0));
        assert_eq!(prox_mcp(0.5, 2.0, 1.0), ProxResult::Single(0.0));
        // beta = alpha: interval at the knot
        assert_eq!(
            prox_mcp(1.0, 1.0, 1.0),
            ProxResult::Interval { lo: 0.0, hi: 1.0 }
        );
        assert_eq!(
            prox_mcp(-1.0, 1.0, 1.0),
            ProxResult::Interval { lo: -1.0, hi: 0.0 }
        );
        assert_eq!(prox_mcp(0.9, 1.0, 1.0), ProxResult::Single(0.0));
        assert_eq!(prox_mcp(1.1, 1.0, 1.0), ProxResult::Single(1.1));
        // beta > alpha: hard threshold at sqrt(alpha*beta)
        assert_eq!(prox_mcp(1.5, 1.0, 4.0), ProxResult::Single(0.0));
        assert_eq!(prox_mcp(2.0, 1.0, 4.0), ProxResult::Pair(0.0, 2.0));
        assert_eq!(prox_mcp(2.5, 1.0, 4.0), ProxResult::Single(2.5));
    }

    #[test]
    fn prox_mcp_continuous_at_alpha() {
        // beta < alpha branch meets the identity branch at |x| = alpha
        let r = prox_mcp(2.0, 2.0, 0.5);
        assert_eq!(r, ProxResult::Single(2.0));
    }

    #[test]
    fn select_sparsest_rules() {
        assert_eq!(ProxResult::Pair(0.0, 2.0).select_sparsest(), 0.0);
        assert_eq!(
            ProxResult::Interval { lo: 0.0, hi: 1.0 }.select_sparsest(),
            0.0
        );
        assert_eq!(ProxResult::Single(3.0).select_sparsest(), 3.0);
    }

    #[test]
    fn prox_l2_examples() {
        assert_eq!(prox_l2(&[0.0, 0.0], 1.0), vec![0.0, 0.0]);
        let r = prox_l2(&[3.0, 4.0], 1.0);
        assert!((r[0] - 2.4).abs() < TOL && (r[1] - 3.2).abs() < TOL);
        assert_eq!(prox_l2(&[0.3, 0.4], 1.0), vec![0.0, 0.0]);
    }

    #[test]
    fn prox_l2_mcp_examples() {
        let r = prox_l2_mcp(&[0.0, 0.0], 2.0, 1.0);
        assert_eq!(r.points, vec![vec![0.0, 0.0]]);
        let r = prox_l2_mcp(&[0.9, 1.2], 2.0, 1.0);
        assert_eq!(r.points.len(), 1);
        assert!((r.points[0][0] - 0.6).abs() < 1e-12);
        assert!((r.points[0][1] - 0.8).abs() < 1e-12);
        let r = prox_l2_mcp(&[3.0, 4.0], 2.0, 1.0);
        assert_eq!(r.points, vec![vec![3.0, 4.0]]);
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![vec![0, 1], vec![2]]).is_ok());
        assert!(Partition::new(vec![vec![0, 1], vec![1]]).is_err());
        assert!(Partition::new(vec![vec![0], vec![]]).is_err());
        assert!(Partition::new(vec![vec![0, 3]]).is_err());
        let p = Partition::tv_pairs(3);
        assert_eq!(p.dim(), 6);
        assert_eq!(p.blocks()[1], vec![1, 4]);
    }

    #[test]
    fn eval_compositional_examples() {
        let p = Partition::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(
            eval_compositional(&[0.0; 4], &p, None).unwrap(),
            0.0
        );
        let v = eval_compositional(&[3.0, 4.0, 0.0, 0.0], &p, None).unwrap();
        assert!((v - 5.0).abs() < TOL);
        let v = eval_compositional(&[3.0, 4.0, 0.6, 0.8], &p, Some(2.0)).unwrap();
        assert!((v - 1.75).abs() < TOL);
        assert!(matches!(
            eval_compositional(&[1.0; 3], &p, None),
            Err(PenaltyError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn prox_compositional_mcp_examples() {
        let p = Partition::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        let r = prox_compositional_mcp(&[0.0; 4], &p, 2.0, 1.0).unwrap();
        assert_eq!(r, vec![0.0; 4]);
        let r = prox_compositional_mcp(&[0.9, 1.2, 3.0, 4.0], &p, 2.0, 1.0).unwrap();
        for (got, want) in r.iter().zip([0.6, 0.8, 3.0, 4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        // every block norm below beta: zero vector
        let r = prox_compositional_mcp(&[0.1, 0.2, -0.3, 0.1], &p, 2.0, 1.0).unwrap();
        assert_eq!(r, vec![0.0; 4]);
        assert!(matches!(
            prox_compositional_mcp(&[1.0; 4], &p, 1.0, 1.0),
            Err(PenaltyError::SetValuedRegime)
        ));
    }

    #[test]
    fn conjugate_prox_projects_blocks() {
        let p = Partition::new(vec![vec![0, 1]]).unwrap();
        let r = prox_compositional_conjugate(&[0.3, 0.4], &p).unwrap();
        assert_eq!(r, vec![0.3, 0.4]);
        let r = prox_compositional_conjugate(&[3.0, 4.0], &p).unwrap();
        assert!((r[0] - 0.6).abs() < TOL && (r[1] - 0.8).abs() < TOL);
        let r = project_dual_ball(&[3.0, 4.0], &p, 10.0).unwrap();
        assert_eq!(r, vec![3.0, 4.0]);
    }

    #[test]
    fn env_gradient_scalar_cases() {
        let p = Partition::singletons(1);
        assert_eq!(env_gradient(&[0.0], &p, 1.0).unwrap(), vec![0.0]);
        assert!((env_gradient(&[2.0], &p, 1.0).unwrap()[0] - 1.0).abs() < TOL);
        assert!((env_gradient(&[0.5], &p, 1.0).unwrap()[0] - 0.5).abs() < TOL);
    }

    #[test]
    fn env_gradient_matches_conjugate_prox() {
        let p = Partition::tv_pairs(3);
        let x = [1.0, -2.0, 0.3, 0.0, 4.0, -0.1];
        let alpha = 0.7;
        let g = env_gradient(&x, &p, alpha).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| v / alpha).collect();
        let c = prox_compositional_conjugate(&scaled, &p).unwrap();
        for (a, b) in g.iter().zip(&c) {
            assert!((a - b).abs() < TOL);
        }
    }
}
