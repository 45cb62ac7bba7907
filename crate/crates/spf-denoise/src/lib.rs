//! Image and signal denoising with structured sparsity-promoting penalties.
//!
//! The model is
//!
//! ```text
//! min_{x in C}  1/(2 lambda) ||x - z||^2 + phi_alpha(B x)
//! ```
//!
//! where `phi` is a compositional (groupwise) norm, `phi_alpha = phi -
//! env_alpha phi` subtracts its Moreau envelope (in the scalar case this is
//! the minimax concave penalty), `B` is a matrix-free difference operator,
//! and `C` is a box constraint. For `alpha >= lambda ||B||^2` the model
//! stays convex even though the penalty is not.
//!
//! The crate is organised as:
//!
//! * [`penalty`] — scalar and blockwise MCP-style penalties, their proxes
//!   (including the set-valued regimes), envelopes, and dual-ball projections.
//! * [`linop`] — matrix-free 1-D difference and 2-D gradient operators with
//!   adjoints and operator-norm estimation.
//! * [`solvers`] — a convex TV baseline, primal-dual splitting, a
//!   difference-of-convex loop, and a semiconvex PDHG scheme.
//! * [`imaging`] — grayscale images, seeded Gaussian noise, PSNR, PGM I/O.
//! * [`cli`] — the command-line front end (`denoise`, `benchmark`, `demo1d`).
//!
//! Start with the runnable examples in `examples/`; each one exercises a
//! single capability end to end.

pub mod cli;
pub mod imaging;
pub mod linop;
pub mod penalty;
pub mod solvers;

pub use imaging::{add_gaussian_noise, psnr, read_pgm, write_pgm, GaussianNoise, ImageGray};
pub use linop::{DiffOp1d, GradOperator2d, IdentityOp, LinearOperator};
pub use penalty::{Partition, ProxResult, ScalarMcp};
pub use solvers::{
    default_alpha, default_params, estimate_b_norm_sq, solve, Algorithm, ProblemSpec,
    SolveReport, SolverParams,
};
