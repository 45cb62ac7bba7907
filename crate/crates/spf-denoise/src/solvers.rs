//! Iterative schemes for the denoising model
//! `min ½λ⁻¹‖x−z‖² + φ_α(Bx)  s.t.  x ∈ C`:
//!
//! * [`solve_rof`] — the convex TV baseline (primal-dual splitting with the
//!   plain compositional norm).
//! * [`solve_pd`] — primal-dual splitting with the envelope folded into the
//!   smooth term; requires the strictly convex regime.
//! * [`solve_dca`] — difference-of-convex outer loop; each outer step solves
//!   a shifted-data convex baseline problem.
//! * [`solve_pdhg`] — semiconvex primal-dual hybrid gradient using the MCP
//!   prox directly.
//!
//! ROF/PD/DCA internally scale the objective by λ (fidelity `½‖x−z‖²`,
//! penalty `λφ`), which makes the smooth term 1-Lipschitz and lets one step
//! rule cover all three. Minimizers are unchanged.

use crate::linop::{LinOpError, LinearOperator};
use crate::penalty::{
    env_gradient, eval_compositional, prox_compositional_mcp, prox_compositional_conjugate,
    project_dual_ball, Partition, PenaltyError,
};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),
    #[error("parameter regime violation: {0}")]
    RegimeViolation(String),
    #[error("divergence detected: non-finite iterate at iteration {0}")]
    Divergence(usize),
    #[error("inner solver diverged at outer iteration {0}")]
    InnerDivergence(usize),
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
    #[error(transparent)]
    LinOp(#[from] LinOpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Rof,
    Pd,
    Dca,
    Pdhg,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Rof => "rof",
            Algorithm::Pd => "pd",
            Algorithm::Dca => "dca",
            Algorithm::Pdhg => "pdhg",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rof" => Ok(Algorithm::Rof),
            "pd" => Ok(Algorithm::Pd),
            "dca" => Ok(Algorithm::Dca),
            "pdhg" => Ok(Algorithm::Pdhg),
            other => Err(format!("unknown algorithm '{other}' (expected rof|pd|dca|pdhg)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    StrictlyConvex,
    Convex,
    NonconvexPossible,
}

/// One denoising problem instance.
pub struct ProblemSpec<'a> {
    pub z: &'a [f64],
    pub lambda: f64,
    pub alpha: f64,
    pub op: &'a dyn LinearOperator,
    pub partition: &'a Partition,
    /// Box constraint `C = [lo, hi]^d`; `None` means unconstrained.
    pub bounds: Option<(f64, f64)>,
}

impl<'a> ProblemSpec<'a> {
    pub fn new(
        z: &'a [f64],
        lambda: f64,
        alpha: f64,
        op: &'a dyn LinearOperator,
        partition: &'a Partition,
        bounds: Option<(f64, f64)>,
    ) -> Result<Self, SolverError> {
        if lambda <= 0.0 || alpha <= 0.0 {
            return Err(SolverError::InvalidProblem(
                "lambda and alpha must be positive".into(),
            ));
        }
        if z.len() != op.domain_dim() {
            return Err(SolverError::InvalidProblem(format!(
                "data has dimension {}, operator domain is {}",
                z.len(),
                op.domain_dim()
            )));
        }
        if partition.dim() != op.range_dim() {
            return Err(SolverError::InvalidProblem(format!(
                "partition covers {} entries, operator range is {}",
                partition.dim(),
                op.range_dim()
            )));
        }
        if let Some((lo, hi)) = bounds {
            if lo > hi {
                return Err(SolverError::InvalidProblem("empty box constraint".into()));
            }
        }
        Ok(Self {
            z,
            lambda,
            alpha,
            op,
            partition,
            bounds,
        })
    }

    fn project(&self, x: &mut [f64]) {
        if let Some((lo, hi)) = self.bounds {
            for v in x.iter_mut() {
                *v = v.clamp(lo, hi);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    pub sigma: f64,
    pub tau: f64,
    pub rho: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub dca_outer_max: usize,
    pub dca_inner_max: usize,
    /// Squared operator norm estimate the step sizes were derived from.
    pub b_norm_sq: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x_final: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub objective_history: Vec<f64>,
    pub rel_change_history: Vec<f64>,
    pub wall_seconds: f64,
    /// Final dual state: `y` for ROF/PD (and the DCA inner solver), the
    /// multiplier `θ` for PDHG.
    pub dual_final: Vec<f64>,
}

/// Squared operator norm for step-size rules: the power-iteration estimate
/// inflated by a small relative margin, since the step conditions are strict
/// inequalities.
pub fn estimate_b_norm_sq(op: &dyn LinearOperator) -> Result<f64, SolverError> {
    Ok(op.op_norm_sq(1e-8)? * (1.0 + 1e-6))
}

/// The default envelope index `α = 1.5 λ ‖B‖²`, which keeps the model
/// strictly convex.
pub fn default_alpha(lambda: f64, b_norm_sq: f64) -> f64 {
    1.5 * lambda * b_norm_sq
}

/// Reference parameter set per algorithm: `σ = 0.1`,
/// `τ = 0.99/(0.5 + σ‖B‖²)` for ROF/PD/DCA; `σ = 2/α`, `τ = 0.99/(σ‖B‖²)`
/// for PDHG; `ρ = 1`, 300 iterations, tolerance `1e-4`, DCA loops 10/100.
pub fn default_params(spec: &ProblemSpec, algo: Algorithm, b_norm_sq: f64) -> SolverParams {
    let (sigma, tau) = match algo {
        Algorithm::Pdhg => {
            let sigma = 2.0 / spec.alpha;
            (sigma, 0.99 / (sigma * b_norm_sq))
        }
        _ => {
            let sigma = 0.1;
            (sigma, 0.99 / (0.5 + sigma * b_norm_sq))
        }
    };
    SolverParams {
        sigma,
        tau,
        rho: 1.0,
        max_iter: 300,
        tol: 1e-4,
        dca_outer_max: 10,
        dca_inner_max: 100,
        b_norm_sq,
    }
}

/// The model objective `½λ⁻¹‖x−z‖² + φ_α(Bx)`.
pub fn objective(spec: &ProblemSpec, x: &[f64]) -> Result<f64, SolverError> {
    objective_with(spec, x, Some(spec.alpha))
}

/// The convex baseline objective `½λ⁻¹‖x−z‖² + φ(Bx)`.
pub fn objective_rof(spec: &ProblemSpec, x: &[f64]) -> Result<f64, SolverError> {
    objective_with(spec, x, None)
}

fn objective_with(spec: &ProblemSpec, x: &[f64], alpha: Option<f64>) -> Result<f64, SolverError> {
    if x.len() != spec.z.len() {
        return Err(SolverError::InvalidProblem(format!(
            "iterate has dimension {}, data has {}",
            x.len(),
            spec.z.len()
        )));
    }
    let fidelity: f64 = x
        .iter()
        .zip(spec.z)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / (2.0 * spec.lambda);
    let bx = spec.op.apply(x)?;
    Ok(fidelity + eval_compositional(&bx, spec.partition, alpha)?)
}

/// Convexity regime of the model per the bound `λ‖B‖² vs α`.
pub fn convexity_regime(spec: &ProblemSpec, b_norm_sq: f64) -> Regime {
    let lhs = spec.lambda * b_norm_sq;
    if (lhs - spec.alpha).abs() <= 1e-12 * spec.alpha.max(1.0) {
        Regime::Convex
    } else if lhs < spec.alpha {
        Regime::StrictlyConvex
    } else {
        Regime::NonconvexPossible
    }
}

/// Gradient of the smooth part `F(x) = ½λ⁻¹‖x−z‖² − env_α φ(Bx)`:
/// `λ⁻¹(x−z) − Bᵀ prox_{α⁻¹φ*}(α⁻¹ Bx)`.
pub fn grad_f(spec: &ProblemSpec, x: &[f64]) -> Result<Vec<f64>, SolverError> {
    let bx = spec.op.apply(x)?;
    let scaled: Vec<f64> = bx.iter().map(|v| v / spec.alpha).collect();
    let p = prox_compositional_conjugate(&scaled, spec.partition)?;
    let btp = spec.op.apply_adjoint(&p)?;
    Ok(x.iter()
        .zip(spec.z)
        .zip(&btp)
        .map(|((xi, zi), bi)| (xi - zi) / spec.lambda - bi)
        .collect())
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn rel_change(new: &[f64], old: &[f64]) -> f64 {
    let diff: f64 = new
        .iter()
        .zip(old)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let base = norm(old);
    if base < 1e-12 {
        diff
    } else {
        diff / base
    }
}

fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}

fn check_pd_step_rule(params: &SolverParams) -> Result<(), SolverError> {
    if params.sigma <= 0.0 || params.tau <= 0.0 {
        return Err(SolverError::InvalidParams("sigma and tau must be positive".into()));
    }
    if !(params.rho > 0.0 && params.rho <= 1.0) {
        return Err(SolverError::InvalidParams("rho must lie in (0, 1]".into()));
    }
    // L = 1 for the lambda-scaled objective.
    if 1.0 / params.tau - params.sigma * params.b_norm_sq <= 0.5 {
        return Err(SolverError::InvalidParams(
            "step sizes violate 1/tau - sigma*||B||^2 > 1/2".into(),
        ));
    }
    Ok(())
}

struct PdState {
    x: Vec<f64>,
    y: Vec<f64>,
    iterations: usize,
    converged: bool,
    rel_change_history: Vec<f64>,
}

/// One run of the lambda-scaled Condat scheme on data `data`, warm-started
/// at `(x0, y0)`. With `envelope` the smooth term gains the
/// `−λ env_α φ(B·)` correction (the PD solver); without it this is the
/// convex baseline. Calls `on_iter` with each relaxed primal iterate.
fn pd_iterate(
    spec: &ProblemSpec,
    params: &SolverParams,
    data: &[f64],
    x0: Vec<f64>,
    y0: Vec<f64>,
    envelope: bool,
    max_iter: usize,
    mut on_iter: impl FnMut(&[f64]) -> Result<(), SolverError>,
) -> Result<PdState, SolverError> {
    let op = spec.op;
    let mut x = x0;
    let mut y = y0;
    let mut rel_hist = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut bx = vec![0.0; op.range_dim()];
    for k in 0..max_iter {
        let x_prev = x.clone();
        // Primal: gradient step on ½‖x−data‖² (plus the envelope boost when
        // enabled), dual correction, projection.
        op.apply_into(&x, &mut bx);
        let dual_term: Vec<f64> = if envelope {
            let scaled: Vec<f64> = bx.iter().map(|v| v / spec.alpha).collect();
            let p = prox_compositional_conjugate(&scaled, spec.partition)?;
            p.iter()
                .zip(&y)
                .map(|(pi, yi)| spec.lambda * pi - yi)
                .collect()
        } else {
            y.iter().map(|yi| -yi).collect()
        };
        let bt = op.apply_adjoint(&dual_term)?;
        let mut x_tilde: Vec<f64> = x
            .iter()
            .zip(data)
            .zip(&bt)
            .map(|((xi, di), bi)| xi - params.tau * (xi - di) + params.tau * bi)
            .collect();
        spec.project(&mut x_tilde);

        // Dual: ascent step followed by projection onto the radius-lambda
        // ball (the prox of the conjugate of lambda*phi, step-independent).
        let over: Vec<f64> = x_tilde.iter().zip(&x).map(|(a, b)| 2.0 * a - b).collect();
        let b_over = op.apply(&over)?;
        let y_arg: Vec<f64> = y
            .iter()
            .zip(&b_over)
            .map(|(yi, bi)| yi + params.sigma * bi)
            .collect();
        let y_tilde = project_dual_ball(&y_arg, spec.partition, spec.lambda)?;

        // Relaxation. The mix of two feasible points stays in C.
        for (xi, xn) in x.iter_mut().zip(&x_tilde) {
            *xi = params.rho * xn + (1.0 - params.rho) * *xi;
        }
        for (yi, yn) in y.iter_mut().zip(&y_tilde) {
            *yi = params.rho * yn + (1.0 - params.rho) * *yi;
        }

        if !all_finite(&x) || !all_finite(&y) {
            return Err(SolverError::Divergence(k + 1));
        }
        let rc = rel_change(&x, &x_prev);
        rel_hist.push(rc);
        on_iter(&x)?;
        iterations = k + 1;
        // The first iteration can leave x unchanged while the dual is still
        // warming up (x0 = z, y0 = 0), so the stop test starts at k = 1.
        if k > 0 && rc <= params.tol {
            converged = true;
            break;
        }
    }
    Ok(PdState {
        x,
        y,
        iterations,
        converged,
        rel_change_history: rel_hist,
    })
}

/// Convex TV baseline solver.
pub fn solve_rof(spec: &ProblemSpec, params: &SolverParams) -> Result<SolveReport, SolverError> {
    check_pd_step_rule(params)?;
    run_pd_scheme(spec, params, false)
}

/// Primal-dual splitting for the structured-penalty model. Requires the
/// strictly convex regime `λ‖B‖² < α`.
pub fn solve_pd(spec: &ProblemSpec, params: &SolverParams) -> Result<SolveReport, SolverError> {
    check_pd_step_rule(params)?;
    if convexity_regime(spec, params.b_norm_sq) != Regime::StrictlyConvex {
        return Err(SolverError::RegimeViolation(format!(
            "solve_pd requires lambda*||B||^2 < alpha (got {} vs {})",
            spec.lambda * params.b_norm_sq,
            spec.alpha
        )));
    }
    run_pd_scheme(spec, params, true)
}

fn run_pd_scheme(
    spec: &ProblemSpec,
    params: &SolverParams,
    envelope: bool,
) -> Result<SolveReport, SolverError> {
    let start = Instant::now();
    let mut x0 = spec.z.to_vec();
    spec.project(&mut x0);
    let y0 = vec![0.0; spec.op.range_dim()];
    let obj = |x: &[f64]| {
        if envelope {
            objective(spec, x)
        } else {
            objective_rof(spec, x)
        }
    };
    let mut objective_history = vec![obj(&x0)?];
    {
        let history = &mut objective_history;
        let st = pd_iterate(
            spec,
            params,
            spec.z,
            x0,
            y0,
            envelope,
            params.max_iter,
            |x| {
                history.push(obj(x)?);
                Ok(())
            },
        )?;
        Ok(SolveReport {
            x_final: st.x,
            iterations: st.iterations,
            converged: st.converged,
            objective_history,
            rel_change_history: st.rel_change_history,
            wall_seconds: start.elapsed().as_secs_f64(),
            dual_final: st.y,
        })
    }
}

/// Difference-of-convex outer loop; each outer step boosts the data by the
/// envelope gradient and solves the convex baseline on the shifted data,
/// warm-started from the previous iterate.
pub fn solve_dca(spec: &ProblemSpec, params: &SolverParams) -> Result<SolveReport, SolverError> {
    check_pd_step_rule(params)?;
    if params.dca_outer_max < 1 || params.dca_inner_max < 1 {
        return Err(SolverError::InvalidParams(
            "DCA loop caps must be at least 1".into(),
        ));
    }
    let start = Instant::now();
    let mut x = spec.z.to_vec();
    spec.project(&mut x);
    let mut y = vec![0.0; spec.op.range_dim()];
    let mut objective_history = vec![objective(spec, &x)?];
    let mut rel_change_history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    for k in 0..params.dca_outer_max {
        let bx = spec.op.apply(&x)?;
        let g = env_gradient(&bx, spec.partition, spec.alpha)?;
        let w = spec.op.apply_adjoint(&g)?;
        let shifted: Vec<f64> = spec
            .z
            .iter()
            .zip(&w)
            .map(|(zi, wi)| zi + spec.lambda * wi)
            .collect();
        let prev = x.clone();
        let st = pd_iterate(
            spec,
            params,
            &shifted,
            x,
            y,
            false,
            params.dca_inner_max,
            |_| Ok(()),
        )
        .map_err(|e| match e {
            SolverError::Divergence(_) => SolverError::InnerDivergence(k + 1),
            other => other,
        })?;
        x = st.x;
        y = st.y;
        let rc = rel_change(&x, &prev);
        rel_change_history.push(rc);
        objective_history.push(objective(spec, &x)?);
        iterations = k + 1;
        if rc <= params.tol {
            converged = true;
            break;
        }
    }
    Ok(SolveReport {
        x_final: x,
        iterations,
        converged,
        objective_history,
        rel_change_history,
        wall_seconds: start.elapsed().as_secs_f64(),
        dual_final: y,
    })
}

/// Semiconvex primal-dual hybrid gradient. Requires `α ≥ λ‖B‖²`,
/// `σα = 2`, `τσ‖B‖² ≤ 1`, and `ρ ∈ [0, 1]`.
pub fn solve_pdhg(spec: &ProblemSpec, params: &SolverParams) -> Result<SolveReport, SolverError> {
    if spec.alpha < spec.lambda * params.b_norm_sq {
        return Err(SolverError::RegimeViolation(format!(
            "solve_pdhg requires alpha >= lambda*||B||^2 (got {} vs {})",
            spec.alpha,
            spec.lambda * params.b_norm_sq
        )));
    }
    if (params.sigma * spec.alpha - 2.0).abs() > 1e-9 {
        return Err(SolverError::InvalidParams(
            "PDHG requires sigma * alpha = 2".into(),
        ));
    }
    if params.tau * params.sigma * params.b_norm_sq > 1.0 + 1e-12 {
        return Err(SolverError::InvalidParams(
            "PDHG requires tau * sigma * ||B||^2 <= 1".into(),
        ));
    }
    if !(0.0..=1.0).contains(&params.rho) {
        return Err(SolverError::InvalidParams("rho must lie in [0, 1]".into()));
    }
    let start = Instant::now();
    let op = spec.op;
    let mut x = spec.z.to_vec();
    spec.project(&mut x);
    let mut x_bar = x.clone();
    let mut theta = vec![0.0; op.range_dim()];
    let beta = 1.0 / params.sigma; // = alpha / 2 < alpha: single-valued prox
    let mut objective_history = vec![objective(spec, &x)?];
    let mut rel_change_history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let lam = spec.lambda;
    let tau = params.tau;
    for k in 0..params.max_iter {
        let b_bar = op.apply(&x_bar)?;
        let arg: Vec<f64> = b_bar
            .iter()
            .zip(&theta)
            .map(|(bi, ti)| bi + ti / params.sigma)
            .collect();
        let u = prox_compositional_mcp(&arg, spec.partition, spec.alpha, beta)?;
        for ((ti, bi), ui) in theta.iter_mut().zip(&b_bar).zip(&u) {
            *ti += params.sigma * (bi - ui);
        }
        let bt = op.apply_adjoint(&theta)?;
        let x_prev = x.clone();
        let c = 1.0 / (tau + lam);
        for (((xi, zi), bi), xp) in x.iter_mut().zip(spec.z).zip(&bt).zip(&x_prev) {
            *xi = c * (lam * xp + tau * zi - tau * lam * bi);
        }
        spec.project(&mut x);
        for ((bi, xi), xp) in x_bar.iter_mut().zip(&x).zip(&x_prev) {
            *bi = xi + params.rho * (xi - xp);
        }
        if !all_finite(&x) || !all_finite(&theta) {
            return Err(SolverError::Divergence(k + 1));
        }
        let rc = rel_change(&x, &x_prev);
        rel_change_history.push(rc);
        objective_history.push(objective(spec, &x)?);
        iterations = k + 1;
        if rc <= params.tol {
            converged = true;
            break;
        }
    }
    Ok(SolveReport {
        x_final: x,
        iterations,
        converged,
        objective_history,
        rel_change_history,
        wall_seconds: start.elapsed().as_secs_f64(),
        dual_final: theta,
    })
}

/// Dispatch helper used by the CLI and examples.
pub fn solve(
    spec: &ProblemSpec,
    algo: Algorithm,
    params: &SolverParams,
) -> Result<SolveReport, SolverError> {
    match algo {
        Algorithm::Rof => solve_rof(spec, params),
        Algorithm::Pd => solve_pd(spec, params),
        Algorithm::Dca => solve_dca(spec, params),
        Algorithm::Pdhg => solve_pdhg(spec, params),
    }
}
