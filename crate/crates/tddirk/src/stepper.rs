//! Fixed-step time integration with per-stage fixed-point iteration.
//!
//! One step of an s-stage scheme solves the stage equations
//!
//! ```text
//! Y_i = y_n + c_i h f(y_n) + h^2 sum_{j<=i} a_ij g(Y_j)
//! ```
//!
//! in increasing `i` (the coupling matrix is lower triangular, so each stage
//! couples only to itself), then forms
//!
//! ```text
//! y_{n+1} = y_n + h f(y_n) + h^2 sum_i b_i g(Y_i).
//! ```
//!
//! Each implicit stage is solved by fixed-point iteration
//! `Y^(r+1) = known + h^2 a_ii g(Y^(r))` from the starting guess
//! `Y^(0) = y_n + c_i h f(y_n)`, stopped when
//! `||Y^(r+1) - Y^(r)||_2 < fp_tol`. The map contracts when
//! `h^2 L_g |a_ii| < 1`; above that threshold the iteration diverges and a
//! [`Error::NonConvergence`] is reported with the last residual.

use crate::error::{Error, Result};
use crate::tableau::ButcherTableau;

type Evaluator = Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
type ExactSolution = Box<dyn Fn(f64, &mut [f64]) + Send + Sync>;

enum SecondDerivative {
    /// User-supplied `g(y) = f'(y) f(y)`.
    Analytic(Evaluator),
    /// Directional finite difference `(f(y + eps f(y)) - f(y)) / eps`.
    /// First-order accurate in `eps`; fine for exploration, too coarse for
    /// high-order convergence studies.
    FiniteDifference,
}

/// An autonomous first-order system `y' = f(y)` together with its second
/// derivative `g(y) = f'(y) f(y)` and an optional exact solution.
///
/// Evaluators write into caller-provided buffers and must be pure and
/// reentrant; a single system may then serve any number of concurrent
/// integrations.
pub struct OdeSystem {
    dim: usize,
    f: Evaluator,
    g: SecondDerivative,
    exact: Option<ExactSolution>,
}

impl OdeSystem {
    /// System with analytic `f` and `g`.
    pub fn new(
        dim: usize,
        f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        g: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        OdeSystem {
            dim,
            f: Box::new(f),
            g: SecondDerivative::Analytic(Box::new(g)),
            exact: None,
        }
    }

    /// System without an analytic second derivative; `g` is approximated by
    /// a directional finite difference. Noticeably less accurate than an
    /// analytic `g`, so convergence measurements should prefer [`Self::new`].
    /// The difference quotient carries ~1e-8 relative noise, which also puts
    /// a floor under the stage iteration residual: pair this constructor
    /// with a stage tolerance no tighter than ~1e-9.
    pub fn with_fd_second_derivative(
        dim: usize,
        f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        OdeSystem {
            dim,
            f: Box::new(f),
            g: SecondDerivative::FiniteDifference,
            exact: None,
        }
    }

    /// Attaches an exact solution `t -> y(t)`.
    pub fn with_exact(
        mut self,
        exact: impl Fn(f64, &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        self.exact = Some(Box::new(exact));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn eval_f(&self, y: &[f64], out: &mut [f64]) {
        (self.f)(y, out);
    }

    pub fn eval_g(&self, y: &[f64], out: &mut [f64]) {
        match &self.g {
            SecondDerivative::Analytic(g) => g(y, out),
            SecondDerivative::FiniteDifference => {
                let mut fy = vec![0.0; self.dim];
                (self.f)(y, &mut fy);
                let eps = f64::EPSILON.sqrt() * (1.0 + norm2(y)) / (1.0 + norm2(&fy));
                let shifted: Vec<f64> =
                    y.iter().zip(&fy).map(|(yi, fi)| yi + eps * fi).collect();
                (self.f)(&shifted, out);
                for (o, fi) in out.iter_mut().zip(&fy) {
                    *o = (*o - fi) / eps;
                }
            }
        }
    }

    /// Exact solution at `t`, if attached.
    pub fn eval_exact(&self, t: f64, out: &mut [f64]) -> bool {
        match &self.exact {
            Some(e) => {
                e(t, out);
                true
            }
            None => false,
        }
    }

    /// Relative deviation of `g(y)` from the directional finite difference
    /// `(f(y + eps f(y)) - f(y)) / eps` at the given state. Near zero for a
    /// consistent analytic `g`.
    pub fn g_consistency_error(&self, y: &[f64]) -> f64 {
        let mut fy = vec![0.0; self.dim];
        self.eval_f(y, &mut fy);
        let eps = 1e-7 * (1.0 + norm2(y)) / (1.0 + norm2(&fy));
        let shifted: Vec<f64> = y.iter().zip(&fy).map(|(yi, fi)| yi + eps * fi).collect();
        let mut fd = vec![0.0; self.dim];
        self.eval_f(&shifted, &mut fd);
        for (d, fi) in fd.iter_mut().zip(&fy) {
            *d = (*d - fi) / eps;
        }
        let mut g = vec![0.0; self.dim];
        self.eval_g(y, &mut g);
        let diff: f64 = g
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        diff / (1.0 + norm2(&g))
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Step size, time span and fixed-point controls for an integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    pub h: f64,
    pub t0: f64,
    pub t_end: f64,
    /// Stopping threshold on `||Y^(r+1) - Y^(r)||_2`.
    pub fp_tol: f64,
    pub fp_max_iter: usize,
}

impl IntegrationConfig {
    /// Config with the default stage tolerance 1e-12 and iteration cap 200.
    pub fn new(h: f64, t0: f64, t_end: f64) -> Self {
        IntegrationConfig {
            h,
            t0,
            t_end,
            fp_tol: 1e-12,
            fp_max_iter: 200,
        }
    }

    pub fn with_fp_tol(mut self, fp_tol: f64) -> Self {
        self.fp_tol = fp_tol;
        self
    }

    pub fn with_fp_max_iter(mut self, fp_max_iter: usize) -> Self {
        self.fp_max_iter = fp_max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "step size must be positive, got {}",
                self.h
            )));
        }
        if !(self.t0 < self.t_end) {
            return Err(Error::InvalidConfig(format!(
                "need t0 < t_end, got [{}, {}]",
                self.t0, self.t_end
            )));
        }
        if !(self.fp_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "fixed-point tolerance must be positive, got {}",
                self.fp_tol
            )));
        }
        if self.fp_max_iter == 0 {
            return Err(Error::InvalidConfig(
                "fixed-point iteration cap must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub y_next: Vec<f64>,
    /// Fixed-point iterations spent on each stage (1 for explicit stages).
    pub stage_iterations: Vec<usize>,
    pub converged: bool,
}

/// Result of a completed fixed-step integration.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationResult {
    pub y_final: Vec<f64>,
    pub steps: usize,
    pub total_fp_iterations: u64,
}

/// Reusable buffers for repeated stepping; avoids per-step allocation on
/// large method-of-lines systems.
struct Workspace {
    f_n: Vec<f64>,
    stage_g: Vec<Vec<f64>>,
    known: Vec<f64>,
    y_cur: Vec<f64>,
    y_new: Vec<f64>,
    g_buf: Vec<f64>,
}

impl Workspace {
    fn new(dim: usize, stages: usize) -> Self {
        Workspace {
            f_n: vec![0.0; dim],
            stage_g: vec![vec![0.0; dim]; stages],
            known: vec![0.0; dim],
            y_cur: vec![0.0; dim],
            y_new: vec![0.0; dim],
            g_buf: vec![0.0; dim],
        }
    }
}

/// Solves stage `i` given `f(y_n)` in `ws.f_n` and `g(Y_j)` for `j < i` in
/// `ws.stage_g`; on success `ws.stage_g[i]` holds `g(Y_i)` evaluated at the
/// accepted iterate, and the stage solution is left in `ws.y_cur`.
fn solve_stage_ws(
    t: &ButcherTableau,
    sys: &OdeSystem,
    y_n: &[f64],
    h: f64,
    stage: usize,
    cfg: &IntegrationConfig,
    ws: &mut Workspace,
) -> Result<usize> {
    let h2 = h * h;
    let ci_h = t.c()[stage] * h;
    // known = y_n + c_i h f(y_n) + h^2 sum_{j<i} a_ij g(Y_j)
    for k in 0..sys.dim() {
        let mut acc = y_n[k] + ci_h * ws.f_n[k];
        for j in 0..stage {
            acc += h2 * t.a(stage, j) * ws.stage_g[j][k];
        }
        ws.known[k] = acc;
    }
    let a_ii = t.a(stage, stage);
    if a_ii == 0.0 {
        ws.y_cur.copy_from_slice(&ws.known);
        let (y_cur, stage_g) = (&ws.y_cur, &mut ws.stage_g[stage]);
        sys.eval_g(y_cur, stage_g);
        return Ok(1);
    }

    // Y^(0) = y_n + c_i h f(y_n)
    for k in 0..sys.dim() {
        ws.y_cur[k] = y_n[k] + ci_h * ws.f_n[k];
    }
    let mut residual = f64::INFINITY;
    for r in 1..=cfg.fp_max_iter {
        sys.eval_g(&ws.y_cur, &mut ws.g_buf);
        let mut diff_sq = 0.0;
        for k in 0..sys.dim() {
            ws.y_new[k] = ws.known[k] + h2 * a_ii * ws.g_buf[k];
            let d = ws.y_new[k] - ws.y_cur[k];
            diff_sq += d * d;
        }
        residual = diff_sq.sqrt();
        std::mem::swap(&mut ws.y_cur, &mut ws.y_new);
        if residual < cfg.fp_tol {
            let (y_cur, stage_g) = (&ws.y_cur, &mut ws.stage_g[stage]);
            sys.eval_g(y_cur, stage_g);
            return Ok(r);
        }
        if !residual.is_finite() {
            return Err(Error::NonConvergence {
                stage,
                iterations: r,
                residual,
            });
        }
    }
    Err(Error::NonConvergence {
        stage,
        iterations: cfg.fp_max_iter,
        residual,
    })
}

fn step_ws(
    t: &ButcherTableau,
    sys: &OdeSystem,
    y_n: &[f64],
    h: f64,
    cfg: &IntegrationConfig,
    ws: &mut Workspace,
    y_next: &mut [f64],
) -> Result<Vec<usize>> {
    sys.eval_f(y_n, &mut ws.f_n);
    let mut iterations = Vec::with_capacity(t.stages());
    for i in 0..t.stages() {
        iterations.push(solve_stage_ws(t, sys, y_n, h, i, cfg, ws)?);
    }
    let h2 = h * h;
    for k in 0..sys.dim() {
        let mut acc = y_n[k] + h * ws.f_n[k];
        for i in 0..t.stages() {
            acc += h2 * t.b()[i] * ws.stage_g[i][k];
        }
        y_next[k] = acc;
    }
    Ok(iterations)
}

/// Solves stage `i` of one step: finds `Y_i` with
/// `Y_i = y_n + c_i h f(y_n) + h^2 (sum_{j<i} a_ij prior_g[j] + a_ii g(Y_i))`.
///
/// `prior_g` holds `g(Y_j)` for the already-solved stages `j < i`. Returns
/// the stage value and the number of fixed-point iterations (1 when
/// `a_ii = 0`, i.e. an explicit stage).
pub fn solve_stage(
    t: &ButcherTableau,
    sys: &OdeSystem,
    y_n: &[f64],
    h: f64,
    stage: usize,
    prior_g: &[Vec<f64>],
    cfg: &IntegrationConfig,
) -> Result<(Vec<f64>, usize)> {
    assert!(stage < t.stages(), "stage index out of range");
    assert!(
        prior_g.len() >= stage,
        "need g(Y_j) for all {} prior stages",
        stage
    );
    let mut ws = Workspace::new(sys.dim(), t.stages());
    sys.eval_f(y_n, &mut ws.f_n);
    for j in 0..stage {
        ws.stage_g[j].copy_from_slice(&prior_g[j]);
    }
    let iterations = solve_stage_ws(t, sys, y_n, h, stage, cfg, &mut ws)?;
    Ok((ws.y_cur.clone(), iterations))
}

/// Performs a single step from `y_n` with step size `h`.
pub fn step(
    t: &ButcherTableau,
    sys: &OdeSystem,
    y_n: &[f64],
    h: f64,
    cfg: &IntegrationConfig,
) -> Result<StepReport> {
    let mut ws = Workspace::new(sys.dim(), t.stages());
    let mut y_next = vec![0.0; sys.dim()];
    let stage_iterations = step_ws(t, sys, y_n, h, cfg, &mut ws, &mut y_next)?;
    Ok(StepReport {
        y_next,
        stage_iterations,
        converged: true,
    })
}

/// Integrates from `t0` to `t_end` with fixed step `cfg.h`.
///
/// When `(t_end - t0)/h` is within round-off of an integer that many steps
/// are taken; otherwise a final shortened step lands exactly on `t_end`.
/// Stage nonconvergence aborts with the failing step index and time.
pub fn integrate(
    t: &ButcherTableau,
    sys: &OdeSystem,
    y0: &[f64],
    cfg: &IntegrationConfig,
) -> Result<IntegrationResult> {
    integrate_observed(t, sys, y0, cfg, |_, _| {})
}

/// [`integrate`] with an observer called after every accepted step with
/// `(t_{n+1}, y_{n+1})`; gives trajectory access without storing it.
pub fn integrate_observed(
    t: &ButcherTableau,
    sys: &OdeSystem,
    y0: &[f64],
    cfg: &IntegrationConfig,
    mut observer: impl FnMut(f64, &[f64]),
) -> Result<IntegrationResult> {
    cfg.validate()?;
    assert_eq!(y0.len(), sys.dim(), "initial state has wrong dimension");

    let span = cfg.t_end - cfg.t0;
    let ratio = span / cfg.h;
    let whole = ratio.round();
    let (full_steps, last_h) = if (ratio - whole).abs() <= 1e-9 * whole.max(1.0) {
        (whole as usize, None)
    } else {
        let n = ratio.floor() as usize;
        (n, Some(span - n as f64 * cfg.h))
    };

    let mut ws = Workspace::new(sys.dim(), t.stages());
    let mut y = y0.to_vec();
    let mut y_next = vec![0.0; sys.dim()];
    let mut total_fp: u64 = 0;
    let mut steps = 0usize;

    let advance = |h: f64,
                       step_index: usize,
                       y: &mut Vec<f64>,
                       y_next: &mut Vec<f64>,
                       ws: &mut Workspace,
                       total_fp: &mut u64|
     -> Result<()> {
        let t_now = cfg.t0 + step_index as f64 * cfg.h;
        match step_ws(t, sys, y, h, cfg, ws, y_next) {
            Ok(iters) => {
                *total_fp += iters.iter().map(|&i| i as u64).sum::<u64>();
                std::mem::swap(y, y_next);
                Ok(())
            }
            Err(e) => Err(Error::StepFailed {
                step: step_index,
                t: t_now,
                source: Box::new(e),
            }),
        }
    };

    for n in 0..full_steps {
        advance(cfg.h, n, &mut y, &mut y_next, &mut ws, &mut total_fp)?;
        steps += 1;
        let t_reached = if n + 1 == full_steps && last_h.is_none() {
            cfg.t_end
        } else {
            cfg.t0 + (n + 1) as f64 * cfg.h
        };
        observer(t_reached, &y);
    }
    if let Some(h_last) = last_h {
        advance(h_last, full_steps, &mut y, &mut y_next, &mut ws, &mut total_fp)?;
        steps += 1;
        observer(cfg.t_end, &y);
    }

    Ok(IntegrationResult {
        y_final: y,
        steps,
        total_fp_iterations: total_fp,
    })
}

/// Max-norm error of an integration against the system's exact solution at
/// the final time.
pub fn final_time_error_vs_exact(
    t: &ButcherTableau,
    sys: &OdeSystem,
    y0: &[f64],
    cfg: &IntegrationConfig,
) -> Result<f64> {
    let result = integrate(t, sys, y0, cfg)?;
    let mut exact = vec![0.0; sys.dim()];
    if !sys.eval_exact(cfg.t_end, &mut exact) {
        return Err(Error::InvalidConfig(
            "system has no exact solution attached".to_string(),
        ));
    }
    Ok(result
        .y_final
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
