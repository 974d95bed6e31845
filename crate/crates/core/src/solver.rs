//! Energy minimization for finite γ: continuation in the inner cutoff,
//! projected gradient descent with Armijo backtracking, and a damped
//! Newton polish on the stationarity system of the discrete energy.
//!
//! The continuation mirrors the regularized construction of the continuum
//! problem: the solve runs on domains [r_min 2^{-k}, r_max], each started
//! from the previous solution extended into the newly exposed inner region
//! by the near-origin power laws 1-u ~ C r² and f ~ C r^σ.

use crate::bps::{bps_profile, energy_lower_bound, nonbps_upper_bound};
use crate::diagnostics;
use crate::energy::{
    el_residual_scaled_norm, energy, energy_gradient, hessian_blocks, EnergyBreakdown,
    EnergyError, Parameters, Profile,
};
use crate::grid::{build_grid, GridError, RadialGrid};
use crate::tridiag::solve_block2;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

impl From<EnergyError> for SolveError {
    fn from(e: EnergyError) -> Self {
        match e {
            EnergyError::Grid(g) => SolveError::Grid(g),
            other => SolveError::InvalidParameters(other.to_string()),
        }
    }
}

/// Initialization for the first continuation step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    /// Closed-form BPS pair; the natural warm start near β = 2.
    Bps,
    /// Straight ramps between the boundary values.
    Linear,
    /// u = e^{-√(αβ/2) r}, f = 1 - e^{-r}.
    Exponential,
}

/// Continuation schedule, tolerances and iteration caps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    /// Number of r_min halvings (≥ 1); the analog of n → ∞ in the
    /// regularized minimization.
    pub continuation_steps: usize,
    pub n_nodes: usize,
    /// Inner cutoff of the first continuation step.
    pub r_min: f64,
    /// Outer truncation; `None` picks a tail-aware default.
    pub r_max: Option<f64>,
    /// Geometric gap ratio of the mesh.
    pub ratio: f64,
    /// Sup-norm target for the projected energy gradient.
    pub grad_tol: f64,
    /// Sup-norm target for the scaled Euler--Lagrange residual.
    pub newton_tol: f64,
    /// Iteration cap per continuation step.
    pub max_iters: usize,
    pub init: InitKind,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            continuation_steps: 3,
            n_nodes: 4001,
            r_min: 1e-3,
            r_max: None,
            ratio: 1.003,
            grad_tol: 1e-8,
            newton_tol: 1e-3,
            max_iters: 2000,
            init: InitKind::Bps,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.continuation_steps < 1 {
            return Err(SolveError::InvalidParameters("continuation_steps must be >= 1".into()));
        }
        if !(self.grad_tol > 0.0) || !(self.newton_tol > 0.0) {
            return Err(SolveError::InvalidParameters("tolerances must be positive".into()));
        }
        if self.max_iters < 1 {
            return Err(SolveError::InvalidParameters("max_iters must be >= 1".into()));
        }
        if !(self.r_min > 0.0) {
            return Err(SolveError::InvalidParameters("r_min must be positive".into()));
        }
        if let Some(r_max) = self.r_max {
            if !(r_max > self.r_min) {
                return Err(SolveError::InvalidParameters("r_max must exceed r_min".into()));
            }
        }
        Ok(())
    }
}

/// Tail-aware outer truncation. The u tail decays like e^{-κ_u r}, but at
/// γ = 0 the f tail is only algebraic (1 - f ~ const/r), and at γ = ∞ the
/// potential density decays like 1/r²; those need a far larger domain
/// before the truncated quadrature and the Dirichlet clamp stop being
/// visible. The κ_u cap keeps e^{-κ_u r_max} above the f64 underflow line.
pub fn default_r_max(params: &Parameters) -> f64 {
    let ku = params.kappa_u();
    if params.gamma_is_infinite() {
        400.0 / ku
    } else if params.gamma == 0.0 {
        (600.0 / ku).min(160.0)
    } else {
        let kf = params.kappa_f();
        (20.0f64).max(12.0 / ku).max(12.0 / kf).min(600.0 / ku)
    }
}

/// Result of a minimization run.
#[derive(Debug, Clone)]
pub struct SolvedProfile {
    pub profile: Profile,
    pub report: EnergyReport,
    pub converged: bool,
    /// Accepted descent and Newton steps, summed over continuation steps.
    pub iterations: usize,
    /// Final energy of each continuation step.
    pub history: Vec<f64>,
}

/// Energy terms, bound comparisons and convergence norms of a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub breakdown: EnergyBreakdown,
    /// min{√(2αβ), 2√α}; valid for every γ ≥ 0 by dropping terms.
    pub lower_bound: f64,
    /// The BPS-test-pair bound, available at γ = 0 only.
    pub upper_bound: Option<f64>,
    /// Scaled sup-norm of the Euler--Lagrange residuals.
    pub el_residual_norm: f64,
    /// Sup-norm of the projected energy gradient.
    pub grad_norm: f64,
    pub monotone_u: bool,
    pub monotone_f: bool,
    pub in_unit_box: bool,
}

/// Clamps nodal values into [0, 1]; boundary values are left untouched.
/// Mirrors the energy-lowering truncation of the continuum arguments.
pub fn project_box(p: &Profile) -> Profile {
    let n = p.grid().len();
    let clamp = |v: &[f64]| {
        let mut out = v.to_vec();
        for x in out[1..n - 1].iter_mut() {
            *x = x.clamp(0.0, 1.0);
        }
        out
    };
    Profile::new(p.grid().clone(), clamp(p.u()), clamp(p.f())).expect("same grid")
}

/// Builds the first-step initial profile; endpoints are set exactly to the
/// Dirichlet data u(r_min) = 1, f(r_min) = 0, u(r_max) = 0, f(r_max) = 1.
pub fn initial_guess(kind: InitKind, params: &Parameters, grid: &Arc<RadialGrid>) -> Profile {
    let n = grid.len();
    let r = grid.nodes();
    let (mut u, mut f) = match kind {
        InitKind::Bps => {
            let p = bps_profile(params.alpha, grid);
            (p.u().to_vec(), p.f().to_vec())
        }
        InitKind::Linear => {
            let span = grid.r_max() - grid.r_min();
            let u: Vec<f64> = r.iter().map(|&x| (grid.r_max() - x) / span).collect();
            let f: Vec<f64> = u.iter().map(|&v| 1.0 - v).collect();
            (u, f)
        }
        InitKind::Exponential => {
            let k = params.kappa_u();
            let u: Vec<f64> = r.iter().map(|&x| (-k * x).exp()).collect();
            let f: Vec<f64> = r.iter().map(|&x| 1.0 - (-x).exp()).collect();
            (u, f)
        }
    };
    u[0] = 1.0;
    f[0] = 0.0;
    u[n - 1] = 0.0;
    f[n - 1] = 1.0;
    Profile::new(grid.clone(), u, f).expect("lengths match")
}

/// Minimizes the energy for finite γ.
///
/// Non-convergence is not an error: the partial result is returned with
/// `converged = false`.
pub fn solve(params: &Parameters, cfg: &SolveConfig) -> Result<SolvedProfile, SolveError> {
    solve_impl(params, cfg, None)
}

/// Like [`solve`], but the first continuation step starts from `start`
/// (interpolated onto the solve grid) instead of `cfg.init`.
pub fn solve_from(params: &Parameters, cfg: &SolveConfig, start: &Profile) -> Result<SolvedProfile, SolveError> {
    solve_impl(params, cfg, Some(start))
}

fn solve_impl(
    params: &Parameters,
    cfg: &SolveConfig,
    start: Option<&Profile>,
) -> Result<SolvedProfile, SolveError> {
    if params.gamma_is_infinite() {
        return Err(SolveError::InvalidParameters(
            "gamma is infinite; use gamma_inf::solve_gamma_inf".into(),
        ));
    }
    Parameters::new(params.alpha, params.beta, params.gamma)?;
    cfg.validate()?;

    let r_max = cfg.r_max.unwrap_or_else(|| default_r_max(params));
    let steps = cfg.continuation_steps;
    let r_min_final = cfg.r_min * 0.5f64.powi(steps as i32 - 1);
    if r_max <= cfg.r_min {
        return Err(SolveError::InvalidParameters(format!(
            "r_max {r_max} must exceed r_min {}",
            cfg.r_min
        )));
    }
    let full = Arc::new(build_grid(r_min_final, r_max, cfg.n_nodes, cfg.ratio)?);

    let mut history = Vec::with_capacity(steps);
    let mut iterations = 0usize;
    let mut prev: Option<(Arc<RadialGrid>, Vec<f64>, Vec<f64>)> = None;

    for k in 0..steps {
        let cut = cfg.r_min * 0.5f64.powi(k as i32);
        let i0 = if k + 1 == steps {
            0
        } else {
            full.nodes().partition_point(|&r| r < cut * (1.0 - 1e-12))
        };
        let grid = Arc::new(full.tail_from(i0));
        let n = grid.len();

        let (mut u, mut f) = match &prev {
            None => match start {
                Some(p0) => resample(p0, &grid),
                None => {
                    let p = initial_guess(cfg.init, params, &grid);
                    (p.u().to_vec(), p.f().to_vec())
                }
            },
            Some((pg, pu, pf)) => extend_inward(params, pg, pu, pf, &grid),
        };
        u[0] = 1.0;
        f[0] = 0.0;
        u[n - 1] = 0.0;
        f[n - 1] = 1.0;

        let mut p = Profile::new(grid.clone(), u, f)?;
        iterations += minimize_on_grid(&mut p, params, cfg)?;
        history.push(energy(&p, params)?.total);
        prev = Some((grid, p.u().to_vec(), p.f().to_vec()));
    }

    let (grid, u, f) = prev.expect("at least one continuation step");
    let profile = Profile::new(grid, u, f)?;
    let report = energy_report(&profile, params)?;

    let stable = history.len() < 2 || {
        let e1 = history[history.len() - 2];
        let e2 = history[history.len() - 1];
        (e2 - e1).abs() < 0.005 * e2.abs().max(1e-300)
    };
    let converged =
        report.grad_norm <= cfg.grad_tol && report.el_residual_norm <= cfg.newton_tol && stable;

    Ok(SolvedProfile { profile, report, converged, iterations, history })
}

/// Assembles the bound comparisons and convergence norms of a profile.
pub fn energy_report(profile: &Profile, params: &Parameters) -> Result<EnergyReport, SolveError> {
    let breakdown = energy(profile, params)?;
    let el_norm = el_residual_scaled_norm(profile, params)?;
    let (gu, gf) = energy_gradient(profile, params)?;
    let grad_norm = projected_sup(profile, &gu, &gf);
    let flags = diagnostics::check_box_and_monotone(profile);
    Ok(EnergyReport {
        breakdown,
        lower_bound: energy_lower_bound(params.alpha, params.beta),
        upper_bound: (params.gamma == 0.0).then(|| nonbps_upper_bound(params.alpha, params.beta)),
        el_residual_norm: el_norm,
        grad_norm,
        monotone_u: flags.u_monotone_decreasing,
        monotone_f: flags.f_monotone_increasing,
        in_unit_box: flags.in_unit_box,
    })
}

/// Linear resample of an arbitrary profile onto a solve grid.
fn resample(p: &Profile, grid: &Arc<RadialGrid>) -> (Vec<f64>, Vec<f64>) {
    let src = p.grid().nodes();
    let interp = |vals: &[f64], r: f64| -> f64 {
        if r <= src[0] {
            return vals[0];
        }
        if r >= src[src.len() - 1] {
            return vals[src.len() - 1];
        }
        let j = src.partition_point(|&x| x < r).max(1);
        let (r0, r1) = (src[j - 1], src[j]);
        let t = (r - r0) / (r1 - r0);
        vals[j - 1] * (1.0 - t) + vals[j] * t
    };
    let u = grid.nodes().iter().map(|&r| interp(p.u(), r)).collect();
    let f = grid.nodes().iter().map(|&r| interp(p.f(), r)).collect();
    (u, f)
}

/// Warm start for the next continuation step: copies the previous solution
/// and fills the newly exposed inner nodes with the power laws
/// 1 - u = C_u r², f = C_f r^σ matched just above the old cutoff.
fn extend_inward(
    params: &Parameters,
    prev_grid: &RadialGrid,
    pu: &[f64],
    pf: &[f64],
    grid: &Arc<RadialGrid>,
) -> (Vec<f64>, Vec<f64>) {
    let n_new = grid.len() - prev_grid.len();
    let sigma = params.sigma();
    let r_ref = prev_grid.nodes()[1];
    let cu = (1.0 - pu[1]) / (r_ref * r_ref);
    let cf = pf[1] / r_ref.powf(sigma);
    let mut u = Vec::with_capacity(grid.len());
    let mut f = Vec::with_capacity(grid.len());
    // the old boundary node (index n_new) also gets the power law: its
    // previous value was Dirichlet data, not part of the solution
    for &r in &grid.nodes()[..=n_new] {
        u.push(1.0 - cu * r * r);
        f.push(cf * r.powf(sigma));
    }
    u.extend_from_slice(&pu[1..]);
    f.extend_from_slice(&pf[1..]);
    (u, f)
}

/// Projected-gradient sup-norm over interior nodes: components pointing
/// outside the [0,1] box at an active bound do not count.
fn projected_sup(p: &Profile, gu: &[f64], gf: &[f64]) -> f64 {
    let n = p.grid().len();
    let mut sup = 0.0f64;
    for i in 1..n - 1 {
        for (x, g) in [(p.u()[i], gu[i]), (p.f()[i], gf[i])] {
            let pg = if x <= 0.0 {
                g.min(0.0)
            } else if x >= 1.0 {
                g.max(0.0)
            } else {
                g
            };
            sup = sup.max(pg.abs());
        }
    }
    sup
}

/// Diagonal of the energy Hessian, for Jacobi preconditioning.
fn hessian_diag(p: &Profile, params: &Parameters) -> (Vec<f64>, Vec<f64>) {
    let (a, b, g) = (params.alpha, params.beta, params.gamma);
    let r = p.grid().nodes();
    let n = r.len();
    let mut du = vec![0.0; n];
    let mut df = vec![0.0; n];
    for i in 0..n - 1 {
        let h = r[i + 1] - r[i];
        let rm = 0.5 * (r[i] + r[i + 1]);
        let rm2 = rm * rm;
        let m2u = 0.5 * (p.u()[i] * p.u()[i] + p.u()[i + 1] * p.u()[i + 1]);
        let m2f = 0.5 * (p.f()[i] * p.f()[i] + p.f()[i + 1] * p.f()[i + 1]);
        let mu = 0.5 * (p.u()[i] + p.u()[i + 1]);
        let mf = 0.5 * (p.f()[i] + p.f()[i + 1]);
        for side in [i, i + 1] {
            du[side] += 4.0 / h - 2.0 * h * (1.0 - m2u) / rm2
                + 2.0 * h * p.u()[side] * p.u()[side] / rm2
                + 0.5 * a * b * h * mf * mf;
            df[side] += 2.0 * a * rm2 / h
                + 0.5 * a * b * h * mu * mu
                + a * g * rm2 * h * (p.f()[side] * p.f()[side] + m2f - 1.0);
        }
    }
    (du, df)
}

/// Descent followed by Newton, repeated until tolerances or the iteration
/// cap. Returns the number of accepted steps.
fn minimize_on_grid(p: &mut Profile, params: &Parameters, cfg: &SolveConfig) -> Result<usize, SolveError> {
    let mut used = 0usize;
    for _round in 0..3 {
        let budget = cfg.max_iters.saturating_sub(used);
        if budget == 0 {
            break;
        }
        used += descent(p, params, budget.min(400), cfg.grad_tol)?;
        let budget = cfg.max_iters.saturating_sub(used);
        if budget == 0 {
            break;
        }
        let (steps, stalled) = newton(p, params, budget.min(60), cfg.grad_tol)?;
        used += steps;
        let (gu, gf) = energy_gradient(p, params)?;
        if stalled || projected_sup(p, &gu, &gf) <= cfg.grad_tol {
            break;
        }
    }
    Ok(used)
}

/// Jacobi-preconditioned projected gradient descent with Armijo
/// backtracking; accepted steps never increase the discrete energy.
fn descent(p: &mut Profile, params: &Parameters, max_iters: usize, grad_tol: f64) -> Result<usize, SolveError> {
    let n = p.grid().len();
    let mut e0 = energy(p, params)?.total;
    let mut step = 1.0f64;
    let mut pgrad0 = f64::INFINITY;
    for it in 0..max_iters {
        let (gu, gf) = energy_gradient(p, params)?;
        let pg = projected_sup(p, &gu, &gf);
        if it == 0 {
            pgrad0 = pg;
        }
        if pg <= grad_tol || (it >= 30 && pg <= 1e-3 * pgrad0) {
            return Ok(it);
        }
        let (du, df) = hessian_diag(p, params);
        let mut t = step;
        let mut accepted = false;
        for _ in 0..40 {
            let mut u = p.u().to_vec();
            let mut f = p.f().to_vec();
            let mut slope = 0.0;
            for i in 1..n - 1 {
                let su = t * gu[i] / du[i].max(1e-12);
                let sf = t * gf[i] / df[i].max(1e-12);
                u[i] = (u[i] - su).clamp(0.0, 1.0);
                f[i] = (f[i] - sf).clamp(0.0, 1.0);
                slope += gu[i] * (p.u()[i] - u[i]) + gf[i] * (p.f()[i] - f[i]);
            }
            let trial = Profile::new(p.grid().clone(), u, f)?;
            let e1 = energy(&trial, params)?.total;
            if e1.is_finite() && e1 <= e0 - 1e-4 * slope {
                *p = trial;
                e0 = e1;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Ok(it + 1);
        }
        step = (2.0 * t).min(4.0);
    }
    Ok(max_iters)
}

/// Damped Newton on the stationarity system of the discrete energy, with
/// a Levenberg diagonal shift when the block factorization degenerates or
/// the line search stalls. Returns accepted steps and whether the last
/// attempt stalled without advancing.
fn newton(
    p: &mut Profile,
    params: &Parameters,
    max_iters: usize,
    grad_tol: f64,
) -> Result<(usize, bool), SolveError> {
    let n = p.grid().len();
    let m = n - 2;
    let mut e0 = energy(p, params)?.total;
    for it in 0..max_iters {
        let (gu, gf) = energy_gradient(p, params)?;
        if projected_sup(p, &gu, &gf) <= grad_tol {
            return Ok((it, false));
        }
        let (mut diag, lower, upper) = hessian_blocks(p, params);
        let scale = diag
            .iter()
            .map(|b| b[0].abs().max(b[3].abs()))
            .fold(0.0f64, f64::max)
            .max(1e-300);
        let mut rhs = vec![0.0; 2 * m];
        for i in 0..m {
            rhs[2 * i] = -gu[i + 1];
            rhs[2 * i + 1] = -gf[i + 1];
        }

        let mut lambda = 0.0f64;
        let mut advanced = false;
        for _try in 0..9 {
            if lambda > 0.0 {
                for b in diag.iter_mut() {
                    b[0] += lambda;
                    b[3] += lambda;
                }
            }
            let sol = solve_block2(&diag, &lower, &upper, &rhs, 1e-300 * scale);
            if let Some(delta) = sol {
                let mut t = 1.0f64;
                for _ in 0..30 {
                    let mut u = p.u().to_vec();
                    let mut f = p.f().to_vec();
                    for i in 0..m {
                        u[i + 1] += t * delta[2 * i];
                        f[i + 1] += t * delta[2 * i + 1];
                    }
                    let trial = Profile::new(p.grid().clone(), u, f)?;
                    let e1 = energy(&trial, params)?.total;
                    if e1.is_finite() && e1 <= e0 + 1e-13 * (1.0 + e0.abs()) {
                        *p = trial;
                        e0 = e1;
                        advanced = true;
                        break;
                    }
                    t *= 0.5;
                }
                if advanced {
                    break;
                }
            }
            lambda = if lambda == 0.0 { 1e-8 * scale } else { lambda * 100.0 };
        }
        if !advanced {
            return Ok((it, true));
        }
    }
    Ok((max_iters, false))
}

/// Outcome of a standalone Newton refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NewtonStatus {
    Converged,
    /// The factorization degenerated and damping could not recover;
    /// the input profile is returned unchanged.
    SingularJacobian,
    IterationCap,
}

#[derive(Debug, Clone)]
pub struct NewtonRefine {
    pub profile: Profile,
    pub iterations: usize,
    pub status: NewtonStatus,
}

/// Newton polish of a near-solution profile on its own grid. The input
/// must carry the exact Dirichlet boundary values.
pub fn newton_refine(p: &Profile, params: &Parameters, cfg: &SolveConfig) -> Result<NewtonRefine, SolveError> {
    if params.gamma_is_infinite() {
        return Err(SolveError::InvalidParameters("gamma is infinite".into()));
    }
    let n = p.grid().len();
    let bc = [
        (p.u()[0], 1.0, "u(r_min)"),
        (p.f()[0], 0.0, "f(r_min)"),
        (p.u()[n - 1], 0.0, "u(r_max)"),
        (p.f()[n - 1], 1.0, "f(r_max)"),
    ];
    for (got, want, name) in bc {
        if (got - want).abs() > 1e-8 {
            return Err(SolveError::InvalidParameters(format!(
                "boundary value violated: {name} = {got}, expected {want}"
            )));
        }
    }
    let mut q = p.clone();
    let mut iters = 0usize;
    let cap = cfg.max_iters.min(60);
    loop {
        let el = el_residual_scaled_norm(&q, params)?;
        let (gu, gf) = energy_gradient(&q, params)?;
        let pg = projected_sup(&q, &gu, &gf);
        if el <= cfg.newton_tol && pg <= cfg.grad_tol {
            return Ok(NewtonRefine { profile: q, iterations: iters, status: NewtonStatus::Converged });
        }
        if iters >= cap {
            return Ok(NewtonRefine { profile: q, iterations: iters, status: NewtonStatus::IterationCap });
        }
        let (steps, stalled) = newton(&mut q, params, 1, cfg.grad_tol)?;
        if stalled {
            return Ok(NewtonRefine {
                profile: p.clone(),
                iterations: iters,
                status: NewtonStatus::SingularJacobian,
            });
        }
        if steps == 0 {
            // gradient already at tolerance but the residual is not: the
            // discretization floor sits above newton_tol
            return Ok(NewtonRefine { profile: q, iterations: iters, status: NewtonStatus::IterationCap });
        }
        iters += steps;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn small_grid() -> Arc<RadialGrid> {
        Arc::new(build_grid(1e-2, 15.0, 241, 1.01).unwrap())
    }

    #[test]
    fn project_box_clamps_and_is_identity_on_feasible() {
        let g = small_grid();
        let mut u = vec![0.5; g.len()];
        u[5] = 1.2;
        let f = vec![0.25; g.len()];
        let p = Profile::new(g.clone(), u, f).unwrap();
        let q = project_box(&p);
        assert_eq!(q.u()[5], 1.0);
        assert!(q.in_feasible_box() || q.u()[0] > 1.0); // boundary untouched
        let r = project_box(&q);
        assert_eq!(r.u(), q.u());
        assert_eq!(r.f(), q.f());
    }

    #[test]
    fn project_box_lowers_energy_of_random_noise() {
        let g = small_grid();
        let params = Parameters::new(1.0, 2.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..50 {
            let mut u: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-0.3..1.3)).collect();
            let mut f: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-0.3..1.3)).collect();
            u[0] = 1.0;
            f[0] = 0.0;
            let n = g.len();
            u[n - 1] = 0.0;
            f[n - 1] = 1.0;
            let p = Profile::new(g.clone(), u, f).unwrap();
            let before = energy(&p, &params).unwrap().total;
            let after = energy(&project_box(&p), &params).unwrap().total;
            assert!(after <= before, "clamping raised energy: {after} > {before}");
        }
    }

    #[test]
    fn initial_guess_shapes() {
        let g = small_grid();
        let params = Parameters::new(1.0, 2.0, 0.0).unwrap();
        let n = g.len();

        let lin = initial_guess(InitKind::Linear, &params, &g);
        assert_eq!((lin.u()[0], lin.f()[0]), (1.0, 0.0));
        assert_eq!((lin.u()[n - 1], lin.f()[n - 1]), (0.0, 1.0));

        let bps = initial_guess(InitKind::Bps, &params, &g);
        let closed = bps_profile(1.0, &g);
        for i in 1..n - 1 {
            assert_eq!(bps.u()[i], closed.u()[i]);
            assert_eq!(bps.f()[i], closed.f()[i]);
        }

        // alpha*beta = 2 makes the exponential guess u = e^{-r}
        let exp = initial_guess(InitKind::Exponential, &params, &g);
        for (i, &r) in g.nodes().iter().enumerate().skip(1).take(n - 2) {
            assert!((exp.u()[i] - (-r).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn default_r_max_respects_tail_rates() {
        let g0 = Parameters::new(1.0, 2.0, 0.0).unwrap();
        assert_eq!(default_r_max(&g0), 160.0);
        let gi = Parameters::new(1.0, 2.0, f64::INFINITY).unwrap();
        assert_eq!(default_r_max(&gi), 400.0);
        let g1 = Parameters::new(1.0, 6.0, 1.0).unwrap();
        assert_eq!(default_r_max(&g1), 20.0);
        // slow Higgs relaxation stretches the domain
        let slow = Parameters::new(1.0, 2.0, 0.01).unwrap();
        assert!(default_r_max(&slow) > 20.0);
    }

    #[test]
    fn newton_refine_rejects_bad_boundary_values() {
        let g = small_grid();
        let params = Parameters::new(1.0, 2.0, 0.0).unwrap();
        let cfg = SolveConfig::default();
        let mut p = bps_profile(1.0, &g);
        // leave u(r_max) at its closed-form value instead of clamping to 0
        p = Profile::new(
            g.clone(),
            {
                let mut u = p.u().to_vec();
                u[0] = 0.7;
                u
            },
            p.f().to_vec(),
        )
        .unwrap();
        assert!(matches!(
            newton_refine(&p, &params, &cfg),
            Err(SolveError::InvalidParameters(_))
        ));
    }

    #[test]
    fn solve_rejects_infinite_gamma_and_bad_config() {
        let params = Parameters::new(1.0, 2.0, f64::INFINITY).unwrap();
        assert!(matches!(
            solve(&params, &SolveConfig::default()),
            Err(SolveError::InvalidParameters(_))
        ));
        let params = Parameters::new(1.0, 2.0, 0.0).unwrap();
        let cfg = SolveConfig { continuation_steps: 0, ..Default::default() };
        assert!(solve(&params, &cfg).is_err());
    }
}
