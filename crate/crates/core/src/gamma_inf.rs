//! The infinite-Higgs-coupling limit: f frozen at 1 leaves a single field
//! with energy
//!
//! ```text
//! I(u) = ∫ { 2(u')^2 + (1-u^2)^2/r^2 + αβ u^2 } dr,   u(0) = 1, u(∞) = 0,
//! ```
//!
//! solved by the same descent-plus-Newton machinery specialized to one
//! field. This is a distinct code path, not a large-γ limit of the
//! two-field solver: the reduction removes the stiff Higgs term entirely.
//!
//! The cell assembly uses the trapezoid form of the mass term; this keeps
//! the exact discrete lower bound I ≥ √(2αβ) (the completed square sheds a
//! nonnegative remainder) and makes the discrete tail decay no faster than
//! e^{-√(αβ/2) r}, which the pointwise-bound certificate needs.

use crate::diagnostics::fit_line;
use crate::grid::{build_grid, RadialGrid};
use crate::solver::{InitKind, SolveConfig, SolveError};
use crate::tridiag::solve_scalar;
use std::f64::consts::LN_2;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GammaInfError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("gamma-infinity solve did not converge (partial energy {})", .0.energy)]
    NonConvergence(Box<GammaInfSolution>),
    #[error("two-field solve for C(epsilon) did not converge; partial C = {0}")]
    CNonConvergence(f64),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Minimizer of the reduced single-field energy.
#[derive(Debug, Clone)]
pub struct GammaInfSolution {
    pub grid: Arc<RadialGrid>,
    pub u: Vec<f64>,
    /// Discrete I(u).
    pub energy: f64,
    /// Relative mismatch of the partition identity; ~0 at a minimizer.
    pub virial_gap: f64,
    /// √(2αβ).
    pub lower_bound: f64,
    /// √(2αβ(1+4ln2)).
    pub upper_bound: f64,
    pub el_residual_norm: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

struct Terms {
    grad: f64,
    pot: f64,
    mass: f64,
}

fn terms(r: &[f64], u: &[f64], ab: f64) -> Terms {
    let mut t = Terms { grad: 0.0, pot: 0.0, mass: 0.0 };
    for i in 0..r.len() - 1 {
        let h = r[i + 1] - r[i];
        let rm = 0.5 * (r[i] + r[i + 1]);
        let du = (u[i + 1] - u[i]) / h;
        let m2u = 0.5 * (u[i] * u[i] + u[i + 1] * u[i + 1]);
        t.grad += 2.0 * du * du * h;
        t.pot += (1.0 - m2u) * (1.0 - m2u) / (rm * rm) * h;
        t.mass += ab * m2u * h;
    }
    t
}

fn energy1(r: &[f64], u: &[f64], ab: f64) -> f64 {
    let t = terms(r, u, ab);
    t.grad + t.pot + t.mass
}

fn gradient1(r: &[f64], u: &[f64], ab: f64) -> Vec<f64> {
    let n = r.len();
    let mut g = vec![0.0; n];
    for i in 0..n - 1 {
        let h = r[i + 1] - r[i];
        let rm = 0.5 * (r[i] + r[i + 1]);
        let du = (u[i + 1] - u[i]) / h;
        let m2u = 0.5 * (u[i] * u[i] + u[i + 1] * u[i + 1]);
        let pot = 2.0 * h * (1.0 - m2u) / (rm * rm);
        g[i] += -4.0 * du - pot * u[i] + ab * h * u[i];
        g[i + 1] += 4.0 * du - pot * u[i + 1] + ab * h * u[i + 1];
    }
    g[0] = 0.0;
    g[n - 1] = 0.0;
    g
}

/// Tridiagonal Hessian over interior nodes.
fn hessian1(r: &[f64], u: &[f64], ab: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = r.len();
    let m = n - 2;
    let mut diag = vec![0.0; m];
    let mut lower = vec![0.0; m.saturating_sub(1)];
    let mut upper = vec![0.0; m.saturating_sub(1)];
    for i in 0..n - 1 {
        let h = r[i + 1] - r[i];
        let rm = 0.5 * (r[i] + r[i + 1]);
        let rm2 = rm * rm;
        let m2u = 0.5 * (u[i] * u[i] + u[i + 1] * u[i + 1]);
        let sides = [i, i + 1];
        let sgn = [-1.0, 1.0];
        for aa in 0..2 {
            let ia = sides[aa];
            if ia == 0 || ia == n - 1 {
                continue;
            }
            for bb in 0..2 {
                let ib = sides[bb];
                if ib == 0 || ib == n - 1 {
                    continue;
                }
                let dab = if aa == bb { 1.0 } else { 0.0 };
                let v = 4.0 * sgn[aa] * sgn[bb] / h - 2.0 * h * (1.0 - m2u) * dab / rm2
                    + 2.0 * h * u[ia] * u[ib] / rm2
                    + ab * h * dab;
                let (ja, jb) = (ia - 1, ib - 1);
                if ja == jb {
                    diag[ja] += v;
                } else if ja < jb {
                    upper[ja] += v;
                } else {
                    lower[jb] += v;
                }
            }
        }
    }
    (diag, lower, upper)
}

fn projected_sup1(u: &[f64], g: &[f64]) -> f64 {
    let n = u.len();
    let mut sup = 0.0f64;
    for i in 1..n - 1 {
        let pg = if u[i] <= 0.0 {
            g[i].min(0.0)
        } else if u[i] >= 1.0 {
            g[i].max(0.0)
        } else {
            g[i]
        };
        sup = sup.max(pg.abs());
    }
    sup
}

/// Scaled sup of the residual of u'' = (αβ/2) u + u(u²-1)/r², skipping the
/// band r < 3 r_min where the cutoff's own regularization error dominates
/// (with f frozen, u carries a resonant r² ln r term near the origin that
/// the clamped boundary value cannot represent).
fn el_scaled_norm1(grid: &RadialGrid, u: &[f64], ab: f64) -> f64 {
    let upp = grid.second_derivative(u).expect("length checked");
    let r = grid.nodes();
    let n = r.len();
    let cutoff = 3.0 * r[0];
    let start = r.partition_point(|&x| x < cutoff).max(1);
    let start = if start >= n - 1 { 1 } else { start };
    let mut worst = 0.0f64;
    for i in start..n - 1 {
        let t1 = 0.5 * ab * u[i];
        let t2 = u[i] * (u[i] * u[i] - 1.0) / (r[i] * r[i]);
        let res = (upp[i] - t1 - t2).abs() / (1.0 + upp[i].abs() + t1.abs() + t2.abs());
        worst = worst.max(res);
    }
    worst
}

fn descent1(r: &[f64], u: &mut Vec<f64>, ab: f64, max_iters: usize, grad_tol: f64) -> usize {
    let n = r.len();
    let mut e0 = energy1(r, u, ab);
    let mut step = 1.0f64;
    let mut pg0 = f64::INFINITY;
    for it in 0..max_iters {
        let g = gradient1(r, u, ab);
        let pg = projected_sup1(u, &g);
        if it == 0 {
            pg0 = pg;
        }
        if pg <= grad_tol || (it >= 30 && pg <= 1e-3 * pg0) {
            return it;
        }
        let (diag, _, _) = hessian1(r, u, ab);
        let mut t = step;
        let mut accepted = false;
        for _ in 0..40 {
            let mut v = u.clone();
            let mut slope = 0.0;
            for i in 1..n - 1 {
                v[i] = (v[i] - t * g[i] / diag[i - 1].max(1e-12)).clamp(0.0, 1.0);
                slope += g[i] * (u[i] - v[i]);
            }
            let e1 = energy1(r, &v, ab);
            if e1.is_finite() && e1 <= e0 - 1e-4 * slope {
                *u = v;
                e0 = e1;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return it + 1;
        }
        step = (2.0 * t).min(4.0);
    }
    max_iters
}

fn newton1(r: &[f64], u: &mut Vec<f64>, ab: f64, max_iters: usize, grad_tol: f64) -> usize {
    let n = r.len();
    let m = n - 2;
    let mut e0 = energy1(r, u, ab);
    for it in 0..max_iters {
        let g = gradient1(r, u, ab);
        if projected_sup1(u, &g) <= grad_tol {
            return it;
        }
        let (mut diag, lower, upper) = hessian1(r, u, ab);
        let scale = diag.iter().fold(0.0f64, |a, &d| a.max(d.abs())).max(1e-300);
        let rhs: Vec<f64> = (0..m).map(|i| -g[i + 1]).collect();
        let mut lambda = 0.0f64;
        let mut advanced = false;
        for _ in 0..9 {
            if lambda > 0.0 {
                for d in diag.iter_mut() {
                    *d += lambda;
                }
            }
            if let Some(delta) = solve_scalar(&diag, &lower, &upper, &rhs, 1e-300 * scale) {
                let mut t = 1.0f64;
                for _ in 0..30 {
                    let mut v = u.clone();
                    for i in 0..m {
                        v[i + 1] += t * delta[i];
                    }
                    let e1 = energy1(r, &v, ab);
                    if e1.is_finite() && e1 <= e0 + 1e-13 * (1.0 + e0.abs()) {
                        *u = v;
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
            return it + 1;
        }
    }
    max_iters
}

/// Minimizes I(u) for the given αβ product split as (α, β).
pub fn solve_gamma_inf(alpha: f64, beta: f64, cfg: &SolveConfig) -> Result<GammaInfSolution, GammaInfError> {
    if !(alpha > 0.0 && alpha.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
        return Err(GammaInfError::InvalidParameters(format!(
            "alpha and beta must be positive and finite, got ({alpha}, {beta})"
        )));
    }
    cfg.validate()?;
    let ab = alpha * beta;
    let kappa = (ab / 2.0).sqrt();
    let r_max = cfg.r_max.unwrap_or(400.0 / kappa);
    if r_max <= cfg.r_min {
        return Err(GammaInfError::InvalidParameters(format!(
            "r_max {r_max} must exceed r_min {}",
            cfg.r_min
        )));
    }
    let steps = cfg.continuation_steps;
    let r_min_final = cfg.r_min * 0.5f64.powi(steps as i32 - 1);
    let full = Arc::new(build_grid(r_min_final, r_max, cfg.n_nodes, cfg.ratio).map_err(SolveError::from)?);

    let mut history = Vec::with_capacity(steps);
    let mut iterations = 0usize;
    let mut prev: Option<(Arc<RadialGrid>, Vec<f64>)> = None;

    for k in 0..steps {
        let cut = cfg.r_min * 0.5f64.powi(k as i32);
        let i0 = if k + 1 == steps {
            0
        } else {
            full.nodes().partition_point(|&r| r < cut * (1.0 - 1e-12))
        };
        let grid = Arc::new(full.tail_from(i0));
        let r = grid.nodes();
        let n = grid.len();

        let mut u = match &prev {
            None => match cfg.init {
                InitKind::Exponential => r.iter().map(|&x| (-kappa * x).exp()).collect(),
                InitKind::Linear => {
                    let span = grid.r_max() - grid.r_min();
                    r.iter().map(|&x| (grid.r_max() - x) / span).collect()
                }
                InitKind::Bps => r.iter().map(|&x| crate::bps::bps_u(alpha.sqrt() * x)).collect::<Vec<f64>>(),
            },
            Some((pg, pu)) => {
                let n_new = n - pg.len();
                let r_ref = pg.nodes()[1];
                let cu = (1.0 - pu[1]) / (r_ref * r_ref);
                let mut v: Vec<f64> = r[..=n_new].iter().map(|&x| 1.0 - cu * x * x).collect();
                v.extend_from_slice(&pu[1..]);
                v
            }
        };
        u[0] = 1.0;
        u[n - 1] = 0.0;

        let mut used = 0usize;
        for _round in 0..3 {
            let budget = cfg.max_iters.saturating_sub(used);
            if budget == 0 {
                break;
            }
            used += descent1(r, &mut u, ab, budget.min(400), cfg.grad_tol);
            let budget = cfg.max_iters.saturating_sub(used);
            if budget == 0 {
                break;
            }
            used += newton1(r, &mut u, ab, budget.min(60), cfg.grad_tol);
            let g = gradient1(r, &u, ab);
            if projected_sup1(&u, &g) <= cfg.grad_tol {
                break;
            }
        }
        iterations += used;
        history.push(energy1(r, &u, ab));
        prev = Some((grid, u));
    }

    let (grid, u) = prev.expect("at least one step");
    let t = terms(grid.nodes(), &u, ab);
    let energy = t.grad + t.pot + t.mass;
    let gap = (t.grad + t.pot - t.mass).abs() / energy;
    let g = gradient1(grid.nodes(), &u, ab);
    let grad_norm = projected_sup1(&u, &g);
    let el_norm = el_scaled_norm1(&grid, &u, ab);
    let (lower, _, upper) = energy_bounds_gamma_inf(alpha, beta);

    let sol = GammaInfSolution {
        grid,
        u,
        energy,
        virial_gap: gap,
        lower_bound: lower,
        upper_bound: upper,
        el_residual_norm: el_norm,
        grad_norm,
        iterations,
        history,
    };
    if grad_norm <= cfg.grad_tol && el_norm <= cfg.newton_tol {
        Ok(sol)
    } else {
        Err(GammaInfError::NonConvergence(Box::new(sol)))
    }
}

/// Relative mismatch |∫{2(u')² + (1-u²)²/r²} − ∫αβu²| / I(u) on grid
/// samples; zero for an exact minimizer by the scaling identity.
pub fn virial_gap(u: &[f64], grid: &RadialGrid, alpha: f64, beta: f64) -> f64 {
    assert_eq!(u.len(), grid.len(), "sample length must match the grid");
    let t = terms(grid.nodes(), u, alpha * beta);
    (t.grad + t.pot - t.mass).abs() / (t.grad + t.pot + t.mass)
}

/// Energy F(a) = a(1+4ln2) + αβ/(2a) of the trial profile e^{-a r}.
pub fn trial_energy(a: f64, alpha: f64, beta: f64) -> f64 {
    assert!(a > 0.0, "trial rate must be positive");
    a * (1.0 + 4.0 * LN_2) + alpha * beta / (2.0 * a)
}

/// The optimal trial rate a₀ = √(αβ/(2(1+4ln2))); F(a₀) = √(2αβ(1+4ln2)).
pub fn trial_rate_optimal(alpha: f64, beta: f64) -> f64 {
    (alpha * beta / (2.0 * (1.0 + 4.0 * LN_2))).sqrt()
}

/// Virial mismatch of the trial profile e^{-a r} from the closed-form
/// integrals ∫2(u')² = a, ∫(1-e^{-2ar})²/r² = 4a ln2, ∫αβu² = αβ/2a.
pub fn trial_virial_gap(a: f64, alpha: f64, beta: f64) -> f64 {
    assert!(a > 0.0, "trial rate must be positive");
    let lhs = a + 4.0 * a * LN_2;
    let rhs = alpha * beta / (2.0 * a);
    (lhs - rhs).abs() / (lhs + rhs)
}

/// (√(2αβ), √(2αβ)(1+2ln2), √(2αβ(1+4ln2))): the lower bound, the coarse
/// upper bound from the exact-rate trial, and its improvement from
/// optimizing the rate.
pub fn energy_bounds_gamma_inf(alpha: f64, beta: f64) -> (f64, f64, f64) {
    let s = (2.0 * alpha * beta).sqrt();
    (s, s * (1.0 + 2.0 * LN_2), (2.0 * alpha * beta * (1.0 + 4.0 * LN_2)).sqrt())
}

/// Outcome of solving from two different initializations; the minimizer is
/// unique, so the distance certifies the solver.
#[derive(Debug, Clone, Copy)]
pub struct UniquenessCheck {
    pub sup_distance: f64,
    pub energy_exponential: f64,
    pub energy_linear: f64,
}

pub fn uniqueness_cross_check(alpha: f64, beta: f64, cfg: &SolveConfig) -> Result<UniquenessCheck, GammaInfError> {
    let a = solve_gamma_inf(alpha, beta, &SolveConfig { init: InitKind::Exponential, ..*cfg })?;
    let b = solve_gamma_inf(alpha, beta, &SolveConfig { init: InitKind::Linear, ..*cfg })?;
    let sup = a
        .u
        .iter()
        .zip(&b.u)
        .fold(0.0f64, |acc, (&x, &y)| acc.max((x - y).abs()));
    Ok(UniquenessCheck {
        sup_distance: sup,
        energy_exponential: a.energy,
        energy_linear: b.energy,
    })
}

/// The Georgi--Glashow monopole energy constant C(ε) obtained from the
/// parameter map (α, β, γ) = (1, 2, ε²/2); C(ε) is half the corresponding
/// minimum of I. `ε = ∞` uses the reduced single-field problem.
pub fn georgi_glashow_c(epsilon: f64, cfg: &SolveConfig) -> Result<f64, GammaInfError> {
    if !(epsilon >= 0.0) {
        return Err(GammaInfError::InvalidParameters(format!(
            "epsilon must be >= 0 or infinite, got {epsilon}"
        )));
    }
    if epsilon.is_infinite() {
        let sol = solve_gamma_inf(1.0, 2.0, cfg)?;
        return Ok(sol.energy / 2.0);
    }
    let params = crate::energy::Parameters::new(1.0, 2.0, epsilon * epsilon / 2.0)
        .map_err(|e| GammaInfError::InvalidParameters(e.to_string()))?;
    let solved = crate::solver::solve(&params, cfg)?;
    let c = solved.report.breakdown.total / 2.0;
    if solved.converged {
        Ok(c)
    } else {
        Err(GammaInfError::CNonConvergence(c))
    }
}

/// Least-squares decay rate of u on the window [r_max/4, r_max/2]; the
/// far tail is excluded because the Dirichlet clamp and the stencil
/// dispersion distort it.
pub fn tail_rate(u: &[f64], grid: &RadialGrid) -> Option<f64> {
    let r = grid.nodes();
    let (lo, hi) = (grid.r_max() / 4.0, grid.r_max() / 2.0);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..r.len() {
        if r[i] >= lo && r[i] <= hi && u[i] > 0.0 {
            xs.push(r[i]);
            ys.push(u[i].ln());
        }
    }
    if xs.len() < 8 {
        return None;
    }
    let (_, slope) = fit_line(&xs, &ys);
    Some(-slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_energy_closed_forms() {
        // F(a0) = sqrt(2 alpha beta (1+4 ln 2)) exactly
        for &(alpha, beta) in &[(1.0, 2.0), (0.5, 7.0), (3.0, 1.0)] {
            let a0 = trial_rate_optimal(alpha, beta);
            let f0 = trial_energy(a0, alpha, beta);
            let exact = (2.0 * alpha * beta * (1.0 + 4.0 * LN_2)).sqrt();
            assert!((f0 - exact).abs() <= 1e-12 * exact);
            // stationarity by central difference
            let d = 1e-6;
            let slope = (trial_energy(a0 + d, alpha, beta) - trial_energy(a0 - d, alpha, beta)) / (2.0 * d);
            assert!(slope.abs() < 1e-8);
            // a0 satisfies the partition identity analytically
            assert!(trial_virial_gap(a0, alpha, beta) < 1e-14);
        }
        // alpha*beta = 2, a = 1: F = 2 + 4 ln 2
        let f = trial_energy(1.0, 1.0, 2.0);
        assert!((f - (2.0 + 4.0 * LN_2)).abs() < 1e-12);
        assert!((f - 4.7725887).abs() < 1e-7);
    }

    #[test]
    fn mismatched_trial_rate_has_visible_gap() {
        // u = e^{-r} with alpha*beta = 8: closed-form sides are
        // 1 + 4 ln 2 vs 4; relative gap ~0.0293, absolute mismatch > 0.1
        let gap = trial_virial_gap(1.0, 1.0, 8.0);
        let lhs = 1.0 + 4.0 * LN_2;
        let rhs = 4.0;
        assert!((gap - (rhs - lhs).abs() / (lhs + rhs)).abs() < 1e-15);
        assert!(gap > 0.029 && gap < 0.030, "gap {gap}");
        assert!((lhs - rhs).abs() > 0.1);
    }

    #[test]
    fn bounds_ordering_and_scaling() {
        let (lo, coarse, improved) = energy_bounds_gamma_inf(1.0, 2.0);
        assert!((lo - 2.0).abs() < 1e-15);
        assert!((coarse - 4.7725887).abs() < 1e-7);
        assert!((improved - 3.8846306).abs() < 1e-7);
        assert!(improved < coarse);
        // gap constant (1+2ln2) - sqrt(1+4ln2) > 7/16
        let c = (1.0 + 2.0 * LN_2) - (1.0 + 4.0 * LN_2).sqrt();
        assert!(c > 7.0 / 16.0);
        // alpha -> 4 alpha scales all three by 2
        let (lo4, coarse4, improved4) = energy_bounds_gamma_inf(4.0, 2.0);
        assert!((lo4 - 2.0 * lo).abs() < 1e-12);
        assert!((coarse4 - 2.0 * coarse).abs() < 1e-12);
        assert!((improved4 - 2.0 * improved).abs() < 1e-12);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let cfg = SolveConfig::default();
        assert!(matches!(
            solve_gamma_inf(-1.0, 2.0, &cfg),
            Err(GammaInfError::InvalidParameters(_))
        ));
        assert!(matches!(
            georgi_glashow_c(-0.5, &cfg),
            Err(GammaInfError::InvalidParameters(_))
        ));
    }
}
