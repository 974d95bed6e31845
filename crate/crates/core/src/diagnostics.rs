//! Certifies a profile (solved or imported) against the model's testable
//! statements: box bounds and monotonicity, near-origin powers, tail decay
//! rates, the γ = 0 flux/tail-coefficient identity, and the energy-bound
//! sandwich.

use crate::bps::{energy_lower_bound, nonbps_upper_bound};
use crate::energy::{energy, EnergyError, Parameters, Profile};
use crate::gamma_inf::energy_bounds_gamma_inf;
use crate::solver::EnergyReport;
use thiserror::Error;

/// Ties below this size do not break strict monotonicity.
const MONOTONE_TOL: f64 = 1e-12;
/// Discretization budget for bound comparisons (relative).
const BOUND_BUDGET: f64 = 0.02;

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("fit window '{0}' has fewer than 8 usable nodes")]
    WindowTooShort(&'static str),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

/// Least-squares line fit; returns (intercept, slope).
pub(crate) fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (intercept, slope)
}

/// Box and monotonicity flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxMonotone {
    /// Every interior node strictly inside (0, 1) for both fields.
    pub in_unit_box: bool,
    /// Non-increasing within ties of 1e-12, strictly decreasing over the span.
    pub u_monotone_decreasing: bool,
    /// Non-decreasing within ties of 1e-12, strictly increasing over the span.
    pub f_monotone_increasing: bool,
}

pub fn check_box_and_monotone(p: &Profile) -> BoxMonotone {
    let n = p.grid().len();
    let interior_ok = |v: &[f64]| v[1..n - 1].iter().all(|&x| x > 0.0 && x < 1.0);
    let u = p.u();
    let f = p.f();
    BoxMonotone {
        in_unit_box: interior_ok(u) && interior_ok(f),
        u_monotone_decreasing: u.windows(2).all(|w| w[1] <= w[0] + MONOTONE_TOL)
            && u[0] - u[n - 1] > MONOTONE_TOL,
        f_monotone_increasing: f.windows(2).all(|w| w[1] >= w[0] - MONOTONE_TOL)
            && f[n - 1] - f[0] > MONOTONE_TOL,
    }
}

/// Fitted asymptotic exponents and coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticFits {
    /// Decay rate of u from ln u vs r on the outer third.
    pub u_tail_rate: f64,
    /// Decay rate of 1 - f; only meaningful for γ > 0.
    pub f_tail_rate: Option<f64>,
    /// Fitted limit of r(1 - f); γ = 0 only, where the tail is algebraic.
    pub f_tail_coefficient: Option<f64>,
    /// Power of 1 - u near the origin from a log-log fit.
    pub u_origin_power: f64,
    /// Power of f near the origin from a log-log fit.
    pub f_origin_power: f64,
}

/// Window selection: radii are used, not node indices, because the graded
/// mesh concentrates nodes near the origin. Tail fits run on the outer
/// third of the radial extent, dropping at least the last 5 nodes and
/// everything within 3/κ of r_max where the Dirichlet clamp bites. Origin
/// fits run on one decade starting at 3 r_min: the first couple of nodes
/// feel the inner Dirichlet value instead of the power law.
pub fn fit_asymptotics(p: &Profile, params: &Parameters) -> Result<AsymptoticFits, DiagnosticsError> {
    let grid = p.grid();
    let r = grid.nodes();
    let n = r.len();
    let span = grid.r_max() - grid.r_min();
    let tail_lo = grid.r_min() + 2.0 / 3.0 * span;
    let last5 = r[n - 6];

    let tail_window = |clamp_margin: f64| -> (f64, f64) {
        (tail_lo, last5.min(grid.r_max() - clamp_margin))
    };

    // u tail: ln u vs r
    let (lo, hi) = tail_window(3.0 / params.kappa_u());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..n {
        if r[i] >= lo && r[i] <= hi && p.u()[i] > 0.0 {
            xs.push(r[i]);
            ys.push(p.u()[i].ln());
        }
    }
    if xs.len() < 8 {
        return Err(DiagnosticsError::WindowTooShort("u tail"));
    }
    let u_tail_rate = -fit_line(&xs, &ys).1;

    let mut f_tail_rate = None;
    let mut f_tail_coefficient = None;
    if params.gamma > 0.0 {
        let (lo, hi) = tail_window(3.0 / params.kappa_f());
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..n {
            let d = 1.0 - p.f()[i];
            if r[i] >= lo && r[i] <= hi && d > 0.0 {
                xs.push(r[i]);
                ys.push(d.ln());
            }
        }
        if xs.len() < 8 {
            return Err(DiagnosticsError::WindowTooShort("f tail"));
        }
        f_tail_rate = Some(-fit_line(&xs, &ys).1);
    } else {
        // algebraic tail: r(1-f) = c0 + c1 r on the window; the Dirichlet
        // clamp contributes exactly the linear part, so the intercept
        // estimates the untruncated limit
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..n {
            if r[i] >= tail_lo && r[i] <= last5 {
                xs.push(r[i]);
                ys.push(r[i] * (1.0 - p.f()[i]));
            }
        }
        if xs.len() < 8 {
            return Err(DiagnosticsError::WindowTooShort("f tail coefficient"));
        }
        f_tail_coefficient = Some(fit_line(&xs, &ys).0);
    }

    // origin powers on [3 r_min, 30 r_min]
    let (olo, ohi) = (3.0 * grid.r_min(), 30.0 * grid.r_min());
    let mut xu = Vec::new();
    let mut yu = Vec::new();
    let mut xf = Vec::new();
    let mut yf = Vec::new();
    for i in 0..n {
        if r[i] >= olo && r[i] <= ohi {
            let du = 1.0 - p.u()[i];
            if du > 0.0 {
                xu.push(r[i].ln());
                yu.push(du.ln());
            }
            if p.f()[i] > 0.0 {
                xf.push(r[i].ln());
                yf.push(p.f()[i].ln());
            }
        }
    }
    if xu.len() < 8 || xf.len() < 8 {
        return Err(DiagnosticsError::WindowTooShort("origin"));
    }
    let u_origin_power = fit_line(&xu, &yu).1;
    let f_origin_power = fit_line(&xf, &yf).1;

    Ok(AsymptoticFits {
        u_tail_rate,
        f_tail_rate,
        f_tail_coefficient,
        u_origin_power,
        f_origin_power,
    })
}

/// Verdict of an energy-bound comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundCheck {
    Inside,
    OnBoundary,
    Violated,
}

/// Bound verdict with relative margins; `upper` is absent in the partial-
/// coverage regime γ ∈ (0, ∞) where only the term-dropping lower bound is
/// available.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundVerdict {
    pub check: BoundCheck,
    pub lower_bound: f64,
    pub upper_bound: Option<f64>,
    /// (total - lower)/lower.
    pub lower_margin: f64,
    /// (upper - total)/upper when an upper bound exists.
    pub upper_margin: Option<f64>,
    /// True when no paper upper bound covers this regime.
    pub partial_coverage: bool,
}

/// Compares a total energy against the bounds for the given couplings.
pub fn check_bounds_value(total: f64, params: &Parameters) -> BoundVerdict {
    let (lower, upper, partial) = if params.gamma_is_infinite() {
        let (lo, _, hi) = energy_bounds_gamma_inf(params.alpha, params.beta);
        (lo, Some(hi), false)
    } else if params.gamma == 0.0 {
        (
            energy_lower_bound(params.alpha, params.beta),
            Some(nonbps_upper_bound(params.alpha, params.beta)),
            false,
        )
    } else {
        (energy_lower_bound(params.alpha, params.beta), None, true)
    };

    let lower_margin = (total - lower) / lower;
    let upper_margin = upper.map(|up| (up - total) / up);
    let mut check = BoundCheck::Inside;
    if total < lower * (1.0 - BOUND_BUDGET) {
        check = BoundCheck::Violated;
    } else if lower_margin.abs() <= BOUND_BUDGET {
        check = BoundCheck::OnBoundary;
    }
    if let Some(up) = upper {
        if total > up * (1.0 + BOUND_BUDGET) {
            check = BoundCheck::Violated;
        } else if check == BoundCheck::Inside && ((up - total) / up).abs() <= BOUND_BUDGET {
            check = BoundCheck::OnBoundary;
        }
    }
    BoundVerdict { check, lower_bound: lower, upper_bound: upper, lower_margin, upper_margin, partial_coverage: partial }
}

/// Bound verdict for an already-assembled energy report.
pub fn verify_energy_bounds(report: &EnergyReport, params: &Parameters) -> BoundVerdict {
    check_bounds_value(report.breakdown.total, params)
}

/// Everything the certification layer measures on one profile.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub in_unit_box: bool,
    pub u_monotone_decreasing: bool,
    pub f_monotone_increasing: bool,
    pub fits: AsymptoticFits,
    /// Quadrature of β f u²; for γ = 0 this must agree with the fitted
    /// tail coefficient of r(1 - f).
    pub flux_integral: f64,
    pub bounds: BoundVerdict,
}

/// Runs every check on a profile. γ must be finite (the single-field
/// solver has its own certificates).
pub fn diagnose(p: &Profile, params: &Parameters) -> Result<DiagnosticsReport, DiagnosticsError> {
    let flags = check_box_and_monotone(p);
    let fits = fit_asymptotics(p, params)?;
    let flux = flux_integral(p, params);
    let total = energy(p, params)?.total;
    Ok(DiagnosticsReport {
        in_unit_box: flags.in_unit_box,
        u_monotone_decreasing: flags.u_monotone_decreasing,
        f_monotone_increasing: flags.f_monotone_increasing,
        fits,
        flux_integral: flux,
        bounds: check_bounds_value(total, params),
    })
}

/// Quadrature of β f u² over the grid; equals lim r² f' for γ = 0.
pub fn flux_integral(p: &Profile, params: &Parameters) -> f64 {
    let integrand: Vec<f64> = (0..p.grid().len())
        .map(|i| params.beta * p.f()[i] * p.u()[i] * p.u()[i])
        .collect();
    p.grid().integrate(&integrand).expect("lengths match")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bps::{bps_f, bps_profile};
    use crate::grid::build_grid;
    use std::sync::Arc;

    #[test]
    fn bps_profile_passes_box_and_monotone() {
        let g = Arc::new(build_grid(1e-3, 20.0, 801, 1.005).unwrap());
        let p = bps_profile(1.0, &g);
        let flags = check_box_and_monotone(&p);
        assert!(flags.in_unit_box);
        assert!(flags.u_monotone_decreasing);
        assert!(flags.f_monotone_increasing);
    }

    #[test]
    fn constant_u_is_not_strictly_decreasing() {
        let g = Arc::new(build_grid(1e-3, 20.0, 64, 1.0).unwrap());
        let p = Profile::new(g.clone(), vec![0.5; 64], vec![0.5; 64]).unwrap();
        let flags = check_box_and_monotone(&p);
        assert!(!flags.u_monotone_decreasing);
        assert!(!flags.f_monotone_increasing);
        assert!(flags.in_unit_box);
    }

    #[test]
    fn out_of_box_node_is_flagged() {
        let g = Arc::new(build_grid(1e-3, 20.0, 64, 1.0).unwrap());
        let mut u: Vec<f64> = g.nodes().iter().map(|&r| 1.0 / (1.0 + r)).collect();
        u[5] = 1.01;
        let f: Vec<f64> = g.nodes().iter().map(|&r| r / (1.0 + r)).collect();
        let p = Profile::new(g.clone(), u, f).unwrap();
        assert!(!check_box_and_monotone(&p).in_unit_box);
    }

    #[test]
    fn bps_tail_and_origin_fits_match_closed_form() {
        let g = Arc::new(build_grid(1e-3, 30.0, 4001, 1.002).unwrap());
        let p = bps_profile(1.0, &g);
        let params = Parameters::new(1.0, 2.0, 0.0).unwrap();
        let fits = fit_asymptotics(&p, &params).unwrap();
        // u ~ 2 r e^{-r}: rate within 5% of kappa = 1
        assert!((fits.u_tail_rate - 1.0).abs() < 0.05, "rate {}", fits.u_tail_rate);
        assert!(fits.u_tail_rate <= 1.0, "closed form must not overshoot the predicted rate");
        // r (1 - f) -> 1 and the flux quadrature agrees
        let c = fits.f_tail_coefficient.unwrap();
        assert!((c - 1.0).abs() < 1e-3, "tail coefficient {c}");
        let flux = flux_integral(&p, &params);
        assert!((flux - 1.0).abs() < 1e-3, "flux {flux}");
        assert!((c - flux).abs() / flux < 1e-2);
        // origin: 1 - u ~ r^2/6, f ~ r/3
        assert!((fits.u_origin_power - 2.0).abs() < 0.2, "{}", fits.u_origin_power);
        assert!((fits.f_origin_power - 1.0).abs() < 0.1, "{}", fits.f_origin_power);
        assert!(fits.f_tail_rate.is_none());
    }

    #[test]
    fn tail_fit_converges_with_domain_growth() {
        // fitted rate approaches the predicted 1.0 from below as r_max grows
        let params = Parameters::new(1.0, 2.0, 0.0).unwrap();
        let mut prev_err = f64::INFINITY;
        for &rmax in &[15.0, 30.0, 60.0, 120.0] {
            let g = Arc::new(build_grid(1e-3, rmax, 4001, 1.002).unwrap());
            let p = bps_profile(1.0, &g);
            let fits = fit_asymptotics(&p, &params).unwrap();
            let err = (fits.u_tail_rate - 1.0).abs();
            assert!(err < prev_err + 1e-12, "rate error grew: {err} vs {prev_err}");
            prev_err = err;
        }
        assert!(prev_err < 0.015);
    }

    #[test]
    fn short_window_is_an_error() {
        // origin decade [3 r_min, 30 r_min] holds no nodes on this mesh
        let g = Arc::new(build_grid(1.0, 2.0, 64, 1.0).unwrap());
        let p = bps_profile(1.0, &g);
        let params = Parameters::new(1.0, 2.0, 0.0).unwrap();
        assert!(matches!(
            fit_asymptotics(&p, &params),
            Err(DiagnosticsError::WindowTooShort(_))
        ));
    }

    #[test]
    fn bound_checks_over_the_three_regimes() {
        let p0 = Parameters::new(1.0, 6.0, 0.0).unwrap();
        // interior value
        let v = check_bounds_value(2.4, &p0);
        assert_eq!(v.check, BoundCheck::Inside);
        assert!(!v.partial_coverage);
        // at the lower bound
        let v = check_bounds_value(2.0005, &check(1.0, 2.0, 0.0));
        assert_eq!(v.check, BoundCheck::OnBoundary);
        // violated
        let v = check_bounds_value(1.0, &check(1.0, 2.0, 0.0));
        assert_eq!(v.check, BoundCheck::Violated);
        let v = check_bounds_value(5.0, &check(1.0, 6.0, 0.0));
        assert_eq!(v.check, BoundCheck::Violated);
        // gamma > 0: only the lower bound applies
        let v = check_bounds_value(10.0, &check(1.0, 2.0, 1.0));
        assert_eq!(v.check, BoundCheck::Inside);
        assert!(v.partial_coverage);
        assert!(v.upper_bound.is_none());
        // gamma = inf
        let v = check_bounds_value(3.57, &check(1.0, 2.0, f64::INFINITY));
        assert_eq!(v.check, BoundCheck::Inside);
        assert!((v.upper_bound.unwrap() - 3.8846306).abs() < 1e-6);
    }

    fn check(a: f64, b: f64, g: f64) -> Parameters {
        Parameters::new(a, b, g).unwrap()
    }

    #[test]
    fn gamma_zero_tail_law_at_r15() {
        // closed-form identity r(1 - f) -> 1 within 1e-6 by r = 15
        let v = 15.0 * (1.0 - bps_f(15.0));
        assert!((v - 1.0).abs() < 1e-6);
    }
}
