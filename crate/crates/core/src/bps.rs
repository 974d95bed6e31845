//! Closed-form BPS solution at the critical point β = 2, γ = 0, the
//! first-order system it satisfies, and the exact constants derived from
//! it. This is the oracle layer every solver result is certified against.
//!
//! ```text
//! u(r) = √α r / sinh(√α r),    f(r) = coth(√α r) − 1/(√α r)
//! ```

use crate::energy::Profile;
use crate::grid::RadialGrid;
use std::f64::consts::PI;
use std::sync::Arc;

/// Below this value of x = √α r the closed forms are evaluated by series;
/// coth(x) − 1/x cancels catastrophically for small x.
const SERIES_SWITCH: f64 = 1e-4;

/// u(x) = x/sinh x with the small-x series 1 − x²/6.
pub(crate) fn bps_u(x: f64) -> f64 {
    if x < SERIES_SWITCH {
        1.0 - x * x / 6.0
    } else {
        x / x.sinh()
    }
}

/// f(x) = coth x − 1/x with the small-x series x/3.
pub(crate) fn bps_f(x: f64) -> f64 {
    if x < SERIES_SWITCH {
        x / 3.0
    } else {
        1.0 / x.tanh() - 1.0 / x
    }
}

/// Samples the closed-form BPS pair on a grid. The formulas depend on r
/// only through √α r, so `bps_profile(4α, r) == bps_profile(α, 2r)`.
pub fn bps_profile(alpha: f64, grid: &Arc<RadialGrid>) -> Profile {
    assert!(alpha > 0.0 && alpha.is_finite(), "alpha must be positive");
    let s = alpha.sqrt();
    let u: Vec<f64> = grid.nodes().iter().map(|&r| bps_u(s * r)).collect();
    let f: Vec<f64> = grid.nodes().iter().map(|&r| bps_f(s * r)).collect();
    Profile::new(grid.clone(), u, f).expect("sampled vectors match the grid")
}

/// Residuals of the first-order BPS system
///
/// ```text
/// r1 = u' + √α f u,    r2 = √α r f' − (1 − u²)/r
/// ```
///
/// with u', f' from the grid stencil.
pub fn bps_residual(p: &Profile, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let s = alpha.sqrt();
    let up = p.grid().derivative(p.u()).expect("profile matches grid");
    let fp = p.grid().derivative(p.f()).expect("profile matches grid");
    let r = p.grid().nodes();
    let r1 = (0..r.len()).map(|i| up[i] + s * p.f()[i] * p.u()[i]).collect();
    let r2 = (0..r.len())
        .map(|i| s * r[i] * fp[i] - (1.0 - p.u()[i] * p.u()[i]) / r[i])
        .collect();
    (r1, r2)
}

/// The BPS energy 2√α.
pub fn bps_energy(alpha: f64) -> f64 {
    2.0 * alpha.sqrt()
}

/// Exact constants carried by the α-parametrized BPS solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpsConstants {
    /// Total energy 2√α.
    pub energy: f64,
    /// ∫ f² u² dr = (π²/6 − 1)/(3√α).
    pub cross_term: f64,
    /// lim r² f' = ∫ β f u² dr with β = 2, α = 1; equals 1 in rescaled form.
    pub flux: f64,
}

pub fn bps_constants(alpha: f64) -> BpsConstants {
    BpsConstants {
        energy: bps_energy(alpha),
        cross_term: (PI * PI / 6.0 - 1.0) / (3.0 * alpha.sqrt()),
        flux: 1.0,
    }
}

/// Energy of the BPS pair inserted in the γ = 0 functional at coupling β:
/// (√α/3)(8 − π²/3 + [π²/6 − 1]β). An upper bound for the non-BPS minimum,
/// exact at β = 2.
pub fn nonbps_upper_bound(alpha: f64, beta: f64) -> f64 {
    alpha.sqrt() / 3.0 * (8.0 - PI * PI / 3.0 + (PI * PI / 6.0 - 1.0) * beta)
}

/// γ = 0 lower bound min{√(2αβ), 2√α} from the two Bogomol'nyi branches.
pub fn energy_lower_bound(alpha: f64, beta: f64) -> f64 {
    (2.0 * alpha * beta).sqrt().min(2.0 * alpha.sqrt())
}
