//! Graded radial meshes on a truncated domain `[r_min, r_max]`, with
//! trapezoid quadrature weights and finite-difference stencils.
//!
//! The grading is geometric toward `r_min`: profiles vary fastest near the
//! singular inner end (power-law behavior), while the outer region only
//! carries slowly decaying tails. Trapezoid weights are used because their
//! positivity keeps the discrete energy coercive.

use thiserror::Error;

/// Minimum admissible node count.
pub const MIN_NODES: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("invalid radial bounds: require 0 < r_min < r_max, got [{0}, {1}]")]
    InvalidBounds(f64, f64),
    #[error("too few nodes: {0} < {MIN_NODES}")]
    TooFewNodes(usize),
    #[error("grading ratio must be >= 1, got {0}")]
    InvalidRatio(f64),
    #[error("sample length {got} does not match grid size {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("nodes must be strictly increasing and positive")]
    NotIncreasing,
}

/// A strictly increasing radial mesh with quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    grading: f64,
}

/// Builds a geometrically graded mesh: consecutive gaps grow by `ratio`,
/// so the first gap times `ratio^(n-2)` equals the last gap. `ratio = 1`
/// gives a uniform mesh.
pub fn build_grid(r_min: f64, r_max: f64, n_nodes: usize, ratio: f64) -> Result<RadialGrid, GridError> {
    if !(r_min > 0.0 && r_max > r_min && r_min.is_finite() && r_max.is_finite()) {
        return Err(GridError::InvalidBounds(r_min, r_max));
    }
    if n_nodes < MIN_NODES {
        return Err(GridError::TooFewNodes(n_nodes));
    }
    if !(ratio >= 1.0) || !ratio.is_finite() {
        return Err(GridError::InvalidRatio(ratio));
    }

    let span = r_max - r_min;
    let mut nodes = Vec::with_capacity(n_nodes);
    if ratio == 1.0 {
        let h = span / (n_nodes - 1) as f64;
        for i in 0..n_nodes {
            nodes.push(r_min + i as f64 * h);
        }
    } else {
        // first gap from the geometric series sum h0 (q^(n-1) - 1)/(q - 1) = span
        let q_pow = ratio.powi(n_nodes as i32 - 1);
        let h0 = span * (ratio - 1.0) / (q_pow - 1.0);
        let mut gap = h0;
        let mut r = r_min;
        nodes.push(r);
        for _ in 1..n_nodes {
            r += gap;
            gap *= ratio;
            nodes.push(r);
        }
    }
    // snap the endpoint so the weight sum telescopes to exactly r_max - r_min
    *nodes.last_mut().unwrap() = r_max;

    RadialGrid::from_nodes_with_grading(nodes, ratio)
}

impl RadialGrid {
    /// Wraps an explicit node set (e.g. read back from a profile file).
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self, GridError> {
        Self::from_nodes_with_grading(nodes, 1.0)
    }

    fn from_nodes_with_grading(nodes: Vec<f64>, grading: f64) -> Result<Self, GridError> {
        if nodes.len() < MIN_NODES {
            return Err(GridError::TooFewNodes(nodes.len()));
        }
        if nodes[0] <= 0.0 || nodes.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(GridError::NotIncreasing);
        }
        let n = nodes.len();
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let half = 0.5 * (nodes[i + 1] - nodes[i]);
            weights[i] += half;
            weights[i + 1] += half;
        }
        Ok(RadialGrid { nodes, weights, grading })
    }

    /// Sub-mesh dropping every node below index `start`; used by the
    /// inner-cutoff continuation.
    pub(crate) fn tail_from(&self, start: usize) -> RadialGrid {
        RadialGrid::from_nodes_with_grading(self.nodes[start..].to_vec(), self.grading)
            .expect("tail of a valid grid is valid")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Geometric gap ratio the mesh was built with (1 for uniform or imported).
    pub fn grading(&self) -> f64 {
        self.grading
    }

    /// Trapezoid quadrature of nodal samples over `[r_min, r_max]`.
    pub fn integrate(&self, samples: &[f64]) -> Result<f64, GridError> {
        self.check_len(samples)?;
        Ok(self
            .weights
            .iter()
            .zip(samples)
            .map(|(w, s)| w * s)
            .sum())
    }

    /// Second-order first derivative on the non-uniform mesh: 3-point
    /// centered stencil at interior nodes, one-sided 3-point at the ends.
    pub fn derivative(&self, samples: &[f64]) -> Result<Vec<f64>, GridError> {
        self.check_len(samples)?;
        let r = &self.nodes;
        let s = samples;
        let n = r.len();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let a = r[i] - r[i - 1];
            let b = r[i + 1] - r[i];
            d[i] = -b / (a * (a + b)) * s[i - 1] + (b - a) / (a * b) * s[i]
                + a / (b * (a + b)) * s[i + 1];
        }
        {
            let a = r[1] - r[0];
            let b = r[2] - r[1];
            d[0] = -(2.0 * a + b) / (a * (a + b)) * s[0] + (a + b) / (a * b) * s[1]
                - a / (b * (a + b)) * s[2];
        }
        {
            let a = r[n - 2] - r[n - 3];
            let b = r[n - 1] - r[n - 2];
            d[n - 1] = b / (a * (a + b)) * s[n - 3] - (a + b) / (a * b) * s[n - 2]
                + (2.0 * b + a) / (b * (a + b)) * s[n - 1];
        }
        Ok(d)
    }

    /// 3-point second derivative at interior nodes (endpoints zeroed);
    /// exact for quadratics on any mesh.
    pub fn second_derivative(&self, samples: &[f64]) -> Result<Vec<f64>, GridError> {
        self.check_len(samples)?;
        let r = &self.nodes;
        let s = samples;
        let n = r.len();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let a = r[i] - r[i - 1];
            let b = r[i + 1] - r[i];
            d[i] = 2.0 * (s[i - 1] / (a * (a + b)) - s[i] / (a * b) + s[i + 1] / (b * (a + b)));
        }
        Ok(d)
    }

    fn check_len(&self, samples: &[f64]) -> Result<(), GridError> {
        if samples.len() != self.nodes.len() {
            return Err(GridError::LengthMismatch { got: samples.len(), expected: self.nodes.len() });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(build_grid(2.0, 1.0, 64, 1.0), Err(GridError::InvalidBounds(..))));
        assert!(matches!(build_grid(0.0, 1.0, 64, 1.0), Err(GridError::InvalidBounds(..))));
        assert!(matches!(build_grid(1e-3, 20.0, 8, 1.0), Err(GridError::TooFewNodes(8))));
        assert!(matches!(build_grid(1e-3, 20.0, 64, 0.9), Err(GridError::InvalidRatio(_))));
    }

    #[test]
    fn uniform_grid_matches_linspace() {
        let g = build_grid(1e-3, 20.0, 16, 1.0).unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g.r_min(), 1e-3);
        assert_eq!(g.r_max(), 20.0);
        let h = (20.0 - 1e-3) / 15.0;
        for (i, &r) in g.nodes().iter().enumerate() {
            assert!((r - (1e-3 + i as f64 * h)).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_sum_to_span() {
        for &(n, q) in &[(16usize, 1.0), (4001, 1.002), (513, 1.01)] {
            let g = build_grid(1e-3, 20.0, n, q).unwrap();
            let sum: f64 = g.weights().iter().sum();
            let span = 20.0 - 1e-3;
            assert!(
                ((sum - span) / span).abs() < 1e-12,
                "n={n} q={q}: weight sum {sum} != {span}"
            );
            assert!(g.weights().iter().all(|&w| w >= 0.0));
        }
    }

    #[test]
    fn gap_growth_matches_ratio() {
        let g = build_grid(1e-3, 20.0, 101, 1.05).unwrap();
        let r = g.nodes();
        let first = r[1] - r[0];
        let last = r[100] - r[99];
        // first gap * ratio^(n-2) = last gap
        let expect = first * 1.05f64.powi(99);
        assert!(((last - expect) / expect).abs() < 1e-9);
    }

    #[test]
    fn quadrature_exact_for_affine() {
        let g = build_grid(1e-3, 20.0, 4001, 1.002).unwrap();
        // g(r) = r: antiderivative oracle (r_max^2 - r_min^2)/2
        let exact = (20.0f64.powi(2) - 1e-3f64.powi(2)) / 2.0;
        let got = g.integrate(g.nodes()).unwrap();
        assert!(((got - exact) / exact).abs() < 1e-10);
        // constant
        let ones = vec![1.0; g.len()];
        let got = g.integrate(&ones).unwrap();
        assert!(((got - (20.0 - 1e-3)) / 20.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_refines_quadratically() {
        // smooth integrand exp(-r) over [0.5, 8]
        let exact = (-0.5f64).exp() - (-8.0f64).exp();
        let mut errs = Vec::new();
        for &n in &[65usize, 129, 257, 513] {
            let g = build_grid(0.5, 8.0, n, 1.0).unwrap();
            let s: Vec<f64> = g.nodes().iter().map(|&r| (-r).exp()).collect();
            errs.push((g.integrate(&s).unwrap() - exact).abs());
        }
        for w in errs.windows(2) {
            assert!(w[1] < w[0] / 3.5, "quadrature not ~O(h^2): {errs:?}");
        }
    }

    #[test]
    fn derivative_stencil_trivial_cases() {
        let g = build_grid(1e-3, 20.0, 201, 1.02).unwrap();
        let c = vec![3.25; g.len()];
        assert!(g.derivative(&c).unwrap().iter().all(|&d| d.abs() < 1e-12));
        let d = g.derivative(g.nodes()).unwrap();
        assert!(d.iter().all(|&v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn derivative_exact_for_quadratic_on_uniform() {
        let g = build_grid(1e-3, 20.0, 257, 1.0).unwrap();
        let s: Vec<f64> = g.nodes().iter().map(|&r| r * r).collect();
        let d = g.derivative(&s).unwrap();
        for (i, &r) in g.nodes().iter().enumerate().skip(1).take(g.len() - 2) {
            assert!(
                ((d[i] - 2.0 * r) / (2.0 * r)).abs() < 1e-8,
                "d(r^2)/dr at r={r}: {}",
                d[i]
            );
        }
        let dd = g.second_derivative(&s).unwrap();
        for v in &dd[1..g.len() - 1] {
            assert!((v - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn length_mismatch_is_reported() {
        let g = build_grid(1e-3, 20.0, 64, 1.0).unwrap();
        let short = vec![0.0; 63];
        assert!(matches!(g.integrate(&short), Err(GridError::LengthMismatch { .. })));
        assert!(matches!(g.derivative(&short), Err(GridError::LengthMismatch { .. })));
    }
}
