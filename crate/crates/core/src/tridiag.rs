//! Direct solvers for the (block-)tridiagonal Newton systems.
//!
//! The collocated stationarity equations couple each node only to its
//! neighbors, giving a scalar tridiagonal system for the single-field
//! problem and a 2x2-block tridiagonal system for the (u, f) pair.

/// Thomas algorithm. `diag`, `lower`, `upper` have lengths n, n-1, n-1.
/// Returns `None` if a pivot falls below `pivot_floor` in magnitude.
pub(crate) fn solve_scalar(
    diag: &[f64],
    lower: &[f64],
    upper: &[f64],
    rhs: &[f64],
    pivot_floor: f64,
) -> Option<Vec<f64>> {
    let n = diag.len();
    debug_assert_eq!(lower.len(), n - 1);
    debug_assert_eq!(upper.len(), n - 1);
    debug_assert_eq!(rhs.len(), n);
    let mut c = vec![0.0; n - 1];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv.abs() <= pivot_floor {
        return None;
    }
    c[0] = upper[0] / piv;
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - lower[i - 1] * c[i - 1];
        if piv.abs() <= pivot_floor || !piv.is_finite() {
            return None;
        }
        if i < n - 1 {
            c[i] = upper[i] / piv;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / piv;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Some(x)
}

/// 2x2 block stored row-major: [m00, m01, m10, m11].
pub(crate) type Block = [f64; 4];

fn mat_mul(a: &Block, b: &Block) -> Block {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

fn mat_vec(a: &Block, v: [f64; 2]) -> [f64; 2] {
    [a[0] * v[0] + a[1] * v[1], a[2] * v[0] + a[3] * v[1]]
}

fn inverse(a: &Block, pivot_floor: f64) -> Option<Block> {
    let det = a[0] * a[3] - a[1] * a[2];
    if det.abs() <= pivot_floor || !det.is_finite() {
        return None;
    }
    Some([a[3] / det, -a[1] / det, -a[2] / det, a[0] / det])
}

/// Block Thomas for a 2x2-block tridiagonal system of `n` block rows.
/// `rhs` is interleaved `[x0, y0, x1, y1, ...]` and solved in place
/// semantics-wise (a fresh vector is returned).
pub(crate) fn solve_block2(
    diag: &[Block],
    lower: &[Block],
    upper: &[Block],
    rhs: &[f64],
    pivot_floor: f64,
) -> Option<Vec<f64>> {
    let n = diag.len();
    debug_assert_eq!(lower.len(), n - 1);
    debug_assert_eq!(upper.len(), n - 1);
    debug_assert_eq!(rhs.len(), 2 * n);
    let mut c: Vec<Block> = vec![[0.0; 4]; n - 1];
    let mut d: Vec<[f64; 2]> = vec![[0.0; 2]; n];

    let mut inv = inverse(&diag[0], pivot_floor)?;
    c[0] = mat_mul(&inv, &upper[0]);
    d[0] = mat_vec(&inv, [rhs[0], rhs[1]]);
    for i in 1..n {
        let lc = mat_mul(&lower[i - 1], &c[i - 1]);
        let piv = [
            diag[i][0] - lc[0],
            diag[i][1] - lc[1],
            diag[i][2] - lc[2],
            diag[i][3] - lc[3],
        ];
        inv = inverse(&piv, pivot_floor)?;
        if i < n - 1 {
            c[i] = mat_mul(&inv, &upper[i]);
        }
        let ld = mat_vec(&lower[i - 1], d[i - 1]);
        d[i] = mat_vec(&inv, [rhs[2 * i] - ld[0], rhs[2 * i + 1] - ld[1]]);
    }
    let mut x = vec![0.0; 2 * n];
    x[2 * (n - 1)] = d[n - 1][0];
    x[2 * (n - 1) + 1] = d[n - 1][1];
    for i in (0..n - 1).rev() {
        let cx = mat_vec(&c[i], [x[2 * (i + 1)], x[2 * (i + 1) + 1]]);
        x[2 * i] = d[i][0] - cx[0];
        x[2 * i + 1] = d[i][1] - cx[1];
    }
    Some(x)
}
