//! Least-squares helpers shared by the regression solvers.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Condition estimate above which the ridge term is switched on.
pub const RIDGE_TRIGGER: f64 = 1e12;
/// Ridge strength relative to the largest singular value.
pub const RIDGE_SCALE: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LsDiagnostics {
    pub rows: usize,
    pub cols: usize,
    pub condition: f64,
    pub ridge: f64,
    pub ill_conditioned: bool,
}

#[derive(Debug, Clone)]
pub struct LsSolution {
    pub x: DVector<f64>,
    /// `‖Ax − y‖₂` of the returned solution.
    pub residual: f64,
    pub diagnostics: LsDiagnostics,
}

/// Solve `min ‖Rx − z‖` for a small square `R` through its SVD, adding a ridge
/// term when the problem is badly conditioned.
fn solve_small(r: &DMatrix<f64>, z: &DVector<f64>) -> (DVector<f64>, f64, f64) {
    let n = r.ncols();
    if n == 0 {
        return (DVector::zeros(0), 1.0, 0.0);
    }
    let svd = r.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let ridge = if condition > RIDGE_TRIGGER { RIDGE_SCALE * smax } else { 0.0 };
    let utz = u.transpose() * z;
    let mut x = DVector::zeros(n);
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s <= f64::EPSILON * smax.max(f64::MIN_POSITIVE) && ridge == 0.0 {
            continue;
        }
        let gain = s / (s * s + ridge * ridge);
        if !gain.is_finite() {
            continue;
        }
        x += vt.row(i).transpose() * (gain * utz[i]);
    }
    (x, condition, ridge)
}

/// Ridge-safeguarded least squares on a dense design.
pub fn lstsq(a: &DMatrix<f64>, y: &DVector<f64>) -> LsSolution {
    let mut acc = LsAccumulator::new(a.ncols());
    acc.push(a, y);
    acc.solve()
}

/// Streaming least squares: rows arrive in blocks and are folded into an
/// upper-triangular factor of the augmented matrix `[A | y]`.
#[derive(Debug, Clone)]
pub struct LsAccumulator {
    n: usize,
    r: DMatrix<f64>,
    rows: usize,
}

impl LsAccumulator {
    pub fn new(n: usize) -> Self {
        Self { n, r: DMatrix::zeros(0, n + 1), rows: 0 }
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn push(&mut self, a: &DMatrix<f64>, y: &DVector<f64>) {
        assert_eq!(a.ncols(), self.n, "design width mismatch");
        assert_eq!(a.nrows(), y.len(), "design height mismatch");
        if a.nrows() == 0 {
            return;
        }
        let top = self.r.nrows();
        let mut stacked = DMatrix::zeros(top + a.nrows(), self.n + 1);
        stacked.view_mut((0, 0), (top, self.n + 1)).copy_from(&self.r);
        stacked.view_mut((top, 0), (a.nrows(), self.n)).copy_from(a);
        stacked.view_mut((top, self.n), (a.nrows(), 1)).copy_from(y);
        let r = stacked.qr().r();
        self.r = r;
        self.rows += a.nrows();
    }

    /// Push rows given as a flat row-major slice of width `n + 1` (target last).
    pub fn push_rows(&mut self, flat: &[f64]) {
        let w = self.n + 1;
        assert_eq!(flat.len() % w, 0, "row buffer not a multiple of width");
        let m = flat.len() / w;
        if m == 0 {
            return;
        }
        let block = DMatrix::from_row_slice(m, w, flat);
        let a = block.columns(0, self.n).into_owned();
        let y = block.column(self.n).into_owned();
        self.push(&a, &y);
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Residual norm of the zero solution, `‖y‖₂`.
    pub fn target_norm(&self) -> f64 {
        self.r.column(self.n).norm()
    }

    pub fn solve(&self) -> LsSolution {
        let n = self.n;
        let k = self.r.nrows();
        let mut r = DMatrix::zeros(n, n);
        let mut z = DVector::zeros(n);
        let used = k.min(n);
        if used > 0 {
            r.view_mut((0, 0), (used, n)).copy_from(&self.r.view((0, 0), (used, n)));
            z.rows_mut(0, used).copy_from(&self.r.view((0, n), (used, 1)));
        }
        let tail: f64 = if k > n { self.r[(n, n)].powi(2) } else { 0.0 };
        let (x, condition, ridge) = solve_small(&r, &z);
        let fit = (&r * &x - &z).norm_squared();
        LsSolution {
            residual: (fit + tail).sqrt(),
            diagnostics: LsDiagnostics {
                rows: self.rows,
                cols: n,
                condition,
                ridge,
                ill_conditioned: condition > RIDGE_TRIGGER,
            },
            x,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consistent_system_recovered() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let y = DVector::from_vec(vec![1.0, 3.0, 5.0, 7.0]);
        let s = lstsq(&a, &y);
        assert!((s.x[0] - 1.0).abs() < 1e-12);
        assert!((s.x[1] - 2.0).abs() < 1e-12);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn blocked_matches_single_pass() {
        let a = DMatrix::from_fn(30, 3, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let y = DVector::from_fn(30, |i, _| (i % 5) as f64);
        let whole = lstsq(&a, &y);
        let mut acc = LsAccumulator::new(3);
        for b in 0..3 {
            acc.push(&a.rows(b * 10, 10).into_owned(), &y.rows(b * 10, 10).into_owned());
        }
        let split = acc.solve();
        assert!((whole.x.clone() - split.x).norm() < 1e-10);
        assert!((whole.residual - split.residual).abs() < 1e-10);
        let direct = (&a * &whole.x - &y).norm();
        assert!((direct - whole.residual).abs() < 1e-10);
    }

    #[test]
    fn duplicate_columns_get_min_norm_split() {
        let a = DMatrix::from_fn(5, 2, |i, _| i as f64 + 1.0);
        let y = DVector::from_fn(5, |i, _| 2.0 * (i as f64 + 1.0));
        let s = lstsq(&a, &y);
        assert!(s.residual < 1e-9);
        assert!((s.x[0] - s.x[1]).abs() < 1e-9);
        assert!(s.diagnostics.ill_conditioned);
    }
}
