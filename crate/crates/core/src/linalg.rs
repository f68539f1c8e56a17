use nalgebra::{DMatrix, DVector};

/// Solves the normal equations `a x = b` for a symmetric positive
/// definite `a`. Returns `None` when `a` is singular or numerically rank
/// deficient (relative pivot below 1e-12).
pub(crate) fn solve_normal(a: DMatrix<f64>, b: DVector<f64>) -> Option<DVector<f64>> {
    let scale = a.diagonal().amax();
    if !(scale > 0.0) {
        return None;
    }
    let chol = a.cholesky()?;
    let min_pivot = chol
        .l_dirty()
        .diagonal()
        .iter()
        .fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if min_pivot * min_pivot <= scale * 1e-12 {
        return None;
    }
    let x = chol.solve(&b);
    x.iter().all(|v| v.is_finite()).then_some(x)
}
