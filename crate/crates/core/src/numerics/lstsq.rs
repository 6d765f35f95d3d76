//! Column-scaled linear least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solution of `min |A c - y|` with diagnostics.
#[derive(Debug, Clone)]
pub struct LstsqSolution {
    pub coefficients: Vec<f64>,
    pub rms_residual: f64,
    /// Ratio of extreme singular values of the column-normalized matrix.
    pub condition: f64,
}

/// Solves the least-squares problem after scaling every column to unit
/// Euclidean norm. The SVD of the scaled matrix gives both the solution and
/// the condition estimate; a condition above `cond_cap` is reported as a
/// degenerate fit instead of returning a noise-dominated answer.
pub fn solve(rows: &[Vec<f64>], y: &[f64], cond_cap: f64) -> Result<LstsqSolution> {
    let nrows = rows.len();
    if nrows == 0 || nrows != y.len() {
        return Err(Error::invalid("least squares: row count mismatch"));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::invalid("least squares: ragged design matrix"));
    }
    if nrows < ncols {
        return Err(Error::invalid(format!(
            "least squares: {nrows} samples for {ncols} unknowns"
        )));
    }
    let mut a = DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
    if a.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("least squares: non-finite input".into()));
    }
    let mut scale = vec![1.0; ncols];
    for (j, s) in scale.iter_mut().enumerate() {
        let norm = a.column(j).norm();
        if norm == 0.0 {
            return Err(Error::FitDegenerate {
                condition: f64::INFINITY,
                cap: cond_cap,
            });
        }
        *s = norm;
        a.column_mut(j).scale_mut(1.0 / norm);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= cond_cap) {
        return Err(Error::FitDegenerate {
            condition,
            cap: cond_cap,
        });
    }
    let rhs = DVector::from_column_slice(y);
    let sol = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::Numerical(format!("least squares: {e}")))?;
    let resid = &a * &sol - &rhs;
    let rms_residual = (resid.norm_squared() / nrows as f64).sqrt();
    let coefficients = sol.iter().zip(&scale).map(|(c, s)| c / s).collect();
    Ok(LstsqSolution {
        coefficients,
        rms_residual,
        condition: condition.max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_linear_model() {
        let xs: Vec<f64> = (0..10).map(|i| 2f64.powi(i)).collect();
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x, 1.0, 1.0 / x]).collect();
        let y: Vec<f64> = xs.iter().map(|&x| 2.0 * x + 3.0 + 5.0 / x).collect();
        let s = solve(&rows, &y, 1e12).unwrap();
        for (c, e) in s.coefficients.iter().zip([2.0, 3.0, 5.0]) {
            assert!((c - e).abs() < 1e-10, "{c} vs {e}");
        }
        assert!(s.rms_residual < 1e-10);
        assert!(s.condition >= 1.0);
    }

    #[test]
    fn flags_collinear_columns() {
        let rows: Vec<Vec<f64>> = (1..6).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let y = vec![1.0; 5];
        assert!(matches!(
            solve(&rows, &y, 1e10),
            Err(Error::FitDegenerate { .. })
        ));
    }
}
