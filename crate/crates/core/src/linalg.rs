//! Small dense helpers shared by the local element computations.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Solves `a x = b` by partial-pivot LU and checks the relative residual.
pub fn solve_checked(a: &Mat, b: &Mat, rel_tol: f64, what: &str) -> Result<Mat> {
    let lu = a.clone().lu();
    let x = lu
        .solve(b)
        .ok_or_else(|| Error::Singular(format!("{what}: LU breakdown")))?;
    let res = (a * &x - b).norm();
    let scale = a.norm() * x.norm() + b.norm();
    if scale > 0.0 && res > rel_tol * scale {
        return Err(Error::Singular(format!(
            "{what}: relative residual {:.3e}",
            res / scale
        )));
    }
    Ok(x)
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn spd_inverse(a: &Mat, what: &str) -> Result<Mat> {
    let sym = 0.5 * (a + a.transpose());
    sym.cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Singular(format!("{what}: not positive definite")))
}

/// Eigenvalues of the symmetric part of `a`, ascending.
pub fn sym_eigenvalues(a: &Mat) -> Vec<f64> {
    let sym = 0.5 * (a + a.transpose());
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Numerical rank with drop tolerance `rel_tol · σ_max`.
pub fn rank(a: &Mat, rel_tol: f64) -> usize {
    let sv = a.clone().singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Least-squares slope of `log e` against `log h`.
pub fn fitted_slope(h: &[f64], e: &[f64]) -> f64 {
    let n = h.len() as f64;
    let lx: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slope over the last refinement interval.
pub fn last_slope(h: &[f64], e: &[f64]) -> f64 {
    let n = h.len();
    (e[n - 1] / e[n - 2]).ln() / (h[n - 1] / h[n - 2]).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let h = [0.5, 0.25, 0.125, 0.0625];
        let e: Vec<f64> = h.iter().map(|x: &f64| 3.0 * x.powi(3)).collect();
        assert!((fitted_slope(&h, &e) - 3.0).abs() < 1e-12);
        assert!((last_slope(&h, &e) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rank_detects_dependent_columns() {
        let a = Mat::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0]);
        assert_eq!(rank(&a, 1e-12), 2);
    }
}
