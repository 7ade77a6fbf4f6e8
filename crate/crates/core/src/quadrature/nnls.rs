//! Non-negative least squares and quadrature compression.

use log::warn;

use crate::linalg::{Mat, Vector};
use crate::poly::ScaledBasis3;
use crate::quadrature::volume::{Provenance, VolumeRule};
use crate::Vec3;

#[derive(Debug, Clone)]
pub struct NnlsOutcome {
    pub x: Vector,
    pub converged: bool,
    pub iterations: usize,
}

/// Least squares restricted to the columns in `set`.
fn restricted_lstsq(a: &Mat, b: &Vector, set: &[usize]) -> Vector {
    let sub = Mat::from_fn(a.nrows(), set.len(), |i, j| a[(i, set[j])]);
    let svd = sub.svd(true, true);
    let tol = 1e-14 * svd.singular_values.max();
    svd.solve(b, tol).unwrap_or_else(|_| Vector::zeros(set.len()))
}

/// Lawson–Hanson active-set method for `min ‖A x - b‖₂, x ≥ 0`.
pub fn nnls(a: &Mat, b: &Vector, max_iter: usize) -> NnlsOutcome {
    let n = a.ncols();
    let mut x = Vector::zeros(n);
    let mut passive = vec![false; n];
    let anorm = a.abs().max();
    let tol = f64::EPSILON * anorm * b.norm().max(1.0);
    let mut iterations = 0;
    loop {
        let w = a.transpose() * (b - a * &x);
        let cand = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(t) = cand else { break };
        if w[t] <= tol {
            break;
        }
        passive[t] = true;
        loop {
            iterations += 1;
            if iterations > max_iter {
                return NnlsOutcome {
                    x,
                    converged: false,
                    iterations,
                };
            }
            let set: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let s = restricted_lstsq(a, b, &set);
            if s.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (k, &j) in set.iter().enumerate() {
                    x[j] = s[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &j) in set.iter().enumerate() {
                if s[k] <= 0.0 {
                    let d = x[j] - s[k];
                    if d > 0.0 {
                        alpha = alpha.min(x[j] / d);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (k, &j) in set.iter().enumerate() {
                x[j] += alpha * (s[k] - x[j]);
            }
            for (k, &j) in set.iter().enumerate() {
                if x[j] <= 0.0 || (s[k] <= 0.0 && x[j] <= f64::EPSILON * anorm) {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    NnlsOutcome {
        x,
        converged: true,
        iterations,
    }
}

/// Scaled-monomial Vandermonde of a rule: rows are monomials, columns points.
pub fn vandermonde(points: &[Vec3], degree: usize, center: Vec3, h: f64) -> Mat {
    let basis = ScaledBasis3::new(center, h, degree);
    let mut v = Mat::zeros(basis.len(), points.len());
    let mut buf = vec![0.0; basis.len()];
    for (j, p) in points.iter().enumerate() {
        basis.eval_into(p, &mut buf);
        for (i, &b) in buf.iter().enumerate() {
            v[(i, j)] = b;
        }
    }
    v
}

/// Compresses a raw rule to at most `π_d` positive-weight points with the same
/// degree-`d` moments. Returns the raw rule when the check fails.
pub fn compress_rule(rule: &VolumeRule, degree: usize, center: Vec3, h: f64) -> VolumeRule {
    let v = vandermonde(&rule.points, degree, center, h);
    let w = Vector::from_column_slice(&rule.weights);
    let b = &v * &w;
    let out = nnls(&v, &b, 10 * rule.len().max(1));
    let keep: Vec<usize> = (0..rule.len()).filter(|&j| out.x[j] > 0.0).collect();
    let resid = (&v * &out.x - &b).norm();
    if !out.converged || keep.len() > v.nrows() || resid > 1e-12 * b.norm() {
        warn!(
            "compression fell back to the raw rule (converged {}, support {}, residual {:.3e})",
            out.converged,
            keep.len(),
            resid / b.norm()
        );
        return rule.clone();
    }
    VolumeRule {
        points: keep.iter().map(|&j| rule.points[j]).collect(),
        weights: keep.iter().map(|&j| out.x[j]).collect(),
        degree,
        provenance: Provenance::Compressed,
    }
}

/// `‖V w_c - b‖ / ‖b‖` of a candidate rule against the moments of a reference rule.
pub fn moment_residual(reference: &VolumeRule, rule: &VolumeRule, degree: usize, center: Vec3, h: f64) -> f64 {
    let vr = vandermonde(&reference.points, degree, center, h);
    let b = vr * Vector::from_column_slice(&reference.weights);
    let vc = vandermonde(&rule.points, degree, center, h);
    (vc * Vector::from_column_slice(&rule.weights) - &b).norm() / b.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{curved_top_cube, unit_cube_grid};
    use crate::poly::dim3;
    use crate::quadrature::volume_rule_raw;

    #[test]
    fn nnls_small_known_problem() {
        // min ‖A x - b‖, x ≥ 0 with unconstrained optimum having a negative entry
        let a = Mat::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = Vector::from_column_slice(&[1.0, -1.0, 0.0]);
        let out = nnls(&a, &b, 100);
        assert!(out.converged);
        // with x2 = 0: minimize (x1-1)² + x1² → x1 = 1/2
        assert!((out.x[0] - 0.5).abs() < 1e-14 && out.x[1] == 0.0);
    }

    #[test]
    fn degree_zero_gives_one_point_with_the_volume() {
        let m = curved_top_cube(1, 0.1).unwrap();
        let raw = volume_rule_raw(&m, 0, 0).unwrap();
        let c = &m.cells[0];
        let r = compress_rule(&raw, 0, c.barycenter, c.diameter);
        assert_eq!(r.len(), 1);
        assert_eq!(r.provenance, Provenance::Compressed);
        assert!((r.weights[0] - raw.integrate(|_| 1.0)).abs() < 1e-13);
    }

    #[test]
    fn compressed_rule_keeps_moments() {
        let m = curved_top_cube(2, 0.1).unwrap();
        for cell in [0, 5, 7] {
            let c = &m.cells[cell];
            let raw = volume_rule_raw(&m, cell, 3).unwrap();
            let r = compress_rule(&raw, 3, c.barycenter, c.diameter);
            assert_eq!(r.provenance, Provenance::Compressed);
            assert!(r.len() <= dim3(3));
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!(moment_residual(&raw, &r, 3, c.barycenter, c.diameter) <= 1e-12);
        }
    }

    #[test]
    fn cube_compression_at_degree_two() {
        let m = unit_cube_grid(1).unwrap();
        let c = &m.cells[0];
        let raw = volume_rule_raw(&m, 0, 2).unwrap();
        let r = compress_rule(&raw, 2, c.barycenter, c.diameter);
        assert!(r.len() <= 10);
    }

    #[test]
    fn curved_cell_compresses_at_degree_six() {
        let m = curved_top_cube(2, 0.1).unwrap();
        let c = &m.cells[7];
        let raw = volume_rule_raw(&m, 7, 6).unwrap();
        let r = compress_rule(&raw, 6, c.barycenter, c.diameter);
        assert_eq!(r.provenance, Provenance::Compressed);
        assert!(r.len() <= dim3(6));
        assert!(moment_residual(&raw, &r, 6, c.barycenter, c.diameter) < 1e-12);
    }
}
