//! Accuracy of the divergence-theorem volume rule on the half annulus, and NNLS
//! compression of a curved-cell rule.

use std::f64::consts::PI;

use super::{sci, write_atomic, RunConfig, ANNULUS_INNER};
use crate::mesh::{curved_top_cube, extruded_annulus, AnnulusBase, PolyMesh};
use crate::quadrature::nnls::{compress_rule, moment_residual};
use crate::quadrature::{volume_rule_with, FaceRuleOptions, Provenance, VolumeRuleOptions};
use crate::{Result, Vec3};

/// Extra Gauss points on each arc edge so that the cell geometry itself is
/// integrated to rounding; the error left is that of the integrand.
pub const ARC_EXTRA_POINTS: usize = 6;

/// The two test meshes: `(name, radial, angular)` cells, one layer.
pub const ANNULUS_MESHES: [(&str, usize, usize); 2] = [("cyli1", 3, 6), ("cyli2", 4, 8)];

/// `∫ (√(x²+y²) + z)` over the half annulus `0.2 ≤ r ≤ 1, y ≥ 0, 0 ≤ z ≤ 1`.
pub fn annulus_integral() -> f64 {
    let r0 = ANNULUS_INNER;
    PI * ((1.0 - r0.powi(3)) / 3.0 + 0.25 * (1.0 - r0 * r0))
}

pub fn annulus_volume() -> f64 {
    0.5 * PI * (1.0 - ANNULUS_INNER * ANNULUS_INNER)
}

/// Rule options for `g` Gauss points per direction: tensor rules on unit-square
/// charts, `g`-point line and segment rules, exact degree `2g - 1`.
pub fn gauss_options(g: usize) -> (VolumeRuleOptions, usize) {
    let opts = VolumeRuleOptions {
        face: FaceRuleOptions {
            tensor_points: Some(g),
            curved_edge_points: Some(g + ARC_EXTRA_POINTS),
            line_points: Some(g),
        },
        segment_points: Some(g),
        ..Default::default()
    };
    (opts, 2 * g - 1)
}

pub fn annulus_mesh(radial: usize, angular: usize) -> Result<PolyMesh> {
    extruded_annulus(AnnulusBase::Quad, radial, angular, 1, ANNULUS_INNER, 1.0)
}

/// Sum over the cells of the `g`-point rule applied to `f`.
pub fn integrate(mesh: &PolyMesh, g: usize, f: impl Fn(&Vec3) -> f64) -> Result<f64> {
    let (opts, degree) = gauss_options(g);
    let mut s = 0.0;
    for c in 0..mesh.n_cells() {
        s += volume_rule_with(mesh, c, degree, &opts)?.integrate(&f);
    }
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct QuadRow {
    pub gauss_degree: usize,
    pub mesh: String,
    pub relative_error: f64,
    /// Relative error of `∫ 1`.
    pub volume_error: f64,
}

#[derive(Debug, Clone)]
pub struct CompressionRow {
    pub raw_points: usize,
    pub compressed_points: usize,
    pub min_weight: f64,
    pub moment_residual: f64,
    pub compressed: bool,
}

/// Degree-2 rule of the one-cell curved-top cube: 4×4 tensor rules on all six
/// faces, two-point segments, zero-weight points kept.
pub fn compression_demo() -> Result<CompressionRow> {
    let mesh = curved_top_cube(1, super::CURVED_TOP_AMPLITUDE)?;
    let opts = VolumeRuleOptions {
        face: FaceRuleOptions {
            tensor_points: Some(4),
            ..Default::default()
        },
        segment_points: Some(2),
        keep_zero_weights: true,
        ..Default::default()
    };
    let degree = 2;
    let raw = volume_rule_with(&mesh, 0, degree, &opts)?;
    let cell = &mesh.cells[0];
    let comp = compress_rule(&raw, degree, cell.barycenter, cell.diameter);
    Ok(CompressionRow {
        raw_points: raw.len(),
        compressed_points: comp.len(),
        min_weight: comp.weights.iter().copied().fold(f64::INFINITY, f64::min),
        moment_residual: moment_residual(&raw, &comp, degree, cell.barycenter, cell.diameter),
        compressed: comp.provenance == Provenance::Compressed,
    })
}

#[derive(Debug, Clone)]
pub struct QuadReport {
    pub rows: Vec<QuadRow>,
    pub compression: CompressionRow,
    pub failures: Vec<String>,
}

pub fn run(cfg: &RunConfig) -> Result<QuadReport> {
    let exact = annulus_integral();
    let vol = annulus_volume();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (name, nr, nt) in ANNULUS_MESHES {
        let mesh = annulus_mesh(nr, nt)?;
        let mut prev = f64::INFINITY;
        for &g in &cfg.gauss_degrees {
            let s = integrate(&mesh, g, |x| (x.x * x.x + x.y * x.y).sqrt() + x.z)?;
            let one = integrate(&mesh, g, |_| 1.0)?;
            let row = QuadRow {
                gauss_degree: g,
                mesh: name.to_string(),
                relative_error: ((s - exact) / exact).abs(),
                volume_error: ((one - vol) / vol).abs(),
            };
            if row.relative_error >= prev {
                failures.push(format!("quadrature error not decreasing on {name} at {g} points"));
            }
            if row.volume_error > 1e-13 {
                failures.push(format!("constant integrand not exact on {name} at {g} points"));
            }
            prev = row.relative_error;
            rows.push(row);
        }
    }
    let compression = compression_demo()?;
    if !compression.compressed
        || compression.compressed_points > crate::poly::dim3(2)
        || compression.min_weight <= 0.0
        || compression.moment_residual > 1e-12
    {
        failures.push("compressed rule is not a positive rule with matching moments".into());
    }

    let mut csv = String::from("gauss_degree,mesh,relative_error,volume_error\n");
    for r in &rows {
        csv += &format!("{},{},{},{}\n", r.gauss_degree, r.mesh, sci(r.relative_error), sci(r.volume_error));
    }
    write_atomic(&cfg.out, "quadcheck.csv", &csv)?;
    let c = &compression;
    write_atomic(
        &cfg.out,
        "compression.csv",
        &format!(
            "raw_points,compressed_points,min_weight,moment_residual\n{},{},{},{}\n",
            c.raw_points,
            c.compressed_points,
            sci(c.min_weight),
            sci(c.moment_residual)
        ),
    )?;
    Ok(QuadReport {
        rows,
        compression,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    #[test]
    fn closed_form_matches_polar_quadrature() {
        // ∫_0^π ∫_0.2^1 ∫_0^1 (r + z) r dz dr dθ with a 1D rule in r
        let g = GaussLegendre::new(6);
        let v = PI * g.integrate(ANNULUS_INNER, 1.0, |r| (r + 0.5) * r);
        assert!((v - annulus_integral()).abs() < 1e-14);
        assert!((annulus_integral() - PI * (0.992 / 3.0 + 0.24)).abs() < 1e-15);
    }

    #[test]
    fn demo_counts() {
        let c = compression_demo().unwrap();
        assert_eq!(c.raw_points, 6 * 16 * 2);
        assert_eq!(c.compressed_points, 10);
        assert!(c.min_weight > 0.0 && c.moment_residual <= 1e-12);
    }
}
