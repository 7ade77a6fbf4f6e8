//! Reproducible studies behind the `curvem` binary: the quadrature check, the
//! convergence study on curved meshes, the layered corner-point runs and the
//! invariant self test.
//!
//! Every study takes a [`RunConfig`] and returns a report whose `failures` name
//! the invariants that did not hold. Files are written under `RunConfig::out`.

mod config;
pub mod converge;
pub mod cornerpoint;
pub mod quadcheck;
pub mod selftest;

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::darcy::ProblemSpec;
use crate::mesh::{curved_top_cube, extruded_annulus, AnnulusBase, PolyMesh};
use crate::{Error, Result, Vec3};

pub use config::{GeoSelection, Levels, RunConfig, Subcommand};

/// Amplitude of the curved layers of the curved-top cube.
pub const CURVED_TOP_AMPLITUDE: f64 = 0.1;
/// Inner radius of the half annulus (the outer radius is 1, the height 1).
pub const ANNULUS_INNER: f64 = 0.2;

/// Mesh families of the convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Unit cube with sinusoidal layers, all boundaries essential.
    CurvedTop,
    /// Extruded half annulus on a quadrilateral base, natural on the cylinders.
    AnnulusQuad,
    /// Same on a triangulated base.
    AnnulusTria,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::CurvedTop, Family::AnnulusQuad, Family::AnnulusTria];

    pub fn name(&self) -> &'static str {
        match self {
            Family::CurvedTop => "curved_top",
            Family::AnnulusQuad => "annulus_quad",
            Family::AnnulusTria => "annulus_tria",
        }
    }

    /// Subdivision count of a level: `2^(l+1)` for the cube, `2(l+1)` radial
    /// cells (three times as many angular ones) for the annulus.
    pub fn subdivisions(&self, level: usize) -> usize {
        match self {
            Family::CurvedTop => 1 << (level + 1),
            _ => 2 * (level + 1),
        }
    }

    pub fn mesh(&self, level: usize) -> Result<PolyMesh> {
        let n = self.subdivisions(level);
        match self {
            Family::CurvedTop => curved_top_cube(n, CURVED_TOP_AMPLITUDE),
            Family::AnnulusQuad => extruded_annulus(AnnulusBase::Quad, n, 3 * n, n, ANNULUS_INNER, 1.0),
            Family::AnnulusTria => extruded_annulus(AnnulusBase::Tria, n, 3 * n, n, ANNULUS_INNER, 1.0),
        }
    }

    pub fn problem(&self, k: usize) -> ProblemSpec {
        match self {
            Family::CurvedTop => curved_top_problem(k),
            _ => annulus_problem(k),
        }
    }
}

/// Straight (`noGeo`) or exact (`withGeo`) face charts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GeoMode {
    #[serde(rename = "withGeo")]
    WithGeo,
    #[serde(rename = "noGeo")]
    NoGeo,
}

impl GeoMode {
    pub fn name(&self) -> &'static str {
        match self {
            GeoMode::WithGeo => "withGeo",
            GeoMode::NoGeo => "noGeo",
        }
    }

    /// The mesh to solve on: unchanged, or its flattened twin.
    pub fn apply(&self, mesh: &PolyMesh) -> Result<PolyMesh> {
        match self {
            GeoMode::WithGeo => Ok(mesh.clone()),
            GeoMode::NoGeo => mesh.flattened(),
        }
    }
}

/// `p = (z + a sin(πx) - 1)²`: constant on every layer surface of the curved-top
/// cube, so its gradient is normal to them.
pub fn curved_top_problem(k: usize) -> ProblemSpec {
    let a = CURVED_TOP_AMPLITUDE;
    let s = move |x: &Vec3| x.z + a * (PI * x.x).sin() - 1.0;
    let ds = move |x: &Vec3| Vec3::new(a * PI * (PI * x.x).cos(), 0.0, 1.0);
    ProblemSpec::manufactured(
        k,
        Arc::new(move |x| s(x).powi(2)),
        Arc::new(move |x| 2.0 * s(x) * ds(x)),
        Arc::new(move |x| 2.0 * ds(x).norm_squared() - 2.0 * s(x) * a * PI * PI * (PI * x.x).sin()),
    )
}

/// `p = sin(πx) cos(πy) sin(πz)`.
pub fn annulus_problem(k: usize) -> ProblemSpec {
    let p = |x: &Vec3| (PI * x.x).sin() * (PI * x.y).cos() * (PI * x.z).sin();
    ProblemSpec::manufactured(
        k,
        Arc::new(p),
        Arc::new(|x: &Vec3| {
            let (sx, cx) = (PI * x.x).sin_cos();
            let (sy, cy) = (PI * x.y).sin_cos();
            let (sz, cz) = (PI * x.z).sin_cos();
            PI * Vec3::new(cx * cy * sz, -sx * sy * sz, sx * cy * cz)
        }),
        Arc::new(move |x| -3.0 * PI * PI * p(x)),
    )
}

/// Writes `text` to `dir/name` through a temporary file and a rename.
pub(crate) fn write_atomic(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, text)?;
    fs::rename(&tmp, dir.join(name))?;
    Ok(())
}

/// Formats a float for the tables: scientific with 6 digits, `nan` for missing values.
pub(crate) fn sci(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.6e}")
    }
}

pub(crate) fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curved_top_data_are_consistent() {
        // -Δp against a centred difference of the gradient
        let spec = curved_top_problem(1);
        let ex = spec.exact.as_ref().unwrap();
        let x = Vec3::new(0.3, 0.6, 0.7);
        let e = 1e-5;
        let mut lap = 0.0;
        for c in 0..3 {
            let mut d = Vec3::zeros();
            d[c] = e;
            lap -= ((ex.q)(&(x + d))[c] - (ex.q)(&(x - d))[c]) / (2.0 * e);
        }
        assert!((lap + (spec.source)(&x)).abs() < 1e-6);
        let mut fd = Vec3::zeros();
        for c in 0..3 {
            let mut d = Vec3::zeros();
            d[c] = e;
            fd[c] = ((ex.p)(&(x + d)) - (ex.p)(&(x - d))) / (2.0 * e);
        }
        assert!((fd + (ex.q)(&x)).norm() < 1e-8);
    }

    #[test]
    fn annulus_data_are_consistent() {
        let spec = annulus_problem(2);
        let ex = spec.exact.as_ref().unwrap();
        let x = Vec3::new(-0.4, 0.5, 0.3);
        let e = 1e-5;
        let mut div = 0.0;
        for c in 0..3 {
            let mut d = Vec3::zeros();
            d[c] = e;
            div += ((ex.q)(&(x + d))[c] - (ex.q)(&(x - d))[c]) / (2.0 * e);
        }
        assert!((div - (spec.source)(&x)).abs() < 1e-5);
    }

    #[test]
    fn level_zero_meshes_are_small() {
        for f in Family::ALL {
            let m = f.mesh(0).unwrap();
            assert!(m.n_cells() >= 8, "{}", f.name());
        }
        assert_eq!(Family::CurvedTop.mesh(3).unwrap().n_cells(), 4096);
    }
}
