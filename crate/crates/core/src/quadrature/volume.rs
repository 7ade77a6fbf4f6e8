//! Volume rules from the divergence theorem.
//!
//! With `F = (0, 0, ∫_{z0}^{z} f dt)` we have `div F = f`, hence
//! `∫_P f = Σ_F ∫_F n_z(x) ∫_{z0}^{z} f(x, y, t) dt dF`. The outer integral uses the
//! face rules, the inner one a Gauss rule on the segment `[z0, z_i]`.

use crate::mesh::PolyMesh;
use crate::quadrature::face::{face_rule_with, FaceRuleOptions};
use crate::quadrature::gauss::{points_for_degree, GaussLegendre};
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Raw,
    Compressed,
}

/// A flattened list of points and weights over one cell.
#[derive(Debug, Clone)]
pub struct VolumeRule {
    pub points: Vec<Vec3>,
    pub weights: Vec<f64>,
    pub degree: usize,
    pub provenance: Provenance,
}

impl VolumeRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&Vec3) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }
}

/// Overrides for [`volume_rule_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct VolumeRuleOptions {
    pub face: FaceRuleOptions,
    /// Points of the segment rule; default `⌈(d+2)/2⌉`.
    pub segment_points: Option<usize>,
    /// Keep points whose weight vanishes (faces with `n_z = 0`).
    pub keep_zero_weights: bool,
    /// Base height of the segments; default the barycenter height.
    pub z0: Option<f64>,
}

/// Raw rule of degree `degree` with default options.
pub fn volume_rule_raw(mesh: &PolyMesh, cell: usize, degree: usize) -> Result<VolumeRule> {
    volume_rule_with(mesh, cell, degree, &VolumeRuleOptions::default())
}

/// Raw rule, compressed when `compress` is set (falling back to the raw rule).
pub fn volume_rule(mesh: &PolyMesh, cell: usize, degree: usize, compress: bool) -> Result<VolumeRule> {
    let raw = volume_rule_raw(mesh, cell, degree)?;
    if !compress {
        return Ok(raw);
    }
    let c = &mesh.cells[cell];
    Ok(crate::quadrature::nnls::compress_rule(&raw, degree, c.barycenter, c.diameter))
}

pub fn volume_rule_with(
    mesh: &PolyMesh,
    cell: usize,
    degree: usize,
    opts: &VolumeRuleOptions,
) -> Result<VolumeRule> {
    let c = &mesh.cells[cell];
    let z0 = opts.z0.unwrap_or(c.barycenter.z);
    let seg = GaussLegendre::new(
        opts.segment_points
            .unwrap_or_else(|| points_for_degree(degree)),
    );
    let mut rule = VolumeRule {
        points: Vec::new(),
        weights: Vec::new(),
        degree,
        provenance: Provenance::Raw,
    };
    let mut max_nz: f64 = 0.0;
    for &(f, sign) in &c.faces {
        let fr = face_rule_with(mesh, f, degree + 1, &opts.face)?;
        for i in 0..fr.len() {
            let nz = sign as f64 * fr.normals[i].z;
            max_nz = max_nz.max(nz.abs());
            let x = fr.points[i];
            let len = x.z - z0;
            let base = nz * fr.jac[i] * fr.weights[i] * len;
            if base == 0.0 && !opts.keep_zero_weights {
                continue;
            }
            for (&t, &wt) in seg.nodes.iter().zip(&seg.weights) {
                rule.points.push(Vec3::new(x.x, x.y, z0 + t * len));
                rule.weights.push(base * wt);
            }
        }
    }
    if max_nz < 1e-8 {
        return Err(Error::DegenerateCell(
            cell,
            "no face has a normal component along z".into(),
        ));
    }
    Ok(rule)
}
