//! Surface rules.

use crate::face_maps::{EdgeCurve, FaceMap};
use crate::mesh::{simple_polygon, Face, PolyMesh};
use crate::quadrature::gauss::{points_for_degree, tensor_square, triangle, GaussLegendre, Rule2};
use crate::{Error, Result, Vec3};

/// Extra Gauss degree along curved (trigonometric) boundary edges of a parameter domain.
pub const CURVED_EDGE_ALLOWANCE: usize = 4;

/// A rule on one face, in the orientation of its chart.
///
/// `weights` are parameter-space weights; the physical measure of point `i` is
/// `weights[i] * jac[i]`. `normals` are canonical (chart) normals.
#[derive(Debug, Clone, Default)]
pub struct SurfaceRule {
    pub param: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub points: Vec<Vec3>,
    pub jac: Vec<f64>,
    pub normals: Vec<Vec3>,
    pub degree: usize,
}

/// Overrides for [`face_rule_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct FaceRuleOptions {
    /// Points per direction for faces whose parameter domain is the unit square.
    pub tensor_points: Option<usize>,
    /// Gauss points per curved boundary edge for curved parameter domains.
    pub curved_edge_points: Option<usize>,
    /// Points of every other line rule of a curved parameter domain (straight
    /// edges and the inner segments) instead of the degree-based count.
    pub line_points: Option<usize>,
}

impl SurfaceRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.weights.iter().zip(&self.jac).map(|(w, j)| w * j).sum()
    }

    pub fn param_area(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ f(x_i) ω_i J_i`.
    pub fn integrate(&self, f: impl Fn(&Vec3) -> f64) -> f64 {
        (0..self.len())
            .map(|i| f(&self.points[i]) * self.weights[i] * self.jac[i])
            .sum()
    }

    /// `Σ f(x_i) g(u_i, v_i) ω_i J_i`: a physical factor times a parameter-space factor.
    pub fn integrate_face(&self, f: impl Fn(&Vec3) -> f64, g: impl Fn(f64, f64) -> f64) -> f64 {
        (0..self.len())
            .map(|i| {
                let [u, v] = self.param[i];
                f(&self.points[i]) * g(u, v) * self.weights[i] * self.jac[i]
            })
            .sum()
    }

    fn from_param(map: &FaceMap, rule: Rule2, degree: usize) -> Result<SurfaceRule> {
        let n = rule.len();
        let mut out = SurfaceRule {
            param: Vec::with_capacity(n),
            weights: Vec::with_capacity(n),
            points: Vec::with_capacity(n),
            jac: Vec::with_capacity(n),
            normals: Vec::with_capacity(n),
            degree,
        };
        for (p, w) in rule.points.into_iter().zip(rule.weights) {
            let (nrm, j) = map.jacobian_normal(p[0], p[1])?;
            out.points.push(map.eval(p[0], p[1]));
            out.param.push(p);
            out.weights.push(w);
            out.jac.push(j);
            out.normals.push(nrm);
        }
        Ok(out)
    }
}

fn is_unit_square(p: &[[f64; 2]]) -> bool {
    if p.len() != 4 {
        return false;
    }
    [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
        .iter()
        .all(|c| p.iter().any(|q| (q[0] - c[0]).abs() < 1e-12 && (q[1] - c[1]).abs() < 1e-12))
}

/// Rule of declared degree `degree` on face `f` of `mesh`.
pub fn face_rule(mesh: &PolyMesh, f: usize, degree: usize) -> Result<SurfaceRule> {
    face_rule_with(mesh, f, degree, &FaceRuleOptions::default())
}

pub fn face_rule_with(
    mesh: &PolyMesh,
    f: usize,
    degree: usize,
    opts: &FaceRuleOptions,
) -> Result<SurfaceRule> {
    let face = &mesh.faces[f];
    let coords = mesh.face_coords(f);
    rule_for_face(face, &coords, degree, opts)
}

/// Rule on a face given its vertex coordinates.
pub fn rule_for_face(
    face: &Face,
    coords: &[Vec3],
    degree: usize,
    opts: &FaceRuleOptions,
) -> Result<SurfaceRule> {
    let dj = face.map.jacobian_allowance();
    let rule = if face.has_curved_edges() {
        green_rule(face, coords, degree, opts)?
    } else if is_unit_square(&face.param) {
        let n = opts
            .tensor_points
            .unwrap_or_else(|| points_for_degree(degree + dj));
        tensor_square(n)
    } else {
        if !simple_polygon(&face.param) {
            return Err(Error::InvalidMesh("parameter polygon is not simple".into()));
        }
        fan_rule(&face.param, degree + dj)
    };
    SurfaceRule::from_param(&face.map, rule, degree)
}

/// Fan sub-triangulation from the vertex centroid.
fn fan_rule(p: &[[f64; 2]], degree: usize) -> Rule2 {
    let n = p.len() as f64;
    let c = p
        .iter()
        .fold([0.0, 0.0], |a, q| [a[0] + q[0] / n, a[1] + q[1] / n]);
    let mut out = Rule2::default();
    for i in 0..p.len() {
        let t = triangle(c, p[i], p[(i + 1) % p.len()], degree);
        out.points.extend(t.points);
        out.weights.extend(t.weights);
    }
    out
}

/// Rule for a parameter domain bounded by curves: `∫ g du dv = ∮ G dv` with
/// `G(u, v) = ∫_{u0}^{u} g(s, v) ds`, both integrals by Gauss rules.
///
/// Only affine charts carry curved edges, so `J` is constant and `g` is a
/// polynomial of degree `degree` in `(u, v)`.
fn green_rule(face: &Face, coords: &[Vec3], degree: usize, opts: &FaceRuleOptions) -> Result<Rule2> {
    let FaceMap::Affine { origin, e_u, e_v } = &face.map else {
        return Err(Error::InvalidMesh("curved edges need an affine chart".into()));
    };
    let o = Vec3::from(*origin);
    let (a, b) = (Vec3::from(*e_u), Vec3::from(*e_v));
    let (g11, g12, g22) = (a.dot(&a), a.dot(&b), b.dot(&b));
    let det = g11 * g22 - g12 * g12;
    let to_param = |d: Vec3| {
        let (r1, r2) = (a.dot(&d), b.dot(&d));
        [(g22 * r1 - g12 * r2) / det, (g11 * r2 - g12 * r1) / det]
    };
    let n = coords.len();
    let u0 = face.param.iter().map(|p| p[0]).sum::<f64>() / n as f64;
    let seg = GaussLegendre::new(opts.line_points.unwrap_or_else(|| points_for_degree(degree)));
    let straight = GaussLegendre::new(opts.line_points.unwrap_or_else(|| points_for_degree(degree + 1)));
    let curved = GaussLegendre::new(opts.curved_edge_points.unwrap_or_else(|| match opts.line_points {
        Some(n) => n + CURVED_EDGE_ALLOWANCE / 2,
        None => points_for_degree(degree + 1 + CURVED_EDGE_ALLOWANCE),
    }));
    let mut out = Rule2::default();
    for i in 0..n {
        let j = (i + 1) % n;
        let edge = face.edge(i);
        let gl = if edge.is_straight() { &straight } else { &curved };
        for (&t, &wt) in gl.nodes.iter().zip(&gl.weights) {
            let (uv, dv) = match edge {
                EdgeCurve::Straight => {
                    let (p, q) = (face.param[i], face.param[j]);
                    (
                        [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])],
                        q[1] - p[1],
                    )
                }
                _ => {
                    let (x, dx) = edge.point(&coords[i], &coords[j], t);
                    (to_param(x - o), to_param(dx)[1])
                }
            };
            let du = uv[0] - u0;
            if dv == 0.0 || du == 0.0 {
                continue;
            }
            for (&s, &ws) in seg.nodes.iter().zip(&seg.weights) {
                out.points.push([u0 + s * du, uv[1]]);
                out.weights.push(wt * dv * ws * du);
            }
        }
    }
    let area: f64 = out.weights.iter().sum();
    if area < 0.0 {
        for w in &mut out.weights {
            *w = -*w;
        }
    }
    if area.abs() < 1e-14 {
        return Err(Error::InvalidMesh("curved face with zero parameter area".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generators::{extruded_annulus, AnnulusBase};
    use std::f64::consts::PI;

    fn single_face(face: Face, coords: &[Vec3], degree: usize) -> SurfaceRule {
        rule_for_face(&face, coords, degree, &FaceRuleOptions::default()).unwrap()
    }

    fn square(z: f64) -> (Face, Vec<Vec3>) {
        let c = vec![
            Vec3::new(0.0, 0.0, z),
            Vec3::new(1.0, 0.0, z),
            Vec3::new(1.0, 1.0, z),
            Vec3::new(0.0, 1.0, z),
        ];
        let f = Face::on_map(
            vec![0, 1, 2, 3],
            &c,
            FaceMap::affine(c[0], Vec3::x(), Vec3::y()),
        )
        .unwrap();
        (f, c)
    }

    #[test]
    fn unit_square_area() {
        let (f, c) = square(1.0);
        for d in 0..6 {
            assert!((single_face(f.clone(), &c, d).area() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn bilinear_area_matches_tensor_oracle() {
        let c = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.2),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let map = FaceMap::bilinear(c[0], c[1], c[2], c[3]);
        let f = Face::on_map(vec![0, 1, 2, 3], &c, map.clone()).unwrap();
        let r = single_face(f, &c, 4);
        let g = GaussLegendre::new(50);
        let mut oracle = 0.0;
        for i in 0..50 {
            for j in 0..50 {
                let (_, jac) = map.jacobian_normal(g.nodes[i], g.nodes[j]).unwrap();
                oracle += g.weights[i] * g.weights[j] * jac;
            }
        }
        assert!((r.area() - oracle).abs() < 1e-10 * oracle);
    }

    #[test]
    fn cylinder_mean_height() {
        let map = FaceMap::Cylinder {
            radius: 1.0,
            theta0: 0.0,
            theta1: PI,
            z0: 0.0,
            z1: 1.0,
        };
        let c: Vec<Vec3> = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
            .iter()
            .map(|p| map.eval(p[0], p[1]))
            .collect();
        let f = Face::on_map(vec![0, 1, 2, 3], &c, map).unwrap();
        let r = single_face(f, &c, 3);
        assert!((r.integrate(|x| x.z) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_integrand_on_affine_face() {
        // face x ∈ [0,2], y ∈ [0,1] in z = 0; m̃(u,v) = u - ½, physical factor x = 2u
        let c = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(2.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let f = Face::on_map(
            vec![0, 1, 2, 3],
            &c,
            FaceMap::affine(c[0], 2.0 * Vec3::x(), Vec3::y()),
        )
        .unwrap();
        let r = single_face(f, &c, 3);
        // ∫∫ 2u (u - ½) · 2 du dv = 2 (2/3 - 1/2) = 1/3
        let v = r.integrate_face(|x| x.x, |u, _| u - 0.5);
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn green_rule_on_half_disk_sector() {
        // top face of a one-cell half annulus: exact area π (R2² - R1²)/2
        let m = extruded_annulus(AnnulusBase::Quad, 1, 1, 1, 0.2, 1.0).unwrap();
        let top = (0..m.n_faces())
            .find(|&f| m.faces[f].has_curved_edges() && m.face_coords(f).iter().all(|p| p.z == 1.0))
            .unwrap();
        let exact = PI * (1.0 - 0.04) / 2.0;
        let r = face_rule_with(
            &m,
            top,
            2,
            &FaceRuleOptions {
                curved_edge_points: Some(20),
                ..Default::default()
            },
        )
        .unwrap();
        assert!((r.area() - exact).abs() < 1e-13);
        // second moment ∫ r² dA = π (R2⁴ - R1⁴)/4
        let v = r.integrate(|x| x.x * x.x + x.y * x.y);
        assert!((v - PI * (1.0 - 0.0016) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn fan_rule_on_triangle_domain() {
        let c = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let f = Face::planar(vec![0, 1, 2], &c, vec![EdgeCurve::Straight; 3]).unwrap();
        let r = single_face(f, &c, 4);
        assert!((r.area() - 0.5).abs() < 1e-14);
        assert!((r.integrate(|x| x.x * x.x * x.y) - 1.0 / 60.0).abs() < 1e-14);
    }
}
