//! Mesh generators for the test families.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::face_maps::{EdgeCurve, FaceMap};
use crate::mesh::{boundary_samples, BoundaryTag, Cell, Face, PolyMesh};
use crate::{Error, Result, Vec3};

enum FaceKind {
    /// Flat face; edges looked up in the builder's curve table.
    Planar,
    /// Face on a given chart, flipped if it points inward.
    Mapped(FaceMap),
}

#[derive(Default)]
struct Builder {
    vertices: Vec<Vec3>,
    faces: Vec<Face>,
    natural: Vec<bool>,
    index: HashMap<Vec<usize>, usize>,
    curves: HashMap<(usize, usize), EdgeCurve>,
    cells: Vec<Cell>,
}

/// `n_c · (γ(c) - x)` at the parameter centroid `c` of the face.
fn outward_score(face: &Face, center: &Vec3) -> Result<f64> {
    let n = face.param.len() as f64;
    let c = face
        .param
        .iter()
        .fold([0.0, 0.0], |a, p| [a[0] + p[0] / n, a[1] + p[1] / n]);
    let (nrm, _) = face.map.jacobian_normal(c[0], c[1])?;
    Ok(nrm.dot(&(face.map.eval(c[0], c[1]) - center)))
}

impl Builder {
    fn curve(&mut self, a: usize, b: usize, e: EdgeCurve) {
        let rev = match e {
            EdgeCurve::Arc {
                radius,
                theta0,
                theta1,
            } => EdgeCurve::Arc {
                radius,
                theta0: theta1,
                theta1: theta0,
            },
            other => other,
        };
        self.curves.insert((a, b), e);
        self.curves.insert((b, a), rev);
    }

    fn make(&self, ids: &[usize], kind: &FaceKind, flip: bool) -> Result<Face> {
        let coords: Vec<Vec3> = ids.iter().map(|&i| self.vertices[i]).collect();
        match kind {
            FaceKind::Planar => {
                let n = ids.len();
                let edges = (0..n)
                    .map(|i| {
                        self.curves
                            .get(&(ids[i], ids[(i + 1) % n]))
                            .copied()
                            .unwrap_or_default()
                    })
                    .collect();
                Face::planar(ids.to_vec(), &coords, edges)
            }
            FaceKind::Mapped(map) => {
                let map = if flip { map.flipped() } else { map.clone() };
                Face::on_map(ids.to_vec(), &coords, map)
            }
        }
    }

    /// Adds (or reuses) a face for the cell with centroid `center`; returns the signed reference.
    fn face(&mut self, center: Vec3, ids: Vec<usize>, kind: FaceKind, natural: bool) -> Result<(usize, i8)> {
        let mut key = ids.clone();
        key.sort_unstable();
        if let Some(&f) = self.index.get(&key) {
            let s = outward_score(&self.faces[f], &center)?;
            return Ok((f, if s > 0.0 { 1 } else { -1 }));
        }
        let mut face = self.make(&ids, &kind, false)?;
        if outward_score(&face, &center)? < 0.0 {
            let mut rev = ids.clone();
            if matches!(kind, FaceKind::Planar) {
                rev.reverse();
            }
            face = self.make(&rev, &kind, true)?;
            if outward_score(&face, &center)? < 0.0 {
                return Err(Error::InvalidMesh("cannot orient face outward".into()));
            }
        }
        let f = self.faces.len();
        self.faces.push(face);
        self.natural.push(natural);
        self.index.insert(key, f);
        Ok((f, 1))
    }

    fn finish(self) -> Result<PolyMesh> {
        let mut count = vec![0usize; self.faces.len()];
        for c in &self.cells {
            for &(f, _) in &c.faces {
                count[f] += 1;
            }
        }
        let tags = count
            .iter()
            .zip(&self.natural)
            .map(|(&n, &nat)| match (n, nat) {
                (1, true) => BoundaryTag::Natural,
                (1, false) => BoundaryTag::Essential,
                _ => BoundaryTag::Interior,
            })
            .collect();
        PolyMesh::new(self.vertices, self.faces, self.cells, tags)
    }
}

fn centroid(b: &Builder, ids: &[usize]) -> Vec3 {
    ids.iter().map(|&i| b.vertices[i]).sum::<Vec3>() / ids.len() as f64
}

/// `n × n × n` hexahedra of the unit cube, all boundary faces essential.
pub fn unit_cube_grid(n: usize) -> Result<PolyMesh> {
    curved_top_cube(n, 0.0)
}

/// Hexahedral mesh of `{0 ≤ x, y ≤ 1, 0 ≤ z ≤ 1 - a sin(πx)}`.
///
/// Layer `j` sits on `z = (j/n)(1 - a sin(πx))`, so every horizontal face above
/// the bottom is a graph face. Side faces `y = const` are strips between two
/// such graphs. All boundary faces are essential.
pub fn curved_top_cube(n: usize, amplitude: f64) -> Result<PolyMesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one subdivision".into()));
    }
    if amplitude.abs() >= 1.0 {
        return Err(Error::InvalidArgument("amplitude must satisfy |a| < 1".into()));
    }
    let h = 1.0 / n as f64;
    let idx = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
    let mut b = Builder::default();
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                let x = i as f64 * h;
                let level = k as f64 * h;
                b.vertices
                    .push(Vec3::new(x, j as f64 * h, level * (1.0 - amplitude * (PI * x).sin())));
            }
        }
    }
    let curved = |k: usize| k > 0 && amplitude != 0.0;
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let corners: Vec<usize> = [
                    (0, 0, 0),
                    (1, 0, 0),
                    (1, 1, 0),
                    (0, 1, 0),
                    (0, 0, 1),
                    (1, 0, 1),
                    (1, 1, 1),
                    (0, 1, 1),
                ]
                .iter()
                .map(|&(a, c, d)| idx(i + a, j + c, k + d))
                .collect();
                let ctr = centroid(&b, &corners);
                let mut faces = Vec::with_capacity(6);
                for (kk, quad) in [(k, [0, 1, 2, 3]), (k + 1, [4, 5, 6, 7])] {
                    let ids: Vec<usize> = quad.iter().map(|&q| corners[q]).collect();
                    let kind = if curved(kk) {
                        FaceKind::Mapped(FaceMap::GraphSin {
                            x0: i as f64 * h,
                            dx: h,
                            y0: j as f64 * h,
                            dy: h,
                            level: kk as f64 * h,
                            amplitude,
                        })
                    } else {
                        FaceKind::Planar
                    };
                    faces.push(b.face(ctr, ids, kind, false)?);
                }
                for quad in [[0, 3, 7, 4], [1, 2, 6, 5]] {
                    let ids: Vec<usize> = quad.iter().map(|&q| corners[q]).collect();
                    faces.push(b.face(ctr, ids, FaceKind::Planar, false)?);
                }
                for (jj, quad) in [(j, [0, 1, 5, 4]), (j + 1, [3, 2, 6, 7])] {
                    let ids: Vec<usize> = quad.iter().map(|&q| corners[q]).collect();
                    let kind = if amplitude != 0.0 {
                        FaceKind::Mapped(FaceMap::GraphStrip {
                            x0: i as f64 * h,
                            dx: h,
                            y0: jj as f64 * h,
                            lo: k as f64 * h,
                            hi: (k + 1) as f64 * h,
                            amplitude,
                        })
                    } else {
                        FaceKind::Planar
                    };
                    faces.push(b.face(ctr, ids, kind, false)?);
                }
                b.cells.push(Cell::new(faces, 0));
            }
        }
    }
    b.finish()
}

/// Base mesh of the extruded annulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnulusBase {
    Quad,
    Tria,
}

/// Half annulus `R1 ≤ r ≤ R2, y ≥ 0, 0 ≤ z ≤ 1`, extruded from a polar grid.
///
/// Faces on `r = R1` and `r = R2` carry cylinder charts and are natural; the
/// other boundary faces are essential. Only the boundary arcs are curved; interior
/// constant-r edges are chords.
pub fn extruded_annulus(
    base: AnnulusBase,
    n_r: usize,
    n_theta: usize,
    n_z: usize,
    r1: f64,
    r2: f64,
) -> Result<PolyMesh> {
    if !(r1 > 0.0 && r1 < r2) {
        return Err(Error::InvalidArgument(format!("need 0 < R1 < R2 (got {r1}, {r2})")));
    }
    if n_r == 0 || n_theta == 0 || n_z == 0 {
        return Err(Error::InvalidArgument("subdivision counts must be ≥ 1".into()));
    }
    if base == AnnulusBase::Tria && n_theta < 2 {
        // the four corners of a half-turn sector are collinear
        return Err(Error::InvalidArgument("the triangle base needs n_theta ≥ 2".into()));
    }
    let radius = |i: usize| r1 + (r2 - r1) * i as f64 / n_r as f64;
    let theta = |j: usize| PI * j as f64 / n_theta as f64;
    let zl = |k: usize| k as f64 / n_z as f64;
    let idx = |i: usize, j: usize, k: usize| (k * (n_theta + 1) + j) * (n_r + 1) + i;
    let mut b = Builder::default();
    for k in 0..=n_z {
        for j in 0..=n_theta {
            for i in 0..=n_r {
                let (r, t) = (radius(i), theta(j));
                b.vertices.push(Vec3::new(r * t.cos(), r * t.sin(), zl(k)));
            }
        }
    }
    for k in 0..=n_z {
        for i in [0, n_r] {
            for j in 0..n_theta {
                b.curve(
                    idx(i, j, k),
                    idx(i, j + 1, k),
                    EdgeCurve::Arc {
                        radius: radius(i),
                        theta0: theta(j),
                        theta1: theta(j + 1),
                    },
                );
            }
        }
    }
    // base polygons as (i, j) loops
    let mut polys: Vec<Vec<(usize, usize)>> = Vec::new();
    for j in 0..n_theta {
        for i in 0..n_r {
            let q = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            match base {
                AnnulusBase::Quad => polys.push(q.to_vec()),
                AnnulusBase::Tria => {
                    polys.push(vec![q[0], q[1], q[2]]);
                    polys.push(vec![q[0], q[2], q[3]]);
                }
            }
        }
    }
    for k in 0..n_z {
        for poly in &polys {
            let bottom: Vec<usize> = poly.iter().map(|&(i, j)| idx(i, j, k)).collect();
            let top: Vec<usize> = poly.iter().map(|&(i, j)| idx(i, j, k + 1)).collect();
            // boundary samples include arc points, so the centre stays inside even
            // when a single cell spans the whole half disk
            let coords: Vec<Vec3> = bottom.iter().map(|&v| b.vertices[v]).collect();
            let m = bottom.len();
            let edges: Vec<EdgeCurve> = (0..m)
                .map(|e| b.curves.get(&(bottom[e], bottom[(e + 1) % m])).copied().unwrap_or_default())
                .collect();
            let samples = boundary_samples(&coords, &edges, 8);
            let mut ctr = samples.iter().sum::<Vec3>() / samples.len() as f64;
            ctr.z = 0.5 * (zl(k) + zl(k + 1));
            let mut faces = Vec::with_capacity(poly.len() + 2);
            faces.push(b.face(ctr, bottom.clone(), FaceKind::Planar, false)?);
            faces.push(b.face(ctr, top.clone(), FaceKind::Planar, false)?);
            let m = poly.len();
            for e in 0..m {
                let (p, q) = (poly[e], poly[(e + 1) % m]);
                let ids = vec![idx(p.0, p.1, k), idx(q.0, q.1, k), idx(q.0, q.1, k + 1), idx(p.0, p.1, k + 1)];
                let on_cylinder = p.0 == q.0 && (p.0 == 0 || p.0 == n_r);
                let kind = if on_cylinder {
                    let (ja, jb) = (p.1.min(q.1), p.1.max(q.1));
                    FaceKind::Mapped(FaceMap::Cylinder {
                        radius: radius(p.0),
                        theta0: theta(ja),
                        theta1: theta(jb),
                        z0: zl(k),
                        z1: zl(k + 1),
                    })
                } else {
                    FaceKind::Planar
                };
                faces.push(b.face(ctr, ids, kind, on_cylinder)?);
            }
            b.cells.push(Cell::new(faces, 0));
        }
    }
    b.finish()
}

/// Corner-point grid on vertical pillars over `[0,1]²`.
///
/// `heights[(k (ny+1) + j) (nx+1) + i]` is the height of corner `(i, j)` on
/// horizon `k`; horizons must increase strictly in `k`. Cells of horizon gap `k`
/// get material `materials[k]`. Top and bottom of the domain are natural, the
/// sides essential.
#[derive(Debug, Clone)]
pub struct CornerPointSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub heights: Vec<f64>,
    pub materials: Vec<usize>,
}

impl CornerPointSpec {
    /// Horizons from surfaces `z = s_l(x, y)`, `per_layer` cells between
    /// consecutive surfaces (linear interpolation), material = layer index.
    pub fn from_surfaces(
        nx: usize,
        ny: usize,
        per_layer: usize,
        surfaces: &[&dyn Fn(f64, f64) -> f64],
    ) -> CornerPointSpec {
        let layers = surfaces.len().saturating_sub(1);
        let nz = layers * per_layer;
        let mut heights = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
        for k in 0..=nz {
            let (l, s) = if k == nz {
                (layers - 1, per_layer)
            } else {
                (k / per_layer, k % per_layer)
            };
            let t = s as f64 / per_layer as f64;
            for j in 0..=ny {
                for i in 0..=nx {
                    let (x, y) = (i as f64 / nx as f64, j as f64 / ny as f64);
                    let (lo, hi) = (surfaces[l](x, y), surfaces[l + 1](x, y));
                    heights.push(lo + t * (hi - lo));
                }
            }
        }
        let materials = (0..nz).map(|k| k / per_layer).collect();
        CornerPointSpec {
            nx,
            ny,
            nz,
            heights,
            materials,
        }
    }
}

pub fn cornerpoint(spec: &CornerPointSpec) -> Result<PolyMesh> {
    let (nx, ny, nz) = (spec.nx, spec.ny, spec.nz);
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(Error::InvalidArgument("subdivision counts must be ≥ 1".into()));
    }
    if spec.heights.len() != (nx + 1) * (ny + 1) * (nz + 1) || spec.materials.len() != nz {
        return Err(Error::InvalidArgument("heights or materials have the wrong length".into()));
    }
    let idx = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    for k in 0..nz {
        for j in 0..=ny {
            for i in 0..=nx {
                if spec.heights[idx(i, j, k + 1)] <= spec.heights[idx(i, j, k)] {
                    return Err(Error::PinchedCell(format!(
                        "pillar ({i}, {j}) is not increasing between horizons {k} and {}",
                        k + 1
                    )));
                }
            }
        }
    }
    let mut b = Builder::default();
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                b.vertices.push(Vec3::new(
                    i as f64 / nx as f64,
                    j as f64 / ny as f64,
                    spec.heights[idx(i, j, k)],
                ));
            }
        }
    }
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let corners: Vec<usize> = [
                    (0, 0, 0),
                    (1, 0, 0),
                    (1, 1, 0),
                    (0, 1, 0),
                    (0, 0, 1),
                    (1, 0, 1),
                    (1, 1, 1),
                    (0, 1, 1),
                ]
                .iter()
                .map(|&(a, c, d)| idx(i + a, j + c, k + d))
                .collect();
                let ctr = centroid(&b, &corners);
                let mut faces = Vec::with_capacity(6);
                for quad in [[0, 1, 2, 3], [4, 5, 6, 7]] {
                    let ids: Vec<usize> = quad.iter().map(|&q| corners[q]).collect();
                    let p: Vec<Vec3> = ids.iter().map(|&v| b.vertices[v]).collect();
                    let twist = p[0] - p[1] + p[2] - p[3];
                    let kind = if twist.norm() <= 1e-14 * (p[2] - p[0]).norm() {
                        FaceKind::Mapped(FaceMap::affine(p[0], p[1] - p[0], p[3] - p[0]))
                    } else {
                        FaceKind::Mapped(FaceMap::bilinear(p[0], p[1], p[2], p[3]))
                    };
                    faces.push(b.face(ctr, ids, kind, true)?);
                }
                for quad in [[0, 3, 7, 4], [1, 2, 6, 5], [0, 1, 5, 4], [3, 2, 6, 7]] {
                    let ids: Vec<usize> = quad.iter().map(|&q| corners[q]).collect();
                    faces.push(b.face(ctr, ids, FaceKind::Planar, false)?);
                }
                b.cells.push(Cell::new(faces, spec.materials[k]));
            }
        }
    }
    b.finish()
}

/// Lower layer interface of the three-layer corner-point domain.
pub fn layer_interface_low(x: f64, y: f64) -> f64 {
    1.0 / 3.0 + 0.05 * (x - 0.5) + 0.3 * (x - 0.5) * (y - 0.5)
}

/// Upper layer interface of the three-layer corner-point domain.
pub fn layer_interface_high(x: f64, y: f64) -> f64 {
    2.0 / 3.0 - 0.05 * (y - 0.5) - 0.3 * (x - 0.5) * (y - 0.5)
}

/// Three-layer unit cube on an `n × n` pillar grid with `per_layer` cells per
/// layer. With `curved` the layer interfaces are the bilinear surfaces
/// [`layer_interface_low`] and [`layer_interface_high`], otherwise `z = 1/3, 2/3`.
pub fn cornerpoint_layers(n: usize, per_layer: usize, curved: bool) -> Result<PolyMesh> {
    let bottom = |_: f64, _: f64| 0.0;
    let top = |_: f64, _: f64| 1.0;
    let flat_lo = |_: f64, _: f64| 1.0 / 3.0;
    let flat_hi = |_: f64, _: f64| 2.0 / 3.0;
    let spec = if curved {
        CornerPointSpec::from_surfaces(
            n,
            n,
            per_layer,
            &[&bottom, &layer_interface_low, &layer_interface_high, &top],
        )
    } else {
        CornerPointSpec::from_surfaces(n, n, per_layer, &[&bottom, &flat_lo, &flat_hi, &top])
    };
    cornerpoint(&spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curved_top_single_cell() {
        let m = curved_top_cube(1, 0.1).unwrap();
        assert_eq!(m.n_cells(), 1);
        assert_eq!(m.n_faces(), 6);
        let graph = m
            .faces
            .iter()
            .filter(|f| matches!(f.map, FaceMap::GraphSin { .. }))
            .count();
        assert_eq!(graph, 1);
        assert!((m.volume() - (1.0 - 0.2 / PI)).abs() < 1e-12);
        assert!(m.tags.iter().all(|&t| t == BoundaryTag::Essential));
        let flat = curved_top_cube(1, 0.0).unwrap();
        assert!(flat.faces.iter().all(|f| f.is_straight()));
    }

    #[test]
    fn curved_top_refines() {
        let m = curved_top_cube(2, 0.1).unwrap();
        assert_eq!(m.n_cells(), 8);
        let h: Vec<f64> = (1..=3)
            .map(|n| curved_top_cube(n, 0.1).unwrap().mesh_size().unwrap())
            .collect();
        assert!(h[0] > h[1] && h[1] > h[2]);
        assert!(curved_top_cube(0, 0.1).is_err());
    }

    #[test]
    fn annulus_coarsest_and_volume() {
        let m = extruded_annulus(AnnulusBase::Quad, 1, 1, 1, 0.2, 1.0).unwrap();
        assert_eq!(m.n_cells(), 1);
        let cyl = m.faces.iter().filter(|f| matches!(f.map, FaceMap::Cylinder { .. })).count();
        assert_eq!(cyl, 2);
        assert_eq!(m.tags.iter().filter(|&&t| t == BoundaryTag::Natural).count(), 2);
        let m = extruded_annulus(AnnulusBase::Quad, 2, 4, 2, 0.2, 1.0).unwrap();
        assert!((m.volume() - 0.48 * PI).abs() < 1e-10);
        assert!(extruded_annulus(AnnulusBase::Quad, 1, 1, 1, 1.0, 0.2).is_err());
    }

    #[test]
    fn tria_annulus_cells_have_one_curved_face() {
        let m = extruded_annulus(AnnulusBase::Tria, 1, 4, 1, 0.2, 1.0).unwrap();
        assert_eq!(m.n_cells(), 8);
        for c in &m.cells {
            let curved = c
                .faces
                .iter()
                .filter(|(f, _)| matches!(m.faces[*f].map, FaceMap::Cylinder { .. }))
                .count();
            assert_eq!(curved, 1);
        }
        assert!((m.volume() - 0.48 * PI).abs() < 1e-10);
    }

    #[test]
    fn cornerpoint_lifted_corner_volume() {
        let mut spec = CornerPointSpec {
            nx: 1,
            ny: 1,
            nz: 1,
            heights: vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.2],
            materials: vec![0],
        };
        let m = cornerpoint(&spec).unwrap();
        assert!((m.volume() - 4.2 / 4.0).abs() < 1e-13);
        assert!(m.faces.iter().any(|f| matches!(f.map, FaceMap::Bilinear { .. })));
        spec.heights[7] = -0.1;
        assert!(matches!(cornerpoint(&spec), Err(Error::PinchedCell(_))));
    }

    #[test]
    fn cornerpoint_planar_heights_are_affine() {
        let m = cornerpoint_layers(2, 1, false).unwrap();
        assert!(m.faces.iter().all(|f| f.map.is_affine()));
        let mats: Vec<usize> = m.cells.iter().map(|c| c.material).collect();
        assert_eq!(mats.iter().filter(|&&x| x == 1).count(), 4);
        assert!((m.volume() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn cornerpoint_curved_layers_volume() {
        let m = cornerpoint_layers(2, 1, true).unwrap();
        assert!((m.volume() - 1.0).abs() < 1e-12);
        assert!(m.faces.iter().any(|f| matches!(f.map, FaceMap::Bilinear { .. })));
    }

    #[test]
    fn flattened_twin_keeps_topology() {
        let m = curved_top_cube(2, 0.1).unwrap();
        let f = m.flattened().unwrap();
        assert_eq!(f.n_faces(), m.n_faces());
        assert!(f.faces.iter().all(|x| !x.has_curved_edges()));
        // 4 top faces and 8 curved strips on y = 0 and y = 1
        let exact = f.faces.iter().filter(|x| x.data_map.is_some()).count();
        assert_eq!(exact, 12);
        let a = extruded_annulus(AnnulusBase::Tria, 1, 4, 1, 0.2, 1.0).unwrap();
        let af = a.flattened().unwrap();
        assert!(af.volume() < a.volume());
    }
}
