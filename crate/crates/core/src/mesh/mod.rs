//! Polyhedral meshes whose faces carry parametric charts.

pub mod generators;
pub mod io;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::face_maps::{EdgeCurve, FaceMap};
use crate::quadrature::{face_rule, volume_rule_with, VolumeRuleOptions};
use crate::{Error, Result, Vec3};

pub use generators::{
    cornerpoint, cornerpoint_layers, curved_top_cube, extruded_annulus, unit_cube_grid,
    AnnulusBase, CornerPointSpec,
};

/// Boundary classification of a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTag {
    Interior,
    /// Normal flux prescribed.
    Essential,
    /// Pressure prescribed.
    Natural,
}

/// A face: a vertex loop, a chart and the preimages of the loop in parameter space.
///
/// `edges[i]` describes the edge from `vertex_loop[i]` to `vertex_loop[i+1]`.
/// `data_map`, when present, is the exact surface the face approximates; boundary
/// data are evaluated there at the same parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Face {
    #[serde(rename = "loop")]
    pub vertex_loop: Vec<usize>,
    pub map: FaceMap,
    pub param: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "edges_all_straight")]
    pub edges: Vec<EdgeCurve>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_map: Option<FaceMap>,
}

fn edges_all_straight(e: &[EdgeCurve]) -> bool {
    e.iter().all(EdgeCurve::is_straight)
}

impl Face {
    /// Face on a given chart; the parameter polygon is found by inverting the chart at the vertices.
    pub fn on_map(loop_ids: Vec<usize>, coords: &[Vec3], map: FaceMap) -> Result<Face> {
        let param = coords
            .iter()
            .map(|p| map.invert(p).map(|(u, v)| [u, v]))
            .collect::<Result<Vec<_>>>()?;
        let n = loop_ids.len();
        Ok(Face {
            vertex_loop: loop_ids,
            map,
            param,
            edges: vec![EdgeCurve::Straight; n],
            data_map: None,
        })
    }

    /// Planar face with an affine chart fitted to its (possibly curved) boundary.
    ///
    /// The canonical normal follows the loop by the right-hand rule.
    pub fn planar(loop_ids: Vec<usize>, coords: &[Vec3], edges: Vec<EdgeCurve>) -> Result<Face> {
        let n = coords.len();
        if n < 3 || edges.len() != n {
            return Err(Error::InvalidMesh(format!(
                "planar face needs ≥ 3 vertices and one edge per vertex (got {n}, {})",
                edges.len()
            )));
        }
        let samples = boundary_samples(coords, &edges, 8);
        let mut normal = Vec3::zeros();
        for i in 0..samples.len() {
            let (a, b) = (samples[i], samples[(i + 1) % samples.len()]);
            normal += a.cross(&b);
        }
        let area2 = normal.norm();
        let scale = samples
            .iter()
            .map(|p| (p - samples[0]).norm())
            .fold(0.0, f64::max);
        if area2 <= 1e-12 * scale * scale {
            return Err(Error::InvalidMesh("degenerate (zero-area) face".into()));
        }
        normal /= area2;
        let a = {
            let d = coords[1] - coords[0];
            let d = d - normal * normal.dot(&d);
            d / d.norm()
        };
        let b = normal.cross(&a);
        let (mut smin, mut smax, mut tmin, mut tmax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &samples {
            let d = p - coords[0];
            let (s, t) = (d.dot(&a), d.dot(&b));
            smin = smin.min(s);
            smax = smax.max(s);
            tmin = tmin.min(t);
            tmax = tmax.max(t);
        }
        let len = (smax - smin).max(tmax - tmin);
        let origin = coords[0] + smin * a + tmin * b;
        let map = FaceMap::affine(origin, len * a, len * b);
        let param = coords
            .iter()
            .map(|p| {
                let d = p - origin;
                [d.dot(&a) / len, d.dot(&b) / len]
            })
            .collect();
        Ok(Face {
            vertex_loop: loop_ids,
            map,
            param,
            edges,
            data_map: None,
        })
    }

    pub fn len(&self) -> usize {
        self.vertex_loop.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_loop.is_empty()
    }

    pub fn has_curved_edges(&self) -> bool {
        !edges_all_straight(&self.edges)
    }

    /// `true` when the face is a flat polygon with straight edges.
    pub fn is_straight(&self) -> bool {
        self.map.is_affine() && !self.has_curved_edges()
    }

    /// Edge curve `i`, defaulting to straight.
    pub fn edge(&self, i: usize) -> EdgeCurve {
        self.edges.get(i).copied().unwrap_or_default()
    }

    /// Chart used for boundary data.
    pub fn data_chart(&self) -> &FaceMap {
        self.data_map.as_ref().unwrap_or(&self.map)
    }
}

/// Points along the boundary loop: every vertex followed by `per_edge - 1` interior edge points.
pub(crate) fn boundary_samples(coords: &[Vec3], edges: &[EdgeCurve], per_edge: usize) -> Vec<Vec3> {
    let n = coords.len();
    let mut out = Vec::with_capacity(n * per_edge);
    for i in 0..n {
        let (a, b) = (coords[i], coords[(i + 1) % n]);
        let e = edges.get(i).copied().unwrap_or_default();
        for s in 0..per_edge {
            if s == 0 {
                out.push(a);
            } else if !e.is_straight() {
                out.push(e.point(&a, &b, s as f64 / per_edge as f64).0);
            }
        }
    }
    out
}

/// A polyhedral cell: signed face references plus derived geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub faces: Vec<(usize, i8)>,
    #[serde(default)]
    pub material: usize,
    #[serde(skip, default = "Vec3::zeros")]
    pub barycenter: Vec3,
    #[serde(skip)]
    pub diameter: f64,
    #[serde(skip)]
    pub volume: f64,
}

impl Cell {
    pub fn new(faces: Vec<(usize, i8)>, material: usize) -> Self {
        Cell {
            faces,
            material,
            barycenter: Vec3::zeros(),
            diameter: 0.0,
            volume: 0.0,
        }
    }
}

/// The mesh. Immutable once built; geometry is filled in by [`PolyMesh::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<Face>,
    pub cells: Vec<Cell>,
    pub tags: Vec<BoundaryTag>,
}

/// Quadrature degree used for cell volumes, barycenters and the orientation check.
const GEOMETRY_DEGREE: usize = 8;

impl PolyMesh {
    /// Builds a mesh, checks every invariant and computes cell geometry.
    pub fn new(
        vertices: Vec<Vec3>,
        faces: Vec<Face>,
        cells: Vec<Cell>,
        tags: Vec<BoundaryTag>,
    ) -> Result<PolyMesh> {
        let mut mesh = PolyMesh {
            vertices,
            faces,
            cells,
            tags,
        };
        if mesh.cells.is_empty() {
            return Err(Error::EmptyMesh);
        }
        for f in &mut mesh.faces {
            if f.edges.is_empty() {
                f.edges = vec![EdgeCurve::Straight; f.vertex_loop.len()];
            }
        }
        mesh.check_topology()?;
        mesh.check_faces()?;
        mesh.compute_geometry()?;
        mesh.check_orientation()?;
        Ok(mesh)
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn face_coords(&self, f: usize) -> Vec<Vec3> {
        self.faces[f]
            .vertex_loop
            .iter()
            .map(|&v| self.vertices[v])
            .collect()
    }

    /// Cells adjacent to each face with the sign they use.
    pub fn face_cells(&self) -> Vec<Vec<(usize, i8)>> {
        let mut out = vec![Vec::new(); self.faces.len()];
        for (c, cell) in self.cells.iter().enumerate() {
            for &(f, s) in &cell.faces {
                if f < out.len() {
                    out[f].push((c, s));
                }
            }
        }
        out
    }

    pub fn is_boundary(&self, f: usize) -> bool {
        self.tags[f] != BoundaryTag::Interior
    }

    /// Mean cell diameter.
    pub fn mesh_size(&self) -> Result<f64> {
        if self.cells.is_empty() {
            return Err(Error::EmptyMesh);
        }
        Ok(self.cells.iter().map(|c| c.diameter).sum::<f64>() / self.cells.len() as f64)
    }

    pub fn volume(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }

    fn check_topology(&self) -> Result<()> {
        let nv = self.vertices.len();
        if self.tags.len() != self.faces.len() {
            return Err(Error::InvalidMesh(format!(
                "{} tags for {} faces",
                self.tags.len(),
                self.faces.len()
            )));
        }
        for (fi, f) in self.faces.iter().enumerate() {
            if f.vertex_loop.len() < 3 {
                return Err(Error::InvalidMesh(format!("face {fi} has fewer than 3 vertices")));
            }
            if let Some(&v) = f.vertex_loop.iter().find(|&&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("face {fi} references missing vertex {v}")));
            }
            if f.param.len() != f.vertex_loop.len() || f.edges.len() != f.vertex_loop.len() {
                return Err(Error::InvalidMesh(format!(
                    "face {fi}: loop, parameter polygon and edge list differ in length"
                )));
            }
        }
        for (ci, c) in self.cells.iter().enumerate() {
            if let Some(&(f, _)) = c.faces.iter().find(|(f, _)| *f >= self.faces.len()) {
                return Err(Error::InvalidMesh(format!("cell {ci} references missing face {f}")));
            }
            if let Some(&(f, s)) = c.faces.iter().find(|(_, s)| s.abs() != 1) {
                return Err(Error::InvalidMesh(format!("cell {ci}: face {f} has sign {s}")));
            }
            // closed surface: each edge shared by exactly two faces
            let mut count: HashMap<(usize, usize), usize> = HashMap::new();
            for &(f, _) in &c.faces {
                let l = &self.faces[f].vertex_loop;
                for i in 0..l.len() {
                    let (a, b) = (l[i], l[(i + 1) % l.len()]);
                    *count.entry((a.min(b), a.max(b))).or_default() += 1;
                }
            }
            if let Some((e, n)) = count.iter().find(|(_, &n)| n != 2) {
                return Err(Error::InvalidMesh(format!(
                    "cell {ci} is not closed: edge {e:?} shared by {n} faces"
                )));
            }
        }
        for (f, adj) in self.face_cells().iter().enumerate() {
            match (adj.len(), self.tags[f]) {
                (1, BoundaryTag::Interior) => {
                    return Err(Error::InvalidMesh(format!("boundary face {f} tagged interior")))
                }
                (1, _) => {}
                (2, BoundaryTag::Interior) => {
                    if adj[0].1 != -adj[1].1 {
                        return Err(Error::InvalidMesh(format!(
                            "interior face {f}: cells {} and {} use the same sign",
                            adj[0].0, adj[1].0
                        )));
                    }
                }
                (2, _) => {
                    return Err(Error::InvalidMesh(format!("interior face {f} tagged as boundary")))
                }
                (n, _) => {
                    return Err(Error::InvalidMesh(format!("face {f} referenced by {n} cells")))
                }
            }
        }
        Ok(())
    }

    fn check_faces(&self) -> Result<()> {
        for (fi, f) in self.faces.iter().enumerate() {
            let coords = self.face_coords(fi);
            let scale = coords
                .iter()
                .map(|p| (p - coords[0]).norm())
                .fold(0.0, f64::max)
                .max(coords.iter().map(|p| p.norm()).fold(0.0, f64::max));
            for (i, p) in coords.iter().enumerate() {
                let [u, v] = f.param[i];
                let q = f.map.eval(u, v);
                if (q - p).norm() > 1e-10 * scale.max(1.0) {
                    return Err(Error::InvalidMesh(format!(
                        "face {fi}: chart misses vertex {} by {:.3e}",
                        f.vertex_loop[i],
                        (q - p).norm()
                    )));
                }
            }
            if f.map.is_affine() {
                let (n, _) = f.map.jacobian_normal(0.5, 0.5)?;
                for p in &coords {
                    if (p - coords[0]).dot(&n).abs() > 1e-12 * scale.max(1e-300) {
                        return Err(Error::InvalidMesh(format!("affine face {fi} is not planar")));
                    }
                }
            }
            if !f.has_curved_edges() && !simple_polygon(&f.param) {
                return Err(Error::InvalidMesh(format!(
                    "face {fi}: parameter polygon is not simple"
                )));
            }
            if f.has_curved_edges() && !f.map.is_affine() {
                return Err(Error::InvalidMesh(format!(
                    "face {fi}: curved edges need an affine chart"
                )));
            }
        }
        Ok(())
    }

    fn compute_geometry(&mut self) -> Result<()> {
        let diam: Vec<f64> = (0..self.cells.len()).map(|c| self.sampled_diameter(c)).collect();
        for c in 0..self.cells.len() {
            let z0 = {
                let mut s = 0.0;
                let mut n = 0.0;
                for &(f, _) in &self.cells[c].faces {
                    for &v in &self.faces[f].vertex_loop {
                        s += self.vertices[v].z;
                        n += 1.0;
                    }
                }
                s / n
            };
            let opts = VolumeRuleOptions {
                z0: Some(z0),
                ..Default::default()
            };
            let rule = volume_rule_with(self, c, 1, &opts)?;
            let vol = rule.integrate(|_| 1.0);
            if vol.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::DegenerateCell(c, format!("volume {vol:.3e}")));
            }
            let bary = Vec3::new(
                rule.integrate(|p| p.x),
                rule.integrate(|p| p.y),
                rule.integrate(|p| p.z),
            ) / vol;
            let cell = &mut self.cells[c];
            cell.volume = vol;
            cell.barycenter = bary;
            cell.diameter = diam[c];
        }
        // volumes again with the barycentric z0 and a higher degree
        for c in 0..self.cells.len() {
            let rule = volume_rule_with(self, c, GEOMETRY_DEGREE, &VolumeRuleOptions::default())?;
            let vol = rule.integrate(|_| 1.0);
            let bary = Vec3::new(
                rule.integrate(|p| p.x),
                rule.integrate(|p| p.y),
                rule.integrate(|p| p.z),
            ) / vol;
            self.cells[c].volume = vol;
            self.cells[c].barycenter = bary;
        }
        Ok(())
    }

    /// Diameter from vertices and points sampled on the face boundaries and interiors.
    fn sampled_diameter(&self, c: usize) -> f64 {
        let mut pts = Vec::new();
        for &(f, _) in &self.cells[c].faces {
            let face = &self.faces[f];
            let coords = self.face_coords(f);
            pts.extend(boundary_samples(&coords, &face.edges, 8));
            if !face.map.is_affine() {
                // curved surfaces may bulge beyond their boundary
                let (mut umin, mut umax, mut vmin, mut vmax) = (1.0f64, 0.0f64, 1.0f64, 0.0f64);
                for &[u, v] in &face.param {
                    umin = umin.min(u);
                    umax = umax.max(u);
                    vmin = vmin.min(v);
                    vmax = vmax.max(v);
                }
                for i in 0..=6 {
                    for j in 0..=6 {
                        let u = umin + (umax - umin) * i as f64 / 6.0;
                        let v = vmin + (vmax - vmin) * j as f64 / 6.0;
                        pts.push(face.map.eval(u, v));
                    }
                }
            }
        }
        let mut d: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                d = d.max((pts[i] - pts[j]).norm_squared());
            }
        }
        d.sqrt()
    }

    /// Checks `∫_∂P n·(x - x_P) dF = 3|P|` per cell.
    fn check_orientation(&self) -> Result<()> {
        for (ci, c) in self.cells.iter().enumerate() {
            let mut s = 0.0;
            for &(f, sign) in &c.faces {
                let rule = face_rule(self, f, GEOMETRY_DEGREE)?;
                for i in 0..rule.len() {
                    s += sign as f64
                        * rule.weights[i]
                        * rule.jac[i]
                        * rule.normals[i].dot(&(rule.points[i] - c.barycenter));
                }
            }
            let rel = (s - 3.0 * c.volume).abs() / (3.0 * c.volume);
            if s <= 0.0 || rel > 1e-9 {
                return Err(Error::InvalidMesh(format!(
                    "cell {ci}: face normals not outward (∫n·(x-x_P) = {s:.6e}, 3|P| = {:.6e})",
                    3.0 * c.volume
                )));
            }
        }
        Ok(())
    }

    /// Twin mesh with every curved face replaced by its planar or bilinear proxy
    /// through the same vertices. Boundary faces remember their exact surface in
    /// `data_map` so boundary data can still be sampled on the true boundary.
    pub fn flattened(&self) -> Result<PolyMesh> {
        let mut faces = Vec::with_capacity(self.faces.len());
        for (fi, f) in self.faces.iter().enumerate() {
            if f.is_straight() {
                faces.push(f.clone());
                continue;
            }
            let coords = self.face_coords(fi);
            let n = coords.len();
            let corners = unit_square_corners(&f.param);
            let mut nf = if let Some(idx) = corners {
                let map = FaceMap::bilinear(
                    coords[idx[0]],
                    coords[idx[1]],
                    coords[idx[2]],
                    coords[idx[3]],
                );
                let param = f.param.iter().map(|p| [p[0].round(), p[1].round()]).collect();
                Face {
                    vertex_loop: f.vertex_loop.clone(),
                    map,
                    param,
                    edges: vec![EdgeCurve::Straight; n],
                    data_map: None,
                }
            } else if n == 3 {
                let map = FaceMap::affine(coords[0], coords[1] - coords[0], coords[2] - coords[0]);
                Face {
                    vertex_loop: f.vertex_loop.clone(),
                    map,
                    param: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
                    edges: vec![EdgeCurve::Straight; 3],
                    data_map: None,
                }
            } else if n == 4 {
                let map = FaceMap::bilinear(coords[0], coords[1], coords[2], coords[3]);
                Face {
                    vertex_loop: f.vertex_loop.clone(),
                    map,
                    param: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
                    edges: vec![EdgeCurve::Straight; 4],
                    data_map: None,
                }
            } else {
                Face::planar(f.vertex_loop.clone(), &coords, vec![EdgeCurve::Straight; n])?
            };
            // keep the canonical normal on the same side
            let (n_old, _) = {
                let c = f.param.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
                f.map.jacobian_normal(c[0] / n as f64, c[1] / n as f64)?
            };
            let (n_new, _) = {
                let c = nf.param.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
                nf.map.jacobian_normal(c[0] / n as f64, c[1] / n as f64)?
            };
            if n_old.dot(&n_new) <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "face {fi}: proxy chart has the opposite orientation"
                )));
            }
            if self.is_boundary(fi) && !f.map.is_affine() {
                if corners.is_some() {
                    nf.data_map = Some(f.map.clone());
                } else {
                    return Err(Error::InvalidMesh(format!(
                        "face {fi}: boundary proxy needs a unit-square chart"
                    )));
                }
            }
            faces.push(nf);
        }
        PolyMesh::new(
            self.vertices.clone(),
            faces,
            self.cells
                .iter()
                .map(|c| Cell::new(c.faces.clone(), c.material))
                .collect(),
            self.tags.clone(),
        )
    }
}

/// For a quadrilateral whose parameter polygon is the unit square, the loop
/// positions of the corners `(0,0), (1,0), (1,1), (0,1)`.
fn unit_square_corners(param: &[[f64; 2]]) -> Option<[usize; 4]> {
    if param.len() != 4 {
        return None;
    }
    let targets = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let mut idx = [0; 4];
    for (t, target) in targets.iter().enumerate() {
        idx[t] = param.iter().position(|p| {
            (p[0] - target[0]).abs() < 1e-9 && (p[1] - target[1]).abs() < 1e-9
        })?;
    }
    Some(idx)
}

fn seg_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| {
        (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    };
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Signed area of a parameter polygon with straight edges.
pub fn polygon_area(p: &[[f64; 2]]) -> f64 {
    let n = p.len();
    (0..n)
        .map(|i| {
            let (a, b) = (p[i], p[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        / 2.0
}

/// No two non-adjacent edges cross and the area is non-zero.
pub fn simple_polygon(p: &[[f64; 2]]) -> bool {
    let n = p.len();
    if n < 3 || polygon_area(p).abs() < 1e-14 {
        return false;
    }
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if seg_intersect(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cube_size_and_volume() {
        let m = unit_cube_grid(1).unwrap();
        assert_eq!(m.n_cells(), 1);
        assert!((m.mesh_size().unwrap() - 3f64.sqrt()).abs() < 1e-14);
        assert!((m.volume() - 1.0).abs() < 1e-13);
        let m2 = unit_cube_grid(2).unwrap();
        assert!((m2.mesh_size().unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn empty_mesh_is_an_error() {
        let r = PolyMesh::new(vec![], vec![], vec![], vec![]);
        assert!(matches!(r, Err(Error::EmptyMesh)));
    }

    #[test]
    fn simple_polygon_detects_bowtie() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(simple_polygon(&sq));
        let bow = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(!simple_polygon(&bow));
    }

    #[test]
    fn flipped_sign_is_rejected() {
        let mut m = unit_cube_grid(1).unwrap();
        m.cells[0].faces[0].1 = -m.cells[0].faces[0].1;
        let r = PolyMesh::new(m.vertices, m.faces, m.cells, m.tags);
        assert!(r.is_err());
    }

    #[test]
    fn open_cell_is_rejected() {
        let m = unit_cube_grid(1).unwrap();
        let mut cells = m.cells.clone();
        cells[0].faces.pop();
        let r = PolyMesh::new(m.vertices, m.faces, cells, m.tags);
        assert!(r.is_err());
    }

    #[test]
    fn planar_face_chart_hits_vertices() {
        let c = [
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(2.0, 0.0, 1.0),
            Vec3::new(2.0, 1.0, 1.0),
            Vec3::new(0.0, 1.0, 1.0),
        ];
        let f = Face::planar(vec![0, 1, 2, 3], &c, vec![EdgeCurve::Straight; 4]).unwrap();
        for (i, p) in c.iter().enumerate() {
            let [u, v] = f.param[i];
            assert!((f.map.eval(u, v) - p).norm() < 1e-14);
        }
        let (n, _) = f.map.jacobian_normal(0.5, 0.5).unwrap();
        assert!((n - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-14);
    }
}
