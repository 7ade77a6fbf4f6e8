//! Invariant suite over every module, driven by a seeded generator.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{write_atomic, RunConfig};
use crate::darcy::{
    assemble, errors, local_mass_conservation, run, solve, Discretization, ProblemSpec,
};
use crate::face_maps::FaceMap;
use crate::linalg::{sym_eigenvalues, Mat, Vector};
use crate::mesh::io::{from_json, read_mesh, to_json};
use crate::mesh::{
    cornerpoint_layers, curved_top_cube, extruded_annulus, unit_cube_grid, AnnulusBase, BoundaryTag, PolyMesh,
};
use crate::poly::{build_vector_decomp, dim3, ScaledBasis3};
use crate::quadrature::volume_rule_raw;
use crate::vem::{LocalVem, VemOptions};
use crate::{Error, Result, Vec3};

/// Outcome of one named invariant.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct SelfTestReport {
    pub checks: Vec<Check>,
}

impl SelfTestReport {
    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect()
    }

    fn record(&mut self, name: &str, outcome: Result<String>) {
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(e) => (false, e.to_string()),
        };
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }
}

fn violated(msg: String) -> Error {
    Error::Problem(msg)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(violated(msg()))
    }
}

/// One mesh per chart kind and a cell that touches a face of that kind.
pub fn chart_kind_cases() -> Result<Vec<(&'static str, PolyMesh, usize)>> {
    let pick = |m: &PolyMesh, pred: &dyn Fn(&FaceMap) -> bool| {
        m.cells
            .iter()
            .position(|c| c.faces.iter().any(|&(f, _)| pred(&m.faces[f].map)))
            .ok_or_else(|| Error::InvalidMesh("no cell with the requested chart".into()))
    };
    let affine = unit_cube_grid(2)?;
    let bilinear = cornerpoint_layers(2, 1, true)?;
    let cylinder = extruded_annulus(AnnulusBase::Quad, 1, 2, 1, 0.2, 1.0)?;
    let graph = curved_top_cube(2, 0.1)?;
    let ca = pick(&affine, &|m| m.is_affine())?;
    let cb = pick(&bilinear, &|m| matches!(m, FaceMap::Bilinear { .. }))?;
    let cc = pick(&cylinder, &|m| matches!(m, FaceMap::Cylinder { .. }))?;
    let cg = pick(&graph, &|m| matches!(m, FaceMap::GraphSin { .. }))?;
    Ok(vec![
        ("affine", affine, ca),
        ("bilinear", bilinear, cb),
        ("cylinder", cylinder, cc),
        ("graph", graph, cg),
    ])
}

pub fn local_space(mesh: &PolyMesh, cell: usize, k: usize, quad_degree: Option<usize>) -> Result<LocalVem> {
    let decomp = build_vector_decomp(k)?;
    let mut opts = VemOptions::new(k);
    opts.quad_degree = quad_degree;
    LocalVem::new(mesh, cell, &decomp, &opts)
}

/// Largest relative defect of `Π⁰ₖ ∘ interpolation` on random fields of `[P_k]³`.
pub fn projector_defect(lv: &LocalVem, trials: usize, rng: &mut impl Rng) -> f64 {
    let n = 3 * dim3(lv.k());
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = lv.project(&lv.interpolate(|x| lv.eval_field(&c, x)));
        let scale = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let d = p.iter().zip(&c).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        worst = worst.max(d / scale);
    }
    worst
}

/// `‖S D‖ / ‖S‖` for the DOF vectors `D` of the vector monomials.
pub fn stabilization_defect(lv: &LocalVem) -> Result<f64> {
    let s = lv.stabilization(1.0);
    Ok((&s * &lv.dof_of_poly).abs().max() / s.abs().max())
}

/// Smallest eigenvalue of the symmetric `A_h` of every cell, for `ν = 1`.
pub fn min_form_eigenvalue(mesh: &PolyMesh, k: usize) -> Result<f64> {
    let disc = Discretization::new(mesh, &VemOptions::new(k))?;
    let mut lo = f64::INFINITY;
    for lv in &disc.locals {
        let (a, _, _) = lv.local_forms(1.0)?;
        lo = lo.min(sym_eigenvalues(&a)[0] / lv.volume);
    }
    Ok(lo)
}

/// `(min λ / h³, max λ / h³)` over the cells of the scaled-monomial Gram
/// matrices of degree `k`.
pub fn gram_scaling(mesh: &PolyMesh, k: usize) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (c, cell) in mesh.cells.iter().enumerate() {
        let basis = ScaledBasis3::new(cell.barycenter, cell.diameter, k);
        let rule = volume_rule_raw(mesh, c, 2 * k + 4)?;
        let mut g = Mat::zeros(basis.len(), basis.len());
        for (x, &w) in rule.points.iter().zip(&rule.weights) {
            let b = Vector::from_vec(basis.eval(x));
            g += w * &b * b.transpose();
        }
        let ev = sym_eigenvalues(&g);
        let h3 = cell.diameter.powi(3);
        lo = lo.min(ev[0] / h3);
        hi = hi.max(ev[ev.len() - 1] / h3);
    }
    Ok((lo, hi))
}

/// Manufactured problem whose solution lies in the discrete spaces: `p ∈
/// P_{k-1}`, constant `q`, body force `g = q + ∇p`, all faces natural.
pub fn patch_problem(k: usize) -> ProblemSpec {
    let q0 = Vec3::new(0.3, -0.7, 0.5);
    let (p, grad): (Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>, Arc<dyn Fn(&Vec3) -> Vec3 + Send + Sync>) = match k {
        1 => (Arc::new(|_| 1.5), Arc::new(|_| Vec3::zeros())),
        2 => (
            Arc::new(|x| 1.0 + x.x - 2.0 * x.y + 0.5 * x.z),
            Arc::new(|_| Vec3::new(1.0, -2.0, 0.5)),
        ),
        _ => (
            Arc::new(|x| x.x * x.y - x.z * x.z + 0.3 * x.x),
            Arc::new(|x| Vec3::new(x.y + 0.3, x.x, -2.0 * x.z)),
        ),
    };
    let mut spec = ProblemSpec::manufactured(k, p.clone(), Arc::new(|_| Vec3::zeros()), Arc::new(|_| 0.0));
    spec.pressure_bc = p.clone();
    spec.flux_bc = Arc::new(move |_| q0);
    spec.source = Arc::new(|_| 0.0);
    spec.body_force = Some(Arc::new(move |x| q0 + grad(x)));
    spec.exact = Some(crate::darcy::Exact {
        p,
        q: Arc::new(move |_| q0),
    });
    spec
}

/// Straight cube with every boundary face natural.
pub fn natural_cube(n: usize) -> Result<PolyMesh> {
    let m = unit_cube_grid(n)?;
    let tags = m
        .tags
        .iter()
        .map(|&t| if t == BoundaryTag::Interior { t } else { BoundaryTag::Natural })
        .collect();
    PolyMesh::new(m.vertices, m.faces, m.cells, tags)
}

/// `(e_v, e_p)` of the patch test on a straight `n³` cube.
pub fn patch_test(k: usize, n: usize) -> Result<(f64, f64)> {
    let mesh = natural_cube(n)?;
    let spec = patch_problem(k);
    let (disc, sol) = run(&mesh, &spec)?;
    let e = errors(&mesh, &disc, &spec, &sol)?;
    Ok((e.e_v, e.e_p))
}

fn check_generators() -> Result<String> {
    let cube = unit_cube_grid(2)?;
    ensure((cube.volume() - 1.0).abs() < 1e-13, || "unit cube volume".into())?;
    let top = curved_top_cube(2, 0.1)?;
    let exact = 1.0 - 0.2 / std::f64::consts::PI;
    ensure((top.volume() - exact).abs() < 1e-10, || format!("curved-top volume {}", top.volume()))?;
    let ann = extruded_annulus(AnnulusBase::Tria, 1, 2, 1, 0.2, 1.0)?;
    let half = 0.5 * std::f64::consts::PI * 0.96;
    ensure((ann.volume() - half).abs() < 1e-10, || format!("annulus volume {}", ann.volume()))?;
    let cp = cornerpoint_layers(2, 1, true)?;
    ensure((cp.volume() - 1.0).abs() < 1e-12, || format!("corner-point volume {}", cp.volume()))?;
    Ok("4 families".into())
}

fn check_json() -> Result<String> {
    let m = curved_top_cube(2, 0.1)?;
    let back = from_json(&to_json(&m)?)?;
    ensure(back == m, || "round trip changed the mesh".into())?;
    Ok(format!("{} faces", m.n_faces()))
}

/// Corrupts a valid mesh in three ways; each must be rejected.
fn check_corruption() -> Result<String> {
    let m = unit_cube_grid(2)?;
    let text = to_json(&m)?;
    let mut v: serde_json::Value = serde_json::from_str(&text)?;
    let mut bad = Vec::new();
    // flipped orientation sign
    let mut a = v.clone();
    let sign = &mut a["cells"][0]["faces"][0][1];
    *sign = serde_json::json!(-sign.as_i64().unwrap_or(1));
    bad.push(("flipped sign", a));
    // dangling face reference
    let mut b = v.clone();
    b["cells"][1]["faces"][2][0] = serde_json::json!(10_000);
    bad.push(("dangling face", b));
    // missing vertex
    if let Some(vs) = v["vertices"].as_array_mut() {
        vs.truncate(5);
    }
    bad.push(("truncated vertices", v));
    for (what, value) in bad {
        if from_json(&value.to_string()).is_ok() {
            return Err(violated(format!("{what} was accepted")));
        }
    }
    Ok("3 corruptions rejected".into())
}

fn check_mesh_file(path: &std::path::Path) -> Result<String> {
    let m = read_mesh(path)?;
    ensure(m.volume() > 0.0, || "non-positive volume".into())?;
    Ok(format!("{} cells", m.n_cells()))
}

fn sample_maps() -> Vec<FaceMap> {
    use std::f64::consts::PI;
    vec![
        FaceMap::affine(Vec3::new(0.1, 0.0, 0.2), Vec3::new(1.0, 0.2, 0.0), Vec3::new(0.0, 0.5, 1.0)),
        FaceMap::bilinear(
            Vec3::zeros(),
            Vec3::new(1.0, 0.0, 0.1),
            Vec3::new(1.0, 1.0, 0.3),
            Vec3::new(0.0, 1.0, -0.1),
        ),
        FaceMap::Cylinder {
            radius: 0.6,
            theta0: 0.2,
            theta1: 0.2 + PI / 3.0,
            z0: 0.0,
            z1: 0.5,
        },
        FaceMap::GraphSin {
            x0: 0.25,
            dx: 0.25,
            y0: 0.0,
            dy: 0.25,
            level: 0.5,
            amplitude: 0.1,
        },
        FaceMap::GraphStrip {
            x0: 0.5,
            dx: 0.25,
            y0: 0.0,
            lo: 0.25,
            hi: 0.5,
            amplitude: 0.1,
        },
    ]
}

fn check_chart_derivatives(rng: &mut ChaCha8Rng) -> Result<String> {
    let e = 1e-6;
    for map in sample_maps() {
        for _ in 0..20 {
            let (u, v) = (rng.random_range(0.05..0.95), rng.random_range(0.05..0.95));
            let (du, dv) = map.derivatives(u, v);
            let fu = (map.eval(u + e, v) - map.eval(u - e, v)) / (2.0 * e);
            let fv = (map.eval(u, v + e) - map.eval(u, v - e)) / (2.0 * e);
            ensure((du - fu).norm() + (dv - fv).norm() < 1e-7 * map.scale().max(1.0), || {
                format!("{} at ({u}, {v})", map.kind_name())
            })?;
            let (uu, vv) = map.invert(&map.eval(u, v))?;
            ensure((uu - u).abs() + (vv - v).abs() < 1e-10, || {
                format!("{} inversion at ({u}, {v})", map.kind_name())
            })?;
        }
    }
    Ok("5 chart kinds × 20 points".into())
}

fn check_gram() -> Result<String> {
    let m = curved_top_cube(2, 0.1)?;
    let (lo, hi) = gram_scaling(&m, 3)?;
    ensure(lo > 0.0, || format!("smallest eigenvalue {lo:e}"))?;
    Ok(format!("λ/h³ in [{lo:.2e}, {hi:.2e}]"))
}

fn check_monomials(rng: &mut ChaCha8Rng) -> Result<String> {
    let m = unit_cube_grid(2)?;
    for _ in 0..20 {
        let c = rng.random_range(0..m.n_cells());
        let e = [rng.random_range(0..4), rng.random_range(0..4), rng.random_range(0..4)];
        let r = volume_rule_raw(&m, c, 9)?;
        let pts: Vec<Vec3> = m.cells[c].faces.iter().flat_map(|&(f, _)| m.face_coords(f)).collect();
        let lo = pts.iter().fold(Vec3::repeat(f64::MAX), |a, p| a.inf(p));
        let hi = pts.iter().fold(Vec3::repeat(f64::MIN), |a, p| a.sup(p));
        let exact: f64 = (0..3)
            .map(|d| {
                let p = e[d] + 1;
                (hi[d].powi(p) - lo[d].powi(p)) / p as f64
            })
            .product();
        let v = r.integrate(|x| x.x.powi(e[0]) * x.y.powi(e[1]) * x.z.powi(e[2]));
        ensure((v - exact).abs() <= 1e-13, || format!("x^{e:?} on cell {c}: {v} vs {exact}"))?;
    }
    Ok("20 random monomials".into())
}

fn check_compression() -> Result<String> {
    let c = super::quadcheck::compression_demo()?;
    ensure(
        c.compressed && c.compressed_points == 10 && c.min_weight > 0.0 && c.moment_residual <= 1e-12,
        || format!("{:?}", c),
    )?;
    Ok(format!("{} → {}", c.raw_points, c.compressed_points))
}

fn check_projector(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String> {
    let m = unit_cube_grid(2)?;
    let mut worst: f64 = 0.0;
    for &k in &cfg.k {
        let lv = local_space(&m, 5, k, cfg.quad_degree)?;
        let d = projector_defect(&lv, 20, rng);
        ensure(d <= 1e-9, || format!("k={k}: defect {d:.2e}"))?;
        worst = worst.max(d);
    }
    Ok(format!("defect {worst:.1e}"))
}

fn check_stabilization(cfg: &RunConfig) -> Result<String> {
    let m = unit_cube_grid(2)?;
    for &k in &cfg.k {
        let lv = local_space(&m, 2, k, cfg.quad_degree)?;
        let d = stabilization_defect(&lv)?;
        ensure(d <= 1e-10, || format!("k={k}: ‖S D‖/‖S‖ = {d:.2e}"))?;
    }
    Ok("S vanishes on polynomials".into())
}

fn check_spd(cfg: &RunConfig) -> Result<String> {
    let meshes = [
        unit_cube_grid(2)?,
        curved_top_cube(2, 0.1)?,
        extruded_annulus(AnnulusBase::Quad, 1, 2, 1, 0.2, 1.0)?,
        cornerpoint_layers(2, 1, true)?,
    ];
    let mut lo = f64::INFINITY;
    for m in &meshes {
        for &k in &cfg.k {
            lo = lo.min(min_form_eigenvalue(m, k)?);
        }
    }
    ensure(lo > 0.0, || format!("λ_min / |P| = {lo:e}"))?;
    Ok(format!("λ_min / |P| ≥ {lo:.2e}"))
}

fn check_patch(cfg: &RunConfig) -> Result<String> {
    for &k in &cfg.k {
        let (ev, ep) = patch_test(k, 2)?;
        ensure(ev <= 1e-9 && ep <= 1e-9, || format!("k={k}: e_v {ev:.2e}, e_p {ep:.2e}"))?;
    }
    Ok(format!("k = {:?}", cfg.k))
}

/// Symmetry, flux continuity, essential values and mass balance on small curved runs.
fn check_system(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String> {
    let m = curved_top_cube(2, 0.1)?;
    let k = cfg.k.iter().copied().max().unwrap_or(2).min(2);
    let spec = super::curved_top_problem(k);
    let disc = Discretization::new(&m, &spec.options)?;
    let sys = assemble(&m, &disc, &spec)?;
    let map: std::collections::HashMap<(usize, usize), f64> = sys.a.iter().map(|&(i, j, v)| ((i, j), v)).collect();
    for (&(i, j), &v) in &map {
        ensure(map.get(&(j, i)).copied() == Some(v), || format!("A[{i},{j}] ≠ A[{j},{i}]"))?;
    }
    let sol = solve(&sys)?;
    for &(i, v) in &sys.essential {
        ensure(sol.velocity[i] == v, || format!("essential DOF {i}"))?;
    }
    // v·n seen from both sides of random interior faces
    let nk2 = disc.layout.n_face;
    let fc = m.face_cells();
    for _ in 0..10 {
        let f = sys.interior_faces[rng.random_range(0..sys.interior_faces.len())];
        let coeffs: Vec<Vector> = fc[f]
            .iter()
            .map(|&(c, _)| {
                let lv = &disc.locals[c];
                let j = lv.faces.iter().position(|lf| lf.face == f).expect("face in cell");
                let local = disc.gather(c, &sol.velocity);
                lv.face_flux_coefficients(j, &local.as_slice()[j * nk2..(j + 1) * nk2])
            })
            .collect();
        let gap = (&coeffs[0] + &coeffs[1]).norm();
        ensure(gap <= 1e-12 * coeffs[0].norm().max(1.0), || format!("face {f}: flux gap {gap:e}"))?;
    }
    let mb = local_mass_conservation(&m, &disc, &spec, &sol)?;
    ensure(mb.relative() <= 1e-9, || format!("mass balance {:.2e}", mb.relative()))?;
    Ok(format!("residual {:.1e}, mass {:.1e}", sol.residual, mb.relative()))
}

pub fn run_suite(cfg: &RunConfig) -> Result<SelfTestReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut r = SelfTestReport::default();
    r.record("mesh.generators", check_generators());
    r.record("mesh.json_round_trip", check_json());
    r.record("mesh.corruption_detected", check_corruption());
    if let Some(path) = &cfg.mesh_file {
        r.record("mesh.file", check_mesh_file(path));
    }
    r.record("face_maps.derivatives_and_inversion", check_chart_derivatives(&mut rng));
    r.record("poly.gram_positive", check_gram());
    r.record("quadrature.monomials_exact", check_monomials(&mut rng));
    r.record("quadrature.compression", check_compression());
    r.record("vem.projector_consistency", check_projector(cfg, &mut rng));
    r.record("vem.stabilization_kernel", check_stabilization(cfg));
    r.record("vem.forms_spd", check_spd(cfg));
    r.record("darcy.patch_test", check_patch(cfg));
    r.record("darcy.system", check_system(cfg, &mut rng));

    let mut text = String::from("invariant,passed,detail\n");
    for c in &r.checks {
        text += &format!("{},{},{}\n", c.name, c.passed, c.detail.replace([',', '\n'], ";"));
    }
    write_atomic(&cfg.out, "selftest.csv", &text)?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Subcommand;

    fn cfg(dir: &std::path::Path) -> RunConfig {
        let mut c = RunConfig::defaults(Subcommand::Selftest);
        c.out = dir.to_path_buf();
        c
    }

    #[test]
    fn default_suite_passes() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_suite(&cfg(dir.path())).unwrap();
        assert!(r.failures().is_empty(), "{:?}", r.failures());
    }

    #[test]
    fn corrupted_file_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{\"vertices\": [], \"faces\": [], \"cells\": []}").unwrap();
        let mut c = cfg(dir.path());
        c.mesh_file = Some(path);
        let r = run_suite(&c).unwrap();
        let f = r.failures();
        assert_eq!(f.len(), 1, "{f:?}");
        assert!(f[0].starts_with("mesh.file"));
    }

    #[test]
    fn reduced_degree_breaks_consistency() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = cfg(dir.path());
        c.k = vec![2];
        c.quad_degree = Some(2);
        let r = run_suite(&c).unwrap();
        assert!(r.failures().iter().any(|f| f.starts_with("vem.projector_consistency")));
    }
}
