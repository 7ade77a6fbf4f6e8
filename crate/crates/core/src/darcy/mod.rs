//! Global assembly and solution of the mixed Darcy problem
//!
//! ```text
//! μ κ⁻¹ q + ∇p = g,   div q = f   in Ω,
//! p = p̄ on the natural boundary,   q·n = q̄·n on the essential boundary.
//! ```
//!
//! Unknowns: one D1 block per face in the face's canonical orientation, the
//! internal DOFs of each cell, and `π_{k-1}` pressure coefficients per cell.

mod solver;

use std::sync::Arc;

use rayon::prelude::*;

use crate::linalg::{spd_inverse, Mat, Vector};
use crate::mesh::{BoundaryTag, PolyMesh};
use crate::poly::{build_vector_decomp, dim3};
use crate::quadrature::volume_rule_raw;
use crate::vem::{DofLayout, LocalVem, VemOptions};
use crate::{Error, Result, Vec3};

pub use solver::{solve, solve_with, Solution, SolverKind};

pub type ScalarField = Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(&Vec3) -> Vec3 + Send + Sync>;

/// Exact solution of a manufactured problem.
#[derive(Clone)]
pub struct Exact {
    pub p: ScalarField,
    pub q: VectorField,
}

/// Problem data.
#[derive(Clone)]
pub struct ProblemSpec {
    pub options: VemOptions,
    /// Permeability per material id.
    pub permeability: Vec<f64>,
    pub viscosity: f64,
    /// `p̄` on natural faces.
    pub pressure_bc: ScalarField,
    /// `q̄`; the prescribed flux on essential faces is `q̄·n`.
    pub flux_bc: VectorField,
    /// `f`.
    pub source: ScalarField,
    /// `g`.
    pub body_force: Option<VectorField>,
    pub exact: Option<Exact>,
}

impl ProblemSpec {
    /// Manufactured problem for `κ = μ = 1`, `q = -∇p`, `g = 0`, `f = -Δp`,
    /// with boundary data taken from the exact solution.
    pub fn manufactured(
        k: usize,
        p: ScalarField,
        grad_p: VectorField,
        laplacian_p: ScalarField,
    ) -> ProblemSpec {
        let q: VectorField = Arc::new(move |x| -grad_p(x));
        ProblemSpec {
            options: VemOptions::new(k),
            permeability: vec![1.0],
            viscosity: 1.0,
            pressure_bc: p.clone(),
            flux_bc: q.clone(),
            source: Arc::new(move |x| -laplacian_p(x)),
            body_force: None,
            exact: Some(Exact { p, q }),
        }
    }

    pub fn k(&self) -> usize {
        self.options.k
    }

    /// `ν = μ / κ` on a material.
    pub fn nu(&self, material: usize) -> Result<f64> {
        let kappa = self.permeability.get(material).copied().ok_or_else(|| {
            Error::Problem(format!("no permeability for material {material}"))
        })?;
        if !(kappa > 0.0) || !(self.viscosity > 0.0) {
            return Err(Error::Problem("permeability and viscosity must be positive".into()));
        }
        Ok(self.viscosity / kappa)
    }
}

/// Local spaces of all cells plus the global numbering.
pub struct Discretization {
    pub layout: DofLayout,
    pub locals: Vec<LocalVem>,
    pub n_faces: usize,
    pub n_velocity: usize,
    pub n_pressure: usize,
}

impl Discretization {
    pub fn new(mesh: &PolyMesh, opts: &VemOptions) -> Result<Discretization> {
        let decomp = build_vector_decomp(opts.k)?;
        let locals = (0..mesh.n_cells())
            .into_par_iter()
            .map(|c| LocalVem::new(mesh, c, &decomp, opts))
            .collect::<Result<Vec<_>>>()?;
        let layout = DofLayout::new(opts.k);
        let n_faces = mesh.n_faces();
        Ok(Discretization {
            layout,
            locals,
            n_faces,
            n_velocity: n_faces * layout.n_face + mesh.n_cells() * layout.n_internal(),
            n_pressure: mesh.n_cells() * layout.n_pressure(),
        })
    }

    pub fn k(&self) -> usize {
        self.layout.k
    }

    /// Global index and sign of every local velocity DOF of cell `c`.
    pub fn local_to_global(&self, c: usize) -> Vec<(usize, f64)> {
        let lv = &self.locals[c];
        let nk2 = self.layout.n_face;
        let mut out = Vec::with_capacity(lv.ndof());
        for lf in &lv.faces {
            for a in 0..nk2 {
                out.push((lf.face * nk2 + a, lf.sign));
            }
        }
        let base = self.n_faces * nk2 + c * self.layout.n_internal();
        for i in 0..self.layout.n_internal() {
            out.push((base + i, 1.0));
        }
        out
    }

    pub fn pressure_offset(&self, c: usize) -> usize {
        c * self.layout.n_pressure()
    }

    /// Local DOF vector of cell `c` from a global velocity vector.
    pub fn gather(&self, c: usize, velocity: &[f64]) -> Vector {
        Vector::from_iterator(
            self.locals[c].ndof(),
            self.local_to_global(c).into_iter().map(|(g, s)| s * velocity[g]),
        )
    }

    /// Global interpolant of a vector field.
    pub fn interpolate(&self, v: &(dyn Fn(&Vec3) -> Vec3 + Sync)) -> Vec<f64> {
        let mut out = vec![0.0; self.n_velocity];
        let parts: Vec<Vector> = self.locals.par_iter().map(|lv| lv.interpolate(v)).collect();
        for (c, d) in parts.iter().enumerate() {
            for (i, (g, s)) in self.local_to_global(c).into_iter().enumerate() {
                out[g] = s * d[i];
            }
        }
        out
    }
}

/// Local contributions of one cell, in the cell's outward orientation.
#[derive(Debug, Clone)]
pub struct CellBlock {
    /// `A_h^P`, symmetric.
    pub a: Mat,
    /// `B^P`, one row per pressure coefficient.
    pub b: Mat,
    /// Velocity load.
    pub g: Vector,
    /// Pressure load `-∫ f m_γ`.
    pub f: Vector,
    /// `∫_P m_γ`.
    pub mean: Vector,
}

/// `[[A, Bᵀ], [B, 0]] (q, p) = (G, F)` with essential constraints on `q`.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub n_velocity: usize,
    pub n_pressure: usize,
    /// Velocity-velocity entries (duplicates merged).
    pub a: Vec<(usize, usize, f64)>,
    /// Pressure-velocity entries: `(pressure row, velocity column, value)`.
    pub b: Vec<(usize, usize, f64)>,
    pub g: Vec<f64>,
    pub f: Vec<f64>,
    /// Prescribed velocity DOFs.
    pub essential: Vec<(usize, f64)>,
    /// Mean-pressure constraint `cᵀ p = value`, used when no face is natural.
    pub gauge: Option<(Vec<f64>, f64)>,
    pub cells: Vec<CellBlock>,
    /// `local_to_global` of every cell.
    pub maps: Vec<Vec<(usize, f64)>>,
    /// Interior faces (the only ones shared by two cells).
    pub interior_faces: Vec<usize>,
    /// D1 DOFs per face.
    pub nk2: usize,
}

pub(crate) fn merge(mut t: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    t.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(t.len());
    for (i, j, v) in t {
        match out.last_mut() {
            Some(last) if last.0 == i && last.1 == j => last.2 += v,
            _ => out.push((i, j, v)),
        }
    }
    out
}

/// Assembles the global system.
pub fn assemble(mesh: &PolyMesh, disc: &Discretization, spec: &ProblemSpec) -> Result<SaddleSystem> {
    let k = disc.k();
    if spec.k() != k {
        return Err(Error::Problem(format!("spec has k = {} but the discretization k = {k}", spec.k())));
    }
    let pm = dim3(k - 1);
    let nk2 = disc.layout.n_face;

    let cells = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| -> Result<CellBlock> {
            let lv = &disc.locals[c];
            let nu = spec.nu(mesh.cells[c].material)?;
            let (a, b, _) = lv.local_forms(nu)?;
            // volume loads
            let mut fmom = Vector::zeros(pm);
            let mut mean = Vector::zeros(pm);
            let pk = dim3(k);
            let mut gvec = Vector::zeros(3 * pk);
            let mut buf = vec![0.0; lv.basis.len()];
            for (x, &w) in lv.volume_rule.points.iter().zip(&lv.volume_rule.weights) {
                lv.basis.eval_into(x, &mut buf);
                let fx = (spec.source)(x);
                for r in 0..pm {
                    fmom[r] += w * fx * buf[r];
                    mean[r] += w * buf[r];
                }
                if let Some(g) = &spec.body_force {
                    let gx = g(x);
                    for comp in 0..3 {
                        for al in 0..pk {
                            gvec[comp * pk + al] += w * gx[comp] * buf[al];
                        }
                    }
                }
            }
            let mut gloc = lv.projector.transpose() * gvec;
            // natural boundary term -(p̄, v·n)
            for (j, lf) in lv.faces.iter().enumerate() {
                if mesh.tags[lf.face] != BoundaryTag::Natural {
                    continue;
                }
                let chart = mesh.faces[lf.face].data_chart();
                let mut r = Vector::zeros(nk2);
                for i in 0..lf.rule.len() {
                    let [u, v] = lf.rule.param[i];
                    let pb = (spec.pressure_bc)(&chart.eval(u, v));
                    let wj = lf.rule.weights[i] * lf.rule.jac[i];
                    for a in 0..nk2 {
                        r[a] += wj * pb * lf.param_basis[i][a];
                    }
                }
                let contrib = -(lf.gram_inv.transpose() * r);
                for a in 0..nk2 {
                    gloc[j * nk2 + a] += contrib[a];
                }
            }
            Ok(CellBlock {
                a,
                b,
                g: gloc,
                f: -fmom,
                mean,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let maps: Vec<Vec<(usize, f64)>> = (0..mesh.n_cells()).map(|c| disc.local_to_global(c)).collect();

    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut g = vec![0.0; disc.n_velocity];
    let mut f = vec![0.0; disc.n_pressure];
    let mut gauge_row = vec![0.0; disc.n_pressure];
    for (c, blk) in cells.iter().enumerate() {
        let map = &maps[c];
        let poff = disc.pressure_offset(c);
        for (i, &(gi, si)) in map.iter().enumerate() {
            for (j, &(gj, sj)) in map.iter().enumerate() {
                let v = si * sj * blk.a[(i, j)];
                if v != 0.0 {
                    a.push((gi, gj, v));
                }
            }
            for r in 0..pm {
                let v = si * blk.b[(r, i)];
                if v != 0.0 {
                    b.push((poff + r, gi, v));
                }
            }
            g[gi] += si * blk.g[i];
        }
        for r in 0..pm {
            f[poff + r] += blk.f[r];
            gauge_row[poff + r] += blk.mean[r];
        }
    }
    // local blocks are exactly symmetric and mirrored entries are summed in
    // the same cell order, so the merged matrix is symmetric bit for bit
    let a = merge(a);
    let b = merge(b);

    // essential faces
    let face_cells = mesh.face_cells();
    let mut essential = Vec::new();
    for (fi, tag) in mesh.tags.iter().enumerate() {
        if *tag != BoundaryTag::Essential {
            continue;
        }
        let (c, _) = face_cells[fi][0];
        let lv = &disc.locals[c];
        let j = lv.faces.iter().position(|lf| lf.face == fi).ok_or_else(|| {
            Error::InvalidMesh(format!("face {fi} missing from cell {c}"))
        })?;
        let lf = &lv.faces[j];
        let data = mesh.faces[fi].data_map.as_ref();
        let mut d = vec![0.0; nk2];
        for i in 0..lf.rule.len() {
            let [u, v] = lf.rule.param[i];
            let (x, n) = match data {
                Some(m) => (m.eval(u, v), m.jacobian_normal(u, v)?.0),
                None => (lf.rule.points[i], lf.rule.normals[i]),
            };
            let qn = (spec.flux_bc)(&x).dot(&n);
            for a in 0..nk2 {
                d[a] += lf.moment_weights[i] * qn * lf.param_basis[i][a];
            }
        }
        for (a, v) in d.into_iter().enumerate() {
            essential.push((fi * nk2 + a, v));
        }
    }

    let has_natural = mesh.tags.iter().any(|&t| t == BoundaryTag::Natural);
    let gauge = if has_natural {
        None
    } else {
        let value = match &spec.exact {
            Some(ex) => (0..mesh.n_cells())
                .map(|c| {
                    let lv = &disc.locals[c];
                    lv.volume_rule.integrate(|x| (ex.p)(x))
                })
                .sum(),
            None => 0.0,
        };
        Some((gauge_row, value))
    };

    Ok(SaddleSystem {
        n_velocity: disc.n_velocity,
        n_pressure: disc.n_pressure,
        a,
        b,
        g,
        f,
        essential,
        gauge,
        cells,
        maps,
        interior_faces: (0..mesh.n_faces()).filter(|&f| mesh.tags[f] == BoundaryTag::Interior).collect(),
        nk2,
    })
}

/// Builds the local spaces, assembles and solves.
pub fn run(mesh: &PolyMesh, spec: &ProblemSpec) -> Result<(Discretization, Solution)> {
    run_with(mesh, spec, SolverKind::Hybrid)
}

pub fn run_with(mesh: &PolyMesh, spec: &ProblemSpec, kind: SolverKind) -> Result<(Discretization, Solution)> {
    let disc = Discretization::new(mesh, &spec.options)?;
    let sys = assemble(mesh, &disc, spec)?;
    let sol = solve_with(&sys, kind)?;
    Ok((disc, sol))
}

/// `e_v = (Σ ‖Π⁰ₖ q_h - q‖²)^½` and `e_p = (Σ ‖p_h - p‖²)^½`, with per-cell squares.
///
/// `e_p_proj` measures `p_h` against the cellwise `L²` projection of `p` onto
/// `P_{k-1}`; it superconverges while `e_p` is limited by the `P_{k-1}` best
/// approximation to `O(h^k)`.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub e_v: f64,
    pub e_p: f64,
    pub e_p_proj: f64,
    pub per_cell_v: Vec<f64>,
    pub per_cell_p: Vec<f64>,
}

pub fn errors(mesh: &PolyMesh, disc: &Discretization, spec: &ProblemSpec, sol: &Solution) -> Result<ErrorReport> {
    let ex = spec
        .exact
        .as_ref()
        .ok_or_else(|| Error::Problem("no manufactured solution".into()))?;
    let k = disc.k();
    let pm = dim3(k - 1);
    let per = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| -> Result<(f64, f64, f64)> {
            let lv = &disc.locals[c];
            let rule = volume_rule_raw(mesh, c, 2 * k + 4)?;
            let coeffs = lv.project(&disc.gather(c, &sol.velocity));
            let poff = disc.pressure_offset(c);
            let pc = &sol.pressure[poff..poff + pm];
            let mut ev = 0.0;
            let mut ep = 0.0;
            let mut gram = Mat::zeros(pm, pm);
            let mut mom = Vector::zeros(pm);
            let mut buf = vec![0.0; lv.basis.len()];
            for (x, &w) in rule.points.iter().zip(&rule.weights) {
                let px = (ex.p)(x);
                ev += w * (lv.eval_field(coeffs.as_slice(), x) - (ex.q)(x)).norm_squared();
                ep += w * (lv.eval_pressure(pc, x) - px).powi(2);
                lv.basis.eval_into(x, &mut buf);
                for a in 0..pm {
                    mom[a] += w * px * buf[a];
                    for b in 0..pm {
                        gram[(a, b)] += w * buf[a] * buf[b];
                    }
                }
            }
            let proj = spd_inverse(&gram, "pressure Gram matrix")? * mom;
            let d = Vector::from_column_slice(pc) - proj;
            let epp = (d.transpose() * &gram * &d)[(0, 0)].max(0.0);
            Ok((ev, ep, epp))
        })
        .collect::<Result<Vec<_>>>()?;
    let per_cell_v: Vec<f64> = per.iter().map(|p| p.0).collect();
    let per_cell_p: Vec<f64> = per.iter().map(|p| p.1).collect();
    Ok(ErrorReport {
        e_v: per_cell_v.iter().sum::<f64>().max(0.0).sqrt(),
        e_p: per_cell_p.iter().sum::<f64>().max(0.0).sqrt(),
        e_p_proj: per.iter().map(|p| p.2).sum::<f64>().sqrt(),
        per_cell_v,
        per_cell_p,
    })
}

/// Per-cell `‖div q_h - Π_{k-1} (f + λ)‖₀`.
///
/// `λ` is the mean-pressure multiplier of an all-essential problem (zero
/// otherwise). It is the constant that the multiplier adds to the source to
/// make the boundary fluxes and `f` compatible, so the discrete equation enforced
/// is `div q_h = Π_{k-1}(f + λ)`.
#[derive(Debug, Clone)]
pub struct MassBalance {
    pub per_cell: Vec<f64>,
    pub source_shift: f64,
    /// `‖f‖₀` over the domain.
    pub source_norm: f64,
}

impl MassBalance {
    pub fn max(&self) -> f64 {
        self.per_cell.iter().copied().fold(0.0, f64::max)
    }

    /// Largest cell residual, relative to `‖f‖₀` when `f ≠ 0`.
    pub fn relative(&self) -> f64 {
        if self.source_norm > 0.0 {
            self.max() / self.source_norm
        } else {
            self.max()
        }
    }
}

pub fn local_mass_conservation(
    mesh: &PolyMesh,
    disc: &Discretization,
    spec: &ProblemSpec,
    sol: &Solution,
) -> Result<MassBalance> {
    let pm = dim3(disc.k() - 1);
    let shift = sol.multiplier.unwrap_or(0.0);
    let per = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| -> Result<(f64, f64)> {
            let lv = &disc.locals[c];
            let mu = &lv.div_moments * disc.gather(c, &sol.velocity);
            let mut fm = Vector::zeros(pm);
            let mut fnorm = 0.0;
            let mut buf = vec![0.0; lv.basis.len()];
            for (x, &w) in lv.volume_rule.points.iter().zip(&lv.volume_rule.weights) {
                lv.basis.eval_into(x, &mut buf);
                let fx = (spec.source)(x);
                fnorm += w * fx * fx;
                for r in 0..pm {
                    fm[r] += w * (fx + shift) * buf[r];
                }
            }
            let minv: Mat = spd_inverse(&lv.mass_p, "pressure Gram matrix")?;
            let d = &minv * (mu - fm);
            let res = (d.transpose() * &lv.mass_p * &d)[(0, 0)].max(0.0).sqrt();
            Ok((res, fnorm))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MassBalance {
        per_cell: per.iter().map(|p| p.0).collect(),
        source_shift: shift,
        source_norm: per.iter().map(|p| p.1).sum::<f64>().sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{curved_top_cube, unit_cube_grid};

    fn zero_spec(k: usize) -> ProblemSpec {
        ProblemSpec {
            options: VemOptions::new(k),
            permeability: vec![1.0],
            viscosity: 1.0,
            pressure_bc: Arc::new(|_| 0.0),
            flux_bc: Arc::new(|_| Vec3::zeros()),
            source: Arc::new(|_| 0.0),
            body_force: None,
            exact: None,
        }
    }

    fn all_natural(n: usize) -> PolyMesh {
        let m = unit_cube_grid(n).unwrap();
        let tags = m
            .tags
            .iter()
            .map(|&t| if t == BoundaryTag::Interior { t } else { BoundaryTag::Natural })
            .collect();
        PolyMesh::new(m.vertices, m.faces, m.cells, tags).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let m = all_natural(1);
        let (_, sol) = run(&m, &zero_spec(1)).unwrap();
        assert!(sol.velocity.iter().all(|v| v.abs() < 1e-14));
        assert!(sol.pressure.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn patch_test_linear_pressure() {
        let m = all_natural(2);
        let mut spec = zero_spec(2);
        spec.pressure_bc = Arc::new(|x| x.x);
        spec.exact = Some(Exact {
            p: Arc::new(|x| x.x),
            q: Arc::new(|_| Vec3::new(-1.0, 0.0, 0.0)),
        });
        let (disc, sol) = run(&m, &spec).unwrap();
        let e = errors(&m, &disc, &spec, &sol).unwrap();
        assert!(e.e_v < 1e-10 && e.e_p < 1e-10, "{e:?}");
        assert!(sol.residual <= 1e-10);
    }

    #[test]
    fn essential_values_are_exact_and_gauge_is_used() {
        let m = unit_cube_grid(2).unwrap();
        let mut spec = zero_spec(2);
        spec.flux_bc = Arc::new(|_| Vec3::new(1.0, 2.0, -1.0));
        spec.exact = Some(Exact {
            p: Arc::new(|x| -(x.x + 2.0 * x.y - x.z)),
            q: Arc::new(|_| Vec3::new(1.0, 2.0, -1.0)),
        });
        let disc = Discretization::new(&m, &spec.options).unwrap();
        let sys = assemble(&m, &disc, &spec).unwrap();
        assert!(sys.gauge.is_some());
        let sol = solve(&sys).unwrap();
        for &(i, v) in &sys.essential {
            assert_eq!(sol.velocity[i], v);
        }
        let e = errors(&m, &disc, &spec, &sol).unwrap();
        assert!(e.e_v < 1e-10 && e.e_p < 1e-10, "{e:?}");
        let mb = local_mass_conservation(&m, &disc, &spec, &sol).unwrap();
        assert!(mb.max() < 1e-12);
    }

    #[test]
    fn assembled_a_is_symmetric() {
        let m = unit_cube_grid(2).unwrap();
        let spec = zero_spec(2);
        let disc = Discretization::new(&m, &spec.options).unwrap();
        let sys = assemble(&m, &disc, &spec).unwrap();
        let map: std::collections::HashMap<(usize, usize), f64> =
            sys.a.iter().map(|&(i, j, v)| ((i, j), v)).collect();
        for (&(i, j), &v) in &map {
            assert_eq!(map.get(&(j, i)).copied(), Some(v));
        }
    }

    #[test]
    fn missing_material_is_an_error() {
        let m = unit_cube_grid(1).unwrap();
        let mut spec = zero_spec(1);
        spec.permeability.clear();
        let disc = Discretization::new(&m, &spec.options).unwrap();
        assert!(assemble(&m, &disc, &spec).is_err());
    }

    fn example1_like(k: usize) -> ProblemSpec {
        use std::f64::consts::PI;
        let s = |x: &Vec3| x.z + 0.1 * (PI * x.x).sin() - 1.0;
        ProblemSpec::manufactured(
            k,
            Arc::new(move |x| s(x).powi(2)),
            Arc::new(move |x| 2.0 * s(x) * Vec3::new(0.1 * PI * (PI * x.x).cos(), 0.0, 1.0)),
            Arc::new(move |x| {
                2.0 * ((0.1 * PI * (PI * x.x).cos()).powi(2) + 1.0) - 0.2 * PI * PI * s(x) * (PI * x.x).sin()
            }),
        )
    }

    #[test]
    fn hybrid_matches_direct() {
        for (m, spec) in [
            (curved_top_cube(2, 0.1).unwrap(), example1_like(2)),
            (all_natural(2), {
                let mut s = example1_like(1);
                s.pressure_bc = s.exact.as_ref().unwrap().p.clone();
                s
            }),
        ] {
            let disc = Discretization::new(&m, &spec.options).unwrap();
            let sys = assemble(&m, &disc, &spec).unwrap();
            let h = solve_with(&sys, SolverKind::Hybrid).unwrap();
            let d = solve_with(&sys, SolverKind::Direct).unwrap();
            assert_eq!(h.solver, SolverKind::Hybrid);
            for (a, b) in h.velocity.iter().zip(&d.velocity).chain(h.pressure.iter().zip(&d.pressure)) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
            assert_eq!(h.multiplier.is_some(), d.multiplier.is_some());
        }
    }

    #[test]
    fn single_cell_all_essential_falls_back() {
        let m = unit_cube_grid(1).unwrap();
        let (_, sol) = run(&m, &example1_like(1)).unwrap();
        assert_eq!(sol.solver, SolverKind::Direct);
    }
}
