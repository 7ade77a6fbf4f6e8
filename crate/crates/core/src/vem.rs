//! Local virtual element spaces: degrees of freedom, the L² projector and local forms.
//!
//! Local DOF order on a cell: one block of normal face moments per face (in the
//! order of `Cell::faces`), then the divergence moments, then the cross moments.
//! Face moments are taken against the outward normal of the cell.

use crate::linalg::{solve_checked, spd_inverse, Mat, Vector};
use crate::mesh::PolyMesh;
use crate::poly::{dim2, dim3, dim3_signed, ScaledBasis2, ScaledBasis3, VectorDecomp};
use crate::quadrature::{face_rule, volume_rule, SurfaceRule, VolumeRule};
use crate::{Error, Result, Vec3};

/// Measure used to normalize the normal face moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceMomentMeasure {
    /// `(1/|F|) ∫_F (v·n) m̃ dF`.
    #[default]
    Surface,
    /// `(1/|𝔉|) ∫_𝔉 (v·n)∘γ m̃ d𝔉`.
    Parameter,
}

/// Options for building local spaces.
#[derive(Debug, Clone, Copy)]
pub struct VemOptions {
    pub k: usize,
    /// Quadrature degree of all local integrals; default `2k + 2`, and
    /// [`CURVED_EXTRA_DEGREE`] more on cells with a face that is not affine.
    pub quad_degree: Option<usize>,
    pub measure: FaceMomentMeasure,
    /// Compress volume rules by NNLS.
    pub compress: bool,
}

impl VemOptions {
    pub fn new(k: usize) -> Self {
        VemOptions {
            k,
            quad_degree: None,
            measure: FaceMomentMeasure::Surface,
            compress: false,
        }
    }

    pub fn degree(&self) -> usize {
        self.quad_degree.unwrap_or(2 * self.k + 2)
    }

    /// Degree used on `cell`.
    pub fn degree_on(&self, mesh: &PolyMesh, cell: usize) -> usize {
        match self.quad_degree {
            Some(q) => q,
            None if mesh.cells[cell].faces.iter().any(|&(f, _)| !mesh.faces[f].map.is_affine()) => {
                self.degree() + CURVED_EXTRA_DEGREE
            }
            None => self.degree(),
        }
    }
}

/// With `2k + 2` alone the projector of a coarse curved cell is off its
/// quadrature-converged value by about 1e-7.
pub const CURVED_EXTRA_DEGREE: usize = 2;

/// Sizes of the three DOF families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofLayout {
    pub k: usize,
    /// Per face: `dim P_k(ℝ²)`.
    pub n_face: usize,
    /// `π_{k-1} - 1`.
    pub n_div: usize,
    /// Cross moments.
    pub n_cross: usize,
}

impl DofLayout {
    pub fn new(k: usize) -> Self {
        DofLayout {
            k,
            n_face: dim2(k),
            n_div: dim3_signed(k as isize - 1) - 1,
            n_cross: 3 * dim3(k) - (dim3(k + 1) - 1),
        }
    }

    /// Internal DOFs per cell.
    pub fn n_internal(&self) -> usize {
        self.n_div + self.n_cross
    }

    pub fn local_len(&self, n_faces: usize) -> usize {
        n_faces * self.n_face + self.n_internal()
    }

    /// Pressure coefficients per cell: `π_{k-1}`.
    pub fn n_pressure(&self) -> usize {
        dim3(self.k - 1)
    }
}

/// Face data seen from one cell.
#[derive(Debug, Clone)]
pub struct LocalFace {
    pub face: usize,
    /// Cell orientation sign of the face.
    pub sign: f64,
    pub rule: SurfaceRule,
    /// Weights of the normal moments: `D1 = Σ_i moment_weights[i] (v·n)(x_i) m̃(u_i)`.
    pub moment_weights: Vec<f64>,
    /// `m̃_α(u_i)`, row per point.
    pub param_basis: Vec<Vec<f64>>,
    /// Inverse of `Σ_i moment_weights[i] m̃ m̃ᵀ`: maps a D1 block to the coefficients of `v·n`.
    pub gram_inv: Mat,
    /// `∫_F (v·n) m_β dF` for `β` of degree ≤ k+1 as a linear map of the D1 block.
    pub flux: Mat,
}

/// A cell's local space and its matrices.
#[derive(Debug, Clone)]
pub struct LocalVem {
    pub cell: usize,
    pub layout: DofLayout,
    pub volume: f64,
    pub h: f64,
    pub center: Vec3,
    pub faces: Vec<LocalFace>,
    pub volume_rule: VolumeRule,
    /// Scaled monomials up to degree `k + 1`.
    pub basis: ScaledBasis3,
    /// Gram matrix of the degree-k monomials.
    pub mass_poly: Mat,
    /// Gram matrix of the degree-(k-1) monomials (pressure space).
    pub mass_p: Mat,
    /// `[P_k]³` mass matrix in component-major order.
    pub mass_vec: Mat,
    /// Π⁰ₖ: DOFs → coefficients in `[P_k]³`.
    pub projector: Mat,
    /// DOFs of the vector monomials `e_c m_α`.
    pub dof_of_poly: Mat,
    /// `∫_P div v m_γ` as a linear map of the DOFs.
    pub div_moments: Mat,
    pub cross: Mat,
}

fn first(m: &Mat, r: usize, c: usize) -> Mat {
    m.view((0, 0), (r, c)).into_owned()
}

impl LocalVem {
    pub fn new(mesh: &PolyMesh, cell: usize, decomp: &VectorDecomp, opts: &VemOptions) -> Result<LocalVem> {
        let k = opts.k;
        if k == 0 || decomp.k != k {
            return Err(Error::InvalidArgument(format!("degree k = {k} needs k ≥ 1 and a matching decomposition")));
        }
        let layout = DofLayout::new(k);
        let c = &mesh.cells[cell];
        let (center, h, volume) = (c.barycenter, c.diameter, c.volume);
        let q = opts.degree_on(mesh, cell);
        let pk = dim3(k);
        let pk1 = dim3(k + 1);
        let pm = dim3(k - 1);
        let nf = c.faces.len();
        let ndof = layout.local_len(nf);
        let off_div = nf * layout.n_face;
        let off_cross = off_div + layout.n_div;

        let vrule = volume_rule(mesh, cell, q, opts.compress)?;
        let basis = ScaledBasis3::new(center, h, k + 1);

        // volume integrals
        let mut mass_hi = Mat::zeros(pk1, pk1);
        let mut buf = vec![0.0; pk1];
        for (p, &w) in vrule.points.iter().zip(&vrule.weights) {
            basis.eval_into(p, &mut buf);
            for a in 0..pk1 {
                let wa = w * buf[a];
                for b in 0..=a {
                    mass_hi[(a, b)] += wa * buf[b];
                }
            }
        }
        for a in 0..pk1 {
            for b in 0..a {
                mass_hi[(b, a)] = mass_hi[(a, b)];
            }
        }
        let mass_poly = first(&mass_hi, pk, pk);
        let mass_p = first(&mass_hi, pm, pm);
        let mut mass_vec = Mat::zeros(3 * pk, 3 * pk);
        for comp in 0..3 {
            mass_vec
                .view_mut((comp * pk, comp * pk), (pk, pk))
                .copy_from(&mass_poly);
        }
        // ∫ m_β m_γ for β ≤ k+1, γ ≤ k-1
        let mass_cross = mass_hi.columns(0, pm).into_owned();

        // faces
        let pb = ScaledBasis2::new(k);
        let nk2 = layout.n_face;
        let mut faces = Vec::with_capacity(nf);
        for &(f, s) in &c.faces {
            let rule = face_rule(mesh, f, q)?;
            let norm = match opts.measure {
                FaceMomentMeasure::Surface => rule.area(),
                FaceMomentMeasure::Parameter => rule.param_area(),
            };
            let mut mw = Vec::with_capacity(rule.len());
            let mut pbv = Vec::with_capacity(rule.len());
            let mut gram = Mat::zeros(nk2, nk2);
            let mut kmat = Mat::zeros(pk1, nk2);
            for i in 0..rule.len() {
                let [u, v] = rule.param[i];
                let mt = pb.eval(u, v);
                let wi = match opts.measure {
                    FaceMomentMeasure::Surface => rule.weights[i] * rule.jac[i] / norm,
                    FaceMomentMeasure::Parameter => rule.weights[i] / norm,
                };
                basis.eval_into(&rule.points[i], &mut buf);
                let wj = rule.weights[i] * rule.jac[i];
                for a in 0..nk2 {
                    for b in 0..nk2 {
                        gram[(a, b)] += wi * mt[a] * mt[b];
                    }
                    for beta in 0..pk1 {
                        kmat[(beta, a)] += wj * buf[beta] * mt[a];
                    }
                }
                mw.push(wi);
                pbv.push(mt);
            }
            let gram_inv = spd_inverse(&gram, "face moment Gram matrix")?;
            let flux = &kmat * &gram_inv;
            faces.push(LocalFace {
                face: f,
                sign: s as f64,
                rule,
                moment_weights: mw,
                param_basis: pbv,
                gram_inv,
                flux,
            });
        }

        // divergence moments μ_γ = ∫ div v m_γ
        let mut div_moments = Mat::zeros(pm, ndof);
        for (j, lf) in faces.iter().enumerate() {
            for a in 0..nk2 {
                div_moments[(0, j * nk2 + a)] = lf.flux[(0, a)];
            }
        }
        for g in 1..pm {
            div_moments[(g, off_div + g - 1)] = volume / h;
        }

        // right-hand side of the projector
        let ngrad = pk1 - 1;
        let mut rhs = Mat::zeros(3 * pk, ndof);
        let div_part = &mass_cross * spd_inverse(&mass_p, "pressure Gram matrix")? * &div_moments;
        for beta in 1..pk1 {
            let r = beta - 1;
            for col in 0..ndof {
                rhs[(r, col)] = -h * div_part[(beta, col)];
            }
            for (j, lf) in faces.iter().enumerate() {
                for a in 0..nk2 {
                    rhs[(r, j * nk2 + a)] += h * lf.flux[(beta, a)];
                }
            }
        }
        for jx in 0..layout.n_cross {
            rhs[(ngrad + jx, off_cross + jx)] = volume;
        }
        let qmat = decomp.combined();
        let gt = qmat.transpose() * &mass_vec;
        let projector = solve_checked(&gt, &rhs, 1e-12, "projector")?;

        // DOFs of the vector monomial basis
        let mut dof_of_poly = Mat::zeros(ndof, 3 * pk);
        for (j, lf) in faces.iter().enumerate() {
            for i in 0..lf.rule.len() {
                let n = lf.sign * lf.rule.normals[i];
                basis.eval_into(&lf.rule.points[i], &mut buf);
                for comp in 0..3 {
                    for al in 0..pk {
                        let val = lf.moment_weights[i] * n[comp] * buf[al];
                        for a in 0..nk2 {
                            dof_of_poly[(j * nk2 + a, comp * pk + al)] += val * lf.param_basis[i][a];
                        }
                    }
                }
            }
        }
        for (p, &w) in vrule.points.iter().zip(&vrule.weights) {
            let (vals, grads) = basis.eval_grad(p);
            for g in 1..pm {
                for comp in 0..3 {
                    for al in 0..pk {
                        dof_of_poly[(off_div + g - 1, comp * pk + al)] += h / volume * w * grads[al][comp] * vals[g];
                    }
                }
            }
        }
        let cross_dofs = decomp.cross.transpose() * &mass_vec / volume;
        dof_of_poly
            .view_mut((off_cross, 0), (layout.n_cross, 3 * pk))
            .copy_from(&cross_dofs);

        Ok(LocalVem {
            cell,
            layout,
            volume,
            h,
            center,
            faces,
            volume_rule: vrule,
            basis,
            mass_poly,
            mass_p,
            mass_vec,
            projector,
            dof_of_poly,
            div_moments,
            cross: decomp.cross.clone(),
        })
    }

    pub fn ndof(&self) -> usize {
        self.layout.local_len(self.faces.len())
    }

    pub fn k(&self) -> usize {
        self.layout.k
    }

    fn pk(&self) -> usize {
        dim3(self.layout.k)
    }

    /// Value at `x` of the field with coefficients `coeffs` in `[P_k]³`.
    pub fn eval_field(&self, coeffs: &[f64], x: &Vec3) -> Vec3 {
        let pk = self.pk();
        let mut buf = vec![0.0; self.basis.len()];
        self.basis.eval_into(x, &mut buf);
        let mut out = Vec3::zeros();
        for comp in 0..3 {
            out[comp] = (0..pk).map(|a| coeffs[comp * pk + a] * buf[a]).sum();
        }
        out
    }

    /// Value at `x` of a pressure with coefficients `coeffs` in `P_{k-1}`.
    pub fn eval_pressure(&self, coeffs: &[f64], x: &Vec3) -> f64 {
        let mut buf = vec![0.0; self.basis.len()];
        self.basis.eval_into(x, &mut buf);
        coeffs.iter().zip(&buf).map(|(c, b)| c * b).sum()
    }

    /// DOFs of a vector field.
    pub fn interpolate(&self, v: impl Fn(&Vec3) -> Vec3) -> Vector {
        let l = self.layout;
        let nk2 = l.n_face;
        let nf = self.faces.len();
        let pm = dim3(l.k - 1);
        let pk = self.pk();
        let mut d = Vector::zeros(self.ndof());
        // face moments, and the boundary part of ∫ div v m_γ
        let mut bnd = vec![0.0; pm];
        let mut buf = vec![0.0; self.basis.len()];
        for (j, lf) in self.faces.iter().enumerate() {
            for i in 0..lf.rule.len() {
                let x = lf.rule.points[i];
                let vn = v(&x).dot(&(lf.sign * lf.rule.normals[i]));
                for a in 0..nk2 {
                    d[j * nk2 + a] += lf.moment_weights[i] * vn * lf.param_basis[i][a];
                }
                self.basis.eval_into(&x, &mut buf);
                let wj = lf.rule.weights[i] * lf.rule.jac[i];
                for g in 0..pm {
                    bnd[g] += wj * vn * buf[g];
                }
            }
        }
        let off_div = nf * nk2;
        let off_cross = off_div + l.n_div;
        let mut cross_int = vec![0.0; l.n_cross];
        for (p, &w) in self.volume_rule.points.iter().zip(&self.volume_rule.weights) {
            let (vals, grads) = self.basis.eval_grad(p);
            let vx = v(p);
            for g in 1..pm {
                bnd[g] -= w * vx.dot(&grads[g]);
            }
            for (jx, ci) in cross_int.iter_mut().enumerate() {
                let mut cv = Vec3::zeros();
                for comp in 0..3 {
                    cv[comp] = (0..pk).map(|a| self.cross[(comp * pk + a, jx)] * vals[a]).sum();
                }
                *ci += w * vx.dot(&cv);
            }
        }
        for g in 1..pm {
            d[off_div + g - 1] = self.h / self.volume * bnd[g];
        }
        for jx in 0..l.n_cross {
            d[off_cross + jx] = cross_int[jx] / self.volume;
        }
        d
    }

    /// Coefficients of Π⁰ₖ v in `[P_k]³`.
    pub fn project(&self, dofs: &Vector) -> Vector {
        &self.projector * dofs
    }

    /// Consistency part `ν Πᵀ M Π`.
    pub fn consistency(&self, nu: f64) -> Mat {
        nu * self.projector.transpose() * &self.mass_vec * &self.projector
    }

    /// Stabilization `ν |P| (I - DΠ)ᵀ (I - DΠ)`.
    pub fn stabilization(&self, nu: f64) -> Mat {
        let n = self.ndof();
        let r = Mat::identity(n, n) - &self.dof_of_poly * &self.projector;
        nu * self.volume * r.transpose() * r
    }

    /// `(A_h, B, S)` for the cell. `A_h` is symmetrized; `B = -∫ div v m_γ`.
    pub fn local_forms(&self, nu: f64) -> Result<(Mat, Mat, Mat)> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("ν must be positive (got {nu})")));
        }
        let s = self.stabilization(nu);
        let a = self.consistency(nu) + &s;
        let a = (&a + a.transpose()) * 0.5;
        Ok((a, -&self.div_moments, s))
    }

    /// Coefficients of `v·n` in the parameter basis of local face `j`, from its D1 block.
    pub fn face_flux_coefficients(&self, j: usize, block: &[f64]) -> Vector {
        &self.faces[j].gram_inv * Vector::from_column_slice(block)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{curved_top_cube, unit_cube_grid};
    use crate::poly::build_vector_decomp;

    fn build(mesh: &PolyMesh, cell: usize, k: usize) -> LocalVem {
        let d = build_vector_decomp(k).unwrap();
        LocalVem::new(mesh, cell, &d, &VemOptions::new(k)).unwrap()
    }

    #[test]
    fn layout_sizes() {
        let l = DofLayout::new(1);
        assert_eq!((l.n_face, l.n_div, l.n_cross), (3, 0, 3));
        assert_eq!(l.local_len(6), 21);
        let l = DofLayout::new(2);
        assert_eq!((l.n_face, l.n_div, l.n_cross), (6, 3, 11));
        let l = DofLayout::new(3);
        assert_eq!((l.n_face, l.n_div, l.n_cross), (10, 9, 26));
    }

    #[test]
    fn constant_field_on_cube() {
        let m = unit_cube_grid(1).unwrap();
        let lv = build(&m, 0, 1);
        let d = lv.interpolate(|_| Vec3::new(1.0, 0.0, 0.0));
        let p = lv.project(&d);
        for (i, &c) in p.iter().enumerate() {
            let expect = if i == 0 { 1.0 } else { 0.0 };
            assert!((c - expect).abs() < 1e-12, "{i}: {c}");
        }
        // only x-faces carry flux
        for (j, lf) in lv.faces.iter().enumerate() {
            let n = lf.sign * lf.rule.normals[0];
            assert!((d[j * 3] - n.x).abs() < 1e-14);
        }
        // S vanishes on the constant, A_h reproduces |P| ‖c‖²
        let (a, _, s) = lv.local_forms(1.0).unwrap();
        assert!((s * &d).norm() < 1e-12);
        assert!(((d.transpose() * &a * &d)[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn divergence_of_linear_field() {
        let m = unit_cube_grid(1).unwrap();
        let lv = build(&m, 0, 1);
        let d = lv.interpolate(|x| Vec3::new(x.x, 0.0, 0.0));
        let (_, b, _) = lv.local_forms(1.0).unwrap();
        assert!(((&b * &d)[0] + 1.0).abs() < 1e-12);
        let d = lv.interpolate(|x| *x);
        assert!(((lv.div_moments.row(0) * &d)[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_field_recovered() {
        let m = unit_cube_grid(2).unwrap();
        let lv = build(&m, 5, 2);
        let f = |x: &Vec3| Vec3::new(x.y * x.z, x.z * x.x, x.x * x.y);
        let p = lv.project(&lv.interpolate(f));
        for x in [Vec3::new(0.6, 0.2, 0.8), Vec3::new(0.9, 0.4, 0.55)] {
            assert!((lv.eval_field(p.as_slice(), &x) - f(&x)).norm() < 1e-11);
        }
    }

    #[test]
    fn consistency_on_straight_cells() {
        let m = unit_cube_grid(2).unwrap();
        for k in 1..=3 {
            let lv = build(&m, 3, k);
            let n = 3 * dim3(k);
            let dp = &lv.projector * &lv.dof_of_poly;
            let err = (dp - Mat::identity(n, n)).abs().max();
            assert!(err < 1e-10, "k={k}: {err}");
        }
    }

    #[test]
    fn graph_faces_break_exact_consistency() {
        // p·n is not a parameter-space polynomial on a curved face, so the
        // interpolant of p is a different member of the space; the defect
        // shrinks with the curvature seen by the cell.
        let defect = |n: usize| {
            let m = curved_top_cube(n, 0.1).unwrap();
            let lv = build(&m, m.n_cells() - 1, 1);
            let dp = &lv.projector * &lv.dof_of_poly;
            (dp - Mat::identity(12, 12)).abs().max()
        };
        let (d1, d2) = (defect(1), defect(2));
        assert!(d1 > 1e-6 && d2 < d1, "{d1} {d2}");
    }

    #[test]
    fn forms_are_spd_on_curved_cells() {
        let m = curved_top_cube(2, 0.1).unwrap();
        for c in [0, 7] {
            let lv = build(&m, c, 2);
            let (a, _, _) = lv.local_forms(1.0).unwrap();
            let ev = crate::linalg::sym_eigenvalues(&a);
            assert!(ev[0] > 0.0);
        }
    }

    #[test]
    fn sign_flip_negates_face_block() {
        let m = unit_cube_grid(2).unwrap();
        let fc = m.face_cells();
        let f = (0..m.n_faces()).find(|&f| fc[f].len() == 2).unwrap();
        let v = |x: &Vec3| Vec3::new(1.0 + x.y, x.z * x.x, 2.0 - x.x);
        let blocks: Vec<Vec<f64>> = fc[f]
            .iter()
            .map(|&(c, _)| {
                let lv = build(&m, c, 2);
                let j = lv.faces.iter().position(|lf| lf.face == f).unwrap();
                let d = lv.interpolate(v);
                (0..6).map(|a| d[j * 6 + a]).collect()
            })
            .collect();
        for a in 0..6 {
            assert!((blocks[0][a] + blocks[1][a]).abs() < 1e-13);
        }
    }

    #[test]
    fn nonpositive_nu_is_rejected() {
        let m = unit_cube_grid(1).unwrap();
        assert!(build(&m, 0, 1).local_forms(0.0).is_err());
    }

    fn build_with(mesh: &PolyMesh, cell: usize, k: usize, quad_degree: Option<usize>) -> LocalVem {
        let d = build_vector_decomp(k).unwrap();
        let mut o = VemOptions::new(k);
        o.quad_degree = quad_degree;
        LocalVem::new(mesh, cell, &d, &o).unwrap()
    }

    fn energy(a: &Mat, d: &Vector) -> f64 {
        (d.transpose() * a * d)[(0, 0)]
    }

    #[test]
    fn condition_numbers_stay_flat_under_refinement() {
        // λ_max / λ_min of A_h, worst over a spread of cells per level
        for k in 1..=2 {
            let conds: Vec<f64> = (0..4)
                .map(|l| {
                    let m = curved_top_cube(1 << (l + 1), 0.1).unwrap();
                    let step = (m.n_cells() / 16).max(1);
                    (0..m.n_cells())
                        .step_by(step)
                        .map(|c| {
                            let (a, _, _) = build(&m, c, k).local_forms(1.0).unwrap();
                            let ev = crate::linalg::sym_eigenvalues(&a);
                            ev[ev.len() - 1] / ev[0]
                        })
                        .fold(0.0, f64::max)
                })
                .collect();
            let spread = conds.iter().cloned().fold(0.0, f64::max) / conds.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(spread < 10.0, "k={k}: {conds:?}");
        }
    }

    #[test]
    fn discrete_energy_matches_exact_on_polynomials() {
        let m = unit_cube_grid(2).unwrap();
        let rule = crate::quadrature::volume_rule_raw(&m, 6, 8).unwrap();
        for k in 1..=3 {
            let lv = build(&m, 6, k);
            let (a, _, _) = lv.local_forms(1.0).unwrap();
            for t in 0..5 {
                let c: Vec<f64> = (0..3 * dim3(k)).map(|i| ((i * 7 + t * 13) % 11) as f64 / 5.0 - 1.0).collect();
                let w = lv.interpolate(|x| lv.eval_field(&c, x));
                let exact: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, wt)| wt * lv.eval_field(&c, x).norm_squared())
                    .sum();
                assert!((energy(&a, &w) / exact - 1.0).abs() < 1e-10, "k={k}");
            }
        }
    }

    #[test]
    fn discrete_energy_is_bounded_by_projected_energy() {
        // a_h(w, w) / a(Π w, Π w) for interpolants of smooth fields
        let fields: Vec<Box<dyn Fn(&Vec3) -> Vec3>> = (0..20)
            .map(|i| {
                let s = 1.0 + i as f64 / 4.0;
                Box::new(move |x: &Vec3| {
                    Vec3::new((s * (x.x + x.y)).sin(), (s * x.y * x.z).cos(), (x.x - s * x.z).exp())
                }) as Box<dyn Fn(&Vec3) -> Vec3>
            })
            .collect();
        for n in [1, 2, 4] {
            let m = curved_top_cube(n, 0.1).unwrap();
            let lv = build(&m, m.n_cells() - 1, 2);
            let (a, _, _) = lv.local_forms(1.0).unwrap();
            let cons = lv.consistency(1.0);
            for f in &fields {
                let w = lv.interpolate(f);
                let r = energy(&a, &w) / energy(&cons, &w);
                assert!((1.0 - 1e-12..=100.0).contains(&r), "n={n}: {r}");
            }
        }
    }

    #[test]
    fn curved_face_moments_match_refined_quadrature() {
        // On a graph face (∂u γ × ∂v γ)·e_z is constant, so a vertical field
        // has parameter-polynomial normal trace and its DOFs are resolved by
        // the default rule.
        let m = curved_top_cube(2, 0.1).unwrap();
        let c = m.n_cells() - 1;
        for k in 1..=3 {
            let lv = build(&m, c, k);
            let fine = build_with(&m, c, k, Some(2 * k + 14));
            let v = |_: &Vec3| Vec3::new(0.0, 0.0, 1.0);
            let (d, df) = (lv.interpolate(v), fine.interpolate(v));
            let (p, pf) = (lv.project(&d), fine.project(&df));
            assert!((&d - &df).abs().max() < 1e-8, "k={k}: dofs {}", (&d - &df).abs().max());
            assert!((&p - &pf).abs().max() < 1e-8, "k={k}: projection {}", (&p - &pf).abs().max());
        }
    }
}
