//! Scaled monomial bases.
//!
//! In 3D the monomials are `m_α(x) = ((x - x_P)/h_P)^α`, centred at the cell barycenter
//! and scaled by the cell diameter. In the parameter square they are
//! `m̃_α(u,v) = (u - ½)^α₁ (v - ½)^α₂`. Both are enumerated in graded lexicographic order.

use crate::linalg::{rank, Mat};
use crate::{Error, Result, Vec3};

/// `dim P_k(ℝ³)`.
pub fn dim3(k: usize) -> usize {
    (k + 1) * (k + 2) * (k + 3) / 6
}

/// `dim P_k(ℝ²)`.
pub fn dim2(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// `dim P_k` for a possibly negative degree (empty space).
pub fn dim3_signed(k: isize) -> usize {
    if k < 0 {
        0
    } else {
        dim3(k as usize)
    }
}

/// Exponents of total degree ≤ k, grouped by degree, lexicographically descending within a degree.
pub fn exponents3(k: usize) -> Vec<[u32; 3]> {
    let mut out = Vec::with_capacity(dim3(k));
    for n in 0..=k as u32 {
        for a in (0..=n).rev() {
            for b in (0..=n - a).rev() {
                out.push([a, b, n - a - b]);
            }
        }
    }
    out
}

pub fn exponents2(k: usize) -> Vec<[u32; 2]> {
    let mut out = Vec::with_capacity(dim2(k));
    for n in 0..=k as u32 {
        for a in (0..=n).rev() {
            out.push([a, n - a]);
        }
    }
    out
}

/// Position of `e` in [`exponents3`] order.
pub fn index3(e: [u32; 3]) -> usize {
    let n = (e[0] + e[1] + e[2]) as usize;
    let below = if n == 0 { 0 } else { dim3(n - 1) };
    // within degree n: a descending, then b descending
    let a = e[0] as usize;
    let b = e[1] as usize;
    let mut off = 0;
    for aa in (a + 1..=n).rev() {
        off += n - aa + 1;
    }
    off += (n - a) - b;
    below + off
}

fn powers(x: f64, k: usize, out: &mut [f64]) {
    out[0] = 1.0;
    for i in 1..=k {
        out[i] = out[i - 1] * x;
    }
}

/// Scaled monomials on a cell.
#[derive(Debug, Clone)]
pub struct ScaledBasis3 {
    pub center: Vec3,
    pub h: f64,
    pub degree: usize,
    pub exps: Vec<[u32; 3]>,
}

impl ScaledBasis3 {
    pub fn new(center: Vec3, h: f64, degree: usize) -> Self {
        Self {
            center,
            h,
            degree,
            exps: exponents3(degree),
        }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    /// Scaled coordinates `(x - x_P)/h_P`.
    pub fn local(&self, x: &Vec3) -> Vec3 {
        (x - self.center) / self.h
    }

    pub fn eval_into(&self, x: &Vec3, out: &mut [f64]) {
        let t = self.local(x);
        let k = self.degree;
        let mut px = [0.0; 16];
        let mut py = [0.0; 16];
        let mut pz = [0.0; 16];
        powers(t.x, k, &mut px);
        powers(t.y, k, &mut py);
        powers(t.z, k, &mut pz);
        for (o, e) in out.iter_mut().zip(&self.exps) {
            *o = px[e[0] as usize] * py[e[1] as usize] * pz[e[2] as usize];
        }
    }

    pub fn eval(&self, x: &Vec3) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out);
        out
    }

    /// Values and physical gradients (scaled by `1/h`).
    pub fn eval_grad(&self, x: &Vec3) -> (Vec<f64>, Vec<Vec3>) {
        let t = self.local(x);
        let k = self.degree;
        let mut p = [[0.0; 16]; 3];
        powers(t.x, k, &mut p[0]);
        powers(t.y, k, &mut p[1]);
        powers(t.z, k, &mut p[2]);
        let dpow = |c: usize, e: u32| -> f64 {
            if e == 0 {
                0.0
            } else {
                e as f64 * p[c][e as usize - 1]
            }
        };
        let mut vals = Vec::with_capacity(self.len());
        let mut grads = Vec::with_capacity(self.len());
        for e in &self.exps {
            let (a, b, c) = (e[0], e[1], e[2]);
            vals.push(p[0][a as usize] * p[1][b as usize] * p[2][c as usize]);
            grads.push(
                Vec3::new(
                    dpow(0, a) * p[1][b as usize] * p[2][c as usize],
                    p[0][a as usize] * dpow(1, b) * p[2][c as usize],
                    p[0][a as usize] * p[1][b as usize] * dpow(2, c),
                ) / self.h,
            );
        }
        (vals, grads)
    }
}

/// Scaled monomials on the parameter square, centred at `(½, ½)` with unit scale.
#[derive(Debug, Clone)]
pub struct ScaledBasis2 {
    pub degree: usize,
    pub exps: Vec<[u32; 2]>,
}

impl ScaledBasis2 {
    pub fn new(degree: usize) -> Self {
        Self {
            degree,
            exps: exponents2(degree),
        }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn eval_into(&self, u: f64, v: f64, out: &mut [f64]) {
        let mut pu = [0.0; 16];
        let mut pv = [0.0; 16];
        powers(u - 0.5, self.degree, &mut pu);
        powers(v - 0.5, self.degree, &mut pv);
        for (o, e) in out.iter_mut().zip(&self.exps) {
            *o = pu[e[0] as usize] * pv[e[1] as usize];
        }
    }

    pub fn eval(&self, u: f64, v: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(u, v, &mut out);
        out
    }
}

/// The splitting `[P_k]³ = ∇P_{k+1} ⊕ x̃ ∧ [P_{k-1}]³` in scaled coordinates.
///
/// Coefficients refer to the vector monomial basis `e_c m_α`, flattened as
/// `c · π_k + index(α)`. Both parts depend only on `k`: the gradient part is
/// `∇̃ m_β` for non-constant `β` of degree ≤ k+1, and the cross part is an
/// orthonormal (in coefficient space) basis of the span of the generators
/// `x̃ ∧ (m_α e_i)`.
#[derive(Debug, Clone)]
pub struct VectorDecomp {
    pub k: usize,
    /// `3π_k × (π_{k+1} - 1)`.
    pub grad: Mat,
    /// `3π_k × n_cross`.
    pub cross: Mat,
    /// Each cross basis vector as a combination of the `3π_{k-1}` generators.
    pub cross_in_generators: Mat,
}

impl VectorDecomp {
    pub fn n_cross(&self) -> usize {
        self.cross.ncols()
    }

    /// Test-function matrix: gradient columns followed by cross columns.
    pub fn combined(&self) -> Mat {
        let n = 3 * dim3(self.k);
        let mut q = Mat::zeros(n, self.grad.ncols() + self.cross.ncols());
        q.columns_mut(0, self.grad.ncols()).copy_from(&self.grad);
        q.columns_mut(self.grad.ncols(), self.cross.ncols())
            .copy_from(&self.cross);
        q
    }
}

/// Coefficients of the generators `x̃ ∧ (m_α e_i)` in the vector monomial basis of degree k.
pub fn cross_generators(k: usize) -> Mat {
    let pk = dim3(k);
    let lower = exponents3(k - 1);
    let mut g = Mat::zeros(3 * pk, 3 * lower.len());
    let shift = |e: [u32; 3], c: usize| {
        let mut f = e;
        f[c] += 1;
        index3(f)
    };
    for (ai, &e) in lower.iter().enumerate() {
        for i in 0..3 {
            let col = i * lower.len() + ai;
            // x̃ × e_i = (y e_i,z - z e_i,y, z e_i,x - x e_i,z, x e_i,y - y e_i,x)
            let mut vec_e = [0.0; 3];
            vec_e[i] = 1.0;
            let terms: [(usize, usize, f64); 6] = [
                (0, 1, vec_e[2]),
                (0, 2, -vec_e[1]),
                (1, 2, vec_e[0]),
                (1, 0, -vec_e[2]),
                (2, 0, vec_e[1]),
                (2, 1, -vec_e[0]),
            ];
            for (comp, coord, coef) in terms {
                if coef != 0.0 {
                    g[(comp * pk + shift(e, coord), col)] += coef;
                }
            }
        }
    }
    g
}

/// Builds the gradient/cross splitting of `[P_k]³`.
pub fn build_vector_decomp(k: usize) -> Result<VectorDecomp> {
    if k == 0 {
        return Err(Error::InvalidArgument("vector decomposition needs k ≥ 1".into()));
    }
    let pk = dim3(k);
    let hi = exponents3(k + 1);
    let mut grad = Mat::zeros(3 * pk, hi.len() - 1);
    for (col, e) in hi.iter().skip(1).enumerate() {
        for c in 0..3 {
            if e[c] > 0 {
                let mut f = *e;
                f[c] -= 1;
                grad[(c * pk + index3(f), col)] = e[c] as f64;
            }
        }
    }

    let gens = cross_generators(k);
    let svd = gens.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd u");
    let vt = svd.v_t.as_ref().expect("svd v_t");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-10 * smax)
        .collect();
    let expected = 3 * pk - (hi.len() - 1);
    if keep.len() != expected {
        return Err(Error::Decomposition(format!(
            "cross part has rank {} (expected {expected})",
            keep.len()
        )));
    }
    let mut cross = Mat::zeros(3 * pk, keep.len());
    let mut comb = Mat::zeros(gens.ncols(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        // Fix the sign so the largest entry is positive: deterministic output.
        let col = u.column(i);
        let imax = (0..col.len())
            .max_by(|&a, &b| col[a].abs().total_cmp(&col[b].abs()))
            .unwrap_or(0);
        let s = if col[imax] < 0.0 { -1.0 } else { 1.0 };
        cross.set_column(j, &(s * col));
        let sigma = svd.singular_values[i];
        comb.set_column(j, &(s / sigma * vt.row(i).transpose()));
    }

    let d = VectorDecomp {
        k,
        grad,
        cross,
        cross_in_generators: comb,
    };
    let r = rank(&d.combined(), 1e-10);
    if r != 3 * pk {
        return Err(Error::Decomposition(format!(
            "combined rank {r} (expected {})",
            3 * pk
        )));
    }
    Ok(d)
}
