//! Linear solvers for the saddle-point system.
//!
//! `Hybrid` breaks the interior-face unknowns apart, condenses every cell onto
//! Lagrange multipliers that glue the fluxes back together, and factors the
//! resulting symmetric positive (semi)definite multiplier matrix with a sparse
//! Cholesky. The discrete solution is the same as the one of the original
//! system. `Direct` factors the reduced saddle system with a sparse LU.
//!
//! Without natural faces the pressure is fixed by a mean-value multiplier
//! `ℓ`. The multiplier matrix then has the pressure-trace of the constant
//! function in its kernel; this vector is known in closed form, so one
//! multiplier is pinned and the kernel component is recovered from the gauge.

use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{merge, SaddleSystem};
use crate::linalg::{Mat, Vector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    #[default]
    Hybrid,
    Direct,
}

/// Discrete solution.
#[derive(Debug, Clone)]
pub struct Solution {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    /// Mean-pressure multiplier, present when the gauge is active.
    pub multiplier: Option<f64>,
    /// Relative residual of the system with essential DOFs eliminated.
    pub residual: f64,
    /// Size of that system.
    pub dofs: usize,
    pub solve_seconds: f64,
    pub solver: SolverKind,
}

const RESIDUAL_TOL: f64 = 1e-10;

/// Solves with the hybrid solver, falling back to the direct one when a
/// cell has no free flux (a single-cell mesh with every face essential).
pub fn solve(sys: &SaddleSystem) -> Result<Solution> {
    match hybrid(sys)? {
        Some(sol) => Ok(sol),
        None => {
            log::debug!("local problem singular, using the direct solver");
            direct(sys)
        }
    }
}

pub fn solve_with(sys: &SaddleSystem, kind: SolverKind) -> Result<Solution> {
    match kind {
        SolverKind::Hybrid => solve(sys),
        SolverKind::Direct => direct(sys),
    }
}

fn fixed_values(sys: &SaddleSystem) -> Vec<Option<f64>> {
    let mut fixed = vec![None; sys.n_velocity];
    for &(i, v) in &sys.essential {
        fixed[i] = Some(v);
    }
    fixed
}

fn reduced_size(sys: &SaddleSystem, fixed: &[Option<f64>]) -> usize {
    fixed.iter().filter(|f| f.is_none()).count() + sys.n_pressure + usize::from(sys.gauge.is_some())
}

/// Residual `(r_v, r_p, r_gauge)` of the system with essential DOFs
/// eliminated; `r_v` is zero on essential DOFs.
fn residual(sys: &SaddleSystem, fixed: &[Option<f64>], q: &[f64], p: &[f64], ell: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let mut rv = sys.g.clone();
    let mut rp = sys.f.clone();
    for &(i, j, v) in &sys.a {
        rv[i] -= v * q[j];
    }
    for &(r, j, v) in &sys.b {
        rv[j] -= v * p[r];
        rp[r] -= v * q[j];
    }
    for (x, f) in rv.iter_mut().zip(fixed) {
        if f.is_some() {
            *x = 0.0;
        }
    }
    let mut rg = 0.0;
    if let Some((c, value)) = &sys.gauge {
        for (r, x) in rp.iter_mut().enumerate() {
            *x -= c[r] * ell;
        }
        rg = value - c.iter().zip(p).map(|(a, b)| a * b).sum::<f64>();
    }
    (rv, rp, rg)
}

fn norm3(r: &(Vec<f64>, Vec<f64>, f64)) -> f64 {
    (r.0.iter().chain(&r.1).map(|x| x * x).sum::<f64>() + r.2 * r.2).sqrt()
}

/// `‖r‖ / ‖rhs‖` for the system with essential DOFs eliminated.
fn relative_residual(sys: &SaddleSystem, fixed: &[Option<f64>], q: &[f64], p: &[f64], ell: f64) -> f64 {
    let q0: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
    let rhs = norm3(&residual(sys, fixed, &q0, &vec![0.0; p.len()], 0.0));
    norm3(&residual(sys, fixed, q, p, ell)) / if rhs > 0.0 { rhs } else { 1.0 }
}

fn solver_error(sys: &SaddleSystem, dofs: usize, message: String) -> Error {
    Error::Solver {
        cells: sys.cells.len(),
        dofs,
        message,
    }
}

fn finish(
    sys: &SaddleSystem,
    fixed: &[Option<f64>],
    velocity: Vec<f64>,
    pressure: Vec<f64>,
    multiplier: Option<f64>,
    start: Instant,
    solver: SolverKind,
) -> Result<Solution> {
    let dofs = reduced_size(sys, fixed);
    if velocity.iter().chain(&pressure).any(|v| !v.is_finite()) {
        return Err(solver_error(sys, dofs, "non-finite solution (singular system)".into()));
    }
    let residual = relative_residual(sys, fixed, &velocity, &pressure, multiplier.unwrap_or(0.0));
    if !(residual <= RESIDUAL_TOL) {
        return Err(solver_error(sys, dofs, format!("relative residual {residual:.3e}")));
    }
    Ok(Solution {
        velocity,
        pressure,
        multiplier,
        residual,
        dofs,
        solve_seconds: start.elapsed().as_secs_f64(),
        solver,
    })
}

fn sparse(n: usize, trip: &[(usize, usize, f64)]) -> std::result::Result<SparseColMat<usize, f64>, String> {
    let entries: Vec<Triplet<usize, usize, f64>> = trip.iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
    SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &entries).map_err(|e| format!("{e:?}"))
}

/// Sparse LU of the full saddle system.
fn direct(sys: &SaddleSystem) -> Result<Solution> {
    let start = Instant::now();
    let nv = sys.n_velocity;
    let fixed = fixed_values(sys);
    let mut vel_index = vec![usize::MAX; nv];
    let mut n = 0;
    for i in 0..nv {
        if fixed[i].is_none() {
            vel_index[i] = n;
            n += 1;
        }
    }
    let p0 = n;
    n += sys.n_pressure;
    let lam = sys.gauge.as_ref().map(|_| {
        n += 1;
        n - 1
    });
    let mut trip = Vec::with_capacity(sys.a.len() + 2 * sys.b.len());
    let mut rhs = vec![0.0; n];
    for i in 0..nv {
        if vel_index[i] != usize::MAX {
            rhs[vel_index[i]] = sys.g[i];
        }
    }
    for (r, &v) in sys.f.iter().enumerate() {
        rhs[p0 + r] = v;
    }
    for &(i, j, v) in &sys.a {
        if vel_index[i] == usize::MAX {
            continue;
        }
        match fixed[j] {
            None => trip.push((vel_index[i], vel_index[j], v)),
            Some(x) => rhs[vel_index[i]] -= v * x,
        }
    }
    for &(r, j, v) in &sys.b {
        match fixed[j] {
            None => {
                trip.push((p0 + r, vel_index[j], v));
                trip.push((vel_index[j], p0 + r, v));
            }
            Some(x) => rhs[p0 + r] -= v * x,
        }
    }
    if let (Some(l), Some((c, value))) = (lam, &sys.gauge) {
        for (r, &v) in c.iter().enumerate() {
            if v != 0.0 {
                trip.push((p0 + r, l, v));
                trip.push((l, p0 + r, v));
            }
        }
        rhs[l] = *value;
    }
    let trip = merge(trip);
    let mat = sparse(n, &trip).map_err(|e| solver_error(sys, n, e))?;
    let lu = mat.sp_lu().map_err(|e| solver_error(sys, n, format!("{e:?}")))?;
    let x = lu.solve(&faer::Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]));
    let velocity = (0..nv)
        .map(|i| match fixed[i] {
            Some(v) => v,
            None => x[(vel_index[i], 0)],
        })
        .collect();
    let pressure = (0..sys.n_pressure).map(|r| x[(p0 + r, 0)]).collect();
    finish(sys, &fixed, velocity, pressure, lam.map(|l| x[(l, 0)]), start, SolverKind::Direct)
}

/// Condensed cell: `x = W r - W[:, J] λ_J - yl ℓ` over the free local unknowns.
struct Condensed {
    /// Local velocity positions that are unknown.
    free: Vec<usize>,
    /// Positions in `free` glued by multipliers, and their multiplier ids.
    glued: Vec<(usize, usize)>,
    w: Mat,
    yl: Option<Vector>,
}

fn condense(sys: &SaddleSystem, fixed: &[Option<f64>], mult: &[usize], c: usize) -> Option<Condensed> {
    let blk = &sys.cells[c];
    let map = &sys.maps[c];
    let pm = blk.f.len();
    let free: Vec<usize> = (0..map.len()).filter(|&i| fixed[map[i].0].is_none()).collect();
    let glued: Vec<(usize, usize)> = free
        .iter()
        .enumerate()
        .filter(|(_, &i)| map[i].0 < mult.len() && mult[map[i].0] != usize::MAX)
        .map(|(pos, &i)| (pos, mult[map[i].0]))
        .collect();
    let nf = free.len();
    let n = nf + pm;
    let mut k = Mat::zeros(n, n);
    for (a, &i) in free.iter().enumerate() {
        for (b, &j) in free.iter().enumerate() {
            k[(a, b)] = blk.a[(i, j)];
        }
        for g in 0..pm {
            k[(nf + g, a)] = blk.b[(g, i)];
            k[(a, nf + g)] = blk.b[(g, i)];
        }
    }
    let w = k.clone().full_piv_lu().try_inverse()?;
    // reject numerically singular local problems
    let defect = (&k * &w - Mat::identity(n, n)).amax();
    if !(defect < 1e-6) {
        return None;
    }
    let yl = sys.gauge.as_ref().map(|_| w.columns(nf, pm) * &blk.mean);
    Some(Condensed { free, glued, w, yl })
}

/// Factored multiplier system.
struct Hybrid {
    cond: Vec<Condensed>,
    nm: usize,
    llt: Option<Llt<usize, f64>>,
    pin: Option<usize>,
    /// Gauge data `(z, h, η, zᵀh)`.
    gauge: Option<(Vec<f64>, Vec<f64>, f64, f64)>,
}

/// Correction `(q on free DOFs, p, ℓ)` for a residual given as one local
/// right-hand side per cell plus the gauge value.
type Correction = (Vec<(usize, f64)>, Vec<f64>, f64);

impl Hybrid {
    fn factor(sys: &SaddleSystem, fixed: &[Option<f64>]) -> std::result::Result<Option<Hybrid>, String> {
        let nk2 = sys.nk2;
        let n_face_dofs = sys.maps.iter().flatten().map(|&(g, _)| g + 1).max().unwrap_or(0);
        let mut mult = vec![usize::MAX; n_face_dofs];
        let mut nm = 0;
        for &f in &sys.interior_faces {
            for a in 0..nk2 {
                mult[f * nk2 + a] = nm;
                nm += 1;
            }
        }
        let cond: Option<Vec<Condensed>> = (0..sys.cells.len())
            .into_par_iter()
            .map(|c| condense(sys, fixed, &mult, c))
            .collect();
        let Some(cond) = cond else {
            return Ok(None);
        };
        let mut trip = Vec::new();
        let mut h = vec![0.0; nm];
        let mut eta = 0.0;
        let mut z = vec![0.0; nm];
        for (c, cd) in cond.iter().enumerate() {
            let nf = cd.free.len();
            for &(a, ma) in &cd.glued {
                for &(b, mb) in &cd.glued {
                    trip.push((ma, mb, 0.5 * (cd.w[(a, b)] + cd.w[(b, a)])));
                }
                // pressure trace of the constant function
                z[ma] = -sys.cells[c].b[(0, cd.free[a])];
            }
            if let Some(yl) = &cd.yl {
                let mean = &sys.cells[c].mean;
                for &(a, ma) in &cd.glued {
                    h[ma] += yl[a];
                }
                eta += (0..mean.len()).map(|g| mean[g] * yl[nf + g]).sum::<f64>();
            }
        }
        let trip = merge(trip);
        let (pin, gauge) = if sys.gauge.is_some() {
            let zh: f64 = z.iter().zip(&h).map(|(a, b)| a * b).sum();
            if nm == 0 || zh == 0.0 {
                return Ok(None);
            }
            let pin = (0..nm).max_by(|&i, &j| z[i].abs().total_cmp(&z[j].abs()));
            (pin, Some((z, h, eta, zh)))
        } else {
            (None, None)
        };
        let llt = if nm == 0 { None } else { Some(cholesky(nm, &trip, pin)?) };
        Ok(Some(Hybrid { cond, nm, llt, pin, gauge }))
    }

    fn apply(&self, sys: &SaddleSystem, rhs: &[Vector], value: f64) -> Correction {
        let y0: Vec<Vector> = self.cond.par_iter().zip(rhs).map(|(cd, r)| &cd.w * r).collect();
        let mut b1 = vec![0.0; self.nm];
        let mut b2 = 0.0;
        for (c, cd) in self.cond.iter().enumerate() {
            for &(a, ma) in &cd.glued {
                b1[ma] += y0[c][a];
            }
            if cd.yl.is_some() {
                let mean = &sys.cells[c].mean;
                let nf = cd.free.len();
                b2 += (0..mean.len()).map(|g| mean[g] * y0[c][nf + g]).sum::<f64>();
            }
        }
        let (lambda, ell) = match &self.gauge {
            None => (self.llt_solve(b1), 0.0),
            Some((z, h, eta, zh)) => {
                let ell = z.iter().zip(&b1).map(|(a, b)| a * b).sum::<f64>() / zh;
                let rhs: Vec<f64> = b1.iter().zip(h).map(|(b, hh)| b - hh * ell).collect();
                let mut lam = self.llt_solve(rhs);
                let alpha = (b2 - value - eta * ell - h.iter().zip(&lam).map(|(a, b)| a * b).sum::<f64>()) / zh;
                for (l, zi) in lam.iter_mut().zip(z) {
                    *l += alpha * zi;
                }
                (lam, ell)
            }
        };
        let mut q = Vec::new();
        let mut p = Vec::with_capacity(sys.n_pressure);
        for (c, cd) in self.cond.iter().enumerate() {
            let mut x = y0[c].clone();
            for &(a, ma) in &cd.glued {
                x -= cd.w.column(a) * lambda[ma];
            }
            if let Some(yl) = &cd.yl {
                x -= yl * ell;
            }
            let nf = cd.free.len();
            for (a, &i) in cd.free.iter().enumerate() {
                let (g, s) = sys.maps[c][i];
                q.push((g, s * x[a]));
            }
            p.extend_from_slice(&x.as_slice()[nf..]);
        }
        (q, p, ell)
    }

    fn llt_solve(&self, b: Vec<f64>) -> Vec<f64> {
        let Some(llt) = &self.llt else {
            return b;
        };
        let n = self.nm;
        let idx = |i: usize| -> Option<usize> {
            match self.pin {
                Some(p) if i == p => None,
                Some(p) if i > p => Some(i - 1),
                _ => Some(i),
            }
        };
        let m = n - usize::from(self.pin.is_some());
        let mut rb = faer::Mat::<f64>::zeros(m, 1);
        for (i, v) in b.iter().enumerate() {
            if let Some(r) = idx(i) {
                rb[(r, 0)] = *v;
            }
        }
        let x = llt.solve(&rb);
        (0..n).map(|i| idx(i).map_or(0.0, |r| x[(r, 0)])).collect()
    }
}

const REFINEMENT_STEPS: usize = 3;

fn hybrid(sys: &SaddleSystem) -> Result<Option<Solution>> {
    let start = Instant::now();
    let fixed = fixed_values(sys);
    let dofs = reduced_size(sys, &fixed);
    let Some(hy) = Hybrid::factor(sys, &fixed).map_err(|m| solver_error(sys, dofs, m))? else {
        return Ok(None);
    };
    // every free velocity DOF is owned by the first cell that sees it
    let mut owner = vec![usize::MAX; sys.n_velocity];
    for (c, cd) in hy.cond.iter().enumerate() {
        for &i in &cd.free {
            let g = sys.maps[c][i].0;
            if owner[g] == usize::MAX {
                owner[g] = c;
            }
        }
    }
    let local_rhs = |rv: &[f64], rp: &[f64]| -> Vec<Vector> {
        let mut poff = 0;
        hy.cond
            .iter()
            .enumerate()
            .map(|(c, cd)| {
                let pm = sys.cells[c].f.len();
                let nf = cd.free.len();
                let mut r = Vector::zeros(nf + pm);
                for (a, &i) in cd.free.iter().enumerate() {
                    let (g, s) = sys.maps[c][i];
                    if owner[g] == c {
                        r[a] = s * rv[g];
                    }
                }
                for g in 0..pm {
                    r[nf + g] = rp[poff + g];
                }
                poff += pm;
                r
            })
            .collect()
    };

    let mut velocity: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
    let mut pressure = vec![0.0; sys.n_pressure];
    let mut ell = 0.0;
    let rhs_norm = norm3(&residual(sys, &fixed, &velocity, &pressure, 0.0));
    let scale = if rhs_norm > 0.0 { rhs_norm } else { 1.0 };
    for step in 0..=REFINEMENT_STEPS {
        let (rv, rp, rg) = residual(sys, &fixed, &velocity, &pressure, ell);
        let rel = norm3(&(rv.clone(), rp.clone(), rg)) / scale;
        if step > 0 && rel <= 1e-3 * RESIDUAL_TOL {
            break;
        }
        let (dq, dp, dl) = hy.apply(sys, &local_rhs(&rv, &rp), rg);
        // shared DOFs are reached from both cells; keep the owner's value
        let mut seen = vec![false; sys.n_velocity];
        for (g, v) in dq {
            if !seen[g] {
                velocity[g] += v;
                seen[g] = true;
            }
        }
        for (x, d) in pressure.iter_mut().zip(dp) {
            *x += d;
        }
        ell += dl;
        log::trace!("hybrid step {step}: relative residual {rel:.3e}");
    }
    let multiplier = sys.gauge.as_ref().map(|_| ell);
    finish(sys, &fixed, velocity, pressure, multiplier, start, SolverKind::Hybrid).map(Some)
}

/// Sparse Cholesky of `H`, optionally with row and column `pin` removed.
fn cholesky(n: usize, trip: &[(usize, usize, f64)], pin: Option<usize>) -> std::result::Result<Llt<usize, f64>, String> {
    let idx = |i: usize| -> Option<usize> {
        match pin {
            Some(p) if i == p => None,
            Some(p) if i > p => Some(i - 1),
            _ => Some(i),
        }
    };
    let m = n - usize::from(pin.is_some());
    let reduced: Vec<(usize, usize, f64)> = trip
        .iter()
        .filter_map(|&(i, j, v)| Some((idx(i)?, idx(j)?, v)))
        .collect();
    sparse(m, &reduced)?
        .sp_cholesky(faer::Side::Lower)
        .map_err(|e| format!("multiplier matrix not positive definite: {e:?}"))
}
