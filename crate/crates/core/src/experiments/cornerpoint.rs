//! Flow through a three-layer corner-point column: pressure 1 at the bottom,
//! 0 at the top, no flow through the sides.

use std::sync::Arc;

use super::{sci, write_atomic, RunConfig};
use crate::darcy::{errors, local_mass_conservation, run_with, Discretization, Exact, ProblemSpec, Solution};
use crate::mesh::{cornerpoint_layers, PolyMesh};
use crate::poly::dim3;
use crate::vem::VemOptions;
use crate::{Error, Result, Vec3};

/// Permeability of the low-permeability middle layer.
pub const MIDDLE_KAPPA: f64 = 0.01;
/// Centerline sample count; `(s + ½)/SAMPLES` never hits a layer interface.
pub const SAMPLES: usize = 96;
/// Share of the pressure drop expected across the middle layer.
pub const MIDDLE_SHARE: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Flat layers, `κ = 1` everywhere.
    Homogeneous,
    /// Flat layers, `κ = (1, 0.01, 1)`.
    Flat,
    /// Bilinear layer interfaces, `κ = (1, 0.01, 1)`.
    Curved,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Homogeneous, Variant::Flat, Variant::Curved];

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Homogeneous => "homogeneous",
            Variant::Flat => "flat",
            Variant::Curved => "curved",
        }
    }

    pub fn permeability(&self) -> [f64; 3] {
        match self {
            Variant::Homogeneous => [1.0; 3],
            _ => [1.0, MIDDLE_KAPPA, 1.0],
        }
    }
}

/// `2^l × 2^l` pillars and `2^(l-1)` cells per layer.
pub fn level_mesh(variant: Variant, level: usize) -> Result<PolyMesh> {
    if level == 0 {
        return Err(Error::InvalidArgument("corner-point levels start at 1".into()));
    }
    cornerpoint_layers(1 << level, 1 << (level - 1), variant == Variant::Curved)
}

/// Exact 1D solution of a layered column with unit pressure drop and `μ = 1`:
/// `p(z) = 1 - q ∫_0^z 1/κ`, `q = 1 / Σ t_i/κ_i`.
#[derive(Debug, Clone, Copy)]
pub struct SeriesColumn {
    pub kappa: [f64; 3],
    /// Layer interfaces `0 = z_0 < z_1 < z_2 < z_3 = 1`.
    pub z: [f64; 4],
}

impl SeriesColumn {
    pub fn flux(&self) -> f64 {
        1.0 / (0..3).map(|i| (self.z[i + 1] - self.z[i]) / self.kappa[i]).sum::<f64>()
    }

    pub fn pressure(&self, z: f64) -> f64 {
        let mut r = 0.0;
        for i in 0..3 {
            let top = z.min(self.z[i + 1]);
            if top > self.z[i] {
                r += (top - self.z[i]) / self.kappa[i];
            }
        }
        1.0 - self.flux() * r
    }

    /// Share of the total drop taken by each layer.
    pub fn drop_fractions(&self) -> [f64; 3] {
        let q = self.flux();
        std::array::from_fn(|i| q * (self.z[i + 1] - self.z[i]) / self.kappa[i])
    }
}

pub fn flat_column(variant: Variant) -> SeriesColumn {
    SeriesColumn {
        kappa: variant.permeability(),
        z: [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
    }
}

pub fn problem(variant: Variant, k: usize) -> ProblemSpec {
    let exact = match variant {
        Variant::Curved => None,
        _ => {
            let col = flat_column(variant);
            let q = col.flux();
            Some(Exact {
                p: Arc::new(move |x: &Vec3| col.pressure(x.z)),
                q: Arc::new(move |_| Vec3::new(0.0, 0.0, q)),
            })
        }
    };
    ProblemSpec {
        options: VemOptions::new(k),
        permeability: variant.permeability().to_vec(),
        viscosity: 1.0,
        pressure_bc: Arc::new(|x| 1.0 - x.z),
        flux_bc: Arc::new(|_| Vec3::zeros()),
        source: Arc::new(|_| 0.0),
        body_force: None,
        exact,
    }
}

/// Pressure along the pillar `x = y = ½` of a level mesh.
#[derive(Debug, Clone)]
pub struct Centerline {
    pub z: Vec<f64>,
    pub p: Vec<f64>,
    /// Per layer: pressure at its bottom minus pressure at its top, from inside the layer.
    pub layer_drops: [f64; 3],
}

impl Centerline {
    pub fn drop_fractions(&self) -> [f64; 3] {
        let total: f64 = self.layer_drops.iter().sum();
        self.layer_drops.map(|d| d / total)
    }

    pub fn is_monotone(&self) -> bool {
        self.p.windows(2).all(|w| w[1] <= w[0] + 1e-12)
    }
}

/// Samples `p_h` on the centre pillar. The pillar is an edge of four cells per
/// layer and `p_h` is discontinuous there; the value taken is the mean of the
/// four one-sided traces. Cells of the generator are numbered `(k n + j) n + i`.
pub fn centerline(mesh: &PolyMesh, disc: &Discretization, sol: &Solution, level: usize) -> Result<Centerline> {
    let n = 1usize << level;
    let per_layer = 1usize << (level - 1);
    let nz = 3 * per_layer;
    let half = n / 2;
    let vid = |kz: usize| (kz * (n + 1) + half) * (n + 1) + half;
    let horizons: Vec<f64> = (0..=nz).map(|kz| mesh.vertices[vid(kz)].z).collect();
    let pillar = mesh.vertices[vid(0)];
    if (pillar.x - 0.5).abs() > 1e-12 || (pillar.y - 0.5).abs() > 1e-12 || mesh.n_cells() != n * n * nz {
        return Err(Error::InvalidArgument("not a corner-point level mesh".into()));
    }
    let pm = dim3(disc.k() - 1);
    let eval = |kz: usize, z: f64| {
        let x = Vec3::new(0.5, 0.5, z);
        let mut sum = 0.0;
        for j in [half - 1, half] {
            for i in [half - 1, half] {
                let c = (kz * n + j) * n + i;
                let off = disc.pressure_offset(c);
                sum += disc.locals[c].eval_pressure(&sol.pressure[off..off + pm], &x);
            }
        }
        0.25 * sum
    };
    let mut zs = Vec::with_capacity(SAMPLES);
    let mut ps = Vec::with_capacity(SAMPLES);
    for s in 0..SAMPLES {
        let z = (s as f64 + 0.5) / SAMPLES as f64;
        let kz = horizons[1..].iter().position(|&top| z < top).unwrap_or(nz - 1);
        zs.push(z);
        ps.push(eval(kz, z));
    }
    let layer_drops = std::array::from_fn(|l| {
        let (lo, hi) = (l * per_layer, (l + 1) * per_layer - 1);
        eval(lo, horizons[lo]) - eval(hi, horizons[hi + 1])
    });
    Ok(Centerline {
        z: zs,
        p: ps,
        layer_drops,
    })
}

/// Cell means of `p_h`.
pub fn pressure_means(disc: &Discretization, sol: &Solution) -> Vec<f64> {
    let pm = dim3(disc.k() - 1);
    disc.locals
        .iter()
        .enumerate()
        .map(|(c, lv)| {
            let off = disc.pressure_offset(c);
            let pc = &sol.pressure[off..off + pm];
            lv.volume_rule.integrate(|x| lv.eval_pressure(pc, x)) / lv.volume
        })
        .collect()
}

/// Legacy ASCII VTK of a hexahedral mesh (bottom and top faces first in every
/// cell, as the corner-point generator builds them) with cell scalars.
pub fn vtk_legacy(mesh: &PolyMesh, title: &str, scalars: &[(&str, Vec<f64>)]) -> Result<String> {
    let mut out = format!("# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    out += &format!("POINTS {} double\n", mesh.vertices.len());
    for v in &mesh.vertices {
        out += &format!("{} {} {}\n", v.x, v.y, v.z);
    }
    let nc = mesh.n_cells();
    out += &format!("CELLS {nc} {}\n", 9 * nc);
    for (c, cell) in mesh.cells.iter().enumerate() {
        let bad = || Error::InvalidMesh(format!("cell {c} is not a corner-point hexahedron"));
        if cell.faces.len() != 6 {
            return Err(bad());
        }
        let bottom = &mesh.faces[cell.faces[0].0].vertex_loop;
        let top = &mesh.faces[cell.faces[1].0].vertex_loop;
        if bottom.len() != 4 || top.len() != 4 {
            return Err(bad());
        }
        // pair every bottom corner with the top corner on the same pillar
        let mut ids = bottom.clone();
        for &b in bottom {
            let pb = mesh.vertices[b];
            let t = top
                .iter()
                .copied()
                .find(|&t| {
                    let pt = mesh.vertices[t];
                    (pt.x - pb.x).abs() < 1e-12 && (pt.y - pb.y).abs() < 1e-12
                })
                .ok_or_else(bad)?;
            ids.push(t);
        }
        out += "8";
        for i in ids {
            out += &format!(" {i}");
        }
        out.push('\n');
    }
    out += &format!("CELL_TYPES {nc}\n");
    out += &"12\n".repeat(nc);
    out += &format!("CELL_DATA {nc}\n");
    for (name, values) in scalars {
        out += &format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n");
        for v in values {
            out += &format!("{v}\n");
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct LevelResult {
    pub variant: Variant,
    pub level: usize,
    pub centerline: Centerline,
    pub mass_residual: f64,
    /// `e_p` against the 1D solution, for the flat variants.
    pub e_p: Option<f64>,
    pub dofs: usize,
}

#[derive(Debug, Clone)]
pub struct CornerReport {
    pub results: Vec<LevelResult>,
    /// RMS difference of successive centerline profiles per variant.
    pub profile_differences: Vec<(Variant, Vec<f64>)>,
    pub failures: Vec<String>,
}

pub fn run_level(variant: Variant, level: usize, k: usize, cfg: &RunConfig) -> Result<(LevelResult, String)> {
    let mesh = level_mesh(variant, level)?;
    let mut spec = problem(variant, k);
    spec.options.quad_degree = cfg.quad_degree;
    let (disc, sol) = run_with(&mesh, &spec, cfg.solver)?;
    let mb = local_mass_conservation(&mesh, &disc, &spec, &sol)?;
    let e_p = match spec.exact {
        Some(_) => Some(errors(&mesh, &disc, &spec, &sol)?.e_p),
        None => None,
    };
    let line = centerline(&mesh, &disc, &sol, level)?;
    let material: Vec<f64> = mesh.cells.iter().map(|c| c.material as f64).collect();
    let kappa: Vec<f64> = mesh.cells.iter().map(|c| spec.permeability[c.material]).collect();
    let vtk = vtk_legacy(
        &mesh,
        &format!("corner-point {} level {level}", variant.name()),
        &[
            ("pressure_mean", pressure_means(&disc, &sol)),
            ("material", material),
            ("permeability", kappa),
        ],
    )?;
    Ok((
        LevelResult {
            variant,
            level,
            centerline: line,
            mass_residual: mb.max(),
            e_p,
            dofs: sol.dofs,
        },
        vtk,
    ))
}

pub fn run(cfg: &RunConfig) -> Result<CornerReport> {
    let k = cfg.k[0];
    let mut results = Vec::new();
    let mut failures = Vec::new();
    let mut profile_differences = Vec::new();
    for variant in Variant::ALL {
        let mut lines: Vec<&Centerline> = Vec::new();
        let first = results.len();
        for level in cfg.levels.iter() {
            let (res, vtk) = run_level(variant, level, k, cfg)?;
            write_atomic(&cfg.out, &format!("cornerpoint_{}_l{level}.vtk", variant.name()), &vtk)?;
            check_level(&res, &mut failures);
            results.push(res);
        }
        lines.extend(results[first..].iter().map(|r| &r.centerline));
        let diffs: Vec<f64> = lines
            .windows(2)
            .map(|w| {
                let s: f64 = w[0].p.iter().zip(&w[1].p).map(|(a, b)| (a - b).powi(2)).sum();
                (s / SAMPLES as f64).sqrt()
            })
            .collect();
        if variant == Variant::Curved && diffs.windows(2).any(|w| w[1] >= w[0]) {
            failures.push(format!("curved centerline profiles do not settle: {diffs:?}"));
        }
        write_profiles(cfg, variant, &results[first..])?;
        profile_differences.push((variant, diffs));
    }
    let mut drops = String::from("variant,level,bottom,middle,top,exact_bottom,exact_middle,exact_top,mass_residual,dofs\n");
    for r in &results {
        let f = r.centerline.drop_fractions();
        let e = match r.variant {
            Variant::Curved => [f64::NAN; 3],
            v => flat_column(v).drop_fractions(),
        };
        drops += &format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.variant.name(),
            r.level,
            sci(f[0]),
            sci(f[1]),
            sci(f[2]),
            sci(e[0]),
            sci(e[1]),
            sci(e[2]),
            sci(r.mass_residual),
            r.dofs
        );
    }
    write_atomic(&cfg.out, "layer_drops.csv", &drops)?;
    Ok(CornerReport {
        results,
        profile_differences,
        failures,
    })
}

fn check_level(r: &LevelResult, failures: &mut Vec<String>) {
    let tag = format!("{} level {}", r.variant.name(), r.level);
    if r.mass_residual > 1e-10 {
        failures.push(format!("{tag}: mass balance {:.2e}", r.mass_residual));
    }
    if !r.centerline.is_monotone() {
        failures.push(format!("{tag}: centerline pressure not monotone"));
    }
    let frac = r.centerline.drop_fractions();
    match r.variant {
        Variant::Homogeneous => {
            let dev = r
                .centerline
                .z
                .iter()
                .zip(&r.centerline.p)
                .map(|(z, p)| (p - (1.0 - z)).abs())
                .fold(0.0, f64::max);
            if dev > 1e-8 || r.e_p.is_some_and(|e| e > 1e-8) {
                failures.push(format!("{tag}: pressure not linear in z ({dev:.2e})"));
            }
        }
        Variant::Flat => {
            let exact = flat_column(Variant::Flat).drop_fractions();
            if frac.iter().zip(&exact).any(|(a, b)| (a - b).abs() > 0.01 * b) {
                failures.push(format!("{tag}: drop fractions {frac:?} differ from {exact:?}"));
            }
        }
        Variant::Curved => {}
    }
    if r.variant != Variant::Homogeneous && frac[1] < MIDDLE_SHARE {
        failures.push(format!("{tag}: middle layer takes only {:.3} of the drop", frac[1]));
    }
}

fn write_profiles(cfg: &RunConfig, variant: Variant, results: &[LevelResult]) -> Result<()> {
    let Some(first) = results.first() else {
        return Ok(());
    };
    let mut csv = String::from("z");
    for r in results {
        csv += &format!(",p_level{}", r.level);
    }
    csv.push('\n');
    let mut dat = String::from("# z p(level) ...\n");
    for (s, z) in first.centerline.z.iter().enumerate() {
        let vals: Vec<String> = results.iter().map(|r| sci(r.centerline.p[s])).collect();
        csv += &format!("{},{}\n", sci(*z), vals.join(","));
        dat += &format!("{} {}\n", sci(*z), vals.join(" "));
    }
    write_atomic(&cfg.out, &format!("centerline_{}.csv", variant.name()), &csv)?;
    write_atomic(&cfg.out, &format!("centerline_{}.dat", variant.name()), &dat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_column_closed_form() {
        let c = flat_column(Variant::Flat);
        // resistances 1/3, 100/3, 1/3 add up to 34
        assert!((c.flux() - 1.0 / 34.0).abs() < 1e-15);
        let f = c.drop_fractions();
        assert!((f[1] - 100.0 / 102.0).abs() < 1e-14 && (f[0] - 1.0 / 102.0).abs() < 1e-14);
        assert!((c.pressure(1.0)).abs() < 1e-14 && (c.pressure(0.0) - 1.0).abs() < 1e-15);
        assert!((c.pressure(1.0 / 3.0) - (1.0 - 1.0 / 102.0)).abs() < 1e-14);
    }

    #[test]
    fn homogeneous_level_one_is_linear() {
        let cfg = RunConfig::defaults(super::super::Subcommand::Cornerpoint);
        let (r, vtk) = run_level(Variant::Homogeneous, 1, 2, &cfg).unwrap();
        assert!(r.centerline.is_monotone());
        for (z, p) in r.centerline.z.iter().zip(&r.centerline.p) {
            assert!((p - (1.0 - z)).abs() < 1e-8);
        }
        assert!(vtk.contains("CELL_TYPES 12\n"));
        assert_eq!(vtk.matches("\n8 ").count(), 12);
    }
}
