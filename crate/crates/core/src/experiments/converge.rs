//! Convergence study: error norms per level, fitted slopes and a verdict
//! against the expected orders.

use std::collections::BTreeMap;
use std::time::Instant;

use super::{sci, write_atomic, Family, GeoMode, RunConfig};
use crate::darcy::{errors, local_mass_conservation, run_with};
use crate::linalg::{fitted_slope, last_slope};
use crate::mesh::PolyMesh;
use crate::Result;

/// Relative mass-balance residual allowed on every cell.
pub const MASS_TOL: f64 = 1e-9;

/// Expected slope and tolerance: `k + 1` with exact charts, 2 with flat proxies.
pub fn expected_slope(k: usize, geo: GeoMode) -> (f64, f64) {
    match (geo, k) {
        (GeoMode::WithGeo, 3) => (4.0, 0.35),
        (GeoMode::WithGeo, _) => ((k + 1) as f64, 0.25),
        (GeoMode::NoGeo, 1) => (2.0, 0.25),
        (GeoMode::NoGeo, _) => (2.0, 0.3),
    }
}

#[derive(Debug, Clone)]
pub struct ConvergeRow {
    pub family: Family,
    pub level: usize,
    pub h: f64,
    pub k: usize,
    pub geo: GeoMode,
    pub e_v: f64,
    pub e_p: f64,
    /// `‖p_h - Π_{k-1} p‖`.
    pub e_p_proj: f64,
    /// Slopes against the previous level of the series.
    pub slope_v: f64,
    pub slope_p: f64,
    pub dofs: usize,
    pub solve_seconds: f64,
    pub mass_residual: f64,
    /// Mean-pressure multiplier of all-essential problems.
    pub source_shift: f64,
    pub residual: f64,
    /// Set when the run failed; the numbers are then NaN.
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SlopeSummary {
    pub family: Family,
    pub k: usize,
    pub geo: GeoMode,
    pub expected: f64,
    pub tolerance: f64,
    pub fitted_v: f64,
    pub last_v: f64,
    pub fitted_p: f64,
    pub last_p: f64,
    pub fitted_p_proj: f64,
}

impl SlopeSummary {
    pub fn pass_v(&self) -> bool {
        (self.fitted_v - self.expected).abs() <= self.tolerance
    }

    pub fn pass_p(&self) -> bool {
        (self.fitted_p - self.expected).abs() <= self.tolerance
    }
}

#[derive(Debug, Clone)]
pub struct ConvergeReport {
    pub rows: Vec<ConvergeRow>,
    pub summary: Vec<SlopeSummary>,
    /// `(family, level, e_v(k=3) / e_v(k=2))` of the flat-proxy runs.
    pub nogeo_ratio: Vec<(Family, usize, f64)>,
    pub failures: Vec<String>,
}

/// One solve. `h` is the size of the exact-chart mesh for both modes.
pub fn run_case(
    mesh: &PolyMesh,
    family: Family,
    level: usize,
    k: usize,
    geo: GeoMode,
    cfg: &RunConfig,
) -> ConvergeRow {
    let mut row = ConvergeRow {
        family,
        level,
        h: mesh.mesh_size().unwrap_or(f64::NAN),
        k,
        geo,
        e_v: f64::NAN,
        e_p: f64::NAN,
        e_p_proj: f64::NAN,
        slope_v: f64::NAN,
        slope_p: f64::NAN,
        dofs: 0,
        solve_seconds: 0.0,
        mass_residual: f64::NAN,
        source_shift: 0.0,
        residual: f64::NAN,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let m = geo.apply(mesh)?;
        let mut spec = family.problem(k);
        spec.options.quad_degree = cfg.quad_degree;
        let t = Instant::now();
        let (disc, sol) = run_with(&m, &spec, cfg.solver)?;
        let elapsed = t.elapsed().as_secs_f64();
        let e = errors(&m, &disc, &spec, &sol)?;
        let mb = local_mass_conservation(&m, &disc, &spec, &sol)?;
        row.e_v = e.e_v;
        row.e_p = e.e_p;
        row.e_p_proj = e.e_p_proj;
        row.dofs = sol.dofs;
        row.solve_seconds = if cfg.record_timings { elapsed } else { 0.0 };
        row.mass_residual = mb.relative();
        row.source_shift = mb.source_shift;
        row.residual = sol.residual;
        log::info!(
            "{} level {level} k={k} {}: e_v {:.3e} e_p {:.3e} ({} dofs, {elapsed:.2}s)",
            family.name(),
            geo.name(),
            e.e_v,
            e.e_p,
            sol.dofs
        );
        Ok(())
    })();
    if let Err(e) = outcome {
        log::warn!("{} level {level} k={k} {} failed: {e}", family.name(), geo.name());
        row.error = Some(e.to_string());
    }
    row
}

pub fn run(cfg: &RunConfig) -> Result<ConvergeReport> {
    let mut rows = Vec::new();
    for &family in &cfg.families {
        for level in cfg.levels.iter() {
            let mesh = family.mesh(level)?;
            for &k in &cfg.k {
                for geo in cfg.geo.modes() {
                    rows.push(run_case(&mesh, family, level, k, geo, cfg));
                }
            }
        }
    }
    rows.sort_by_key(|r| (r.family, r.k, r.geo, r.level));

    let mut failures = Vec::new();
    let mut series: BTreeMap<(Family, usize, GeoMode), Vec<usize>> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        series.entry((r.family, r.k, r.geo)).or_default().push(i);
        let tag = format!("{} level {} k={} {}", r.family.name(), r.level, r.k, r.geo.name());
        match &r.error {
            Some(e) => failures.push(format!("solve failed for {tag}: {e}")),
            None if !(r.mass_residual <= MASS_TOL) => {
                failures.push(format!("local mass balance {:.2e} for {tag}", r.mass_residual))
            }
            None => {}
        }
    }
    let mut summary = Vec::new();
    for (&(family, k, geo), idx) in &series {
        for w in idx.windows(2) {
            let (a, b) = (&rows[w[0]], &rows[w[1]]);
            let sv = (b.e_v / a.e_v).ln() / (b.h / a.h).ln();
            let sp = (b.e_p / a.e_p).ln() / (b.h / a.h).ln();
            rows[w[1]].slope_v = sv;
            rows[w[1]].slope_p = sp;
        }
        let ok: Vec<&ConvergeRow> = idx.iter().map(|&i| &rows[i]).filter(|r| r.error.is_none()).collect();
        if ok.len() < 2 {
            continue;
        }
        let h: Vec<f64> = ok.iter().map(|r| r.h).collect();
        let col = |f: fn(&ConvergeRow) -> f64| ok.iter().map(|r| f(r)).collect::<Vec<f64>>();
        let (ev, ep, epp) = (col(|r| r.e_v), col(|r| r.e_p), col(|r| r.e_p_proj));
        let (expected, tolerance) = expected_slope(k, geo);
        summary.push(SlopeSummary {
            family,
            k,
            geo,
            expected,
            tolerance,
            fitted_v: fitted_slope(&h, &ev),
            last_v: last_slope(&h, &ev),
            fitted_p: fitted_slope(&h, &ep),
            last_p: last_slope(&h, &ep),
            fitted_p_proj: fitted_slope(&h, &epp),
        });
    }
    let mut nogeo_ratio = Vec::new();
    for family in cfg.families.iter().filter(|f| **f != Family::CurvedTop) {
        for level in cfg.levels.iter() {
            let find = |k: usize| {
                rows.iter()
                    .find(|r| r.family == *family && r.level == level && r.k == k && r.geo == GeoMode::NoGeo)
                    .map(|r| r.e_v)
            };
            if let (Some(a), Some(b)) = (find(2), find(3)) {
                nogeo_ratio.push((*family, level, b / a));
            }
        }
    }

    write_tables(cfg, &rows, &summary, &nogeo_ratio)?;
    Ok(ConvergeReport {
        rows,
        summary,
        nogeo_ratio,
        failures,
    })
}

fn write_tables(
    cfg: &RunConfig,
    rows: &[ConvergeRow],
    summary: &[SlopeSummary],
    ratio: &[(Family, usize, f64)],
) -> Result<()> {
    let mut csv = String::from("family,level,h,k,geo_mode,e_v,e_p,slope_v,slope_p,dofs,solve_seconds\n");
    let mut diag = String::from("family,level,k,geo_mode,e_p_proj,mass_residual,source_shift,residual,error\n");
    for r in rows {
        csv += &format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.family.name(),
            r.level,
            sci(r.h),
            r.k,
            r.geo.name(),
            sci(r.e_v),
            sci(r.e_p),
            sci(r.slope_v),
            sci(r.slope_p),
            r.dofs,
            format_args!("{:.3}", r.solve_seconds)
        );
        diag += &format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.family.name(),
            r.level,
            r.k,
            r.geo.name(),
            sci(r.e_p_proj),
            sci(r.mass_residual),
            sci(r.source_shift),
            sci(r.residual),
            r.error.as_deref().unwrap_or("").replace([',', '\n'], ";")
        );
    }
    write_atomic(&cfg.out, "converge.csv", &csv)?;
    write_atomic(&cfg.out, "diagnostics.csv", &diag)?;

    let mut s = String::from(
        "family,k,geo_mode,expected,tolerance,fitted_v,last_v,fitted_p,last_p,fitted_p_proj,verdict_v,verdict_p\n",
    );
    let verdict = |b: bool| if b { "match" } else { "mismatch" };
    for x in summary {
        s += &format!(
            "{},{},{},{:.2},{:.2},{:.3},{:.3},{:.3},{:.3},{:.3},{},{}\n",
            x.family.name(),
            x.k,
            x.geo.name(),
            x.expected,
            x.tolerance,
            x.fitted_v,
            x.last_v,
            x.fitted_p,
            x.last_p,
            x.fitted_p_proj,
            verdict(x.pass_v()),
            verdict(x.pass_p())
        );
    }
    write_atomic(&cfg.out, "summary.csv", &s)?;

    if !ratio.is_empty() {
        let mut t = String::from("family,level,ev_k3_over_k2\n");
        for (f, l, r) in ratio {
            t += &format!("{},{l},{:.4}\n", f.name(), r);
        }
        write_atomic(&cfg.out, "nogeo_coincidence.csv", &t)?;
    }

    // one gnuplot data block per series: h e_v e_p e_p_proj
    let mut files: BTreeMap<String, String> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.error.is_none()) {
        let name = format!("{}_k{}_{}.dat", r.family.name(), r.k, r.geo.name());
        files
            .entry(name)
            .or_insert_with(|| "# h e_v e_p e_p_proj\n".to_string())
            .push_str(&format!("{} {} {} {}\n", sci(r.h), sci(r.e_v), sci(r.e_p), sci(r.e_p_proj)));
    }
    for (name, text) in files {
        write_atomic(&cfg.out, &name, &text)?;
    }
    Ok(())
}

/// Converge configuration for one family and degree, both chart modes.
pub fn quick_config(out: &std::path::Path, family: Family, k: usize, levels: super::Levels) -> RunConfig {
    let mut c = RunConfig::defaults(super::Subcommand::Converge);
    c.families = vec![family];
    c.k = vec![k];
    c.levels = levels;
    c.out = out.to_path_buf();
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{GeoSelection, Levels};

    #[test]
    fn expectations() {
        assert_eq!(expected_slope(2, GeoMode::WithGeo), (3.0, 0.25));
        assert_eq!(expected_slope(3, GeoMode::NoGeo), (2.0, 0.3));
    }

    #[test]
    fn small_study_writes_deterministic_tables() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = quick_config(dir.path(), Family::CurvedTop, 1, Levels { first: 0, last: 2 });
        cfg.geo = GeoSelection::Both;
        let a = run(&cfg).unwrap();
        assert!(a.failures.is_empty(), "{:?}", a.failures);
        assert_eq!(a.rows.len(), 6);
        assert_eq!(a.summary.len(), 2);
        let first = std::fs::read_to_string(dir.path().join("converge.csv")).unwrap();
        run(&cfg).unwrap();
        let second = std::fs::read_to_string(dir.path().join("converge.csv")).unwrap();
        assert_eq!(first, second);
        assert!(first.starts_with("family,level,h,k,geo_mode,e_v,e_p,slope_v,slope_p,dofs,solve_seconds\n"));
        assert!(dir.path().join("curved_top_k1_withGeo.dat").exists());
    }
}
