//! Convergence on the extruded half annulus with natural conditions on the two
//! cylinders, for both base meshes.

use curvem::experiments::converge::{quick_config, run};
use curvem::experiments::{Family, GeoSelection, Levels};

fn main() -> curvem::Result<()> {
    let out = std::env::temp_dir().join("curvem_annulus");
    for family in [Family::AnnulusQuad, Family::AnnulusTria] {
        let mut cfg = quick_config(&out, family, 2, Levels { first: 0, last: 2 });
        cfg.geo = GeoSelection::WithGeo;
        let report = run(&cfg)?;
        for s in &report.summary {
            println!(
                "{} k={} {}: fitted slope e_v {:.2} (expected {:.1}), e_p {:.2}",
                family.name(),
                s.k,
                s.geo.name(),
                s.fitted_v,
                s.expected,
                s.fitted_p
            );
        }
    }
    Ok(())
}
