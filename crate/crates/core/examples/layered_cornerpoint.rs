//! Three-layer corner-point column with a tight middle layer: pressure drop
//! shares along the centre pillar against the series-resistance formula.

use curvem::experiments::cornerpoint::{flat_column, run_level, Variant};
use curvem::experiments::{RunConfig, Subcommand};

fn main() -> curvem::Result<()> {
    let cfg = RunConfig::defaults(Subcommand::Cornerpoint);
    let exact = flat_column(Variant::Flat).drop_fractions();
    println!("series formula: {:.4} {:.4} {:.4}", exact[0], exact[1], exact[2]);
    for variant in [Variant::Flat, Variant::Curved] {
        for level in 1..=2 {
            let (r, _vtk) = run_level(variant, level, 2, &cfg)?;
            let f = r.centerline.drop_fractions();
            println!(
                "{:<7} level {level}: {:.4} {:.4} {:.4}  monotone {}  mass {:.1e}",
                variant.name(),
                f[0],
                f[1],
                f[2],
                r.centerline.is_monotone(),
                r.mass_residual
            );
        }
    }
    Ok(())
}
