//! Convergence on the cube with sinusoidal layers, exact charts against flat
//! proxies. Pass the finest level as the first argument (default 2).

use curvem::experiments::converge::{run, quick_config};
use curvem::experiments::{Family, Levels};

fn main() -> curvem::Result<()> {
    let last = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let out = std::env::temp_dir().join("curvem_curved_top");
    for k in 1..=2 {
        let report = run(&quick_config(&out, Family::CurvedTop, k, Levels { first: 0, last }))?;
        for r in &report.rows {
            println!(
                "k={k} {:<7} level {} h {:.4}  e_v {:.3e}  e_p {:.3e}  slope_v {:>6.2}",
                r.geo.name(),
                r.level,
                r.h,
                r.e_v,
                r.e_p,
                r.slope_v
            );
        }
    }
    println!("tables in {}", out.display());
    Ok(())
}
