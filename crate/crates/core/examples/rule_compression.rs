//! NNLS compression of a raw volume rule on a cell with a curved top: the
//! degree-2 moments are kept by at most `dim P_2 = 10` positive weights.

use curvem::experiments::quadcheck::compression_demo;
use curvem::mesh::curved_top_cube;
use curvem::quadrature::{volume_rule, volume_rule_raw};

fn main() -> curvem::Result<()> {
    env_logger::init();
    let c = compression_demo()?;
    println!(
        "4x4 face rules, 2-point segments: {} -> {} points, min weight {:.3e}, moment residual {:.1e}",
        c.raw_points, c.compressed_points, c.min_weight, c.moment_residual
    );

    let mesh = curved_top_cube(2, 0.1)?;
    for degree in [2, 4, 6] {
        let raw = volume_rule_raw(&mesh, 7, degree)?;
        let comp = volume_rule(&mesh, 7, degree, true)?;
        println!("cell 7, degree {degree}: {} -> {} points", raw.len(), comp.len());
    }
    Ok(())
}
