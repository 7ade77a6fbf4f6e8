//! Divergence-theorem volume rules on the half annulus: relative error of
//! `∫ √(x² + y²) + z` against its closed form, by Gauss points per direction.

use curvem::experiments::quadcheck::{annulus_integral, annulus_mesh, integrate, ANNULUS_MESHES};

fn main() -> curvem::Result<()> {
    let exact = annulus_integral();
    println!("exact value {exact:.15}");
    for (name, nr, nt) in ANNULUS_MESHES {
        let mesh = annulus_mesh(nr, nt)?;
        print!("{name} ({} cells):", mesh.n_cells());
        for g in 1..=4 {
            let s = integrate(&mesh, g, |x| (x.x * x.x + x.y * x.y).sqrt() + x.z)?;
            print!("  g={g} {:.2e}", ((s - exact) / exact).abs());
        }
        println!();
    }
    Ok(())
}
