//! The hybridized solver against the direct sparse LU on the same system.

use curvem::darcy::{assemble, solve_with, Discretization, SolverKind};
use curvem::experiments::{annulus_problem, Family};

fn main() -> curvem::Result<()> {
    let mesh = Family::AnnulusQuad.mesh(1)?;
    let spec = annulus_problem(2);
    let disc = Discretization::new(&mesh, &spec.options)?;
    let sys = assemble(&mesh, &disc, &spec)?;
    let h = solve_with(&sys, SolverKind::Hybrid)?;
    let d = solve_with(&sys, SolverKind::Direct)?;
    let diff = h
        .velocity
        .iter()
        .chain(&h.pressure)
        .zip(d.velocity.iter().chain(&d.pressure))
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    println!("{} unknowns", h.dofs);
    println!("hybrid: residual {:.1e} in {:.3}s", h.residual, h.solve_seconds);
    println!("direct: residual {:.1e} in {:.3}s", d.residual, d.solve_seconds);
    println!("largest difference {diff:.1e}");
    Ok(())
}
