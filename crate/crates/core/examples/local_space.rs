//! One cell's virtual element space: the projector reproduces polynomial fields
//! exactly on straight cells, and only up to a geometry defect on curved ones.

use curvem::experiments::selftest::{chart_kind_cases, local_space, projector_defect, stabilization_defect};
use curvem::linalg::sym_eigenvalues;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> curvem::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (kind, mesh, cell) in chart_kind_cases()? {
        for k in 1..=3 {
            let lv = local_space(&mesh, cell, k, None)?;
            let (a, _, _) = lv.local_forms(1.0)?;
            let ev = sym_eigenvalues(&a);
            println!(
                "{kind:<9} k={k}  dofs {:>3}  Π∘I defect {:.1e}  ‖SD‖/‖S‖ {:.1e}  λ(A_h)/|P| in [{:.3}, {:.3}]",
                lv.ndof(),
                projector_defect(&lv, 20, &mut rng),
                stabilization_defect(&lv)?,
                ev[0] / lv.volume,
                ev[ev.len() - 1] / lv.volume
            );
        }
    }
    Ok(())
}
