//! Sizes of the splitting `[P_k]³ = ∇P_{k+1} ⊕ x ∧ [P_{k-1}]³` and of the
//! resulting degrees of freedom.

use curvem::poly::{build_vector_decomp, dim2, dim3};
use curvem::vem::DofLayout;

fn main() -> curvem::Result<()> {
    println!(" k  dim[P_k]^3  grad  cross  face DOFs  div DOFs  cross DOFs  hex DOFs");
    for k in 1..=4 {
        let d = build_vector_decomp(k)?;
        let l = DofLayout::new(k);
        assert_eq!(d.grad.ncols() + d.n_cross(), 3 * dim3(k));
        println!(
            "{k:>2} {:>11} {:>5} {:>6} {:>10} {:>9} {:>11} {:>9}",
            3 * dim3(k),
            d.grad.ncols(),
            d.n_cross(),
            dim2(k),
            l.n_div,
            l.n_cross,
            l.local_len(6)
        );
    }
    Ok(())
}
