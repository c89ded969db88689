//! Exact dual bounded-Lipschitz distances between small discrete measures.
//!
//! In one dimension the supremum over test functions is solved by a fast
//! sweep; `bl_distance_lp` solves the same problem as a dense linear program
//! and works in any dimension.

use filterlab::measures::{bl_distance, bl_distance_lp, tv_distance, DiscreteMeasure, Measure};

fn main() -> filterlab::Result<()> {
    // Two Dirac masses: the optimal test function is a clipped line.
    for t in [0.1, 0.5, 1.0, 2.0, 3.0] {
        let d = bl_distance(&DiscreteMeasure::dirac1(0.0), &DiscreteMeasure::dirac1(t))?;
        println!("bl(δ0, δ{t}) = {d:.6}");
    }

    let a = DiscreteMeasure::on_line(&[-1.0, 0.0, 2.5], &[0.2, 0.5, 0.3])?;
    let b = DiscreteMeasure::on_line(&[-0.5, 1.0], &[0.6, 0.4])?;
    let fast = bl_distance(&a, &b)?;
    let lp = bl_distance_lp(&a, &b)?;
    let tv = tv_distance(&Measure::Discrete(a), &Measure::Discrete(b))?;
    println!("fast path {fast:.9}, LP {lp:.9}, tv {tv:.3} (bl ≤ tv always)");

    // Two dimensions go through the LP.
    let p = DiscreteMeasure::new(2, vec![0.0, 0.0, 1.0, 1.0], vec![0.5, 0.5])?;
    let q = DiscreteMeasure::new(2, vec![0.0, 1.0, 1.0, 0.0], vec![0.5, 0.5])?;
    println!("2-d example: bl = {:.6}", bl_distance(&p, &q)?);
    Ok(())
}
