//! The conditional relative entropy is not jointly convex in (α, β).

use privchange::scenarios::nonconvexity_probes;
use privchange::synthesis::{dc_gap, q_dc_decomposition};

fn main() -> privchange::Result<()> {
    for (k, ((a, b), (a2, b2))) in nonconvexity_probes().iter().enumerate() {
        let (q, f, g) = q_dc_decomposition(a, b)?;
        println!("probe {k}: q = {q:.5} = f − g = {f:.5} − {g:.5}");
        for i in 1..20 {
            let lam = i as f64 * 0.05;
            let d = dc_gap((a, b), (a2, b2), lam)?;
            println!("  lambda {lam:.2}  D_q {d:+.3e}");
        }
    }
    Ok(())
}
