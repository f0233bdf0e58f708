//! Policies that minimize what an eavesdropper learns about the change.

use privchange::scenarios::three_state_models;
use privchange::synthesis::{best_privacy_full, best_privacy_limited, SynthesisConfig};

fn main() -> privchange::Result<()> {
    let (m0, m1) = three_state_models();

    let full = best_privacy_full(&m0, &m1)?;
    println!("full information: I = {:.6}, privacy {:.3}", full.rate, 1.0 / full.rate);
    println!("  shared policy:{}", full.pi1.matrix());

    let cfg = SynthesisConfig { restarts: 8, seed: 1, ..Default::default() };
    let lim = best_privacy_limited(&m0, &m1, &cfg)?;
    println!(
        "limited information: I = {:.6}, privacy {:.3} (start {}, {} CCP iterations, converged {})",
        lim.rate,
        1.0 / lim.rate,
        lim.restart_index,
        lim.iterations,
        lim.converged
    );
    println!("  pre-change policy:{}", lim.pi0.matrix());
    println!("  post-change policy:{}", lim.pi1.matrix());
    Ok(())
}
