//! Best privacy between P₀ and the mixture θP₀ + (1−θ)P₁.

use privchange::metrics::privacy_level;
use privchange::scenarios::three_state_models;
use privchange::synthesis::{best_privacy_full, best_privacy_limited, SynthesisConfig};

fn main() -> privchange::Result<()> {
    let (m0, m1) = three_state_models();
    let cfg = SynthesisConfig::default();
    println!("{:>5} {:>12} {:>12}", "theta", "privacy_F", "privacy_L");
    for theta in [0.0, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0] {
        let mt = m0.mixture(&m1, theta)?;
        let f = best_privacy_full(&m0, &mt)?;
        let l = best_privacy_limited(&m0, &mt, &cfg)?;
        println!("{theta:>5} {:>12.4} {:>12.4}", privacy_level(f.rate), privacy_level(l.rate));
    }
    Ok(())
}
