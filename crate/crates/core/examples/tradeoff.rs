//! Reward versus privacy: sweep the privacy weight λ.

use privchange::scenarios::three_state_models;
use privchange::synthesis::{tradeoff_full, tradeoff_limited, SynthesisConfig};

fn main() -> privchange::Result<()> {
    let (m0, m1) = three_state_models();
    let cfg = SynthesisConfig::default();
    let rho = 0.5;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "lambda", "V_full", "I_F", "V_lim", "I_L");
    for lambda in [0.0, 0.1, 0.5, 1.0, 2.0, 5.0] {
        let f = tradeoff_full(&m0, &m1, rho, lambda, &cfg)?;
        let l = tradeoff_limited(&m0, &m1, rho, lambda, &cfg)?;
        println!("{lambda:>6} {:>10.5} {:>10.5} {:>10.5} {:>10.5}", f.value, f.rate, l.value, l.rate);
    }
    Ok(())
}
