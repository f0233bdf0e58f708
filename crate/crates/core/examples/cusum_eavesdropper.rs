//! An eavesdropper running CUSUM on the log-likelihood ratio.

use privchange::detection::{estimate_delay, estimate_false_alarm, LlrMode};
use privchange::mdp::{ChangeScenario, Policy};
use privchange::metrics::{full_info_rate, limited_info_rate};
use privchange::scenarios::three_state_models;
use privchange::synthesis::best_privacy_full;

fn main() -> privchange::Result<()> {
    let (m0, m1) = three_state_models();
    let u = Policy::uniform(3, 2);
    let private = best_privacy_full(&m0, &m1)?.pi1;

    for (name, pi) in [("uniform", u), ("private", private)] {
        let sc = ChangeScenario::new(m0.clone(), m1.clone(), pi.clone(), pi.clone(), 100)?;
        let i_f = full_info_rate(&m0, &m1, &pi, &pi)?;
        let i_l = limited_info_rate(&m0, &m1, &pi, &pi)?;
        for (mode, rate) in [(LlrMode::Full, i_f), (LlrMode::Limited, i_l)] {
            let d = estimate_delay(&sc, mode, 8.0, 500, 3000, 1)?;
            let fa = estimate_false_alarm(&sc, mode, 8.0, 200, 3000, 2)?;
            println!(
                "{name:>8} {mode:?}: rate {rate:.4}, delay {:.1} ± {:.1} (c/I = {:.1}), false alarms {:.0}%",
                d.mean_delay,
                d.ci_halfwidth,
                8.0 / rate,
                100.0 * fa.false_alarm_rate.unwrap_or(0.0)
            );
        }
    }
    Ok(())
}
