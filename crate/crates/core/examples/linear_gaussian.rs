//! Closed-form offsets for a linear system with an additive change.

use privchange::linear::{
    best_privacy_full_linear, best_privacy_limited_linear, expected_xsq_path, simulate_linear_ensemble,
    tradeoff_limited_linear,
};
use privchange::scenarios::example_linear_system;

fn main() -> privchange::Result<()> {
    let sys = example_linear_system();
    println!("best full-information rate {:.6}", best_privacy_full_linear(&sys)?);
    let (rate, dg) = best_privacy_limited_linear(&sys)?;
    println!("best limited-information rate {rate:.6} with control shift {:.6}", dg[0]);

    for rho in [0.0, 0.5, 1.0] {
        let s = tradeoff_limited_linear(&sys, rho, 1.5)?;
        println!("rho {rho}: alpha0 {:+.4} alpha1 {:+.4} V {:.4} I {:.4}", s.alpha0[0], s.alpha1[0], s.value, s.rate);
    }

    let s = tradeoff_limited_linear(&sys, 0.5, 1.5)?;
    let horizon = sys.nu + 20;
    let stats = simulate_linear_ensemble(&sys, &s.alpha0, &s.alpha1, horizon, 500, 7, false)?;
    let exact = expected_xsq_path(&sys, &s.alpha0, &s.alpha1, horizon, false)?;
    for st in stats.iter().skip(sys.nu - 3).step_by(4) {
        println!(
            "t={:>3} E|x|^2 ~ {:.3} [{:.3}, {:.3}]  exact {:.3}",
            st.step,
            st.mean_xsq,
            st.ci_low,
            st.ci_high,
            exact[st.step - 1]
        );
    }
    Ok(())
}
