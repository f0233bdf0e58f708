//! Information rates leaked to full- and limited-information eavesdroppers.

use privchange::mdp::Policy;
use privchange::metrics::{full_info_breakdown, PrivacyReport};
use privchange::scenarios::three_state_models;

fn main() -> privchange::Result<()> {
    let (m0, m1) = three_state_models();
    let pi0 = Policy::uniform(3, 2);
    let pi1 = Policy::from_rows(&[vec![0.9, 0.1], vec![0.9, 0.1], vec![0.2, 0.8]])?;

    let parts = full_info_breakdown(&m0, &m1, &pi0, &pi1)?;
    println!("model term {:.6}, policy term {:.6}", parts.model_term, parts.policy_term);

    let report = PrivacyReport::compute(&m0, &m1, &pi0, &pi1)?;
    println!("I_F = {:.6}  (privacy {:.3})", report.i_f, report.privacy_full);
    println!("I_L = {:.6}  (privacy {:.3}), lower bound {:.6}", report.i_l, report.privacy_limited, report.i_l_lower);

    // A policy that never plays an action the pre-change policy uses makes
    // the full-information rate infinite.
    let det = Policy::deterministic(&[0, 0, 0], 2)?;
    let other = Policy::deterministic(&[1, 0, 0], 2)?;
    let r = PrivacyReport::compute(&m0, &m1, &det, &other)?;
    println!("deterministic mismatch: I_F = {}, I_L = {:.6}", r.i_f, r.i_l);
    Ok(())
}
