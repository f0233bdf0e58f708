//! Stationary distribution, occupancy measure and average reward of a policy.

use privchange::mdp::{ergodic_value, induced_chain, occupancy_from_policy, stationary_distribution, Policy};
use privchange::scenarios::three_state_models;

fn main() -> privchange::Result<()> {
    let (m0, _) = three_state_models();
    let pi = Policy::from_rows(&[vec![0.8, 0.2], vec![0.5, 0.5], vec![0.1, 0.9]])?;

    let chain = induced_chain(&m0, &pi)?;
    let mu = stationary_distribution(&chain)?;
    println!("closed-loop chain:{chain}");
    println!("stationary law: {:?}", mu.as_slice());

    let xi = occupancy_from_policy(&m0, &pi)?;
    println!("occupancy:{}", xi.matrix());
    println!("stationarity residual {:.1e}", xi.stationarity_residual(&m0));
    println!("average reward {:.6}", ergodic_value(&m0, &pi)?);
    Ok(())
}
