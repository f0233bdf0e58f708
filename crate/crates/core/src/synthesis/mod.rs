//! Policy synthesis: best achievable privacy and privacy-utility trade-offs,
//! for full- and limited-information eavesdroppers.
//!
//! Problems are posed over stationary occupancy measures `ξ_{x,u} = μ(x)π(u|x)`.
//! The full-information best-privacy problem is a single LP; the others are
//! difference-of-convex programs solved by [`ccp`] from several starts.

pub mod barrier;
pub mod ccp;
pub mod dc;
pub mod lp;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::{serde_f64, serde_vec_f64};
use crate::mdp::{
    ergodic_value, occupancy_from_policy, policy_from_occupancy, Mdp, OccupancyMeasure,
    Policy,
};
use crate::metrics::{full_info_rate, kl_unchecked, limited_info_rate};
use crate::rng::{derive_seed, seeded};

pub use ccp::{CcpRun, DcKind, DcProblem};
pub use dc::{dc_gap, q_dc_decomposition};
pub use lp::solve_occupancy_lp;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisConfig {
    pub ccp_max_iters: usize,
    pub ccp_tol: f64,
    pub inner_max_iters: usize,
    pub inner_tol: f64,
    pub epsilon_floor: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            ccp_max_iters: 50,
            ccp_tol: 1e-7,
            inner_max_iters: 5000,
            inner_tol: 1e-8,
            epsilon_floor: 1e-12,
            restarts: 5,
            seed: 0,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ccp_max_iters == 0 || self.inner_max_iters == 0 {
            return Err(Error::InvalidArgument("iteration limits must be >= 1".into()));
        }
        for (name, v) in [("ccp_tol", self.ccp_tol), ("inner_tol", self.inner_tol), ("epsilon_floor", self.epsilon_floor)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub xi0: OccupancyMeasure,
    pub xi1: OccupancyMeasure,
    pub pi0: Policy,
    pub pi1: Policy,
    /// Minimized objective: the rate for best-privacy problems, `−V + λI` for trade-offs.
    pub objective: f64,
    /// `I_F` or `I_L` re-evaluated at `(π₀, π₁)`.
    pub rate: f64,
    /// `V(ρ,π₀,π₁)`; for best-privacy problems the post-change average reward.
    pub value: f64,
    pub feasibility_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restart_index: usize,
    pub history: Vec<f64>,
}

#[derive(Serialize)]
struct SynthesisRecord<'a> {
    xi0: Vec<Vec<f64>>,
    xi1: Vec<Vec<f64>>,
    pi0: Vec<Vec<f64>>,
    pi1: Vec<Vec<f64>>,
    #[serde(with = "serde_f64")]
    objective: f64,
    #[serde(with = "serde_f64")]
    rate: f64,
    #[serde(with = "serde_f64")]
    privacy_level: f64,
    #[serde(with = "serde_f64")]
    value: f64,
    feasibility_residual: f64,
    iterations: usize,
    converged: bool,
    restart_index: usize,
    #[serde(with = "serde_vec_f64")]
    history: &'a Vec<f64>,
}

impl Serialize for SynthesisResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SynthesisRecord {
            xi0: self.xi0.to_rows(),
            xi1: self.xi1.to_rows(),
            pi0: self.pi0.to_rows(),
            pi1: self.pi1.to_rows(),
            objective: self.objective,
            rate: self.rate,
            privacy_level: crate::metrics::privacy_level(self.rate),
            value: self.value,
            feasibility_residual: self.feasibility_residual,
            iterations: self.iterations,
            converged: self.converged,
            restart_index: self.restart_index,
            history: &self.history,
        }
        .serialize(s)
    }
}

fn check_rho_lambda(rho: f64, lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!("rho {rho} outside [0,1]")));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda {lambda} must be finite and >= 0")));
    }
    Ok(())
}

/// `D(P₁(x,u) ‖ P₀(x,u))` for every pair.
pub fn model_kl_table(m0: &Mdp, m1: &Mdp) -> Result<DMatrix<f64>> {
    crate::mdp::check_same_shape(m0, m1)?;
    let n = m0.n_states();
    Ok(DMatrix::from_fn(n, m0.n_actions(), |x, u| {
        kl_unchecked((0..n).map(|y| (m1.prob(x, u, y), m0.prob(x, u, y))))
    }))
}

fn dot_finite(xi: &DMatrix<f64>, cost: &DMatrix<f64>) -> f64 {
    xi.iter().zip(cost.iter()).filter(|(x, _)| **x > 0.0).map(|(x, c)| x * c).sum()
}

fn occ_residual(xi: &OccupancyMeasure, m: &Mdp) -> f64 {
    xi.stationarity_residual(m).max((xi.matrix().sum() - 1.0).abs())
}

fn value_of(m0: &Mdp, m1: &Mdp, rho: f64, xi0: &OccupancyMeasure, xi1: &OccupancyMeasure) -> f64 {
    rho * xi1.matrix().component_mul(m1.reward()).sum() + (1.0 - rho) * xi0.matrix().component_mul(m0.reward()).sum()
}

/// Minimum of `I_F` over policy pairs: an LP over the occupancy polytope of
/// `M₁` with cost `D(P₁(x,u)‖P₀(x,u))`; the optimal pair has `π₀ = π₁`.
pub fn best_privacy_full(m0: &Mdp, m1: &Mdp) -> Result<SynthesisResult> {
    let cost = model_kl_table(m0, m1)?;
    let xi1 = solve_occupancy_lp(&cost, m1)?;
    let pi = policy_from_occupancy(&xi1);
    let xi0 = occupancy_from_policy(m0, &pi)?;
    let objective = dot_finite(xi1.matrix(), &cost);
    let rate = full_info_rate(m0, m1, &pi, &pi)?;
    Ok(SynthesisResult {
        feasibility_residual: occ_residual(&xi1, m1).max(occ_residual(&xi0, m0)),
        value: ergodic_value(m1, &pi)?,
        xi0,
        xi1,
        pi0: pi.clone(),
        pi1: pi,
        objective,
        rate,
        iterations: 1,
        converged: true,
        restart_index: 0,
        history: vec![objective],
    })
}

/// Dirichlet(1) random policy.
fn random_policy(n: usize, na: usize, seed: u64) -> Policy {
    let mut rng = seeded(seed);
    let w = DMatrix::from_fn(n, na, |_, _| rng.sample::<f64, _>(Exp1));
    Policy::from_weights(&w).expect("positive weights")
}

/// Run CCP from every start in parallel; best objective wins, ties go to the
/// lower start index.
fn multistart(problem: &DcProblem, starts: &[(Policy, Policy)], cfg: &SynthesisConfig) -> Result<(CcpRun, usize)> {
    let runs: Vec<Result<CcpRun>> = starts
        .par_iter()
        .map(|(p0, p1)| problem.start_from_policies(p0, p1).map(|z| problem.run(&z, cfg)))
        .collect();
    let mut best: Option<(CcpRun, usize)> = None;
    let mut first_err = None;
    for (i, r) in runs.into_iter().enumerate() {
        match r {
            Ok(run) => {
                if best.as_ref().is_none_or(|(b, _)| run.objective < b.objective) {
                    best = Some((run, i));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.unwrap_or_else(|| Error::InvalidArgument("no starting points".into())))
}

/// Uniform start, then `cfg.restarts` Dirichlet starts, then the warm starts.
fn start_list(n: usize, na: usize, cfg: &SynthesisConfig, warm: Vec<(Policy, Policy)>) -> Vec<(Policy, Policy)> {
    let mut starts = vec![(Policy::uniform(n, na), Policy::uniform(n, na))];
    for i in 0..cfg.restarts as u64 {
        starts.push((
            random_policy(n, na, derive_seed(cfg.seed, 2 * i)),
            random_policy(n, na, derive_seed(cfg.seed, 2 * i + 1)),
        ));
    }
    starts.extend(warm);
    starts
}

/// Local minimum of `I_L` over `(π₀, ξ¹)`, best of several CCP runs.
pub fn best_privacy_limited(m0: &Mdp, m1: &Mdp, cfg: &SynthesisConfig) -> Result<SynthesisResult> {
    cfg.validate()?;
    let problem = DcProblem::new(DcKind::BestPrivacyLimited, m0, m1, cfg.epsilon_floor)?;
    let full = best_privacy_full(m0, m1).ok();
    let warm: Vec<_> = full.iter().map(|f| (f.pi0.clone(), f.pi1.clone())).collect();
    let starts = start_list(m0.n_states(), m0.n_actions(), cfg, warm);
    let (run, idx) = multistart(&problem, &starts, cfg)?;

    let (alpha, xi1) = problem.split(&run.z);
    let pi0 = Policy::from_weights(&alpha)?;
    let xi1 = normalized(xi1)?;
    let pi1 = policy_from_occupancy(&xi1);
    let xi0 = occupancy_from_policy(m0, &pi0)?;
    let best = SynthesisResult {
        rate: limited_info_rate(m0, m1, &pi0, &pi1)?,
        value: ergodic_value(m1, &pi1)?,
        feasibility_residual: problem.feasibility_residual(&run.z).max(occ_residual(&xi1, m1)),
        xi0,
        xi1,
        pi0,
        pi1,
        objective: run.objective,
        iterations: run.iterations,
        converged: run.converged,
        restart_index: idx,
        history: run.history,
    };

    // The full-information optimum (π, π), taken as is, is itself a candidate;
    // it is exact when the models coincide. Compared on certified rates since
    // the CCP objective can dip below zero by roundoff.
    if let Some(full) = full {
        let rate = limited_info_rate(m0, m1, &full.pi0, &full.pi1)?;
        if rate <= best.rate {
            return Ok(SynthesisResult {
                rate,
                objective: rate,
                iterations: 0,
                restart_index: starts.len(),
                history: vec![rate],
                ..full
            });
        }
    }
    Ok(best)
}

fn normalized(m: DMatrix<f64>) -> Result<OccupancyMeasure> {
    let s = m.sum();
    OccupancyMeasure::new(m / s)
}

/// Independent average-reward LPs for `M₀` and `M₁` (the `λ = 0` case).
fn reward_lps(m0: &Mdp, m1: &Mdp) -> Result<(OccupancyMeasure, OccupancyMeasure)> {
    Ok((solve_occupancy_lp(&(-m0.reward()), m0)?, solve_occupancy_lp(&(-m1.reward()), m1)?))
}

/// `ρ = 1`: the LP on the modified reward `r₁ − λD(P₁‖P₀)` with `π₀ = π₁`.
fn modified_reward_lp(m0: &Mdp, m1: &Mdp, lambda: f64) -> Result<(OccupancyMeasure, OccupancyMeasure, f64)> {
    let d1 = model_kl_table(m0, m1)?;
    let cost = d1.zip_map(m1.reward(), |d, r| if d.is_infinite() { d } else { lambda * d - r });
    let xi1 = solve_occupancy_lp(&cost, m1)?;
    let pi = policy_from_occupancy(&xi1);
    let xi0 = occupancy_from_policy(m0, &pi)?;
    let obj = dot_finite(xi1.matrix(), &cost);
    Ok((xi0, xi1, obj))
}

fn lp_result(
    m0: &Mdp,
    m1: &Mdp,
    rho: f64,
    xi0: OccupancyMeasure,
    xi1: OccupancyMeasure,
    objective: f64,
    limited: bool,
) -> Result<SynthesisResult> {
    let pi0 = policy_from_occupancy(&xi0);
    let pi1 = policy_from_occupancy(&xi1);
    let rate = if limited { limited_info_rate(m0, m1, &pi0, &pi1)? } else { full_info_rate(m0, m1, &pi0, &pi1)? };
    Ok(SynthesisResult {
        value: value_of(m0, m1, rho, &xi0, &xi1),
        feasibility_residual: occ_residual(&xi0, m0).max(occ_residual(&xi1, m1)),
        xi0,
        xi1,
        pi0,
        pi1,
        objective,
        rate,
        iterations: 1,
        converged: true,
        restart_index: 0,
        history: vec![objective],
    })
}

fn ccp_result(
    m0: &Mdp,
    m1: &Mdp,
    rho: f64,
    problem: &DcProblem,
    run: CcpRun,
    idx: usize,
    limited: bool,
) -> Result<SynthesisResult> {
    let (b0, b1) = problem.split(&run.z);
    let xi0 = normalized(b0)?;
    let xi1 = normalized(b1)?;
    let mut res = lp_result(m0, m1, rho, xi0, xi1, run.objective, limited)?;
    res.feasibility_residual = res.feasibility_residual.max(problem.feasibility_residual(&run.z));
    res.iterations = run.iterations;
    res.converged = run.converged;
    res.restart_index = idx;
    res.history = run.history;
    Ok(res)
}

/// Maximize `V(ρ,π₀,π₁) − λ I_F(π₀,π₁)`.
pub fn tradeoff_full(m0: &Mdp, m1: &Mdp, rho: f64, lambda: f64, cfg: &SynthesisConfig) -> Result<SynthesisResult> {
    check_rho_lambda(rho, lambda)?;
    cfg.validate()?;
    crate::mdp::check_same_shape(m0, m1)?;
    if lambda == 0.0 {
        let (xi0, xi1) = reward_lps(m0, m1)?;
        let obj = -value_of(m0, m1, rho, &xi0, &xi1);
        return lp_result(m0, m1, rho, xi0, xi1, obj, false);
    }
    if rho == 1.0 {
        let (xi0, xi1, obj) = modified_reward_lp(m0, m1, lambda)?;
        return lp_result(m0, m1, rho, xi0, xi1, obj, false);
    }
    let problem = DcProblem::new(DcKind::TradeoffFull { rho, lambda }, m0, m1, cfg.epsilon_floor)?;
    let mut warm = Vec::new();
    if let Ok((xi0, xi1)) = reward_lps(m0, m1) {
        warm.push((policy_from_occupancy(&xi0), policy_from_occupancy(&xi1)));
    }
    if let Ok((_, xi1, _)) = modified_reward_lp(m0, m1, lambda) {
        let pi = policy_from_occupancy(&xi1);
        warm.push((pi.clone(), pi));
    }
    let starts = start_list(m0.n_states(), m0.n_actions(), cfg, warm);
    let (run, idx) = multistart(&problem, &starts, cfg)?;
    ccp_result(m0, m1, rho, &problem, run, idx, false)
}

/// Maximize `V(ρ,π₀,π₁) − λ I_L(π₀,π₁)`.
pub fn tradeoff_limited(m0: &Mdp, m1: &Mdp, rho: f64, lambda: f64, cfg: &SynthesisConfig) -> Result<SynthesisResult> {
    check_rho_lambda(rho, lambda)?;
    cfg.validate()?;
    crate::mdp::check_same_shape(m0, m1)?;
    if lambda == 0.0 {
        let (xi0, xi1) = reward_lps(m0, m1)?;
        let obj = -value_of(m0, m1, rho, &xi0, &xi1);
        return lp_result(m0, m1, rho, xi0, xi1, obj, true);
    }
    let problem = DcProblem::new(DcKind::TradeoffLimited { rho, lambda }, m0, m1, cfg.epsilon_floor)?;
    let mut warm = Vec::new();
    if let Ok(full) = tradeoff_full(m0, m1, rho, lambda, cfg) {
        warm.push((full.pi0, full.pi1));
    }
    let starts = start_list(m0.n_states(), m0.n_actions(), cfg, warm);
    let (run, idx) = multistart(&problem, &starts, cfg)?;
    ccp_result(m0, m1, rho, &problem, run, idx, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::full_info_rate;
    use crate::scenarios::three_state_models;

    fn quick() -> SynthesisConfig {
        SynthesisConfig { restarts: 2, ..Default::default() }
    }

    #[test]
    fn identical_models_have_zero_rate() {
        let (m0, _) = three_state_models();
        let full = best_privacy_full(&m0, &m0).unwrap();
        assert!(full.rate.abs() < 1e-12);
        assert_eq!(full.pi0, full.pi1);
        let lim = best_privacy_limited(&m0, &m0, &quick()).unwrap();
        assert!(lim.rate < 1e-7, "rate {}", lim.rate);
    }

    #[test]
    fn full_lp_beats_common_policies() {
        let (m0, m1) = three_state_models();
        let best = best_privacy_full(&m0, &m1).unwrap();
        for s in 0..20 {
            let pi = random_policy(3, 2, s);
            assert!(best.objective <= full_info_rate(&m0, &m1, &pi, &pi).unwrap() + 1e-9);
        }
        assert!((best.objective - best.rate).abs() < 1e-9);
    }

    #[test]
    fn limited_not_above_full() {
        let (m0, m1) = three_state_models();
        let full = best_privacy_full(&m0, &m1).unwrap();
        let lim = best_privacy_limited(&m0, &m1, &quick()).unwrap();
        assert!(lim.rate <= full.rate + 1e-9);
        assert!((lim.objective - lim.rate).abs() < 1e-6);
        assert!(lim.history.windows(2).all(|w| w[1] <= w[0] + 1e-10));
    }

    #[test]
    fn rho_one_matches_modified_reward_lp() {
        let (m0, m1) = three_state_models();
        let res = tradeoff_full(&m0, &m1, 1.0, 1.0, &quick()).unwrap();
        assert_eq!(res.pi0, res.pi1);
        let certified = -res.value + res.rate;
        assert!((certified - res.objective).abs() < 1e-6);
    }

    #[test]
    fn lambda_zero_is_reward_optimal() {
        let (m0, m1) = three_state_models();
        let res = tradeoff_full(&m0, &m1, 0.5, 0.0, &quick()).unwrap();
        for a in 0..8usize {
            let acts = [a & 1, (a >> 1) & 1, (a >> 2) & 1];
            let pi = Policy::deterministic(&acts, 2).unwrap();
            assert!(ergodic_value(&m1, &res.pi1).unwrap() >= ergodic_value(&m1, &pi).unwrap() - 1e-9);
            assert!(ergodic_value(&m0, &res.pi0).unwrap() >= ergodic_value(&m0, &pi).unwrap() - 1e-9);
        }
    }

    #[test]
    fn tradeoffs_are_certified() {
        let (m0, m1) = three_state_models();
        let f = tradeoff_full(&m0, &m1, 0.5, 1.0, &quick()).unwrap();
        assert!((f.objective - (-f.value + f.rate)).abs() < 1e-6);
        assert!(f.feasibility_residual < 1e-6);
        let l = tradeoff_limited(&m0, &m1, 0.5, 1.0, &quick()).unwrap();
        assert!((l.objective - (-l.value + l.rate)).abs() < 1e-6);
        let vl_at_full = f.value - limited_info_rate(&m0, &m1, &f.pi0, &f.pi1).unwrap();
        assert!(l.value - l.rate >= vl_at_full - 1e-9);
    }

    #[test]
    fn rejects_bad_parameters() {
        let (m0, m1) = three_state_models();
        assert!(tradeoff_full(&m0, &m1, 1.5, 1.0, &quick()).is_err());
        assert!(tradeoff_limited(&m0, &m1, 0.5, -1.0, &quick()).is_err());
        let bad = SynthesisConfig { ccp_tol: 0.0, ..Default::default() };
        assert!(best_privacy_limited(&m0, &m1, &bad).is_err());
    }

    #[test]
    fn config_json_roundtrip() {
        let cfg = SynthesisConfig { seed: 9, ..Default::default() };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(SynthesisConfig::from_json(&text).unwrap(), cfg);
        assert_eq!(SynthesisConfig::from_json("{\"restarts\": 1}").unwrap().restarts, 1);
    }
}
