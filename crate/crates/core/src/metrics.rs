//! Information rates of a change: `I_F` (eavesdropper sees states and
//! actions), `I_L` (states only), the Bernoulli lower bound on `I_L`, and the
//! privacy level `I⁻¹`.
//!
//! Rates are `f64` with `f64::INFINITY` standing for an absolute-continuity
//! failure; the sites responsible are listed in [`PrivacyReport::ac_violations`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::serde_f64;
use crate::mdp::{check_same_shape, induced_chain, stationary_distribution, Mdp, Policy};

/// Probabilities at or below this value are treated as exact zeros when
/// deciding support.
pub const SUPPORT_FLOOR: f64 = 1e-15;

/// `D(p‖q) = Σ p_i ln(p_i/q_i)`, `+∞` when `p` puts mass where `q` has none.
pub fn kl_categorical(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::ShapeMismatch(format!(
            "distributions of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok(kl_unchecked(p.iter().copied().zip(q.iter().copied())))
}

pub(crate) fn kl_unchecked(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let mut acc = 0.0;
    for (pi, qi) in pairs {
        if pi <= SUPPORT_FLOOR {
            continue;
        }
        if qi <= SUPPORT_FLOOR {
            return f64::INFINITY;
        }
        acc += pi * (pi / qi).ln();
    }
    // rounding can push an exact zero slightly negative
    acc.max(0.0)
}

/// Bernoulli divergence `d(p,q)` with `0·ln 0 = 0`.
pub fn kl_bernoulli(p: f64, q: f64) -> f64 {
    kl_unchecked([(p, q), (1.0 - p, 1.0 - q)].into_iter())
}

/// `I⁻¹`, with `0 ↦ +∞` and `+∞ ↦ 0`.
pub fn privacy_level(rate: f64) -> f64 {
    if rate <= 0.0 {
        f64::INFINITY
    } else if rate.is_infinite() {
        0.0
    } else {
        1.0 / rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    Full,
    Limited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `P₁(x,u) ⋠ P₀(x,u)` on a visited pair.
    Model,
    /// `π₁(x) ⋠ π₀(x)` on a visited state.
    Policy,
    /// `P₁^{π₁}(x) ⋠ P₀^{π₀}(x)` on a visited state.
    ClosedLoop,
}

/// A site where absolute continuity fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcViolation {
    pub rate: RateKind,
    pub kind: ViolationKind,
    pub state: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action: Option<usize>,
}

/// The two terms of `I_F`: model divergence and policy divergence, both
/// averaged under the post-change occupancy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullInfoBreakdown {
    pub model_term: f64,
    pub policy_term: f64,
}

impl FullInfoBreakdown {
    pub fn total(&self) -> f64 {
        self.model_term + self.policy_term
    }
}

fn check_inputs(m0: &Mdp, m1: &Mdp, pi0: &Policy, pi1: &Policy) -> Result<()> {
    check_same_shape(m0, m1)?;
    for pi in [pi0, pi1] {
        if pi.n_states() != m0.n_states() || pi.n_actions() != m0.n_actions() {
            return Err(Error::ShapeMismatch("policy shape differs from models".into()));
        }
    }
    Ok(())
}

fn full_info_inner(
    m0: &Mdp,
    m1: &Mdp,
    pi0: &Policy,
    pi1: &Policy,
    violations: &mut Vec<AcViolation>,
) -> Result<FullInfoBreakdown> {
    check_inputs(m0, m1, pi0, pi1)?;
    let mu1 = stationary_distribution(&induced_chain(m1, pi1)?)?;
    let (n, na) = (m0.n_states(), m0.n_actions());
    let mut model_term = 0.0;
    let mut policy_term = 0.0;
    for x in 0..n {
        if mu1[x] <= 0.0 {
            continue;
        }
        for u in 0..na {
            let w = pi1.prob(x, u);
            if w <= 0.0 {
                continue;
            }
            let d = kl_unchecked((0..n).map(|y| (m1.prob(x, u, y), m0.prob(x, u, y))));
            if d.is_infinite() {
                violations.push(AcViolation {
                    rate: RateKind::Full,
                    kind: ViolationKind::Model,
                    state: x,
                    action: Some(u),
                });
            }
            model_term += mu1[x] * w * d;
        }
        let dp = kl_unchecked((0..na).map(|u| (pi1.prob(x, u), pi0.prob(x, u))));
        if dp.is_infinite() {
            violations.push(AcViolation {
                rate: RateKind::Full,
                kind: ViolationKind::Policy,
                state: x,
                action: None,
            });
        }
        policy_term += mu1[x] * dp;
    }
    Ok(FullInfoBreakdown { model_term, policy_term })
}

/// Both terms of `I_F(π₀,π₁)`.
pub fn full_info_breakdown(m0: &Mdp, m1: &Mdp, pi0: &Policy, pi1: &Policy) -> Result<FullInfoBreakdown> {
    full_info_inner(m0, m1, pi0, pi1, &mut Vec::new())
}

/// `I_F(π₀,π₁) = E_{x∼μ₁,u∼π₁}[D(P₁(x,u),P₀(x,u))] + E_{x∼μ₁}[D(π₁(x),π₀(x))]`.
pub fn full_info_rate(m0: &Mdp, m1: &Mdp, pi0: &Policy, pi1: &Policy) -> Result<f64> {
    Ok(full_info_breakdown(m0, m1, pi0, pi1)?.total())
}

fn limited_inner(
    m0: &Mdp,
    m1: &Mdp,
    pi0: &Policy,
    pi1: &Policy,
    violations: &mut Vec<AcViolation>,
) -> Result<(f64, f64)> {
    check_inputs(m0, m1, pi0, pi1)?;
    let c1 = induced_chain(m1, pi1)?;
    let c0 = induced_chain(m0, pi0)?;
    let mu1 = stationary_distribution(&c1)?;
    let n = m0.n_states();
    let mut rate = 0.0;
    let mut bound = 0.0;
    for x in 0..n {
        if mu1[x] <= 0.0 {
            continue;
        }
        let d = kl_unchecked((0..n).map(|y| (c1[(x, y)], c0[(x, y)])));
        if d.is_infinite() {
            violations.push(AcViolation {
                rate: RateKind::Limited,
                kind: ViolationKind::ClosedLoop,
                state: x,
                action: None,
            });
        }
        rate += mu1[x] * d;
        let best = (0..n)
            .map(|y| kl_bernoulli(c1[(x, y)], c0[(x, y)]))
            .fold(0.0, f64::max);
        bound += mu1[x] * best;
    }
    Ok((rate, bound))
}

/// `I_L(π₀,π₁) = E_{x∼μ₁}[D(P₁^{π₁}(x), P₀^{π₀}(x))]`.
pub fn limited_info_rate(m0: &Mdp, m1: &Mdp, pi0: &Policy, pi1: &Policy) -> Result<f64> {
    Ok(limited_inner(m0, m1, pi0, pi1, &mut Vec::new())?.0)
}

/// `E_{x∼μ₁}[max_{x'} d(P₁^{π₁}(x'|x), P₀^{π₀}(x'|x))] ≤ I_L`.
pub fn limited_info_lower_bound(m0: &Mdp, m1: &Mdp, pi0: &Policy, pi1: &Policy) -> Result<f64> {
    Ok(limited_inner(m0, m1, pi0, pi1, &mut Vec::new())?.1)
}

/// All rates and privacy levels for one pair of policies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    #[serde(with = "serde_f64")]
    pub i_f: f64,
    #[serde(with = "serde_f64")]
    pub i_l: f64,
    #[serde(with = "serde_f64")]
    pub i_l_lower: f64,
    #[serde(with = "serde_f64")]
    pub privacy_full: f64,
    #[serde(with = "serde_f64")]
    pub privacy_limited: f64,
    pub ac_violations: Vec<AcViolation>,
}

impl PrivacyReport {
    pub fn compute(m0: &Mdp, m1: &Mdp, pi0: &Policy, pi1: &Policy) -> Result<Self> {
        let mut ac_violations = Vec::new();
        let i_f = full_info_inner(m0, m1, pi0, pi1, &mut ac_violations)?.total();
        let (i_l, i_l_lower) = limited_inner(m0, m1, pi0, pi1, &mut ac_violations)?;
        Ok(Self {
            i_f,
            i_l,
            i_l_lower,
            privacy_full: privacy_level(i_f),
            privacy_limited: privacy_level(i_l),
            ac_violations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::three_state_models;
    use nalgebra::DMatrix;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn categorical_examples() {
        assert_eq!(kl_categorical(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        let d = kl_categorical(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((d - std::f64::consts::LN_2).abs() < 1e-6);
        assert!(kl_categorical(&[0.5, 0.5], &[1.0, 0.0]).unwrap().is_infinite());
        assert!(matches!(kl_categorical(&[1.0], &[0.5, 0.5]), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn bernoulli_examples() {
        assert_eq!(kl_bernoulli(0.3, 0.3), 0.0);
        assert!((kl_bernoulli(1.0, 0.5) - LN2).abs() < 1e-15);
        assert!(kl_bernoulli(0.5, 0.0).is_infinite());
    }

    #[test]
    fn privacy_level_edges() {
        assert!(privacy_level(0.0).is_infinite());
        assert_eq!(privacy_level(f64::INFINITY), 0.0);
        assert_eq!(privacy_level(0.5), 2.0);
    }

    #[test]
    fn identical_models_and_policies_give_zero() {
        let (m0, _) = three_state_models();
        let pi = Policy::uniform(3, 2);
        let r = PrivacyReport::compute(&m0, &m0, &pi, &pi).unwrap();
        assert_eq!(r.i_f, 0.0);
        assert_eq!(r.i_l, 0.0);
        assert_eq!(r.i_l_lower, 0.0);
        assert!(r.privacy_full.is_infinite());
        assert!(r.ac_violations.is_empty());
    }

    #[test]
    fn distinct_deterministic_policies_reveal_change() {
        let (m0, m1) = three_state_models();
        let pi0 = Policy::deterministic(&[0, 0, 0], 2).unwrap();
        let pi1 = Policy::deterministic(&[1, 1, 1], 2).unwrap();
        let r = PrivacyReport::compute(&m0, &m1, &pi0, &pi1).unwrap();
        assert!(r.i_f.is_infinite());
        assert_eq!(r.privacy_full, 0.0);
        assert!(r.i_l.is_finite());
        assert!(r.ac_violations.iter().all(|v| v.rate == RateKind::Full));
        assert_eq!(r.ac_violations.len(), 3);
    }

    #[test]
    fn model_support_violation_is_reported() {
        let p0 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.5]);
        let p1 = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let m0 = Mdp::without_reward(vec![p0]).unwrap();
        let m1 = Mdp::without_reward(vec![p1]).unwrap();
        let pi = Policy::uniform(2, 1);
        let r = PrivacyReport::compute(&m0, &m1, &pi, &pi).unwrap();
        assert!(r.i_f.is_infinite() && r.i_l.is_infinite());
        assert!(r.ac_violations.contains(&AcViolation {
            rate: RateKind::Full,
            kind: ViolationKind::Model,
            state: 0,
            action: Some(0)
        }));
        assert!(r.ac_violations.iter().any(|v| v.rate == RateKind::Limited));
    }

    #[test]
    fn report_serializes_infinity_as_string() {
        let (m0, _) = three_state_models();
        let pi = Policy::uniform(3, 2);
        let r = PrivacyReport::compute(&m0, &m0, &pi, &pi).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains(r#""privacy_full":"inf""#), "{s}");
    }
}
