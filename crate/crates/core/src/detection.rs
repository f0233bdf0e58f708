//! The eavesdropper: log-likelihood-ratio streams, CUSUM, and Monte Carlo
//! estimates of detection delay and time to false alarm.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::serde_f64;
use crate::mdp::{induced_chain, simulate, ChangeScenario, Trajectory};
use crate::rng::derive_seed;

/// What the eavesdropper observes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum LlrMode {
    /// States and actions.
    Full,
    /// States only.
    Limited,
}

/// `z[t-1] = Z_t`. `Z_1 = 0` since no transition has been observed yet.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrStream {
    pub z: Vec<f64>,
    pub mode: LlrMode,
    /// Time index of the first infinite increment, if any.
    pub first_violation: Option<usize>,
}

fn log_ratio(num: f64, den: f64) -> f64 {
    if num > 0.0 && den > 0.0 {
        (num / den).ln()
    } else if num > 0.0 {
        f64::INFINITY
    } else if den > 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    }
}

fn check_traj(sc: &ChangeScenario, traj: &Trajectory) -> Result<()> {
    let (n, na) = (sc.m0.n_states(), sc.m0.n_actions());
    if traj.actions.len() != traj.states.len() {
        return Err(Error::ShapeMismatch("states and actions differ in length".into()));
    }
    if let Some(&x) = traj.states.iter().find(|&&x| x >= n) {
        return Err(Error::IndexOutOfRange { index: x, len: n });
    }
    if let Some(&u) = traj.actions.iter().find(|&&u| u >= na) {
        return Err(Error::IndexOutOfRange { index: u, len: na });
    }
    Ok(())
}

fn finish(z: Vec<f64>, mode: LlrMode) -> LlrStream {
    let first_violation = z.iter().position(|v| *v == f64::INFINITY).map(|i| i + 1);
    LlrStream { z, mode, first_violation }
}

/// `Z_i = ln[π₁(U_i|X_i)P₁(X_i|X_{i−1},U_{i−1}) / (π₀(U_i|X_i)P₀(X_i|X_{i−1},U_{i−1}))]`.
pub fn llr_full(sc: &ChangeScenario, traj: &Trajectory) -> Result<LlrStream> {
    check_traj(sc, traj)?;
    let mut z = Vec::with_capacity(traj.len());
    if !traj.is_empty() {
        z.push(0.0);
    }
    for i in 1..traj.len() {
        let (xp, up) = (traj.states[i - 1], traj.actions[i - 1]);
        let (x, u) = (traj.states[i], traj.actions[i]);
        let num = sc.pi1.prob(x, u) * sc.m1.prob(xp, up, x);
        let den = sc.pi0.prob(x, u) * sc.m0.prob(xp, up, x);
        z.push(log_ratio(num, den));
    }
    Ok(finish(z, LlrMode::Full))
}

/// `Z_i = ln[P₁^{π₁}(X_i|X_{i−1}) / P₀^{π₀}(X_i|X_{i−1})]`.
pub fn llr_limited(sc: &ChangeScenario, traj: &Trajectory) -> Result<LlrStream> {
    check_traj(sc, traj)?;
    let p1 = induced_chain(&sc.m1, &sc.pi1)?;
    let p0 = induced_chain(&sc.m0, &sc.pi0)?;
    let mut z = Vec::with_capacity(traj.len());
    if !traj.is_empty() {
        z.push(0.0);
    }
    for i in 1..traj.len() {
        let (xp, x) = (traj.states[i - 1], traj.states[i]);
        z.push(log_ratio(p1[(xp, x)], p0[(xp, x)]));
    }
    Ok(finish(z, LlrMode::Limited))
}

pub fn llr(sc: &ChangeScenario, traj: &Trajectory, mode: LlrMode) -> Result<LlrStream> {
    match mode {
        LlrMode::Full => llr_full(sc, traj),
        LlrMode::Limited => llr_limited(sc, traj),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CusumRun {
    pub threshold: f64,
    /// 1-based index into the input stream, `None` if the threshold was never reached.
    pub stopping_time: Option<usize>,
    /// `W_t = max_{1≤k≤t} Σ_{i=k}^t Z_i`.
    #[serde(skip)]
    pub statistic_path: Vec<f64>,
}

/// CUSUM via `W_t = Z_t + max(0, W_{t−1})`; stops at the first `W_t ≥ c`.
///
/// The path is the max-over-`k` statistic itself, so it goes negative when
/// the latest increment is negative; `max(0, W_t)` is the reflected form.
pub fn cusum(z: &[f64], c: f64) -> CusumRun {
    let mut path = Vec::with_capacity(z.len());
    let mut w = 0.0f64;
    let mut stop = None;
    for (i, &zi) in z.iter().enumerate() {
        w = zi + w.max(0.0);
        path.push(w);
        if w >= c {
            stop = Some(i + 1);
            break;
        }
    }
    CusumRun { threshold: c, stopping_time: stop, statistic_path: path }
}

/// Per-run record for raw output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub stopping_time: Option<usize>,
    pub nu: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayReport {
    pub mode: LlrMode,
    #[serde(with = "serde_f64")]
    pub threshold: f64,
    /// Change time; `None` when the scenario never changes.
    pub nu: Option<usize>,
    pub horizon: usize,
    pub runs: usize,
    pub censored: usize,
    /// Mean number of post-change observations until the alarm, or mean alarm
    /// time for a never-changing scenario. Censored runs enter at their horizon.
    #[serde(with = "serde_f64")]
    pub mean_delay: f64,
    #[serde(with = "serde_f64")]
    pub ci_halfwidth: f64,
    pub mean_time_to_false_alarm: Option<f64>,
    pub false_alarm_rate: Option<f64>,
    #[serde(skip)]
    pub raw: Vec<RunRecord>,
}

impl DelayReport {
    /// Raw `seed,stopping_time,nu` rows.
    pub fn raw_csv(&self) -> String {
        let mut out = String::from("seed,stopping_time,nu\n");
        for r in &self.raw {
            let t = r.stopping_time.map_or("censored".to_string(), |t| t.to_string());
            let nu = r.nu.map_or("inf".to_string(), |v| v.to_string());
            out.push_str(&format!("{},{t},{nu}\n", r.seed));
        }
        out
    }
}

const Z95: f64 = 1.959_963_984_540_054;

fn mean_ci(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Z95 * (var / n).sqrt())
}

fn check_run_args(c: f64, runs: usize, horizon: usize) -> Result<()> {
    if runs == 0 {
        return Err(Error::InvalidArgument("runs must be >= 1".into()));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("threshold must be positive, got {c}")));
    }
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    Ok(())
}

/// Mean detection delay at the scenario's change time. The chain starts from
/// its pre-change stationary law and CUSUM is run on `Z_ν, Z_{ν+1}, …`, so a
/// delay of `d` means the alarm came with the `d`-th post-change observation.
pub fn estimate_delay(
    sc: &ChangeScenario,
    mode: LlrMode,
    c: f64,
    runs: usize,
    horizon: usize,
    seed: u64,
) -> Result<DelayReport> {
    check_run_args(c, runs, horizon)?;
    let nu = sc.nu;
    if horizon < nu {
        return Err(Error::InvalidArgument(format!("horizon {horizon} ends before change time {nu}")));
    }
    let raw: Vec<RunRecord> = (0..runs as u64)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, i);
            let traj = simulate(sc, horizon, s)?;
            let stream = llr(sc, &traj, mode)?;
            let run = cusum(&stream.z[nu - 1..], c);
            Ok(RunRecord { seed: s, stopping_time: run.stopping_time.map(|d| d + nu - 1), nu: Some(nu) })
        })
        .collect::<Result<_>>()?;
    let delays: Vec<f64> = raw
        .iter()
        .map(|r| r.stopping_time.map_or(horizon - nu + 1, |t| t - nu + 1) as f64)
        .collect();
    let (mean_delay, ci_halfwidth) = mean_ci(&delays);
    Ok(DelayReport {
        mode,
        threshold: c,
        nu: Some(nu),
        horizon,
        runs,
        censored: raw.iter().filter(|r| r.stopping_time.is_none()).count(),
        mean_delay,
        ci_halfwidth,
        mean_time_to_false_alarm: None,
        false_alarm_rate: None,
        raw,
    })
}

/// Alarm times when no change ever happens (`ν = ∞`).
pub fn estimate_false_alarm(
    sc: &ChangeScenario,
    mode: LlrMode,
    c: f64,
    runs: usize,
    horizon: usize,
    seed: u64,
) -> Result<DelayReport> {
    check_run_args(c, runs, horizon)?;
    let never = sc.with_change_time(usize::MAX);
    let raw: Vec<RunRecord> = (0..runs as u64)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, i);
            let traj = simulate(&never, horizon, s)?;
            let stream = llr(&never, &traj, mode)?;
            Ok(RunRecord { seed: s, stopping_time: cusum(&stream.z, c).stopping_time, nu: None })
        })
        .collect::<Result<_>>()?;
    let times: Vec<f64> = raw.iter().map(|r| r.stopping_time.unwrap_or(horizon) as f64).collect();
    let (mean, ci_halfwidth) = mean_ci(&times);
    let censored = raw.iter().filter(|r| r.stopping_time.is_none()).count();
    Ok(DelayReport {
        mode,
        threshold: c,
        nu: None,
        horizon,
        runs,
        censored,
        mean_delay: mean,
        ci_halfwidth,
        mean_time_to_false_alarm: Some(mean),
        false_alarm_rate: Some((runs - censored) as f64 / runs as f64),
        raw,
    })
}

/// Mean of `z[from_index..]` with a batch-means standard error
/// (batch size `⌊√n⌋`).
pub fn ergodic_llr_average(z: &LlrStream, from_index: usize) -> Result<(f64, f64)> {
    if from_index >= z.z.len() {
        return Err(Error::IndexOutOfRange { index: from_index, len: z.z.len() });
    }
    let xs = &z.z[from_index..];
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let size = ((n as f64).sqrt().floor() as usize).max(1);
    let batches = n / size;
    if batches < 2 {
        return Ok((mean, f64::INFINITY));
    }
    let means: Vec<f64> = (0..batches)
        .map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let bm = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (batches - 1) as f64;
    Ok((mean, (var / batches as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::Policy;
    use crate::scenarios::three_state_models;

    fn scenario(nu: usize) -> ChangeScenario {
        let (m0, m1) = three_state_models();
        ChangeScenario::new(m0, m1, Policy::uniform(3, 2), Policy::uniform(3, 2), nu).unwrap()
    }

    #[test]
    fn ramp_crosses_at_five() {
        let r = cusum(&[1.0; 10], 5.0);
        assert_eq!(r.stopping_time, Some(5));
        assert!(cusum(&[-1.0; 10], 5.0).stopping_time.is_none());
    }

    #[test]
    fn infinite_increment_stops_immediately() {
        let r = cusum(&[0.1, f64::INFINITY, 0.0], 100.0);
        assert_eq!(r.stopping_time, Some(2));
    }

    #[test]
    fn identical_models_give_zero_llr() {
        let (m0, _) = three_state_models();
        let sc = ChangeScenario::new(m0.clone(), m0, Policy::uniform(3, 2), Policy::uniform(3, 2), 5).unwrap();
        let traj = simulate(&sc, 200, 1).unwrap();
        assert!(llr_full(&sc, &traj).unwrap().z.iter().all(|&v| v == 0.0));
        assert!(llr_limited(&sc, &traj).unwrap().z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bad_indices_are_rejected() {
        let sc = scenario(5);
        let traj = Trajectory { states: vec![0, 7], actions: vec![0, 0], nu: 5, seed: 0 };
        assert!(matches!(llr_full(&sc, &traj), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn pre_change_drift_is_negative() {
        let sc = scenario(usize::MAX);
        let traj = simulate(&sc, 20_000, 3).unwrap();
        let (m, _) = ergodic_llr_average(&llr_full(&sc, &traj).unwrap(), 1).unwrap();
        assert!(m < 0.0);
    }

    #[test]
    fn zero_stream_average() {
        let s = LlrStream { z: vec![0.0; 100], mode: LlrMode::Full, first_violation: None };
        assert_eq!(ergodic_llr_average(&s, 0).unwrap(), (0.0, 0.0));
        assert!(ergodic_llr_average(&s, 100).is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let sc = scenario(20);
        let a = estimate_delay(&sc, LlrMode::Full, 3.0, 50, 400, 11).unwrap();
        let b = estimate_delay(&sc, LlrMode::Full, 3.0, 50, 400, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.runs >= a.censored);
    }

    #[test]
    fn tiny_threshold_detects_quickly() {
        let sc = scenario(10);
        let r = estimate_delay(&sc, LlrMode::Full, 1e-9, 200, 200, 5).unwrap();
        assert!(r.mean_delay < 2.5, "mean delay {}", r.mean_delay);
    }
}
