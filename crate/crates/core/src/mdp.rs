//! Finite MDPs, policies, stationary distributions and occupancy measures,
//! plus trajectory simulation across a single change point.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{sample_index, seeded};

/// Row-sum tolerance for validated kernels and policies.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Row-sum tolerance accepted by the scenario-file parser before rows are renormalized.
pub const PARSE_STOCHASTIC_TOL: f64 = 1e-9;
/// Total-mass tolerance of an occupancy measure.
pub const OCCUPANCY_MASS_TOL: f64 = 1e-9;

/// A finite MDP `(X, U, P, r)`: one `|X|×|X|` row-stochastic matrix per action
/// and an `|X|×|U|` reward table.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    transitions: Vec<DMatrix<f64>>,
    reward: DMatrix<f64>,
}

/// Check the invariants of an MDP and build it.
pub fn validate_mdp(transitions: Vec<DMatrix<f64>>, reward: DMatrix<f64>) -> Result<Mdp> {
    Mdp::new(transitions, reward)
}

impl Mdp {
    pub fn new(transitions: Vec<DMatrix<f64>>, reward: DMatrix<f64>) -> Result<Self> {
        if transitions.is_empty() {
            return Err(Error::ShapeMismatch("MDP needs at least one action".into()));
        }
        let n = transitions[0].nrows();
        if n == 0 {
            return Err(Error::ShapeMismatch("MDP needs at least one state".into()));
        }
        for (u, p) in transitions.iter().enumerate() {
            if p.nrows() != n || p.ncols() != n {
                return Err(Error::ShapeMismatch(format!(
                    "P(u={u}) is {}x{}, expected {n}x{n}",
                    p.nrows(),
                    p.ncols()
                )));
            }
            for x in 0..n {
                let mut sum = 0.0;
                for y in 0..n {
                    let v = p[(x, y)];
                    if !v.is_finite() || v < 0.0 {
                        return Err(Error::NegativeEntry {
                            location: format!("P(u={u})[{x},{y}]"),
                            value: v,
                        });
                    }
                    sum += v;
                }
                if (sum - 1.0).abs() > STOCHASTIC_TOL {
                    return Err(Error::NonStochasticRow { action: u, row: x, sum });
                }
            }
        }
        if reward.nrows() != n || reward.ncols() != transitions.len() {
            return Err(Error::ShapeMismatch(format!(
                "reward is {}x{}, expected {n}x{}",
                reward.nrows(),
                reward.ncols(),
                transitions.len()
            )));
        }
        if reward.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidArgument("reward entries must be finite".into()));
        }
        Ok(Self { transitions, reward })
    }

    /// MDP with zero reward.
    pub fn without_reward(transitions: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = transitions.first().map_or(0, |p| p.nrows());
        let m = transitions.len();
        Self::new(transitions, DMatrix::zeros(n, m))
    }

    /// Build from nested rows `p[u][x][y]` and `r[x][u]`.
    pub fn from_rows(p: &[Vec<Vec<f64>>], r: &[Vec<f64>]) -> Result<Self> {
        let transitions = p
            .iter()
            .map(|rows| matrix_from_rows(rows))
            .collect::<Result<Vec<_>>>()?;
        Self::new(transitions, matrix_from_rows(r)?)
    }

    pub fn n_states(&self) -> usize {
        self.transitions[0].nrows()
    }

    pub fn n_actions(&self) -> usize {
        self.transitions.len()
    }

    /// `P(u)` as an `|X|×|X|` matrix.
    pub fn transition(&self, u: usize) -> &DMatrix<f64> {
        &self.transitions[u]
    }

    pub fn transitions(&self) -> &[DMatrix<f64>] {
        &self.transitions
    }

    /// `P(y | x, u)`.
    #[inline]
    pub fn prob(&self, x: usize, u: usize, y: usize) -> f64 {
        self.transitions[u][(x, y)]
    }

    /// The next-state distribution `P(·|x,u)`.
    pub fn next_state_dist(&self, x: usize, u: usize) -> Vec<f64> {
        self.transitions[u].row(x).iter().copied().collect()
    }

    pub fn reward(&self) -> &DMatrix<f64> {
        &self.reward
    }

    pub fn with_reward(&self, reward: DMatrix<f64>) -> Result<Self> {
        Self::new(self.transitions.clone(), reward)
    }

    /// `θ·self + (1−θ)·other` on the kernels; rewards are mixed the same way.
    pub fn mixture(&self, other: &Mdp, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidArgument(format!("theta {theta} outside [0,1]")));
        }
        check_same_shape(self, other)?;
        let transitions = self
            .transitions
            .iter()
            .zip(&other.transitions)
            .map(|(a, b)| a * theta + b * (1.0 - theta))
            .collect();
        Self::new(transitions, &self.reward * theta + &other.reward * (1.0 - theta))
    }

    /// Union of the supports of all actions, as a chain: `Σ_u P(u) / |U|`.
    pub fn uniform_chain(&self) -> DMatrix<f64> {
        let mut acc = DMatrix::zeros(self.n_states(), self.n_states());
        for p in &self.transitions {
            acc += p;
        }
        acc / self.n_actions() as f64
    }
}

pub(crate) fn check_same_shape(a: &Mdp, b: &Mdp) -> Result<()> {
    if a.n_states() != b.n_states() || a.n_actions() != b.n_actions() {
        return Err(Error::ShapeMismatch(format!(
            "models have shapes {}x{} and {}x{}",
            a.n_states(),
            a.n_actions(),
            b.n_states(),
            b.n_actions()
        )));
    }
    Ok(())
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::ShapeMismatch(format!(
            "row {i} has {} entries, expected {ncols}",
            r.len()
        )));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub(crate) fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// Randomized stationary policy, `pi[(x,u)] = π(u|x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pi: DMatrix<f64>,
}

impl Policy {
    pub fn new(pi: DMatrix<f64>) -> Result<Self> {
        if pi.nrows() == 0 || pi.ncols() == 0 {
            return Err(Error::ShapeMismatch("empty policy".into()));
        }
        for x in 0..pi.nrows() {
            let mut sum = 0.0;
            for u in 0..pi.ncols() {
                let v = pi[(x, u)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::NegativeEntry {
                        location: format!("pi[{x},{u}]"),
                        value: v,
                    });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NonStochasticRow { action: 0, row: x, sum });
            }
        }
        Ok(Self { pi })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    /// Normalize each row of a nonnegative matrix; zero rows become uniform.
    pub fn from_weights(weights: &DMatrix<f64>) -> Result<Self> {
        let (n, m) = weights.shape();
        let mut pi = DMatrix::zeros(n, m);
        for x in 0..n {
            let mass: f64 = weights.row(x).iter().map(|w| w.max(0.0)).sum();
            for u in 0..m {
                pi[(x, u)] = if mass > 0.0 {
                    weights[(x, u)].max(0.0) / mass
                } else {
                    1.0 / m as f64
                };
            }
        }
        Self::new(pi)
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Self {
            pi: DMatrix::from_element(n_states, n_actions, 1.0 / n_actions as f64),
        }
    }

    /// Point-mass policy choosing `actions[x]` in state `x`.
    pub fn deterministic(actions: &[usize], n_actions: usize) -> Result<Self> {
        let mut pi = DMatrix::zeros(actions.len(), n_actions);
        for (x, &u) in actions.iter().enumerate() {
            if u >= n_actions {
                return Err(Error::IndexOutOfRange { index: u, len: n_actions });
            }
            pi[(x, u)] = 1.0;
        }
        Self::new(pi)
    }

    pub fn n_states(&self) -> usize {
        self.pi.nrows()
    }

    pub fn n_actions(&self) -> usize {
        self.pi.ncols()
    }

    #[inline]
    pub fn prob(&self, x: usize, u: usize) -> f64 {
        self.pi[(x, u)]
    }

    pub fn row(&self, x: usize) -> Vec<f64> {
        self.pi.row(x).iter().copied().collect()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.pi
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(&self.pi)
    }
}

/// Stationary state-action distribution `ξ_{x,u} = μ(x)π(u|x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMeasure {
    xi: DMatrix<f64>,
}

impl OccupancyMeasure {
    pub fn new(xi: DMatrix<f64>) -> Result<Self> {
        for x in 0..xi.nrows() {
            for u in 0..xi.ncols() {
                let v = xi[(x, u)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::NegativeEntry {
                        location: format!("xi[{x},{u}]"),
                        value: v,
                    });
                }
            }
        }
        let mass = xi.sum();
        if (mass - 1.0).abs() > OCCUPANCY_MASS_TOL {
            return Err(Error::InvalidArgument(format!(
                "occupancy measure has total mass {mass}"
            )));
        }
        Ok(Self { xi })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.xi
    }

    #[inline]
    pub fn get(&self, x: usize, u: usize) -> f64 {
        self.xi[(x, u)]
    }

    /// State marginal `‖ξ_{x,*}‖₁`.
    pub fn state_marginal(&self) -> DVector<f64> {
        DVector::from_iterator(self.xi.nrows(), self.xi.row_iter().map(|r| r.sum()))
    }

    /// `‖Σ_u ξ_{*,u}ᵀP(u) − Σ_u ξ_{*,u}ᵀ‖_∞`.
    pub fn stationarity_residual(&self, m: &Mdp) -> f64 {
        stationarity_residual(&self.xi, m)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(&self.xi)
    }
}

pub(crate) fn stationarity_residual(xi: &DMatrix<f64>, m: &Mdp) -> f64 {
    let n = m.n_states();
    let mut flow = DVector::<f64>::zeros(n);
    for u in 0..m.n_actions() {
        let col = xi.column(u);
        flow += m.transition(u).transpose() * col;
    }
    let marg = DVector::from_iterator(n, xi.row_iter().map(|r| r.sum()));
    (flow - marg).amax()
}

/// Closed-loop kernel `P^π(y|x) = Σ_u P(y|x,u)π(u|x)`.
pub fn induced_chain(m: &Mdp, pi: &Policy) -> Result<DMatrix<f64>> {
    if pi.n_states() != m.n_states() || pi.n_actions() != m.n_actions() {
        return Err(Error::ShapeMismatch(format!(
            "policy is {}x{}, MDP is {}x{}",
            pi.n_states(),
            pi.n_actions(),
            m.n_states(),
            m.n_actions()
        )));
    }
    let n = m.n_states();
    let mut out = DMatrix::zeros(n, n);
    for x in 0..n {
        for u in 0..m.n_actions() {
            let w = pi.prob(x, u);
            if w == 0.0 {
                continue;
            }
            for y in 0..n {
                out[(x, y)] += w * m.prob(x, u, y);
            }
        }
    }
    Ok(out)
}

/// Number of closed communicating classes of the support graph of `p`, and
/// a flag per state telling whether it is recurrent.
pub fn recurrent_classes(p: &DMatrix<f64>) -> (usize, Vec<bool>) {
    let n = p.nrows();
    let reach: Vec<Vec<bool>> = (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    if p[(i, j)] > 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen
        })
        .collect();
    let recurrent: Vec<bool> = (0..n)
        .map(|i| (0..n).all(|j| !reach[i][j] || reach[j][i]))
        .collect();
    let mut assigned = vec![false; n];
    let mut classes = 0;
    for i in 0..n {
        if recurrent[i] && !assigned[i] {
            classes += 1;
            for j in 0..n {
                if reach[i][j] {
                    assigned[j] = true;
                }
            }
        }
    }
    (classes, recurrent)
}

/// Unique stationary distribution of a chain with a single recurrent class.
///
/// Solves `(Pᵀ − I)μ = 0` with the last equation replaced by `Σμ = 1`.
/// Transient states get exactly zero mass.
pub fn stationary_distribution(p: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = p.nrows();
    if p.ncols() != n || n == 0 {
        return Err(Error::ShapeMismatch(format!("chain is {}x{}", p.nrows(), p.ncols())));
    }
    let (classes, recurrent) = recurrent_classes(p);
    if classes != 1 {
        return Err(Error::NotIrreducible { recurrent_classes: classes });
    }
    let mut a = p.transpose() - DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let mut mu = a
        .lu()
        .solve(&b)
        .ok_or(Error::NotIrreducible { recurrent_classes: classes })?;
    for i in 0..n {
        if !recurrent[i] || mu[i] < 0.0 {
            mu[i] = 0.0;
        }
    }
    let s = mu.sum();
    mu /= s;
    Ok(mu)
}

/// `ξ = μ^π ⊗ π`.
pub fn occupancy_from_policy(m: &Mdp, pi: &Policy) -> Result<OccupancyMeasure> {
    let chain = induced_chain(m, pi)?;
    let mu = stationary_distribution(&chain)?;
    let xi = DMatrix::from_fn(m.n_states(), m.n_actions(), |x, u| mu[x] * pi.prob(x, u));
    OccupancyMeasure::new(xi)
}

/// `π(u|x) = ξ_{x,u}/‖ξ_{x,*}‖₁`; states with zero mass get the uniform row.
pub fn policy_from_occupancy(xi: &OccupancyMeasure) -> Policy {
    Policy::from_weights(xi.matrix()).expect("row-normalized weights form a policy")
}

/// Long-run average reward `V = Σ ξ_{x,u} r(x,u)`.
pub fn ergodic_value(m: &Mdp, pi: &Policy) -> Result<f64> {
    let xi = occupancy_from_policy(m, pi)?;
    Ok(xi.matrix().component_mul(m.reward()).sum())
}

/// Pre-change model and policy, post-change model and policy, change time.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeScenario {
    pub m0: Mdp,
    pub m1: Mdp,
    pub pi0: Policy,
    pub pi1: Policy,
    /// Change time ν (1-based): the law at times `t ≥ ν` is the post-change one.
    pub nu: usize,
}

impl ChangeScenario {
    pub fn new(m0: Mdp, m1: Mdp, pi0: Policy, pi1: Policy, nu: usize) -> Result<Self> {
        check_same_shape(&m0, &m1)?;
        for pi in [&pi0, &pi1] {
            if pi.n_states() != m0.n_states() || pi.n_actions() != m0.n_actions() {
                return Err(Error::ShapeMismatch("policy shape differs from models".into()));
            }
        }
        if nu == 0 {
            return Err(Error::InvalidArgument("change time must be >= 1".into()));
        }
        Ok(Self { m0, m1, pi0, pi1, nu })
    }

    /// `ac[x][u]` is true iff `P₁(·|x,u) ≪ P₀(·|x,u)`.
    pub fn absolute_continuity(&self) -> Vec<Vec<bool>> {
        kernel_absolute_continuity(&self.m0, &self.m1)
    }

    pub fn with_change_time(&self, nu: usize) -> Self {
        Self { nu, ..self.clone() }
    }
}

pub(crate) fn kernel_absolute_continuity(m0: &Mdp, m1: &Mdp) -> Vec<Vec<bool>> {
    (0..m0.n_states())
        .map(|x| {
            (0..m0.n_actions())
                .map(|u| {
                    (0..m0.n_states()).all(|y| {
                        m1.prob(x, u, y) <= crate::metrics::SUPPORT_FLOOR
                            || m0.prob(x, u, y) > crate::metrics::SUPPORT_FLOOR
                    })
                })
                .collect()
        })
        .collect()
}

/// State/action path; `states[t-1]` is `X_t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
    pub nu: usize,
    pub seed: u64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Simulate `horizon` steps of the scenario.
///
/// `X_1 ~ μ₀^{π₀}`. For `t ≥ 2`, `X_t ~ P(·|X_{t−1},U_{t−1})` and `U_t ~ π(·|X_t)`
/// where `(P, π)` is `(P₀, π₀)` for `t < ν` and `(P₁, π₁)` for `t ≥ ν`.
pub fn simulate(sc: &ChangeScenario, horizon: usize, seed: u64) -> Result<Trajectory> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    let mu0 = stationary_distribution(&induced_chain(&sc.m0, &sc.pi0)?)?;
    let mut rng = seeded(seed);
    let mut states = Vec::with_capacity(horizon);
    let mut actions = Vec::with_capacity(horizon);
    let n = sc.m0.n_states();
    let nu_act = sc.m0.n_actions();

    let x1 = sample_index(mu0.iter().copied(), rng.random::<f64>());
    let pi_first = if sc.nu <= 1 { &sc.pi1 } else { &sc.pi0 };
    let u1 = sample_index((0..nu_act).map(|u| pi_first.prob(x1, u)), rng.random::<f64>());
    states.push(x1);
    actions.push(u1);
    for t in 2..=horizon {
        let (m, pi) = if t >= sc.nu { (&sc.m1, &sc.pi1) } else { (&sc.m0, &sc.pi0) };
        let (xp, up) = (states[t - 2], actions[t - 2]);
        let x = sample_index((0..n).map(|y| m.prob(xp, up, y)), rng.random::<f64>());
        let u = sample_index((0..nu_act).map(|a| pi.prob(x, a)), rng.random::<f64>());
        states.push(x);
        actions.push(u);
    }
    Ok(Trajectory { states, actions, nu: sc.nu, seed })
}

/// On-disk MDP change scenario (JSON).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MdpScenarioFile {
    pub n_states: usize,
    pub n_actions: usize,
    #[serde(rename = "P0")]
    pub p0: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "P1")]
    pub p1: Vec<Vec<Vec<f64>>>,
    pub r0: Vec<Vec<f64>>,
    pub r1: Vec<Vec<f64>>,
    pub nu: usize,
    /// Optional policies; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi0: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi1: Option<Vec<Vec<f64>>>,
}

/// Parsed scenario: both models plus the change time and optional policies.
#[derive(Debug, Clone)]
pub struct MdpScenario {
    pub m0: Mdp,
    pub m1: Mdp,
    pub nu: usize,
    pub pi0: Option<Policy>,
    pub pi1: Option<Policy>,
}

impl MdpScenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: MdpScenarioFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn from_file(file: MdpScenarioFile) -> Result<Self> {
        let kernel = |name: &str, p: &[Vec<Vec<f64>>]| -> Result<Vec<DMatrix<f64>>> {
            if p.len() != file.n_actions {
                return Err(Error::Parse(format!(
                    "{name} has {} actions, expected {}",
                    p.len(),
                    file.n_actions
                )));
            }
            p.iter()
                .enumerate()
                .map(|(u, rows)| {
                    if rows.len() != file.n_states {
                        return Err(Error::Parse(format!(
                            "{name}[{u}] has {} rows, expected {}",
                            rows.len(),
                            file.n_states
                        )));
                    }
                    let mut mat = DMatrix::zeros(file.n_states, file.n_states);
                    for (x, row) in rows.iter().enumerate() {
                        if row.len() != file.n_states {
                            return Err(Error::Parse(format!(
                                "{name}[{u}][{x}] has {} entries, expected {}",
                                row.len(),
                                file.n_states
                            )));
                        }
                        if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
                            return Err(Error::Parse(format!("{name}[{u}][{x}] has negative entry {v}")));
                        }
                        let sum: f64 = row.iter().sum();
                        if (sum - 1.0).abs() > PARSE_STOCHASTIC_TOL {
                            return Err(Error::Parse(format!(
                                "{name}[{u}][{x}] sums to {sum}, expected 1"
                            )));
                        }
                        for (y, v) in row.iter().enumerate() {
                            mat[(x, y)] = v / sum;
                        }
                    }
                    Ok(mat)
                })
                .collect()
        };
        let reward = |name: &str, r: &[Vec<f64>]| -> Result<DMatrix<f64>> {
            if r.len() != file.n_states || r.iter().any(|row| row.len() != file.n_actions) {
                return Err(Error::Parse(format!(
                    "{name} must be {}x{}",
                    file.n_states, file.n_actions
                )));
            }
            matrix_from_rows(r)
        };
        let policy = |name: &str, p: &Option<Vec<Vec<f64>>>| -> Result<Option<Policy>> {
            match p {
                None => Ok(None),
                Some(rows) => {
                    if rows.len() != file.n_states || rows.iter().any(|r| r.len() != file.n_actions) {
                        return Err(Error::Parse(format!(
                            "{name} must be {}x{}",
                            file.n_states, file.n_actions
                        )));
                    }
                    let m = matrix_from_rows(rows)?;
                    Policy::from_weights(&m).map(Some).map_err(|e| Error::Parse(format!("{name}: {e}")))
                }
            }
        };
        if file.nu == 0 {
            return Err(Error::Parse("nu must be >= 1".into()));
        }
        let m0 = Mdp::new(kernel("P0", &file.p0)?, reward("r0", &file.r0)?)
            .map_err(|e| Error::Parse(format!("M0: {e}")))?;
        let m1 = Mdp::new(kernel("P1", &file.p1)?, reward("r1", &file.r1)?)
            .map_err(|e| Error::Parse(format!("M1: {e}")))?;
        Ok(Self {
            m0,
            m1,
            nu: file.nu,
            pi0: policy("pi0", &file.pi0)?,
            pi1: policy("pi1", &file.pi1)?,
        })
    }

    pub fn to_file(&self) -> MdpScenarioFile {
        MdpScenarioFile {
            n_states: self.m0.n_states(),
            n_actions: self.m0.n_actions(),
            p0: self.m0.transitions().iter().map(matrix_to_rows).collect(),
            p1: self.m1.transitions().iter().map(matrix_to_rows).collect(),
            r0: matrix_to_rows(self.m0.reward()),
            r1: matrix_to_rows(self.m1.reward()),
            nu: self.nu,
            pi0: self.pi0.as_ref().map(Policy::to_rows),
            pi1: self.pi1.as_ref().map(Policy::to_rows),
        }
    }

    /// Change scenario with the file's policies, or uniform ones when absent.
    pub fn change_scenario(&self) -> Result<ChangeScenario> {
        let (n, m) = (self.m0.n_states(), self.m0.n_actions());
        ChangeScenario::new(
            self.m0.clone(),
            self.m1.clone(),
            self.pi0.clone().unwrap_or_else(|| Policy::uniform(n, m)),
            self.pi1.clone().unwrap_or_else(|| Policy::uniform(n, m)),
            self.nu,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::three_state_models;

    fn two_cycle() -> Mdp {
        let p = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        Mdp::new(vec![p.clone(), p], DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0])).unwrap()
    }

    #[test]
    fn paper_three_state_models_are_valid() {
        let (m0, m1) = three_state_models();
        assert_eq!(m0.n_states(), 3);
        assert_eq!(m1.n_actions(), 2);
    }

    #[test]
    fn identity_kernel_is_valid() {
        let i = DMatrix::<f64>::identity(3, 3);
        assert!(validate_mdp(vec![i.clone(), i], DMatrix::zeros(3, 2)).is_ok());
    }

    #[test]
    fn non_stochastic_row_rejected() {
        let p = DMatrix::from_row_slice(2, 2, &[0.5, 0.6, 0.5, 0.5]);
        let err = validate_mdp(vec![p], DMatrix::zeros(2, 1)).unwrap_err();
        assert!(matches!(err, Error::NonStochasticRow { action: 0, row: 0, .. }));
    }

    #[test]
    fn negative_entry_and_shape_errors() {
        let p = DMatrix::from_row_slice(2, 2, &[1.5, -0.5, 0.5, 0.5]);
        assert!(matches!(
            validate_mdp(vec![p], DMatrix::zeros(2, 1)),
            Err(Error::NegativeEntry { .. })
        ));
        let p = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        assert!(matches!(
            validate_mdp(vec![p], DMatrix::zeros(3, 1)),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn point_mass_policy_selects_kernel() {
        let (m0, _) = three_state_models();
        let pi = Policy::deterministic(&[1, 1, 1], 2).unwrap();
        assert_eq!(induced_chain(&m0, &pi).unwrap(), m0.transition(1).clone());
    }

    #[test]
    fn uniform_policy_mixes_kernels() {
        let (_, m1) = three_state_models();
        let chain = induced_chain(&m1, &Policy::uniform(3, 2)).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                let hand = 0.5 * m1.prob(x, 0, y) + 0.5 * m1.prob(x, 1, y);
                assert!((chain[(x, y)] - hand).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn identity_chain_not_irreducible() {
        let err = stationary_distribution(&DMatrix::identity(2, 2)).unwrap_err();
        assert_eq!(err, Error::NotIrreducible { recurrent_classes: 2 });
    }

    #[test]
    fn flip_chain_is_symmetric() {
        let p = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let mu = stationary_distribution(&p).unwrap();
        assert!((mu[0] - 0.5).abs() < 1e-15 && (mu[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn transient_state_gets_zero_mass() {
        let p = DMatrix::from_row_slice(3, 3, &[0.2, 0.8, 0.0, 0.0, 0.5, 0.5, 0.0, 0.5, 0.5]);
        let mu = stationary_distribution(&p).unwrap();
        assert_eq!(mu[0], 0.0);
        assert!((mu[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn stationary_matches_power_iteration() {
        let (m0, _) = three_state_models();
        let p = m0.transition(0);
        let mu = stationary_distribution(p).unwrap();
        // power iteration oracle
        let mut v = DVector::from_element(3, 1.0 / 3.0);
        for _ in 0..10_000 {
            v = p.transpose() * v;
        }
        assert!((&mu - &v).amax() < 1e-12);
        let resid = (p.transpose() * &mu - &mu).amax();
        assert!(resid < 1e-10);
    }

    #[test]
    fn two_cycle_occupancy_and_value() {
        let m = two_cycle();
        let pi = Policy::deterministic(&[1, 1], 2).unwrap();
        let xi = occupancy_from_policy(&m, &pi).unwrap();
        assert_eq!(xi.get(0, 1), 0.5);
        assert_eq!(xi.get(1, 1), 0.5);
        assert_eq!(xi.get(0, 0), 0.0);
        assert!((ergodic_value(&m, &pi).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_reward_value() {
        let (m0, _) = three_state_models();
        let m = m0.with_reward(DMatrix::from_element(3, 2, 2.5)).unwrap();
        let v = ergodic_value(&m, &Policy::uniform(3, 2)).unwrap();
        assert!((v - 2.5).abs() < 1e-12);
    }

    #[test]
    fn zero_mass_row_becomes_uniform() {
        let xi = OccupancyMeasure::new(DMatrix::from_row_slice(
            3,
            2,
            &[0.25, 0.25, 0.5, 0.0, 0.0, 0.0],
        ))
        .unwrap();
        let pi = policy_from_occupancy(&xi);
        assert_eq!(pi.row(2), vec![0.5, 0.5]);
        assert_eq!(pi.row(1), vec![1.0, 0.0]);
    }

    #[test]
    fn uniform_occupancy_gives_uniform_policy() {
        let xi = OccupancyMeasure::new(DMatrix::from_element(3, 2, 1.0 / 6.0)).unwrap();
        let pi = policy_from_occupancy(&xi);
        assert!((pi.matrix() - Policy::uniform(3, 2).matrix()).amax() < 1e-15);
    }

    #[test]
    fn occupancy_matches_mu_times_pi() {
        let (_, m1) = three_state_models();
        let pi = Policy::uniform(3, 2);
        let xi = occupancy_from_policy(&m1, &pi).unwrap();
        let mu = stationary_distribution(&induced_chain(&m1, &pi).unwrap()).unwrap();
        for x in 0..3 {
            for u in 0..2 {
                assert!((xi.get(x, u) - mu[x] * 0.5).abs() < 1e-9);
            }
        }
        assert!(xi.stationarity_residual(&m1) < 1e-12);
    }

    #[test]
    fn simulate_horizon_one_and_determinism() {
        let (m0, m1) = three_state_models();
        let sc = ChangeScenario::new(m0, m1, Policy::uniform(3, 2), Policy::uniform(3, 2), 5).unwrap();
        let t = simulate(&sc, 1, 3).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(simulate(&sc, 200, 11).unwrap(), simulate(&sc, 200, 11).unwrap());
        assert!(simulate(&sc, 0, 1).is_err());
    }

    #[test]
    fn scenario_file_rejects_bad_row() {
        let text = r#"{"n_states":2,"n_actions":1,"P0":[[[0.5,0.6],[0.5,0.5]]],
            "P1":[[[0.5,0.5],[0.5,0.5]]],"r0":[[0],[0]],"r1":[[0],[0]],"nu":3}"#;
        let err = MdpScenario::from_json(text).unwrap_err();
        assert!(matches!(err, Error::Parse(ref s) if s.contains("P0[0][0]")), "{err}");
    }

    #[test]
    fn scenario_file_syntax_error_has_position() {
        let err = MdpScenario::from_json("{\"n_states\": 2,\n \"n_actions\": }").unwrap_err();
        assert!(matches!(err, Error::Parse(ref s) if s.contains("line 2")), "{err}");
    }
}
