//! Difference-of-convex programs over pairs of occupancy-like blocks and the
//! convex-concave procedure that solves them.
//!
//! Every problem has the form `J(z) = cᵀz + Σ convex_k(z) − Σ concave_k(z)`
//! with each term a weighted `a ln(a/b)` of affine forms. One CCP step
//! linearizes the subtracted part at the current point and minimizes the
//! resulting convex majorizer.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mdp::{recurrent_classes, stationary_distribution, Mdp, Policy};
use crate::metrics::kl_unchecked;

use super::barrier::{AffineForm, ConvexProgram, RelEntropyTerm};
use super::SynthesisConfig;

/// Mixing weight of the uniform interior point applied to every start.
pub const INTERIOR_MIX: f64 = 1e-10;

/// What a block of `|X|·|U|` variables represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// Stationary occupancy measure of the given model (0 or 1).
    Occupancy(usize),
    /// A policy table, one simplex per state.
    Policy,
}

/// Which program a [`DcProblem`] encodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DcKind {
    /// Minimize `I_L` over `(π₀, ξ¹)`.
    BestPrivacyLimited,
    /// Minimize `−V + λ I_F` over `(ξ⁰, ξ¹)`.
    TradeoffFull { rho: f64, lambda: f64 },
    /// Minimize `−V + λ I_L` over `(ξ⁰, ξ¹)`.
    TradeoffLimited { rho: f64, lambda: f64 },
}

/// A DC program on the full layout `z = [block0 | block1]`, each block
/// indexed `x·|U| + u`. Variables that must vanish for the objective to be
/// finite are eliminated from the solver's variable set.
#[derive(Debug, Clone)]
pub struct DcProblem {
    pub kind: DcKind,
    pub blocks: [BlockKind; 2],
    n_states: usize,
    n_actions: usize,
    /// Full index -> compact index.
    compact: Vec<Option<usize>>,
    /// Compact index -> full index.
    full: Vec<usize>,
    linear: Vec<f64>,
    convex: Vec<RelEntropyTerm>,
    concave: Vec<RelEntropyTerm>,
    a_eq: DMatrix<f64>,
    b_eq: DVector<f64>,
    floor: f64,
    models: [Mdp; 2],
}

/// Outcome of one CCP run.
#[derive(Debug, Clone, PartialEq)]
pub struct CcpRun {
    /// Final point, full layout.
    pub z: Vec<f64>,
    pub objective: f64,
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn full_kl_table(m0: &Mdp, m1: &Mdp) -> DMatrix<f64> {
    let n = m0.n_states();
    DMatrix::from_fn(n, m0.n_actions(), |x, u| {
        kl_unchecked((0..n).map(|y| (m1.prob(x, u, y), m0.prob(x, u, y))))
    })
}

impl DcProblem {
    pub fn new(kind: DcKind, m0: &Mdp, m1: &Mdp, floor: f64) -> Result<Self> {
        crate::mdp::check_same_shape(m0, m1)?;
        let (n, na) = (m0.n_states(), m0.n_actions());
        let bs = n * na;
        let idx = |block: usize, x: usize, u: usize| block * bs + x * na + u;
        let mass = |block: usize, x: usize| AffineForm {
            coeffs: (0..na).map(|u| (idx(block, x, u), 1.0)).collect(),
            constant: 0.0,
        };
        let closed_loop = |block: usize, m: &Mdp, x: usize, y: usize| AffineForm {
            coeffs: (0..na)
                .filter(|&u| m.prob(x, u, y) > 0.0)
                .map(|u| (idx(block, x, u), m.prob(x, u, y)))
                .collect(),
            constant: 0.0,
        };

        let mut linear = vec![0.0; 2 * bs];
        let mut convex = Vec::new();
        let mut concave = Vec::new();
        let mut forced_zero = vec![false; 2 * bs];
        let blocks;
        match kind {
            DcKind::BestPrivacyLimited => {
                blocks = [BlockKind::Policy, BlockKind::Occupancy(1)];
                for x in 0..n {
                    for y in 0..n {
                        convex.push(RelEntropyTerm {
                            weight: 1.0,
                            num: closed_loop(1, m1, x, y),
                            den: closed_loop(0, m0, x, y),
                        });
                    }
                    concave.push(RelEntropyTerm { weight: 1.0, num: mass(1, x), den: AffineForm::constant(1.0) });
                }
            }
            DcKind::TradeoffFull { rho, lambda } | DcKind::TradeoffLimited { rho, lambda } => {
                blocks = [BlockKind::Occupancy(0), BlockKind::Occupancy(1)];
                for x in 0..n {
                    for u in 0..na {
                        linear[idx(0, x, u)] = -(1.0 - rho) * m0.reward()[(x, u)];
                        linear[idx(1, x, u)] = -rho * m1.reward()[(x, u)];
                    }
                }
                if lambda > 0.0 {
                    if matches!(kind, DcKind::TradeoffFull { .. }) {
                        let d1 = full_kl_table(m0, m1);
                        for x in 0..n {
                            for u in 0..na {
                                let i = idx(1, x, u);
                                if d1[(x, u)].is_infinite() {
                                    forced_zero[i] = true;
                                } else {
                                    linear[i] += lambda * d1[(x, u)];
                                }
                                convex.push(RelEntropyTerm {
                                    weight: lambda,
                                    num: AffineForm { coeffs: vec![(i, 1.0)], constant: 0.0 },
                                    den: AffineForm { coeffs: vec![(idx(0, x, u), 1.0)], constant: 0.0 },
                                });
                            }
                        }
                    } else {
                        for x in 0..n {
                            for y in 0..n {
                                convex.push(RelEntropyTerm {
                                    weight: lambda,
                                    num: closed_loop(1, m1, x, y),
                                    den: closed_loop(0, m0, x, y),
                                });
                            }
                        }
                    }
                    for x in 0..n {
                        concave.push(RelEntropyTerm { weight: lambda, num: mass(1, x), den: mass(0, x) });
                    }
                }
            }
        }

        // Eliminate variables feeding a numerator whose denominator vanishes.
        let live = |f: &AffineForm, dead: &[bool]| f.constant != 0.0 || f.coeffs.iter().any(|&(i, c)| c != 0.0 && !dead[i]);
        loop {
            let mut changed = false;
            for t in &convex {
                if live(&t.num, &forced_zero) && !live(&t.den, &forced_zero) {
                    for &(i, _) in &t.num.coeffs {
                        if !forced_zero[i] {
                            forced_zero[i] = true;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let models = [m0.clone(), m1.clone()];
        for (b, kind) in blocks.iter().enumerate() {
            for x in 0..n {
                if (0..na).all(|u| forced_zero[idx(b, x, u)]) {
                    return Err(Error::InfiniteCost(format!("every action at state {x} has unbounded information cost")));
                }
            }
            if let BlockKind::Occupancy(mi) = kind {
                let allowed = Policy::from_weights(&DMatrix::from_fn(n, na, |x, u| {
                    if forced_zero[idx(b, x, u)] { 0.0 } else { 1.0 }
                }))?;
                let chain = crate::mdp::induced_chain(&models[*mi], &allowed)?;
                let (classes, recurrent) = recurrent_classes(&chain);
                if classes != 1 || recurrent.iter().any(|&r| !r) {
                    return Err(Error::NotIrreducible { recurrent_classes: classes });
                }
            }
        }

        let mut compact = vec![None; 2 * bs];
        let mut full = Vec::new();
        for i in 0..2 * bs {
            if !forced_zero[i] {
                compact[i] = Some(full.len());
                full.push(i);
            }
        }
        let remap = |f: &AffineForm| AffineForm {
            coeffs: f.coeffs.iter().filter_map(|&(i, c)| compact[i].map(|j| (j, c))).filter(|&(_, c)| c != 0.0).collect(),
            constant: f.constant,
        };
        let remap_terms = |ts: &[RelEntropyTerm]| -> Vec<RelEntropyTerm> {
            ts.iter()
                .map(|t| RelEntropyTerm { weight: t.weight, num: remap(&t.num), den: remap(&t.den) })
                .filter(|t| t.weight != 0.0 && !t.num.is_zero())
                .collect()
        };
        let convex = remap_terms(&convex);
        let concave = remap_terms(&concave);
        let linear = full.iter().map(|&i| linear[i]).collect();

        // Equality constraints per block.
        let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
        for (b, kind) in blocks.iter().enumerate() {
            match kind {
                BlockKind::Occupancy(mi) => {
                    let m = &models[*mi];
                    for y in 0..n {
                        let mut row = Vec::new();
                        for x in 0..n {
                            for u in 0..na {
                                let mut c = m.prob(x, u, y);
                                if x == y {
                                    c -= 1.0;
                                }
                                if c != 0.0 {
                                    row.push((idx(b, x, u), c));
                                }
                            }
                        }
                        rows.push((row, 0.0));
                    }
                    rows.push(((0..bs).map(|i| (b * bs + i, 1.0)).collect(), 1.0));
                }
                BlockKind::Policy => {
                    for x in 0..n {
                        rows.push(((0..na).map(|u| (idx(b, x, u), 1.0)).collect(), 1.0));
                    }
                }
            }
        }
        let mut a_eq = DMatrix::zeros(rows.len(), full.len());
        let mut b_eq = DVector::zeros(rows.len());
        for (r, (row, rhs)) in rows.iter().enumerate() {
            for &(i, c) in row {
                if let Some(j) = compact[i] {
                    a_eq[(r, j)] += c;
                }
            }
            b_eq[r] = *rhs;
        }

        Ok(Self {
            kind,
            blocks,
            n_states: n,
            n_actions: na,
            compact,
            full,
            linear,
            convex,
            concave,
            a_eq,
            b_eq,
            floor,
            models,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Length of the full layout.
    pub fn dim(&self) -> usize {
        2 * self.n_states * self.n_actions
    }

    /// True if variable `i` (full layout) is structurally pinned at zero.
    pub fn is_eliminated(&self, i: usize) -> bool {
        self.compact[i].is_none()
    }

    fn to_compact(&self, z: &[f64]) -> Vec<f64> {
        self.full.iter().map(|&i| z[i]).collect()
    }

    fn to_full(&self, c: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.dim()];
        for (j, &i) in self.full.iter().enumerate() {
            z[i] = c[j];
        }
        z
    }

    fn objective_compact(&self, c: &[f64]) -> f64 {
        let lin: f64 = self.linear.iter().zip(c).map(|(a, b)| a * b).sum();
        lin + self.convex.iter().map(|t| t.value(c, self.floor)).sum::<f64>()
            - self.concave.iter().map(|t| t.value(c, self.floor)).sum::<f64>()
    }

    /// `J(z)`.
    pub fn objective(&self, z: &[f64]) -> f64 {
        self.objective_compact(&self.to_compact(z))
    }

    /// Subtracted convex part `h(z)`.
    pub fn concave_part(&self, z: &[f64]) -> f64 {
        let c = self.to_compact(z);
        self.concave.iter().map(|t| t.value(&c, self.floor)).sum()
    }

    /// First-order model `h(z_k) + ∇h(z_k)ᵀ(z − z_k)` of the subtracted part.
    pub fn concave_linearization(&self, at: &[f64], z: &[f64]) -> f64 {
        let ca = self.to_compact(at);
        let cz = self.to_compact(z);
        let mut g = vec![0.0; ca.len()];
        for t in &self.concave {
            t.add_gradient(&ca, self.floor, &mut g);
        }
        let h0: f64 = self.concave.iter().map(|t| t.value(&ca, self.floor)).sum();
        h0 + g.iter().zip(cz.iter().zip(&ca)).map(|(gi, (a, b))| gi * (a - b)).sum::<f64>()
    }

    /// Max-norm violation of the block equality constraints and nonnegativity.
    pub fn feasibility_residual(&self, z: &[f64]) -> f64 {
        let c = self.to_compact(z);
        let eq = (&self.a_eq * DVector::from_column_slice(&c) - &self.b_eq).amax();
        let neg = z.iter().fold(0.0f64, |acc, &v| acc.max(-v));
        let pinned = (0..self.dim()).filter(|&i| self.is_eliminated(i)).fold(0.0f64, |acc, i| acc.max(z[i].abs()));
        eq.max(neg).max(pinned)
    }

    /// Strictly feasible point for a block from a policy: the occupancy of
    /// that policy (restricted to non-eliminated actions), or the policy itself.
    fn block_point(&self, b: usize, pi: &Policy) -> Result<Vec<f64>> {
        let (n, na) = (self.n_states, self.n_actions);
        let bs = n * na;
        let allowed = |x: usize, u: usize| !self.is_eliminated(b * bs + x * na + u);
        let mut w = DMatrix::from_fn(n, na, |x, u| if allowed(x, u) { pi.prob(x, u) } else { 0.0 });
        for x in 0..n {
            if w.row(x).sum() <= 0.0 {
                for u in 0..na {
                    w[(x, u)] = if allowed(x, u) { 1.0 } else { 0.0 };
                }
            }
        }
        let pi = Policy::from_weights(&w)?;
        Ok(match self.blocks[b] {
            BlockKind::Policy => pi.matrix().transpose().as_slice().to_vec(),
            BlockKind::Occupancy(mi) => {
                let chain = crate::mdp::induced_chain(&self.models[mi], &pi)?;
                let mu = stationary_distribution(&chain)?;
                let mut out = vec![0.0; bs];
                for x in 0..n {
                    for u in 0..na {
                        out[x * na + u] = mu[x] * pi.prob(x, u);
                    }
                }
                out
            }
        })
    }

    /// Start point from a policy pair, pushed into the interior by mixing in
    /// [`INTERIOR_MIX`] of the uniform point.
    pub fn start_from_policies(&self, pi0: &Policy, pi1: &Policy) -> Result<Vec<f64>> {
        let (n, na) = (self.n_states, self.n_actions);
        let uni = Policy::uniform(n, na);
        let mut z = Vec::with_capacity(self.dim());
        for (b, pi) in [pi0, pi1].into_iter().enumerate() {
            let p = self.block_point(b, pi)?;
            let u = self.block_point(b, &uni)?;
            z.extend(p.iter().zip(&u).map(|(a, c)| (1.0 - INTERIOR_MIX) * a + INTERIOR_MIX * c));
        }
        Ok(z)
    }

    /// One CCP step from `z` (full layout). Returns the minimizer of the
    /// convex majorizer and whether the inner solve met its tolerance.
    pub fn ccp_step(&self, z: &[f64], cfg: &SynthesisConfig) -> (Vec<f64>, bool) {
        let c = self.to_compact(z);
        let mut lin = self.linear.clone();
        let mut g = vec![0.0; c.len()];
        for t in &self.concave {
            t.add_gradient(&c, self.floor, &mut g);
        }
        for (l, gi) in lin.iter_mut().zip(&g) {
            *l -= gi;
        }
        let program = ConvexProgram {
            linear: lin,
            terms: self.convex.clone(),
            a_eq: self.a_eq.clone(),
            b_eq: self.b_eq.clone(),
            floor: self.floor,
        };
        let out = program.solve(&c, cfg.inner_tol, cfg.inner_max_iters);
        (self.to_full(&out.z), out.converged)
    }

    /// Run CCP from `z0` until the objective decrease drops below `ccp_tol`.
    ///
    /// Each step linearizes at an extrapolated point `z + β(z − z_prev)` when
    /// that point is interior and no worse than `z`, and at `z` otherwise.
    /// Only decreasing steps are accepted, so the history is monotone.
    pub fn run(&self, z0: &[f64], cfg: &SynthesisConfig) -> CcpRun {
        let mut z = z0.to_vec();
        let mut z_prev = z.clone();
        let mut j = self.objective(&z);
        let mut history = vec![j];
        let mut converged = false;
        let mut iterations = 0;
        let mut momentum = 0usize;
        while iterations < cfg.ccp_max_iters {
            iterations += 1;
            let extrapolated = self.extrapolate(&z, &z_prev, momentum, j);
            let (mut base, mut j_base) = extrapolated.clone().unwrap_or_else(|| (z.clone(), j));
            let (mut next, mut ok) = self.ccp_step(&base, cfg);
            let mut j_next = self.objective(&next);
            if j_next > j_base && extrapolated.is_some() {
                momentum = 0;
                (base, j_base) = (z.clone(), j);
                (next, ok) = self.ccp_step(&base, cfg);
                j_next = self.objective(&next);
            }
            if j_next <= j_base {
                let decrease = j - j_next;
                z_prev = std::mem::replace(&mut z, next);
                j = j_next;
                history.push(j);
                momentum += 1;
                if decrease < cfg.ccp_tol {
                    // Certified by the final surrogate solve only.
                    converged = ok;
                    break;
                }
            } else {
                // The majorizer bounds any increase by the inner tolerance.
                converged = ok && j_next - j_base <= cfg.ccp_tol;
                break;
            }
        }
        CcpRun { z, objective: j, history, iterations, converged }
    }

    /// Extrapolation along the last step, `z + β(z − z_prev)`. `β` starts at
    /// the Nesterov weight and doubles while the objective keeps improving;
    /// entries may shrink by at most a factor 100 so the point stays interior.
    fn extrapolate(&self, z: &[f64], z_prev: &[f64], momentum: usize, j: f64) -> Option<(Vec<f64>, f64)> {
        const MAX_BETA: f64 = 64.0;
        if momentum == 0 {
            return None;
        }
        let k = momentum as f64;
        let point = |beta: f64| -> Option<Vec<f64>> {
            let v: Vec<f64> = z.iter().zip(z_prev).map(|(a, b)| a + beta * (a - b)).collect();
            v.iter().zip(z).all(|(vi, zi)| *zi == 0.0 || *vi >= 0.01 * zi).then_some(v)
        };
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut beta = (k - 1.0) / (k + 2.0);
        if beta <= 0.0 {
            return None;
        }
        while beta <= MAX_BETA {
            let Some(v) = point(beta) else { break };
            let jv = self.objective(&v);
            let bar = best.as_ref().map_or(j, |b| b.1);
            if !(jv <= bar) {
                break;
            }
            best = Some((v, jv));
            beta *= 2.0;
        }
        best
    }

    /// Split a full-layout point into its two `|X|×|U|` blocks.
    pub fn split(&self, z: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let (n, na) = (self.n_states, self.n_actions);
        let bs = n * na;
        let block = |b: usize| DMatrix::from_fn(n, na, |x, u| z[b * bs + x * na + u]);
        (block(0), block(1))
    }
}
