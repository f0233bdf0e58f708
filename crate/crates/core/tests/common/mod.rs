//! Independent oracles shared by the integration tests. Nothing here calls
//! into the solvers or metrics under test.
#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::{DMatrix, DVector};
use privchange::mdp::{Mdp, Policy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GRID: usize = 51;
pub const STEP: f64 = 0.02;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Row-stochastic matrix with entries bounded away from zero.
pub fn positive_stochastic(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut m = DMatrix::from_fn(n, n, |_, _| rng.random_range(0.05..1.0));
    for mut row in m.row_iter_mut() {
        let s = row.sum();
        row /= s;
    }
    m
}

pub fn random_mdp(n: usize, na: usize, rng: &mut ChaCha8Rng) -> Mdp {
    let p = (0..na).map(|_| positive_stochastic(n, rng)).collect();
    let r = DMatrix::from_fn(n, na, |_, _| rng.random_range(0.0..1.0));
    Mdp::new(p, r).unwrap()
}

pub fn random_policy(n: usize, na: usize, rng: &mut ChaCha8Rng) -> Policy {
    let w = DMatrix::from_fn(n, na, |_, _| rng.random_range(0.01..1.0));
    Policy::from_weights(&w).unwrap()
}

/// The fixed 2-state/2-action corpus.
pub fn corpus_pair(index: u64) -> (Mdp, Mdp) {
    let mut r = rng(1000 + index);
    (random_mdp(2, 2, &mut r), random_mdp(2, 2, &mut r))
}

/// Stationary distribution by power iteration on a lazy chain.
pub fn stationary_power(p: &DMatrix<f64>) -> DVector<f64> {
    let n = p.nrows();
    let lazy = (p + DMatrix::identity(n, n)) * 0.5;
    let mut mu = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..200_000 {
        let next = lazy.transpose() * &mu;
        let diff = (&next - &mu).amax();
        mu = next;
        if diff < 1e-17 {
            break;
        }
    }
    let s = mu.sum();
    mu / s
}

pub fn closed_loop(m: &Mdp, pi: &Policy) -> DMatrix<f64> {
    let n = m.n_states();
    DMatrix::from_fn(n, n, |x, y| (0..m.n_actions()).map(|u| pi.prob(x, u) * m.prob(x, u, y)).sum())
}

fn xlogy_ratio(p: f64, q: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else if q == 0.0 {
        f64::INFINITY
    } else {
        p * (p / q).ln()
    }
}

/// `Σ_{x,u} ξ₁ Σ_y P₁(y|x,u) Σ_{u'} π₁(u'|y) ln[π₁(u'|y)P₁(y|x,u) / (π₀(u'|y)P₀(y|x,u))]`.
pub fn single_sum_full(m0: &Mdp, m1: &Mdp, pi0: &Policy, pi1: &Policy) -> f64 {
    let mu = stationary_power(&closed_loop(m1, pi1));
    let (n, na) = (m0.n_states(), m0.n_actions());
    let mut total = 0.0;
    for x in 0..n {
        for u in 0..na {
            let xi = mu[x] * pi1.prob(x, u);
            if xi == 0.0 {
                continue;
            }
            for y in 0..n {
                for v in 0..na {
                    let num = pi1.prob(y, v) * m1.prob(x, u, y);
                    let den = pi0.prob(y, v) * m0.prob(x, u, y);
                    total += xi * xlogy_ratio(num, den);
                }
            }
        }
    }
    total
}

/// `Σ_x μ₁(x) Σ_y P₁^{π₁}(y|x) ln(P₁^{π₁}(y|x)/P₀^{π₀}(y|x))`.
pub fn direct_limited(m0: &Mdp, m1: &Mdp, pi0: &Policy, pi1: &Policy) -> f64 {
    let c1 = closed_loop(m1, pi1);
    let c0 = closed_loop(m0, pi0);
    let mu = stationary_power(&c1);
    let n = m0.n_states();
    (0..n)
        .map(|x| mu[x] * (0..n).map(|y| xlogy_ratio(c1[(x, y)], c0[(x, y)])).sum::<f64>())
        .sum()
}

fn stat2(p: &[[f64; 2]; 2]) -> [f64; 2] {
    let (a, b) = (p[0][1], p[1][0]);
    if a + b == 0.0 {
        [0.5, 0.5]
    } else {
        [b / (a + b), a / (a + b)]
    }
}

fn kl2(p: [f64; 2], q: [f64; 2]) -> f64 {
    xlogy_ratio(p[0], q[0]) + xlogy_ratio(p[1], q[1])
}

/// Tables over the 0.02 policy grid of a 2-state/2-action model:
/// `mu[a][b]` for `π(u₀|x₀) = a·STEP`, `π(u₀|x₁) = b·STEP`, and the
/// closed-loop rows `row[x][a]`.
struct Grid2 {
    mu: Vec<Vec<[f64; 2]>>,
    row: [Vec<[f64; 2]>; 2],
}

fn grid2(m: &Mdp) -> Grid2 {
    let row = |x: usize| -> Vec<[f64; 2]> {
        (0..GRID)
            .map(|a| {
                let p = a as f64 * STEP;
                let y0 = p * m.prob(x, 0, 0) + (1.0 - p) * m.prob(x, 1, 0);
                let y1 = p * m.prob(x, 0, 1) + (1.0 - p) * m.prob(x, 1, 1);
                [y0, y1]
            })
            .collect()
    };
    let rows = [row(0), row(1)];
    let mu = (0..GRID)
        .map(|a| (0..GRID).map(|b| stat2(&[rows[0][a], rows[1][b]])).collect())
        .collect();
    Grid2 { mu, row: rows }
}

fn pol(a: usize) -> [f64; 2] {
    let p = a as f64 * STEP;
    [p, 1.0 - p]
}

/// Exhaustive minimum of `I_F(π₀,π₁)` over the 0.02 grid on all four policy rows.
pub fn grid_best_full(m0: &Mdp, m1: &Mdp) -> f64 {
    let g1 = grid2(m1);
    let d = |x: usize, u: usize| {
        kl2([m1.prob(x, u, 0), m1.prob(x, u, 1)], [m0.prob(x, u, 0), m0.prob(x, u, 1)])
    };
    let model: Vec<[f64; 2]> = (0..GRID)
        .map(|a| {
            let p = pol(a);
            [p[0] * d(0, 0) + p[1] * d(0, 1), p[0] * d(1, 0) + p[1] * d(1, 1)]
        })
        .collect();
    let pkl: Vec<Vec<f64>> = (0..GRID).map(|i| (0..GRID).map(|j| kl2(pol(i), pol(j))).collect()).collect();
    let mut best = f64::INFINITY;
    for a in 0..GRID {
        for b in 0..GRID {
            let mu = g1.mu[a][b];
            for c in 0..GRID {
                let t0 = mu[0] * (model[a][0] + pkl[a][c]);
                for e in 0..GRID {
                    let v = t0 + mu[1] * (model[b][1] + pkl[b][e]);
                    if v < best {
                        best = v;
                    }
                }
            }
        }
    }
    best
}

/// Exhaustive minimum of `I_L(π₀,π₁)` over the 0.02 grid on all four policy rows.
pub fn grid_best_limited(m0: &Mdp, m1: &Mdp) -> f64 {
    let g1 = grid2(m1);
    let g0 = grid2(m0);
    let kl: [Vec<Vec<f64>>; 2] = [0, 1].map(|x| {
        (0..GRID)
            .map(|i| (0..GRID).map(|j| kl2(g1.row[x][i], g0.row[x][j])).collect())
            .collect()
    });
    let mut best = f64::INFINITY;
    for a in 0..GRID {
        for b in 0..GRID {
            let mu = g1.mu[a][b];
            for c in 0..GRID {
                let t0 = mu[0] * kl[0][a][c];
                for e in 0..GRID {
                    let v = t0 + mu[1] * kl[1][b][e];
                    if v < best {
                        best = v;
                    }
                }
            }
        }
    }
    best
}

/// Exhaustive maximum of `V(ρ,π₀,π₁) − λ I(π₀,π₁)` over the grid.
pub fn grid_best_tradeoff(m0: &Mdp, m1: &Mdp, rho: f64, lambda: f64, limited: bool) -> f64 {
    let g1 = grid2(m1);
    let g0 = grid2(m0);
    let reward = |m: &Mdp, a: usize, b: usize, mu: [f64; 2]| {
        let (p, q) = (pol(a), pol(b));
        mu[0] * (p[0] * m.reward()[(0, 0)] + p[1] * m.reward()[(0, 1)])
            + mu[1] * (q[0] * m.reward()[(1, 0)] + q[1] * m.reward()[(1, 1)])
    };
    let d = |x: usize, u: usize| {
        kl2([m1.prob(x, u, 0), m1.prob(x, u, 1)], [m0.prob(x, u, 0), m0.prob(x, u, 1)])
    };
    let mut best = f64::NEG_INFINITY;
    for a in 0..GRID {
        for b in 0..GRID {
            let mu1 = g1.mu[a][b];
            let v1 = reward(m1, a, b, mu1);
            for c in 0..GRID {
                for e in 0..GRID {
                    let mu0 = g0.mu[c][e];
                    let v0 = reward(m0, c, e, mu0);
                    let rate = if limited {
                        mu1[0] * kl2(g1.row[0][a], g0.row[0][c]) + mu1[1] * kl2(g1.row[1][b], g0.row[1][e])
                    } else {
                        let (pa, pb) = (pol(a), pol(b));
                        mu1[0] * (pa[0] * d(0, 0) + pa[1] * d(0, 1) + kl2(pa, pol(c)))
                            + mu1[1] * (pb[0] * d(1, 0) + pb[1] * d(1, 1) + kl2(pb, pol(e)))
                    };
                    // 0·∞ is taken as 0: with λ = 0 the rate is irrelevant.
                    let penalty = if lambda == 0.0 { 0.0 } else { lambda * rate };
                    let v = rho * v1 + (1.0 - rho) * v0 - penalty;
                    if v > best {
                        best = v;
                    }
                }
            }
        }
    }
    best
}

/// Random Schur-stable linear system.
pub fn random_linear(seed: u64) -> privchange::linear::LinearSystem {
    let mut r = rng(5000 + seed);
    let n = r.random_range(2..=4usize);
    let m = r.random_range(1..=n.min(2));
    let k_dim = r.random_range(1..=2usize);
    let mut g = |rows: usize, cols: usize| DMatrix::from_fn(rows, cols, |_, _| r.random_range(-1.0..1.0));
    let mut a_cl = g(n, n);
    let radius = a_cl.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
    a_cl *= 0.8 / radius.max(1e-3);
    let b = g(n, m);
    let k = g(m, n);
    let a = &a_cl - &b * &k;
    let f = g(n, k_dim);
    let theta = DVector::from_fn(k_dim, |i, _| 0.5 + i as f64 * 0.3);
    let gq = g(n, n);
    let q = &gq * gq.transpose() + DMatrix::identity(n, n) * 0.5;
    let gr = g(m, m);
    let rr = &gr * gr.transpose() + DMatrix::identity(m, m) * 0.5;
    privchange::linear::LinearSystem::new(a, b, f, theta, q, k, rr, 20).unwrap()
}
