//! Linear programs over the occupancy polytope
//! `{ξ ≥ 0 : Σ ξ = 1, Σ_{x,u} ξ_{x,u} P(y|x,u) = Σ_u ξ_{y,u} ∀y}`.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mdp::{stationarity_residual, Mdp, OccupancyMeasure};

/// Residual accepted on LP solutions.
pub const LP_RESIDUAL_TOL: f64 = 1e-8;

/// Minimize `⟨cost, ξ⟩` over the occupancy polytope of `m`.
///
/// Entries of `cost` equal to `+∞` pin the corresponding `ξ_{x,u}` to zero;
/// if no feasible occupancy avoids them the result is `InfiniteCost`.
pub fn solve_occupancy_lp(cost: &DMatrix<f64>, m: &Mdp) -> Result<OccupancyMeasure> {
    let (n, na) = (m.n_states(), m.n_actions());
    if cost.shape() != (n, na) {
        return Err(Error::ShapeMismatch(format!(
            "cost is {}x{}, expected {n}x{na}",
            cost.nrows(),
            cost.ncols()
        )));
    }
    if cost.iter().any(|c| c.is_nan() || *c == f64::NEG_INFINITY) {
        return Err(Error::InvalidArgument("cost entries must be finite or +inf".into()));
    }
    let pinned = cost.iter().any(|c| c.is_infinite());

    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..n * na)
        .map(|i| {
            let (x, u) = (i / na, i % na);
            let c = cost[(x, u)];
            if c.is_infinite() {
                lp.add_var(0.0, (0.0, 0.0))
            } else {
                lp.add_var(c, (0.0, f64::INFINITY))
            }
        })
        .collect();
    // One balance row is implied by the others together with the mass row.
    for y in 0..n.saturating_sub(1) {
        let mut row = Vec::with_capacity(n * na);
        for x in 0..n {
            for u in 0..na {
                let mut c = m.prob(x, u, y);
                if x == y {
                    c -= 1.0;
                }
                if c != 0.0 {
                    row.push((vars[x * na + u], c));
                }
            }
        }
        lp.add_constraint(row, ComparisonOp::Eq, 0.0);
    }
    lp.add_constraint(vars.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);

    let outcome = lp.solve().map_err(|e| match e {
        microlp::Error::Infeasible if pinned => {
            Error::InfiniteCost("every stationary occupancy visits an infinite-cost pair".into())
        }
        microlp::Error::Infeasible => Error::Infeasible("occupancy polytope is empty".into()),
        microlp::Error::Unbounded => Error::Unbounded("occupancy LP".into()),
        other => Error::Infeasible(format!("LP solver failure: {other}")),
    })?;
    let sol = outcome
        .solution()
        .ok_or_else(|| Error::Infeasible("LP solver stopped without a solution".into()))?;

    let mut xi = DMatrix::from_fn(n, na, |x, u| sol[vars[x * na + u]].max(0.0));
    let mass = xi.sum();
    xi /= mass;
    let residual = stationarity_residual(&xi, m);
    if residual > LP_RESIDUAL_TOL {
        return Err(Error::Infeasible(format!("LP solution has stationarity residual {residual:e}")));
    }
    OccupancyMeasure::new(xi)
}
