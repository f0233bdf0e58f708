//! Reference models used throughout the examples and tests.

use nalgebra::{DMatrix, DVector};

use crate::linear::LinearSystem;
use crate::mdp::Mdp;

/// Pre-/post-change kernels of the 3-state, 2-action example MDP.
///
/// Rewards are not part of the published example; both models share
/// [`three_state_reward`].
pub fn three_state_models() -> (Mdp, Mdp) {
    let p0 = vec![
        DMatrix::from_row_slice(3, 3, &[0.6, 0.3, 0.1, 0.05, 0.85, 0.1, 0.15, 0.15, 0.7]),
        DMatrix::from_row_slice(3, 3, &[0.5, 0.2, 0.3, 0.5, 0.3, 0.2, 0.3, 0.3, 0.4]),
    ];
    let p1 = vec![
        DMatrix::from_row_slice(3, 3, &[0.3, 0.3, 0.4, 0.35, 0.5, 0.15, 0.8, 0.05, 0.15]),
        DMatrix::from_row_slice(3, 3, &[0.3, 0.55, 0.15, 0.8, 0.1, 0.1, 0.5, 0.3, 0.2]),
    ];
    let r = three_state_reward();
    (
        Mdp::new(p0, r.clone()).expect("valid kernel"),
        Mdp::new(p1, r).expect("valid kernel"),
    )
}

/// Reward table `r(x,u)` attached to the 3-state example.
pub fn three_state_reward() -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.5, 0.2, 1.0])
}

/// The 2-state linear example: `A=[[0,1],[1,1]]`, `B=[0.01;1]`, `F=[0.5;0.7]`,
/// `Q=I₂`, `θ=1`, `K=[−0.7,−0.9]`. `R` is set to 1 for the full-information case.
pub fn example_linear_system() -> LinearSystem {
    LinearSystem::new(
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 1.0]),
        DMatrix::from_row_slice(2, 1, &[0.01, 1.0]),
        DMatrix::from_row_slice(2, 1, &[0.5, 0.7]),
        DVector::from_element(1, 1.0),
        DMatrix::identity(2, 2),
        DMatrix::from_row_slice(1, 2, &[-0.7, -0.9]),
        DMatrix::identity(1, 1),
        50,
    )
    .expect("example system is valid")
}

/// A pair of points `x = (α, β)`, `y = (α', β')` of `Δ(X×U)²`.
pub type ProbePair = ((DMatrix<f64>, DMatrix<f64>), (DMatrix<f64>, DMatrix<f64>));

fn m22(v: [f64; 4]) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &v)
}

/// Two segments along which the conditional relative entropy is not convex.
/// On the first the convexity gap is nonpositive throughout; on the second
/// it changes sign. Entries are rounded to four decimals.
// 0.4342 is data, not log10(e).
#[allow(clippy::approx_constant)]
pub fn nonconvexity_probes() -> [ProbePair; 2] {
    [
        (
            (m22([0.5704, 0.0206, 0.1980, 0.2110]), m22([0.1312, 0.1403, 0.3757, 0.3529])),
            (m22([0.2891, 0.0753, 0.5033, 0.1322]), m22([0.1031, 0.3591, 0.3672, 0.1706])),
        ),
        (
            (m22([0.2110, 0.3764, 0.3246, 0.0881]), m22([0.4428, 0.3469, 0.0297, 0.1805])),
            (m22([0.1935, 0.3282, 0.4342, 0.0441]), m22([0.3474, 0.2314, 0.0416, 0.3796])),
        ),
    ]
}
