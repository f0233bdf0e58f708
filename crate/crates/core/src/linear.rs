//! Additive changes in linear Gaussian systems
//! `x_{t+1} = A x_t + B u_t + Fθ·1{t≥ν} + w_t`, `w_t ~ N(0,Q)`,
//! under affine feedback `u_t = K x_t + α` (plus `N(0,R)` noise in the
//! full-information case).
//!
//! Everything here is closed form: Lyapunov covariances, best privacy levels,
//! and the optimal offsets `(α₀*, α₁*)` of the privacy-utility trade-off.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::matrix_from_rows;
use crate::rng::{derive_seed, seeded, SimRng};

/// Spectral radius margin for [`is_schur`].
pub const SCHUR_MARGIN: f64 = 1e-12;
const KRONECKER_MAX_DIM: usize = 20;
const CONDITION_WARN: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub theta: DVector<f64>,
    pub q: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub nu: usize,
}

impl LinearSystem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        f: DMatrix<f64>,
        theta: DVector<f64>,
        q: DMatrix<f64>,
        k: DMatrix<f64>,
        r: DMatrix<f64>,
        nu: usize,
    ) -> Result<Self> {
        let n = a.nrows();
        let m = b.ncols();
        let shape = |name: &str, mat: &DMatrix<f64>, rows: usize, cols: usize| {
            if mat.shape() != (rows, cols) {
                Err(Error::ShapeMismatch(format!(
                    "{name} is {}x{}, expected {rows}x{cols}",
                    mat.nrows(),
                    mat.ncols()
                )))
            } else {
                Ok(())
            }
        };
        shape("A", &a, n, n)?;
        shape("B", &b, n, m)?;
        shape("F", &f, n, theta.len())?;
        shape("Q", &q, n, n)?;
        shape("K", &k, m, n)?;
        shape("R", &r, m, m)?;
        check_spd("Q", &q)?;
        check_spd("R", &r)?;
        if (b.transpose() * &b).cholesky().is_none() {
            return Err(Error::InvalidArgument("columns of B are linearly dependent".into()));
        }
        let sys = Self { a, b, f, theta, q, k, r, nu };
        let radius = spectral_radius(&sys.closed_loop());
        if radius >= 1.0 - SCHUR_MARGIN {
            return Err(Error::NotSchur { radius });
        }
        Ok(sys)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// `A + BK`.
    pub fn closed_loop(&self) -> DMatrix<f64> {
        &self.a + &self.b * &self.k
    }

    /// `L = I − A − BK`.
    pub fn l_matrix(&self) -> DMatrix<f64> {
        DMatrix::identity(self.n(), self.n()) - self.closed_loop()
    }

    /// `E = L⁻ᵀL⁻¹`.
    pub fn e_matrix(&self) -> Result<DMatrix<f64>> {
        let l_inv = self.l_solve(&DMatrix::identity(self.n(), self.n()))?;
        Ok(l_inv.transpose() * l_inv)
    }

    /// `L⁻¹ rhs`.
    pub fn l_solve(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let l = self.l_matrix();
        warn_if_ill_conditioned("L", &l);
        l.lu().solve(rhs).ok_or(Error::SingularL)
    }

    /// The additive change `Fθ`.
    pub fn change_vector(&self) -> DVector<f64> {
        &self.f * &self.theta
    }

    /// `Q⁻¹` via its Cholesky factor.
    pub fn q_inv(&self) -> Result<DMatrix<f64>> {
        spd_inverse("Q", &self.q)
    }

    /// Stationary covariance: `W = Q + BRBᵀ` with randomized policies, `W = Q` otherwise.
    pub fn stationary_covariance(&self, stochastic_policy: bool) -> Result<DMatrix<f64>> {
        let w = if stochastic_policy {
            &self.q + &self.b * &self.r * self.b.transpose()
        } else {
            self.q.clone()
        };
        solve_lyapunov(&self.closed_loop(), &w)
    }

    /// Stationary means before and after the change for offsets `(α₀, α₁)`.
    pub fn stationary_means(
        &self,
        alpha0: &DVector<f64>,
        alpha1: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let pre = self.l_solve(&DMatrix::from_column_slice(self.n(), 1, (&self.b * alpha0).as_slice()))?;
        let post_rhs = &self.b * alpha1 + self.change_vector();
        let post = self.l_solve(&DMatrix::from_column_slice(self.n(), 1, post_rhs.as_slice()))?;
        Ok((pre.column(0).into_owned(), post.column(0).into_owned()))
    }
}

fn check_spd(name: &str, m: &DMatrix<f64>) -> Result<()> {
    let scale = m.amax().max(1.0);
    if (m - m.transpose()).amax() > 1e-12 * scale || m.clone().cholesky().is_none() {
        return Err(Error::NotSpd(name.into()));
    }
    Ok(())
}

fn spd_inverse(name: &str, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = m.clone().cholesky().ok_or_else(|| Error::NotSpd(name.into()))?;
    warn_if_ill_conditioned(name, m);
    Ok(chol.solve(&DMatrix::identity(m.nrows(), m.nrows())))
}

fn warn_if_ill_conditioned(name: &str, m: &DMatrix<f64>) {
    let sv = m.clone().singular_values();
    let (max, min) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    if min == 0.0 || max / min > CONDITION_WARN {
        log::warn!("{name} is ill-conditioned (condition number {:e})", max / min);
    }
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// True iff the spectral radius is below `1 − 1e-12`.
pub fn is_schur(m: &DMatrix<f64>) -> bool {
    m.is_square() && spectral_radius(m) < 1.0 - SCHUR_MARGIN
}

/// Solve `Σ = A Σ Aᵀ + W` for Schur `A`.
///
/// Small systems use the Kronecker form `(I − A⊗A) vec Σ = vec W`; larger
/// ones use Smith's doubling iteration.
pub fn solve_lyapunov(a_cl: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a_cl.nrows();
    if !a_cl.is_square() || w.shape() != (n, n) {
        return Err(Error::ShapeMismatch("Lyapunov operands must be square and equal-sized".into()));
    }
    let radius = spectral_radius(a_cl);
    if radius >= 1.0 - SCHUR_MARGIN {
        return Err(Error::NotSchur { radius });
    }
    let sigma = if n <= KRONECKER_MAX_DIM {
        let kron = a_cl.kronecker(a_cl);
        let lhs = DMatrix::identity(n * n, n * n) - kron;
        let rhs = DVector::from_column_slice(w.as_slice());
        let vec = lhs.lu().solve(&rhs).ok_or(Error::NotSchur { radius })?;
        DMatrix::from_column_slice(n, n, vec.as_slice())
    } else {
        let mut sigma = w.clone();
        let mut ak = a_cl.clone();
        for _ in 0..100 {
            let incr = &ak * &sigma * ak.transpose();
            let done = incr.amax() <= 1e-15 * sigma.amax().max(1.0);
            sigma += incr;
            ak = &ak * &ak;
            if done {
                break;
            }
        }
        sigma
    };
    Ok((&sigma + sigma.transpose()) * 0.5)
}

/// `½ (m₁−m₀)ᵀ Q⁻¹ (m₁−m₀)`: KL between Gaussians sharing covariance `Q`.
pub fn gaussian_kl_equal_cov(m1: &DVector<f64>, m0: &DVector<f64>, q: &DMatrix<f64>) -> Result<f64> {
    if m1.len() != m0.len() || q.shape() != (m1.len(), m1.len()) {
        return Err(Error::ShapeMismatch("mean/covariance dimensions differ".into()));
    }
    let chol = q.clone().cholesky().ok_or_else(|| Error::NotSpd("Q".into()))?;
    let d = m1 - m0;
    let solved = chol.solve(&d);
    Ok(0.5 * d.dot(&solved))
}

/// `I̲_F = ½ θᵀFᵀQ⁻¹Fθ`: independent of `K` and `R`.
pub fn best_privacy_full_linear(sys: &LinearSystem) -> Result<f64> {
    let ft = sys.change_vector();
    gaussian_kl_equal_cov(&ft, &DVector::zeros(ft.len()), &sys.q)
}

/// `I̲_L` and the cancelling control difference `Δg`, the minimizer of
/// `½ (Fθ + BΔg)ᵀ Q⁻¹ (Fθ + BΔg)`.
pub fn best_privacy_limited_linear(sys: &LinearSystem) -> Result<(f64, DVector<f64>)> {
    let q_inv = sys.q_inv()?;
    let ft = sys.change_vector();
    let delta = -(b_tilde(&sys.b, &q_inv, None)? * &ft);
    let h = &ft + &sys.b * &delta;
    Ok((0.5 * h.dot(&(&q_inv * &h)), delta))
}

/// `B̃_T(M) = (Bᵀ(M+T)B)⁻¹BᵀM`.
pub fn b_tilde(b: &DMatrix<f64>, m: &DMatrix<f64>, t: Option<&DMatrix<f64>>) -> Result<DMatrix<f64>> {
    let mt = match t {
        Some(t) => m + t,
        None => m.clone(),
    };
    let gram = b.transpose() * mt * b;
    warn_if_ill_conditioned("B^T (M+T) B", &gram);
    gram.lu()
        .solve(&(b.transpose() * m))
        .ok_or(Error::SingularProjection)
}

fn check_rho_lambda(rho: f64, lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!("rho {rho} outside [0,1]")));
    }
    if !(lambda > 0.0) {
        return Err(Error::LambdaNonpositive(lambda));
    }
    Ok(())
}

/// Utility part shared by both value functions:
/// `−(1−ρ)α₀ᵀBᵀEBα₀ − Tr Σ − ρ(Bα₁+Fθ)ᵀE(Bα₁+Fθ)`.
fn utility(
    sys: &LinearSystem,
    rho: f64,
    alpha0: &DVector<f64>,
    alpha1: &DVector<f64>,
    sigma: &DMatrix<f64>,
) -> Result<f64> {
    let e = sys.e_matrix()?;
    let pre = &sys.b * alpha0;
    let post = &sys.b * alpha1 + sys.change_vector();
    Ok(-(1.0 - rho) * pre.dot(&(&e * &pre)) - sigma.trace() - rho * post.dot(&(&e * &post)))
}

/// `I_F = (c_θ + ΔαᵀR⁻¹Δα)/2` for Gaussian randomized policies.
pub fn full_info_rate_linear(sys: &LinearSystem, alpha0: &DVector<f64>, alpha1: &DVector<f64>) -> Result<f64> {
    let c_theta = 2.0 * best_privacy_full_linear(sys)?;
    let d = alpha1 - alpha0;
    let r_chol = sys.r.clone().cholesky().ok_or_else(|| Error::NotSpd("R".into()))?;
    Ok(0.5 * (c_theta + d.dot(&r_chol.solve(&d))))
}

/// `I_L = ½ (Fθ + B(α₁−α₀))ᵀ Q⁻¹ (Fθ + B(α₁−α₀))` for deterministic offsets.
pub fn limited_info_rate_linear(sys: &LinearSystem, alpha0: &DVector<f64>, alpha1: &DVector<f64>) -> Result<f64> {
    let h = sys.change_vector() + &sys.b * (alpha1 - alpha0);
    gaussian_kl_equal_cov(&h, &DVector::zeros(h.len()), &sys.q)
}

/// `V_F(ρ,λ,α₀,α₁)` with `Σ` solving the Lyapunov equation with `Q + BRBᵀ`.
pub fn value_full_linear(
    sys: &LinearSystem,
    rho: f64,
    lambda: f64,
    alpha0: &DVector<f64>,
    alpha1: &DVector<f64>,
) -> Result<f64> {
    let sigma = sys.stationary_covariance(true)?;
    Ok(utility(sys, rho, alpha0, alpha1, &sigma)? - lambda * full_info_rate_linear(sys, alpha0, alpha1)?)
}

/// `V_L(ρ,λ,α₀,α₁)` with `Σ` solving the Lyapunov equation with `Q`.
pub fn value_limited_linear(
    sys: &LinearSystem,
    rho: f64,
    lambda: f64,
    alpha0: &DVector<f64>,
    alpha1: &DVector<f64>,
) -> Result<f64> {
    let sigma = sys.stationary_covariance(false)?;
    Ok(utility(sys, rho, alpha0, alpha1, &sigma)? - lambda * limited_info_rate_linear(sys, alpha0, alpha1)?)
}

/// Optimal offsets and the value/rate they achieve.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearTradeoffSolution {
    pub alpha0: DVector<f64>,
    pub alpha1: DVector<f64>,
    pub value: f64,
    pub rate: f64,
    pub sigma: DMatrix<f64>,
}

/// Maximizer of `V_F(ρ,λ,·,·)`:
/// `α₀* = −ρ(BᵀTB)⁻¹BᵀEFθ`, `α₁* = (2(1−ρ)/λ·RBᵀEB + I)α₀*`,
/// `T = (I + 2(1−ρ)ρ/λ·EBRBᵀ)E`.
pub fn tradeoff_full_linear(sys: &LinearSystem, rho: f64, lambda: f64) -> Result<LinearTradeoffSolution> {
    check_rho_lambda(rho, lambda)?;
    let (n, m) = (sys.n(), sys.m());
    let e = sys.e_matrix()?;
    let b = &sys.b;
    let ft = sys.change_vector();
    let t = (DMatrix::identity(n, n) + &e * b * &sys.r * b.transpose() * (2.0 * (1.0 - rho) * rho / lambda)) * &e;
    let btb = b.transpose() * &t * b;
    let rhs = b.transpose() * &e * &ft;
    let alpha0 = -(btb.lu().solve(&rhs).ok_or(Error::SingularProjection)? * rho);
    let alpha1 = (&sys.r * b.transpose() * &e * b * (2.0 * (1.0 - rho) / lambda) + DMatrix::identity(m, m)) * &alpha0;
    Ok(LinearTradeoffSolution {
        value: value_full_linear(sys, rho, lambda, &alpha0, &alpha1)?,
        rate: full_info_rate_linear(sys, &alpha0, &alpha1)?,
        sigma: sys.stationary_covariance(true)?,
        alpha0,
        alpha1,
    })
}

/// Maximizer of `V_F(1,λ,α₁,0)` over `α₁` alone:
/// `α₁* = −(RBᵀEB + λ/2·I)⁻¹RBᵀEFθ`.
pub fn post_change_offset_full_linear(sys: &LinearSystem, lambda: f64) -> Result<DVector<f64>> {
    check_rho_lambda(1.0, lambda)?;
    let e = sys.e_matrix()?;
    let b = &sys.b;
    let lhs = &sys.r * b.transpose() * &e * b + DMatrix::identity(sys.m(), sys.m()) * (lambda / 2.0);
    let rhs = &sys.r * b.transpose() * &e * sys.change_vector();
    Ok(-lhs.lu().solve(&rhs).ok_or(Error::SingularProjection)?)
}

/// Maximizer of `V_L(ρ,λ,·,·)`:
/// `α₁* = −B̃₀((1−ρ)EB·B̃_{2(1−ρ)E/λ}(Q⁻¹) + ρE)Fθ`,
/// `α₀* = B̃_{2(1−ρ)E/λ}(Q⁻¹)(Fθ + Bα₁*)`.
pub fn tradeoff_limited_linear(sys: &LinearSystem, rho: f64, lambda: f64) -> Result<LinearTradeoffSolution> {
    check_rho_lambda(rho, lambda)?;
    let e = sys.e_matrix()?;
    let q_inv = sys.q_inv()?;
    let b = &sys.b;
    let ft = sys.change_vector();
    let shift = &e * (2.0 * (1.0 - rho) / lambda);
    let bt_q = b_tilde(b, &q_inv, Some(&shift))?;
    let mix = &e * b * &bt_q * (1.0 - rho) + &e * rho;
    let alpha1 = -(b_tilde(b, &mix, None)? * &ft);
    let alpha0 = bt_q * (&ft + b * &alpha1);
    Ok(LinearTradeoffSolution {
        value: value_limited_linear(sys, rho, lambda, &alpha0, &alpha1)?,
        rate: limited_info_rate_linear(sys, &alpha0, &alpha1)?,
        sigma: sys.stationary_covariance(false)?,
        alpha0,
        alpha1,
    })
}

/// Maximizer of `V_L(1,λ,α₁,0)` over `α₁` alone: `α₁* = −B̃₀(2E/λ + Q⁻¹)Fθ`.
pub fn post_change_offset_limited_linear(sys: &LinearSystem, lambda: f64) -> Result<DVector<f64>> {
    check_rho_lambda(1.0, lambda)?;
    let m = sys.e_matrix()? * (2.0 / lambda) + sys.q_inv()?;
    Ok(-(b_tilde(&sys.b, &m, None)? * sys.change_vector()))
}

/// Mean and 95% half-width of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentStats {
    pub mean: f64,
    pub ci_halfwidth: f64,
    pub samples: usize,
}

/// One simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearTrajectory {
    pub states: Vec<DVector<f64>>,
    /// `‖x_t‖²` for `t = 1..=horizon`.
    pub xsq: Vec<f64>,
    /// Batch-means statistics of `‖x_t‖²` over `t < ν`.
    pub pre_change: Option<SegmentStats>,
    /// Batch-means statistics over `t ≥ ν`.
    pub post_change: Option<SegmentStats>,
    pub seed: u64,
}

/// Per-step ensemble statistic (one CSV row).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepStat {
    pub step: usize,
    pub mean_xsq: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

const Z95: f64 = 1.959_963_984_540_054;

fn batch_means(xs: &[f64]) -> Option<SegmentStats> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let size = (n as f64).sqrt().floor().max(1.0) as usize;
    let batches = n / size;
    let ci_halfwidth = if batches < 2 {
        f64::NAN
    } else {
        let means: Vec<f64> = (0..batches)
            .map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
            .collect();
        let bm = means.iter().sum::<f64>() / batches as f64;
        let var = means.iter().map(|v| (v - bm).powi(2)).sum::<f64>() / (batches - 1) as f64;
        Z95 * (var / batches as f64).sqrt()
    };
    Some(SegmentStats { mean, ci_halfwidth, samples: n })
}

fn gaussian_vector(rng: &mut SimRng, chol_l: &DMatrix<f64>) -> DVector<f64> {
    let z = DVector::from_fn(chol_l.nrows(), |_, _| rng.sample::<f64, _>(StandardNormal));
    chol_l * z
}

/// Simulate one run with offsets `α₀` (before `ν`) and `α₁` (from `ν` on).
///
/// `x₁` is drawn from the exact pre-change stationary law `N(L⁻¹Bα₀, Σ)`.
pub fn simulate_linear(
    sys: &LinearSystem,
    alpha0: &DVector<f64>,
    alpha1: &DVector<f64>,
    horizon: usize,
    seed: u64,
    stochastic_policy: bool,
) -> Result<LinearTrajectory> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    if alpha0.len() != sys.m() || alpha1.len() != sys.m() {
        return Err(Error::ShapeMismatch("offset length differs from input dimension".into()));
    }
    let a_cl = sys.closed_loop();
    let sigma = sys.stationary_covariance(stochastic_policy)?;
    let (mean0, _) = sys.stationary_means(alpha0, alpha1)?;
    let sigma_l = sigma.cholesky().ok_or_else(|| Error::NotSpd("stationary covariance".into()))?.l();
    let q_l = sys.q.clone().cholesky().ok_or_else(|| Error::NotSpd("Q".into()))?.l();
    let r_l = sys.r.clone().cholesky().ok_or_else(|| Error::NotSpd("R".into()))?.l();
    let ft = sys.change_vector();

    let mut rng = seeded(seed);
    let mut x = mean0 + gaussian_vector(&mut rng, &sigma_l);
    let mut states = Vec::with_capacity(horizon);
    let mut xsq = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        xsq.push(x.norm_squared());
        states.push(x.clone());
        if t == horizon {
            break;
        }
        let changed = t >= sys.nu;
        let alpha = if changed { alpha1 } else { alpha0 };
        let mut drive = &sys.b * alpha;
        if stochastic_policy {
            drive += &sys.b * gaussian_vector(&mut rng, &r_l);
        }
        if changed {
            drive += &ft;
        }
        x = &a_cl * &x + drive + gaussian_vector(&mut rng, &q_l);
    }
    let split = sys.nu.saturating_sub(1).min(horizon);
    Ok(LinearTrajectory {
        pre_change: batch_means(&xsq[..split]),
        post_change: batch_means(&xsq[split..]),
        states,
        xsq,
        seed,
    })
}

/// `runs` independent trajectories; per-step mean of `‖x_t‖²` with a 95%
/// normal confidence interval across runs.
pub fn simulate_linear_ensemble(
    sys: &LinearSystem,
    alpha0: &DVector<f64>,
    alpha1: &DVector<f64>,
    horizon: usize,
    runs: usize,
    seed: u64,
    stochastic_policy: bool,
) -> Result<Vec<StepStat>> {
    use rayon::prelude::*;
    if runs == 0 {
        return Err(Error::InvalidArgument("runs must be >= 1".into()));
    }
    let paths: Vec<Vec<f64>> = (0..runs as u64)
        .into_par_iter()
        .map(|i| simulate_linear(sys, alpha0, alpha1, horizon, derive_seed(seed, i), stochastic_policy).map(|t| t.xsq))
        .collect::<Result<_>>()?;
    Ok((0..horizon)
        .map(|t| {
            let mean = paths.iter().map(|p| p[t]).sum::<f64>() / runs as f64;
            let half = if runs > 1 {
                let var = paths.iter().map(|p| (p[t] - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
                Z95 * (var / runs as f64).sqrt()
            } else {
                f64::NAN
            };
            StepStat { step: t + 1, mean_xsq: mean, ci_low: mean - half, ci_high: mean + half }
        })
        .collect())
}

/// Exact `E‖x_t‖²` along the simulated path: the mean propagates as
/// `m_{t+1} = (A+BK)m_t + Bα + Fθ·1{t≥ν}` while the covariance stays at `Σ`.
pub fn expected_xsq_path(
    sys: &LinearSystem,
    alpha0: &DVector<f64>,
    alpha1: &DVector<f64>,
    horizon: usize,
    stochastic_policy: bool,
) -> Result<Vec<f64>> {
    let a_cl = sys.closed_loop();
    let trace = sys.stationary_covariance(stochastic_policy)?.trace();
    let (mut mean, _) = sys.stationary_means(alpha0, alpha1)?;
    let ft = sys.change_vector();
    let mut out = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        out.push(mean.norm_squared() + trace);
        let changed = t >= sys.nu;
        let drive = if changed { &sys.b * alpha1 + &ft } else { &sys.b * alpha0 };
        mean = &a_cl * mean + drive;
    }
    Ok(out)
}

/// On-disk linear scenario (JSON); matrices are lists of rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct LinearScenarioFile {
    pub A: Vec<Vec<f64>>,
    pub B: Vec<Vec<f64>>,
    pub F: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    pub Q: Vec<Vec<f64>>,
    pub K: Vec<Vec<f64>>,
    /// Defaults to the identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub R: Option<Vec<Vec<f64>>>,
    pub nu: usize,
}

impl LinearSystem {
    pub fn from_json(text: &str) -> Result<Self> {
        let f: LinearScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(&f)
    }

    pub fn from_file(f: &LinearScenarioFile) -> Result<Self> {
        let m = f.B.first().map_or(0, |r| r.len());
        let r = match &f.R {
            Some(rows) => matrix_from_rows(rows)?,
            None => DMatrix::identity(m, m),
        };
        Self::new(
            matrix_from_rows(&f.A)?,
            matrix_from_rows(&f.B)?,
            matrix_from_rows(&f.F)?,
            DVector::from_vec(f.theta.clone()),
            matrix_from_rows(&f.Q)?,
            matrix_from_rows(&f.K)?,
            r,
            f.nu,
        )
    }
}
