//! Log-barrier Newton method for
//! `min cᵀz + Σ_k w_k a_k(z) ln(a_k(z)/b_k(z))  s.t.  Az = b, z ≥ 0`
//! where `a_k`, `b_k` are affine with nonnegative coefficients.
//!
//! Iterates move in the null space of `A` from a strictly feasible start, so
//! equality feasibility holds to rounding at every step.

use nalgebra::{DMatrix, DVector};

/// `Σ coeffs[i].1 · z[coeffs[i].0] + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineForm {
    pub coeffs: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineForm {
    pub fn constant(c: f64) -> Self {
        Self { coeffs: Vec::new(), constant: c }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(i, c)| c * z[i]).sum::<f64>() + self.constant
    }

    /// True if the form vanishes identically.
    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.coeffs.iter().all(|&(_, c)| c == 0.0)
    }
}

/// `weight · a ln(a/b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelEntropyTerm {
    pub weight: f64,
    pub num: AffineForm,
    pub den: AffineForm,
}

impl RelEntropyTerm {
    pub fn value(&self, z: &[f64], floor: f64) -> f64 {
        let a = self.num.eval(z);
        if a <= 0.0 {
            return 0.0;
        }
        let b = self.den.eval(z);
        self.weight * a * (a.max(floor) / b.max(floor)).ln()
    }

    /// Adds the gradient into `g`.
    pub fn add_gradient(&self, z: &[f64], floor: f64, g: &mut [f64]) {
        let a = self.num.eval(z).max(floor);
        let b = self.den.eval(z).max(floor);
        let ga = self.weight * ((a / b).ln() + 1.0);
        let gb = -self.weight * a / b;
        for &(i, c) in &self.num.coeffs {
            g[i] += ga * c;
        }
        for &(i, c) in &self.den.coeffs {
            g[i] += gb * c;
        }
    }

    /// Adds the Hessian `w·a·uuᵀ`, `u = ∇a/a − ∇b/b`, into `h`.
    fn add_hessian(&self, z: &[f64], floor: f64, scale: f64, h: &mut DMatrix<f64>) {
        let a = self.num.eval(z).max(floor);
        let b = self.den.eval(z).max(floor);
        let mut u: Vec<(usize, f64)> = Vec::with_capacity(self.num.coeffs.len() + self.den.coeffs.len());
        u.extend(self.num.coeffs.iter().map(|&(i, c)| (i, c / a)));
        u.extend(self.den.coeffs.iter().map(|&(i, c)| (i, -c / b)));
        let s = scale * self.weight * a;
        for &(i, ci) in &u {
            for &(j, cj) in &u {
                h[(i, j)] += s * ci * cj;
            }
        }
    }
}

/// Convex program in the form above.
#[derive(Debug, Clone)]
pub struct ConvexProgram {
    pub linear: Vec<f64>,
    pub terms: Vec<RelEntropyTerm>,
    pub a_eq: DMatrix<f64>,
    pub b_eq: DVector<f64>,
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierOutcome {
    pub z: Vec<f64>,
    pub newton_steps: usize,
    pub converged: bool,
}

impl ConvexProgram {
    pub fn n(&self) -> usize {
        self.linear.len()
    }

    pub fn objective(&self, z: &[f64]) -> f64 {
        let lin: f64 = self.linear.iter().zip(z).map(|(c, v)| c * v).sum();
        lin + self.terms.iter().map(|t| t.value(z, self.floor)).sum::<f64>()
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let mut g = self.linear.clone();
        for t in &self.terms {
            t.add_gradient(z, self.floor, &mut g);
        }
        g
    }

    /// Max-norm of `Az − b`.
    pub fn equality_residual(&self, z: &[f64]) -> f64 {
        (&self.a_eq * DVector::from_column_slice(z) - &self.b_eq).amax()
    }

    /// Orthonormal basis of `ker A`.
    fn null_space(&self) -> DMatrix<f64> {
        let n = self.n();
        let rows = self.a_eq.nrows().max(n);
        let mut padded = DMatrix::zeros(rows, n);
        padded.rows_mut(0, self.a_eq.nrows()).copy_from(&self.a_eq);
        let svd = padded.svd(false, true);
        let v_t = svd.v_t.expect("requested V");
        let smax = svd.singular_values.max();
        let tol = 1e-10 * smax.max(1.0);
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] <= tol)
            .collect();
        let mut basis = DMatrix::zeros(n, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            basis.set_column(c, &v_t.row(i).transpose());
        }
        basis
    }

    fn barrier_value(&self, z: &[f64], t: f64) -> f64 {
        if z.iter().any(|&v| v <= 0.0) {
            return f64::INFINITY;
        }
        t * self.objective(z) - z.iter().map(|v| v.ln()).sum::<f64>()
    }

    /// Minimize from a strictly feasible `z0`, stopping once the duality-gap
    /// bound `n/t` falls below `tol` or after `max_newton` Newton steps.
    pub fn solve(&self, z0: &[f64], tol: f64, max_newton: usize) -> BarrierOutcome {
        const MU: f64 = 20.0;
        let n = self.n();
        let basis = self.null_space();
        let k = basis.ncols();
        let mut z = z0.to_vec();
        if k == 0 {
            return BarrierOutcome { z, newton_steps: 0, converged: true };
        }
        let mut t = 1.0;
        let mut steps = 0;
        loop {
            // Centering.
            loop {
                if steps >= max_newton {
                    return BarrierOutcome { z, newton_steps: steps, converged: false };
                }
                steps += 1;
                let mut grad = self.gradient(&z);
                for (g, v) in grad.iter_mut().zip(&z) {
                    *g = t * *g - 1.0 / v;
                }
                let mut hess = DMatrix::from_diagonal(&DVector::from_iterator(n, z.iter().map(|v| 1.0 / (v * v))));
                for term in &self.terms {
                    term.add_hessian(&z, self.floor, t, &mut hess);
                }
                let g_red = basis.transpose() * DVector::from_vec(grad);
                let h_red = basis.transpose() * hess * &basis;
                let d = match h_red.clone().cholesky() {
                    Some(ch) => ch.solve(&(-&g_red)),
                    None => match h_red.lu().solve(&(-&g_red)) {
                        Some(d) => d,
                        None => break,
                    },
                };
                // Squared Newton decrement; below this the centering error is
                // already far under the gap bound and rounding dominates.
                let decrement = -g_red.dot(&d);
                if !(decrement > 1e-9) {
                    break;
                }
                let dz = &basis * &d;
                let mut s: f64 = 1.0;
                for (zi, di) in z.iter().zip(dz.iter()) {
                    if *di < 0.0 {
                        s = s.min(-0.99 * zi / di);
                    }
                }
                let f0 = self.barrier_value(&z, t);
                let mut accepted = false;
                for _ in 0..60 {
                    let trial: Vec<f64> = z.iter().zip(dz.iter()).map(|(a, b)| a + s * b).collect();
                    let f1 = self.barrier_value(&trial, t);
                    if f1 <= f0 - 0.25 * s * decrement {
                        z = trial;
                        accepted = f0 - f1 > 1e-15 * f0.abs();
                        break;
                    }
                    s *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
            if (n as f64) / t < tol {
                return BarrierOutcome { z, newton_steps: steps, converged: true };
            }
            t *= MU;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_on_simplex_is_uniform() {
        // min Σ z ln z on the simplex.
        let n = 4;
        let terms = (0..n)
            .map(|i| RelEntropyTerm {
                weight: 1.0,
                num: AffineForm { coeffs: vec![(i, 1.0)], constant: 0.0 },
                den: AffineForm::constant(1.0),
            })
            .collect();
        let p = ConvexProgram {
            linear: vec![0.0; n],
            terms,
            a_eq: DMatrix::from_element(1, n, 1.0),
            b_eq: DVector::from_element(1, 1.0),
            floor: 1e-300,
        };
        let out = p.solve(&[0.1, 0.2, 0.3, 0.4], 1e-10, 1000);
        assert!(out.converged);
        for v in &out.z {
            assert!((v - 0.25).abs() < 1e-6);
        }
        assert!(p.equality_residual(&out.z) < 1e-12);
    }

    #[test]
    fn linear_program_reaches_vertex() {
        let p = ConvexProgram {
            linear: vec![1.0, 2.0, 0.5],
            terms: vec![],
            a_eq: DMatrix::from_element(1, 3, 1.0),
            b_eq: DVector::from_element(1, 1.0),
            floor: 1e-12,
        };
        let out = p.solve(&[1.0 / 3.0; 3], 1e-9, 1000);
        assert!((p.objective(&out.z) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let term = RelEntropyTerm {
            weight: 0.7,
            num: AffineForm { coeffs: vec![(0, 0.3), (1, 0.5)], constant: 0.0 },
            den: AffineForm { coeffs: vec![(1, 0.2), (2, 0.9)], constant: 0.1 },
        };
        let z = [0.2, 0.4, 0.3];
        let mut g = vec![0.0; 3];
        term.add_gradient(&z, 1e-300, &mut g);
        for i in 0..3 {
            let mut zp = z;
            let mut zm = z;
            zp[i] += 1e-6;
            zm[i] -= 1e-6;
            let fd = (term.value(&zp, 1e-300) - term.value(&zm, 1e-300)) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-8);
        }
    }
}
