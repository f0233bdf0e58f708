//! Non-convexity probes for the conditional relative entropy
//! `q(α,β) = Σ_{x,a} α_{x,a} ln[(α_{x,a}/‖α_{x,*}‖₁)/(β_{x,a}/‖β_{x,*}‖₁)]`
//! and its split `q = f − g` into jointly convex parts.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Mass tolerance on probe matrices; inputs rounded to four decimals pass.
pub const DC_MASS_TOL: f64 = 1e-3;

fn check_pair(alpha: &DMatrix<f64>, beta: &DMatrix<f64>) -> Result<()> {
    if alpha.shape() != beta.shape() || alpha.is_empty() {
        return Err(Error::ShapeMismatch("alpha and beta must share a nonempty shape".into()));
    }
    for (name, m) in [("alpha", alpha), ("beta", beta)] {
        for x in 0..m.nrows() {
            for u in 0..m.ncols() {
                let v = m[(x, u)];
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::NonPositiveEntry { location: format!("{name}[{x},{u}]"), value: v });
                }
            }
        }
        let s = m.sum();
        if (s - 1.0).abs() > DC_MASS_TOL {
            return Err(Error::InvalidArgument(format!("{name} has total mass {s}")));
        }
    }
    Ok(())
}

fn q_direct(alpha: &DMatrix<f64>, beta: &DMatrix<f64>) -> f64 {
    let mut q = 0.0;
    for x in 0..alpha.nrows() {
        let (ra, rb) = (alpha.row(x).sum(), beta.row(x).sum());
        for u in 0..alpha.ncols() {
            let a = alpha[(x, u)];
            q += a * ((a / ra) / (beta[(x, u)] / rb)).ln();
        }
    }
    q
}

/// Returns `(q, f, g)` with `f = Σ α ln(α/β)` and
/// `g = Σ_x ‖α_{x,*}‖₁ ln(‖α_{x,*}‖₁/‖β_{x,*}‖₁)`.
pub fn q_dc_decomposition(alpha: &DMatrix<f64>, beta: &DMatrix<f64>) -> Result<(f64, f64, f64)> {
    check_pair(alpha, beta)?;
    let f = alpha.zip_map(beta, |a, b| a * (a / b).ln()).sum();
    let g = (0..alpha.nrows())
        .map(|x| {
            let (ra, rb) = (alpha.row(x).sum(), beta.row(x).sum());
            ra * (ra / rb).ln()
        })
        .sum::<f64>();
    Ok((q_direct(alpha, beta), f, g))
}

/// Convexity gap `D_q = λq(x) + (1−λ)q(y) − q(λx + (1−λ)y)` for `x = (α,β)`, `y = (α',β')`.
/// Nonnegative everywhere iff `q` is convex along the segment.
pub fn dc_gap(
    x_pair: (&DMatrix<f64>, &DMatrix<f64>),
    y_pair: (&DMatrix<f64>, &DMatrix<f64>),
    lam: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&lam) {
        return Err(Error::InvalidArgument(format!("lambda {lam} outside [0,1]")));
    }
    check_pair(x_pair.0, x_pair.1)?;
    check_pair(y_pair.0, y_pair.1)?;
    if x_pair.0.shape() != y_pair.0.shape() {
        return Err(Error::ShapeMismatch("pairs differ in shape".into()));
    }
    let mix = |a: &DMatrix<f64>, b: &DMatrix<f64>| a * lam + b * (1.0 - lam);
    let qx = q_direct(x_pair.0, x_pair.1);
    let qy = q_direct(y_pair.0, y_pair.1);
    let qm = q_direct(&mix(x_pair.0, y_pair.0), &mix(x_pair.1, y_pair.1));
    Ok(lam * qx + (1.0 - lam) * qy - qm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: [f64; 4]) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &v)
    }

    #[test]
    fn equal_pair_is_zero() {
        let a = m([0.1, 0.2, 0.3, 0.4]);
        let (q, f, g) = q_dc_decomposition(&a, &a).unwrap();
        assert_eq!((q, f, g), (0.0, 0.0, 0.0));
    }

    #[test]
    fn split_matches() {
        let a = m([0.5704, 0.0206, 0.1980, 0.2110]);
        let b = m([0.1312, 0.1403, 0.3757, 0.3529]);
        let (q, f, g) = q_dc_decomposition(&a, &b).unwrap();
        assert!((f - g - q).abs() < 1e-12);
    }

    #[test]
    fn endpoints_have_no_gap() {
        let a = m([0.1, 0.2, 0.3, 0.4]);
        let b = m([0.4, 0.3, 0.2, 0.1]);
        let c = m([0.25, 0.25, 0.25, 0.25]);
        assert!(dc_gap((&a, &b), (&c, &a), 0.0).unwrap().abs() < 1e-15);
        assert!(dc_gap((&a, &b), (&c, &a), 1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive() {
        let a = m([0.0, 0.5, 0.25, 0.25]);
        let b = m([0.25; 4]);
        assert!(matches!(q_dc_decomposition(&a, &b), Err(Error::NonPositiveEntry { .. })));
    }
}
