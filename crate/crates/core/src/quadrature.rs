//! Gauss–Legendre rules and exact-degree polynomial fits.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const GL3_X: f64 = 0.774_596_669_241_483_4; // √(3/5)
const GL3_W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Three-point Gauss–Legendre on `[a, b]`; exact for polynomials of degree ≤ 5.
pub fn gauss_legendre3<F>(a: f64, b: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    let xs = [m - r * GL3_X, m, m + r * GL3_X];
    let mut s = 0.0;
    for (x, w) in xs.iter().zip(GL3_W) {
        s += w * f(*x)?;
    }
    Ok(s * r)
}

/// Sum of three-point rules over consecutive breakpoints. Breakpoints are
/// sorted and merged when closer than `merge_tol`.
pub fn piecewise_gauss<F>(breaks: &[f64], merge_tol: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let b = merged_breaks(breaks, merge_tol);
    let mut s = 0.0;
    for w in b.windows(2) {
        s += gauss_legendre3(w[0], w[1], &mut f)?;
    }
    Ok(s)
}

pub fn merged_breaks(breaks: &[f64], merge_tol: f64) -> Vec<f64> {
    let mut b: Vec<f64> = breaks.iter().copied().filter(|x| x.is_finite()).collect();
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.dedup_by(|x, y| (*x - *y).abs() <= merge_tol);
    b
}

/// Coefficients `c_0..c_d` of the interpolating polynomial through
/// `(xs[i], ys[i])`, `xs.len() = d + 1`.
pub fn interpolate(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let v = DMatrix::from_fn(n, n, |i, j| xs[i].powi(j as i32));
    let y = DVector::from_column_slice(ys);
    let c = v.lu().solve(&y).expect("distinct nodes give an invertible Vandermonde matrix");
    c.iter().copied().collect()
}

pub fn eval_poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, ci| acc * x + ci)
}

/// Relative residual above which a fit is rejected.
pub const FIT_TOL: f64 = 1e-7;

/// Fits `ε ↦ g(ε)` by a polynomial of degree `degree` through the nodes
/// `0, h, …, degree·h` and validates it at `(degree + 1)·h`.
pub fn fit_polynomial<F>(mut g: F, degree: usize, h: f64, context: &str) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let xs: Vec<f64> = (0..=degree + 1).map(|i| i as f64 * h).collect();
    let ys = xs.iter().map(|&x| g(x)).collect::<Result<Vec<f64>>>()?;
    let c = interpolate(&xs[..=degree], &ys[..=degree]);
    let scale = ys.iter().fold(1.0_f64, |m, y| m.max(y.abs()));
    let residual = (eval_poly(&c, xs[degree + 1]) - ys[degree + 1]).abs() / scale;
    if residual > FIT_TOL {
        return Err(Error::FitResidual {
            residual,
            threshold: FIT_TOL,
            context: context.to_string(),
        });
    }
    Ok(c)
}
