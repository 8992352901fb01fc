//! Central finite differences with step `h_j = 1e-6·(1 + |x_j|)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const RELATIVE_STEP: f64 = 1e-6;

#[inline]
pub fn step_for(xj: f64) -> f64 {
    RELATIVE_STEP * (1.0 + xj.abs())
}

/// Jacobian of `f: R^n → R^m` at `x` as an `m × n` matrix.
pub fn jacobian<F>(f: F, x: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x.len();
    let mut probe = x.to_vec();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let h = step_for(x[j]);
        probe[j] = x[j] + h;
        let plus = f(&probe);
        probe[j] = x[j] - h;
        let minus = f(&probe);
        probe[j] = x[j];
        cols.push(
            plus.iter()
                .zip(&minus)
                .map(|(p, m)| (p - m) / (2.0 * h))
                .collect::<Vec<f64>>(),
        );
    }
    let m = cols.first().map_or(0, Vec::len);
    let jac = DMatrix::from_fn(m, n, |i, j| cols[j][i]);
    if jac.iter().any(|v| !v.is_finite()) {
        return Err(Error::input(format!("non-finite finite-difference Jacobian at {x:?}")));
    }
    Ok(jac)
}

/// Partial derivatives of components `rows` of `f` with respect to the
/// coordinates in `cols`, as a `rows.len() × cols.len()` matrix.
pub fn partials<F>(f: F, x: &[f64], rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut probe = x.to_vec();
    let mut out = DMatrix::zeros(rows.len(), cols.len());
    for (cj, j) in cols.enumerate() {
        let h = step_for(x[j]);
        probe[j] = x[j] + h;
        let plus = f(&probe);
        probe[j] = x[j] - h;
        let minus = f(&probe);
        probe[j] = x[j];
        for (ri, i) in rows.clone().enumerate() {
            out[(ri, cj)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    out
}

/// Gradient of a scalar function.
pub fn gradient<F>(f: F, x: &[f64]) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|j| {
            let h = step_for(x[j]);
            probe[j] = x[j] + h;
            let plus = f(&probe);
            probe[j] = x[j] - h;
            let minus = f(&probe);
            probe[j] = x[j];
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

/// Spectral norm (largest singular value).
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 || m.ncols() == 1 {
        return m.norm();
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}
