use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{check_len, Error, Result};

type FieldFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
type ControlFn = dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync;

/// An autonomous vector field `x' = X(x)` on `R^n`.
///
/// The right-hand side writes into a caller-provided buffer of length `n`;
/// it must be deterministic.
#[derive(Clone)]
pub struct VectorField {
    name: String,
    dim: usize,
    params: BTreeMap<String, f64>,
    rhs: Arc<FieldFn>,
}

impl VectorField {
    pub fn new<F>(name: impl Into<String>, dim: usize, rhs: F) -> Result<Self>
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::input("vector field dimension must be positive"));
        }
        Ok(Self {
            name: name.into(),
            dim,
            params: BTreeMap::new(),
            rhs: Arc::new(rhs),
        })
    }

    /// Attaches the named parameters the right-hand side was built from.
    pub fn with_params(mut self, params: BTreeMap<String, f64>) -> Self {
        self.params = params;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    /// Evaluates the field, checking the input dimension.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(&format!("state of `{}`", self.name), self.dim, x.len())?;
        let mut out = vec![0.0; self.dim];
        (self.rhs)(x, &mut out);
        Ok(out)
    }

    /// Unchecked evaluation into `out`. Both slices must have length `dim`.
    #[inline]
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        (self.rhs)(x, out);
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

/// A control system `x' = F(x, u)` with state in `R^n` and input in `R^m`.
#[derive(Clone)]
pub struct ControlSystem {
    name: String,
    dim: usize,
    input_dim: usize,
    rhs: Arc<ControlFn>,
}

impl ControlSystem {
    pub fn new<F>(name: impl Into<String>, dim: usize, input_dim: usize, rhs: F) -> Result<Self>
    where
        F: Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::input("control system state dimension must be positive"));
        }
        Ok(Self {
            name: name.into(),
            dim,
            input_dim,
            rhs: Arc::new(rhs),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn eval(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        check_len(&format!("state of `{}`", self.name), self.dim, x.len())?;
        check_len(&format!("input of `{}`", self.name), self.input_dim, u.len())?;
        let mut out = vec![0.0; self.dim];
        (self.rhs)(x, u, &mut out);
        Ok(out)
    }

    #[inline]
    pub fn eval_into(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(u.len(), self.input_dim);
        (self.rhs)(x, u, out);
    }
}

impl fmt::Debug for ControlSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlSystem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("input_dim", &self.input_dim)
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_checks_dimension() {
        let f = VectorField::new("decay", 2, |x, out| {
            out[0] = -x[0];
            out[1] = -x[1];
        })
        .unwrap();
        assert_eq!(f.eval(&[1.0, 2.0]).unwrap(), vec![-1.0, -2.0]);
        assert!(matches!(f.eval(&[1.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn control_eval_checks_input_dimension() {
        let c = ControlSystem::new("int", 1, 1, |_x, u, out| out[0] = u[0]).unwrap();
        assert_eq!(c.eval(&[0.0], &[3.0]).unwrap(), vec![3.0]);
        assert!(c.eval(&[0.0], &[]).is_err());
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(VectorField::new("empty", 0, |_, _| {}).is_err());
    }
}
