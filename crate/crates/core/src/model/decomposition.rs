use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Which factor of `R^n = R^m x R^k` to project onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    /// The leading `m` coordinates.
    Retained,
    /// The trailing `k` coordinates.
    Fiber,
}

/// The split `R^n = R^m x R^k`. Retained coordinates always come first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    n: usize,
    m: usize,
}

impl Decomposition {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if m == 0 || m >= n {
            return Err(Error::input(format!(
                "decomposition needs 1 <= m < n, got n = {n}, m = {m}"
            )));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.n - self.m
    }

    pub fn project(&self, x: &[f64], part: Part) -> Result<Vec<f64>> {
        check_len("projected state", self.n, x.len())?;
        Ok(match part {
            Part::Retained => x[..self.m].to_vec(),
            Part::Fiber => x[self.m..].to_vec(),
        })
    }

    /// The retained block of `x` without copying. `x` must have length `n`.
    pub fn retained<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[..self.m]
    }

    pub fn fiber<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[self.m..]
    }

    /// Rebuilds a full state from its retained and fiber parts.
    pub fn join(&self, y: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        check_len("retained block", self.m, y.len())?;
        check_len("fiber block", self.k(), z.len())?;
        let mut x = Vec::with_capacity(self.n);
        x.extend_from_slice(y);
        x.extend_from_slice(z);
        Ok(x)
    }
}
