use crate::error::{Error, Result};

/// A sampled solution curve `t ↦ x(t, x0)`.
///
/// `times` starts at 0 and is strictly increasing; `states[i]` is the state
/// at `times[i]`. When the producing integrator knows the vector field,
/// `derivatives[i]` holds the field value at `states[i]` and enables cubic
/// Hermite resampling.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    derivatives: Option<Vec<Vec<f64>>>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(times, states, None)
    }

    pub fn with_derivatives(times: Vec<f64>, states: Vec<Vec<f64>>, derivatives: Vec<Vec<f64>>) -> Result<Self> {
        if derivatives.len() != states.len() {
            return Err(Error::input("one derivative per state is required"));
        }
        Self::build(times, states, Some(derivatives))
    }

    fn build(times: Vec<f64>, states: Vec<Vec<f64>>, derivatives: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if times.len() < 2 || times.len() != states.len() {
            return Err(Error::input(format!(
                "trajectory needs >= 2 matching times and states, got {} and {}",
                times.len(),
                states.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(Error::input("trajectory must start at t = 0"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::input("trajectory times must be strictly increasing"));
        }
        let dim = states[0].len();
        let ragged = states.iter().any(|s| s.len() != dim)
            || derivatives.as_ref().is_some_and(|d| d.iter().any(|s| s.len() != dim));
        if ragged {
            return Err(Error::input("trajectory states have inconsistent dimension"));
        }
        Ok(Self {
            times,
            states,
            derivatives,
        })
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn derivatives(&self) -> Option<&[Vec<f64>]> {
        self.derivatives.as_deref()
    }

    pub fn initial(&self) -> &[f64] {
        &self.states[0]
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().expect("nonempty by construction")
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("nonempty by construction")
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.times.iter().copied().zip(self.states.iter().map(Vec::as_slice))
    }
}
