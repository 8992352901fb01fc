//! Domain types shared by every other module: vector fields, control
//! systems, state-space decompositions, trajectories, boxes and comparison
//! functions.
//!
//! Everything here is immutable after construction and cheap to clone
//! (right-hand sides are reference counted), so values can be shared freely
//! across threads.

mod comparison;
mod decomposition;
mod field;
mod region;
mod trajectory;

pub use comparison::{ComparisonFunction, Gain, KlFunction};
pub use decomposition::{Decomposition, Part};
pub use field::{ControlSystem, VectorField};
pub use region::BoxRegion;
pub use trajectory::Trajectory;

/// Euclidean norm.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Euclidean distance between two equally sized vectors.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
