//! Seeded quasi-random sampling of boxes.
//!
//! Points come from a Sobol sequence (Joe–Kuo direction numbers) with a
//! random digital shift: every coordinate's 64-bit integer value is XORed
//! with a per-dimension mask drawn from a ChaCha stream seeded by `seed`.
//! The shift keeps the net structure of the sequence, makes different seeds
//! give different point sets, and leaves prefixes nested: the first `n`
//! points for a seed are always the same.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sobol::params::JoeKuoD6;
use sobol::Sobol;

use crate::error::{Error, Result};
use crate::model::BoxRegion;

pub const DEFAULT_SEED: u64 = 42;

/// Maximum dimension supported by the bundled direction numbers.
pub const MAX_DIM: usize = 100;

pub struct SobolSampler {
    seq: Sobol<u64>,
    shift: Vec<u64>,
}

impl SobolSampler {
    pub fn new(dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::input(format!(
                "sampling dimension must be in 1..={MAX_DIM}, got {dim}"
            )));
        }
        let params = JoeKuoD6::minimal();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self {
            seq: Sobol::new(dim, &params),
            shift: (0..dim).map(|_| rng.next_u64()).collect(),
        })
    }
}

impl Iterator for SobolSampler {
    /// A point of the half-open unit cube.
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        let raw = self.seq.next()?;
        Some(
            raw.iter()
                .zip(&self.shift)
                .map(|(v, s)| ((v ^ s) >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
                .collect(),
        )
    }
}

/// The first `n` shifted-Sobol points mapped into `region`.
pub fn sample_box(region: &BoxRegion, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    Ok(SobolSampler::new(region.dim(), seed)?
        .take(n)
        .map(|u| region.map_unit(&u))
        .collect())
}
