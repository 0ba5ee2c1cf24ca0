//! Counter-based random streams.
//!
//! A stream is identified by `(master seed, domain, index)`. Replication `r`
//! of an experiment always draws from the same stream, no matter which
//! thread runs it.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Stream domains; keep them distinct so that, e.g., the design matrix and
/// the first replication never share draws.
pub mod domain {
    pub const DESIGN: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const EDF: u64 = 3;
    pub const BOOTSTRAP: u64 = 4;
    pub const FOLDS: u64 = 5;
    pub const ORACLE: u64 = 6;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn stream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(domain)));
    rng.set_stream(index);
    rng
}

pub fn normal_vector<R: rand::Rng>(rng: &mut R, len: usize, sd: f64) -> DVector<f64> {
    DVector::from_fn(len, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        sd * z
    })
}
