//! Seeded random streams and the noise abstraction used by every sampler.
//!
//! Standard normals come from the ziggurat method (`rand_distr::StandardNormal`)
//! driven by ChaCha8; both choices are fixed so seeded runs are bit-reproducible.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};

use crate::linalg::DenseMatrix;

/// Source of the randomness a sampler consumes.
///
/// Production code passes an [`RngState`]; tests can substitute [`ZeroNoise`]
/// or [`ScriptedNoise`] to force specific draws.
pub trait NoiseSource {
    /// One `N(0, 1)` variate.
    fn standard_normal(&mut self) -> f64;

    /// One `Uniform(0, 1)` variate, excluding both endpoints.
    fn uniform(&mut self) -> f64;

    fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.standard_normal();
        }
    }
}

/// Mixes a base seed with a stream index (SplitMix64 finalizer), giving
/// independent-looking seeds for parallel trials and per-item streams.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A seeded ChaCha8 stream; identical seeds give identical streams.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream `index` derived from `base` (see [`derive_seed`]).
    pub fn derived(base: u64, index: u64) -> Self {
        Self::new(derive_seed(base, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The underlying generator, for draws outside the [`NoiseSource`]
    /// vocabulary (Poisson counts, shuffles).
    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

impl NoiseSource for RngState {
    #[inline]
    fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    #[inline]
    fn uniform(&mut self) -> f64 {
        self.rng.sample(Open01)
    }
}

/// Deterministic noise: every normal is 0 and every uniform is 0.5, so a
/// sampler returns its mean (or the median of a truncated draw).
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNoise;

impl NoiseSource for ZeroNoise {
    fn standard_normal(&mut self) -> f64 {
        0.0
    }

    fn uniform(&mut self) -> f64 {
        0.5
    }
}

/// Replays fixed normals (cycling), with uniforms fixed at 0.5.
#[derive(Debug, Clone)]
pub struct ScriptedNoise {
    normals: Vec<f64>,
    next: usize,
}

impl ScriptedNoise {
    pub fn new(normals: Vec<f64>) -> Self {
        assert!(
            !normals.is_empty(),
            "scripted noise needs at least one value"
        );
        Self { normals, next: 0 }
    }
}

impl NoiseSource for ScriptedNoise {
    fn standard_normal(&mut self) -> f64 {
        let v = self.normals[self.next % self.normals.len()];
        self.next += 1;
        v
    }

    fn uniform(&mut self) -> f64 {
        0.5
    }
}

/// An `rows × cols` matrix of standard normals, filled row by row.
pub fn standard_normal_matrix<N: NoiseSource + ?Sized>(
    noise: &mut N,
    rows: usize,
    cols: usize,
) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(rows, cols);
    noise.fill_standard_normal(m.as_mut_slice());
    m
}
