//! Reproducible Monte Carlo plumbing.
//!
//! Every estimator splits its sample budget into fixed-size chunks. Chunk `k`
//! draws from a ChaCha8 stream keyed by `(seed, k)`, so the random numbers a
//! chunk sees do not depend on which worker runs it. Partial moments are
//! merged in chunk order, which makes results bit-identical for any rayon
//! pool size.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rng = ChaCha8Rng;

/// Sampling budget and seed for one estimator call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McConfig {
    /// Outer sample count (one inner draw per outer sample for pair estimators).
    pub n_pairs: usize,
    pub seed: u64,
    /// Radial cutoff relative to the local integration radius.
    pub r_min_rel: f64,
    /// Samples per chunk.
    pub chunk: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_pairs: 1_000_000,
            seed: 0,
            r_min_rel: 1e-6,
            chunk: 1 << 15,
        }
    }
}

impl McConfig {
    pub fn new(n_pairs: usize, seed: u64) -> Self {
        Self {
            n_pairs,
            seed,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_pairs(mut self, n_pairs: usize) -> Self {
        self.n_pairs = n_pairs;
        self
    }

    /// Copy of this config whose seed is derived from `path`.
    pub fn child(&self, path: &str) -> Self {
        self.with_seed(derive_seed(self.seed, path))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pairs == 0 {
            return Err(Error::InvalidParams("n_pairs must be >= 1".into()));
        }
        if self.chunk == 0 {
            return Err(Error::InvalidParams("chunk must be >= 1".into()));
        }
        if !(self.r_min_rel > 0.0 && self.r_min_rel < 1.0) {
            return Err(Error::InvalidParams("r_min_rel must lie in (0,1)".into()));
        }
        Ok(())
    }

    /// Sizes of the chunks covering `n_pairs`, in order.
    pub fn chunk_sizes(&self) -> Vec<usize> {
        let full = self.n_pairs / self.chunk;
        let rem = self.n_pairs % self.chunk;
        let mut sizes = vec![self.chunk; full];
        if rem > 0 {
            sizes.push(rem);
        }
        sizes
    }
}

/// Sub-seed splitting rule: FNV-1a over the UTF-8 bytes of `path`, xored
/// into `seed`, then passed through the SplitMix64 finalizer.
pub fn derive_seed(seed: u64, path: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in path.bytes() {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(seed ^ h)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The generator for chunk `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `work(chunk_index, rng, count)` for every chunk and returns the
/// outputs in chunk order.
pub fn map_chunks<T, F>(mc: &McConfig, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut Rng, usize) -> T + Sync,
{
    mc.chunk_sizes()
        .into_par_iter()
        .enumerate()
        .map(|(k, count)| {
            let mut rng = stream_rng(mc.seed, k as u64);
            work(k, &mut rng, count)
        })
        .collect()
}

/// Count, mean and centered second moment of a stream of samples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, y: f64) {
        self.n += 1;
        let delta = y - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (y - self.mean);
    }

    /// Chan et al. pairwise merge.
    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.n as f64 * w;
        self.n = n;
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Per-chunk accumulator shared by the pair estimators.
#[derive(Debug, Clone, Copy, Default)]
pub struct ChunkTally {
    pub moments: Moments,
    /// Samples that landed inside the integration region.
    pub hits: u64,
    /// Pairs whose boundary weight was clamped at the cutoff scale.
    pub clamped: u64,
    /// Sum of per-sample bounds on the excised core (before dividing by n).
    pub core_sum: f64,
}

impl ChunkTally {
    pub fn merge(&mut self, other: &ChunkTally) {
        self.moments.merge(&other.moments);
        self.hits += other.hits;
        self.clamped += other.clamped;
        self.core_sum += other.core_sum;
    }
}

/// Diagnostics attached to an [`Estimate`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Flags {
    /// Running mean grew monotonically by more than the detector factor.
    pub divergent: bool,
    /// Fraction of pairs whose `delta^b` weight was clamped at the cutoff.
    pub clamped_fraction: f64,
    /// Analytic bound on the excised `r < r_min` core, in the units of the
    /// integral (before any root is taken). `None` when the field has no
    /// Lipschitz bound.
    pub core_bound: Option<f64>,
}

/// A Monte Carlo value with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n_effective: u64,
    pub flags: Flags,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
            n_effective: 0,
            flags: Flags::default(),
        }
    }

    /// `value^k` with the standard error propagated to first order.
    pub fn powf(&self, k: f64) -> Self {
        let value = self.value.powf(k);
        let std_error = if self.value > 0.0 {
            (k * self.value.powf(k - 1.0)).abs() * self.std_error
        } else if k == 1.0 {
            self.std_error
        } else {
            0.0
        };
        Self {
            value,
            std_error,
            n_effective: self.n_effective,
            flags: self.flags.clone(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            value: self.value * c,
            std_error: self.std_error * c.abs(),
            n_effective: self.n_effective,
            flags: Flags {
                core_bound: self.flags.core_bound.map(|b| b * c.abs()),
                ..self.flags.clone()
            },
        }
    }

    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.std_error / self.value.abs()
        }
    }
}

/// Chunk count the divergence detector looks back over.
pub const DIVERGENCE_WINDOW: usize = 8;
/// Total growth factor over the window that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1.5;

/// Flags a run whose running mean increased monotonically across the last
/// [`DIVERGENCE_WINDOW`] equal-size chunks by more than
/// [`DIVERGENCE_FACTOR`] in total.
pub fn looks_divergent(chunks: &[ChunkTally]) -> bool {
    // the trailing chunk may be short; only equal-size chunks count
    let size = match chunks.first() {
        Some(c) => c.moments.n,
        None => return false,
    };
    let equal: Vec<&ChunkTally> = chunks.iter().take_while(|c| c.moments.n == size).collect();
    if equal.len() < DIVERGENCE_WINDOW {
        return false;
    }
    let mut running = Moments::default();
    let mut means = Vec::with_capacity(equal.len());
    for c in &equal {
        running.merge(&c.moments);
        means.push(running.mean);
    }
    let tail = &means[means.len() - DIVERGENCE_WINDOW..];
    let monotone = tail.windows(2).all(|w| w[1] > w[0]);
    monotone && tail[0] > 0.0 && tail[DIVERGENCE_WINDOW - 1] > DIVERGENCE_FACTOR * tail[0]
}

/// Folds chunk tallies in order into an [`Estimate`] of the integral.
pub fn reduce(chunks: &[ChunkTally]) -> Estimate {
    let mut total = ChunkTally::default();
    for c in chunks {
        total.merge(c);
    }
    let n = total.moments.n.max(1) as f64;
    Estimate {
        value: total.moments.mean,
        std_error: total.moments.std_error(),
        n_effective: total.hits,
        flags: Flags {
            divergent: looks_divergent(chunks),
            clamped_fraction: total.clamped as f64 / n,
            core_bound: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn chunk_sizes_cover_budget() {
        let mc = McConfig {
            n_pairs: 10,
            chunk: 4,
            ..McConfig::default()
        };
        assert_eq!(mc.chunk_sizes(), vec![4, 4, 2]);
    }

    #[test]
    fn merged_moments_match_sequential() {
        let mut rng = stream_rng(3, 0);
        let ys: Vec<f64> = (0..1000).map(|_| rng.gen::<f64>()).collect();
        let mut all = Moments::default();
        ys.iter().for_each(|&y| all.push(y));
        let mut a = Moments::default();
        let mut b = Moments::default();
        ys[..337].iter().for_each(|&y| a.push(y));
        ys[337..].iter().for_each(|&y| b.push(y));
        a.merge(&b);
        assert!((a.mean - all.mean).abs() < 1e-14);
        assert!((a.variance() - all.variance()).abs() < 1e-14);
    }

    #[test]
    fn derived_seeds_differ_by_path() {
        assert_ne!(derive_seed(1, "norm"), derive_seed(1, "seminorm"));
        assert_eq!(derive_seed(1, "norm"), derive_seed(1, "norm"));
    }

    #[test]
    fn detector_flags_monotone_growth() {
        let chunk = |y: f64| {
            let mut m = Moments::default();
            (0..4).for_each(|_| m.push(y));
            ChunkTally {
                moments: m,
                ..ChunkTally::default()
            }
        };
        let growing: Vec<ChunkTally> = (0..10).map(|k| chunk(2f64.powi(k))).collect();
        assert!(looks_divergent(&growing));
        let flat: Vec<ChunkTally> = (0..10).map(|_| chunk(1.0)).collect();
        assert!(!looks_divergent(&flat));
        assert!(!looks_divergent(&growing[..5]));
    }

    #[test]
    fn powf_propagates_error() {
        let e = Estimate {
            value: 4.0,
            std_error: 0.4,
            n_effective: 1,
            flags: Flags::default(),
        };
        let r = e.powf(0.5);
        assert_eq!(r.value, 2.0);
        assert!((r.std_error - 0.1).abs() < 1e-15);
    }
}
