//! Seeded random variables drawing from named, independent streams.
//!
//! Every consumer of randomness owns a stream identified by (run seed,
//! stream name). Stream seeds are derived with a fixed splitting function,
//! so adding a new model or stream never perturbs the draws of existing
//! ones, and a sample sequence is fully determined by (run seed, stream
//! name, draw index).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::models::ModelError;

/// FNV-1a, 64 bit. Part of the stream-derivation contract; must never change.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// splitmix64 finalizer.
fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Derives the 64-bit seed of a named stream from the run seed.
pub fn stream_seed(run_seed: u64, stream: &str) -> u64 {
    mix64(mix64(run_seed) ^ fnv1a64(stream.as_bytes()))
}

/// The generator backing a named stream.
pub fn stream_rng(run_seed: u64, stream: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(run_seed, stream))
}

enum Law {
    Uniform { lo: f64, hi: f64 },
    Normal(Normal<f64>),
    Bernoulli { p: f64 },
    Constant { c: f64 },
}

/// A distribution bound to its own stream. Sampling advances only this
/// variable's stream.
pub struct RandomVariable {
    law: Law,
    rng: ChaCha8Rng,
}

fn check_finite(key: &str, v: f64) -> Result<f64, ModelError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ModelError::InvalidParameter {
            key: key.to_string(),
            reason: format!("must be finite, got {v}"),
        })
    }
}

impl RandomVariable {
    /// Uniform on [lo, hi).
    pub fn uniform(lo: f64, hi: f64, rng: ChaCha8Rng) -> Result<Self, ModelError> {
        check_finite("lo", lo)?;
        check_finite("hi", hi)?;
        if lo > hi {
            return Err(ModelError::InvalidParameter {
                key: "lo".to_string(),
                reason: format!("lower bound {lo} exceeds upper bound {hi}"),
            });
        }
        Ok(RandomVariable {
            law: Law::Uniform { lo, hi },
            rng,
        })
    }

    pub fn normal(mean: f64, sigma: f64, rng: ChaCha8Rng) -> Result<Self, ModelError> {
        check_finite("mean", mean)?;
        check_finite("sigma", sigma)?;
        if sigma < 0.0 {
            return Err(ModelError::InvalidParameter {
                key: "sigma".to_string(),
                reason: format!("must be non-negative, got {sigma}"),
            });
        }
        let normal = Normal::new(mean, sigma).map_err(|e| ModelError::InvalidParameter {
            key: "sigma".to_string(),
            reason: e.to_string(),
        })?;
        Ok(RandomVariable {
            law: Law::Normal(normal),
            rng,
        })
    }

    /// Samples 1.0 with probability `p`, else 0.0.
    pub fn bernoulli(p: f64, rng: ChaCha8Rng) -> Result<Self, ModelError> {
        check_finite("p", p)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(ModelError::InvalidParameter {
                key: "p".to_string(),
                reason: format!("must lie in [0, 1], got {p}"),
            });
        }
        Ok(RandomVariable {
            law: Law::Bernoulli { p },
            rng,
        })
    }

    pub fn constant(c: f64) -> Self {
        RandomVariable {
            law: Law::Constant { c },
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    /// One draw. Never fails: parameters were validated at construction.
    pub fn sample(&mut self) -> f64 {
        match &self.law {
            Law::Uniform { lo, hi } => {
                if lo == hi {
                    *lo
                } else {
                    self.rng.random_range(*lo..*hi)
                }
            }
            Law::Normal(normal) => normal.sample(&mut self.rng),
            Law::Bernoulli { p } => {
                if self.rng.random::<f64>() < *p {
                    1.0
                } else {
                    0.0
                }
            }
            Law::Constant { c } => *c,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_returns_its_value_every_draw() {
        let mut rv = RandomVariable::constant(5.0);
        for _ in 0..100 {
            assert_eq!(rv.sample(), 5.0);
        }
    }

    #[test]
    fn bernoulli_zero_never_fires() {
        let mut rv = RandomVariable::bernoulli(0.0, stream_rng(1, "t")).unwrap();
        for _ in 0..1000 {
            assert_eq!(rv.sample(), 0.0);
        }
    }

    #[test]
    fn bernoulli_one_always_fires() {
        let mut rv = RandomVariable::bernoulli(1.0, stream_rng(1, "t")).unwrap();
        for _ in 0..1000 {
            assert_eq!(rv.sample(), 1.0);
        }
    }

    #[test]
    fn invalid_parameters_fail_at_construction() {
        assert!(RandomVariable::uniform(2.0, 1.0, stream_rng(0, "t")).is_err());
        assert!(RandomVariable::normal(0.0, -1.0, stream_rng(0, "t")).is_err());
        assert!(RandomVariable::bernoulli(1.5, stream_rng(0, "t")).is_err());
        assert!(RandomVariable::uniform(f64::NAN, 1.0, stream_rng(0, "t")).is_err());
    }

    #[test]
    fn uniform_with_equal_bounds_is_degenerate() {
        let mut rv = RandomVariable::uniform(3.0, 3.0, stream_rng(0, "t")).unwrap();
        assert_eq!(rv.sample(), 3.0);
    }

    #[test]
    fn uniform_stays_in_bounds() {
        let mut rv = RandomVariable::uniform(-1.0, 2.0, stream_rng(9, "t")).unwrap();
        for _ in 0..10_000 {
            let x = rv.sample();
            assert!((-1.0..2.0).contains(&x));
        }
    }

    #[test]
    fn same_stream_reproduces_the_same_sequence() {
        let mut a = RandomVariable::uniform(0.0, 1.0, stream_rng(7, "s")).unwrap();
        let mut b = RandomVariable::uniform(0.0, 1.0, stream_rng(7, "s")).unwrap();
        for _ in 0..100 {
            assert_eq!(a.sample(), b.sample());
        }
    }

    #[test]
    fn different_stream_names_are_independent() {
        // Interleaving draws from two streams must reproduce each stream's
        // solo sequence exactly.
        let solo_a: Vec<f64> = {
            let mut rv = RandomVariable::uniform(0.0, 1.0, stream_rng(7, "a")).unwrap();
            (0..50).map(|_| rv.sample()).collect()
        };
        let solo_b: Vec<f64> = {
            let mut rv = RandomVariable::uniform(0.0, 1.0, stream_rng(7, "b")).unwrap();
            (0..50).map(|_| rv.sample()).collect()
        };
        let mut a = RandomVariable::uniform(0.0, 1.0, stream_rng(7, "a")).unwrap();
        let mut b = RandomVariable::uniform(0.0, 1.0, stream_rng(7, "b")).unwrap();
        let mut inter_a = Vec::new();
        let mut inter_b = Vec::new();
        for i in 0..100 {
            if i % 2 == 0 {
                inter_a.push(a.sample());
            } else {
                inter_b.push(b.sample());
            }
        }
        assert_eq!(inter_a, solo_a);
        assert_eq!(inter_b, solo_b);
        assert_ne!(solo_a, solo_b);
    }

    #[test]
    fn stream_seed_depends_on_both_inputs() {
        assert_ne!(stream_seed(0, "a"), stream_seed(0, "b"));
        assert_ne!(stream_seed(0, "a"), stream_seed(1, "a"));
    }
}
