use serde::Serialize;

use super::law::{Mode, SwitchLaw};
use crate::error::{Error, Result};
use crate::rng::{stream, StreamRng};

/// Pairs are materialized in blocks of this size when an environment grows.
pub const BLOCK: usize = 1024;

#[derive(Debug, Clone)]
struct Source {
    law: SwitchLaw,
    rng: StreamRng,
}

/// A switching environment `ω = ((τ₀¹, τ₁¹), (τ₀², τ₁²), …)`.
///
/// Environments drawn from a law extend themselves on demand; the pair at a
/// given index depends only on the seed, never on how far the environment
/// had been extended before.
#[derive(Debug, Clone)]
pub struct Environment {
    seed: u64,
    pairs: Vec<(f64, f64)>,
    source: Option<Source>,
}

/// Renewal quantities at one time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimelinePoint {
    /// `N_t`, the number of completed (0, 1) cycles.
    pub n: usize,
    /// `J_t`.
    pub state: Mode,
    /// `a_t`, time since the last switch.
    pub age: f64,
    /// `S_{N_t}`.
    pub s_n: f64,
    /// `S′_{N_t+1}`.
    pub s_prime: f64,
}

impl Environment {
    /// Draws `count` pairs eagerly; more are generated when queried.
    pub fn sample(law: &SwitchLaw, seed: u64, count: usize) -> Self {
        let mut env = Environment {
            seed,
            pairs: Vec::new(),
            source: Some(Source {
                law: law.clone(),
                rng: stream(seed, 0),
            }),
        };
        env.generate(count);
        env
    }

    /// A fixed environment that cannot extend past the given pairs.
    pub fn from_pairs(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if let Some(bad) = pairs.iter().find(|(a, b)| !(*a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite())) {
            return Err(Error::Config(format!("holding times must be positive and finite, got {bad:?}")));
        }
        Ok(Environment {
            seed: 0,
            pairs,
            source: None,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Pairs generated so far.
    pub fn materialized(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    fn generate(&mut self, count: usize) {
        if let Some(src) = self.source.as_mut() {
            self.pairs.reserve(count);
            for _ in 0..count {
                let pair = src.law.sample_pair(&mut src.rng);
                self.pairs.push(pair);
            }
        }
    }

    /// Makes at least `n` pairs available.
    pub fn ensure(&mut self, n: usize) -> Result<()> {
        if n <= self.pairs.len() {
            return Ok(());
        }
        if self.source.is_none() {
            return Err(Error::Exhausted {
                available: self.pairs.len(),
            });
        }
        let missing = n - self.pairs.len();
        self.generate(missing.div_ceil(BLOCK) * BLOCK);
        Ok(())
    }

    /// The `k`-th pair `(τ₀ᵏ, τ₁ᵏ)`, counting from 1.
    pub fn pair(&mut self, k: usize) -> Result<(f64, f64)> {
        assert!(k >= 1, "pairs are indexed from 1");
        self.ensure(k)?;
        Ok(self.pairs[k - 1])
    }

    /// `N_t`, `J_t`, `a_t` and the surrounding renewal epochs.
    pub fn locate(&mut self, t: f64) -> Result<TimelinePoint> {
        if !(t >= 0.0) {
            return Err(Error::Argument(format!("time must be nonnegative, got {t}")));
        }
        let mut s_n = 0.0;
        let mut n = 0;
        loop {
            let (t0, t1) = self.pair(n + 1)?;
            let s_prime = s_n + t0;
            if t < s_prime {
                return Ok(TimelinePoint {
                    n,
                    state: Mode::Zero,
                    age: t - s_n,
                    s_n,
                    s_prime,
                });
            }
            let next = s_prime + t1;
            if t < next {
                return Ok(TimelinePoint {
                    n,
                    state: Mode::One,
                    age: t - s_prime,
                    s_n,
                    s_prime,
                });
            }
            s_n = next;
            n += 1;
        }
    }

    /// `η(s, t)`: switching epochs strictly inside `(s, t)`.
    pub fn switch_count(&mut self, s: f64, t: f64) -> Result<usize> {
        if !(s > 0.0 && s <= t) {
            return Err(Error::Argument(format!("switch count needs 0 < s <= t, got s={s}, t={t}")));
        }
        let mut count = 0;
        let mut epoch = 0.0;
        let mut k = 1;
        loop {
            let (t0, t1) = self.pair(k)?;
            for hold in [t0, t1] {
                epoch += hold;
                if epoch >= t {
                    return Ok(count);
                }
                if epoch > s {
                    count += 1;
                }
            }
            k += 1;
        }
    }

    /// JSON array of `[τ₀, τ₁]` pairs for the first `len` entries.
    pub fn prefix_json(&mut self, len: usize) -> Result<String> {
        self.ensure(len)?;
        let prefix: Vec<[f64; 2]> = self.pairs[..len].iter().map(|&(a, b)| [a, b]).collect();
        Ok(serde_json::to_string(&prefix).expect("pairs serialize"))
    }
}
