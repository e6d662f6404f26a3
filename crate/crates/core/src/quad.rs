//! Seeded stochastic quadrature: randomly shifted rank-1 lattice rules on
//! the torus and Monte Carlo on products of complex unit spheres.
//!
//! Batches get sub-seeds derived deterministically from (seed, tag, index),
//! are evaluated independently (in parallel), and are reduced in a fixed
//! order — outputs are byte-identical for a fixed seed regardless of the
//! worker count.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Total sample budget across batches.
    pub budget: usize,
    pub seed: u64,
    /// Number of independent random shifts (≥ 2, for the error estimate).
    pub batches: usize,
    /// Optional standard-error target; exceeding it is an error.
    pub target_std_err: Option<f64>,
}

impl QuadratureConfig {
    pub fn new(budget: usize, seed: u64) -> Self {
        QuadratureConfig {
            budget,
            seed,
            batches: 8,
            target_std_err: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget < 1 {
            return Err(Error::Invalid("sample budget must be ≥ 1".into()));
        }
        if self.batches < 2 {
            return Err(Error::Invalid("batch count must be ≥ 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
    pub samples: usize,
    pub rejected: usize,
}

/// Deterministic sub-generator for (seed, tag, index).
pub fn sub_rng(seed: u64, tag: &str, index: u64) -> ChaCha8Rng {
    // FNV-style mixing of the tag into the seed words.
    let mut h: u64 = 0xcbf29ce484222325 ^ seed.rotate_left(17);
    for b in tag.as_bytes() {
        h = (h ^ *b as u64).wrapping_mul(0x100000001b3);
    }
    h ^= index.wrapping_mul(0x9e3779b97f4a7c15);
    let mut key = [0u8; 32];
    let mut x = h;
    for chunk in key.chunks_mut(8) {
        // SplitMix64 expansion
        x = x.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^= z >> 31;
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Korobov generating vector (1, a, a², …) mod n with a near the golden
/// section, nudged to be coprime with n.
fn korobov_vector(n_points: usize, dim: usize) -> Vec<usize> {
    if dim == 1 {
        return vec![1];
    }
    let n = n_points.max(2);
    let mut a = ((n as f64) * 0.6180339887498949) as usize % n;
    if a < 2 {
        a = 2;
    }
    fn gcd(mut a: usize, mut b: usize) -> usize {
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    }
    while gcd(a, n) != 1 {
        a += 1;
    }
    let mut z = Vec::with_capacity(dim);
    let mut cur = 1usize;
    for _ in 0..dim {
        z.push(cur);
        cur = cur * a % n;
    }
    z
}

/// Randomized-QMC mean of `f` over the unit cube [0,1)^dim. `f` returns
/// `None` to reject a point (integrand singular there); rejected points are
/// dropped from their batch mean and counted.
pub fn qmc_mean<F>(dim: usize, cfg: &QuadratureConfig, tag: &str, f: F) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    cfg.validate()?;
    let per_batch = (cfg.budget / cfg.batches).max(1);
    let z = korobov_vector(per_batch, dim);
    let batch_stats: Vec<(f64, usize, usize)> = (0..cfg.batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = sub_rng(cfg.seed, tag, b as u64);
            let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
            let mut sum = 0.0;
            let mut kept = 0usize;
            let mut rejected = 0usize;
            let mut x = vec![0.0f64; dim];
            for k in 0..per_batch {
                for (j, zj) in z.iter().enumerate() {
                    let v = (k * zj) % per_batch;
                    x[j] = (v as f64 / per_batch as f64 + shift[j]).fract();
                }
                match f(&x) {
                    Some(v) => {
                        sum += v;
                        kept += 1;
                    }
                    None => rejected += 1,
                }
            }
            (sum, kept, rejected)
        })
        .collect();

    let mut means = Vec::with_capacity(cfg.batches);
    let mut samples = 0;
    let mut rejected = 0;
    for (sum, kept, rej) in batch_stats {
        samples += kept;
        rejected += rej;
        if kept == 0 {
            return Err(Error::Quadrature(format!(
                "a batch rejected all {per_batch} points (integrand singular on the fiber?)"
            )));
        }
        means.push(sum / kept as f64);
    }
    let b = means.len() as f64;
    let mean = means.iter().sum::<f64>() / b;
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (b - 1.0);
    let std_err = (var / b).sqrt();
    if let Some(t) = cfg.target_std_err {
        if std_err > t {
            return Err(Error::Quadrature(format!(
                "standard error {std_err:.3e} exceeds target {t:.3e} at budget {}",
                cfg.budget
            )));
        }
    }
    Ok(Estimate {
        value: mean,
        std_err,
        samples,
        rejected,
    })
}

/// One uniform point on the unit sphere of ℂⁿ as interleaved (re, im) pairs,
/// by normalized standard complex Gaussians (Box–Muller).
pub fn sphere_point(rng: &mut ChaCha8Rng, n: usize, out: &mut Vec<f64>) {
    out.clear();
    let mut norm2 = 0.0;
    for _ in 0..n {
        let (a, b) = gaussian_pair(rng);
        out.push(a);
        out.push(b);
        norm2 += a * a + b * b;
    }
    if norm2 == 0.0 {
        out[0] = 1.0;
        return;
    }
    let inv = norm2.sqrt().recip();
    for v in out.iter_mut() {
        *v *= inv;
    }
}

pub fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    // Box–Muller with u clamped away from zero
    let u: f64 = rng.gen::<f64>().max(1e-300);
    let v: f64 = rng.gen();
    let r = (-2.0 * u.ln()).sqrt();
    let t = 2.0 * std::f64::consts::PI * v;
    (r * t.cos(), r * t.sin())
}

/// Batched Monte Carlo mean of `f` over draws produced by `draw`.
pub fn mc_mean<D, F>(cfg: &QuadratureConfig, tag: &str, draw: D, f: F) -> Result<Estimate>
where
    D: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    cfg.validate()?;
    let per_batch = (cfg.budget / cfg.batches).max(1);
    let batch_stats: Vec<(f64, usize, usize)> = (0..cfg.batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = sub_rng(cfg.seed, tag, b as u64);
            let mut sum = 0.0;
            let mut kept = 0usize;
            let mut rejected = 0usize;
            for _ in 0..per_batch {
                let x = draw(&mut rng);
                match f(&x) {
                    Some(v) => {
                        sum += v;
                        kept += 1;
                    }
                    None => rejected += 1,
                }
            }
            (sum, kept, rejected)
        })
        .collect();
    let mut means = Vec::with_capacity(cfg.batches);
    let mut samples = 0;
    let mut rejected = 0;
    for (sum, kept, rej) in batch_stats {
        samples += kept;
        rejected += rej;
        if kept == 0 {
            return Err(Error::Quadrature("a batch rejected all points".into()));
        }
        means.push(sum / kept as f64);
    }
    let b = means.len() as f64;
    let mean = means.iter().sum::<f64>() / b;
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (b - 1.0);
    let std_err = (var / b).sqrt();
    if let Some(t) = cfg.target_std_err {
        if std_err > t {
            return Err(Error::Quadrature(format!(
                "standard error {std_err:.3e} exceeds target {t:.3e}"
            )));
        }
    }
    Ok(Estimate {
        value: mean,
        std_err,
        samples,
        rejected,
    })
}
