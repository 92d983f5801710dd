//! Sampling test of `λ ∈ W_min★`: looks for `g` with `λ(Ad(g)c) < 0` for a
//! generator `c` of `C_min`. Passing is only a necessary condition.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::LieAlgebra;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    /// Factors `x_k` of `g = exp(ad x_1) ⋯ exp(ad x_m)`.
    pub word: Vec<Vec<f64>>,
    /// Index of the violated generator.
    pub generator: usize,
    /// `λ(Ad(g)c)`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FalsifierVerdict {
    NotRefuted { samples: usize },
    RefutedBy(Witness),
}

impl FalsifierVerdict {
    pub fn is_refuted(&self) -> bool {
        matches!(self, FalsifierVerdict::RefutedBy(_))
    }
}

const CHUNK: usize = 256;
const MAX_FACTORS: usize = 4;
const MAX_NORM: f64 = 3.0;
const THRESHOLD: f64 = -1e-7;

fn random_factor(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    let dir = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
    let n: f64 = dir.norm();
    let radius = rng.random_range(0.0..MAX_NORM);
    if n > 0.0 {
        dir * (radius / n)
    } else {
        dir
    }
}

/// Samples words of at most four factors `exp(ad x)` with `‖x‖ <= 3` and
/// tests `λ(Ad(g)c) >= -1e-7` for every generator `c` (algebra coordinates).
/// Chunk `k` draws from stream `k` of a ChaCha8 generator seeded with
/// `seed`; the first violation in chunk order is reported.
pub fn wmin_star_falsifier(
    algebra: &LieAlgebra,
    generators: &[DVector<f64>],
    lambda: &DVector<f64>,
    samples: usize,
    seed: u64,
) -> FalsifierVerdict {
    if generators.is_empty() || samples == 0 {
        return FalsifierVerdict::NotRefuted { samples };
    }
    let d = algebra.dim();
    for (k, c) in generators.iter().enumerate() {
        let v = lambda.dot(c);
        if v < THRESHOLD {
            return FalsifierVerdict::RefutedBy(Witness {
                word: Vec::new(),
                generator: k,
                value: v,
            });
        }
    }
    let chunks = samples.div_ceil(CHUNK);
    let found: Vec<Option<Witness>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let count = CHUNK.min(samples - chunk * CHUNK);
            for _ in 0..count {
                let m = rng.random_range(1..=MAX_FACTORS);
                let word: Vec<DVector<f64>> = (0..m).map(|_| random_factor(&mut rng, d)).collect();
                let g = word
                    .iter()
                    .fold(DMatrix::identity(d, d), |acc, x| acc * algebra.adjoint_exp(x));
                // λ(Ad(g)c) = (gᵀλ)·c
                let pulled = g.transpose() * lambda;
                for (k, c) in generators.iter().enumerate() {
                    let v = pulled.dot(c);
                    if v < THRESHOLD {
                        return Some(Witness {
                            word: word.iter().map(|x| x.iter().cloned().collect()).collect(),
                            generator: k,
                            value: v,
                        });
                    }
                }
            }
            None
        })
        .collect();
    match found.into_iter().flatten().next() {
        Some(w) => FalsifierVerdict::RefutedBy(w),
        None => FalsifierVerdict::NotRefuted { samples },
    }
}
