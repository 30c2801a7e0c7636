//! Monte Carlo estimation of eigenstate values and entropies for
//! trace-type potentials, by ancestral sampling of the classical
//! equilibrium Markov measure.
//!
//! Determinism contract: samples are organized in fixed-size chunks; each
//! chunk draws from its own ChaCha8 stream (master seed, stream = chunk
//! index) and the chunk aggregates are reduced in chunk order, so results
//! are bit-identical for a fixed `(seed, samples)` regardless of the
//! worker count.

use crate::classical::MarkovMeasure;
use crate::cylfun::CylinderFunction;
use crate::entropy::trace_equilibrium;
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::scalar::{real, Scalar};
use crate::sft::Word;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Samples per RNG stream; fixed so that the worker count never affects
/// the chunk boundaries.
const CHUNK: usize = 8192;

/// Monte Carlo run parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub samples: usize,
    /// Extra chain transitions before the recorded window. The chain is
    /// initialized exactly stationary, so 0 is unbiased and the default.
    #[serde(default)]
    pub burn_in: usize,
    /// Rayon worker threads; 0 means the global default. Never affects
    /// the estimate, only the wall time.
    #[serde(default)]
    pub workers: usize,
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidMeasure(
                "sampler needs at least one sample".into(),
            ));
        }
        Ok(())
    }
}

fn chunk_rng(seed: u64, chunk_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk_index);
    rng
}

fn draw_index<T: Scalar>(weights: &[T], rng: &mut ChaCha8Rng) -> usize {
    let u = real::<T>(rng.gen::<f64>());
    let mut acc = T::zero();
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Precomputed chain data for ancestral sampling: the stationary law and
/// the kernel rows as plain slices.
struct Chain<T> {
    pi: Vec<T>,
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> Chain<T> {
    fn new(mu: &MarkovMeasure<T>) -> Self {
        let k = mu.shift().symbol_count();
        Chain {
            pi: mu.stationary().to_vec(),
            rows: (0..k)
                .map(|a| (0..k).map(|b| mu.kernel()[(a, b)]).collect())
                .collect(),
        }
    }

    fn draw(&self, length: usize, burn_in: usize, rng: &mut ChaCha8Rng) -> Word {
        let mut state = draw_index(&self.pi, rng);
        for _ in 0..burn_in {
            state = draw_index(&self.rows[state], rng);
        }
        let mut symbols = Vec::with_capacity(length);
        symbols.push(state + 1);
        for _ in 1..length {
            state = draw_index(&self.rows[state], rng);
            symbols.push(state + 1);
        }
        Word::new(symbols)
    }
}

/// I.i.d. draws of allowed words of the given length, distributed by the
/// cylinder weights of `mu`. Deterministic in `(cfg.seed, cfg.samples)`.
pub fn sample_words<T: Scalar>(
    mu: &MarkovMeasure<T>,
    length: usize,
    cfg: &SamplerConfig,
) -> Result<Vec<Word>> {
    cfg.validate()?;
    let chain = Chain::new(mu);
    let mut out = Vec::with_capacity(cfg.samples);
    let chunks = cfg.samples.div_ceil(CHUNK);
    for c in 0..chunks {
        let mut rng = chunk_rng(cfg.seed, c as u64);
        let in_chunk = CHUNK.min(cfg.samples - c * CHUNK);
        for _ in 0..in_chunk {
            out.push(chain.draw(length, cfg.burn_in, &mut rng));
        }
    }
    Ok(out)
}

/// Mean and standard error of a per-word functional, evaluated by table
/// lookup over the cylinder index, in deterministic chunk order.
fn estimate_table<T: Scalar>(
    mu: &MarkovMeasure<T>,
    length: usize,
    table: &[T],
    cfg: &SamplerConfig,
) -> Result<(T, T)> {
    cfg.validate()?;
    let shift = mu.shift().clone();
    let chain = Chain::new(mu);
    let chunks = cfg.samples.div_ceil(CHUNK);
    let run = |c: usize| -> (T, T) {
        let mut rng = chunk_rng(cfg.seed, c as u64);
        let in_chunk = CHUNK.min(cfg.samples - c * CHUNK);
        let mut sum = T::zero();
        let mut sum_sq = T::zero();
        for _ in 0..in_chunk {
            let w = chain.draw(length, cfg.burn_in, &mut rng);
            let value = table[shift.word_index(&w).expect("sampled word is allowed")];
            sum += value;
            sum_sq += value * value;
        }
        (sum, sum_sq)
    };
    let partials: Vec<(T, T)> = if cfg.workers == 1 {
        (0..chunks).map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::InvalidMeasure(format!("thread pool: {e}")))?;
        pool.install(|| (0..chunks).into_par_iter().map(run).collect())
    };
    let n = real::<T>(cfg.samples as f64);
    let mut sum = T::zero();
    let mut sum_sq = T::zero();
    for (s, s2) in partials {
        sum += s;
        sum_sq += s2;
    }
    let mean = sum / n;
    let std_error = if cfg.samples > 1 {
        let var = ((sum_sq - sum * sum / n) / (n - T::one())).max(T::zero());
        (var / n).sqrt()
    } else {
        T::zero()
    };
    Ok((mean, std_error))
}

/// Monte Carlo estimate of `eta(g)` for a trace-type potential: the
/// sample mean of `tr^ g` over equilibrium draws.
pub fn estimate_eta<T: Scalar>(
    phi: &Potential<T>,
    g: &CylinderFunction<T>,
    cfg: &SamplerConfig,
) -> Result<(T, T)> {
    if phi.scalar_trace_potential().is_none() {
        return Err(Error::InvalidPotential(
            "Monte Carlo estimation requires a trace-type potential".into(),
        ));
    }
    if phi.shift() != g.shift() {
        return Err(Error::ShiftMismatch);
    }
    let mu = trace_equilibrium(phi)?;
    let length = g.depth().max(1);
    let words = phi.shift().allowed_words(length)?;
    let table: Vec<T> = words
        .iter()
        .map(|w| Ok(g.eval(w)?.normalized_trace()))
        .collect::<Result<_>>()?;
    estimate_table(&mu, length, &table, cfg)
}

/// Monte Carlo estimate of `h = -eta(log J)` for a trace-type potential:
/// the sample mean of `-tr^ log P` over equilibrium draws.
pub fn estimate_entropy<T: Scalar>(
    phi: &Potential<T>,
    cfg: &SamplerConfig,
) -> Result<(T, T)> {
    let factors = phi.trace_factors().ok_or_else(|| {
        Error::InvalidPotential("Monte Carlo estimation requires a trace-type potential".into())
    })?;
    let mu = trace_equilibrium(phi)?;
    let eps = real::<T>(1e-10);
    let table: Vec<T> = factors
        .iter()
        .map(|p| Ok(-p.log_positive(eps)?.normalized_trace()))
        .collect::<Result<_>>()?;
    estimate_table(&mu, phi.depth(), &table, cfg)
}
