//! Seeded randomness and Monte Carlo experiments on random words.
//!
//! Every trial draws from its own ChaCha8 stream: the key is derived from
//! the experiment's master seed and the stream id is the trial index. Trial
//! outcomes therefore do not depend on scheduling, and aggregates are
//! reduced in trial order, so results are bit-identical for any number of
//! worker threads.
//!
//! The coupon-collector block is the random word obtained by drawing
//! uniform symbols until every symbol has appeared. Concatenating `k`
//! independent blocks gives a word with universality index exactly `k`,
//! and a uniform word of length `n` is k-universal iff the first `k`
//! blocks of its greedy decomposition fit in `n` symbols; this is the
//! coupling behind the sharp threshold at `n ~ q H_q k`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::output::{fmt_f64, Json};
use crate::words::{self, Alphabet, Word};
use crate::{Error, Result};

/// Name and version of the base generator; echoed by every experiment.
pub const GENERATOR: &str =
    "ChaCha8Rng (rand_chacha 0.3.1; key = seed_from_u64(master_seed), stream = trial index)";

/// Two-sided 95% normal quantile used for Wilson intervals.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Descriptor of one deterministic random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomSource {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RandomSource {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RandomSource {
            master_seed,
            stream_id,
        }
    }

    pub fn with_stream(self, stream_id: u64) -> Self {
        RandomSource { stream_id, ..self }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// `H_q = 1 + 1/2 + ... + 1/q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Harmonic {
    pub exact: BigRational,
    pub value: f64,
}

pub fn harmonic(q: u32) -> Result<Harmonic> {
    if q == 0 {
        return Err(Error::EmptyAlphabet);
    }
    let exact = (1..=q).fold(BigRational::from_integer(BigInt::from(0)), |acc, i| {
        acc + BigRational::new(BigInt::from(1), BigInt::from(i))
    });
    let value = exact.to_f64().expect("harmonic numbers are finite");
    Ok(Harmonic { exact, value })
}

/// `c_q = q H_q`, the expected coupon-collector time.
pub fn threshold_constant(q: u32) -> Result<f64> {
    let h = harmonic(q)?;
    let c = h.exact * BigRational::from_integer(BigInt::from(q));
    Ok(c.to_f64().expect("finite"))
}

pub fn sample_uniform_word<R: Rng + ?Sized>(alphabet: Alphabet, n: usize, rng: &mut R) -> Word {
    let q = alphabet.size();
    let symbols = (0..n).map(|_| rng.gen_range(1..=q)).collect();
    Word::from_trusted(alphabet, symbols)
}

/// Draws uniform symbols until all of `[q]` has appeared.
pub fn sample_coupon_block<R: Rng + ?Sized>(alphabet: Alphabet, rng: &mut R) -> Word {
    let q = alphabet.size();
    let mut seen = vec![false; q as usize + 1];
    let mut missing = q;
    let mut symbols = Vec::new();
    while missing > 0 {
        let s = rng.gen_range(1..=q);
        symbols.push(s);
        if !seen[s as usize] {
            seen[s as usize] = true;
            missing -= 1;
        }
    }
    Word::from_trusted(alphabet, symbols)
}

/// Samples only the lengths of coupon blocks, reusing its scratch space.
struct CouponTimer {
    stamp: Vec<u64>,
    epoch: u64,
    q: u32,
}

impl CouponTimer {
    fn new(q: u32) -> Self {
        CouponTimer {
            stamp: vec![0; q as usize + 1],
            epoch: 0,
            q,
        }
    }

    fn block_length<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u64 {
        self.epoch += 1;
        let mut missing = self.q;
        let mut draws = 0;
        while missing > 0 {
            let s = rng.gen_range(1..=self.q) as usize;
            draws += 1;
            if self.stamp[s] != self.epoch {
                self.stamp[s] = self.epoch;
                missing -= 1;
            }
        }
        draws
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouponStats {
    pub q: u32,
    pub trials: u64,
    pub mean: f64,
    /// Unbiased sample variance (0 for a single trial).
    pub variance: f64,
    /// `(value, fraction of trials <= value)` for every observed value.
    pub empirical_cdf: Vec<(u64, f64)>,
    pub master_seed: u64,
}

impl CouponStats {
    pub fn standard_error(&self) -> f64 {
        (self.variance / self.trials as f64).sqrt()
    }

    pub fn to_json(&self) -> Json {
        let cdf: Vec<Json> = self
            .empirical_cdf
            .iter()
            .map(|&(v, f)| Json::Array(vec![v.into(), f.into()]))
            .collect();
        Json::object()
            .field("q", self.q)
            .field("trials", self.trials)
            .field("mean", self.mean)
            .field("variance", self.variance)
            .field("standard_error", self.standard_error())
            .field("empirical_cdf", Json::Array(cdf))
            .field("master_seed", self.master_seed)
            .build()
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    Ok(())
}

/// Runs `trial(rng)` once per trial on its own stream, in parallel, and
/// returns the outcomes in trial order.
pub(crate) fn run_trials<T, F>(master_seed: u64, trials: u64, trial: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| trial(&mut RandomSource::new(master_seed, t).rng()))
        .collect()
}

pub fn coupon_time_stats(alphabet: Alphabet, trials: u64, master_seed: u64) -> Result<CouponStats> {
    check_trials(trials)?;
    let q = alphabet.size();
    let mut lengths = run_trials(master_seed, trials, |rng| {
        CouponTimer::new(q).block_length(rng)
    });
    let n = trials as f64;
    let mean = lengths.iter().map(|&l| l as f64).sum::<f64>() / n;
    let variance = if trials > 1 {
        lengths
            .iter()
            .map(|&l| (l as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    lengths.sort_unstable();
    let mut empirical_cdf = Vec::new();
    for (i, &l) in lengths.iter().enumerate() {
        let cumulative = (i + 1) as f64 / n;
        match empirical_cdf.last_mut() {
            Some((v, f)) if *v == l => *f = cumulative,
            _ => empirical_cdf.push((l, cumulative)),
        }
    }
    Ok(CouponStats {
        q,
        trials,
        mean,
        variance,
        empirical_cdf,
        master_seed,
    })
}

/// Wilson score interval for a binomial proportion at confidence `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = (center - half).max(0.0).min(p);
    let high = (center + half).min(1.0).max(p);
    (low, high)
}

/// One Monte Carlo result row.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ExperimentRecord {
    pub q: u32,
    pub k: usize,
    pub n: usize,
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub master_seed: u64,
}

impl ExperimentRecord {
    pub const CSV_HEADER: &'static str = "q,k,n,trials,successes,p_hat,ci_low,ci_high,master_seed";

    pub fn from_counts(
        q: u32,
        k: usize,
        n: usize,
        trials: u64,
        successes: u64,
        master_seed: u64,
    ) -> Self {
        assert!(trials > 0 && successes <= trials);
        let (ci_low, ci_high) = wilson_interval(successes, trials, Z_95);
        ExperimentRecord {
            q,
            k,
            n,
            trials,
            successes,
            p_hat: successes as f64 / trials as f64,
            ci_low,
            ci_high,
            master_seed,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.q,
            self.k,
            self.n,
            self.trials,
            self.successes,
            fmt_f64(self.p_hat),
            fmt_f64(self.ci_low),
            fmt_f64(self.ci_high),
            self.master_seed
        )
    }

    pub fn to_json(&self) -> Json {
        Json::object()
            .field("q", self.q)
            .field("k", self.k)
            .field("n", self.n)
            .field("trials", self.trials)
            .field("successes", self.successes)
            .field("p_hat", self.p_hat)
            .field("ci_low", self.ci_low)
            .field("ci_high", self.ci_high)
            .field("master_seed", self.master_seed)
            .build()
    }
}

/// Estimates `P[a uniform word of length n is k-universal]`.
pub fn estimate_universal_probability(
    alphabet: Alphabet,
    k: usize,
    n: usize,
    trials: u64,
    master_seed: u64,
) -> Result<ExperimentRecord> {
    check_trials(trials)?;
    if k == 0 {
        return Err(Error::ZeroK);
    }
    let q = alphabet.size();
    let hits = run_trials(master_seed, trials, |rng| {
        let word = sample_uniform_word(alphabet, n, rng);
        words::universality_index_of(q, word.symbols()) >= k
    });
    let successes = hits.iter().filter(|&&h| h).count() as u64;
    Ok(ExperimentRecord::from_counts(
        q,
        k,
        n,
        trials,
        successes,
        master_seed,
    ))
}

/// Location of the empirical 50% crossing of a threshold scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossing {
    At(f64),
    NotBracketed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdScan {
    pub records: Vec<ExperimentRecord>,
    pub crossing: Crossing,
}

/// One record per length. Trial `t` uses stream `t` at every length, so
/// the sampled words at a longer length extend those at a shorter one and
/// the success counts are monotone in `n`.
pub fn threshold_scan(
    alphabet: Alphabet,
    k: usize,
    n_values: &[usize],
    trials: u64,
    master_seed: u64,
) -> Result<ThresholdScan> {
    if n_values.is_empty() {
        return Err(Error::Domain("n_values must be non-empty".into()));
    }
    let records = n_values
        .iter()
        .map(|&n| estimate_universal_probability(alphabet, k, n, trials, master_seed))
        .collect::<Result<Vec<_>>>()?;
    let crossing = crossing_point(&records);
    Ok(ThresholdScan { records, crossing })
}

fn crossing_point(records: &[ExperimentRecord]) -> Crossing {
    let below = records.iter().any(|r| r.p_hat < 0.5);
    let above = records.iter().any(|r| r.p_hat > 0.5);
    if !(below && above) {
        return Crossing::NotBracketed;
    }
    let mut sorted: Vec<&ExperimentRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.n);
    for pair in sorted.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.p_hat < 0.5 && b.p_hat >= 0.5 {
            let fraction = (0.5 - a.p_hat) / (b.p_hat - a.p_hat);
            return Crossing::At(a.n as f64 + fraction * (b.n as f64 - a.n as f64));
        }
    }
    Crossing::NotBracketed
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationRow {
    pub t: f64,
    /// Fraction of trials with `| |U^(k)| - c_q k | > t sqrt(k)`.
    pub tail_frequency: f64,
}

/// Tail frequencies of the total length of `k` concatenated coupon blocks
/// around its mean `c_q k`, measured on the `sqrt(k)` scale.
pub fn deviation_scan(
    alphabet: Alphabet,
    k: usize,
    trials: u64,
    t_values: &[f64],
    master_seed: u64,
) -> Result<Vec<DeviationRow>> {
    check_trials(trials)?;
    let q = alphabet.size();
    let c_q = threshold_constant(q)?;
    let totals = run_trials(master_seed, trials, |rng| {
        let mut timer = CouponTimer::new(q);
        (0..k).map(|_| timer.block_length(rng)).sum::<u64>()
    });
    let center = c_q * k as f64;
    let scale = (k as f64).sqrt();
    Ok(t_values
        .iter()
        .map(|&t| {
            let exceed = totals
                .iter()
                .filter(|&&total| (total as f64 - center).abs() > t * scale)
                .count();
            DeviationRow {
                t,
                tail_frequency: exceed as f64 / trials as f64,
            }
        })
        .collect())
}
