//! Data generation and Monte Carlo estimation of undetected-error and
//! erasure probabilities.
//!
//! Every trial draws from its own ChaCha8 stream keyed by
//! `(seed, grid_index)` with stream number `trial_index`, and counts are
//! aggregated as integers, so results do not depend on how trials are
//! scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::detector::{l_profile, threshold_value};
use crate::error::{Error, Result};
use crate::model::{
    admissible_interval, ceil_tol, change_point, training_length, Categorical, DecoderOutput,
    ProblemConfig, SymbolSequence,
};

/// Two-sided 95% normal quantile.
pub const WILSON_Z95: f64 = 1.959_963_984_540_054;
/// Number of change fractions in the default worst-case grid.
pub const DEFAULT_GRID_POINTS: usize = 21;

/// Where the change point is placed.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeFraction {
    Fixed(f64),
    /// Maximum over a grid of change fractions, standing in for the maximum
    /// over every admissible change point.
    WorstCaseGrid(Vec<f64>),
}

impl ChangeFraction {
    /// `points` evenly spaced fractions in `[theta, 1 - theta]`.
    pub fn default_grid(theta: f64) -> Self {
        Self::grid(theta, DEFAULT_GRID_POINTS)
    }

    pub fn grid(theta: f64, points: usize) -> Self {
        let alphas = if points <= 1 {
            vec![0.5]
        } else {
            (0..points)
                .map(|i| theta + (1.0 - 2.0 * theta) * i as f64 / (points - 1) as f64)
                .collect()
        };
        ChangeFraction::WorstCaseGrid(alphas)
    }

    pub fn alphas(&self) -> &[f64] {
        match self {
            ChangeFraction::Fixed(a) => std::slice::from_ref(a),
            ChangeFraction::WorstCaseGrid(g) => g,
        }
    }
}

/// What to simulate.
#[derive(Clone, Debug, Serialize)]
pub struct TrialSpec {
    pub p1: Categorical,
    pub p2: Categorical,
    pub n: usize,
    pub r: f64,
    pub theta: f64,
    pub change_fraction: ChangeFraction,
    pub trials: usize,
    pub seed: u64,
}

impl TrialSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p1.alphabet_size() != self.p2.alphabet_size() {
            return Err(Error::AlphabetMismatch {
                left: self.p1.alphabet_size(),
                right: self.p2.alphabet_size(),
            });
        }
        if !self.p1.differs_from(&self.p2) {
            return Err(Error::IdenticalDistributions);
        }
        if self.trials == 0 {
            return Err(Error::param("trials", "must be at least 1"));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::param("r", format!("{} must be positive", self.r)));
        }
        let alphas = self.change_fraction.alphas();
        if alphas.is_empty() {
            return Err(Error::param("alpha", "change-fraction grid is empty"));
        }
        let range = admissible_interval(self.n, self.theta)?;
        for &alpha in alphas {
            if !(alpha >= self.theta - 1e-12 && alpha <= 1.0 - self.theta + 1e-12) {
                return Err(Error::param(
                    "alpha",
                    format!("{alpha} is not in [{}, {}]", self.theta, 1.0 - self.theta),
                ));
            }
            let c = change_point(alpha, self.n);
            if !range.contains(&c) {
                return Err(Error::param(
                    "alpha",
                    format!("change point {c} for alpha {alpha} is outside {range:?}"),
                ));
            }
        }
        Ok(())
    }

    pub fn training_len(&self) -> usize {
        training_length(self.n, self.r)
    }
}

/// One generated instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trial {
    pub x: SymbolSequence,
    pub y1: SymbolSequence,
    pub y2: SymbolSequence,
    pub change_point: usize,
}

/// Inverse-CDF sampler over a precomputed cumulative table.
#[derive(Clone, Debug)]
pub struct CategoricalSampler {
    cumulative: Vec<f64>,
}

impl CategoricalSampler {
    pub fn new(p: &Categorical) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = p
            .probs()
            .iter()
            .map(|&q| {
                acc += q;
                acc
            })
            .collect();
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Self { cumulative }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cumulative.partition_point(|&c| c <= u)
    }

    fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<usize>, count: usize) {
        out.extend((0..count).map(|_| self.sample(rng)));
    }
}

fn trial_rng(seed: u64, grid_index: usize, trial_index: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(grid_index as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial_index as u64);
    rng
}

struct Samplers {
    p1: CategoricalSampler,
    p2: CategoricalSampler,
    alphabet_size: usize,
}

impl Samplers {
    fn new(spec: &TrialSpec) -> Self {
        Self {
            p1: CategoricalSampler::new(&spec.p1),
            p2: CategoricalSampler::new(&spec.p2),
            alphabet_size: spec.p1.alphabet_size(),
        }
    }

    fn draw(&self, spec: &TrialSpec, grid_index: usize, trial_index: usize) -> Result<Trial> {
        let alpha = spec.change_fraction.alphas()[grid_index];
        let c = change_point(alpha, spec.n);
        let big_n = spec.training_len();
        let mut rng = trial_rng(spec.seed, grid_index, trial_index);
        let mut x = Vec::with_capacity(spec.n);
        self.p1.fill(&mut rng, &mut x, c);
        self.p2.fill(&mut rng, &mut x, spec.n - c);
        let mut y1 = Vec::with_capacity(big_n);
        self.p1.fill(&mut rng, &mut y1, big_n);
        let mut y2 = Vec::with_capacity(big_n);
        self.p2.fill(&mut rng, &mut y2, big_n);
        let k = self.alphabet_size;
        Ok(Trial {
            x: SymbolSequence::new(x, k)?,
            y1: SymbolSequence::new(y1, k)?,
            y2: SymbolSequence::new(y2, k)?,
            change_point: c,
        })
    }
}

/// Generates trial `trial_index` at change fraction `grid_index` of
/// `spec.change_fraction`. A pure function of the spec and the two indices.
pub fn generate_at(spec: &TrialSpec, grid_index: usize, trial_index: usize) -> Result<Trial> {
    spec.validate()?;
    if grid_index >= spec.change_fraction.alphas().len() {
        return Err(Error::param(
            "grid_index",
            format!("{grid_index} is out of range"),
        ));
    }
    Samplers::new(spec).draw(spec, grid_index, trial_index)
}

/// [`generate_at`] for the first (or only) change fraction.
pub fn generate(spec: &TrialSpec, trial_index: usize) -> Result<Trial> {
    generate_at(spec, 0, trial_index)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OutcomeCounts {
    pub undetected: u64,
    pub erasure: u64,
    pub correct: u64,
}

impl OutcomeCounts {
    pub fn total(&self) -> u64 {
        self.undetected + self.erasure + self.correct
    }

    fn add(self, other: Self) -> Self {
        Self {
            undetected: self.undetected + other.undetected,
            erasure: self.erasure + other.erasure,
            correct: self.correct + other.correct,
        }
    }

    fn record(&mut self, output: DecoderOutput, c: usize, delta: usize) {
        match output {
            DecoderOutput::Erasure => self.erasure += 1,
            DecoderOutput::ChangePoint(i) if i.abs_diff(c) <= delta => self.correct += 1,
            DecoderOutput::ChangePoint(_) => self.undetected += 1,
        }
    }
}

/// Results at one change point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChangePointRow {
    pub alpha: f64,
    pub change_point: usize,
    pub counts: OutcomeCounts,
    pub undetected_rate: f64,
    pub erasure_rate: f64,
    pub wilson_95_halfwidth: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloReport {
    /// Counts pooled over every evaluated change point.
    pub undetected_count: u64,
    pub erasure_count: u64,
    pub correct_count: u64,
    pub trials: u64,
    pub undetected_rate: f64,
    pub erasure_rate: f64,
    pub wilson_95_halfwidth: f64,
    /// Largest per-change-point rates; equal to the pooled rates when a
    /// single change fraction is simulated.
    pub worst_undetected_rate: f64,
    pub worst_erasure_rate: f64,
    /// Wilson halfwidth at the change point with the largest erasure rate.
    pub worst_wilson_95_halfwidth: f64,
    pub per_change_point: Vec<ChangePointRow>,
}

/// Halfwidth of the 95% Wilson score interval for `successes` out of `total`.
pub fn wilson_halfwidth(successes: u64, total: u64) -> f64 {
    if total == 0 {
        return f64::NAN;
    }
    let m = total as f64;
    let p = successes as f64 / m;
    let z2 = WILSON_Z95 * WILSON_Z95;
    WILSON_Z95 / (1.0 + z2 / m) * (p * (1.0 - p) / m + z2 / (4.0 * m * m)).sqrt()
}

fn rate(k: u64, total: u64) -> f64 {
    k as f64 / total as f64
}

impl MonteCarloReport {
    fn from_rows(rows: Vec<ChangePointRow>) -> Self {
        let pooled = rows
            .iter()
            .fold(OutcomeCounts::default(), |acc, row| acc.add(row.counts));
        let trials = pooled.total();
        let worst_undetected = rows.iter().map(|r| r.undetected_rate).fold(0.0, f64::max);
        let worst = rows
            .iter()
            .reduce(|a, b| {
                if b.erasure_rate > a.erasure_rate {
                    b
                } else {
                    a
                }
            })
            .expect("at least one change point");
        Self {
            undetected_count: pooled.undetected,
            erasure_count: pooled.erasure,
            correct_count: pooled.correct,
            trials,
            undetected_rate: rate(pooled.undetected, trials),
            erasure_rate: rate(pooled.erasure, trials),
            wilson_95_halfwidth: wilson_halfwidth(pooled.erasure, trials),
            worst_undetected_rate: worst_undetected,
            worst_erasure_rate: worst.erasure_rate,
            worst_wilson_95_halfwidth: worst.wilson_95_halfwidth,
            per_change_point: rows,
        }
    }
}

fn check_config(spec: &TrialSpec, config: &ProblemConfig) -> Result<()> {
    spec.validate()?;
    config.validate()?;
    if config.n != spec.n {
        return Err(Error::param(
            "n",
            format!(
                "trial spec has n = {}, decoder config has {}",
                spec.n, config.n
            ),
        ));
    }
    if config.r != spec.r || config.theta != spec.theta {
        return Err(Error::param(
            "config",
            "trial spec and decoder config disagree on r or theta",
        ));
    }
    Ok(())
}

/// Runs every trial once and classifies its verdict for each resolution in
/// `deltas`. Returns counts indexed as `[delta][grid point]`.
fn run_trials(
    spec: &TrialSpec,
    config: &ProblemConfig,
    deltas: &[usize],
) -> Result<Vec<Vec<OutcomeCounts>>> {
    check_config(spec, config)?;
    let samplers = Samplers::new(spec);
    let threshold = threshold_value(
        config.threshold_mode,
        config.lambda,
        spec.n,
        spec.training_len(),
        spec.p1.alphabet_size(),
        config.t,
    )?
    .value();

    let per_grid: Vec<Vec<OutcomeCounts>> = (0..spec.change_fraction.alphas().len())
        .map(|g| {
            (0..spec.trials)
                .into_par_iter()
                .map(|i| -> Result<Vec<OutcomeCounts>> {
                    let trial = samplers.draw(spec, g, i)?;
                    let profile = l_profile(&trial.x, &trial.y1, &trial.y2, spec.theta)?;
                    Ok(deltas
                        .iter()
                        .map(|&delta| {
                            let output = if profile.competing_min(delta) > threshold {
                                DecoderOutput::ChangePoint(profile.i_star())
                            } else {
                                DecoderOutput::Erasure
                            };
                            let mut counts = OutcomeCounts::default();
                            counts.record(output, trial.change_point, delta);
                            counts
                        })
                        .collect())
                })
                .try_reduce(
                    || vec![OutcomeCounts::default(); deltas.len()],
                    |a, b| Ok(a.into_iter().zip(b).map(|(x, y)| x.add(y)).collect()),
                )
        })
        .collect::<Result<_>>()?;

    Ok((0..deltas.len())
        .map(|d| per_grid.iter().map(|g| g[d]).collect())
        .collect())
}

fn report_for(spec: &TrialSpec, counts: &[OutcomeCounts]) -> MonteCarloReport {
    let rows = spec
        .change_fraction
        .alphas()
        .iter()
        .zip(counts)
        .map(|(&alpha, &c)| {
            let total = c.total();
            ChangePointRow {
                alpha,
                change_point: change_point(alpha, spec.n),
                counts: c,
                undetected_rate: rate(c.undetected, total),
                erasure_rate: rate(c.erasure, total),
                wilson_95_halfwidth: wilson_halfwidth(c.erasure, total),
            }
        })
        .collect();
    MonteCarloReport::from_rows(rows)
}

/// Monte Carlo estimate of the error and erasure rates of the decoder
/// configured by `config` (resolution `config.delta`). Random streams are
/// keyed by `spec.seed`.
pub fn estimate(spec: &TrialSpec, config: &ProblemConfig) -> Result<MonteCarloReport> {
    let counts = run_trials(spec, config, &[config.delta])?;
    Ok(report_for(spec, &counts[0]))
}

/// Physical resolution for a normalized one: `ceil(n delta_bar)` when
/// `t = 0`, `ceil(n^{1 - t/2} delta_bar)` otherwise.
pub fn resolution_for(n: usize, t: f64, delta_bar: f64) -> usize {
    let scale = (n as f64).powf(1.0 - t / 2.0);
    ceil_tol(scale * delta_bar).max(0.0) as usize
}

/// One row of a resolution sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta_bar: f64,
    pub delta: usize,
    pub n: usize,
    pub lambda: f64,
    pub report: MonteCarloReport,
}

/// Estimates error and erasure rates along a grid of normalized
/// resolutions. Each trial is generated and decoded once and then judged at
/// every resolution, so erasure rates are non-increasing along an increasing
/// grid. Resolutions beyond `(1 - 2 theta) / 2` are accepted and give the
/// vacuous regime where the decoder never erases.
pub fn phase_transition_sweep(
    spec: &TrialSpec,
    config: &ProblemConfig,
    delta_bar_grid: &[f64],
) -> Result<Vec<SweepRow>> {
    for &d in delta_bar_grid {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::param(
                "delta_bar",
                format!("{d} must be non-negative"),
            ));
        }
    }
    let deltas: Vec<usize> = delta_bar_grid
        .iter()
        .map(|&d| resolution_for(spec.n, config.t, d))
        .collect();
    let counts = run_trials(spec, config, &deltas)?;
    Ok(delta_bar_grid
        .iter()
        .zip(deltas)
        .zip(counts)
        .map(|((&delta_bar, delta), c)| SweepRow {
            delta_bar,
            delta,
            n: spec.n,
            lambda: config.lambda,
            report: report_for(spec, &c),
        })
        .collect())
}
