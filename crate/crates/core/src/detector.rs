//! The type-based decoder: L-profile over the admissible interval, argmin
//! selection and the threshold/erasure rule.

use serde::Serialize;

use crate::divergence::{gjs_raw, Nats};
use crate::error::{Error, Result};
use crate::model::{
    admissible_interval, training_length, DecoderOutput, ProblemConfig, SymbolSequence,
    ThresholdMode,
};

/// `L(T_j, j/n, N/n)` for every `j` in the admissible interval.
#[derive(Clone, Debug)]
pub struct LProfile {
    values: Vec<f64>,
    /// `values` is indexed from this split.
    first: usize,
    i_star: usize,
    prefix_min: Vec<f64>,
    suffix_min: Vec<f64>,
    pub n: usize,
    pub training_len: usize,
    pub r: f64,
    pub theta: f64,
}

impl LProfile {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Split indices covered, in order.
    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.first + self.values.len() - 1
    }

    pub fn value_at(&self, j: usize) -> Option<Nats> {
        j.checked_sub(self.first)
            .and_then(|k| self.values.get(k))
            .map(|&v| Nats::new(v))
    }

    /// Smallest minimizing split.
    pub fn i_star(&self) -> usize {
        self.i_star
    }

    pub fn min_value(&self) -> Nats {
        Nats::new(self.values[self.i_star - self.first])
    }

    /// Minimum of the profile over splits farther than `delta` from `i_star`;
    /// `+inf` when there are none.
    pub fn competing_min(&self, delta: usize) -> f64 {
        let k = self.i_star - self.first;
        let mut best = f64::INFINITY;
        if k > delta {
            best = best.min(self.prefix_min[k - delta - 1]);
        }
        if let Some(right) = self.suffix_min.get(k + delta + 1) {
            best = best.min(*right);
        }
        best
    }
}

fn check_inputs(x: &SymbolSequence, y1: &SymbolSequence, y2: &SymbolSequence) -> Result<usize> {
    if y1.len() != y2.len() {
        return Err(Error::LengthMismatch(format!(
            "training sequences have lengths {} and {}",
            y1.len(),
            y2.len()
        )));
    }
    if x.is_empty() || y1.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(x.alphabet_size()
        .max(y1.alphabet_size())
        .max(y2.alphabet_size()))
}

fn counts(symbols: &[usize], k: usize) -> Vec<u64> {
    let mut c = vec![0u64; k];
    for &s in symbols {
        c[s] += 1;
    }
    c
}

fn to_probs(counts: &[u64], total: u64, out: &mut [f64]) {
    let total = total as f64;
    for (o, &c) in out.iter_mut().zip(counts) {
        *o = c as f64 / total;
    }
}

/// Computes the L-profile with a single incremental sweep over the split
/// index. `r` is taken as `N / n` from the supplied lengths.
pub fn l_profile(
    x: &SymbolSequence,
    y1: &SymbolSequence,
    y2: &SymbolSequence,
    theta: f64,
) -> Result<LProfile> {
    let k = check_inputs(x, y1, y2)?;
    let n = x.len();
    let big_n = y1.len();
    let range = admissible_interval(n, theta)?;
    let (first, last) = (*range.start(), *range.end());

    let nf = n as f64;
    let r = big_n as f64 / nf;
    let train1 = counts(y1.symbols(), k);
    let train2 = counts(y2.symbols(), k);
    let mut t1 = vec![0.0; k];
    let mut t2 = vec![0.0; k];
    to_probs(&train1, big_n as u64, &mut t1);
    to_probs(&train2, big_n as u64, &mut t2);

    let total = counts(x.symbols(), k);
    let mut head = counts(&x.symbols()[..first], k);
    let mut tail: Vec<u64> = total.iter().zip(&head).map(|(t, h)| t - h).collect();
    let mut head_p = vec![0.0; k];
    let mut tail_p = vec![0.0; k];

    let mut values = Vec::with_capacity(last - first + 1);
    for j in first..=last {
        if j > first {
            let s = x.symbols()[j - 1];
            head[s] += 1;
            tail[s] -= 1;
        }
        let beta = j as f64 / nf;
        to_probs(&head, j as u64, &mut head_p);
        to_probs(&tail, (n - j) as u64, &mut tail_p);
        let v = r * gjs_raw(&head_p, &t1, beta / r) + r * gjs_raw(&tail_p, &t2, (1.0 - beta) / r);
        values.push(v.max(0.0));
    }

    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    let mut prefix_min = values.clone();
    for i in 1..prefix_min.len() {
        prefix_min[i] = prefix_min[i].min(prefix_min[i - 1]);
    }
    let mut suffix_min = values.clone();
    for i in (0..suffix_min.len().saturating_sub(1)).rev() {
        suffix_min[i] = suffix_min[i].min(suffix_min[i + 1]);
    }

    Ok(LProfile {
        values,
        first,
        i_star: first + best,
        prefix_min,
        suffix_min,
        n,
        training_len: big_n,
        r,
        theta,
    })
}

/// Decoder threshold for a given mode.
///
/// `sigma_n = |X| ln((n + 1)^2 (N + 1)^2) / n`. `LargeDevAchievability` uses
/// `lambda + sigma_n` and `ModerateDev` uses `(lambda + sigma_n) n^{-t}`.
pub fn threshold_value(
    mode: ThresholdMode,
    lambda: f64,
    n: usize,
    training_len: usize,
    alphabet_size: usize,
    t: f64,
) -> Result<Nats> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::param(
            "lambda",
            format!("{lambda} must be non-negative"),
        ));
    }
    if n == 0 {
        return Err(Error::param("n", "test length must be positive"));
    }
    let nf = n as f64;
    let sigma = || {
        let a = (nf + 1.0).ln();
        let b = (training_len as f64 + 1.0).ln();
        alphabet_size as f64 * 2.0 * (a + b) / nf
    };
    let value = match mode {
        ThresholdMode::Raw => lambda,
        ThresholdMode::LargeDevAchievability => lambda + sigma(),
        ThresholdMode::ModerateDev => {
            if !(t > 0.0 && t < 0.5) {
                return Err(Error::param(
                    "t",
                    "moderate-deviations threshold needs t in (0, 1/2)",
                ));
            }
            (lambda + sigma()) * nf.powf(-t)
        }
    };
    Ok(Nats::new(value))
}

/// Verdict with the quantities it was derived from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Verdict {
    #[serde(flatten)]
    pub output: DecoderOutput,
    pub i_star: usize,
    /// `+inf` (serialized as `null`) when no split lies outside the window.
    #[serde(rename = "min_competing_L")]
    pub min_competing_l: f64,
    pub threshold: f64,
}

/// Applies the erasure rule to a computed profile: declare `i_star` when the
/// competing minimum strictly exceeds the threshold, erase otherwise.
pub fn decide(profile: &LProfile, delta: usize, threshold: f64) -> Verdict {
    let competing = profile.competing_min(delta);
    let output = if competing > threshold {
        DecoderOutput::ChangePoint(profile.i_star())
    } else {
        DecoderOutput::Erasure
    };
    Verdict {
        output,
        i_star: profile.i_star(),
        min_competing_l: competing,
        threshold,
    }
}

fn check_training_length(config: &ProblemConfig, n: usize, big_n: usize) -> Result<()> {
    if n != config.n {
        return Err(Error::LengthMismatch(format!(
            "test sequence has length {n}, configuration says {}",
            config.n
        )));
    }
    let expected = training_length(n, config.r);
    if expected.abs_diff(big_n) > 1 {
        return Err(Error::LengthMismatch(format!(
            "training length {big_n} is inconsistent with ceil(r n) = {expected}"
        )));
    }
    Ok(())
}

/// Runs the decoder and reports the verdict together with `i_star`, the
/// competing minimum and the threshold.
pub fn detect_detailed(
    x: &SymbolSequence,
    y1: &SymbolSequence,
    y2: &SymbolSequence,
    config: &ProblemConfig,
) -> Result<Verdict> {
    config.validate()?;
    check_training_length(config, x.len(), y1.len())?;
    let k = check_inputs(x, y1, y2)?;
    let profile = l_profile(x, y1, y2, config.theta)?;
    let threshold = threshold_value(
        config.threshold_mode,
        config.lambda,
        x.len(),
        y1.len(),
        k,
        config.t,
    )?;
    Ok(decide(&profile, config.delta, threshold.value()))
}

pub fn detect(
    x: &SymbolSequence,
    y1: &SymbolSequence,
    y2: &SymbolSequence,
    config: &ProblemConfig,
) -> Result<DecoderOutput> {
    Ok(detect_detailed(x, y1, y2, config)?.output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::l_statistic;
    use crate::model::split_types;

    fn seq(s: &[usize]) -> SymbolSequence {
        SymbolSequence::new(s.to_vec(), 2).unwrap()
    }

    fn example() -> (SymbolSequence, SymbolSequence, SymbolSequence) {
        (seq(&[0, 0, 1, 1]), seq(&[0, 0]), seq(&[1, 1]))
    }

    fn config(lambda: f64, delta: usize) -> ProblemConfig {
        ProblemConfig {
            n: 4,
            r: 0.5,
            theta: 0.25,
            lambda,
            t: 0.0,
            delta,
            threshold_mode: ThresholdMode::Raw,
            seed: 0,
        }
    }

    #[test]
    fn profile_example() {
        let (x, y1, y2) = example();
        let p = l_profile(&x, &y1, &y2, 0.25).unwrap();
        assert_eq!(p.indices(), 1..=3);
        assert_eq!(p.i_star(), 2);
        let v = p.values();
        assert_eq!(v[1], 0.0);
        for j in [1, 3] {
            let t = split_types(&x, j, &y1, &y2).unwrap();
            let direct = l_statistic(&t, j as f64 / 4.0, 0.5).unwrap().value();
            assert!((v[j - 1] - direct).abs() < 1e-15);
            assert!((v[j - 1] - 0.148117).abs() < 1e-6);
        }
    }

    #[test]
    fn competing_min_windows() {
        let (x, y1, y2) = example();
        let p = l_profile(&x, &y1, &y2, 0.25).unwrap();
        assert!((p.competing_min(0) - 0.148117).abs() < 1e-6);
        assert_eq!(p.competing_min(1), f64::INFINITY);
        assert_eq!(p.competing_min(2), f64::INFINITY);
    }

    #[test]
    fn detect_examples() {
        let (x, y1, y2) = example();
        assert_eq!(
            detect(&x, &y1, &y2, &config(0.05, 0)).unwrap(),
            DecoderOutput::ChangePoint(2)
        );
        assert_eq!(
            detect(&x, &y1, &y2, &config(0.5, 0)).unwrap(),
            DecoderOutput::Erasure
        );
        assert_eq!(
            detect(&x, &y1, &y2, &config(100.0, 2)).unwrap(),
            DecoderOutput::ChangePoint(2)
        );
    }

    #[test]
    fn ties_erase() {
        let (x, y1, y2) = example();
        let p = l_profile(&x, &y1, &y2, 0.25).unwrap();
        let v = decide(&p, 0, p.competing_min(0));
        assert_eq!(v.output, DecoderOutput::Erasure);
    }

    #[test]
    fn threshold_examples() {
        let raw = threshold_value(ThresholdMode::Raw, 0.05, 1000, 10_000, 2, 0.0).unwrap();
        assert_eq!(raw.value(), 0.05);
        let ld = threshold_value(
            ThresholdMode::LargeDevAchievability,
            0.05,
            1000,
            10_000,
            2,
            0.0,
        )
        .unwrap()
        .value();
        let sigma = 2.0 / 1000.0 * (1001.0f64.powi(2) * 10001.0f64.powi(2)).ln();
        assert!((ld - 0.05 - sigma).abs() < 1e-15);
        assert!((ld - 0.11447).abs() < 1e-5);
        let md = threshold_value(ThresholdMode::ModerateDev, 0.05, 10_000, 100_000, 2, 0.25)
            .unwrap()
            .value();
        let sigma = 2.0 / 1e4 * (10001.0f64.powi(2) * 100001.0f64.powi(2)).ln();
        assert!((md - (0.05 + sigma) * 0.1).abs() < 1e-15);
        assert!(threshold_value(ThresholdMode::ModerateDev, 0.05, 10, 10, 2, 0.0).is_err());
    }

    #[test]
    fn length_checks() {
        let (x, y1, _) = example();
        assert!(matches!(
            detect(&x, &y1, &seq(&[1]), &config(0.05, 0)),
            Err(Error::LengthMismatch(_))
        ));
        let long = seq(&[0; 10]);
        assert!(matches!(
            detect(&x, &long, &long, &config(0.05, 0)),
            Err(Error::LengthMismatch(_))
        ));
    }

    #[test]
    fn empty_interval() {
        let x = seq(&[0, 1, 0]);
        let err = l_profile(&x, &x, &x, 0.4).unwrap_err();
        assert!(matches!(err, Error::EmptyAdmissibleInterval { .. }));
        assert_eq!(err.exit_code(), 3);
    }
}
