//! Core domain types: distributions over a finite alphabet, symbol
//! sequences, empirical types and the problem configuration.
//!
//! Symbols are indices `0..alphabet_size`. Everything here is immutable once
//! constructed.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a distribution.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Slack applied before rounding products such as `theta * n`, so that
/// `0.2 * 15 = 3.0000000000000004` still rounds up to 3.
const ROUNDING_SLACK: f64 = 1e-9;

pub(crate) fn ceil_tol(x: f64) -> f64 {
    (x - ROUNDING_SLACK).ceil()
}

pub(crate) fn floor_tol(x: f64) -> f64 {
    (x + ROUNDING_SLACK).floor()
}

/// A probability vector over a finite alphabet.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Categorical {
    probs: Vec<f64>,
}

impl Categorical {
    /// Validates and wraps a probability vector. Un-normalized input is
    /// rejected, never re-normalized.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution(
                "empty probability vector".into(),
            ));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0 || **p > 1.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} = {p} is not in [0, 1]"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    /// `Bern(p)`: mass `p` on symbol 0 and `1 - p` on symbol 1.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidDistribution(format!(
                "Bernoulli parameter {p} is not in [0, 1]"
            )));
        }
        Self::new(vec![p, 1.0 - p])
    }

    pub fn uniform(alphabet_size: usize) -> Result<Self> {
        if alphabet_size == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        Ok(Self {
            probs: vec![1.0 / alphabet_size as f64; alphabet_size],
        })
    }

    /// Convex combination `weight * first + (1 - weight) * second`.
    pub fn mixture(weight: f64, first: &Categorical, second: &Categorical) -> Result<Self> {
        check_same_alphabet(first, second)?;
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::param("weight", format!("{weight} is not in [0, 1]")));
        }
        Ok(Self::mixture_unchecked(
            weight,
            first.probs(),
            second.probs(),
        ))
    }

    /// Mixture written as `second + weight * (first - second)` so that a zero
    /// weight reproduces `second` bit for bit.
    pub(crate) fn mixture_unchecked(weight: f64, first: &[f64], second: &[f64]) -> Self {
        let probs = first
            .iter()
            .zip(second)
            .map(|(&a, &b)| b + weight * (a - b))
            .collect();
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn is_full_support(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }

    pub(crate) fn require_full_support(&self) -> Result<()> {
        match self.probs.iter().position(|&p| p <= 0.0) {
            Some(symbol) => Err(Error::FullSupportRequired { symbol }),
            None => Ok(()),
        }
    }

    /// True when some entry differs by more than `1e-12`.
    pub fn differs_from(&self, other: &Categorical) -> bool {
        self.probs
            .iter()
            .zip(&other.probs)
            .any(|(a, b)| (a - b).abs() > 1e-12)
    }
}

impl fmt::Display for Categorical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.probs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn check_same_alphabet(p: &Categorical, q: &Categorical) -> Result<()> {
    if p.alphabet_size() != q.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            left: p.alphabet_size(),
            right: q.alphabet_size(),
        });
    }
    Ok(())
}

/// A sequence of alphabet indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolSequence {
    symbols: Vec<usize>,
    alphabet_size: usize,
}

impl SymbolSequence {
    pub fn new(symbols: Vec<usize>, alphabet_size: usize) -> Result<Self> {
        if let Some(&symbol) = symbols.iter().find(|&&s| s >= alphabet_size) {
            return Err(Error::SymbolOutOfRange {
                symbol,
                alphabet_size,
            });
        }
        Ok(Self {
            symbols,
            alphabet_size,
        })
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Same symbols, read against a (larger) alphabet.
    pub fn with_alphabet_size(&self, alphabet_size: usize) -> Result<Self> {
        Self::new(self.symbols.clone(), alphabet_size)
    }
}

/// Maps external labels to alphabet indices. Labels are ordered
/// lexicographically so the mapping does not depend on input order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolTable {
    index: BTreeMap<String, usize>,
    labels: Vec<String>,
}

impl SymbolTable {
    pub fn from_labels<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut sorted: Vec<String> = labels.into_iter().map(|s| s.as_ref().to_owned()).collect();
        sorted.sort();
        sorted.dedup();
        let index = sorted
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Self {
            index,
            labels: sorted,
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    /// Encodes labels into a sequence; unknown labels are an error.
    pub fn encode<S: AsRef<str>>(&self, labels: &[S]) -> Result<SymbolSequence> {
        let symbols = labels
            .iter()
            .enumerate()
            .map(|(pos, l)| {
                self.index_of(l.as_ref()).ok_or_else(|| Error::Parse {
                    source_name: "labels".into(),
                    line: 1,
                    column: pos + 1,
                    message: format!("unknown label `{}`", l.as_ref()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SymbolSequence::new(symbols, self.alphabet_size())
    }
}

/// Empirical type of a sequence, kept as integer counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeVector {
    counts: Vec<u64>,
    length_total: u64,
}

impl TypeVector {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        let length_total: u64 = counts.iter().sum();
        if length_total == 0 {
            return Err(Error::EmptySequence);
        }
        Ok(Self {
            counts,
            length_total,
        })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> u64 {
        self.length_total
    }

    pub fn is_empty(&self) -> bool {
        self.length_total == 0
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    /// `counts / length`.
    pub fn as_distribution(&self) -> Categorical {
        let total = self.length_total as f64;
        Categorical {
            probs: self.counts.iter().map(|&c| c as f64 / total).collect(),
        }
    }

    /// Type of the concatenation of the two underlying sequences.
    pub fn merge(&self, other: &TypeVector) -> Result<TypeVector> {
        if self.alphabet_size() != other.alphabet_size() {
            return Err(Error::AlphabetMismatch {
                left: self.alphabet_size(),
                right: other.alphabet_size(),
            });
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a + b)
            .collect();
        Ok(TypeVector {
            counts,
            length_total: self.length_total + other.length_total,
        })
    }
}

/// Counts how often each symbol occurs.
pub fn type_of(seq: &SymbolSequence, alphabet_size: usize) -> Result<TypeVector> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut counts = vec![0u64; alphabet_size];
    for &s in seq.symbols() {
        *counts.get_mut(s).ok_or(Error::SymbolOutOfRange {
            symbol: s,
            alphabet_size,
        })? += 1;
    }
    Ok(TypeVector {
        counts,
        length_total: seq.len() as u64,
    })
}

/// The sub-types of a test sequence split after `split_index` symbols,
/// together with the two training types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubTypeTuple {
    pub head: TypeVector,
    pub tail: TypeVector,
    pub train1: TypeVector,
    pub train2: TypeVector,
    pub split_index: usize,
}

impl SubTypeTuple {
    pub fn test_len(&self) -> u64 {
        self.head.len() + self.tail.len()
    }

    pub fn training_len(&self) -> u64 {
        self.train1.len()
    }
}

/// Splits `x` into `x[..j]` and `x[j..]` and types everything.
pub fn split_types(
    x: &SymbolSequence,
    j: usize,
    y1: &SymbolSequence,
    y2: &SymbolSequence,
) -> Result<SubTypeTuple> {
    let n = x.len();
    if n < 2 || j == 0 || j >= n {
        return Err(Error::SplitOutOfRange {
            split: j,
            max: n.saturating_sub(1),
        });
    }
    if y1.len() != y2.len() {
        return Err(Error::LengthMismatch(format!(
            "training sequences have lengths {} and {}",
            y1.len(),
            y2.len()
        )));
    }
    let k = x
        .alphabet_size()
        .max(y1.alphabet_size())
        .max(y2.alphabet_size());
    let head = SymbolSequence::new(x.symbols()[..j].to_vec(), k)?;
    let tail = SymbolSequence::new(x.symbols()[j..].to_vec(), k)?;
    Ok(SubTypeTuple {
        head: type_of(&head, k)?,
        tail: type_of(&tail, k)?,
        train1: type_of(y1, k)?,
        train2: type_of(y2, k)?,
        split_index: j,
    })
}

/// How the decoder threshold is derived from the exponent `lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Use `lambda` as given.
    Raw,
    /// `lambda` plus the type-counting correction.
    LargeDevAchievability,
    /// Corrected threshold scaled by `n^-t`.
    ModerateDev,
}

/// `N = ceil(r n)`.
pub fn training_length(n: usize, r: f64) -> usize {
    ceil_tol(r * n as f64).max(0.0) as usize
}

/// `C = ceil(alpha n)`.
pub fn change_point(alpha: f64, n: usize) -> usize {
    ceil_tol(alpha * n as f64).max(0.0) as usize
}

/// `[ceil(theta n), floor((1 - theta) n)]`, clipped to `[1, n - 1]`.
pub fn admissible_interval(n: usize, theta: f64) -> Result<RangeInclusive<usize>> {
    if !(theta > 0.0 && theta < 0.5) {
        return Err(Error::param("theta", format!("{theta} is not in (0, 1/2)")));
    }
    let lo = (ceil_tol(theta * n as f64) as usize).max(1);
    let hi = (floor_tol((1.0 - theta) * n as f64) as usize).min(n.saturating_sub(1));
    if n < 2 || lo > hi {
        return Err(Error::EmptyAdmissibleInterval { n, theta });
    }
    Ok(lo..=hi)
}

/// Everything that parameterizes one decoding problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub n: usize,
    pub r: f64,
    pub theta: f64,
    pub lambda: f64,
    pub t: f64,
    pub delta: usize,
    pub threshold_mode: ThresholdMode,
    pub seed: u64,
}

impl ProblemConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(Error::param("r", format!("{} must be positive", self.r)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::param(
                "lambda",
                format!("{} must be non-negative", self.lambda),
            ));
        }
        if !(0.0..0.5).contains(&self.t) {
            return Err(Error::param("t", format!("{} is not in [0, 1/2)", self.t)));
        }
        if self.threshold_mode == ThresholdMode::ModerateDev && self.t == 0.0 {
            return Err(Error::param(
                "t",
                "moderate-deviations threshold needs t > 0",
            ));
        }
        admissible_interval(self.n, self.theta)?;
        Ok(())
    }

    pub fn training_len(&self) -> usize {
        training_length(self.n, self.r)
    }

    pub fn admissible(&self) -> Result<RangeInclusive<usize>> {
        admissible_interval(self.n, self.theta)
    }

    /// `delta >= (1 - 2 theta) n / 2`: some change point has no competitor
    /// outside its resolution window and the problem is vacuous.
    pub fn is_trivial(&self) -> bool {
        self.delta as f64 >= (1.0 - 2.0 * self.theta) * self.n as f64 / 2.0
    }
}

/// Decoder verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "index", rename_all = "snake_case")]
pub enum DecoderOutput {
    ChangePoint(usize),
    Erasure,
}

impl DecoderOutput {
    pub fn is_erasure(&self) -> bool {
        matches!(self, DecoderOutput::Erasure)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &[usize], k: usize) -> SymbolSequence {
        SymbolSequence::new(s.to_vec(), k).unwrap()
    }

    #[test]
    fn type_counts() {
        let t = type_of(&seq(&[0, 0, 1, 1], 2), 2).unwrap();
        assert_eq!(t.counts(), &[2, 2]);
        assert_eq!(t.len(), 4);
        let t = type_of(&seq(&[1, 1, 1], 2), 2).unwrap();
        assert_eq!(t.counts(), &[0, 3]);
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn empty_sequence_rejected() {
        let err = type_of(&seq(&[], 2), 2).unwrap_err();
        assert_eq!(err.to_string(), "empty sequence");
    }

    #[test]
    fn split_examples() {
        let y1 = seq(&[0, 0], 2);
        let y2 = seq(&[1, 1], 2);
        #[allow(clippy::type_complexity)]
        let cases: [(&[usize], usize, [u64; 2], [u64; 2]); 3] = [
            (&[0, 0, 1, 1], 2, [2, 0], [0, 2]),
            (&[0, 0, 1, 1], 1, [1, 0], [1, 2]),
            (&[0, 1, 0, 1], 3, [2, 1], [0, 1]),
        ];
        for (x, j, head, tail) in cases {
            let t = split_types(&seq(x, 2), j, &y1, &y2).unwrap();
            assert_eq!(t.head.counts(), &head);
            assert_eq!(t.tail.counts(), &tail);
            assert_eq!(t.split_index, j);
        }
    }

    #[test]
    fn split_out_of_range() {
        let x = seq(&[0, 1, 0], 2);
        let y = seq(&[0], 2);
        assert!(matches!(
            split_types(&x, 0, &y, &y),
            Err(Error::SplitOutOfRange { .. })
        ));
        assert!(matches!(
            split_types(&x, 3, &y, &y),
            Err(Error::SplitOutOfRange { .. })
        ));
    }

    #[test]
    fn distribution_validation() {
        assert!(Categorical::new(vec![0.5, 0.4]).is_err());
        assert!(Categorical::new(vec![1.2, -0.2]).is_err());
        assert!(Categorical::new(vec![]).is_err());
        let p = Categorical::new(vec![0.5, 0.5]).unwrap();
        assert!(p.is_full_support());
        assert!(!Categorical::bernoulli(1.0).unwrap().is_full_support());
        assert_eq!(
            Categorical::bernoulli(0.6).unwrap().probs(),
            &[0.6, 1.0 - 0.6]
        );
    }

    #[test]
    fn symbol_out_of_range() {
        assert!(matches!(
            SymbolSequence::new(vec![0, 2], 2),
            Err(Error::SymbolOutOfRange { symbol: 2, .. })
        ));
    }

    #[test]
    fn interval_and_rounding() {
        assert_eq!(admissible_interval(4, 0.25).unwrap(), 1..=3);
        assert_eq!(admissible_interval(15, 0.2).unwrap(), 3..=12);
        assert_eq!(admissible_interval(2000, 0.2).unwrap(), 400..=1600);
        assert!(matches!(
            admissible_interval(1, 0.25),
            Err(Error::EmptyAdmissibleInterval { .. })
        ));
        assert_eq!(training_length(30, 0.1), 3);
        assert_eq!(training_length(2000, 10.0), 20000);
        assert_eq!(training_length(7, 0.5), 4);
        assert_eq!(change_point(0.5, 2000), 1000);
        assert_eq!(change_point(0.2, 15), 3);
    }

    #[test]
    fn symbol_table_is_order_independent() {
        let a = SymbolTable::from_labels(["T", "A", "G", "C", "A"]);
        let b = SymbolTable::from_labels(["C", "G", "T", "A"]);
        assert_eq!(a, b);
        assert_eq!(a.alphabet_size(), 4);
        assert_eq!(a.index_of("A"), Some(0));
        assert_eq!(a.label(3), Some("T"));
        let s = a.encode(&["G", "A", "T"]).unwrap();
        assert_eq!(s.symbols(), &[2, 0, 3]);
        assert!(a.encode(&["U"]).is_err());
    }

    #[test]
    fn trivial_flag() {
        let mut cfg = ProblemConfig {
            n: 100,
            r: 1.0,
            theta: 0.2,
            lambda: 0.1,
            t: 0.0,
            delta: 29,
            threshold_mode: ThresholdMode::Raw,
            seed: 0,
        };
        assert!(!cfg.is_trivial());
        cfg.delta = 30;
        assert!(cfg.is_trivial());
    }
}
