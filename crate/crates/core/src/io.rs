//! File formats: symbol sequences, distributions, and number formatting for
//! CSV output.
//!
//! A sequence file is either whitespace-separated integer symbols or a JSON
//! object `{"alphabet_size": k, "symbols": [...]}` (detected by a leading
//! `{`). A distribution file is a JSON list of probabilities.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{Categorical, SymbolSequence};

/// A parsed sequence together with the alphabet size it declared, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawSequence {
    pub symbols: Vec<usize>,
    pub declared_alphabet: Option<usize>,
}

impl RawSequence {
    /// Smallest alphabet that holds every symbol and the declared size.
    pub fn min_alphabet(&self) -> usize {
        let from_symbols = self.symbols.iter().max().map_or(0, |m| m + 1);
        from_symbols.max(self.declared_alphabet.unwrap_or(0))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonSequence {
    alphabet_size: Option<usize>,
    symbols: Vec<usize>,
}

fn parse_error(source: &str, line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source.to_string(),
        line,
        column,
        message: message.into(),
    }
}

/// Parses the text of a sequence file. `source` names the input in
/// diagnostics.
pub fn parse_sequence(text: &str, source: &str) -> Result<RawSequence> {
    let raw = if text.trim_start().starts_with('{') {
        let doc: JsonSequence = serde_json::from_str(text)
            .map_err(|e| parse_error(source, e.line(), e.column(), e.to_string()))?;
        if let Some(k) = doc.alphabet_size {
            if let Some(&bad) = doc.symbols.iter().find(|&&s| s >= k) {
                return Err(Error::SymbolOutOfRange {
                    symbol: bad,
                    alphabet_size: k,
                });
            }
        }
        RawSequence {
            symbols: doc.symbols,
            declared_alphabet: doc.alphabet_size,
        }
    } else {
        let mut symbols = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let mut rest = line;
            let mut offset = 0;
            while let Some(start) = rest.find(|c: char| !c.is_whitespace()) {
                let token_len = rest[start..]
                    .find(char::is_whitespace)
                    .unwrap_or(rest.len() - start);
                let token = &rest[start..start + token_len];
                let column = line[..offset + start].chars().count() + 1;
                let value = token.parse::<usize>().map_err(|_| {
                    parse_error(
                        source,
                        line_no + 1,
                        column,
                        format!("expected a non-negative integer symbol, found `{token}`"),
                    )
                })?;
                symbols.push(value);
                offset += start + token_len;
                rest = &rest[start + token_len..];
            }
        }
        RawSequence {
            symbols,
            declared_alphabet: None,
        }
    };
    if raw.symbols.is_empty() {
        return Err(parse_error(source, 1, 1, "empty sequence"));
    }
    Ok(raw)
}

pub fn read_sequence(path: &Path) -> Result<RawSequence> {
    let text = std::fs::read_to_string(path)?;
    parse_sequence(&text, &path.display().to_string())
}

/// Builds sequences over a shared alphabet: the largest declared size or the
/// largest symbol plus one, whichever is bigger.
pub fn unify_alphabet(raw: &[RawSequence]) -> Result<Vec<SymbolSequence>> {
    let k = raw.iter().map(RawSequence::min_alphabet).max().unwrap_or(0);
    raw.iter()
        .map(|r| SymbolSequence::new(r.symbols.clone(), k))
        .collect()
}

/// Parses a distribution argument: `bern:p` for `(p, 1 - p)`, otherwise a
/// path to a JSON list of probabilities.
pub fn parse_distribution(arg: &str) -> Result<Categorical> {
    if let Some(p) = arg.strip_prefix("bern:") {
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|_| Error::InvalidDistribution(format!("`{arg}`: `{p}` is not a number")))?;
        return Categorical::bernoulli(p);
    }
    let text = std::fs::read_to_string(arg)?;
    parse_distribution_json(&text, arg)
}

pub fn parse_distribution_json(text: &str, source: &str) -> Result<Categorical> {
    let probs: Vec<f64> = serde_json::from_str(text)
        .map_err(|e| parse_error(source, e.line(), e.column(), e.to_string()))?;
    Categorical::new(probs)
}

/// Parses a list of reals given as `a,b,c` or as `start:stop:count`
/// (inclusive, evenly spaced).
pub fn parse_real_list(arg: &str, name: &'static str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::param(name, format!("`{arg}`: {what}"));
    let parts: Vec<&str> = arg.split(':').collect();
    if parts.len() == 3 {
        let start: f64 = parts[0].trim().parse().map_err(|_| bad("bad start"))?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad("bad stop"))?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad("bad count"))?;
        return Ok(match count {
            0 => Vec::new(),
            1 => vec![start],
            _ => (0..count)
                .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                .collect(),
        });
    }
    arg.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| bad(&format!("`{s}` is not a number")))
        })
        .collect()
}

/// Formats `x` with six significant digits, trimming trailing zeros.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
