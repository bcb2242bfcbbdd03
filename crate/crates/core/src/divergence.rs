//! Divergence functionals on categorical distributions.
//!
//! All values are in nats. Sums run over symbols in ascending index order
//! without compensation, which keeps results bit-reproducible for a given
//! input; at alphabet sizes up to 2^16 the accumulated rounding is far below
//! the tolerances used anywhere in this crate.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{check_same_alphabet, Categorical, SubTypeTuple};

/// A non-negative divergence value in nats; `+inf` when absolute continuity
/// fails.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct Nats(f64);

impl Nats {
    pub const ZERO: Nats = Nats(0.0);
    pub const INFINITY: Nats = Nats(f64::INFINITY);

    /// Wraps a computed value, flushing round-off negatives to zero.
    pub fn new(value: f64) -> Self {
        debug_assert!(!value.is_nan());
        Nats(value.max(0.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl fmt::Display for Nats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl From<Nats> for f64 {
    fn from(n: Nats) -> f64 {
        n.0
    }
}

pub(crate) fn kl_raw(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&px, &qx) in p.iter().zip(q) {
        if px > 0.0 {
            if qx <= 0.0 {
                return f64::INFINITY;
            }
            total += px * (px / qx).ln();
        }
    }
    total
}

/// `a D(q1 || m) + D(qt || m)` with `m = (a q1 + qt) / (a + 1)`.
pub(crate) fn gjs_raw(q1: &[f64], qt: &[f64], a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let w = a / (a + 1.0);
    let mut total = 0.0;
    for (&u, &v) in q1.iter().zip(qt) {
        // qt + w (q1 - qt) equals qt exactly when q1 == qt
        let m = v + w * (u - v);
        if u > 0.0 {
            total += a * u * (u / m).ln();
        }
        if v > 0.0 {
            total += v * (v / m).ln();
        }
    }
    total
}

pub(crate) fn chi2_raw(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&px, &qx)| {
            let d = px - qx;
            d * d / qx
        })
        .sum()
}

/// Kullback-Leibler divergence `D(p || q)`.
pub fn kl(p: &Categorical, q: &Categorical) -> Result<Nats> {
    check_same_alphabet(p, q)?;
    Ok(Nats::new(kl_raw(p.probs(), q.probs())))
}

/// Generalized Jensen-Shannon divergence
/// `a D(q1 || m) + D(qt1 || m)` where `m = (a q1 + qt1) / (a + 1)`.
///
/// Zero when `q1 == qt1` or `a == 0`; finite otherwise since the mixture
/// dominates both arguments.
pub fn gjs(q1: &Categorical, qt1: &Categorical, a: f64) -> Result<Nats> {
    check_same_alphabet(q1, qt1)?;
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::param(
            "a",
            format!("{a} must be a finite non-negative number"),
        ));
    }
    Ok(Nats::new(gjs_raw(q1.probs(), qt1.probs(), a)))
}

/// `L = r GJS(head, train1, beta / r) + r GJS(tail, train2, (1 - beta) / r)`.
///
/// The test prefix is paired with the first training type and the suffix
/// with the second. With `beta = j / n` and `r = N / n`,
/// `n L = j D(T_head || M1) + N D(T_train1 || M1) + (n - j) D(T_tail || M2) + N D(T_train2 || M2)`,
/// which is the log-probability exponent of the sub-type class.
pub fn l_statistic(types: &SubTypeTuple, beta: f64, r: f64) -> Result<Nats> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::param("beta", format!("{beta} is not in (0, 1)")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param("r", format!("{r} must be positive")));
    }
    let head = types.head.as_distribution();
    let tail = types.tail.as_distribution();
    let train1 = types.train1.as_distribution();
    let train2 = types.train2.as_distribution();
    check_same_alphabet(&head, &train1)?;
    check_same_alphabet(&tail, &train2)?;
    let value = r * gjs_raw(head.probs(), train1.probs(), beta / r)
        + r * gjs_raw(tail.probs(), train2.probs(), (1.0 - beta) / r);
    Ok(Nats::new(value))
}

/// Chi-square distance `sum (p1 - p2)^2 / p2`; `p2` must have full support.
pub fn chi2(p1: &Categorical, p2: &Categorical) -> Result<Nats> {
    check_same_alphabet(p1, p2)?;
    p2.require_full_support()?;
    Ok(Nats::new(chi2_raw(p1.probs(), p2.probs())))
}

/// Symmetrized chi-square distance `min(chi2(p1 || p2), chi2(p2 || p1))`.
pub fn sym_chi2(p1: &Categorical, p2: &Categorical) -> Result<Nats> {
    let forward = chi2(p1, p2)?;
    let reverse = chi2(p2, p1)?;
    Ok(if forward <= reverse { forward } else { reverse })
}

/// Second-order approximation of `r GJS(eps p1 + (1 - eps) p2, p2, a)` for
/// small `eps`: `r a eps^2 chi2(p1 || p2) / (2 (1 + a))`.
pub fn gjs_quadratic_approx(
    p1: &Categorical,
    p2: &Categorical,
    eps: f64,
    a: f64,
    r: f64,
) -> Result<f64> {
    let c = chi2(p1, p2)?.value();
    Ok(r * a * eps * eps * c / (2.0 * (1.0 + a)))
}
