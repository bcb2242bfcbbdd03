//! Optimal normalized resolution in the large- and moderate-deviations
//! regimes, the infinite-training limits, and a normal-approximation
//! diagnostic for the erasure probability.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::detector::threshold_value;
use crate::divergence::Nats;
use crate::divergence::{chi2_raw, gjs_raw, kl_raw, sym_chi2};
use crate::error::{Error, Result};
use crate::model::{check_same_alphabet, training_length, Categorical, ThresholdMode};

/// Distance from the right end of the resolution domain at which the
/// supremum of `G_min` is evaluated.
pub const SUPREMUM_OFFSET: f64 = 1e-12;
/// A target within this distance of the supremum counts as saturated.
pub const SATURATION_SLACK: f64 = 1e-9;
const BISECTION_MAX_ITER: usize = 200;
const BISECTION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    LargeDeviations,
    ModerateDeviations,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::LargeDeviations => "ld",
            Regime::ModerateDeviations => "md",
        }
    }
}

/// Inputs of the optimal-resolution formulas.
#[derive(Clone, Debug)]
pub struct RegimeQuery {
    pub p1: Categorical,
    pub p2: Categorical,
    pub r: f64,
    pub theta: f64,
    pub lambda: f64,
    pub t: f64,
}

impl RegimeQuery {
    pub fn new(
        p1: Categorical,
        p2: Categorical,
        r: f64,
        theta: f64,
        lambda: f64,
        t: f64,
    ) -> Result<Self> {
        let q = Self {
            p1,
            p2,
            r,
            theta,
            lambda,
            t,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        check_same_alphabet(&self.p1, &self.p2)?;
        self.p1.require_full_support()?;
        self.p2.require_full_support()?;
        if !self.p1.differs_from(&self.p2) {
            return Err(Error::IdenticalDistributions);
        }
        check_theta_r(self.theta, self.r)?;
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::param(
                "lambda",
                format!("{} must be non-negative", self.lambda),
            ));
        }
        if !(0.0..0.5).contains(&self.t) {
            return Err(Error::param("t", format!("{} is not in [0, 1/2)", self.t)));
        }
        Ok(())
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    /// `(1 - 2 theta) / 2`.
    pub fn cap(&self) -> f64 {
        resolution_cap(self.theta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResolutionResult {
    pub normalized_resolution: f64,
    pub regime: Regime,
    /// Set when the target exponent is out of reach and the result is the
    /// cap `(1 - 2 theta) / 2`.
    pub saturated: bool,
}

/// Outcome of inverting `G_min`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Inversion {
    Resolution(f64),
    Saturated,
}

/// `(1 - 2 theta) / 2`, the largest meaningful normalized resolution.
pub fn resolution_cap(theta: f64) -> f64 {
    (1.0 - 2.0 * theta) / 2.0
}

fn check_theta_r(theta: f64, r: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 0.5) {
        return Err(Error::param("theta", format!("{theta} is not in (0, 1/2)")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param("r", format!("{r} must be positive")));
    }
    Ok(())
}

fn check_pair(p1: &Categorical, p2: &Categorical) -> Result<()> {
    check_same_alphabet(p1, p2)?;
    p1.require_full_support()?;
    p2.require_full_support()
}

fn g_min_raw(delta_bar: f64, p1: &[f64], p2: &[f64], theta: f64, r: f64) -> f64 {
    let t = delta_bar / (1.0 - theta);
    let a = (1.0 - theta) / r;
    let toward_p1 = Categorical::mixture_unchecked(t, p1, p2);
    let toward_p2 = Categorical::mixture_unchecked(t, p2, p1);
    let left = r * gjs_raw(toward_p1.probs(), p2, a);
    let right = r * gjs_raw(toward_p2.probs(), p1, a);
    left.min(right)
}

/// Limit of `G_min` as `r -> inf`: `(1 - theta)` times the smaller of the two
/// plain KL divergences between the boundary mixtures and the far
/// distribution.
fn g_min_limit_raw(delta_bar: f64, p1: &[f64], p2: &[f64], theta: f64) -> f64 {
    let t = delta_bar / (1.0 - theta);
    let toward_p1 = Categorical::mixture_unchecked(t, p1, p2);
    let toward_p2 = Categorical::mixture_unchecked(t, p2, p1);
    (1.0 - theta) * kl_raw(toward_p1.probs(), p2).min(kl_raw(toward_p2.probs(), p1))
}

/// `G_min(delta_bar)`: the smaller of the two boundary GJS values at
/// normalized resolution `delta_bar`, using mixtures with weights
/// `t = delta_bar / (1 - theta)` and `1 - t`. Strictly increasing on
/// `[0, (1 - 2 theta) / 2)` with `G_min(0) = 0`.
pub fn g_min(
    delta_bar: f64,
    p1: &Categorical,
    p2: &Categorical,
    theta: f64,
    r: f64,
) -> Result<Nats> {
    check_pair(p1, p2)?;
    check_theta_r(theta, r)?;
    if !(delta_bar >= 0.0 && delta_bar < resolution_cap(theta)) {
        return Err(Error::param(
            "delta_bar",
            format!("{delta_bar} is not in [0, {})", resolution_cap(theta)),
        ));
    }
    Ok(Nats::new(g_min_raw(
        delta_bar,
        p1.probs(),
        p2.probs(),
        theta,
        r,
    )))
}

/// `G_min` evaluated just inside the right end of its domain.
pub fn g_min_supremum(p1: &Categorical, p2: &Categorical, theta: f64, r: f64) -> Result<Nats> {
    g_min(resolution_cap(theta) - SUPREMUM_OFFSET, p1, p2, theta, r)
}

/// Bisection for an increasing `f` on `[lo, hi]`, returning `x` with
/// `f(x) ~ target`.
fn bisect_increasing(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn invert_increasing(f: impl Fn(f64) -> f64, lambda: f64, theta: f64) -> Result<Inversion> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::param(
            "lambda",
            format!("{lambda} must be non-negative"),
        ));
    }
    if lambda == 0.0 {
        return Ok(Inversion::Resolution(0.0));
    }
    let hi = resolution_cap(theta) - SUPREMUM_OFFSET;
    if lambda >= f(hi) - SATURATION_SLACK {
        return Ok(Inversion::Saturated);
    }
    Ok(Inversion::Resolution(bisect_increasing(f, lambda, 0.0, hi)))
}

/// Inverse of `G_min` by bisection; targets at or above the supremum are
/// reported as [`Inversion::Saturated`].
pub fn invert_g_min(
    lambda: f64,
    p1: &Categorical,
    p2: &Categorical,
    theta: f64,
    r: f64,
) -> Result<Inversion> {
    check_pair(p1, p2)?;
    check_theta_r(theta, r)?;
    let (a, b) = (p1.probs(), p2.probs());
    invert_increasing(|d| g_min_raw(d, a, b, theta, r), lambda, theta)
}

/// Large-deviations optimal normalized resolution: `G_min^{-1}(lambda)` below
/// the supremum of `G_min`, the cap `(1 - 2 theta) / 2` otherwise.
pub fn optimal_resolution_ld(q: &RegimeQuery) -> Result<ResolutionResult> {
    q.validate()?;
    let (value, saturated) = match invert_g_min(q.lambda, &q.p1, &q.p2, q.theta, q.r)? {
        Inversion::Resolution(d) => (d, false),
        Inversion::Saturated => (q.cap(), true),
    };
    Ok(ResolutionResult {
        normalized_resolution: value,
        regime: Regime::LargeDeviations,
        saturated,
    })
}

/// Moderate-deviations optimal normalized resolution
/// `sqrt(2 lambda (1 - theta)(1 - theta + r) / (r sym_chi2(p1, p2)))`.
///
/// Does not depend on `t`, which only sets the physical scale `n^{1 - t/2}`.
pub fn optimal_resolution_md(q: &RegimeQuery) -> Result<ResolutionResult> {
    q.validate()?;
    if q.t <= 0.0 {
        return Err(Error::param("t", "moderate deviations needs t in (0, 1/2)"));
    }
    let chi = sym_chi2(&q.p1, &q.p2)?.value();
    let value = (2.0 * q.lambda * (1.0 - q.theta) * (1.0 - q.theta + q.r) / (q.r * chi)).sqrt();
    Ok(ResolutionResult {
        normalized_resolution: value,
        regime: Regime::ModerateDeviations,
        saturated: false,
    })
}

/// Dispatches on `q.t`: zero is the large-deviations regime.
pub fn optimal_resolution(q: &RegimeQuery) -> Result<ResolutionResult> {
    if q.t == 0.0 {
        optimal_resolution_ld(q)
    } else {
        optimal_resolution_md(q)
    }
}

/// Evaluates a resolution curve over a grid of exponents, in parallel,
/// preserving grid order.
pub fn resolution_curve(q: &RegimeQuery, lambdas: &[f64]) -> Result<Vec<ResolutionResult>> {
    lambdas
        .par_iter()
        .map(|&lambda| optimal_resolution(&q.with_lambda(lambda)))
        .collect()
}

/// Optimal normalized resolution when the training sequences are infinitely
/// long relative to the test sequence (`r -> inf`).
pub fn optimal_resolution_r_infinity(
    p1: &Categorical,
    p2: &Categorical,
    theta: f64,
    lambda: f64,
    regime: Regime,
) -> Result<f64> {
    check_pair(p1, p2)?;
    if !p1.differs_from(p2) {
        return Err(Error::IdenticalDistributions);
    }
    check_theta_r(theta, 1.0)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::param(
            "lambda",
            format!("{lambda} must be non-negative"),
        ));
    }
    match regime {
        Regime::LargeDeviations => {
            let (a, b) = (p1.probs(), p2.probs());
            Ok(
                match invert_increasing(|d| g_min_limit_raw(d, a, b, theta), lambda, theta)? {
                    Inversion::Resolution(d) => d,
                    Inversion::Saturated => resolution_cap(theta),
                },
            )
        }
        Regime::ModerateDeviations => {
            let chi = sym_chi2(p1, p2)?.value();
            Ok((2.0 * lambda * (1.0 - theta) / chi).sqrt())
        }
    }
}

/// Which side of the true change point the candidate split lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    LeftOfC,
    RightOfC,
}

/// `Var_Q[f] = sum_x Q(x) (f(x) - E_Q f)^2`, exact over the alphabet.
fn categorical_variance(q: &[f64], values: &[f64]) -> f64 {
    let mean: f64 = q.iter().zip(values).map(|(p, v)| p * v).sum();
    q.iter()
        .zip(values)
        .map(|(p, v)| p * (v - mean) * (v - mean))
        .sum()
}

/// Variance of the per-sample log-likelihood terms of `L` near a boundary.
/// `m` is the length of the test segment compared against the training
/// sequence of length `big_n` (`n - j` on the left of `C`, `j` on the right).
fn variance_raw(q1: &[f64], q2: &[f64], m: f64, big_n: f64, n: f64, r: f64) -> f64 {
    // ln((m + N) Q1 / (m Q1 + N Q2)) and ln((m + N) Q2 / (m Q1 + N Q2)),
    // written with ln_1p so that Q1 == Q2 gives exact zeros.
    let (test_terms, train_terms): (Vec<f64>, Vec<f64>) = q1
        .iter()
        .zip(q2)
        .map(|(&a, &b)| {
            let denom = m * a + big_n * b;
            (
                (big_n * (a - b) / denom).ln_1p(),
                (m * (b - a) / denom).ln_1p(),
            )
        })
        .unzip();
    m / n * categorical_variance(q1, &test_terms) + r * categorical_variance(q2, &train_terms)
}

/// The variance-like quantity `V(Q1, Q2, j, r)` with `N = ceil(r n)`.
///
/// Left of `C` the test segment is `x[j+1..n]` (length `n - j`); right of
/// `C` it is `x[1..j]`.
pub fn variance_v(
    q1: &Categorical,
    q2: &Categorical,
    j: usize,
    n: usize,
    r: f64,
    side: Side,
) -> Result<f64> {
    check_pair(q1, q2)?;
    if n < 2 || j == 0 || j >= n {
        return Err(Error::SplitOutOfRange {
            split: j,
            max: n.saturating_sub(1),
        });
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param("r", format!("{r} must be positive")));
    }
    let big_n = training_length(n, r) as f64;
    let m = match side {
        Side::LeftOfC => (n - j) as f64,
        Side::RightOfC => j as f64,
    };
    Ok(variance_raw(q1.probs(), q2.probs(), m, big_n, n as f64, r))
}

/// Boundary GJS values seen by the decoder at the worst-case change points
/// for a given normalized resolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryGjs {
    /// `r GJS(P~-, P2, (1 - theta) / r)` with `P~- = (d P1 + (1 - theta - d) P2) / (1 - theta)`.
    pub left: f64,
    /// `r GJS(P~+, P1, (1 - theta) / r)` with `P~+ = ((1 - theta - d) P1 + d P2) / (1 - theta)`.
    pub right: f64,
}

/// Normalized offset `d = delta_bar n^{-t/2}` of the boundary split from the
/// change point.
fn boundary_offset(q: &RegimeQuery, n: usize, delta_bar: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::param("n", "test length must be at least 2"));
    }
    let d = delta_bar * (n as f64).powf(-q.t / 2.0);
    if !(d >= 0.0 && d <= q.cap()) {
        return Err(Error::param(
            "delta_bar",
            format!("scaled offset {d} is not in [0, {}]", q.cap()),
        ));
    }
    Ok(d)
}

pub fn boundary_gjs(q: &RegimeQuery, n: usize, delta_bar: f64) -> Result<BoundaryGjs> {
    q.validate()?;
    let d = boundary_offset(q, n, delta_bar)?;
    let (p1, p2) = (q.p1.probs(), q.p2.probs());
    let w = d / (1.0 - q.theta);
    let a = (1.0 - q.theta) / q.r;
    let minus = Categorical::mixture_unchecked(w, p1, p2);
    let plus = Categorical::mixture_unchecked(w, p2, p1);
    Ok(BoundaryGjs {
        left: q.r * gjs_raw(minus.probs(), p2, a),
        right: q.r * gjs_raw(plus.probs(), p1, a),
    })
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Normal approximation of the erasure probability for an explicit decoder
/// threshold.
///
/// For each side the worst-case change point puts the boundary split at the
/// edge of the admissible interval; the approximation there is
/// `Phi((threshold - r GJS) sqrt(n^2 / ((n - j + r n) V)))`. The larger of the
/// two sides is returned. This is a diagnostic, not a bound.
pub fn erasure_normal_approx_at(
    q: &RegimeQuery,
    n: usize,
    delta_bar: f64,
    threshold: f64,
) -> Result<f64> {
    let boundary = boundary_gjs(q, n, delta_bar)?;
    let d = boundary_offset(q, n, delta_bar)?;
    let (p1, p2) = (q.p1.probs(), q.p2.probs());
    let nf = n as f64;
    let w = d / (1.0 - q.theta);
    // both worst cases compare a segment of length (1 - theta) n
    let m = (1.0 - q.theta) * nf;
    let big_n = q.r * nf;
    let minus = Categorical::mixture_unchecked(w, p1, p2);
    let plus = Categorical::mixture_unchecked(w, p2, p1);
    let v_left = variance_raw(minus.probs(), p2, m, big_n, nf, q.r);
    let v_right = variance_raw(plus.probs(), p1, m, big_n, nf, q.r);

    let side = |gjs_value: f64, v: f64| {
        let gap = threshold - gjs_value;
        if v > 0.0 {
            std_normal_cdf(gap * (nf * nf / ((m + big_n) * v)).sqrt())
        } else if gap > 0.0 {
            1.0
        } else if gap < 0.0 {
            0.0
        } else {
            0.5
        }
    };
    Ok(side(boundary.left, v_left).max(side(boundary.right, v_right)))
}

/// [`erasure_normal_approx_at`] with the threshold the achievability decoder
/// uses: `lambda + sigma_n`, scaled by `n^{-t}` when `t > 0`.
pub fn erasure_normal_approx(q: &RegimeQuery, n: usize, delta_bar: f64) -> Result<f64> {
    q.validate()?;
    let mode = if q.t == 0.0 {
        ThresholdMode::LargeDevAchievability
    } else {
        ThresholdMode::ModerateDev
    };
    let threshold = threshold_value(
        mode,
        q.lambda,
        n,
        training_length(n, q.r),
        q.p1.alphabet_size(),
        q.t,
    )?;
    erasure_normal_approx_at(q, n, delta_bar, threshold.value())
}

/// Closed form of the moderate-deviations resolution computed from the
/// one-sided chi-square values directly.
#[doc(hidden)]
pub fn md_from_one_sided(q: &RegimeQuery) -> f64 {
    let forward = chi2_raw(q.p1.probs(), q.p2.probs());
    let reverse = chi2_raw(q.p2.probs(), q.p1.probs());
    let chi = forward.min(reverse);
    (2.0 * q.lambda * (1.0 - q.theta) * (1.0 - q.theta + q.r) / (q.r * chi)).sqrt()
}
