//! Monte Carlo estimate of undetected-error and erasure rates, worst case
//! over a grid of change points.
//!
//! cargo run --release --example monte_carlo

use typecpd::model::{Categorical, ProblemConfig, ThresholdMode};
use typecpd::resolution::{optimal_resolution_ld, RegimeQuery};
use typecpd::simulator::{estimate, resolution_for, ChangeFraction, TrialSpec};

fn main() -> typecpd::Result<()> {
    let (n, r, theta, lambda) = (1000, 10.0, 0.2, 0.01);
    let p1 = Categorical::bernoulli(0.6)?;
    let p2 = Categorical::bernoulli(0.2)?;
    let q = RegimeQuery::new(p1.clone(), p2.clone(), r, theta, lambda, 0.0)?;
    let star = optimal_resolution_ld(&q)?.normalized_resolution;
    let delta = resolution_for(n, 0.0, star + 0.05);

    let spec = TrialSpec {
        p1,
        p2,
        n,
        r,
        theta,
        change_fraction: ChangeFraction::grid(theta, 11),
        trials: 300,
        seed: 1,
    };
    let config = ProblemConfig {
        n,
        r,
        theta,
        lambda,
        t: 0.0,
        delta,
        threshold_mode: ThresholdMode::Raw,
        seed: 1,
    };
    let report = estimate(&spec, &config)?;

    println!(
        "delta_bar* = {star:.4}, delta = {delta}, {} trials in total",
        report.trials
    );
    println!(
        "{:>6} {:>6} {:>10} {:>10} {:>10}",
        "alpha", "C", "undetected", "erasure", "+/-"
    );
    for row in &report.per_change_point {
        println!(
            "{:>6.2} {:>6} {:>10.4} {:>10.4} {:>10.4}",
            row.alpha,
            row.change_point,
            row.undetected_rate,
            row.erasure_rate,
            row.wilson_95_halfwidth
        );
    }
    println!(
        "pooled: undetected {:.4}, erasure {:.4}; worst case: undetected {:.4}, erasure {:.4}",
        report.undetected_rate,
        report.erasure_rate,
        report.worst_undetected_rate,
        report.worst_erasure_rate
    );
    Ok(())
}
