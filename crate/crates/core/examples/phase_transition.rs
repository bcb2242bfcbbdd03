//! Erasure rate along a grid of normalized resolutions around the optimal
//! one, for growing test lengths.
//!
//! cargo run --release --example phase_transition

use typecpd::model::{Categorical, ProblemConfig, ThresholdMode};
use typecpd::resolution::{optimal_resolution_ld, RegimeQuery};
use typecpd::simulator::{phase_transition_sweep, ChangeFraction, TrialSpec};

fn main() -> typecpd::Result<()> {
    let (r, theta, lambda) = (10.0, 0.2, 0.02);
    let p1 = Categorical::bernoulli(0.6)?;
    let p2 = Categorical::bernoulli(0.2)?;
    let star = optimal_resolution_ld(&RegimeQuery::new(
        p1.clone(),
        p2.clone(),
        r,
        theta,
        lambda,
        0.0,
    )?)?;
    println!(
        "lambda = {lambda}, delta_bar* = {:.4}",
        star.normalized_resolution
    );

    let grid: Vec<f64> = (-4..=4)
        .map(|k| star.normalized_resolution + 0.02 * k as f64)
        .collect();
    print!("{:>6}", "n");
    for d in &grid {
        print!(" {d:>7.3}");
    }
    println!();
    for n in [500, 1000, 2000, 4000] {
        let spec = TrialSpec {
            p1: p1.clone(),
            p2: p2.clone(),
            n,
            r,
            theta,
            change_fraction: ChangeFraction::Fixed(0.5),
            trials: 400,
            seed: 3,
        };
        let config = ProblemConfig {
            n,
            r,
            theta,
            lambda,
            t: 0.0,
            delta: 0,
            threshold_mode: ThresholdMode::Raw,
            seed: 3,
        };
        let rows = phase_transition_sweep(&spec, &config, &grid)?;
        print!("{n:>6}");
        for row in &rows {
            print!(" {:>7.3}", row.report.erasure_rate);
        }
        let undetected: u64 = rows.iter().map(|r| r.report.undetected_count).sum();
        println!("   ({undetected} undetected)");
    }
    println!("entries are erasure rates; columns are delta_bar");
    Ok(())
}
