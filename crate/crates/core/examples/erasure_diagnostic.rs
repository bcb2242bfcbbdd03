//! Normal approximation of the erasure probability next to a simulated
//! estimate.
//!
//! cargo run --release --example erasure_diagnostic

use typecpd::model::{Categorical, ProblemConfig, ThresholdMode};
use typecpd::resolution::{
    boundary_gjs, erasure_normal_approx_at, optimal_resolution_ld, variance_v, RegimeQuery, Side,
};
use typecpd::simulator::{estimate, resolution_for, ChangeFraction, TrialSpec};

fn main() -> typecpd::Result<()> {
    let (r, theta, lambda) = (10.0, 0.2, 0.02);
    let p1 = Categorical::bernoulli(0.6)?;
    let p2 = Categorical::bernoulli(0.2)?;
    let q = RegimeQuery::new(p1.clone(), p2.clone(), r, theta, lambda, 0.0)?;
    let star = optimal_resolution_ld(&q)?.normalized_resolution;
    println!("delta_bar* = {star:.4}");
    println!(
        "V(P1, P2, n/2, r) = {:.5}",
        variance_v(&p1, &p2, 500, 1000, r, Side::LeftOfC)?
    );

    // the worst case for each side puts the boundary split on the edge of
    // the admissible interval, i.e. C = theta n + delta or (1 - theta) n - delta
    for n in [1000, 4000] {
        println!("\nn = {n}");
        println!(
            "{:>9} {:>10} {:>10} {:>10}",
            "delta_bar", "G(left)", "normal", "simulated"
        );
        for offset in [-0.04, -0.02, 0.0, 0.02, 0.04] {
            let delta_bar = star + offset;
            let spec = TrialSpec {
                p1: p1.clone(),
                p2: p2.clone(),
                n,
                r,
                theta,
                change_fraction: ChangeFraction::WorstCaseGrid(vec![
                    theta + delta_bar,
                    1.0 - theta - delta_bar,
                ]),
                trials: 300,
                seed: 5,
            };
            let config = ProblemConfig {
                n,
                r,
                theta,
                lambda,
                t: 0.0,
                delta: resolution_for(n, 0.0, delta_bar),
                threshold_mode: ThresholdMode::Raw,
                seed: 5,
            };
            let report = estimate(&spec, &config)?;
            let b = boundary_gjs(&q, n, delta_bar)?;
            let approx = erasure_normal_approx_at(&q, n, delta_bar, lambda)?;
            println!(
                "{delta_bar:>9.4} {:>10.5} {approx:>10.4} {:>10.4}",
                b.left, report.worst_erasure_rate
            );
        }
    }
    Ok(())
}
