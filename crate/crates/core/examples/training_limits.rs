//! How the optimal resolution approaches its known-distribution limit as
//! the training sequences grow.
//!
//! cargo run --example training_limits

use typecpd::model::Categorical;
use typecpd::resolution::{
    optimal_resolution_ld, optimal_resolution_md, optimal_resolution_r_infinity, Regime,
    RegimeQuery,
};

fn main() -> typecpd::Result<()> {
    let p1 = Categorical::new(vec![0.5, 0.3, 0.2])?;
    let p2 = Categorical::new(vec![0.25, 0.25, 0.5])?;
    let (theta, lambda) = (0.2, 0.01);

    println!("{:>8} {:>10} {:>10}", "r", "LD", "MD");
    for r in [0.1, 0.5, 1.0, 5.0, 10.0, 100.0, 1000.0, 1e5] {
        let q = RegimeQuery::new(p1.clone(), p2.clone(), r, theta, lambda, 0.25)?;
        let ld = optimal_resolution_ld(&q)?;
        let md = optimal_resolution_md(&q)?;
        println!(
            "{r:>8} {:>9.5}{} {:>10.5}",
            ld.normalized_resolution,
            if ld.saturated { "*" } else { " " },
            md.normalized_resolution
        );
    }
    let ld = optimal_resolution_r_infinity(&p1, &p2, theta, lambda, Regime::LargeDeviations)?;
    let md = optimal_resolution_r_infinity(&p1, &p2, theta, lambda, Regime::ModerateDeviations)?;
    println!("{:>8} {ld:>10.5} {md:>10.5}", "inf");
    Ok(())
}
