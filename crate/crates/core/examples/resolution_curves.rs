//! Optimal normalized resolution against the exponent lambda, in both
//! regimes, for several values of theta and r.
//!
//! cargo run --example resolution_curves [-- out.csv]

use std::fmt::Write as _;

use typecpd::io::format_sig6;
use typecpd::model::Categorical;
use typecpd::resolution::{
    g_min_supremum, optimal_resolution_ld, optimal_resolution_md, resolution_curve, RegimeQuery,
};

fn main() -> typecpd::Result<()> {
    let p1 = Categorical::bernoulli(0.6)?;
    let p2 = Categorical::bernoulli(0.2)?;
    let lambdas: Vec<f64> = (1..=20).map(|i| 0.0025 * i as f64).collect();

    let mut csv = String::from("regime,theta,r,lambda,delta_bar_star,saturated\n");
    for (label, t) in [("ld", 0.0), ("md", 0.25)] {
        for theta in [0.1, 0.2, 0.3, 0.4] {
            for r in [1.0, 10.0, 100.0] {
                let q = RegimeQuery::new(p1.clone(), p2.clone(), r, theta, 0.0, t)?;
                for (lambda, res) in lambdas.iter().zip(resolution_curve(&q, &lambdas)?) {
                    let _ = writeln!(
                        csv,
                        "{label},{theta},{r},{},{},{}",
                        format_sig6(*lambda),
                        format_sig6(res.normalized_resolution),
                        res.saturated
                    );
                }
            }
        }
    }

    println!("r = 10, theta = 0.2");
    let q = RegimeQuery::new(p1.clone(), p2.clone(), 10.0, 0.2, 0.0, 0.25)?;
    println!("sup G_min = {:.6}", g_min_supremum(&p1, &p2, 0.2, 10.0)?);
    println!("{:>8} {:>10} {:>10}", "lambda", "LD", "MD");
    for &lambda in lambdas.iter().step_by(2) {
        let ld = optimal_resolution_ld(&q.with_lambda(lambda))?;
        let md = optimal_resolution_md(&q.with_lambda(lambda))?;
        println!(
            "{lambda:>8.4} {:>9.5}{} {:>10.5}",
            ld.normalized_resolution,
            if ld.saturated { "*" } else { " " },
            md.normalized_resolution
        );
    }
    println!("(* saturated at (1 - 2 theta) / 2)");

    match std::env::args().nth(1) {
        Some(path) => {
            std::fs::write(&path, csv)?;
            println!("wrote {path}");
        }
        None => println!("pass a file name to save all {} curves", 24),
    }
    Ok(())
}
