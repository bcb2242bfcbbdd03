//! Divergence toolkit on a pair of Bernoulli distributions and on the sub-types
//! of a short sequence.
//!
//! cargo run --example divergences

use typecpd::divergence::{chi2, gjs, gjs_quadratic_approx, kl, l_statistic, sym_chi2};
use typecpd::model::{split_types, Categorical, SymbolSequence};

fn main() -> typecpd::Result<()> {
    let p1 = Categorical::bernoulli(0.6)?;
    let p2 = Categorical::bernoulli(0.2)?;

    println!("P1 = {p1}, P2 = {p2}");
    println!("D(P1 || P2)          = {:.6}", kl(&p1, &p2)?);
    println!("D(P2 || P1)          = {:.6}", kl(&p2, &p1)?);
    for a in [0.1, 1.0, 10.0] {
        println!("GJS(P1, P2, {a:>4})    = {:.6}", gjs(&p1, &p2, a)?);
    }
    println!("chi2(P1 || P2)       = {:.6}", chi2(&p1, &p2)?);
    println!("chi2(P2 || P1)       = {:.6}", chi2(&p2, &p1)?);
    println!("symmetrized chi2     = {:.6}", sym_chi2(&p1, &p2)?);

    // a small perturbation of P2 towards P1 against its quadratic predictor
    let (r, a) = (10.0, 0.08);
    println!(
        "\n{:>8} {:>14} {:>14} {:>8}",
        "eps", "r GJS", "quadratic", "ratio"
    );
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let mix = Categorical::mixture(eps, &p1, &p2)?;
        let exact = r * gjs(&mix, &p2, a)?.value();
        let approx = gjs_quadratic_approx(&p1, &p2, eps, a, r)?;
        println!(
            "{eps:>8.0e} {exact:>14.6e} {approx:>14.6e} {:>8.5}",
            exact / approx
        );
    }

    let x = SymbolSequence::new(vec![0, 0, 1, 1], 2)?;
    let y1 = SymbolSequence::new(vec![0, 0], 2)?;
    let y2 = SymbolSequence::new(vec![1, 1], 2)?;
    println!("\nL statistic for x = 0011, y1 = 00, y2 = 11 (r = 1/2):");
    for j in 1..4 {
        let types = split_types(&x, j, &y1, &y2)?;
        let l = l_statistic(&types, j as f64 / 4.0, 0.5)?;
        println!(
            "  j = {j}: head {:?}, tail {:?}, L = {l:.6}",
            types.head.counts(),
            types.tail.counts()
        );
    }
    Ok(())
}
