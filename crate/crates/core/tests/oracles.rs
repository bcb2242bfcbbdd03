use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use typecpd::divergence::gjs;
use typecpd::model::{training_length, Categorical};
use typecpd::resolution::{
    erasure_normal_approx, optimal_resolution_ld, variance_v, RegimeQuery, Side,
};

fn bern(p: f64) -> Categorical {
    Categorical::bernoulli(p).unwrap()
}

fn mix(w: f64, a: &Categorical, b: &Categorical) -> Categorical {
    Categorical::mixture(w, a, b).unwrap()
}

/// Sample variance of `f(X)` with `X ~ q` over `draws` samples.
fn sampled_variance(rng: &mut ChaCha8Rng, q: &[f64], f: &[f64], draws: usize) -> f64 {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..draws {
        let u: f64 = rng.random();
        let x = if u < q[0] { 0 } else { 1 };
        sum += f[x];
        sum_sq += f[x] * f[x];
    }
    let mean = sum / draws as f64;
    sum_sq / draws as f64 - mean * mean
}

#[test]
fn variance_matches_sampling() {
    let (q1, q2) = (bern(0.6), bern(0.2));
    let (n, j, r) = (1000usize, 500usize, 10.0);
    let big_n = training_length(n, r) as f64;
    let m = (n - j) as f64;
    let (a, b) = (q1.probs(), q2.probs());
    let test_log: Vec<f64> = (0..2)
        .map(|x| ((m + big_n) * a[x] / (m * a[x] + big_n * b[x])).ln())
        .collect();
    let train_log: Vec<f64> = (0..2)
        .map(|x| ((m + big_n) * b[x] / (m * a[x] + big_n * b[x])).ln())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sampled = m / n as f64 * sampled_variance(&mut rng, a, &test_log, 1_000_000)
        + r * sampled_variance(&mut rng, b, &train_log, 1_000_000);
    let exact = variance_v(&q1, &q2, j, n, r, Side::LeftOfC).unwrap();
    assert!(
        ((sampled - exact) / exact).abs() < 0.01,
        "{sampled} vs {exact}"
    );
}

#[test]
fn right_side_variance_uses_head_length() {
    let (q1, q2) = (bern(0.7), bern(0.3));
    let left = variance_v(&q1, &q2, 300, 1000, 5.0, Side::LeftOfC).unwrap();
    let right = variance_v(&q1, &q2, 700, 1000, 5.0, Side::RightOfC).unwrap();
    assert!((left - right).abs() < 1e-15);
}

/// `g1` increases and `g2` decreases in the change fraction for a fixed
/// offset `zeta`.
#[test]
fn boundary_gjs_monotone_in_change_point() {
    let (p1, p2) = (bern(0.6), bern(0.2));
    let (theta, r) = (0.2, 10.0);
    for zeta in [0.02, 0.1, 0.25] {
        let g1 = |alpha: f64| {
            let w = zeta / (1.0 - alpha + zeta);
            gjs(&mix(w, &p1, &p2), &p2, (1.0 - alpha + zeta) / r)
                .unwrap()
                .value()
        };
        let g2 = |alpha: f64| {
            let w = alpha / (alpha + zeta);
            gjs(&mix(w, &p1, &p2), &p1, (alpha + zeta) / r)
                .unwrap()
                .value()
        };
        let up: Vec<f64> = (0..=200)
            .map(|i| g1(theta + zeta + (1.0 - 2.0 * theta - zeta) * i as f64 / 200.0))
            .collect();
        assert!(up.windows(2).all(|w| w[1] >= w[0]), "g1 at zeta {zeta}");
        let down: Vec<f64> = (0..=200)
            .map(|i| g2(theta + (1.0 - 2.0 * theta - zeta) * i as f64 / 200.0))
            .collect();
        assert!(down.windows(2).all(|w| w[1] <= w[0]), "g2 at zeta {zeta}");
    }
}

#[test]
fn normal_approximation_decreases_with_n_above_resolution() {
    let q = RegimeQuery::new(bern(0.6), bern(0.2), 10.0, 0.2, 0.02, 0.0).unwrap();
    let star = optimal_resolution_ld(&q).unwrap().normalized_resolution;
    let values: Vec<f64> = [500, 1000, 2000, 10_000, 100_000]
        .iter()
        .map(|&n| erasure_normal_approx(&q, n, star + 0.05).unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[1] <= w[0]), "{values:?}");
}
