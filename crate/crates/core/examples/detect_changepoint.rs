//! Running the decoder on one synthetic instance and on labelled data.
//!
//! cargo run --example detect_changepoint

use typecpd::detector::{detect_detailed, l_profile};
use typecpd::model::{Categorical, DecoderOutput, ProblemConfig, SymbolTable, ThresholdMode};
use typecpd::simulator::{generate, ChangeFraction, TrialSpec};

fn main() -> typecpd::Result<()> {
    let spec = TrialSpec {
        p1: Categorical::new(vec![0.5, 0.3, 0.2])?,
        p2: Categorical::new(vec![0.2, 0.3, 0.5])?,
        n: 1000,
        r: 2.0,
        theta: 0.1,
        change_fraction: ChangeFraction::Fixed(0.37),
        trials: 1,
        seed: 42,
    };
    let trial = generate(&spec, 0)?;
    let config = ProblemConfig {
        n: spec.n,
        r: spec.r,
        theta: spec.theta,
        lambda: 0.005,
        t: 0.0,
        delta: 200,
        threshold_mode: ThresholdMode::Raw,
        seed: spec.seed,
    };

    let profile = l_profile(&trial.x, &trial.y1, &trial.y2, config.theta)?;
    println!("true change point {}", trial.change_point);
    println!(
        "profile over {:?}, minimum {:.5} at {}",
        profile.indices(),
        profile.min_value(),
        profile.i_star()
    );
    for j in (100..=900).step_by(100) {
        println!(
            "  L({j:>3}) = {:.5}",
            profile.value_at(j).expect("in range")
        );
    }

    let verdict = detect_detailed(&trial.x, &trial.y1, &trial.y2, &config)?;
    println!(
        "threshold {:.5}, competing minimum {:.5}",
        verdict.threshold, verdict.min_competing_l
    );
    match verdict.output {
        DecoderOutput::ChangePoint(i) => println!("declared change point {i}"),
        DecoderOutput::Erasure => println!("erasure"),
    }

    // the achievability threshold adds a finite-length slack that dominates
    // at this n
    let strict = ProblemConfig {
        threshold_mode: ThresholdMode::LargeDevAchievability,
        ..config
    };
    let verdict = detect_detailed(&trial.x, &trial.y1, &trial.y2, &strict)?;
    println!(
        "with slack: threshold {:.5}, {:?}",
        verdict.threshold, verdict.output
    );

    // labelled observations go through a symbol table first
    let test = [
        "sun", "sun", "rain", "sun", "sun", "rain", "rain", "fog", "rain", "rain",
    ];
    let train1 = ["sun", "sun", "rain", "sun", "sun"];
    let train2 = ["rain", "fog", "rain", "rain", "sun"];
    let table = SymbolTable::from_labels(test.iter().chain(&train1).chain(&train2));
    let (x, y1, y2) = (
        table.encode(&test)?,
        table.encode(&train1)?,
        table.encode(&train2)?,
    );
    let config = ProblemConfig {
        n: x.len(),
        r: 0.5,
        theta: 0.2,
        lambda: 0.01,
        t: 0.0,
        delta: 0,
        threshold_mode: ThresholdMode::Raw,
        seed: 0,
    };
    let verdict = detect_detailed(&x, &y1, &y2, &config)?;
    println!(
        "\nlabelled data: {}",
        serde_json::to_string(&verdict).expect("serializable")
    );
    Ok(())
}
