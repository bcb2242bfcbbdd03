//! Offline single change-point detection with training sequences.
//!
//! A test sequence switches from `P1` to `P2` at an unknown point; two
//! training sequences drawn from `P1` and `P2` are available. The crate
//! provides the type-based decoder with an erasure option, the divergences
//! it is built from, calculators for the optimal resolution in the large-
//! and moderate-deviations regimes, and a Monte Carlo harness.

pub mod cli;
pub mod detector;
pub mod divergence;
pub mod error;
pub mod io;
pub mod manifest;
pub mod model;
pub mod resolution;
pub mod simulator;

pub use detector::{detect, detect_detailed, l_profile, threshold_value, LProfile, Verdict};
pub use divergence::{chi2, gjs, kl, l_statistic, sym_chi2, Nats};
pub use error::{Error, Result};
pub use model::{
    admissible_interval, split_types, type_of, Categorical, DecoderOutput, ProblemConfig,
    SubTypeTuple, SymbolSequence, SymbolTable, ThresholdMode, TypeVector,
};
pub use resolution::{
    g_min, invert_g_min, optimal_resolution_ld, optimal_resolution_md,
    optimal_resolution_r_infinity, Inversion, Regime, RegimeQuery, ResolutionResult,
};
pub use simulator::{estimate, generate, phase_transition_sweep, MonteCarloReport, TrialSpec};
