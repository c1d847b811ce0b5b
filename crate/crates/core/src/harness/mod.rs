//! Experiment configuration, the simultaneous-move runner, CSV emission and
//! trace verification.
//!
//! Randomness (bandit sampling only) comes from `Xoshiro256PlusPlus` seeded
//! with `seed_from_u64(seed)`; player `i` draws from the stream obtained after
//! `i + 1` calls to `jump`. Runs are bit-reproducible across platforms.

pub mod config;
pub mod output;
pub mod runner;
pub mod verify;

pub use crate::rates::theory_rate;
pub use config::{AdversaryKind, AdversarySpec, CheckToggles, EtaSpec, ExperimentConfig, GameSpec, RatePreset};
pub use output::{csv_rows, load_record, read_csv, sidecar_path, write_csv, write_outputs, CsvRow};
pub use runner::{player_streams, run_experiment, RunRecord};
pub use verify::{csv_consistency, verify, VerifyReport};
