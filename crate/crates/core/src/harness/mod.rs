//! Experiment runner: training loop, empathy-level sweeps, metrics and artifacts.

mod artifacts;
mod config;
mod metrics;
mod sweep;
mod train;

pub use artifacts::{
    emit_calibration, emit_distance, emit_sweep, emit_training, execute, read_manifest, replay, sweep_distance_table,
    Command, Manifest, MANIFEST_FILE,
};
pub use config::{DistanceConfig, ExperimentConfig, SweepConfig, TrainingConfig};
pub use metrics::{
    altruistic_preference, band_of, count_increases, count_inversions, distance_analysis, distance_csv, pearson,
    significant_increases, Correlation, DistanceRow,
};
pub use sweep::{
    fe_targets, firing_rate_csv, onset_preference, preference_csv, sweep_csv, sweep_empathy_levels, sweep_levels,
    sweep_windows_csv, SweepPoint, SweepResult, ONSET_COUNT,
};
pub use train::{
    converged_summary, episodes_csv, run_training, steps_csv, windowed_altruism, Agent, ConvergedSummary, CueResponse,
    EpisodeMetrics, StepRecord, TrainingRun,
};
