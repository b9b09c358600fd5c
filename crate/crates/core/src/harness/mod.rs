//! Configuration, seeded sweeps, CSV emission and the canned experiments.

pub mod config;
pub mod experiments;
pub mod plot;
pub mod sweep;

pub use config::{
    load, load_file, ConcentrationConfig, CounterexampleConfig, DumpConfig, ExperimentConfig,
    RecoverConfig, RipConfig, RipMethodKind, RipTarget,
};
pub use experiments::{
    read_ensemble, read_observation_csv, run_concentration, run_counterexample, run_dump,
    run_recover, run_rip, write_counterexample_csv, write_estimate_csv, CounterexampleRow,
};
pub use sweep::{
    cells, median, run_sweep, run_sweep_to_file, run_sweep_with, trial_seed, write_sweep_csv, Cell,
    SweepRow, SWEEP_COLUMNS,
};
