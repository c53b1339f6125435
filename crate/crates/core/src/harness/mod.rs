//! Scenario generation, Monte Carlo error-probability runs, and result files.

mod config;
mod experiment;
mod matching;
mod report;
mod scenario;

pub use config::{ScenarioConfig, UserRegion};
pub use experiment::{
    calibrate_snr, draw_trial_scenario, is_error_event, run_montecarlo, run_spectrum, run_trial, simulate_observations,
    Calibration, Cell, ExperimentReport, SpectrumRun, TrialData, TrialOutcome,
};
pub use matching::match_estimates;
pub use report::{
    emit_calibration, emit_report, emit_spectrum, read_report_csv, write_report_csv, EmittedFiles, ReportRow,
    CALIBRATION_FILE, MANIFEST_FILE, PEAKS_FILE, REPORT_FILE, SNAPSHOTS_FILE, SPECTRUM_FILE,
};
pub use scenario::{draw_scenario, Scenario, MAX_PLACEMENT_RETRIES};
