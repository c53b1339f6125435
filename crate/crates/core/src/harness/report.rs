use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::experiment::{Calibration, ExperimentReport, SpectrumRun};
use crate::error::{Error, Result};
use crate::estimator::Method;

pub const REPORT_FILE: &str = "report.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const PEAKS_FILE: &str = "peaks.csv";
pub const CALIBRATION_FILE: &str = "calibration.csv";
pub const SNAPSHOTS_FILE: &str = "snapshots.csv";

const REPORT_HEADER: [&str; 7] = ["method", "L", "Q", "snr_db", "trials", "errors", "error_probability"];

/// One line of the report CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: Method,
    #[serde(rename = "L")]
    pub block_len: usize,
    #[serde(rename = "Q")]
    pub num_blocks: usize,
    pub snr_db: f64,
    pub trials: usize,
    pub errors: usize,
    pub error_probability: f64,
}

impl From<&ExperimentReport> for ReportRow {
    fn from(r: &ExperimentReport) -> Self {
        Self {
            method: r.method,
            block_len: r.cell.block_len,
            num_blocks: r.cell.num_blocks,
            snr_db: r.snr_db,
            trials: r.trials,
            errors: r.errors,
            error_probability: r.error_probability,
        }
    }
}

#[derive(Debug, Serialize)]
struct CellSummary<'a> {
    method: Method,
    block_len: usize,
    num_blocks: usize,
    trials: usize,
    errors: usize,
    error_probability: f64,
    failed_trials: usize,
    elapsed_ms: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a ScenarioConfig>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    package: &'static str,
    version: &'static str,
    command: &'a str,
    config: Option<&'a ScenarioConfig>,
    cells: Vec<CellSummary<'a>>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Paths written by [`emit_report`].
#[derive(Debug, Clone)]
pub struct EmittedFiles {
    pub report_csv: PathBuf,
    pub manifest: PathBuf,
}

/// Writes the report CSV into `writer`. The body depends only on the reports.
pub fn write_report_csv<W: std::io::Write>(reports: &[ExperimentReport], writer: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(REPORT_HEADER)?;
    for r in reports {
        w.serialize(ReportRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report_csv(path: &Path) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err(path))
}

/// Writes `report.csv` and `manifest.json` into `dir`, creating it if needed.
pub fn emit_report(reports: &[ExperimentReport], dir: &Path) -> Result<EmittedFiles> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let report_csv = dir.join(REPORT_FILE);
    let file = fs::File::create(&report_csv).map_err(io_err(&report_csv))?;
    write_report_csv(reports, file).map_err(csv_err(&report_csv))?;

    let manifest_path = dir.join(MANIFEST_FILE);
    let base = reports.first().map(|r| &r.config);
    let cells = reports
        .iter()
        .map(|r| CellSummary {
            method: r.method,
            block_len: r.cell.block_len,
            num_blocks: r.cell.num_blocks,
            trials: r.trials,
            errors: r.errors,
            error_probability: r.error_probability,
            failed_trials: r.outcomes.iter().filter(|o| o.failure.is_some()).count(),
            elapsed_ms: r.elapsed_ms,
            config: None,
        })
        .collect();
    write_manifest(
        &manifest_path,
        &Manifest {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: "montecarlo",
            config: base,
            cells,
        },
    )?;
    Ok(EmittedFiles {
        report_csv,
        manifest: manifest_path,
    })
}

fn write_manifest(path: &Path, manifest: &Manifest<'_>) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(path, text + "\n").map_err(io_err(path))
}

/// Writes `spectrum.csv`, `peaks.csv`, `snapshots.csv` and `manifest.json`
/// for a spectrum run.
pub fn emit_spectrum(run: &SpectrumRun, cfg: &ScenarioConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let spectrum = dir.join(SPECTRUM_FILE);
    run.estimation.spectrum.write_csv(&spectrum)?;

    let peaks = dir.join(PEAKS_FILE);
    let mut w = csv::Writer::from_path(&peaks).map_err(csv_err(&peaks))?;
    w.write_record(["rank", "estimate_deg", "normalized_power"]).map_err(csv_err(&peaks))?;
    let max = run.estimation.spectrum.values.iter().cloned().fold(0.0, f64::max);
    for (i, p) in run.estimation.spectrum.peaks.iter().enumerate() {
        // refined peaks can exceed the coarse-grid maximum
        let norm = if max > 0.0 { p.value / max } else { p.value };
        w.write_record(&[(i + 1).to_string(), format!("{:.4}", p.angle.degrees()), norm.to_string()])
            .map_err(csv_err(&peaks))?;
    }
    w.flush().map_err(io_err(&peaks))?;

    let snapshots = dir.join(SNAPSHOTS_FILE);
    run.observations.write_csv(&snapshots)?;

    let manifest = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&serde_json::json!({
        "package": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": "spectrum",
        "method": run.estimation.method,
        "config": cfg,
        "true_aoas_deg": run.scenario.true_aoas,
        "estimates_deg": run.estimation.estimates,
        "errors_deg": run.errors_deg.iter().map(|e| if e.is_finite() { Some(*e) } else { None }).collect::<Vec<_>>(),
        "eigenvalues": run.estimation.eigenvalues,
        "noise_power": run.observations.noise_power,
        "underdetected": run.estimation.underdetected,
    }))
    .expect("manifest serializes");
    fs::write(&manifest, text + "\n").map_err(io_err(&manifest))?;
    Ok(vec![spectrum, peaks, snapshots, manifest])
}

/// Writes `calibration.csv` (`snr_db,error_probability`, evaluation order).
pub fn emit_calibration(cal: &Calibration, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(CALIBRATION_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record(["snr_db", "error_probability"]).map_err(csv_err(&path))?;
    for (snr, p) in &cal.history {
        w.write_record(&[snr.to_string(), p.to_string()]).map_err(csv_err(&path))?;
    }
    w.flush().map_err(io_err(&path))?;
    Ok(path)
}
