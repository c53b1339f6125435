use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use irs_music::channel::PathLossModel;
use irs_music::estimator::Method;
use irs_music::geometry::Position2D;
use irs_music::harness::{
    calibrate_snr, emit_calibration, emit_report, emit_spectrum, run_montecarlo, run_spectrum, Cell, ScenarioConfig,
};
use irs_music::{Error, Result};

#[derive(Parser)]
#[command(name = "irs-music", version, about = "IRS-assisted AOA estimation with temporal-domain MUSIC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum and peaks of a single scenario.
    Spectrum {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "music")]
        method: Method,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Error probability over many random scenarios.
    Montecarlo {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated estimators.
        #[arg(long, default_value = "music,capon", value_delimiter = ',')]
        methods: Vec<Method>,
        /// Sweep cells as `L=<list>,Q=<list>` (cartesian product); repeatable.
        #[arg(long)]
        sweep: Vec<String>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Search the SNR at which MUSIC reaches a target error probability.
    Calibrate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 0.004)]
        target: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lo_db: f64,
        #[arg(long, default_value_t = 60.0, allow_hyphen_values = true)]
        hi_db: f64,
        #[arg(long, default_value_t = 10)]
        iterations: usize,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the effective configuration as TOML.
    Config {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

fn parse_pos(s: &str) -> std::result::Result<Position2D, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `x,y`, got `{s}`"));
    }
    let x = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let y = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok(Position2D::new(x, y))
}

/// Overrides applied on top of `--config` (or the defaults).
#[derive(Args, Default)]
struct ScenarioArgs {
    /// TOML file with any subset of the configuration keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// BS position `x,y` in meters.
    #[arg(long, value_parser = parse_pos, allow_hyphen_values = true)]
    bs_pos: Option<Position2D>,
    /// IRS position `x,y` in meters.
    #[arg(long, value_parser = parse_pos, allow_hyphen_values = true)]
    irs_pos: Option<Position2D>,
    /// Centre `x,y` of the user disk.
    #[arg(long, value_parser = parse_pos, allow_hyphen_values = true)]
    user_center: Option<Position2D>,
    /// Radius of the user disk, meters.
    #[arg(long)]
    user_radius: Option<f64>,
    /// Number of users K.
    #[arg(long)]
    users: Option<usize>,
    /// IRS elements I.
    #[arg(long)]
    irs_elements: Option<usize>,
    /// BS antennas M.
    #[arg(long)]
    bs_antennas: Option<usize>,
    /// IRS element spacing in wavelengths.
    #[arg(long)]
    irs_spacing: Option<f64>,
    /// BS antenna spacing in wavelengths.
    #[arg(long)]
    bs_spacing: Option<f64>,
    /// Samples per block L (reflection patterns per cycle).
    #[arg(long)]
    block_len: Option<usize>,
    /// Blocks Q (snapshots).
    #[arg(long)]
    num_blocks: Option<usize>,
    /// Per-snapshot-element SNR in dB; `inf` for noiseless.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    /// `unit` or `free-space`.
    #[arg(long)]
    path_loss: Option<String>,
    /// Carrier wavelength for the free-space model, meters.
    #[arg(long)]
    wavelength: Option<f64>,
    /// Coarse search step, degrees.
    #[arg(long)]
    coarse_step: Option<f64>,
    /// Step reduction per refinement stage.
    #[arg(long)]
    refine_factor: Option<usize>,
    /// Number of refinement stages.
    #[arg(long)]
    refine_stages: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Run 5000 trials.
    #[arg(long)]
    full_scale: bool,
    /// Matched error, degrees, at or above which a trial counts as an error event.
    #[arg(long)]
    error_threshold: Option<f64>,
    /// Minimum pairwise AOA gap between drawn users, degrees.
    #[arg(long)]
    min_separation: Option<f64>,
    /// Zero-based BS antenna used for the snapshots.
    #[arg(long)]
    antenna: Option<usize>,
    /// Comma-separated user AOAs in degrees.
    #[arg(long, value_delimiter = ',')]
    pinned_aoas: Option<Vec<f64>>,
}

impl ScenarioArgs {
    fn resolve(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(p) => ScenarioConfig::load(p)?,
            None => ScenarioConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field.clone() { $target = v; })*
            };
        }
        set! {
            bs_pos => cfg.bs_pos,
            irs_pos => cfg.irs_pos,
            user_center => cfg.user_region.center,
            user_radius => cfg.user_region.radius,
            users => cfg.users,
            irs_elements => cfg.irs_elements,
            bs_antennas => cfg.bs_antennas,
            irs_spacing => cfg.irs_spacing,
            bs_spacing => cfg.bs_spacing,
            block_len => cfg.block_len,
            num_blocks => cfg.num_blocks,
            snr_db => cfg.snr_db,
            coarse_step => cfg.grid.coarse_step_deg,
            refine_factor => cfg.grid.refine_factor,
            refine_stages => cfg.grid.refine_stages,
            seed => cfg.seed,
            trials => cfg.trials,
            error_threshold => cfg.error_threshold_deg,
            min_separation => cfg.min_separation_deg,
            antenna => cfg.antenna,
        }
        if self.full_scale {
            cfg.trials = 5000;
        }
        if let Some(p) = &self.pinned_aoas {
            cfg.pinned_aoas = Some(p.clone());
        }
        match self.path_loss.as_deref() {
            None => {}
            Some("unit") => cfg.path_loss = PathLossModel::Unit,
            Some("free-space") => {
                let wavelength_m = match cfg.path_loss {
                    PathLossModel::FreeSpace { wavelength_m } => wavelength_m,
                    PathLossModel::Unit => 0.1,
                };
                cfg.path_loss = PathLossModel::FreeSpace { wavelength_m };
            }
            Some(other) => return Err(Error::InvalidConfig(format!("unknown path-loss model `{other}`"))),
        }
        if let Some(w) = self.wavelength {
            match &mut cfg.path_loss {
                PathLossModel::FreeSpace { wavelength_m } => *wavelength_m = w,
                PathLossModel::Unit => {
                    return Err(Error::InvalidConfig("--wavelength needs --path-loss free-space".into()))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `L=6,8,Q=4,12` into the cartesian product of the listed values.
fn parse_sweep(text: &str, cfg: &ScenarioConfig) -> Result<Vec<Cell>> {
    let mut ls: Vec<usize> = Vec::new();
    let mut qs: Vec<usize> = Vec::new();
    let mut current: Option<char> = None;
    for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let value = match token.split_once('=') {
            Some((key, v)) => {
                current = match key.trim() {
                    "L" | "l" => Some('L'),
                    "Q" | "q" => Some('Q'),
                    other => return Err(Error::InvalidConfig(format!("unknown sweep key `{other}`"))),
                };
                v
            }
            None => token,
        };
        let n: usize = value
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad sweep value `{value}` in `{text}`")))?;
        match current {
            Some('L') => ls.push(n),
            Some('Q') => qs.push(n),
            _ => return Err(Error::InvalidConfig(format!("sweep `{text}` must start with L= or Q="))),
        }
    }
    if ls.is_empty() {
        ls.push(cfg.block_len);
    }
    if qs.is_empty() {
        qs.push(cfg.num_blocks);
    }
    Ok(ls.iter().flat_map(|&l| qs.iter().map(move |&q| Cell::new(l, q))).collect())
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(f),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Spectrum { scenario, method, out } => {
            let cfg = scenario.resolve()?;
            let run = run_spectrum(&cfg, method)?;
            let files = emit_spectrum(&run, &cfg, &out)?;
            for (k, truth) in run.scenario.true_aoas.iter().enumerate() {
                println!("user {}: true {truth}  error {:.4}°", k + 1, run.errors_deg[k]);
            }
            for (i, p) in run.estimation.spectrum.peaks.iter().enumerate() {
                println!("peak {}: {}  P = {:.6e}", i + 1, p.angle, p.value);
            }
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Command::Montecarlo {
            scenario,
            methods,
            sweep,
            threads,
            out,
        } => {
            let cfg = scenario.resolve()?;
            let mut cells = Vec::new();
            for s in &sweep {
                cells.extend(parse_sweep(s, &cfg)?);
            }
            if cells.is_empty() {
                cells.push(Cell::new(cfg.block_len, cfg.num_blocks));
            }
            let reports = with_threads(threads, || run_montecarlo(&cfg, &methods, &cells))?;
            for r in &reports {
                println!(
                    "{:<6} L={:<3} Q={:<4} snr={} dB  errors {}/{}  p = {}",
                    r.method, r.cell.block_len, r.cell.num_blocks, r.snr_db, r.errors, r.trials, r.error_probability
                );
            }
            let files = emit_report(&reports, &out)?;
            println!("wrote {}", files.report_csv.display());
            println!("wrote {}", files.manifest.display());
        }
        Command::Calibrate {
            scenario,
            target,
            lo_db,
            hi_db,
            iterations,
            threads,
            out,
        } => {
            let cfg = scenario.resolve()?;
            let cal = with_threads(threads, || calibrate_snr(&cfg, target, lo_db, hi_db, iterations))?;
            for (snr, p) in &cal.history {
                println!("snr {snr:>9.4} dB  p = {p}");
            }
            println!("calibrated snr_db = {} (error probability {})", cal.snr_db, cal.error_probability);
            let path = emit_calibration(&cal, &out)?;
            println!("wrote {}", path.display());
        }
        Command::Config { scenario } => {
            print!("{}", scenario.resolve()?.to_toml_string());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
