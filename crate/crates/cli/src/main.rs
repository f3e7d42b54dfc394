use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bliphasu::complex::SeededRng;
use bliphasu::harness::{
    emit_report, experiment_init_quality, experiment_success_rate, recover_from_file, render_csv,
    render_json, render_svg, ExperimentConfig, ExperimentReport, InitMode, ReportFormat,
    DEFAULT_SUCCESS_THRESHOLD,
};
use bliphasu::model::{measure, save_instance, synthesize_instance, SynthesisMode};
use bliphasu::refine::{BliphasuConfig, DEFAULT_INIT_ITERS, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use bliphasu::Error;

/// Tolerance used by sweeps so that every trial runs the full iteration budget.
const SWEEP_TOL: f64 = 1e-12;

#[derive(Parser)]
#[command(
    name = "bliphasu",
    version,
    about = "Blind deconvolution from low-resolution phaseless measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random instance with measurements and write it as JSON.
    Simulate(SimulateArgs),
    /// Recover (g, z) from an instance file.
    Recover(RecoverArgs),
    /// Sweep the error of the starting point over ratios and SNR levels.
    InitQuality(SweepArgs),
    /// Sweep the noise-free success rate of the full solver.
    SuccessRate(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    DirectGaussian,
    Convolutional,
}

impl From<Mode> for SynthesisMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::DirectGaussian => SynthesisMode::DirectGaussian,
            Mode::Convolutional => SynthesisMode::Convolutional,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    Spectral,
    Random,
}

impl From<Init> for InitMode {
    fn from(i: Init) -> Self {
        match i {
            Init::Spectral => InitMode::Spectral,
            Init::Random => InitMode::Random,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long, default_value_t = 8)]
    s: usize,
    #[arg(long, default_value_t = 48)]
    m: usize,
    #[arg(long, value_enum, default_value_t = Mode::Convolutional)]
    mode: Mode,
    /// Noise level in dB; omit for noise-free data.
    #[arg(long)]
    snr: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolverArgs {
    /// Minibatch size (default ⌈m/10⌉).
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    alpha_g: Option<f64>,
    #[arg(long)]
    alpha_z: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    #[arg(long, default_value_t = DEFAULT_INIT_ITERS)]
    power_iters: usize,
}

impl SolverArgs {
    fn config(&self, default_tol: f64, seed: u64) -> BliphasuConfig<f64> {
        BliphasuConfig {
            init_iters: self.power_iters,
            alpha_g: self.alpha_g,
            alpha_z: self.alpha_z,
            batch_size: self.q,
            tol: self.tol.unwrap_or(default_tol),
            max_iters: self.max_iters,
            seed,
            ..BliphasuConfig::default()
        }
    }
}

#[derive(Args)]
struct RecoverArgs {
    /// Instance file with measurements.
    instance: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 10)]
    s: usize,
    /// Values of m/(k+s), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,4,6,8,10")]
    ratio_grid: Vec<f64>,
    /// SNR levels in dB, comma separated; `noise-free` for no noise.
    #[arg(long, value_delimiter = ',', value_parser = parse_snr, default_value = "noise-free")]
    snr_list: Vec<Option<f64>>,
    #[arg(long, default_value_t = 50, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Initializers to compare, comma separated (default: spectral for
    /// init-quality, spectral and random for success-rate).
    #[arg(long, value_enum, value_delimiter = ',')]
    init: Vec<Init>,
    #[arg(long, value_enum, default_value_t = Mode::DirectGaussian)]
    mode: Mode,
    #[command(flatten)]
    solver: SolverArgs,
    /// Success threshold on the final pair error.
    #[arg(long, default_value_t = DEFAULT_SUCCESS_THRESHOLD)]
    threshold: f64,
    /// Write 0 for all timings so repeated runs are byte-identical.
    #[arg(long)]
    no_wall_time: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_snr(text: &str) -> Result<Option<f64>, String> {
    match text.trim() {
        "noise-free" | "none" | "inf" => Ok(None),
        t => t
            .parse::<f64>()
            .map(Some)
            .map_err(|e| format!("`{t}` is neither a number nor `noise-free`: {e}")),
    }
}

impl SweepArgs {
    fn config(&self, default_modes: &[InitMode]) -> ExperimentConfig {
        let init_modes = if self.init.is_empty() {
            default_modes.to_vec()
        } else {
            self.init.iter().map(|&i| i.into()).collect()
        };
        ExperimentConfig {
            n: self.n,
            k: self.k,
            s: self.s,
            ratios: self.ratio_grid.clone(),
            snrs: self.snr_list.clone(),
            trials: self.trials,
            init_modes,
            mode: self.mode.into(),
            solver: self.solver.config(SWEEP_TOL, self.seed),
            seed: self.seed,
            threshold: self.threshold,
            record_wall_time: !self.no_wall_time,
        }
    }
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io {
                path: PathBuf::from("<stdout>"),
                source: e,
            }),
    }
}

fn emit(report: &ExperimentReport, format: Format, out: Option<&Path>) -> Result<(), Error> {
    let format = match format {
        Format::Csv => ReportFormat::Csv,
        Format::Json => ReportFormat::Json,
        Format::Svg => ReportFormat::Svg,
    };
    match out {
        Some(path) => emit_report(report, format, path),
        None => {
            let text = match format {
                ReportFormat::Csv => render_csv(report)?,
                ReportFormat::Json => render_json(report)? + "\n",
                ReportFormat::Svg => render_svg(report),
            };
            write_text(None, &text)
        }
    }
}

fn simulate(args: &SimulateArgs) -> Result<(), Error> {
    let base = SeededRng::new(args.seed, 0);
    let instance = synthesize_instance::<f64>(
        args.n,
        args.k,
        args.s,
        args.m,
        args.mode.into(),
        &mut base.derive(1),
    )?;
    let measurements = measure(&instance, args.snr, &mut base.derive(2))?;
    save_instance(&instance, Some(&measurements), &args.out)
}

fn recover(args: &RecoverArgs) -> Result<(), Error> {
    let config = args.solver.config(DEFAULT_TOL, args.seed);
    let report = recover_from_file(&args.instance, &config, args.out.as_deref())?;
    if args.out.is_none() {
        let text =
            serde_json::to_string_pretty(&report).map_err(|e| Error::Parse(e.to_string()))?;
        write_text(None, &(text + "\n"))?;
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidDimensions(_) => 1,
        Error::Io { .. } | Error::Parse(_) | Error::Validation { .. } | Error::Dimension { .. } => {
            2
        }
        Error::Divergence { .. }
        | Error::Degenerate(_)
        | Error::DegenerateSpectrum(_)
        | Error::NonFinite(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Recover(args) => recover(args),
        Command::InitQuality(args) => experiment_init_quality(&args.config(&[InitMode::Spectral]))
            .and_then(|r| emit(&r, args.format, args.out.as_deref())),
        Command::SuccessRate(args) => {
            experiment_success_rate(&args.config(&[InitMode::Spectral, InitMode::Random]))
                .and_then(|r| emit(&r, args.format, args.out.as_deref()))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
