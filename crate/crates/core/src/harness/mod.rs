//! Monte Carlo sweeps over measurement ratio, noise level and initializer,
//! plus single-run recovery from instance files.
//!
//! Every trial draws from its own generator keyed by
//! `(master seed, ratio index, snr index, trial index)`, so a report is a pure
//! function of its config no matter how trials are scheduled. Spectral and
//! random initializers in the same cell see the same instance and noise.

mod recover;
mod report;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{sample_complex_gaussian, stream_key, ComplexVector, SeededRng};
use crate::metrics::pair_error;
use crate::model::{measure, synthesize_instance, SynthesisMode};
use crate::refine::{run_refinement, BliphasuConfig};
use crate::spectral::initialize;
use crate::{Error, Result};

pub use recover::{recover_from_file, recover_loaded, RecoveryReport};
pub use report::{emit_report, render_csv, render_json, render_svg, ReportFormat, CSV_HEADER};

/// Default success threshold on the final pair error.
pub const DEFAULT_SUCCESS_THRESHOLD: f64 = 1e-5;

const INSTANCE_TAG: u64 = 1;
const NOISE_TAG: u64 = 2;
const INIT_TAG: u64 = 3;
const REFINE_TAG: u64 = 4;
const STEP_TAG: u64 = 5;
const RANDOM_START_TAG: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    Spectral,
    /// Unit-norm CN direction for `g`, CN direction scaled to `√(λ_z/2)` for `z`.
    Random,
}

impl InitMode {
    pub fn as_str(self) -> &'static str {
        match self {
            InitMode::Spectral => "spectral",
            InitMode::Random => "random",
        }
    }
}

/// What a sweep measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Error of the starting point only.
    InitQuality,
    /// Error after refinement.
    SuccessRate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Ambient length passed to the instance generator.
    pub n: usize,
    pub k: usize,
    pub s: usize,
    /// Values of `m/(k+s)`; each gives `m = ⌈r(k+s)⌉`.
    pub ratios: Vec<f64>,
    /// SNR levels in dB, `None` for noise-free.
    pub snrs: Vec<Option<f64>>,
    pub trials: usize,
    pub init_modes: Vec<InitMode>,
    pub mode: SynthesisMode,
    /// Solver settings; `seed` and `stream` are replaced per trial.
    pub solver: BliphasuConfig<f64>,
    pub seed: u64,
    pub threshold: f64,
    /// When false every wall-time field is written as 0, making reports byte-reproducible.
    pub record_wall_time: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 64,
            k: 10,
            s: 10,
            ratios: vec![2.0, 4.0, 6.0, 8.0, 10.0],
            snrs: vec![None],
            trials: 50,
            init_modes: vec![InitMode::Spectral],
            mode: SynthesisMode::DirectGaussian,
            solver: BliphasuConfig::default(),
            seed: 0,
            threshold: DEFAULT_SUCCESS_THRESHOLD,
            record_wall_time: true,
        }
    }
}

/// `⌈r·(k+s)⌉`, ignoring round-off just above an integer.
pub fn measurements_for_ratio(ratio: f64, k: usize, s: usize) -> Result<usize> {
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::Config(format!(
            "ratio must be positive and finite, got {ratio}"
        )));
    }
    let exact = ratio * (k + s) as f64;
    let m = (exact - exact * 1e-12).ceil().max(1.0);
    Ok(m as usize)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.s == 0 || self.n == 0 {
            return Err(Error::Config("n, k and s must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.init_modes.is_empty() {
            return Err(Error::Config("no init modes selected".into()));
        }
        if let Some(bad) = self.snrs.iter().flatten().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("SNR must be finite, got {bad}")));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::Config("success threshold must be positive".into()));
        }
        for &r in &self.ratios {
            let m = measurements_for_ratio(r, self.k, self.s)?;
            if self.mode == SynthesisMode::Convolutional && m >= self.n {
                return Err(Error::Config(format!(
                    "ratio {r} gives m = {m}, which needs n > m in convolutional mode"
                )));
            }
            if let Some(q) = self.solver.batch_size {
                if q > m {
                    return Err(Error::Config(format!(
                        "batch size {q} exceeds m = {m} at ratio {r}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Position of a trial in the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub ratio_index: usize,
    pub snr_index: usize,
    pub init_mode: InitMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub ratio: f64,
    pub m: usize,
    pub snr_db: Option<f64>,
    pub init_mode: InitMode,
    pub trial: usize,
    /// Final pair error; `None` when the solver diverged.
    pub pair_error: Option<f64>,
    pub success: bool,
    pub iterations: usize,
    pub diverged: bool,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub ratio: f64,
    pub snr_db: Option<f64>,
    pub init_mode: InitMode,
    pub trials: usize,
    /// Mean over trials that did not diverge.
    pub mean_pair_error: Option<f64>,
    pub success_rate: f64,
    pub mean_iterations: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub cells: Vec<CellSummary>,
    pub trials: Vec<TrialRecord>,
}

fn random_start(
    k: usize,
    s: usize,
    lambda_z: f64,
    rng: &mut SeededRng,
) -> (ComplexVector<f64>, ComplexVector<f64>) {
    let g = sample_complex_gaussian::<f64>(rng, k);
    let g = g.scale_real(g.norm().recip());
    let z = sample_complex_gaussian::<f64>(rng, s);
    let z = z.scale_real((lambda_z.max(0.0) / 2.0).sqrt() / z.norm());
    (g, z)
}

/// Runs one trial. Solver divergence is recorded as a failed trial.
pub fn run_trial(
    config: &ExperimentConfig,
    kind: ExperimentKind,
    cell: Cell,
    trial: usize,
) -> Result<TrialRecord> {
    let ratio = *config
        .ratios
        .get(cell.ratio_index)
        .ok_or_else(|| Error::Config(format!("no ratio at index {}", cell.ratio_index)))?;
    let snr = *config
        .snrs
        .get(cell.snr_index)
        .ok_or_else(|| Error::Config(format!("no SNR at index {}", cell.snr_index)))?;
    let m = measurements_for_ratio(ratio, config.k, config.s)?;
    let started = Instant::now();

    let base = SeededRng::new(
        config.seed,
        stream_key(&[cell.ratio_index as u64, cell.snr_index as u64, trial as u64]),
    );
    let instance = synthesize_instance::<f64>(
        config.n,
        config.k,
        config.s,
        m,
        config.mode,
        &mut base.derive(INSTANCE_TAG),
    )?;
    let y = measure(&instance, snr, &mut base.derive(NOISE_TAG))?.y;
    let init = initialize(
        &y,
        &instance.b_hat,
        &instance.c_hat,
        config.solver.init_iters,
        &mut base.derive(INIT_TAG),
    )?;
    let (g0, z0) = match cell.init_mode {
        InitMode::Spectral => (init.g0.clone(), init.z0.clone()),
        InitMode::Random => random_start(
            config.k,
            config.s,
            init.lambda_z,
            &mut base.derive(RANDOM_START_TAG),
        ),
    };
    let g_true = instance
        .g_true
        .as_ref()
        .expect("synthesized instances carry truth");
    let z_true = instance
        .z_true
        .as_ref()
        .expect("synthesized instances carry truth");

    let (error, iterations, diverged) = match kind {
        ExperimentKind::InitQuality => (Some(pair_error(&g0, &z0, g_true, z_true)?), 0, false),
        ExperimentKind::SuccessRate => {
            let refine = config.solver.refine_config(
                (&g0, &z0),
                init.lambda_z,
                &instance.b_hat,
                &instance.c_hat,
                base.derive(REFINE_TAG).stream(),
                &mut base.derive(STEP_TAG),
            );
            let outcome = refine.and_then(|refine| {
                run_refinement(
                    &g0,
                    &z0,
                    &y,
                    &instance.b_hat,
                    &instance.c_hat,
                    &refine,
                    None,
                )
            });
            match outcome {
                Ok(out) => (
                    Some(pair_error(&out.g, &out.z, g_true, z_true)?),
                    out.iterations,
                    false,
                ),
                Err(Error::Divergence { iteration }) => (None, iteration, true),
                Err(e) => return Err(e),
            }
        }
    };

    let success = error.is_some_and(|e| e < config.threshold);
    let wall_time_s = if config.record_wall_time {
        started.elapsed().as_secs_f64()
    } else {
        0.0
    };
    Ok(TrialRecord {
        ratio,
        m,
        snr_db: snr,
        init_mode: cell.init_mode,
        trial,
        pair_error: error,
        success,
        iterations,
        diverged,
        wall_time_s,
    })
}

fn summarize(records: &[TrialRecord]) -> CellSummary {
    let first = &records[0];
    let finite: Vec<f64> = records.iter().filter_map(|r| r.pair_error).collect();
    let n = records.len() as f64;
    CellSummary {
        ratio: first.ratio,
        snr_db: first.snr_db,
        init_mode: first.init_mode,
        trials: records.len(),
        mean_pair_error: (!finite.is_empty())
            .then(|| finite.iter().sum::<f64>() / finite.len() as f64),
        success_rate: records.iter().filter(|r| r.success).count() as f64 / n,
        mean_iterations: records.iter().map(|r| r.iterations as f64).sum::<f64>() / n,
        wall_time_s: records.iter().map(|r| r.wall_time_s).sum(),
    }
}

/// Runs every trial of every cell, in parallel, and aggregates in
/// (ratio, snr, init mode, trial) order.
pub fn run_experiment(config: &ExperimentConfig, kind: ExperimentKind) -> Result<ExperimentReport> {
    config.validate()?;
    let cells: Vec<Cell> = (0..config.ratios.len())
        .flat_map(|ratio_index| {
            (0..config.snrs.len()).flat_map(move |snr_index| {
                config.init_modes.iter().map(move |&init_mode| Cell {
                    ratio_index,
                    snr_index,
                    init_mode,
                })
            })
        })
        .collect();
    let jobs: Vec<(Cell, usize)> = cells
        .iter()
        .flat_map(|&cell| (0..config.trials).map(move |t| (cell, t)))
        .collect();
    let trials = jobs
        .par_iter()
        .map(|&(cell, t)| run_trial(config, kind, cell, t))
        .collect::<Result<Vec<_>>>()?;
    let summaries = trials.chunks(config.trials).map(summarize).collect();
    Ok(ExperimentReport {
        kind,
        cells: summaries,
        trials,
    })
}

/// Quality of the starting point across ratios and SNR levels.
pub fn experiment_init_quality(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment(config, ExperimentKind::InitQuality)
}

/// Success rate of the full solver across ratios, noise-free.
pub fn experiment_success_rate(config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.snrs.iter().any(Option::is_some) {
        return Err(Error::Config("success-rate sweeps are noise-free".into()));
    }
    run_experiment(config, ExperimentKind::SuccessRate)
}

impl ExperimentReport {
    pub fn cell(
        &self,
        ratio: f64,
        snr_db: Option<f64>,
        init_mode: InitMode,
    ) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.ratio == ratio && c.snr_db == snr_db && c.init_mode == init_mode)
    }
}
