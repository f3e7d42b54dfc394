use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::complex::ComplexVector;
use crate::metrics::pair_error;
use crate::model::io::vector_pairs;
use crate::model::{load_instance, LoadedInstance};
use crate::refine::{bliphasu, BliphasuConfig, Recovery, TraceRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub objective: f64,
    pub dg_norm: f64,
    pub dz_norm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_error: Option<f64>,
}

impl From<&TraceRecord<f64>> for TraceRow {
    fn from(r: &TraceRecord<f64>) -> Self {
        Self {
            t: r.t,
            objective: r.objective,
            dg_norm: r.dg_norm,
            dz_norm: r.dz_norm,
            pair_error: r.pair_error,
        }
    }
}

/// Output of a single recovery, as written to disk. Complex vectors are
/// arrays of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub g_hat: Vec<[f64; 2]>,
    pub z_hat: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_hat: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_hat: Option<Vec<[f64; 2]>>,
    pub lambda_g: f64,
    pub lambda_z: f64,
    pub iterations: usize,
    pub stop_reason: String,
    /// Error of the final pair, when the file carries ground truth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_pair_error: Option<f64>,
    pub trace: Vec<TraceRow>,
}

impl RecoveryReport {
    fn new(
        recovery: &Recovery<f64>,
        truth: Option<(&ComplexVector<f64>, &ComplexVector<f64>)>,
    ) -> Result<Self> {
        let (pair, init_pair) = match truth {
            Some((g, z)) => (
                Some(pair_error(&recovery.g_hat, &recovery.z_hat, g, z)?),
                Some(pair_error(&recovery.init.g0, &recovery.init.z0, g, z)?),
            ),
            None => (None, None),
        };
        Ok(Self {
            g_hat: vector_pairs(&recovery.g_hat),
            z_hat: vector_pairs(&recovery.z_hat),
            x_hat: recovery.x_hat.as_ref().map(vector_pairs),
            h_hat: recovery.h_hat.as_ref().map(vector_pairs),
            lambda_g: recovery.init.lambda_g,
            lambda_z: recovery.init.lambda_z,
            iterations: recovery.refinement.iterations,
            stop_reason: recovery.refinement.stop_reason.as_str().to_string(),
            pair_error: pair,
            init_pair_error: init_pair,
            trace: recovery
                .refinement
                .trace
                .records
                .iter()
                .map(TraceRow::from)
                .collect(),
        })
    }
}

/// Runs the solver on an already loaded instance file.
pub fn recover_loaded(
    loaded: &LoadedInstance<f64>,
    config: &BliphasuConfig<f64>,
) -> Result<RecoveryReport> {
    let measurements = loaded
        .measurements
        .as_ref()
        .ok_or_else(|| Error::validation("measurements", "instance file has no measurements"))?;
    let instance = &loaded.instance;
    let recovery = bliphasu(&measurements.y, instance, config)?;
    RecoveryReport::new(
        &recovery,
        instance.g_true.as_ref().zip(instance.z_true.as_ref()),
    )
}

/// Loads `instance_path`, runs the solver and, when `out` is given, writes the
/// report there as JSON.
pub fn recover_from_file(
    instance_path: &Path,
    config: &BliphasuConfig<f64>,
    out: Option<&Path>,
) -> Result<RecoveryReport> {
    let loaded = load_instance::<f64>(instance_path)?;
    let report = recover_loaded(&loaded, config)?;
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::Parse(format!("json: {e}")))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    Ok(report)
}
