use bliphasu::complex::SeededRng;
use bliphasu::harness::{
    experiment_init_quality, experiment_success_rate, recover_from_file, recover_loaded,
    render_csv, ExperimentConfig, InitMode,
};
use bliphasu::model::{load_instance, measure, save_instance, synthesize_instance, SynthesisMode};
use bliphasu::refine::{bliphasu, BliphasuConfig, StopReason};
use bliphasu::{BliphasuConfig64, ProblemInstance32};
use tempfile::TempDir;

fn config() -> BliphasuConfig64 {
    BliphasuConfig {
        max_iters: 40,
        seed: 3,
        ..BliphasuConfig::default()
    }
}

#[test]
fn file_round_trip_matches_in_memory_run() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("inst.json");
    let mut rng = SeededRng::new(1, 0);
    let inst =
        synthesize_instance::<f64>(64, 6, 6, 48, SynthesisMode::Convolutional, &mut rng).unwrap();
    let ms = measure(&inst, Some(25.0), &mut rng).unwrap();
    save_instance(&inst, Some(&ms), &path).unwrap();

    let direct = bliphasu(&ms.y, &inst, &config()).unwrap();
    let out = dir.path().join("rec.json");
    let report = recover_from_file(&path, &config(), Some(&out)).unwrap();
    let g: Vec<[f64; 2]> = direct.g_hat.iter().map(|c| [c.re, c.im]).collect();
    let x: Vec<[f64; 2]> = direct
        .x_hat
        .as_ref()
        .unwrap()
        .iter()
        .map(|c| [c.re, c.im])
        .collect();
    assert_eq!(report.g_hat, g);
    assert_eq!(report.x_hat.as_ref().unwrap(), &x);
    assert_eq!(report.iterations, direct.refinement.iterations);
    assert!(report.pair_error.is_some());
    assert_eq!(report.trace.len(), direct.refinement.trace.records.len());

    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(
        written["iterations"].as_u64().unwrap() as usize,
        report.iterations
    );
}

#[test]
fn direct_file_without_truth_reports_low_dimensional_pair_only() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("inst.json");
    let mut rng = SeededRng::new(2, 0);
    let mut inst =
        synthesize_instance::<f64>(16, 4, 4, 60, SynthesisMode::DirectGaussian, &mut rng).unwrap();
    let ms = measure(&inst, None, &mut rng).unwrap();
    inst.g_true = None;
    inst.z_true = None;
    save_instance(&inst, Some(&ms), &path).unwrap();
    let loaded = load_instance::<f64>(&path).unwrap();
    let report = recover_loaded(&loaded, &config()).unwrap();
    assert!(report.x_hat.is_none() && report.h_hat.is_none());
    assert!(report.pair_error.is_none());
    assert_eq!(report.z_hat.len(), 4);
}

#[test]
fn single_precision_pipeline_runs() {
    let mut rng = SeededRng::new(3, 0);
    let inst: ProblemInstance32 =
        synthesize_instance(32, 4, 4, 80, SynthesisMode::DirectGaussian, &mut rng).unwrap();
    let y = measure(&inst, None, &mut rng).unwrap().y;
    let out = bliphasu(
        &y,
        &inst,
        &BliphasuConfig {
            max_iters: 30,
            ..BliphasuConfig::default()
        },
    )
    .unwrap();
    assert!(out.g_hat.is_finite() && out.z_hat.is_finite());
    assert!(matches!(
        out.refinement.stop_reason,
        StopReason::MaxIters | StopReason::Converged
    ));
}

fn small_sweep() -> ExperimentConfig {
    ExperimentConfig {
        k: 4,
        s: 4,
        ratios: vec![3.0, 6.0],
        trials: 4,
        init_modes: vec![InitMode::Spectral, InitMode::Random],
        solver: BliphasuConfig {
            max_iters: 30,
            ..BliphasuConfig::default()
        },
        seed: 17,
        record_wall_time: false,
        ..ExperimentConfig::default()
    }
}

#[test]
fn sweep_csv_is_byte_reproducible() {
    let a = render_csv(&experiment_success_rate(&small_sweep()).unwrap()).unwrap();
    let b = render_csv(&experiment_success_rate(&small_sweep()).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 5);
}

#[test]
fn trial_records_do_not_depend_on_grid_shape() {
    // The same cell indices give the same trials whether or not other cells run.
    let full = experiment_success_rate(&small_sweep()).unwrap();
    let mut first_only = small_sweep();
    first_only.ratios.truncate(1);
    let part = experiment_success_rate(&first_only).unwrap();
    assert_eq!(&full.trials[..part.trials.len()], &part.trials[..]);
}

#[test]
fn init_quality_report_accounting() {
    let config = ExperimentConfig {
        snrs: vec![None, Some(20.0), Some(5.0)],
        init_modes: vec![InitMode::Spectral],
        ..small_sweep()
    };
    let report = experiment_init_quality(&config).unwrap();
    assert_eq!(report.cells.len(), 2 * 3);
    assert_eq!(report.trials.len(), 2 * 3 * 4);
    for cell in &report.cells {
        assert!((0.0..=1.0).contains(&cell.success_rate));
        assert_eq!(cell.mean_iterations, 0.0);
        assert!(cell.mean_pair_error.unwrap() > 0.0);
    }
}
