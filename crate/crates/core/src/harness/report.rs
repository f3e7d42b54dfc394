use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{CellSummary, ExperimentKind, ExperimentReport};
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 8] = [
    "ratio",
    "snr_db",
    "init_mode",
    "trials",
    "mean_pair_error",
    "success_rate",
    "mean_iterations",
    "wall_time_s",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Svg,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

/// One row per cell, in report order.
pub fn render_csv(report: &ExperimentReport) -> Result<String> {
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(CSV_HEADER).map_err(csv_error)?;
    for c in &report.cells {
        out.write_record([
            c.ratio.to_string(),
            opt(c.snr_db),
            c.init_mode.as_str().to_string(),
            c.trials.to_string(),
            opt(c.mean_pair_error),
            c.success_rate.to_string(),
            c.mean_iterations.to_string(),
            c.wall_time_s.to_string(),
        ])
        .map_err(csv_error)?;
    }
    let bytes = out
        .into_inner()
        .map_err(|e| Error::Parse(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// The whole report, cells and per-trial rows.
pub fn render_json(report: &ExperimentReport) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| Error::Parse(format!("json: {e}")))
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

fn series_label(c: &CellSummary) -> String {
    match c.snr_db {
        Some(snr) => format!("{} {snr} dB", c.init_mode.as_str()),
        None => format!("{} noise-free", c.init_mode.as_str()),
    }
}

/// Line plot over the ratio axis, one poly-line per (snr, init mode) series.
/// Plots mean pair error for init-quality sweeps and success rate otherwise.
pub fn render_svg(report: &ExperimentReport) -> String {
    let (value, y_label): (fn(&CellSummary) -> Option<f64>, &str) = match report.kind {
        ExperimentKind::InitQuality => (|c| c.mean_pair_error, "mean pair error"),
        ExperimentKind::SuccessRate => (|c| Some(c.success_rate), "success rate"),
    };
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for c in &report.cells {
        let label = series_label(c);
        let idx = match series.iter().position(|(l, _)| *l == label) {
            Some(i) => i,
            None => {
                series.push((label, Vec::new()));
                series.len() - 1
            }
        };
        if let Some(v) = value(c) {
            series[idx].1.push((c.ratio, v));
        }
    }
    let xs = report.cells.iter().map(|c| c.ratio);
    let x_lo = xs.clone().fold(f64::INFINITY, f64::min);
    let x_hi = xs.fold(f64::NEG_INFINITY, f64::max);
    let (x_lo, x_hi) = if x_lo.is_finite() {
        (x_lo, x_hi.max(x_lo + 1.0))
    } else {
        (0.0, 1.0)
    };
    let y_hi = match report.kind {
        ExperimentKind::SuccessRate => 1.0,
        ExperimentKind::InitQuality => {
            series
                .iter()
                .flat_map(|(_, p)| p.iter().map(|q| q.1))
                .fold(0.0, f64::max)
                .max(1e-12)
                * 1.05
        }
    };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| TOP + plot_h - y / y_hi * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{LEFT} {TOP}V{b}H{r}" fill="none" stroke="black"/>"#,
        b = TOP + plot_h,
        r = LEFT + plot_w
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x_lo + f * (x_hi - x_lo);
        let yv = f * y_hi;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(xv),
            TOP + plot_h + 18.0,
            trim(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            sy(yv) + 4.0,
            trim(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">m/(k+s)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{y_label}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    for (i, (label, points)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            coords.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">{label}</text>"#,
            lx + 26.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn trim(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Writes the report to `path` in the chosen format.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => render_csv(report)?,
        ReportFormat::Json => render_json(report)?,
        ReportFormat::Svg => render_svg(report),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::InitMode;

    fn known() -> ExperimentReport {
        let cell = |ratio, snr_db, init_mode, err, rate, iters, wall| CellSummary {
            ratio,
            snr_db,
            init_mode,
            trials: 4,
            mean_pair_error: err,
            success_rate: rate,
            mean_iterations: iters,
            wall_time_s: wall,
        };
        ExperimentReport {
            kind: ExperimentKind::SuccessRate,
            cells: vec![
                cell(2.0, None, InitMode::Spectral, Some(0.5), 0.25, 500.0, 0.0),
                cell(2.0, None, InitMode::Random, None, 0.0, 12.5, 0.0),
                cell(
                    2.5,
                    Some(10.0),
                    InitMode::Spectral,
                    Some(1e-6),
                    1.0,
                    73.25,
                    1.5,
                ),
            ],
            trials: vec![],
        }
    }

    #[test]
    fn golden_csv() {
        let expected = "\
ratio,snr_db,init_mode,trials,mean_pair_error,success_rate,mean_iterations,wall_time_s
2,,spectral,4,0.5,0.25,500,0
2,,random,4,,0,12.5,0
2.5,10,spectral,4,0.000001,1,73.25,1.5
";
        assert_eq!(render_csv(&known()).unwrap(), expected);
    }

    #[test]
    fn empty_report_is_header_only() {
        let report = ExperimentReport {
            kind: ExperimentKind::InitQuality,
            cells: vec![],
            trials: vec![],
        };
        assert_eq!(
            render_csv(&report).unwrap(),
            format!("{}\n", CSV_HEADER.join(","))
        );
        assert!(render_svg(&report).ends_with("</svg>\n"));
    }

    #[test]
    fn json_round_trip_keeps_csv() {
        let report = known();
        let back: ExperimentReport = serde_json::from_str(&render_json(&report).unwrap()).unwrap();
        assert_eq!(render_csv(&back).unwrap(), render_csv(&report).unwrap());
    }

    #[test]
    fn svg_has_one_line_per_series() {
        let svg = render_svg(&known());
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains("random noise-free"));
        assert!(svg.contains("spectral 10 dB"));
    }

    #[test]
    fn unwritable_path_names_the_path() {
        let err = emit_report(
            &known(),
            ReportFormat::Csv,
            Path::new("/nonexistent-dir/x.csv"),
        )
        .unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
