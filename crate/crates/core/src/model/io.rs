//! JSON instance files.
//!
//! Complex matrices are arrays of rows, each entry a `[re, im]` pair of doubles;
//! complex vectors are flat arrays of such pairs. Unknown fields are ignored.

use std::fs;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{MeasurementSet, ProblemInstance, SynthesisMode};
use crate::complex::{ComplexMatrix, ComplexVector};
use crate::{Error, Real, Result};

type Pair = [f64; 2];

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    k: usize,
    s: usize,
    m: usize,
    mode: SynthesisMode,
    #[serde(rename = "Bhat")]
    b_hat: Vec<Vec<Pair>>,
    #[serde(rename = "Chat")]
    c_hat: Vec<Vec<Pair>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    b: Option<Vec<Vec<Pair>>>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    c: Option<Vec<Vec<Pair>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g_true: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    z_true: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    measurements: Option<MeasurementBlock>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MeasurementBlock {
    y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clean: Option<Vec<f64>>,
    noise_std: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    snr_db: Option<f64>,
    seed: u64,
}

/// Contents of an instance file.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedInstance<T> {
    pub instance: ProblemInstance<T>,
    pub measurements: Option<MeasurementSet<T>>,
}

fn pair<T: Real>(c: &Complex<T>) -> Pair {
    [c.re.as_f64(), c.im.as_f64()]
}

fn matrix_rows<T: Real>(m: &ComplexMatrix<T>) -> Vec<Vec<Pair>> {
    m.row_iter()
        .map(|row| row.iter().map(pair).collect())
        .collect()
}

pub(crate) fn vector_pairs<T: Real>(v: &ComplexVector<T>) -> Vec<Pair> {
    v.iter().map(pair).collect()
}

fn to_complex<T: Real>(p: &Pair) -> Complex<T> {
    Complex::new(T::of(p[0]), T::of(p[1]))
}

fn parse_matrix<T: Real>(field: &str, rows: &[Vec<Pair>]) -> Result<ComplexMatrix<T>> {
    if rows.is_empty() {
        return Err(Error::validation(field, "matrix has no rows"));
    }
    let width = rows[0].len();
    if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != width) {
        return Err(Error::validation(
            field,
            format!("row {r} has {} entries, expected {width}", row.len()),
        ));
    }
    let entries = rows.iter().flatten().map(to_complex).collect();
    ComplexMatrix::new(rows.len(), width, entries)
        .map_err(|e| Error::validation(field, e.to_string()))
}

fn parse_vector<T: Real>(field: &str, pairs: &[Pair]) -> Result<ComplexVector<T>> {
    ComplexVector::new(pairs.iter().map(to_complex).collect())
        .map_err(|e| Error::validation(field, e.to_string()))
}

fn parse_reals<T: Real>(field: &str, values: &[f64], m: usize) -> Result<Vec<T>> {
    if values.len() != m {
        return Err(Error::validation(
            field,
            format!("expected {m} entries, got {}", values.len()),
        ));
    }
    Ok(values.iter().map(|&v| T::of(v)).collect())
}

/// Writes the instance (and measurements, when given) as pretty JSON.
pub fn save_instance<T: Real>(
    instance: &ProblemInstance<T>,
    measurements: Option<&MeasurementSet<T>>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = InstanceFile {
        n: instance.n,
        k: instance.k,
        s: instance.s,
        m: instance.m,
        mode: instance.mode,
        b_hat: matrix_rows(&instance.b_hat),
        c_hat: matrix_rows(&instance.c_hat),
        b: instance.b.as_ref().map(matrix_rows),
        c: instance.c.as_ref().map(matrix_rows),
        g_true: instance.g_true.as_ref().map(vector_pairs),
        z_true: instance.z_true.as_ref().map(vector_pairs),
        measurements: measurements.map(|set| MeasurementBlock {
            y: set.y.iter().map(|v| v.as_f64()).collect(),
            clean: set
                .clean
                .as_ref()
                .map(|c| c.iter().map(|v| v.as_f64()).collect()),
            noise_std: set.noise_std.as_f64(),
            snr_db: set.snr_db.map(Real::as_f64),
            seed: set.rng_seed,
        }),
    };
    let text = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::Parse(format!("serializing instance: {e}")))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parses and validates an instance file.
pub fn load_instance<T: Real>(path: impl AsRef<Path>) -> Result<LoadedInstance<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_instance(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub(crate) fn parse_instance<T: Real>(text: &str) -> Result<LoadedInstance<T>> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let instance = ProblemInstance {
        n: file.n,
        k: file.k,
        s: file.s,
        m: file.m,
        mode: file.mode,
        b_hat: parse_matrix("Bhat", &file.b_hat)?,
        c_hat: parse_matrix("Chat", &file.c_hat)?,
        b: file
            .b
            .as_deref()
            .map(|r| parse_matrix("B", r))
            .transpose()?,
        c: file
            .c
            .as_deref()
            .map(|r| parse_matrix("C", r))
            .transpose()?,
        g_true: file
            .g_true
            .as_deref()
            .map(|p| parse_vector("g_true", p))
            .transpose()?,
        z_true: file
            .z_true
            .as_deref()
            .map(|p| parse_vector("z_true", p))
            .transpose()?,
    };
    instance.validate()?;
    let measurements = file
        .measurements
        .map(|block| -> Result<MeasurementSet<T>> {
            let y = parse_reals("measurements.y", &block.y, file.m)?;
            let clean = block
                .clean
                .as_deref()
                .map(|c| parse_reals("measurements.clean", c, file.m))
                .transpose()?;
            if !(block.noise_std >= 0.0) {
                return Err(Error::validation(
                    "measurements.noise_std",
                    "must be nonnegative",
                ));
            }
            Ok(MeasurementSet {
                y,
                clean,
                noise_std: T::of(block.noise_std),
                snr_db: block.snr_db.map(T::of),
                rng_seed: block.seed,
            })
        })
        .transpose()?;
    Ok(LoadedInstance {
        instance,
        measurements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::SeededRng;
    use crate::model::{measure, synthesize_instance};

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        let mut rng = SeededRng::new(1, 1);
        for mode in [SynthesisMode::DirectGaussian, SynthesisMode::Convolutional] {
            let inst = synthesize_instance::<f64>(16, 3, 2, 9, mode, &mut rng).unwrap();
            let set = measure(&inst, Some(15.0), &mut rng).unwrap();
            save_instance(&inst, Some(&set), &path).unwrap();
            let loaded = load_instance::<f64>(&path).unwrap();
            assert_eq!(loaded.instance, inst);
            assert_eq!(loaded.measurements.as_ref(), Some(&set));
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&loaded.measurements.unwrap().y), bits(&set.y));
        }
    }

    #[test]
    fn wrong_row_count_names_field() {
        let text = r#"{"n":4,"k":1,"s":1,"m":2,"mode":"direct-gaussian",
            "Bhat":[[[1.0,0.0]]],"Chat":[[[1.0,0.0]],[[0.5,0.5]]]}"#;
        match parse_instance::<f64>(text) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "Bhat"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn ragged_rows_and_bad_lengths() {
        let ragged = r#"{"n":4,"k":2,"s":1,"m":2,"mode":"external",
            "Bhat":[[[1,0],[0,1]],[[1,0]]],"Chat":[[[1,0]],[[1,0]]]}"#;
        assert!(
            matches!(parse_instance::<f64>(ragged), Err(Error::Validation { field, .. }) if field == "Bhat")
        );

        let short_y = r#"{"n":1,"k":1,"s":1,"m":1,"mode":"external",
            "Bhat":[[[1,0]]],"Chat":[[[1,0]]],
            "measurements":{"y":[],"noise_std":0.0,"seed":0}}"#;
        assert!(
            matches!(parse_instance::<f64>(short_y), Err(Error::Validation { field, .. }) if field == "measurements.y")
        );
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_instance::<f64>("{\"n\": 3,\n \"k\": }").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        let missing = parse_instance::<f64>(
            r#"{"n":1,"k":1,"s":1,"m":1,"mode":"external","Bhat":[[[1,0]]]}"#,
        )
        .unwrap_err();
        assert!(missing.to_string().contains("Chat"), "{missing}");
    }

    #[test]
    fn minimal_hand_written_file_loads() {
        let text = r#"{"n":1,"k":1,"s":1,"m":1,"mode":"external","extra":"ignored",
            "Bhat":[[[1.0,0.0]]],"Chat":[[[0.0,1.0]]],
            "g_true":[[1.0,0.0]],"z_true":[[2.0,0.0]],
            "measurements":{"y":[4.0],"noise_std":0.0,"seed":7}}"#;
        let loaded = parse_instance::<f64>(text).unwrap();
        assert_eq!(loaded.instance.m, 1);
        assert_eq!(loaded.measurements.unwrap().y, vec![4.0]);
    }
}
