//! Problem instances and the measurement model
//! `y[ℓ] = |(b̂_ℓ^H g)(ĉ_ℓ^H z)|² + η[ℓ]`.

pub(crate) mod io;

pub use io::{load_instance, save_instance, LoadedInstance};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::complex::{
    circular_convolve, matvec, partial_dft, sample_complex_gaussian, ComplexMatrix, ComplexVector,
    SeededRng,
};
use crate::{Error, Real, Result};

/// How the low-resolution row matrices `B̂`, `Ĉ` were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthesisMode {
    /// `B̂`, `Ĉ` drawn i.i.d. CN(0, 1) entrywise.
    DirectGaussian,
    /// Gaussian `B`, `C` pushed through the first `m` rows of the unitary DFT.
    Convolutional,
    /// Supplied from outside (file ingestion).
    External,
}

impl SynthesisMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SynthesisMode::DirectGaussian => "direct-gaussian",
            SynthesisMode::Convolutional => "convolutional",
            SynthesisMode::External => "external",
        }
    }
}

/// Subspace matrices, dimensions and optional ground truth.
///
/// `b_hat`/`c_hat` hold the rows `b̂_ℓ^H`, `ĉ_ℓ^H`. Use [`ProblemInstance::validate`]
/// after building one by hand.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance<T> {
    pub n: usize,
    pub k: usize,
    pub s: usize,
    pub m: usize,
    pub mode: SynthesisMode,
    pub b: Option<ComplexMatrix<T>>,
    pub c: Option<ComplexMatrix<T>>,
    pub b_hat: ComplexMatrix<T>,
    pub c_hat: ComplexMatrix<T>,
    pub g_true: Option<ComplexVector<T>>,
    pub z_true: Option<ComplexVector<T>>,
}

/// Observed intensities plus the record of how they were produced.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet<T> {
    pub y: Vec<T>,
    pub clean: Option<Vec<T>>,
    pub noise_std: T,
    pub snr_db: Option<T>,
    pub rng_seed: u64,
}

fn unit_tolerance<T: Real>() -> T {
    T::of(1e-10).max(T::epsilon() * T::of(64.0))
}

fn check_shape<T: Real>(
    field: &str,
    matrix: &ComplexMatrix<T>,
    rows: usize,
    cols: usize,
) -> Result<()> {
    if matrix.rows() != rows || matrix.cols() != cols {
        return Err(Error::validation(
            field,
            format!(
                "expected {rows}x{cols}, got {}x{}",
                matrix.rows(),
                matrix.cols()
            ),
        ));
    }
    Ok(())
}

impl<T: Real> ProblemInstance<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 || self.s == 0 || self.m == 0 {
            return Err(Error::validation(
                "n/k/s/m",
                "all dimensions must be positive",
            ));
        }
        check_shape("Bhat", &self.b_hat, self.m, self.k)?;
        check_shape("Chat", &self.c_hat, self.m, self.s)?;
        if let Some(b) = &self.b {
            check_shape("B", b, self.n, self.k)?;
        }
        if let Some(c) = &self.c {
            check_shape("C", c, self.n, self.s)?;
        }
        if let Some(g) = &self.g_true {
            if g.len() != self.k {
                return Err(Error::validation(
                    "g_true",
                    format!("expected length {}, got {}", self.k, g.len()),
                ));
            }
            if (g.norm() - T::one()).abs() > unit_tolerance() {
                return Err(Error::validation(
                    "g_true",
                    format!("must have unit norm, got {}", g.norm()),
                ));
            }
        }
        if let Some(z) = &self.z_true {
            if z.len() != self.s {
                return Err(Error::validation(
                    "z_true",
                    format!("expected length {}, got {}", self.s, z.len()),
                ));
            }
        }
        if self.mode == SynthesisMode::Convolutional {
            if self.m >= self.n {
                return Err(Error::validation(
                    "m",
                    format!(
                        "convolutional mode needs m < n, got m={} n={}",
                        self.m, self.n
                    ),
                ));
            }
            let (b, c) = match (&self.b, &self.c) {
                (Some(b), Some(c)) => (b, c),
                _ => {
                    return Err(Error::validation(
                        "B/C",
                        "convolutional mode requires B and C",
                    ))
                }
            };
            check_low_pass("Bhat", b, &self.b_hat, self.m)?;
            check_low_pass("Chat", c, &self.c_hat, self.m)?;
        }
        Ok(())
    }

    /// `h = B g` and `x = C z` for the ground truth, when everything needed is present.
    pub fn true_signals(&self) -> Option<(ComplexVector<T>, ComplexVector<T>)> {
        let h = matvec(self.b.as_ref()?, self.g_true.as_ref()?).ok()?;
        let x = matvec(self.c.as_ref()?, self.z_true.as_ref()?).ok()?;
        Some((h, x))
    }
}

/// Applies the first `m` DFT rows to each column of `full`.
pub fn low_pass_columns<T: Real>(full: &ComplexMatrix<T>, m: usize) -> Result<ComplexMatrix<T>> {
    let columns = (0..full.cols())
        .map(|j| partial_dft(&full.column(j), m))
        .collect::<Result<Vec<_>>>()?;
    ComplexMatrix::from_columns(&columns)
}

fn check_low_pass<T: Real>(
    field: &str,
    full: &ComplexMatrix<T>,
    stored: &ComplexMatrix<T>,
    m: usize,
) -> Result<()> {
    let expected = low_pass_columns(full, m)?;
    let tol = unit_tolerance::<T>();
    let worst = expected
        .as_slice()
        .iter()
        .zip(stored.as_slice())
        .map(|(a, b)| (a - b).norm() / (T::one() + a.norm()))
        .fold(T::zero(), T::max);
    if worst > tol {
        return Err(Error::validation(
            field,
            format!(
                "does not equal the low-pass DFT of its full-resolution matrix (deviation {worst})"
            ),
        ));
    }
    Ok(())
}

fn gaussian_matrix<T: Real>(rows: usize, cols: usize, rng: &mut SeededRng) -> ComplexMatrix<T> {
    let entries = sample_complex_gaussian::<T>(rng, rows * cols).into_vec();
    ComplexMatrix::from_vec_unchecked(rows, cols, entries)
}

/// Draws a random instance with unit-norm `g_true` and CN(0, I) `z_true`.
///
/// `External` cannot be synthesized.
pub fn synthesize_instance<T: Real>(
    n: usize,
    k: usize,
    s: usize,
    m: usize,
    mode: SynthesisMode,
    rng: &mut SeededRng,
) -> Result<ProblemInstance<T>> {
    if n == 0 || k == 0 || s == 0 || m == 0 {
        return Err(Error::InvalidDimensions(format!(
            "need n, k, s, m >= 1, got n={n} k={k} s={s} m={m}"
        )));
    }
    let (b, c, b_hat, c_hat) = match mode {
        SynthesisMode::DirectGaussian => (
            None,
            None,
            gaussian_matrix(m, k, rng),
            gaussian_matrix(m, s, rng),
        ),
        SynthesisMode::Convolutional => {
            if m >= n {
                return Err(Error::InvalidDimensions(format!(
                    "convolutional mode needs m < n, got m={m} n={n}"
                )));
            }
            let b = gaussian_matrix(n, k, rng);
            let c = gaussian_matrix(n, s, rng);
            let b_hat = low_pass_columns(&b, m)?;
            let c_hat = low_pass_columns(&c, m)?;
            (Some(b), Some(c), b_hat, c_hat)
        }
        SynthesisMode::External => {
            return Err(Error::Config(
                "external instances must be loaded from a file".into(),
            ))
        }
    };
    let g = sample_complex_gaussian::<T>(rng, k);
    let g = g.scale_real(g.norm().recip());
    let z = sample_complex_gaussian::<T>(rng, s);
    Ok(ProblemInstance {
        n,
        k,
        s,
        m,
        mode,
        b,
        c,
        b_hat,
        c_hat,
        g_true: Some(g),
        z_true: Some(z),
    })
}

/// Noise-free intensities `|(b̂_ℓ^H g)(ĉ_ℓ^H z)|²`.
pub fn forward_intensities<T: Real>(
    b_hat: &ComplexMatrix<T>,
    c_hat: &ComplexMatrix<T>,
    g: &ComplexVector<T>,
    z: &ComplexVector<T>,
) -> Result<Vec<T>> {
    if b_hat.rows() != c_hat.rows() {
        return Err(Error::dim(
            "forward_intensities rows",
            b_hat.rows(),
            c_hat.rows(),
        ));
    }
    let bg = matvec(b_hat, g)?;
    let cz = matvec(c_hat, z)?;
    Ok(bg
        .iter()
        .zip(&cz)
        .map(|(p, q)| p.norm_sqr() * q.norm_sqr())
        .collect())
}

/// `|F_lo((C z) ⊛ (B g))|²` computed in the signal domain.
///
/// Equals `n · forward_intensities(F_lo B, F_lo C, g, z)` because the DFT is unitary.
pub fn forward_convolutional<T: Real>(
    b: &ComplexMatrix<T>,
    c: &ComplexMatrix<T>,
    g: &ComplexVector<T>,
    z: &ComplexVector<T>,
    m: usize,
) -> Result<Vec<T>> {
    if b.rows() != c.rows() {
        return Err(Error::dim("forward_convolutional rows", b.rows(), c.rows()));
    }
    let h = matvec(b, g)?;
    let x = matvec(c, z)?;
    Ok(partial_dft(&circular_convolve(&x, &h)?, m)?.intensities())
}

/// Noise standard deviation giving `target_snr_db` for i.i.d. noise over `clean.len()` samples.
pub fn noise_std_for_snr<T: Real>(clean: &[T], target_snr_db: T) -> Result<T> {
    let energy: T = clean.iter().map(|&v| v * v).sum();
    if energy <= T::zero() {
        return Err(Error::Degenerate("SNR target for an all-zero clean signal"));
    }
    let m = T::of(clean.len() as f64);
    Ok((energy * T::of(10.0).powf(-target_snr_db / T::of(10.0)) / m).sqrt())
}

/// Adds i.i.d. real Gaussian noise. Negative results are kept.
pub fn add_noise<T: Real>(clean: &[T], noise_std: T, rng: &mut SeededRng) -> MeasurementSet<T> {
    let y = if noise_std > T::zero() {
        clean
            .iter()
            .map(|&v| {
                let eta: f64 = rng.sample(StandardNormal);
                v + noise_std * T::of(eta)
            })
            .collect()
    } else {
        clean.to_vec()
    };
    MeasurementSet {
        y,
        clean: Some(clean.to_vec()),
        noise_std: noise_std.max(T::zero()),
        snr_db: None,
        rng_seed: rng.seed(),
    }
}

/// Measures the instance's ground truth, optionally at a target SNR (dB).
pub fn measure<T: Real>(
    instance: &ProblemInstance<T>,
    snr_db: Option<T>,
    rng: &mut SeededRng,
) -> Result<MeasurementSet<T>> {
    let (g, z) = match (&instance.g_true, &instance.z_true) {
        (Some(g), Some(z)) => (g, z),
        _ => {
            return Err(Error::Config(
                "instance carries no ground truth to measure".into(),
            ))
        }
    };
    let clean = forward_intensities(&instance.b_hat, &instance.c_hat, g, z)?;
    match snr_db {
        None => Ok(add_noise(&clean, T::zero(), rng)),
        Some(target) => {
            let std = noise_std_for_snr(&clean, target)?;
            let mut set = add_noise(&clean, std, rng);
            set.snr_db = Some(target);
            Ok(set)
        }
    }
}
