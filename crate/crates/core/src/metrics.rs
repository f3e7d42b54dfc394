//! Error metrics that quotient out the ambiguities intensity data cannot resolve.

use crate::complex::{hermitian_inner, ComplexVector};
use crate::{Error, Real, Result};

/// Estimate pair rescaled so that `‖g_aligned‖₂ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair<T> {
    pub g_aligned: ComplexVector<T>,
    pub z_aligned: ComplexVector<T>,
    pub applied_scale: T,
}

/// Euclidean distance modulo a global phase, `min_θ ‖w1 e^{-jθ} - w2‖₂`.
///
/// The minimizing phase is `arg(w2^H w1)`, so the minimum equals
/// `√(‖w1‖² + ‖w2‖² - 2|w2^H w1|)`. The residual is evaluated directly at that
/// phase, which stays accurate when the two vectors nearly coincide.
pub fn dist<T: Real>(w1: &ComplexVector<T>, w2: &ComplexVector<T>) -> Result<T> {
    let cross = hermitian_inner(w2, w1)?;
    let magnitude = cross.norm();
    if magnitude <= T::zero() {
        return Ok((w1.norm_sqr() + w2.norm_sqr()).sqrt());
    }
    let unphase = cross.conj() / magnitude;
    Ok(w1
        .iter()
        .zip(w2)
        .map(|(a, b)| (a * unphase - b).norm_sqr())
        .sum::<T>()
        .sqrt())
}

pub fn relative_error<T: Real>(w_est: &ComplexVector<T>, w_true: &ComplexVector<T>) -> Result<T> {
    let reference = w_true.norm();
    if reference <= T::zero() {
        return Err(Error::Degenerate("relative error against a zero reference"));
    }
    Ok(dist(w_est, w_true)? / reference)
}

/// Moves all energy out of `g`: `(g/‖g‖, z·‖g‖)`.
///
/// The products `(b̂^H g)(ĉ^H z)` and therefore every measured intensity are unchanged.
pub fn align_scale<T: Real>(
    g_est: &ComplexVector<T>,
    z_est: &ComplexVector<T>,
) -> Result<AlignedPair<T>> {
    let scale = g_est.norm();
    if scale <= T::zero() {
        return Err(Error::Degenerate("cannot align a zero kernel estimate"));
    }
    Ok(AlignedPair {
        g_aligned: g_est.scale_real(scale.recip()),
        z_aligned: z_est.scale_real(scale),
        applied_scale: scale,
    })
}

/// Average of the two relative errors after scale alignment of the estimate.
pub fn pair_error<T: Real>(
    g_est: &ComplexVector<T>,
    z_est: &ComplexVector<T>,
    g_true: &ComplexVector<T>,
    z_true: &ComplexVector<T>,
) -> Result<T> {
    let aligned = align_scale(g_est, z_est)?;
    let half = T::of(0.5);
    Ok(half * relative_error(&aligned.g_aligned, g_true)?
        + half * relative_error(&aligned.z_aligned, z_true)?)
}

/// `10 log₁₀(‖clean‖² / (m σ²))`, treating the noise as i.i.d. with standard deviation `σ`.
pub fn snr_db<T: Real>(clean: &[T], noise_std: T, m: usize) -> Result<T> {
    let energy: T = clean.iter().map(|&v| v * v).sum();
    if energy <= T::zero() {
        return Err(Error::Degenerate("SNR of an all-zero clean signal"));
    }
    if noise_std <= T::zero() || m == 0 {
        return Err(Error::Config(
            "SNR requires positive noise std and m".into(),
        ));
    }
    let noise_energy = T::of(m as f64) * noise_std * noise_std;
    Ok(T::of(10.0) * (energy / noise_energy).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{sample_complex_gaussian, Complex, SeededRng};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn v(entries: &[Complex<f64>]) -> ComplexVector<f64> {
        ComplexVector::new(entries.to_vec()).unwrap()
    }

    fn grid_dist(w1: &ComplexVector<f64>, w2: &ComplexVector<f64>, steps: usize) -> f64 {
        (0..steps)
            .map(|i| {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / steps as f64;
                w1.scale(Complex::from_polar(1.0, -theta))
                    .sub(w2)
                    .unwrap()
                    .norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn dist_examples() {
        let e1 = v(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(dist(&e1, &v(&[c(0.0, 1.0), c(0.0, 0.0)])).unwrap() < 1e-15);
        let e2 = v(&[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!((dist(&e1, &e2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dist_matches_grid_search() {
        let mut rng = SeededRng::new(11, 0);
        for _ in 0..20 {
            let a = sample_complex_gaussian::<f64>(&mut rng, 8);
            let b = sample_complex_gaussian::<f64>(&mut rng, 8);
            assert!((dist(&a, &b).unwrap() - grid_dist(&a, &b, 10_000)).abs() < 1e-6);
        }
    }

    #[test]
    fn relative_error_examples() {
        let w = sample_complex_gaussian::<f64>(&mut SeededRng::new(5, 5), 6);
        let unit = w.scale_real(1.0 / w.norm());
        let rotated = unit.scale(Complex::from_polar(1.0, 0.7));
        assert!(relative_error(&rotated, &unit).unwrap() < 1e-7);
        assert!((relative_error(&ComplexVector::zeros(6), &unit).unwrap() - 1.0).abs() < 1e-15);
        assert!((relative_error(&unit.scale_real(1.1), &unit).unwrap() - 0.1).abs() < 1e-12);
        assert!(matches!(
            relative_error(&unit, &ComplexVector::zeros(6)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn align_examples() {
        let mut rng = SeededRng::new(9, 9);
        let u = sample_complex_gaussian::<f64>(&mut rng, 4);
        let u = u.scale_real(1.0 / u.norm());
        let z = sample_complex_gaussian::<f64>(&mut rng, 3);

        let same = align_scale(&u, &z).unwrap();
        assert!((same.applied_scale - 1.0).abs() < 1e-15);
        assert!(same.g_aligned.sub(&u).unwrap().norm() < 1e-15);

        let doubled = align_scale(&u.scale_real(2.0), &z).unwrap();
        assert!((doubled.applied_scale - 2.0).abs() < 1e-15);
        assert!(doubled.g_aligned.sub(&u).unwrap().norm() < 1e-15);
        assert!(doubled.z_aligned.sub(&z.scale_real(2.0)).unwrap().norm() < 1e-15);
        assert!((doubled.g_aligned.norm() - 1.0).abs() < 1e-12);

        assert!(align_scale(&ComplexVector::<f64>::zeros(4), &z).is_err());
    }

    #[test]
    fn pair_error_examples() {
        let mut rng = SeededRng::new(4, 4);
        let g = sample_complex_gaussian::<f64>(&mut rng, 5);
        let g = g.scale_real(1.0 / g.norm());
        let z = sample_complex_gaussian::<f64>(&mut rng, 5);

        let c0 = Complex::from_polar(1.7, 0.4);
        let g_est = g.scale(c0);
        let z_est = z.scale(Complex::new(1.0, 0.0) / c0.conj());
        assert!(pair_error(&g_est, &z_est, &g, &z).unwrap() < 1e-7);

        let half = pair_error(&g, &ComplexVector::zeros(5), &g, &z).unwrap();
        assert!((half - 0.5).abs() < 1e-15);

        // independent recomposition from the dist definition
        let g_est = sample_complex_gaussian::<f64>(&mut rng, 5);
        let z_est = sample_complex_gaussian::<f64>(&mut rng, 5);
        let s = g_est.norm();
        let manual = dist(&g_est.scale_real(1.0 / s), &g).unwrap() / (2.0 * g.norm())
            + dist(&z_est.scale_real(s), &z).unwrap() / (2.0 * z.norm());
        assert!((pair_error(&g_est, &z_est, &g, &z).unwrap() - manual).abs() < 1e-12);
    }

    #[test]
    fn snr_examples() {
        let clean = vec![1.0f64, -1.0, 1.0, 1.0];
        assert!(snr_db(&clean, 1.0, 4).unwrap().abs() < 1e-12);
        let shifted = snr_db(&clean, 1.0 / 10f64.sqrt(), 4).unwrap();
        assert!((shifted - 10.0).abs() < 1e-12);
        assert!(snr_db(&[0.0, 0.0], 1.0, 2).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn phase_invariance(seed in any::<u64>(), theta in 0.0f64..std::f64::consts::TAU, n in 1usize..32) {
            let w = sample_complex_gaussian::<f64>(&mut SeededRng::new(seed, 0), n);
            let d = dist(&w.scale(Complex::from_polar(1.0, theta)), &w).unwrap();
            prop_assert!(d <= 1e-8 * w.norm());
        }

        #[test]
        fn symmetric_and_below_plain_distance(seed in any::<u64>(), n in 1usize..32) {
            let mut rng = SeededRng::new(seed, 1);
            let a = sample_complex_gaussian::<f64>(&mut rng, n);
            let b = sample_complex_gaussian::<f64>(&mut rng, n);
            let ab = dist(&a, &b).unwrap();
            prop_assert!((ab - dist(&b, &a).unwrap()).abs() <= 1e-12);
            prop_assert!(ab <= a.sub(&b).unwrap().norm() + 1e-12);
        }
    }
}
