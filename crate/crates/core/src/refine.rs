//! Least-squares objective, Wirtinger gradients and the stochastic refinement loop.
//!
//! The objective is `f(g, z) = (1/2m) Σ_ℓ (y[ℓ] - |(b̂_ℓ^H g)(ĉ_ℓ^H z)|²)²` and the
//! update directions over a minibatch `Γ` are
//!
//! ```text
//! d_g = (1/m) Σ_{ℓ∈Γ} γ[ℓ] |ĉ_ℓ^H z|² b̂_ℓ b̂_ℓ^H g
//! d_z = (1/m) Σ_{ℓ∈Γ} γ[ℓ] |b̂_ℓ^H g|² ĉ_ℓ ĉ_ℓ^H z
//! γ[ℓ] = |(b̂_ℓ^H g)(ĉ_ℓ^H z)|² - y[ℓ]
//! ```
//!
//! With `Γ = {1..m}` these are exactly `∂f/∂ḡ` and `∂f/∂z̄`.

use num_complex::Complex;
use num_traits::Zero;

use crate::complex::{matvec, ComplexMatrix, ComplexVector, SeededRng};
use crate::metrics::pair_error;
use crate::model::ProblemInstance;
use crate::spectral::{build_correlation, initialize, power_iteration, Side, SpectralInit};
use crate::{Error, Real, Result};

/// Default power-iteration rounds for the initializer.
pub const DEFAULT_INIT_ITERS: usize = 150;
/// Default stopping tolerance on the direction norms.
pub const DEFAULT_TOL: f64 = 1e-2;
/// Default iteration cap.
pub const DEFAULT_MAX_ITERS: usize = 500;

/// How the two direction norms combine in the stopping test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopRule {
    /// Stop as soon as either `‖d_g‖` or `‖d_z‖` drops below `tol`.
    #[default]
    EitherBelow,
    /// Stop only when both are below `tol`.
    BothBelow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineConfig<T> {
    pub alpha_g: T,
    pub alpha_z: T,
    /// Minibatch cardinality `Q`.
    pub batch_size: usize,
    pub tol: T,
    pub max_iters: usize,
    pub stop_rule: StopRule,
    pub seed: u64,
    pub stream: u64,
}

impl<T: Real> RefineConfig<T> {
    pub fn new(alpha_g: T, alpha_z: T, batch_size: usize) -> Self {
        Self {
            alpha_g,
            alpha_z,
            batch_size,
            tol: T::of(DEFAULT_TOL),
            max_iters: DEFAULT_MAX_ITERS,
            stop_rule: StopRule::default(),
            seed: 0,
            stream: 0,
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if !(self.alpha_g > T::zero() && self.alpha_z > T::zero())
            || !self.alpha_g.is_finite()
            || !self.alpha_z.is_finite()
        {
            return Err(Error::Config(
                "step sizes must be positive and finite".into(),
            ));
        }
        if self.batch_size == 0 || self.batch_size > m {
            return Err(Error::Config(format!(
                "batch size must satisfy 1 <= Q <= m = {m}, got {}",
                self.batch_size
            )));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::Config("tol must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Fraction of the inverse block curvature used by [`StepRule::Curvature`].
pub const DEFAULT_CURVATURE_SCALE: f64 = 0.9;

const CURVATURE_POWER_ITERS: usize = 50;

/// How unset step sizes are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// `α = scale / L`, with `L` the largest eigenvalue of the block curvature
    /// `(1/m) Σ 2|ĉ^H z|⁴|b̂^H g|² b̂ b̂^H` (and its mirror for `z`) at the
    /// starting point.
    Curvature { scale: f64 },
    /// `α_g = α_z = scale / λ_z`.
    InverseLambda { scale: f64 },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Curvature {
            scale: DEFAULT_CURVATURE_SCALE,
        }
    }
}

/// `α_g = α_z = scale/λ_z`, with `λ_z` the initializer's leading eigenvalue.
pub fn inverse_lambda_step_sizes<T: Real>(lambda_z: T, scale: T) -> Result<(T, T)> {
    if !(lambda_z > T::zero()) || !lambda_z.is_finite() {
        return Err(Error::DegenerateSpectrum(
            "step sizes need a positive leading eigenvalue",
        ));
    }
    Ok((scale / lambda_z, scale / lambda_z))
}

/// Largest eigenvalues `(L_g, L_z)` of the two diagonal curvature blocks at `(g, z)`.
pub fn block_curvature<T: Real>(
    g: &ComplexVector<T>,
    z: &ComplexVector<T>,
    b_hat: &ComplexMatrix<T>,
    c_hat: &ComplexMatrix<T>,
    rng: &mut SeededRng,
) -> Result<(T, T)> {
    let p = matvec(b_hat, g)?;
    let q = matvec(c_hat, z)?;
    if p.len() != q.len() {
        return Err(Error::dim("Chat rows", p.len(), q.len()));
    }
    let two = T::of(2.0);
    let (wg, wz): (Vec<T>, Vec<T>) = p
        .iter()
        .zip(q.iter())
        .map(|(a, b)| {
            let (pp, qq) = (a.norm_sqr(), b.norm_sqr());
            (two * qq * qq * pp, two * pp * pp * qq)
        })
        .unzip();
    let lg = power_iteration(
        &build_correlation(&wg, b_hat, Side::Kernel)?,
        CURVATURE_POWER_ITERS,
        rng,
    )?;
    let lz = power_iteration(
        &build_correlation(&wz, c_hat, Side::Signal)?,
        CURVATURE_POWER_ITERS,
        rng,
    )?;
    Ok((lg.eigenvalue, lz.eigenvalue))
}

/// `α = scale/L` per block, see [`block_curvature`].
pub fn curvature_step_sizes<T: Real>(
    g: &ComplexVector<T>,
    z: &ComplexVector<T>,
    b_hat: &ComplexMatrix<T>,
    c_hat: &ComplexMatrix<T>,
    scale: T,
    rng: &mut SeededRng,
) -> Result<(T, T)> {
    let (lg, lz) = block_curvature(g, z, b_hat, c_hat, rng).map_err(|e| match e {
        Error::DegenerateSpectrum(_) => Error::Degenerate("starting point has zero curvature"),
        other => other,
    })?;
    if !(lg > T::zero() && lz > T::zero()) {
        return Err(Error::Degenerate("starting point has zero curvature"));
    }
    Ok((scale / lg, scale / lz))
}

/// Default minibatch size `⌈m/10⌉`.
pub fn default_batch_size(m: usize) -> usize {
    m.div_ceil(10).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterateState<T> {
    pub g: ComplexVector<T>,
    pub z: ComplexVector<T>,
    pub t: usize,
    pub dg_norm: T,
    pub dz_norm: T,
}

impl<T: Real> IterateState<T> {
    pub fn new(g: ComplexVector<T>, z: ComplexVector<T>) -> Self {
        Self {
            g,
            z,
            t: 0,
            dg_norm: T::zero(),
            dz_norm: T::zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord<T> {
    pub t: usize,
    pub objective: T,
    pub dg_norm: T,
    pub dz_norm: T,
    pub pair_error: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RefineTrace<T> {
    pub records: Vec<TraceRecord<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIters,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::MaxIters => "max-iters",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refinement<T> {
    pub g: ComplexVector<T>,
    pub z: ComplexVector<T>,
    /// Number of updates applied.
    pub iterations: usize,
    pub trace: RefineTrace<T>,
    pub stop_reason: StopReason,
}

struct Problem<'a, T> {
    y: &'a [T],
    b_hat: &'a ComplexMatrix<T>,
    c_hat: &'a ComplexMatrix<T>,
}

impl<'a, T: Real> Problem<'a, T> {
    fn new(
        y: &'a [T],
        b_hat: &'a ComplexMatrix<T>,
        c_hat: &'a ComplexMatrix<T>,
        g: &ComplexVector<T>,
        z: &ComplexVector<T>,
    ) -> Result<Self> {
        let m = b_hat.rows();
        if c_hat.rows() != m {
            return Err(Error::dim("Chat rows", m, c_hat.rows()));
        }
        if y.len() != m {
            return Err(Error::dim("measurement length", m, y.len()));
        }
        if g.len() != b_hat.cols() {
            return Err(Error::dim("g length", b_hat.cols(), g.len()));
        }
        if z.len() != c_hat.cols() {
            return Err(Error::dim("z length", c_hat.cols(), z.len()));
        }
        Ok(Self { y, b_hat, c_hat })
    }

    fn m(&self) -> usize {
        self.y.len()
    }

    #[inline]
    fn projections(
        &self,
        l: usize,
        g: &[Complex<T>],
        z: &[Complex<T>],
    ) -> (Complex<T>, Complex<T>) {
        let dot = |row: &[Complex<T>], v: &[Complex<T>]| {
            row.iter()
                .zip(v)
                .fold(Complex::zero(), |acc, (a, b)| acc + a * b)
        };
        (dot(self.b_hat.row(l), g), dot(self.c_hat.row(l), z))
    }

    /// `(d_g, d_z)` summed over `batch`, scaled by `1/m`.
    fn directions(
        &self,
        g: &ComplexVector<T>,
        z: &ComplexVector<T>,
        batch: impl IntoIterator<Item = usize>,
    ) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let mut dg = vec![Complex::zero(); g.len()];
        let mut dz = vec![Complex::zero(); z.len()];
        for l in batch {
            let (p, q) = self.projections(l, g.as_slice(), z.as_slice());
            let (pp, qq) = (p.norm_sqr(), q.norm_sqr());
            let gamma = pp * qq - self.y[l];
            // b̂ b̂^H g = conj(row) (row · g)
            let wg = p * (gamma * qq);
            for (d, r) in dg.iter_mut().zip(self.b_hat.row(l)) {
                *d += r.conj() * wg;
            }
            let wz = q * (gamma * pp);
            for (d, r) in dz.iter_mut().zip(self.c_hat.row(l)) {
                *d += r.conj() * wz;
            }
        }
        let inv_m = T::of(self.m() as f64).recip();
        dg.iter_mut().for_each(|d| *d *= inv_m);
        dz.iter_mut().for_each(|d| *d *= inv_m);
        (dg, dz)
    }

    fn objective(&self, g: &ComplexVector<T>, z: &ComplexVector<T>) -> T {
        let sum: T = (0..self.m())
            .map(|l| {
                let (p, q) = self.projections(l, g.as_slice(), z.as_slice());
                let r = self.y[l] - p.norm_sqr() * q.norm_sqr();
                r * r
            })
            .sum();
        sum / T::of(2.0 * self.m() as f64)
    }
}

fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt()
}

fn descend<T: Real>(x: &ComplexVector<T>, d: &[Complex<T>], step: T) -> ComplexVector<T> {
    ComplexVector::from_vec_unchecked(x.iter().zip(d).map(|(a, b)| a - b * step).collect())
}

/// Evaluates the least-squares objective.
pub fn objective<T: Real>(
    g: &ComplexVector<T>,
    z: &ComplexVector<T>,
    y: &[T],
    b_hat: &ComplexMatrix<T>,
    c_hat: &ComplexMatrix<T>,
) -> Result<T> {
    Ok(Problem::new(y, b_hat, c_hat, g, z)?.objective(g, z))
}

/// Signed residual `γ[ℓ]` (zero-based `l`).
pub fn residual<T: Real>(
    l: usize,
    g: &ComplexVector<T>,
    z: &ComplexVector<T>,
    y: &[T],
    b_hat: &ComplexMatrix<T>,
    c_hat: &ComplexMatrix<T>,
) -> Result<T> {
    let problem = Problem::new(y, b_hat, c_hat, g, z)?;
    if l >= problem.m() {
        return Err(Error::Config(format!(
            "measurement index {l} out of range for m = {}",
            problem.m()
        )));
    }
    let (p, q) = problem.projections(l, g.as_slice(), z.as_slice());
    Ok(p.norm_sqr() * q.norm_sqr() - y[l])
}

/// Full Wirtinger gradient `(∂f/∂ḡ, ∂f/∂z̄)`.
pub fn full_gradient<T: Real>(
    g: &ComplexVector<T>,
    z: &ComplexVector<T>,
    y: &[T],
    b_hat: &ComplexMatrix<T>,
    c_hat: &ComplexMatrix<T>,
) -> Result<(ComplexVector<T>, ComplexVector<T>)> {
    let problem = Problem::new(y, b_hat, c_hat, g, z)?;
    let (dg, dz) = problem.directions(g, z, 0..problem.m());
    Ok((
        ComplexVector::from_vec_unchecked(dg),
        ComplexVector::from_vec_unchecked(dz),
    ))
}

/// Minibatch directions `(d_g, d_z)` for an explicit batch of zero-based indices.
pub fn minibatch_directions<T: Real>(
    g: &ComplexVector<T>,
    z: &ComplexVector<T>,
    batch: &[usize],
    y: &[T],
    b_hat: &ComplexMatrix<T>,
    c_hat: &ComplexMatrix<T>,
) -> Result<(ComplexVector<T>, ComplexVector<T>)> {
    let problem = Problem::new(y, b_hat, c_hat, g, z)?;
    check_batch(batch, problem.m())?;
    let (dg, dz) = problem.directions(g, z, batch.iter().copied());
    Ok((
        ComplexVector::from_vec_unchecked(dg),
        ComplexVector::from_vec_unchecked(dz),
    ))
}

fn check_batch(batch: &[usize], m: usize) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::Config("empty minibatch".into()));
    }
    if let Some(&bad) = batch.iter().find(|&&l| l >= m) {
        return Err(Error::Config(format!(
            "batch index {bad} out of range for m = {m}"
        )));
    }
    Ok(())
}

/// Uniformly random `q`-subset of `0..m`, sorted ascending.
pub fn sample_minibatch(m: usize, q: usize, rng: &mut SeededRng) -> Result<Vec<usize>> {
    if q == 0 || q > m {
        return Err(Error::Config(format!(
            "batch size must satisfy 1 <= Q <= m = {m}, got {q}"
        )));
    }
    if q == m {
        return Ok((0..m).collect());
    }
    let mut batch = rand::seq::index::sample(rng, m, q).into_vec();
    batch.sort_unstable();
    Ok(batch)
}

/// One simultaneous update of `g` and `z`, both directions evaluated at the current state.
pub fn sgd_step<T: Real>(
    state: &IterateState<T>,
    batch: &[usize],
    config: &RefineConfig<T>,
    y: &[T],
    b_hat: &ComplexMatrix<T>,
    c_hat: &ComplexMatrix<T>,
) -> Result<IterateState<T>> {
    let problem = Problem::new(y, b_hat, c_hat, &state.g, &state.z)?;
    check_batch(batch, problem.m())?;
    let (dg, dz) = problem.directions(&state.g, &state.z, batch.iter().copied());
    let next = IterateState {
        g: descend(&state.g, &dg, config.alpha_g),
        z: descend(&state.z, &dz, config.alpha_z),
        t: state.t + 1,
        dg_norm: norm(&dg),
        dz_norm: norm(&dz),
    };
    if !(next.g.is_finite() && next.z.is_finite()) {
        return Err(Error::Divergence { iteration: state.t });
    }
    Ok(next)
}

fn should_stop<T: Real>(rule: StopRule, dg: T, dz: T, tol: T) -> bool {
    match rule {
        StopRule::EitherBelow => dg < tol || dz < tol,
        StopRule::BothBelow => dg < tol && dz < tol,
    }
}

/// Runs minibatch updates from `(g0, z0)`.
///
/// Each pass draws a fresh minibatch, records the current iterate, and applies
/// the update. The loop then ends with [`StopReason::MaxIters`] once
/// `max_iters` updates have been made, or with [`StopReason::Converged`] when
/// the directions just used pass the stopping test. `truth`, when given, adds
/// the pair error to every trace record.
pub fn run_refinement<T: Real>(
    g0: &ComplexVector<T>,
    z0: &ComplexVector<T>,
    y: &[T],
    b_hat: &ComplexMatrix<T>,
    c_hat: &ComplexMatrix<T>,
    config: &RefineConfig<T>,
    truth: Option<(&ComplexVector<T>, &ComplexVector<T>)>,
) -> Result<Refinement<T>> {
    let problem = Problem::new(y, b_hat, c_hat, g0, z0)?;
    config.validate(problem.m())?;
    if g0.norm().is_zero() && z0.norm().is_zero() {
        return Err(Error::Degenerate(
            "refinement needs a nonzero starting point",
        ));
    }
    let mut rng = SeededRng::new(config.seed, config.stream);
    let mut g = g0.clone();
    let mut z = z0.clone();
    let mut trace = RefineTrace::default();
    let mut t = 0;
    let stop_reason = loop {
        let batch = sample_minibatch(problem.m(), config.batch_size, &mut rng)?;
        let (dg, dz) = problem.directions(&g, &z, batch.iter().copied());
        let (dg_norm, dz_norm) = (norm(&dg), norm(&dz));
        if !(dg_norm.is_finite() && dz_norm.is_finite()) {
            return Err(Error::Divergence { iteration: t });
        }
        let pair = match truth {
            Some((gt, zt)) => pair_error(&g, &z, gt, zt).ok(),
            None => None,
        };
        trace.records.push(TraceRecord {
            t,
            objective: problem.objective(&g, &z),
            dg_norm,
            dz_norm,
            pair_error: pair,
        });
        g = descend(&g, &dg, config.alpha_g);
        z = descend(&z, &dz, config.alpha_z);
        if !(g.is_finite() && z.is_finite()) {
            return Err(Error::Divergence { iteration: t });
        }
        t += 1;
        if t >= config.max_iters {
            break StopReason::MaxIters;
        }
        if should_stop(config.stop_rule, dg_norm, dz_norm, config.tol) {
            break StopReason::Converged;
        }
    };
    Ok(Refinement {
        g,
        z,
        iterations: t,
        trace,
        stop_reason,
    })
}

/// End-to-end solver settings. Unset step sizes follow `step_rule`; an unset
/// batch size falls back to [`default_batch_size`].
#[derive(Debug, Clone, PartialEq)]
pub struct BliphasuConfig<T> {
    pub init_iters: usize,
    pub alpha_g: Option<T>,
    pub alpha_z: Option<T>,
    pub step_rule: StepRule,
    pub batch_size: Option<usize>,
    pub tol: T,
    pub max_iters: usize,
    pub stop_rule: StopRule,
    pub seed: u64,
    pub stream: u64,
}

impl<T: Real> Default for BliphasuConfig<T> {
    fn default() -> Self {
        Self {
            init_iters: DEFAULT_INIT_ITERS,
            alpha_g: None,
            alpha_z: None,
            step_rule: StepRule::default(),
            batch_size: None,
            tol: T::of(DEFAULT_TOL),
            max_iters: DEFAULT_MAX_ITERS,
            stop_rule: StopRule::default(),
            seed: 0,
            stream: 0,
        }
    }
}

impl<T: Real> BliphasuConfig<T> {
    /// Builds the refinement config for a run starting at `start`.
    ///
    /// `rng` is only consumed when a curvature-based step has to be estimated.
    pub fn refine_config(
        &self,
        start: (&ComplexVector<T>, &ComplexVector<T>),
        lambda_z: T,
        b_hat: &ComplexMatrix<T>,
        c_hat: &ComplexMatrix<T>,
        stream: u64,
        rng: &mut SeededRng,
    ) -> Result<RefineConfig<T>> {
        let m = b_hat.rows();
        let (alpha_g, alpha_z) = match (self.alpha_g, self.alpha_z) {
            (Some(a), Some(b)) => (a, b),
            (ag, az) => {
                let (dg, dz) = match self.step_rule {
                    StepRule::Curvature { scale } => {
                        curvature_step_sizes(start.0, start.1, b_hat, c_hat, T::of(scale), rng)?
                    }
                    StepRule::InverseLambda { scale } => {
                        inverse_lambda_step_sizes(lambda_z, T::of(scale))?
                    }
                };
                (ag.unwrap_or(dg), az.unwrap_or(dz))
            }
        };
        let config = RefineConfig {
            alpha_g,
            alpha_z,
            batch_size: self.batch_size.unwrap_or_else(|| default_batch_size(m)),
            tol: self.tol,
            max_iters: self.max_iters,
            stop_rule: self.stop_rule,
            seed: self.seed,
            stream,
        };
        config.validate(m)?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovery<T> {
    pub g_hat: ComplexVector<T>,
    pub z_hat: ComplexVector<T>,
    /// `C z_hat`, when the instance carries `C`.
    pub x_hat: Option<ComplexVector<T>>,
    /// `B g_hat`, when the instance carries `B`.
    pub h_hat: Option<ComplexVector<T>>,
    pub init: SpectralInit<T>,
    pub refinement: Refinement<T>,
}

const INIT_TAG: u64 = 1;
const REFINE_TAG: u64 = 2;
const STEP_TAG: u64 = 3;

/// Spectral initialization followed by stochastic refinement.
pub fn bliphasu<T: Real>(
    y: &[T],
    instance: &ProblemInstance<T>,
    config: &BliphasuConfig<T>,
) -> Result<Recovery<T>> {
    let base = SeededRng::new(config.seed, config.stream);
    let init = initialize(
        y,
        &instance.b_hat,
        &instance.c_hat,
        config.init_iters,
        &mut base.derive(INIT_TAG),
    )?;
    let refine = config.refine_config(
        (&init.g0, &init.z0),
        init.lambda_z,
        &instance.b_hat,
        &instance.c_hat,
        base.derive(REFINE_TAG).stream(),
        &mut base.derive(STEP_TAG),
    )?;
    let truth = instance.g_true.as_ref().zip(instance.z_true.as_ref());
    let refinement = run_refinement(
        &init.g0,
        &init.z0,
        y,
        &instance.b_hat,
        &instance.c_hat,
        &refine,
        truth,
    )?;
    let h_hat = instance
        .b
        .as_ref()
        .map(|b| matvec(b, &refinement.g))
        .transpose()?;
    let x_hat = instance
        .c
        .as_ref()
        .map(|c| matvec(c, &refinement.z))
        .transpose()?;
    Ok(Recovery {
        g_hat: refinement.g.clone(),
        z_hat: refinement.z.clone(),
        x_hat,
        h_hat,
        init,
        refinement,
    })
}
