//! Seeded sampling on the constant-energy shell.
//!
//! A joint draw places all N velocities uniformly on the sphere
//! Σ v_i² = Ē by normalizing a standard Gaussian vector; marginal draws
//! keep only the first coordinate. Everything is deterministic in the
//! seed: same seed, same bytes, on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::distribution::{FiniteNDistribution, GasParams};
use crate::error::{Error, Result};

/// Seed for the deterministic stream generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSeed(pub u64);

/// One Gaussian deviate by the Marsaglia polar method, spare cached by
/// the caller. Returns (value, spare).
pub(crate) fn standard_normal<R: Rng>(rng: &mut R) -> (f64, f64) {
    loop {
        let x = 2.0 * rng.random::<f64>() - 1.0;
        let y = 2.0 * rng.random::<f64>() - 1.0;
        let s = x * x + y * y;
        if s > 0.0 && s < 1.0 {
            let f = (-2.0 * s.ln() / s).sqrt();
            return (x * f, y * f);
        }
    }
}

/// Gaussian stream with the polar method's spare value carried over, so
/// consecutive draws consume the generator in a reproducible pattern.
pub(crate) struct NormalStream<R: Rng> {
    rng: R,
    spare: Option<f64>,
}

impl<R: Rng> NormalStream<R> {
    pub(crate) fn new(rng: R) -> Self {
        Self { rng, spare: None }
    }

    pub(crate) fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let (z, spare) = standard_normal(&mut self.rng);
        self.spare = Some(spare);
        z
    }
}

/// Full microstate: every molecule's velocity, plus the parameters that
/// fix the shell it must stay on.
#[derive(Debug, Clone)]
pub struct ShellState {
    velocities: Vec<f64>,
    params: GasParams,
}

impl ShellState {
    pub(crate) fn from_parts(velocities: Vec<f64>, params: GasParams) -> Self {
        debug_assert_eq!(velocities.len(), params.n_molecules() as usize);
        Self { velocities, params }
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    pub(crate) fn velocities_mut(&mut self) -> &mut [f64] {
        &mut self.velocities
    }

    pub fn params(&self) -> &GasParams {
        &self.params
    }

    /// Σ v_i² with Neumaier compensation, so the drift measurement is not
    /// polluted by the summation itself even at N = 1e6.
    pub fn kinetic_sum(&self) -> f64 {
        let mut sum = 0.0;
        let mut comp = 0.0;
        for &v in &self.velocities {
            let term = v * v;
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }

    /// |Σ v_i² − Ē| / Ē, the relative distance from the exact shell.
    pub fn energy_drift(&self) -> f64 {
        let target = self.params.energy_scale();
        (self.kinetic_sum() - target).abs() / target
    }

    /// Rescale all velocities so Σ v_i² = Ē exactly again.
    pub(crate) fn renormalize(&mut self) {
        let sum = self.kinetic_sum();
        if sum > 0.0 {
            let scale = (self.params.energy_scale() / sum).sqrt();
            for v in &mut self.velocities {
                *v *= scale;
            }
        }
    }
}

/// A batch of scalar velocity samples with its generating metadata.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    values: Vec<f64>,
    n_molecules: u64,
    seed: RngSeed,
}

impl SampleBatch {
    pub(crate) fn from_parts(values: Vec<f64>, n_molecules: u64, seed: RngSeed) -> Self {
        Self {
            values,
            n_molecules,
            seed,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_molecules(&self) -> u64 {
        self.n_molecules
    }

    pub fn seed(&self) -> RngSeed {
        self.seed
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }
}

/// Draw one full microstate uniformly from the energy shell.
pub fn sample_joint(params: &GasParams, seed: RngSeed) -> Result<ShellState> {
    let mut stream = NormalStream::new(ChaCha12Rng::seed_from_u64(seed.0));
    let n = params.n_molecules() as usize;
    loop {
        let mut z = Vec::with_capacity(n);
        let mut sumsq = 0.0;
        for _ in 0..n {
            let g = stream.next_normal();
            sumsq += g * g;
            z.push(g);
        }
        if sumsq > 0.0 {
            let scale = (params.energy_scale() / sumsq).sqrt();
            for v in &mut z {
                *v *= scale;
            }
            return Ok(ShellState::from_parts(z, *params));
        }
        // a zero vector has probability ~0; redraw keeps the law exact
    }
}

/// Draw `count` independent single-molecule velocities.
///
/// Each draw generates the full Gaussian vector but keeps only the first
/// coordinate and the running sum of squares, so memory stays flat in N.
pub fn sample_marginal(
    dist: &FiniteNDistribution,
    seed: RngSeed,
    count: usize,
) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::InvalidParam("sample count must be >= 1".into()));
    }
    let params = dist.params();
    let n = params.n_molecules();
    let scale_sq = params.energy_scale();
    let radius = params.support_radius();
    let mut stream = NormalStream::new(ChaCha12Rng::seed_from_u64(seed.0));
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        loop {
            let first = stream.next_normal();
            let mut sumsq = first * first;
            for _ in 1..n {
                let g = stream.next_normal();
                sumsq += g * g;
            }
            if sumsq > 0.0 {
                let v = first * (scale_sq / sumsq).sqrt();
                // rounding can land a hair outside the closed support
                values.push(v.clamp(-radius, radius));
                break;
            }
        }
    }
    Ok(SampleBatch::from_parts(values, n, seed))
}
