//! Monte-Carlo estimators of the smoothed objective `g_eps` and its
//! gradient.
//!
//! Sample `i` always draws from stream index `i` and the reduction runs in
//! fixed ascending order with compensated summation, so results are
//! bit-identical regardless of how many worker threads evaluate the
//! samples.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::{self, NoiseDistribution, RngStream};
use crate::problems::Objective;

/// Everything needed to reproduce one estimate: noise scale, sample count,
/// smoothing distribution, and base seed.
#[derive(Debug, Clone, Copy)]
pub struct SmoothingConfig {
    pub epsilon: f64,
    pub samples: u64,
    pub dist: NoiseDistribution,
    pub seed: u64,
}

impl SmoothingConfig {
    pub fn gaussian(epsilon: f64, samples: u64, dim: usize, seed: u64) -> Self {
        Self { epsilon, samples, dist: NoiseDistribution::standard_gaussian(dim), seed }
    }

    pub fn validate(&self, x: &[f64]) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be >= 1".into()));
        }
        if x.len() != self.dist.dim {
            return Err(Error::DimMismatch { expected: self.dist.dim, got: x.len() });
        }
        for (i, &v) in x.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteInput { coord: i, value: v });
            }
        }
        Ok(())
    }
}

/// Monte-Carlo estimate of a scalar: sample mean and its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples_used: u64,
}

/// Monte-Carlo gradient estimate with per-coordinate standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples_used: u64,
    pub epsilon: f64,
}

// Compensated (Kahan) accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

// Evaluate one term vector per sample (in parallel), then reduce in fixed
// ascending order. `width` is the length of each term vector.
fn run_terms<F>(cfg: &SmoothingConfig, width: usize, term: F) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(u64, &[f64]) -> Result<Vec<f64>> + Sync,
{
    let terms: Vec<Vec<f64>> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let z = noise::sample(&cfg.dist, RngStream::new(cfg.seed, i));
            term(i, &z)
        })
        .collect::<Result<Vec<_>>>()?;

    let m = cfg.samples as f64;
    let mut mean = vec![0.0; width];
    for k in 0..width {
        let mut acc = KahanSum::default();
        for t in &terms {
            acc.add(t[k]);
        }
        mean[k] = acc.value() / m;
    }
    let mut stderr = vec![0.0; width];
    if cfg.samples > 1 {
        for k in 0..width {
            let mut acc = KahanSum::default();
            for t in &terms {
                let d = t[k] - mean[k];
                acc.add(d * d);
            }
            stderr[k] = (acc.value() / (m - 1.0) / m).sqrt();
        }
    }
    Ok((mean, stderr))
}

fn eval_value(g: &Objective, x: &[f64], sample_index: u64) -> Result<f64> {
    let v = g.value(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteValue { sample_index, value: v })
    }
}

/// Sample-average estimate of `g_eps(x) = E[g(x + eps Z)]`.
pub fn smoothed_value(g: &Objective, x: &[f64], cfg: &SmoothingConfig) -> Result<ValueEstimate> {
    cfg.validate(x)?;
    let (mean, stderr) = run_terms(cfg, 1, |i, z| {
        let xp: Vec<f64> = x.iter().zip(z).map(|(a, b)| a + cfg.epsilon * b).collect();
        Ok(vec![eval_value(g, &xp, i)?])
    })?;
    Ok(ValueEstimate { mean: mean[0], stderr: stderr[0], samples_used: cfg.samples })
}

/// Zeroth-order (score-function) gradient estimator: averages
/// `-g(x + eps z) * grad log mu(z) / eps`. Needs only function values, so
/// it applies even when `g` is non-differentiable.
pub fn grad_zeroth(g: &Objective, x: &[f64], cfg: &SmoothingConfig) -> Result<GradientEstimate> {
    grad_zeroth_impl(g, x, cfg, false)
}

/// Zeroth-order estimator with the value at `x` subtracted as a control
/// variate: same expectation, generally smaller variance near `x`.
pub fn grad_zeroth_baseline(
    g: &Objective,
    x: &[f64],
    cfg: &SmoothingConfig,
) -> Result<GradientEstimate> {
    grad_zeroth_impl(g, x, cfg, true)
}

fn grad_zeroth_impl(
    g: &Objective,
    x: &[f64],
    cfg: &SmoothingConfig,
    baseline: bool,
) -> Result<GradientEstimate> {
    cfg.validate(x)?;
    let d = cfg.dist.dim;
    let g0 = if baseline { eval_value(g, x, 0)? } else { 0.0 };
    let (mean, stderr) = run_terms(cfg, d, |i, z| {
        let xp: Vec<f64> = x.iter().zip(z).map(|(a, b)| a + cfg.epsilon * b).collect();
        let gv = eval_value(g, &xp, i)? - g0;
        let s = noise::score(&cfg.dist, z)?;
        Ok(s.iter().map(|sk| -gv * sk / cfg.epsilon).collect())
    })?;
    Ok(GradientEstimate { mean, stderr, samples_used: cfg.samples, epsilon: cfg.epsilon })
}

/// First-order gradient estimator: averages the objective's a.e. gradient
/// at noise-perturbed points. Requires a gradient oracle.
pub fn grad_first(g: &Objective, x: &[f64], cfg: &SmoothingConfig) -> Result<GradientEstimate> {
    cfg.validate(x)?;
    if !g.has_gradient() {
        return Err(Error::NoGradientOracle { name: g.name().to_string() });
    }
    let d = cfg.dist.dim;
    let (mean, stderr) = run_terms(cfg, d, |i, z| {
        let xp: Vec<f64> = x.iter().zip(z).map(|(a, b)| a + cfg.epsilon * b).collect();
        let grad = g.gradient(&xp)?;
        if grad.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient { sample_index: i });
        }
        Ok(grad)
    })?;
    Ok(GradientEstimate { mean, stderr, samples_used: cfg.samples, epsilon: cfg.epsilon })
}
