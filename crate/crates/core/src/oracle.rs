//! Independent ground truth for the Monte-Carlo estimators: closed-form
//! smoothed values/gradients under Gaussian noise, deterministic 1D
//! quadrature of the smoothing integral, and finite differences.
//!
//! The quadrature truncates the Gaussian at `|z| = 8` by default; the
//! discarded tail mass is below 1e-15. Piecewise-smooth integrands are
//! handled by splitting the domain at the objective's declared kink
//! locations, so step functions integrate to full accuracy.

use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::problems::Objective;

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

/// Composite-Simpson rule over `[-half_width, half_width]` in z-units.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureRule {
    /// Total node budget, distributed over smooth pieces.
    pub nodes: usize,
    /// Truncation of the Gaussian in z-units.
    pub half_width: f64,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self { nodes: 10_001, half_width: 8.0 }
    }
}

impl QuadratureRule {
    pub fn new(nodes: usize, half_width: f64) -> Result<Self> {
        if nodes < 3 || nodes % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "quadrature nodes must be odd and >= 3, got {nodes}"
            )));
        }
        if half_width <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "quadrature half_width must be positive, got {half_width}"
            )));
        }
        Ok(Self { nodes, half_width })
    }
}

// Simpson over [a, b] with n nodes (odd, >= 3). Endpoints are nudged
// inward by a tiny delta so one-sided values are used next to jumps.
fn simpson<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64, n: usize) -> Result<f64> {
    debug_assert!(n >= 3 && n % 2 == 1);
    let h = (b - a) / (n - 1) as f64;
    let delta = 1e-12 * (1.0 + a.abs().max(b.abs()));
    let mut acc = f(a + delta)? + f(b - delta)?;
    for i in 1..n - 1 {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h)?;
    }
    Ok(acc * h / 3.0)
}

// Integrate f over [-hw, hw], splitting at the given z-space breakpoints.
fn integrate_piecewise<F: Fn(f64) -> Result<f64>>(
    f: F,
    rule: &QuadratureRule,
    breakpoints: &[f64],
) -> Result<f64> {
    let hw = rule.half_width;
    let mut cuts = vec![-hw];
    let mut sorted: Vec<f64> = breakpoints.iter().copied().filter(|z| z.abs() < hw).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for z in sorted {
        if z - cuts.last().unwrap() > 1e-9 {
            cuts.push(z);
        }
    }
    cuts.push(hw);

    let total_len = 2.0 * hw;
    let mut sum = 0.0;
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        // node count proportional to piece length, forced odd
        let mut n = ((rule.nodes as f64) * (b - a) / total_len).ceil() as usize;
        n = n.max(9);
        if n % 2 == 0 {
            n += 1;
        }
        sum += simpson(&f, a, b, n)?;
    }
    Ok(sum)
}

fn check_finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteValue { sample_index: 0, value: v })
    }
}

/// Deterministic `g_eps(x) = int g(x + eps z) phi(z) dz` for 1D objectives
/// under Gaussian smoothing.
pub fn quad_smoothed_value(g: &Objective, x: f64, epsilon: f64, rule: &QuadratureRule) -> Result<f64> {
    if g.dim() != 1 {
        return Err(Error::DimMismatch { expected: 1, got: g.dim() });
    }
    if epsilon <= 0.0 {
        return Err(Error::InvalidConfig(format!("epsilon must be positive, got {epsilon}")));
    }
    let z_kinks: Vec<f64> = g.kinks().iter().map(|k| (k - x) / epsilon).collect();
    integrate_piecewise(
        |z| check_finite(g.value(&[x + epsilon * z]) * normal_pdf(z)),
        rule,
        &z_kinks,
    )
}

/// Deterministic gradient of the smoothed objective, in score-function
/// form: `int g(x + eps z) * z / eps * phi(z) dz` (Gaussian score `-z`).
pub fn quad_smoothed_grad(g: &Objective, x: f64, epsilon: f64, rule: &QuadratureRule) -> Result<f64> {
    if g.dim() != 1 {
        return Err(Error::DimMismatch { expected: 1, got: g.dim() });
    }
    if epsilon <= 0.0 {
        return Err(Error::InvalidConfig(format!("epsilon must be positive, got {epsilon}")));
    }
    let z_kinks: Vec<f64> = g.kinks().iter().map(|k| (k - x) / epsilon).collect();
    integrate_piecewise(
        |z| check_finite(g.value(&[x + epsilon * z]) * z / epsilon * normal_pdf(z)),
        rule,
        &z_kinks,
    )
}

/// Exact `(g_eps(x), g_eps'(x))` under Gaussian smoothing for the named
/// analytic problems.
pub fn closed_form(name: &str, x: f64, epsilon: f64) -> Result<(f64, f64)> {
    let t = x / epsilon;
    match name {
        "heaviside" => Ok((normal_cdf(t), normal_pdf(t) / epsilon)),
        "relu" => Ok((x * normal_cdf(t) + epsilon * normal_pdf(t), normal_cdf(t))),
        "abs" => Ok((
            x * (2.0 * normal_cdf(t) - 1.0) + 2.0 * epsilon * normal_pdf(t),
            2.0 * normal_cdf(t) - 1.0,
        )),
        "quadratic1d" => Ok((x * x + epsilon * epsilon, 2.0 * x)),
        _ => Err(Error::UnknownProblem { name: name.to_string() }),
    }
}

/// Central finite difference of the objective, per coordinate.
pub fn finite_diff(g: &Objective, x: &[f64], h: f64) -> Result<Vec<f64>> {
    if h <= 0.0 {
        return Err(Error::InvalidConfig(format!("finite-difference step must be positive, got {h}")));
    }
    let mut out = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        let (vp, vm) = (g.value(&xp), g.value(&xm));
        if !vp.is_finite() || !vm.is_finite() {
            return Err(Error::NonFiniteValue { sample_index: 0, value: if vp.is_finite() { vm } else { vp } });
        }
        out.push((vp - vm) / (2.0 * h));
    }
    Ok(out)
}
