//! Fixed-step gradient descent over any of the gradient sources: the raw
//! objective gradient or one of the smoothed Monte-Carlo estimators.
//!
//! The recorded `value` column is always the raw (unsmoothed) objective,
//! so progress is measured on the true problem, not the surrogate.

use crate::error::{Error, Result};
use crate::estimators::{self, SmoothingConfig};
use crate::problems::Objective;

/// Which gradient the descent consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradSource {
    /// The objective's own a.e. gradient oracle.
    Raw,
    Zeroth,
    ZerothBaseline,
    First,
}

impl GradSource {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "raw" => Some(Self::Raw),
            "zeroth" => Some(Self::Zeroth),
            "zeroth_baseline" => Some(Self::ZerothBaseline),
            "first" => Some(Self::First),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Raw => "raw",
            Self::Zeroth => "zeroth",
            Self::ZerothBaseline => "zeroth_baseline",
            Self::First => "first",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DescentConfig {
    pub step_size: f64,
    pub max_iters: usize,
    pub grad_source: GradSource,
    /// Ignored when `grad_source` is `Raw`.
    pub smoothing: SmoothingConfig,
    /// Stop when the estimated gradient norm drops below this.
    pub stop_tol: f64,
    /// Draw fresh noise each iteration (stream seed xor iteration index).
    pub reseed_per_iter: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIters,
    StopTol,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::MaxIters => "max_iters",
            Self::StopTol => "stop_tol",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    pub iter: usize,
    pub x: Vec<f64>,
    /// Raw objective value at `x`.
    pub value: f64,
    /// Euclidean norm of the gradient estimate used at this iterate.
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub iterates: Vec<IterateRecord>,
    pub terminated_by: StopReason,
}

impl Trajectory {
    pub fn final_x(&self) -> &[f64] {
        &self.iterates.last().expect("trajectory is never empty").x
    }

    pub fn final_value(&self) -> f64 {
        self.iterates.last().expect("trajectory is never empty").value
    }
}

fn estimate_gradient(
    g: &Objective,
    x: &[f64],
    cfg: &DescentConfig,
    iter: usize,
) -> Result<Vec<f64>> {
    match cfg.grad_source {
        GradSource::Raw => g.gradient(x),
        _ => {
            let mut smoothing = cfg.smoothing;
            if cfg.reseed_per_iter {
                smoothing.seed ^= iter as u64;
            }
            let est = match cfg.grad_source {
                GradSource::Zeroth => estimators::grad_zeroth(g, x, &smoothing)?,
                GradSource::ZerothBaseline => estimators::grad_zeroth_baseline(g, x, &smoothing)?,
                GradSource::First => estimators::grad_first(g, x, &smoothing)?,
                GradSource::Raw => unreachable!(),
            };
            Ok(est.mean)
        }
    }
}

/// Run fixed-step descent `x_{k+1} = x_k - step * ghat_k` from `x0`.
pub fn run_descent(g: &Objective, x0: &[f64], cfg: &DescentConfig) -> Result<Trajectory> {
    if !(cfg.step_size > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "step_size must be positive, got {}",
            cfg.step_size
        )));
    }
    if cfg.max_iters == 0 {
        return Err(Error::InvalidConfig("max_iters must be >= 1".into()));
    }
    if cfg.stop_tol < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "stop_tol must be nonnegative, got {}",
            cfg.stop_tol
        )));
    }
    if cfg.grad_source == GradSource::Raw && !g.has_gradient() {
        return Err(Error::NoGradientOracle { name: g.name().to_string() });
    }

    let mut iterates = Vec::new();
    let mut x = x0.to_vec();
    for k in 0..=cfg.max_iters {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                iter: k,
                prefix: Trajectory { iterates, terminated_by: StopReason::MaxIters },
            });
        }
        let ghat = estimate_gradient(g, &x, cfg, k)?;
        let grad_norm = ghat.iter().map(|v| v * v).sum::<f64>().sqrt();
        iterates.push(IterateRecord { iter: k, x: x.clone(), value: g.value(&x), grad_norm });
        if grad_norm < cfg.stop_tol {
            return Ok(Trajectory { iterates, terminated_by: StopReason::StopTol });
        }
        if k == cfg.max_iters {
            break;
        }
        for (xi, gi) in x.iter_mut().zip(&ghat) {
            *xi -= cfg.step_size * gi;
        }
    }
    Ok(Trajectory { iterates, terminated_by: StopReason::MaxIters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{quadratic, wall_loss, WallImpulseScene};

    fn raw_cfg(step: f64, iters: usize) -> DescentConfig {
        DescentConfig {
            step_size: step,
            max_iters: iters,
            grad_source: GradSource::Raw,
            smoothing: SmoothingConfig::gaussian(0.3, 1, 1, 0),
            stop_tol: 0.0,
            reseed_per_iter: true,
        }
    }

    #[test]
    fn raw_descent_contracts_quadratic() {
        let g = quadratic(1);
        let traj = run_descent(&g, &[1.0], &raw_cfg(0.4, 50)).unwrap();
        let xf = traj.final_x()[0];
        assert!(xf.abs() < 1e-5, "final x {xf}");
        assert_eq!(traj.terminated_by, StopReason::MaxIters);
        assert_eq!(traj.iterates.len(), 51);
        assert_eq!(traj.iterates[0].iter, 0);
    }

    #[test]
    fn raw_descent_stalls_on_wall_plateau() {
        let g = wall_loss(&WallImpulseScene::default());
        let traj = run_descent(&g, &[2.0], &raw_cfg(0.5, 100)).unwrap();
        for rec in &traj.iterates {
            assert_eq!(rec.x, vec![2.0]);
            assert_eq!(rec.grad_norm, 0.0);
        }
        assert!(traj.final_value() > 0.0);
    }

    #[test]
    fn first_order_smoothing_escapes_wall_plateau() {
        // From u0=2 the free region sits 3.3 sigma away at eps=0.3, so the
        // initial drift is ~2e-4 per step and escape takes ~500 iterations.
        let g = wall_loss(&WallImpulseScene::default());
        let mut successes = 0;
        for seed in 0..10 {
            let cfg = DescentConfig {
                step_size: 0.5,
                max_iters: 1000,
                grad_source: GradSource::First,
                smoothing: SmoothingConfig::gaussian(0.3, 256, 1, seed),
                stop_tol: 0.0,
                reseed_per_iter: true,
            };
            let traj = run_descent(&g, &[2.0], &cfg).unwrap();
            if traj.iterates.iter().any(|r| r.value < 0.01) {
                successes += 1;
            }
        }
        assert_eq!(successes, 10, "only {successes}/10 seeds escaped");
    }

    #[test]
    fn zeroth_baseline_smoothing_escapes_edge_plateau() {
        let scene = crate::problems::EdgeRenderScene { pixels: 32, theta_target: 0.8 };
        let g = crate::problems::edge_loss(&scene);
        let mut successes = 0;
        for seed in 0..10 {
            let cfg = DescentConfig {
                step_size: 0.5,
                max_iters: 500,
                grad_source: GradSource::ZerothBaseline,
                smoothing: SmoothingConfig::gaussian(0.1, 256, 1, seed),
                stop_tol: 0.0,
                reseed_per_iter: true,
            };
            let traj = run_descent(&g, &[0.2], &cfg).unwrap();
            if traj.iterates.iter().any(|r| (r.x[0] - 0.8).abs() < 2.0 / 32.0) {
                successes += 1;
            }
        }
        assert!(successes >= 9, "only {successes}/10 seeds reached the target edge");
    }

    #[test]
    fn stop_tol_terminates_early() {
        let g = quadratic(1);
        let mut cfg = raw_cfg(0.4, 500);
        cfg.stop_tol = 1e-3;
        let traj = run_descent(&g, &[1.0], &cfg).unwrap();
        assert_eq!(traj.terminated_by, StopReason::StopTol);
        assert!(traj.iterates.len() < 501);
    }

    #[test]
    fn descent_is_deterministic() {
        let g = wall_loss(&WallImpulseScene::default());
        let cfg = DescentConfig {
            step_size: 0.5,
            max_iters: 50,
            grad_source: GradSource::First,
            smoothing: SmoothingConfig::gaussian(0.3, 64, 1, 7),
            stop_tol: 0.0,
            reseed_per_iter: true,
        };
        let a = run_descent(&g, &[2.0], &cfg).unwrap();
        let b = run_descent(&g, &[2.0], &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn divergence_reports_prefix() {
        let g = quadratic(1);
        // step far above 1/L so the iterates blow up
        let traj = run_descent(&g, &[1.0], &raw_cfg(1e3, 2000));
        match traj {
            Err(Error::Diverged { iter, prefix }) => {
                assert!(iter > 0);
                assert_eq!(prefix.iterates.len(), iter);
                assert!(prefix.iterates.iter().all(|r| r.x[0].is_finite()));
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn raw_source_requires_gradient_oracle() {
        let g = crate::problems::make_analytic("heaviside").unwrap();
        assert!(matches!(
            run_descent(&g, &[0.5], &raw_cfg(0.1, 5)),
            Err(Error::NoGradientOracle { .. })
        ));
    }
}
