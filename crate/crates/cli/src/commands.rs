//! Subcommand implementations.

use std::time::Instant;

use rayon::prelude::*;

use rsmooth_core::error::Error as CoreError;
use rsmooth_core::estimators::{
    grad_first, grad_zeroth, grad_zeroth_baseline, smoothed_value, SmoothingConfig,
};
use rsmooth_core::noise::{self, NoiseDistribution, NoiseKind, RngStream};
use rsmooth_core::optimize::{run_descent, DescentConfig, GradSource};
use rsmooth_core::oracle::{
    closed_form, finite_diff, quad_smoothed_grad, quad_smoothed_value, QuadratureRule,
};
use rsmooth_core::problems::{make_analytic, quadratic, Objective};

use crate::csvout::{
    emit, estimate_header, format_estimate_row, format_trajectory_row, optimize_header,
    EstimateRow,
};
use crate::spec::{
    check_point_dim, parse_u64_list, parse_vector, require, resolve_problem, ConfigFile,
};
use crate::{Cli, CliError, Command};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = ConfigFile::load(cli.config.as_deref())?;
    let seed = match cli.seed {
        Some(s) => s,
        None => cfg.u64("seed")?.unwrap_or(0),
    };
    let output = match &cli.output {
        Some(o) => Some(o.clone()),
        None => cfg.string("output")?,
    };
    match &cli.command {
        Command::Estimate(args) => cmd_estimate(args, &cfg, seed, output.as_deref()),
        Command::Sweep(args) => cmd_sweep(args, &cfg, seed, output.as_deref()),
        Command::Optimize(args) => cmd_optimize(args, &cfg, seed, output.as_deref()),
        Command::Validate(args) => cmd_validate(args, &cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Estimator {
    Value,
    Zeroth,
    ZerothBaseline,
    First,
}

impl Estimator {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "value" => Ok(Self::Value),
            "zeroth" => Ok(Self::Zeroth),
            "zeroth_baseline" => Ok(Self::ZerothBaseline),
            "first" => Ok(Self::First),
            _ => Err(CliError::Usage(format!(
                "field `estimator`: unknown estimator `{s}` (expected value, zeroth, zeroth_baseline, or first)"
            ))),
        }
    }

    fn as_str(&self) -> &'static str {
        match self {
            Self::Value => "value",
            Self::Zeroth => "zeroth",
            Self::ZerothBaseline => "zeroth_baseline",
            Self::First => "first",
        }
    }
}

fn runtime_err(e: CoreError) -> CliError {
    CliError::Runtime(e.to_string())
}

// Run one estimate; returns (mean, stderr) as vectors (length 1 for value).
fn run_estimator(
    est: Estimator,
    g: &Objective,
    x: &[f64],
    cfg: &SmoothingConfig,
) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    match est {
        Estimator::Value => {
            let v = smoothed_value(g, x, cfg).map_err(runtime_err)?;
            Ok((vec![v.mean], vec![v.stderr]))
        }
        Estimator::Zeroth => {
            let v = grad_zeroth(g, x, cfg).map_err(runtime_err)?;
            Ok((v.mean, v.stderr))
        }
        Estimator::ZerothBaseline => {
            let v = grad_zeroth_baseline(g, x, cfg).map_err(runtime_err)?;
            Ok((v.mean, v.stderr))
        }
        Estimator::First => {
            let v = grad_first(g, x, cfg).map_err(runtime_err)?;
            Ok((v.mean, v.stderr))
        }
    }
}

fn check_estimator_preconditions(
    est: Estimator,
    g: &Objective,
) -> Result<(), CliError> {
    if est == Estimator::First && !g.has_gradient() {
        return Err(CliError::Usage(format!(
            "field `estimator`: problem `{}` exposes no gradient oracle; the first-order estimator needs one",
            g.name()
        )));
    }
    Ok(())
}

fn positive(value: f64, field: &str) -> Result<f64, CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::Usage(format!("field `{field}` must be positive and finite, got {value}")))
    }
}

fn at_least_one(value: u64, field: &str) -> Result<u64, CliError> {
    if value >= 1 {
        Ok(value)
    } else {
        Err(CliError::Usage(format!("field `{field}` must be >= 1")))
    }
}

fn cmd_estimate(
    args: &crate::EstimateArgs,
    cfg: &ConfigFile,
    seed: u64,
    output: Option<&str>,
) -> Result<(), CliError> {
    let problem = require(args.problem.clone().or(cfg.string("problem")?), "problem")?;
    let g = resolve_problem(&problem)?;
    let x_str = require(args.x.clone().or(cfg.string("x")?), "x")?;
    let x = parse_vector(&x_str, "x")?;
    check_point_dim(&x, g.dim())?;
    let estimator = Estimator::parse(&require(
        args.estimator.clone().or(cfg.string("estimator")?),
        "estimator",
    )?)?;
    check_estimator_preconditions(estimator, &g)?;
    let epsilon = positive(require(args.epsilon.or(cfg.f64("epsilon")?), "epsilon")?, "epsilon")?;
    let samples = at_least_one(require(args.samples.or(cfg.u64("samples")?), "samples")?, "samples")?;

    let scfg = SmoothingConfig::gaussian(epsilon, samples, g.dim(), seed);
    let start = Instant::now();
    let (mean, stderr) = run_estimator(estimator, &g, &x, &scfg)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;

    let row = EstimateRow {
        problem,
        x,
        estimator: estimator.as_str().to_string(),
        epsilon,
        samples,
        seed,
        mean,
        stderr,
        wall_ms,
    };
    let csv = format!("{}\n{}\n", estimate_header(g.dim()), format_estimate_row(&row));
    emit(&csv, output)
}

fn cmd_sweep(
    args: &crate::SweepArgs,
    cfg: &ConfigFile,
    seed: u64,
    output: Option<&str>,
) -> Result<(), CliError> {
    let problem = require(args.problem.clone().or(cfg.string("problem")?), "problem")?;
    let g = resolve_problem(&problem)?;
    let estimator = Estimator::parse(&require(
        args.estimator.clone().or(cfg.string("estimator")?),
        "estimator",
    )?)?;
    check_estimator_preconditions(estimator, &g)?;
    let axis = require(args.sweep.clone().or(cfg.string("sweep")?), "sweep")?;
    let grid_str = require(args.grid.clone().or(cfg.string("grid")?), "grid")?;
    let grid = parse_vector(&grid_str, "grid")?;
    if grid.is_empty() {
        return Err(CliError::Usage("field `grid` must contain at least one value".into()));
    }
    let seeds = match args.seeds.clone().or(cfg.string("seeds")?) {
        Some(s) => parse_u64_list(&s, "seeds")?,
        None => vec![seed],
    };

    let x_flag = args.x.clone().or(cfg.string("x")?);
    let eps_flag = args.epsilon.or(cfg.f64("epsilon")?);
    let samples_flag = args.samples.or(cfg.u64("samples")?);

    // fixed values for the two non-swept axes; the swept one comes from the grid
    let (fixed_x, fixed_eps, fixed_samples): (Option<Vec<f64>>, Option<f64>, Option<u64>) =
        match axis.as_str() {
            "epsilon" => {
                let x = parse_vector(&require(x_flag, "x")?, "x")?;
                check_point_dim(&x, g.dim())?;
                (Some(x), None, Some(at_least_one(require(samples_flag, "samples")?, "samples")?))
            }
            "samples" => {
                let x = parse_vector(&require(x_flag, "x")?, "x")?;
                check_point_dim(&x, g.dim())?;
                (Some(x), Some(positive(require(eps_flag, "epsilon")?, "epsilon")?), None)
            }
            "x" => {
                if g.dim() != 1 {
                    return Err(CliError::Usage(
                        "field `sweep`: sweeping x requires a 1-dimensional problem".into(),
                    ));
                }
                (
                    None,
                    Some(positive(require(eps_flag, "epsilon")?, "epsilon")?),
                    Some(at_least_one(require(samples_flag, "samples")?, "samples")?),
                )
            }
            other => {
                return Err(CliError::Usage(format!(
                    "field `sweep`: unknown axis `{other}` (expected epsilon, samples, or x)"
                )))
            }
        };

    // validate the grid against the swept axis before running anything
    match axis.as_str() {
        "epsilon" => {
            for &v in &grid {
                positive(v, "grid")?;
            }
        }
        "samples" => {
            for &v in &grid {
                if v < 1.0 || v.fract() != 0.0 {
                    return Err(CliError::Usage(format!(
                        "field `grid`: sample counts must be positive integers, got {v}"
                    )));
                }
            }
        }
        _ => {}
    }

    let points: Vec<(f64, u64)> = grid
        .iter()
        .flat_map(|&gv| seeds.iter().map(move |&s| (gv, s)))
        .collect();

    let rows: Vec<Result<String, CliError>> = points
        .par_iter()
        .map(|&(gv, row_seed)| {
            let (x, epsilon, samples) = match axis.as_str() {
                "epsilon" => (fixed_x.clone().unwrap(), gv, fixed_samples.unwrap()),
                "samples" => (fixed_x.clone().unwrap(), fixed_eps.unwrap(), gv as u64),
                _ => (vec![gv], fixed_eps.unwrap(), fixed_samples.unwrap()),
            };
            let scfg = SmoothingConfig::gaussian(epsilon, samples, g.dim(), row_seed);
            let start = Instant::now();
            let (mean, stderr) = run_estimator(estimator, &g, &x, &scfg)?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            Ok(format_estimate_row(&EstimateRow {
                problem: problem.clone(),
                x,
                estimator: estimator.as_str().to_string(),
                epsilon,
                samples,
                seed: row_seed,
                mean,
                stderr,
                wall_ms,
            }))
        })
        .collect();

    let mut csv = String::new();
    csv.push_str(&estimate_header(g.dim()));
    csv.push('\n');
    for row in rows {
        csv.push_str(&row?);
        csv.push('\n');
    }
    emit(&csv, output)
}

fn cmd_optimize(
    args: &crate::OptimizeArgs,
    cfg: &ConfigFile,
    seed: u64,
    output: Option<&str>,
) -> Result<(), CliError> {
    let problem = require(args.problem.clone().or(cfg.string("problem")?), "problem")?;
    let g = resolve_problem(&problem)?;
    let x0_str = require(args.x0.clone().or(cfg.string("x0")?), "x0")?;
    let x0 = parse_vector(&x0_str, "x0")?;
    check_point_dim(&x0, g.dim())?;
    let source_str = require(args.grad_source.clone().or(cfg.string("grad_source")?), "grad_source")?;
    let grad_source = GradSource::parse(&source_str).ok_or_else(|| {
        CliError::Usage(format!(
            "field `grad_source`: unknown source `{source_str}` (expected raw, zeroth, zeroth_baseline, or first)"
        ))
    })?;
    if matches!(grad_source, GradSource::Raw | GradSource::First) && !g.has_gradient() {
        return Err(CliError::Usage(format!(
            "field `grad_source`: problem `{}` exposes no gradient oracle",
            g.name()
        )));
    }
    let step_size =
        positive(require(args.step_size.or(cfg.f64("step_size")?), "step_size")?, "step_size")?;
    let max_iters = require(args.max_iters.or(cfg.usize("max_iters")?), "max_iters")?;
    if max_iters == 0 {
        return Err(CliError::Usage("field `max_iters` must be >= 1".into()));
    }
    let stop_tol = args.stop_tol.or(cfg.f64("stop_tol")?).unwrap_or(0.0);
    if stop_tol < 0.0 {
        return Err(CliError::Usage(format!("field `stop_tol` must be nonnegative, got {stop_tol}")));
    }
    let reseed_per_iter = if args.no_reseed { false } else { cfg.bool("reseed")?.unwrap_or(true) };

    let smoothing = if grad_source == GradSource::Raw {
        // placeholder; unused on the raw path
        SmoothingConfig::gaussian(1.0, 1, g.dim(), seed)
    } else {
        let epsilon =
            positive(require(args.epsilon.or(cfg.f64("epsilon")?), "epsilon")?, "epsilon")?;
        let samples =
            at_least_one(require(args.samples.or(cfg.u64("samples")?), "samples")?, "samples")?;
        SmoothingConfig::gaussian(epsilon, samples, g.dim(), seed)
    };

    let dcfg = DescentConfig { step_size, max_iters, grad_source, smoothing, stop_tol, reseed_per_iter };
    let traj = run_descent(&g, &x0, &dcfg).map_err(runtime_err)?;

    let mut csv = String::new();
    csv.push_str(&optimize_header(g.dim()));
    csv.push('\n');
    for rec in &traj.iterates {
        csv.push_str(&format_trajectory_row(rec.iter, &rec.x, rec.value, rec.grad_norm));
        csv.push('\n');
    }
    csv.push_str(&format!(
        "# final_value={} terminated_by={}\n",
        traj.final_value(),
        traj.terminated_by.as_str()
    ));
    emit(&csv, output)
}

struct Check {
    name: &'static str,
    max_err: f64,
    tol: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.max_err < self.tol
    }
}

fn cmd_validate(args: &crate::ValidateArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let nodes = args.nodes.or(cfg.usize("nodes")?).unwrap_or(10_001);
    let half_width = args.half_width.or(cfg.f64("half_width")?).unwrap_or(8.0);
    let rule = QuadratureRule::new(nodes, half_width)
        .map_err(|e| CliError::Usage(format!("field `nodes`/`half_width`: {e}")))?;

    let mut checks: Vec<Check> = Vec::new();

    // closed form vs quadrature, 50 (x, eps) pairs per problem
    let xs: Vec<f64> = (0..10).map(|i| -2.0 + 4.0 * i as f64 / 9.0).collect();
    let epss = [0.1, 0.3, 0.5, 1.0, 2.0];
    for name in ["heaviside", "relu", "abs", "quadratic1d"] {
        let g = if name == "quadratic1d" { quadratic(1) } else { make_analytic(name).map_err(runtime_err)? };
        let mut max_err = 0.0f64;
        for &x in &xs {
            for &eps in &epss {
                let (cv, cg) = closed_form(name, x, eps).map_err(runtime_err)?;
                let qv = quad_smoothed_value(&g, x, eps, &rule).map_err(runtime_err)?;
                let qg = quad_smoothed_grad(&g, x, eps, &rule).map_err(runtime_err)?;
                max_err = max_err.max((cv - qv).abs()).max((cg - qg).abs());
            }
        }
        checks.push(Check { name: Box::leak(format!("closed_form_vs_quadrature/{name}").into_boxed_str()), max_err, tol: 1e-6 });
    }

    // quadrature gradient vs finite difference of quadrature value
    {
        let h = 1e-5;
        let mut max_err = 0.0f64;
        for name in ["heaviside", "relu", "abs"] {
            let g = make_analytic(name).map_err(runtime_err)?;
            for &x in &[-0.7, 0.0, 0.4, 1.3] {
                let qg = quad_smoothed_grad(&g, x, 0.5, &rule).map_err(runtime_err)?;
                let fd = (quad_smoothed_value(&g, x + h, 0.5, &rule).map_err(runtime_err)?
                    - quad_smoothed_value(&g, x - h, 0.5, &rule).map_err(runtime_err)?)
                    / (2.0 * h);
                max_err = max_err.max((qg - fd).abs());
            }
        }
        checks.push(Check { name: "quad_grad_vs_finite_diff", max_err, tol: 1e-6 });
    }

    // score vs finite difference of log-density
    {
        let h = 1e-5;
        let mut max_err = 0.0f64;
        for kind in [NoiseKind::StandardGaussian, NoiseKind::Logistic] {
            let dist = NoiseDistribution { kind, dim: 2 };
            for i in 0..100u64 {
                let z = noise::sample(&dist, RngStream::new(1234, i));
                let s = noise::score(&dist, &z).map_err(runtime_err)?;
                for k in 0..2 {
                    let mut zp = z.clone();
                    let mut zm = z.clone();
                    zp[k] += h;
                    zm[k] -= h;
                    let fd = (noise::log_density(&dist, &zp).map_err(runtime_err)?
                        - noise::log_density(&dist, &zm).map_err(runtime_err)?)
                        / (2.0 * h);
                    max_err = max_err.max((s[k] - fd).abs());
                }
            }
        }
        checks.push(Check { name: "score_vs_finite_diff_of_log_density", max_err, tol: 1e-6 });
    }

    // score identity E[grad log mu(Z)] = 0 at M = 1e5
    {
        let m = 100_000u64;
        let mut max_err = 0.0f64;
        for kind in [NoiseKind::StandardGaussian, NoiseKind::Logistic] {
            let dist = NoiseDistribution { kind, dim: 1 };
            let mut acc = 0.0;
            for i in 0..m {
                let z = noise::sample(&dist, RngStream::new(99, i));
                acc += noise::score(&dist, &z).map_err(runtime_err)?[0];
            }
            max_err = max_err.max((acc / m as f64).abs());
        }
        checks.push(Check { name: "score_identity_zero_mean", max_err, tol: 4.0 / (100_000f64).sqrt() });
    }

    // normalization: quadrature of a constant is exact
    {
        let g = Objective::new("const", 1, |_| 1.0);
        let v = quad_smoothed_value(&g, 0.0, 1.0, &rule).map_err(runtime_err)?;
        let d = quad_smoothed_grad(&g, 0.0, 1.0, &rule).map_err(runtime_err)?;
        checks.push(Check {
            name: "quadrature_normalization_constant",
            max_err: (v - 1.0).abs().max(d.abs()),
            tol: 1e-10,
        });
    }

    // gradient oracles vs finite differences away from kinks
    {
        let mut max_err = 0.0f64;
        for name in ["relu", "abs"] {
            let g = make_analytic(name).map_err(runtime_err)?;
            for &x in &[-1.5, -0.4, 0.6, 2.0] {
                let grad = g.gradient(&[x]).map_err(runtime_err)?;
                let fd = finite_diff(&g, &[x], 1e-6).map_err(runtime_err)?;
                max_err = max_err.max((grad[0] - fd[0]).abs());
            }
        }
        checks.push(Check { name: "objective_grad_vs_finite_diff", max_err, tol: 1e-4 });
    }

    let mut all_ok = true;
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        println!("{status} {} max_err={:e} tol={:e}", c.name, c.max_err, c.tol);
        all_ok &= c.passed();
    }
    if all_ok {
        Ok(())
    } else {
        Err(CliError::Runtime("oracle validation failed; see report above".into()))
    }
}
