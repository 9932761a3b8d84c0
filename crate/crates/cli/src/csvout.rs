//! CSV emission with fixed, schema-stable headers.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so
//! identical runs produce byte-identical bodies. Volatile data
//! (wall-clock timing) lives in the trailing `wall_ms` column of
//! estimate/sweep rows; everything before it is deterministic.

use crate::CliError;

pub fn estimate_header(dim: usize) -> String {
    let xs: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    let means: Vec<String> = (0..dim).map(|i| format!("mean{i}")).collect();
    let errs: Vec<String> = (0..dim).map(|i| format!("stderr{i}")).collect();
    format!(
        "problem,{},estimator,epsilon,samples,seed,{},{},wall_ms",
        xs.join(","),
        means.join(","),
        errs.join(",")
    )
}

pub struct EstimateRow {
    pub problem: String,
    pub x: Vec<f64>,
    pub estimator: String,
    pub epsilon: f64,
    pub samples: u64,
    pub seed: u64,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub wall_ms: f64,
}

pub fn format_estimate_row(r: &EstimateRow) -> String {
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    format!(
        "{},{},{},{},{},{},{},{},{:.3}",
        r.problem,
        join(&r.x),
        r.estimator,
        r.epsilon,
        r.samples,
        r.seed,
        join(&r.mean),
        join(&r.stderr),
        r.wall_ms
    )
}

pub fn optimize_header(dim: usize) -> String {
    let xs: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    format!("iter,{},value,grad_norm", xs.join(","))
}

pub fn format_trajectory_row(iter: usize, x: &[f64], value: f64, grad_norm: f64) -> String {
    let xs = x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
    format!("{iter},{xs},{value},{grad_norm}")
}

/// Print the CSV to stdout and, if a path is given, write it there too.
pub fn emit(csv: &str, output: Option<&str>) -> Result<(), CliError> {
    print!("{csv}");
    if let Some(path) = output {
        std::fs::write(path, csv)
            .map_err(|e| CliError::Runtime(format!("cannot write `{path}`: {e}")))?;
    }
    Ok(())
}
