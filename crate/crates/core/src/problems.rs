//! Objective functions, including desk-scale analogs of the two motivating
//! gradient pathologies:
//!
//! * [`edge_loss`] — 1D hard-rasterization loss, piecewise constant in the
//!   edge position, so its raw derivative is null almost everywhere.
//! * [`wall_loss`] — inelastic wall-contact loss with a plateau: the raw
//!   gradient is exactly zero on an entire region where the loss is not
//!   optimal.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A total objective `g: R^d -> R` with an optional almost-everywhere
/// gradient oracle. Objectives are stateless and safe to evaluate
/// concurrently.
#[derive(Clone)]
pub struct Objective {
    name: String,
    dim: usize,
    value: ValueFn,
    gradient: Option<GradFn>,
    // 1D discontinuity/kink locations, used by the quadrature oracle to
    // split the integration domain into smooth pieces
    kinks: Vec<f64>,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("has_gradient", &self.gradient.is_some())
            .finish()
    }
}

impl Objective {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), dim, value: Arc::new(value), gradient: None, kinks: Vec::new() }
    }

    pub fn with_gradient(
        mut self,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    pub fn with_kinks(mut self, kinks: Vec<f64>) -> Self {
        self.kinks = kinks;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    /// A.e. gradient with the problem's documented kink convention.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.gradient {
            Some(g) => Ok(g(x)),
            None => Err(Error::NoGradientOracle { name: self.name.clone() }),
        }
    }

    /// Locations (in the scalar argument, dim=1 only) where `value` is
    /// discontinuous or non-differentiable.
    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }
}

/// 1D edge-rasterization scene: `pixels` pixel centers on (0,1) and a true
/// edge position `theta_target`.
#[derive(Debug, Clone, Copy)]
pub struct EdgeRenderScene {
    pub pixels: usize,
    pub theta_target: f64,
}

/// Point mass moving at constant velocity `u` for time `horizon`, sticking
/// inelastically at `wall`; the loss targets a final position strictly
/// inside the free region.
#[derive(Debug, Clone, Copy)]
pub struct WallImpulseScene {
    pub wall: f64,
    pub horizon: f64,
    pub target: f64,
}

impl Default for WallImpulseScene {
    fn default() -> Self {
        Self { wall: 1.0, horizon: 1.0, target: 0.5 }
    }
}

/// Named analytic reference objectives.
///
/// Kink conventions: `relu` returns the right derivative 1 at 0, `abs`
/// returns +1 at 0. `heaviside` (convention `1{x >= 0}`) deliberately has
/// no gradient oracle: its a.e. derivative is 0 everywhere, which would
/// make the first-order estimator degenerate by construction.
pub fn make_analytic(name: &str) -> Result<Objective> {
    match name {
        "heaviside" => Ok(Objective::new("heaviside", 1, |x| {
            if x[0] >= 0.0 {
                1.0
            } else {
                0.0
            }
        })
        .with_kinks(vec![0.0])),
        "relu" => Ok(Objective::new("relu", 1, |x| x[0].max(0.0))
            .with_gradient(|x| vec![if x[0] >= 0.0 { 1.0 } else { 0.0 }])
            .with_kinks(vec![0.0])),
        "abs" => Ok(Objective::new("abs", 1, |x| x[0].abs())
            .with_gradient(|x| vec![if x[0] >= 0.0 { 1.0 } else { -1.0 }])
            .with_kinks(vec![0.0])),
        "quadratic" => Ok(quadratic(1)),
        _ => Err(Error::UnknownProblem { name: name.to_string() }),
    }
}

/// `g(x) = sum x_i^2` in dimension `d`.
pub fn quadratic(d: usize) -> Objective {
    Objective::new("quadratic", d, |x| x.iter().map(|v| v * v).sum())
        .with_gradient(|x| x.iter().map(|v| 2.0 * v).collect())
}

/// `g(x) = a^T x`.
pub fn linear(a: Vec<f64>) -> Objective {
    let a2 = a.clone();
    Objective::new("linear", a.len(), move |x| {
        x.iter().zip(&a).map(|(xi, ai)| xi * ai).sum()
    })
    .with_gradient(move |_| a2.clone())
}

fn pixel_centers(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| (i as f64 + 0.5) / n as f64)
}

/// Hard rasterization of a vertical edge at `theta`: pixel `i` is 1 if its
/// center lies left of the edge, else 0. Piecewise constant in `theta`.
pub fn render_edge(scene: &EdgeRenderScene, theta: f64) -> Vec<f64> {
    pixel_centers(scene.pixels)
        .map(|c| if c < theta { 1.0 } else { 0.0 })
        .collect()
}

/// Mean-squared pixel loss against the target edge image. The raw
/// derivative is 0 at every `theta` off the pixel-boundary set (and 0 by
/// convention on it).
pub fn edge_loss(scene: &EdgeRenderScene) -> Objective {
    let s = *scene;
    let target_img = render_edge(&s, s.theta_target);
    let kinks: Vec<f64> = pixel_centers(s.pixels).collect();
    Objective::new("edge", 1, move |x| {
        let img = render_edge(&s, x[0]);
        img.iter()
            .zip(&target_img)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / s.pixels as f64
    })
    .with_gradient(|_| vec![0.0])
    .with_kinks(kinks)
}

/// Final position after time `horizon` at constant velocity `u`, sticking
/// inelastically at the wall: `min(u * horizon, wall)`.
pub fn simulate_wall(scene: &WallImpulseScene, u: f64) -> f64 {
    (u * scene.horizon).min(scene.wall)
}

/// Squared distance of the final position to the target. On the contact
/// plateau (`u * horizon >= wall`) the raw gradient is exactly zero while
/// the loss stays positive.
pub fn wall_loss(scene: &WallImpulseScene) -> Objective {
    let s = *scene;
    let kink = s.wall / s.horizon;
    Objective::new("wall", 1, move |x| {
        let f = simulate_wall(&s, x[0]);
        (f - s.target) * (f - s.target)
    })
    .with_gradient(move |x| {
        if x[0] * s.horizon >= s.wall {
            vec![0.0]
        } else {
            vec![2.0 * s.horizon * (x[0] * s.horizon - s.target)]
        }
    })
    .with_kinks(vec![kink])
}

/// Parse a problem descriptor: `name` or `name:key=val,key=val`.
///
/// Known descriptors: `heaviside`, `relu`, `abs`, `quadratic:d=8`,
/// `edge:N=32,target=0.8`, `wall:target=0.5,wall=1,horizon=1`.
pub fn parse_problem(desc: &str) -> Result<Objective> {
    let (name, rest) = match desc.find(':') {
        Some(i) => (&desc[..i], Some((&desc[i + 1..], i + 1))),
        None => (desc, None),
    };
    let mut params: Vec<(String, f64)> = Vec::new();
    if let Some((body, base)) = rest {
        if body.is_empty() {
            return Err(Error::DescriptorParse { pos: base, msg: "empty parameter list".into() });
        }
        let mut offset = base;
        for pair in body.split(',') {
            let eq = pair.find('=').ok_or_else(|| Error::DescriptorParse {
                pos: offset,
                msg: format!("expected key=val, got `{pair}`"),
            })?;
            let key = &pair[..eq];
            let val_str = &pair[eq + 1..];
            let val: f64 = val_str.parse().map_err(|_| Error::DescriptorParse {
                pos: offset + eq + 1,
                msg: format!("invalid number `{val_str}` for key `{key}`"),
            })?;
            params.push((key.to_string(), val));
            offset += pair.len() + 1;
        }
    }
    let get = |key: &str| params.iter().find(|(k, _)| k == key).map(|(_, v)| *v);
    let reject_unknown = |allowed: &[&str]| -> Result<()> {
        for (k, _) in &params {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::DescriptorParse {
                    pos: desc.find(k.as_str()).unwrap_or(0),
                    msg: format!("unknown key `{k}` for problem `{name}`"),
                });
            }
        }
        Ok(())
    };
    match name {
        "heaviside" | "relu" | "abs" => {
            reject_unknown(&[])?;
            make_analytic(name)
        }
        "quadratic" => {
            reject_unknown(&["d"])?;
            let d = get("d").unwrap_or(1.0);
            if d < 1.0 || d.fract() != 0.0 {
                return Err(Error::DescriptorParse {
                    pos: 0,
                    msg: format!("quadratic dimension must be a positive integer, got {d}"),
                });
            }
            Ok(quadratic(d as usize))
        }
        "edge" => {
            reject_unknown(&["N", "target"])?;
            let n = get("N").unwrap_or(32.0);
            let target = get("target").unwrap_or(0.8);
            if n < 1.0 || n.fract() != 0.0 {
                return Err(Error::DescriptorParse {
                    pos: 0,
                    msg: format!("edge pixel count N must be a positive integer, got {n}"),
                });
            }
            if !(0.0 < target && target < 1.0) {
                return Err(Error::DescriptorParse {
                    pos: 0,
                    msg: format!("edge target must lie in (0,1), got {target}"),
                });
            }
            Ok(edge_loss(&EdgeRenderScene { pixels: n as usize, theta_target: target }))
        }
        "wall" => {
            reject_unknown(&["target", "wall", "horizon"])?;
            let scene = WallImpulseScene {
                wall: get("wall").unwrap_or(1.0),
                horizon: get("horizon").unwrap_or(1.0),
                target: get("target").unwrap_or(0.5),
            };
            if !(0.0 < scene.target && scene.target < scene.wall) {
                return Err(Error::DescriptorParse {
                    pos: 0,
                    msg: format!(
                        "wall target must satisfy 0 < target < wall, got target={} wall={}",
                        scene.target, scene.wall
                    ),
                });
            }
            Ok(wall_loss(&scene))
        }
        _ => Err(Error::UnknownProblem { name: name.to_string() }),
    }
}
