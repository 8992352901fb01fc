//! Exact and approximate reduction.
//!
//! The reduced field is the `z = 0` slice of the projected dynamics,
//! `Y(y) = π_m X(y, 0)`. Exactness is tested pointwise (φ-relatedness
//! residuals, or vanishing of `∂(π_m X)/∂z` for canonical projections), and
//! approximate relatedness is quantified by integrating both systems and
//! measuring how far the projected full trajectory drifts from the reduced
//! one.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::integrate::{integrate_field, IntegratorConfig};
use crate::model::{distance, BoxRegion, Decomposition, Part, VectorField};
use crate::numdiff;
use crate::sampling::{sample_box, SobolSampler, DEFAULT_SEED};

/// Output spacing used for deviation series when the integrator config does
/// not set one.
pub const DEFAULT_OUTPUT_DT: f64 = 0.01;

pub const DEFAULT_TOL: f64 = 1e-6;

/// The reduced vector field `Y(y) = π_m X(y, 0)` on `R^m`.
#[derive(Clone, Debug)]
pub struct ReducedField {
    parent: VectorField,
    decomp: Decomposition,
    field: VectorField,
}

impl ReducedField {
    pub fn parent(&self) -> &VectorField {
        &self.parent
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomp
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.field.eval(y)
    }
}

pub fn construct_reduced(f: &VectorField, d: &Decomposition) -> Result<ReducedField> {
    check_len("decomposition total dimension", f.dim(), d.n())?;
    let parent = f.clone();
    let (n, m) = (d.n(), d.m());
    let inner = f.clone();
    let field = VectorField::new(format!("{}/reduced", f.name()), m, move |y, out| {
        let mut x = vec![0.0; n];
        x[..m].copy_from_slice(y);
        let mut fx = vec![0.0; n];
        inner.eval_into(&x, &mut fx);
        out.copy_from_slice(&fx[..m]);
    })?
    .with_params(f.params().clone());
    Ok(ReducedField {
        parent,
        decomp: *d,
        field,
    })
}

type MapFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

/// A smooth map `φ: R^n → R^m`, optionally with an analytic Jacobian.
#[derive(Clone)]
pub struct SmoothMap {
    in_dim: usize,
    out_dim: usize,
    map: Arc<MapFn>,
    jacobian: Option<Arc<JacFn>>,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothMap")
            .field("in_dim", &self.in_dim)
            .field("out_dim", &self.out_dim)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl SmoothMap {
    pub fn new<F>(in_dim: usize, out_dim: usize, map: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            in_dim,
            out_dim,
            map: Arc::new(map),
            jacobian: None,
        }
    }

    pub fn with_jacobian<J>(mut self, jac: J) -> Self
    where
        J: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    /// The canonical projection `π_m`, with its constant Jacobian `[I 0]`.
    pub fn projection(d: &Decomposition) -> Self {
        let (n, m) = (d.n(), d.m());
        Self::new(n, m, move |x| x[..m].to_vec())
            .with_jacobian(move |_| DMatrix::from_fn(m, n, |i, j| if i == j { 1.0 } else { 0.0 }))
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (self.map)(x)
    }

    pub fn jacobian_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        match &self.jacobian {
            Some(j) => Ok(j(x)),
            None => numdiff::jacobian(|p| (self.map)(p), x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            samples: 1000,
            seed: DEFAULT_SEED,
            tol: DEFAULT_TOL,
        }
    }
}

impl CheckOptions {
    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::input("at least one sample is required"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::input(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReducibilityVerdict {
    ReducibleUpToTol,
    NotReducible,
}

/// Where reducibility fails worst.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducibilityWitness {
    pub point: Vec<f64>,
    /// Index of the offending retained component.
    pub component: usize,
    /// For the bracket test, the fiber coordinate being differentiated.
    pub fiber_index: Option<usize>,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducibilityReport {
    pub verdict: ReducibilityVerdict,
    pub witness: Option<ReducibilityWitness>,
    pub max_residual: f64,
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    pub region: BoxRegion,
}

fn verdict_from(
    candidates: Vec<Result<ReducibilityWitness>>,
    opts: &CheckOptions,
    region: &BoxRegion,
) -> Result<ReducibilityReport> {
    let mut worst: Option<ReducibilityWitness> = None;
    for c in candidates {
        let c = c?;
        if worst.as_ref().is_none_or(|w| c.magnitude > w.magnitude) {
            worst = Some(c);
        }
    }
    let worst = worst.expect("at least one sample");
    let max_residual = worst.magnitude;
    let reducible = max_residual <= opts.tol;
    Ok(ReducibilityReport {
        verdict: if reducible {
            ReducibilityVerdict::ReducibleUpToTol
        } else {
            ReducibilityVerdict::NotReducible
        },
        witness: (!reducible).then_some(worst),
        max_residual,
        samples: opts.samples,
        tol: opts.tol,
        seed: opts.seed,
        region: region.clone(),
    })
}

/// Residual `|T_xφ·X(x) − Y(φ(x))|` at one point.
pub fn phi_residual(f: &VectorField, g: &VectorField, phi: &SmoothMap, x: &[f64]) -> Result<Vec<f64>> {
    let jac = phi.jacobian_at(x)?;
    let fx = f.eval(x)?;
    let pushed = &jac * nalgebra::DVector::from_column_slice(&fx);
    let gy = g.eval(&phi.apply(x))?;
    Ok(pushed.iter().zip(&gy).map(|(a, b)| a - b).collect())
}

/// Samples the φ-relatedness residual of `f` (on `R^n`) and `g` (on `R^m`).
pub fn check_phi_related(
    f: &VectorField,
    g: &VectorField,
    phi: &SmoothMap,
    region: &BoxRegion,
    opts: &CheckOptions,
) -> Result<ReducibilityReport> {
    opts.validate()?;
    check_len("map input dimension", f.dim(), phi.in_dim)?;
    check_len("map output dimension", g.dim(), phi.out_dim)?;
    check_len("sampling box", f.dim(), region.dim())?;
    let points = sample_box(region, opts.samples, opts.seed)?;
    let candidates = points
        .into_par_iter()
        .map(|x| {
            let r = phi_residual(f, g, phi, &x)?;
            let magnitude = crate::model::norm(&r);
            if !magnitude.is_finite() {
                return Err(Error::input(format!("non-finite residual at sample point {x:?}")));
            }
            let component = argmax_abs(&r);
            Ok(ReducibilityWitness {
                point: x,
                component,
                fiber_index: None,
                magnitude,
            })
        })
        .collect();
    verdict_from(candidates, opts, region)
}

fn argmax_abs(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}

/// Bracket test for the canonical projection: the retained dynamics must not
/// depend on the fiber, i.e. `∂(π_m X)_i/∂z_j = 0` for all `i`, `j`.
pub fn check_exact_reducible(
    f: &VectorField,
    d: &Decomposition,
    region: &BoxRegion,
    opts: &CheckOptions,
) -> Result<ReducibilityReport> {
    opts.validate()?;
    check_len("decomposition total dimension", f.dim(), d.n())?;
    check_len("sampling box", f.dim(), region.dim())?;
    let points = sample_box(region, opts.samples, opts.seed)?;
    let (n, m) = (d.n(), d.m());
    let candidates = points
        .into_par_iter()
        .map(|x| {
            let p = numdiff::partials(
                |p| {
                    let mut out = vec![0.0; n];
                    f.eval_into(p, &mut out);
                    out
                },
                &x,
                0..m,
                m..n,
            );
            let mut best = (0, 0, 0.0f64);
            for i in 0..p.nrows() {
                for j in 0..p.ncols() {
                    let v = p[(i, j)];
                    if !v.is_finite() {
                        return Err(Error::input(format!(
                            "non-finite partial derivative at sample point {x:?}"
                        )));
                    }
                    if v.abs() > best.2 {
                        best = (i, j, v.abs());
                    }
                }
            }
            Ok(ReducibilityWitness {
                point: x,
                component: best.0,
                fiber_index: Some(best.1),
                magnitude: best.2,
            })
        })
        .collect();
    verdict_from(candidates, opts, region)
}

/// Pointwise and supremum deviation between a projected full trajectory and
/// a reduced one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub sup_dev: f64,
    pub t_of_sup: f64,
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub horizon: f64,
    #[serde(skip)]
    pub times: Vec<f64>,
    #[serde(skip)]
    pub dev_series: Vec<f64>,
    #[serde(skip)]
    pub projected: Vec<Vec<f64>>,
    #[serde(skip)]
    pub reduced: Vec<Vec<f64>>,
}

fn output_config(cfg: &IntegratorConfig) -> IntegratorConfig {
    let mut out = *cfg;
    out.output_dt = Some(cfg.output_dt.unwrap_or(DEFAULT_OUTPUT_DT));
    out
}

/// Integrates `f` from `x0` and its reduced field from `π_m(x0)` on a shared
/// output grid and compares them.
pub fn measure_deviation(
    f: &VectorField,
    d: &Decomposition,
    x0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<DeviationReport> {
    let reduced = construct_reduced(f, d)?;
    let y0 = d.project(x0, Part::Retained)?;
    measure_pair_deviation(&reduced, x0, &y0, cfg)
}

/// Like [`measure_deviation`] but starts the reduced system at an arbitrary
/// `y0` instead of `π_m(x0)`.
pub fn measure_pair_deviation(
    reduced: &ReducedField,
    x0: &[f64],
    y0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<DeviationReport> {
    let d = reduced.decomposition();
    check_len("initial state", d.n(), x0.len())?;
    check_len("reduced initial state", d.m(), y0.len())?;
    let cfg = output_config(cfg);
    let full = integrate_field(reduced.parent(), x0, &cfg)?;
    let red = integrate_field(reduced.field(), y0, &cfg)?;
    debug_assert_eq!(full.times(), red.times());

    let projected: Vec<Vec<f64>> = full.states().iter().map(|x| d.retained(x).to_vec()).collect();
    let dev_series: Vec<f64> = projected
        .iter()
        .zip(red.states())
        .map(|(p, y)| distance(p, y))
        .collect();
    let (imax, sup_dev) =
        dev_series.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
        );
    Ok(DeviationReport {
        sup_dev,
        t_of_sup: full.times()[imax],
        x0: x0.to_vec(),
        y0: y0.to_vec(),
        horizon: cfg.t_end,
        times: full.times().to_vec(),
        dev_series,
        projected,
        reduced: red.states().to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaMode {
    /// Reduced system started at the projection of the full initial state.
    Projected,
    /// Reduced system started anywhere in `π_m(S)`.
    Cross,
}

impl std::str::FromStr for DeltaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projected" => Ok(Self::Projected),
            "cross" => Ok(Self::Cross),
            other => Err(Error::input(format!("unknown mode `{other}` (projected|cross)"))),
        }
    }
}

/// Sample-based estimate of the uniform deviation bound over a box of
/// initial conditions. The true bound is at least `delta_hat`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub delta_hat: f64,
    pub mode: DeltaMode,
    pub n_ic: usize,
    pub failures: usize,
    pub seed: u64,
    pub argmax_x0: Vec<f64>,
    pub argmax_y0: Vec<f64>,
    pub lower_estimate: bool,
}

pub fn estimate_delta(
    f: &VectorField,
    d: &Decomposition,
    region: &BoxRegion,
    n_ic: usize,
    cfg: &IntegratorConfig,
    mode: DeltaMode,
    seed: u64,
) -> Result<DeltaEstimate> {
    if n_ic == 0 {
        return Err(Error::input("n_ic must be at least 1"));
    }
    check_len("initial-condition box", d.n(), region.dim())?;
    let reduced = construct_reduced(f, d)?;
    let retained_box = region.project(d, Part::Retained)?;

    let pairs: Vec<(Vec<f64>, Vec<f64>)> = match mode {
        DeltaMode::Projected => sample_box(region, n_ic, seed)?
            .into_iter()
            .map(|x| {
                let y = d.retained(&x).to_vec();
                (x, y)
            })
            .collect(),
        DeltaMode::Cross => {
            let joint = region.product(&retained_box);
            SobolSampler::new(joint.dim(), seed)?
                .take(n_ic)
                .map(|u| {
                    let p = joint.map_unit(&u);
                    let (x, y) = p.split_at(d.n());
                    (x.to_vec(), y.to_vec())
                })
                .collect()
        }
    };

    let results: Vec<Result<DeviationReport>> = pairs
        .par_iter()
        .map(|(x, y)| measure_pair_deviation(&reduced, x, y, cfg))
        .collect();

    let mut best: Option<DeviationReport> = None;
    let mut failures = 0;
    let mut first_err = None;
    for r in results {
        match r {
            Ok(rep) => {
                if best.as_ref().is_none_or(|b| rep.sup_dev > b.sup_dev) {
                    best = Some(rep);
                }
            }
            Err(e) => {
                failures += 1;
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some(b) => Ok(DeltaEstimate {
            delta_hat: b.sup_dev,
            mode,
            n_ic,
            failures,
            seed,
            argmax_x0: b.x0,
            argmax_y0: b.y0,
            lower_estimate: true,
        }),
        None => Err(first_err.expect("every sample failed")),
    }
}
