//! Sampling-based falsifiers for incremental-stability certificates.
//!
//! Each checker draws shifted-Sobol samples from the given boxes and tests
//! the certificate's inequalities pointwise. A `NoCounterexample` verdict is
//! evidence on those boxes at that sample count, never a proof.
//!
//! Every inequality is checked in the form `lhs <= rhs` with slack
//! `1e-9·(1 + max(|lhs|, |rhs|))`; the reported violation is `lhs - rhs`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::model::{distance, norm, BoxRegion, ComparisonFunction, ControlSystem, Decomposition, Gain, VectorField};
use crate::numdiff;
use crate::sampling::{sample_box, SobolSampler};

pub const SIGN_SLACK: f64 = 1e-9;

/// Multiplier applied to sampled Lipschitz estimates before they are used in
/// a certificate.
pub const LIPSCHITZ_SAFETY_FACTOR: f64 = 1.2;

/// Points on the radius grid used for the `µ(r) >= r + ξ` condition.
const GAIN_GRID_POINTS: usize = 1001;

type StateFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type StateGrad = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type PairFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;
type PairGrad = dyn Fn(&[f64], &[f64]) -> (Vec<f64>, Vec<f64>) + Send + Sync;

/// A scalar function `V: R^n → R`.
#[derive(Clone)]
pub struct StateFunction {
    eval: Arc<StateFn>,
    grad: Option<Arc<StateGrad>>,
}

impl StateFunction {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            grad: None,
        }
    }

    pub fn with_gradient<G>(mut self, g: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(g));
        self
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.grad {
            Some(g) => g(x),
            None => numdiff::gradient(|p| (self.eval)(p), x),
        }
    }

    /// Time derivative `∇V(x)·f(x)` along a vector field.
    pub fn derivative_along(&self, f: &VectorField, x: &[f64]) -> Result<f64> {
        let g = self.gradient(x);
        check_len("gradient", f.dim(), g.len())?;
        let fx = f.eval(x)?;
        let v: f64 = g.iter().zip(&fx).map(|(a, b)| a * b).sum();
        if !v.is_finite() {
            return Err(Error::input(format!("non-finite V̇ at {x:?}")));
        }
        Ok(v)
    }
}

impl fmt::Debug for StateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateFunction")
            .field("analytic_gradient", &self.grad.is_some())
            .finish()
    }
}

/// A scalar function of a pair of states, `V: R^n × R^n → R`.
#[derive(Clone)]
pub struct PairFunction {
    eval: Arc<PairFn>,
    grad: Option<Arc<PairGrad>>,
}

impl PairFunction {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            grad: None,
        }
    }

    pub fn with_gradient<G>(mut self, g: G) -> Self
    where
        G: Fn(&[f64], &[f64]) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(g));
        self
    }

    /// Drops any analytic gradient so that finite differences are used.
    pub fn without_gradient(&self) -> Self {
        Self {
            eval: self.eval.clone(),
            grad: None,
        }
    }

    pub fn eval(&self, x1: &[f64], x2: &[f64]) -> f64 {
        (self.eval)(x1, x2)
    }

    pub fn gradients(&self, x1: &[f64], x2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        match &self.grad {
            Some(g) => g(x1, x2),
            None => {
                let n = x1.len();
                let mut joint = x1.to_vec();
                joint.extend_from_slice(x2);
                let g = numdiff::gradient(|p| (self.eval)(&p[..n], &p[n..]), &joint);
                (g[..n].to_vec(), g[n..].to_vec())
            }
        }
    }

    /// Pointwise sum `V + W`, with an analytic gradient when both have one.
    pub fn plus(&self, other: &PairFunction) -> PairFunction {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let sum = PairFunction::new(move |x1, x2| a(x1, x2) + b(x1, x2));
        match (&self.grad, &other.grad) {
            (Some(ga), Some(gb)) => {
                let (ga, gb) = (ga.clone(), gb.clone());
                sum.with_gradient(move |x1, x2| {
                    let (a1, a2) = ga(x1, x2);
                    let (b1, b2) = gb(x1, x2);
                    (
                        a1.iter().zip(&b1).map(|(p, q)| p + q).collect(),
                        a2.iter().zip(&b2).map(|(p, q)| p + q).collect(),
                    )
                })
            }
            _ => sum,
        }
    }
}

impl fmt::Debug for PairFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PairFunction")
            .field("analytic_gradient", &self.grad.is_some())
            .finish()
    }
}

/// `V̇ = ∇₁V·F(x1, u1) + ∇₂V·F(x2, u2)` along the paired dynamics.
pub fn vdot(v: &PairFunction, sys: &ControlSystem, x1: &[f64], x2: &[f64], u1: &[f64], u2: &[f64]) -> Result<f64> {
    let f1 = sys.eval(x1, u1)?;
    let f2 = sys.eval(x2, u2)?;
    check_len("second state", x1.len(), x2.len())?;
    let (g1, g2) = v.gradients(x1, x2);
    if g1.iter().chain(&g2).any(|g| !g.is_finite()) {
        return Err(Error::input(format!(
            "non-finite gradient of V at x1 = {x1:?}, x2 = {x2:?}"
        )));
    }
    let dot = |g: &[f64], f: &[f64]| g.iter().zip(f).map(|(a, b)| a * b).sum::<f64>();
    Ok(dot(&g1, &f1) + dot(&g2, &f2))
}

/// Incremental ISS Lyapunov certificate.
#[derive(Debug, Clone)]
pub struct IissCertificate {
    pub v: PairFunction,
    pub alpha_lower: ComparisonFunction,
    pub alpha_upper: ComparisonFunction,
    pub alpha_decay: ComparisonFunction,
    pub mu: ComparisonFunction,
}

/// Incremental uniform bounded-input bounded-state Lyapunov certificate.
#[derive(Debug, Clone)]
pub struct IubibssCertificate {
    pub v: PairFunction,
    pub alpha_lower: ComparisonFunction,
    pub alpha_upper: ComparisonFunction,
    pub mu: Gain,
    pub xi: f64,
}

impl IubibssCertificate {
    /// The weaker certificate implied by an IISS one: same `V` and bounds,
    /// gain shifted to `µ(r) + ξ`.
    pub fn from_iiss(c: &IissCertificate, xi: f64) -> Result<Self> {
        if !(xi > 0.0) {
            return Err(Error::input(format!("ξ must be positive, got {xi}")));
        }
        Ok(Self {
            v: c.v.clone(),
            alpha_lower: c.alpha_lower,
            alpha_upper: c.alpha_upper,
            mu: Gain::new(c.mu, xi)?,
            xi,
        })
    }
}

/// Fiberwise practical-stability certificate.
#[derive(Debug, Clone)]
pub struct FiberwiseCertificate {
    pub v: StateFunction,
    pub alpha_lower: ComparisonFunction,
    pub alpha_upper: ComparisonFunction,
    pub d_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertificateVerdict {
    NoCounterexample,
    Counterexample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `α̲(r) <= V`
    SandwichLower,
    /// `V <= α̅(r)`
    SandwichUpper,
    /// `ξ <= µ(r) − r`
    GainMargin,
    /// `V̇ <= −α(r)`
    Decay,
    /// `V̇ <= 0`
    NonIncrease,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Pair {
        x1: Vec<f64>,
        x2: Vec<f64>,
        u1: Vec<f64>,
        u2: Vec<f64>,
    },
    State {
        x: Vec<f64>,
    },
    Radius {
        r: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    /// Index into the sample sequence; `None` for radius-grid checks.
    pub sample_index: Option<usize>,
    pub condition: Condition,
    pub witness: Witness,
    pub lhs: f64,
    pub rhs: f64,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub verdict: CertificateVerdict,
    pub counterexample: Option<Counterexample>,
    pub violations: usize,
    pub samples_checked: usize,
    /// Samples on which an implication's premise held (decay conditions).
    pub premise_samples: usize,
    pub boxes: Vec<BoxRegion>,
    pub seed: u64,
    pub note: String,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.verdict == CertificateVerdict::NoCounterexample
    }
}

fn slack(lhs: f64, rhs: f64) -> f64 {
    SIGN_SLACK * (1.0 + lhs.abs().max(rhs.abs()))
}

/// Tracks the worst violation, ties broken by first occurrence.
struct Tally {
    worst: Option<Counterexample>,
    violations: usize,
    premise: usize,
}

impl Tally {
    fn new() -> Self {
        Self {
            worst: None,
            violations: 0,
            premise: 0,
        }
    }

    fn check(
        &mut self,
        index: Option<usize>,
        condition: Condition,
        lhs: f64,
        rhs: f64,
        witness: impl FnOnce() -> Witness,
    ) -> Result<()> {
        if !lhs.is_finite() || !rhs.is_finite() {
            return Err(Error::input(format!(
                "non-finite value checking {condition:?} at sample {index:?}: {lhs} vs {rhs}"
            )));
        }
        let violation = lhs - rhs;
        if violation > slack(lhs, rhs) {
            self.violations += 1;
            if self.worst.as_ref().is_none_or(|w| violation > w.violation) {
                self.worst = Some(Counterexample {
                    sample_index: index,
                    condition,
                    witness: witness(),
                    lhs,
                    rhs,
                    violation,
                });
            }
        }
        Ok(())
    }

    fn report(self, samples: usize, boxes: Vec<BoxRegion>, seed: u64) -> CertificateReport {
        let verdict = if self.worst.is_some() {
            CertificateVerdict::Counterexample
        } else {
            CertificateVerdict::NoCounterexample
        };
        let note = match verdict {
            CertificateVerdict::NoCounterexample if self.premise == 0 => format!(
                "no counterexample among {samples} samples on the listed boxes, but no sample met the \
                 premise of the decay condition, so that condition went untested"
            ),
            CertificateVerdict::NoCounterexample => {
                format!("no counterexample among {samples} samples on the listed boxes; this is evidence, not a proof")
            }
            CertificateVerdict::Counterexample => "certificate violated at the recorded witness".to_string(),
        };
        CertificateReport {
            verdict,
            counterexample: self.worst,
            violations: self.violations,
            samples_checked: samples,
            premise_samples: self.premise,
            boxes,
            seed,
            note,
        }
    }
}

struct PairSample {
    x1: Vec<f64>,
    x2: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
}

impl PairSample {
    fn witness(&self) -> Witness {
        Witness::Pair {
            x1: self.x1.clone(),
            x2: self.x2.clone(),
            u1: self.u1.clone(),
            u2: self.u2.clone(),
        }
    }
}

fn pair_samples(
    sys: &ControlSystem,
    state_box: &BoxRegion,
    input_box: &BoxRegion,
    n: usize,
    seed: u64,
) -> Result<impl Iterator<Item = PairSample>> {
    check_len("state box", sys.dim(), state_box.dim())?;
    check_len("input box", sys.input_dim(), input_box.dim())?;
    if n == 0 {
        return Err(Error::input("at least one sample is required"));
    }
    let joint = state_box.product(state_box).product(input_box).product(input_box);
    let (nx, nu) = (sys.dim(), sys.input_dim());
    Ok(SobolSampler::new(joint.dim(), seed)?.take(n).map(move |u| {
        let p = joint.map_unit(&u);
        PairSample {
            x1: p[..nx].to_vec(),
            x2: p[nx..2 * nx].to_vec(),
            u1: p[2 * nx..2 * nx + nu].to_vec(),
            u2: p[2 * nx + nu..].to_vec(),
        }
    }))
}

/// Checks an IISS Lyapunov certificate: the sandwich bound everywhere and
/// `V̇ <= −α(|x1 − x2|)` wherever `|x1 − x2| >= µ(|u1 − u2|)`.
pub fn check_iiss(
    sys: &ControlSystem,
    cert: &IissCertificate,
    state_box: &BoxRegion,
    input_box: &BoxRegion,
    n_samples: usize,
    seed: u64,
) -> Result<CertificateReport> {
    let mut tally = Tally::new();
    for (i, s) in pair_samples(sys, state_box, input_box, n_samples, seed)?.enumerate() {
        let r = distance(&s.x1, &s.x2);
        let v = cert.v.eval(&s.x1, &s.x2);
        tally.check(Some(i), Condition::SandwichLower, cert.alpha_lower.value(r), v, || {
            s.witness()
        })?;
        tally.check(Some(i), Condition::SandwichUpper, v, cert.alpha_upper.value(r), || {
            s.witness()
        })?;
        if r >= cert.mu.value(distance(&s.u1, &s.u2)) {
            tally.premise += 1;
            let vd = vdot(&cert.v, sys, &s.x1, &s.x2, &s.u1, &s.u2)?;
            tally.check(Some(i), Condition::Decay, vd, -cert.alpha_decay.value(r), || {
                s.witness()
            })?;
        }
    }
    Ok(tally.report(n_samples, vec![state_box.clone(), input_box.clone()], seed))
}

/// Checks an IUBIBSS Lyapunov certificate: the sandwich bound where
/// `|x1 − x2| >= ξ`, `µ(r) − r >= ξ` on a radius grid, and `V̇ <= 0` wherever
/// `|x1 − x2| >= µ(|u1 − u2|)`.
pub fn check_iubibss(
    sys: &ControlSystem,
    cert: &IubibssCertificate,
    state_box: &BoxRegion,
    input_box: &BoxRegion,
    n_samples: usize,
    seed: u64,
) -> Result<CertificateReport> {
    if !(cert.xi > 0.0) {
        return Err(Error::input(format!("ξ must be positive, got {}", cert.xi)));
    }
    let mut tally = Tally::new();
    let r_max = input_box.diameter();
    for i in 0..GAIN_GRID_POINTS {
        let r = r_max * i as f64 / (GAIN_GRID_POINTS - 1) as f64;
        tally.check(None, Condition::GainMargin, cert.xi, cert.mu.value(r) - r, || {
            Witness::Radius { r }
        })?;
    }
    for (i, s) in pair_samples(sys, state_box, input_box, n_samples, seed)?.enumerate() {
        let r = distance(&s.x1, &s.x2);
        if r >= cert.xi {
            let v = cert.v.eval(&s.x1, &s.x2);
            tally.check(Some(i), Condition::SandwichLower, cert.alpha_lower.value(r), v, || {
                s.witness()
            })?;
            tally.check(Some(i), Condition::SandwichUpper, v, cert.alpha_upper.value(r), || {
                s.witness()
            })?;
        }
        if r >= cert.mu.value(distance(&s.u1, &s.u2)) {
            tally.premise += 1;
            let vd = vdot(&cert.v, sys, &s.x1, &s.x2, &s.u1, &s.u2)?;
            tally.check(Some(i), Condition::NonIncrease, vd, 0.0, || s.witness())?;
        }
    }
    Ok(tally.report(n_samples, vec![state_box.clone(), input_box.clone()], seed))
}

/// Checks a fiberwise certificate wherever `|π_k(x)| >= d`.
pub fn check_fiberwise(
    f: &VectorField,
    d: &Decomposition,
    cert: &FiberwiseCertificate,
    region: &BoxRegion,
    n_samples: usize,
    seed: u64,
) -> Result<CertificateReport> {
    check_len("decomposition total dimension", f.dim(), d.n())?;
    check_len("sampling box", f.dim(), region.dim())?;
    if n_samples == 0 {
        return Err(Error::input("at least one sample is required"));
    }
    let mut tally = Tally::new();
    for (i, x) in sample_box(region, n_samples, seed)?.into_iter().enumerate() {
        let r = norm(d.fiber(&x));
        if r < cert.d_threshold {
            continue;
        }
        tally.premise += 1;
        let v = cert.v.eval(&x);
        let w = || Witness::State { x: x.clone() };
        tally.check(Some(i), Condition::SandwichLower, cert.alpha_lower.value(r), v, w)?;
        tally.check(Some(i), Condition::SandwichUpper, v, cert.alpha_upper.value(r), w)?;
        let vd = cert.v.derivative_along(f, &x)?;
        tally.check(Some(i), Condition::NonIncrease, vd, 0.0, w)?;
    }
    Ok(tally.report(n_samples, vec![region.clone()], seed))
}

/// Recomputes `(lhs, rhs)` of a pair-sample condition from its witness.
pub fn replay_pair_condition(
    sys: &ControlSystem,
    v: &PairFunction,
    alpha_lower: &ComparisonFunction,
    alpha_upper: &ComparisonFunction,
    alpha_decay: Option<&ComparisonFunction>,
    cex: &Counterexample,
) -> Result<(f64, f64)> {
    let Witness::Pair { x1, x2, u1, u2 } = &cex.witness else {
        return Err(Error::input("witness is not a state/input pair"));
    };
    let r = distance(x1, x2);
    Ok(match cex.condition {
        Condition::SandwichLower => (alpha_lower.value(r), v.eval(x1, x2)),
        Condition::SandwichUpper => (v.eval(x1, x2), alpha_upper.value(r)),
        Condition::Decay => {
            let a = alpha_decay.ok_or_else(|| Error::input("decay condition needs α"))?;
            (vdot(v, sys, x1, x2, u1, u2)?, -a.value(r))
        }
        Condition::NonIncrease => (vdot(v, sys, x1, x2, u1, u2)?, 0.0),
        Condition::GainMargin => return Err(Error::input("gain-margin witness has no state pair")),
    })
}

/// Recomputes `(lhs, rhs)` of a fiberwise condition from its witness.
pub fn replay_fiberwise_condition(
    f: &VectorField,
    d: &Decomposition,
    cert: &FiberwiseCertificate,
    cex: &Counterexample,
) -> Result<(f64, f64)> {
    let Witness::State { x } = &cex.witness else {
        return Err(Error::input("witness is not a state"));
    };
    let r = norm(d.fiber(x));
    Ok(match cex.condition {
        Condition::SandwichLower => (cert.alpha_lower.value(r), cert.v.eval(x)),
        Condition::SandwichUpper => (cert.v.eval(x), cert.alpha_upper.value(r)),
        Condition::NonIncrease => (cert.v.derivative_along(f, x)?, 0.0),
        other => {
            return Err(Error::input(format!(
                "{other:?} does not apply to fiberwise certificates"
            )))
        }
    })
}

/// Sample-based lower estimate of the Lipschitz constant of `g` on a box:
/// the largest spectral norm of its finite-difference Jacobian.
pub fn estimate_lipschitz<G>(g: G, region: &BoxRegion, n_samples: usize, seed: u64) -> Result<f64>
where
    G: Fn(&[f64]) -> Vec<f64>,
{
    if n_samples == 0 {
        return Err(Error::input("at least one sample is required"));
    }
    let mut best = 0.0f64;
    for x in sample_box(region, n_samples, seed)? {
        let j = numdiff::jacobian(&g, &x)?;
        best = best.max(numdiff::operator_norm(&j));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_square_diff() -> PairFunction {
        PairFunction::new(|a, b| 0.5 * distance(a, b).powi(2)).with_gradient(|a, b| {
            let d: Vec<f64> = a.iter().zip(b).map(|(p, q)| p - q).collect();
            let neg = d.iter().map(|v| -v).collect();
            (d, neg)
        })
    }

    fn half_r2() -> ComparisonFunction {
        ComparisonFunction::power(0.5, 2.0).unwrap()
    }

    fn unit_box() -> BoxRegion {
        BoxRegion::symmetric(&[2.0]).unwrap()
    }

    #[test]
    fn vdot_examples() {
        let v = half_square_diff();
        let contract = ControlSystem::new("contract", 1, 1, |x, _u, out| out[0] = -x[0]).unwrap();
        assert_eq!(vdot(&v, &contract, &[1.0], &[0.0], &[0.0], &[0.0]).unwrap(), -1.0);
        let integ = ControlSystem::new("integ", 1, 1, |_x, u, out| out[0] = u[0]).unwrap();
        assert_eq!(vdot(&v, &integ, &[1.0], &[-3.0], &[0.4], &[0.4]).unwrap(), 0.0);
        let fd = v.without_gradient();
        let vd = vdot(&fd, &contract, &[1.0], &[0.0], &[0.0], &[0.0]).unwrap();
        assert!((vd + 1.0).abs() < 1e-8);
    }

    #[test]
    fn vdot_rejects_non_finite_gradient() {
        let v = PairFunction::new(|a, b| (a[0] - b[0]).abs().sqrt());
        let sys = ControlSystem::new("s", 1, 1, |x, _u, out| out[0] = -x[0]).unwrap();
        assert!(vdot(&v, &sys, &[f64::NAN], &[0.0], &[0.0], &[0.0]).is_err());
    }

    fn lag_certificate() -> IissCertificate {
        IissCertificate {
            v: half_square_diff(),
            alpha_lower: half_r2(),
            alpha_upper: half_r2(),
            alpha_decay: half_r2(),
            mu: ComparisonFunction::linear(2.0).unwrap(),
        }
    }

    #[test]
    fn iiss_first_order_lag_passes() {
        // |Δx| >= 2|Δu|  ⟹  V̇ = −Δx² + ΔxΔu <= −Δx²/2.
        let sys = ControlSystem::new("lag", 1, 1, |x, u, out| out[0] = -x[0] + u[0]).unwrap();
        let rep = check_iiss(&sys, &lag_certificate(), &unit_box(), &unit_box(), 4096, 42).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.premise_samples > 0);
    }

    #[test]
    fn iiss_expanding_flow_fails() {
        let sys = ControlSystem::new("expand", 1, 1, |x, _u, out| out[0] = x[0]).unwrap();
        let cert = lag_certificate();
        let rep = check_iiss(&sys, &cert, &unit_box(), &unit_box(), 1024, 42).unwrap();
        assert_eq!(rep.verdict, CertificateVerdict::Counterexample);
        let cex = rep.counterexample.unwrap();
        assert_eq!(cex.condition, Condition::Decay);
        let (lhs, rhs) = replay_pair_condition(
            &sys,
            &cert.v,
            &cert.alpha_lower,
            &cert.alpha_upper,
            Some(&cert.alpha_decay),
            &cex,
        )
        .unwrap();
        assert_eq!(lhs - rhs, cex.violation);
    }

    #[test]
    fn iubibss_gain_margin_failure_at_zero() {
        let sys = ControlSystem::new("lag", 1, 1, |x, u, out| out[0] = -x[0] + u[0]).unwrap();
        let cert = IubibssCertificate {
            v: half_square_diff(),
            alpha_lower: half_r2(),
            alpha_upper: half_r2(),
            mu: Gain::from_base(ComparisonFunction::linear(1.0).unwrap()),
            xi: 1.0,
        };
        let rep = check_iubibss(&sys, &cert, &unit_box(), &unit_box(), 256, 42).unwrap();
        let cex = rep.counterexample.unwrap();
        assert_eq!(cex.condition, Condition::GainMargin);
        assert_eq!(cex.witness, Witness::Radius { r: 0.0 });
        assert_eq!(cex.violation, 1.0);
    }

    #[test]
    fn iiss_implies_iubibss() {
        let sys = ControlSystem::new("lag", 1, 1, |x, u, out| out[0] = -x[0] + u[0]).unwrap();
        let iiss = lag_certificate();
        for xi in [0.01, 0.5, 3.0] {
            let cert = IubibssCertificate::from_iiss(&iiss, xi).unwrap();
            let rep = check_iubibss(&sys, &cert, &unit_box(), &unit_box(), 2048, 42).unwrap();
            assert!(rep.passed(), "xi = {xi}: {rep:?}");
        }
        assert!(IubibssCertificate::from_iiss(&iiss, 0.0).is_err());
    }

    fn fiber_field(sign: f64) -> VectorField {
        VectorField::new("fiber", 2, move |x, out| {
            out[0] = -x[0];
            out[1] = sign * x[1];
        })
        .unwrap()
    }

    fn fiber_certificate() -> FiberwiseCertificate {
        FiberwiseCertificate {
            v: StateFunction::new(|x| 0.5 * x[1] * x[1]),
            alpha_lower: half_r2(),
            alpha_upper: half_r2(),
            d_threshold: 0.0,
        }
    }

    #[test]
    fn fiberwise_contracting_and_expanding() {
        let d = Decomposition::new(2, 1).unwrap();
        let region = BoxRegion::symmetric(&[1.0, 1.0]).unwrap();
        let rep = check_fiberwise(&fiber_field(-1.0), &d, &fiber_certificate(), &region, 2048, 42).unwrap();
        assert!(rep.passed(), "{rep:?}");
        let cert = fiber_certificate();
        let rep = check_fiberwise(&fiber_field(1.0), &d, &cert, &region, 2048, 42).unwrap();
        let cex = rep.counterexample.unwrap();
        assert_eq!(cex.condition, Condition::NonIncrease);
        let (lhs, rhs) = replay_fiberwise_condition(&fiber_field(1.0), &d, &cert, &cex).unwrap();
        assert_eq!(lhs - rhs, cex.violation);
    }

    #[test]
    fn lipschitz_estimates() {
        let pi = std::f64::consts::PI;
        let region = BoxRegion::from_intervals(&[(-pi, pi)]).unwrap();
        let l = estimate_lipschitz(|x| vec![x[0].sin()], &region, 1000, 42).unwrap();
        assert!((l - 1.0).abs() < 1e-3, "{l}");
        let c = estimate_lipschitz(|_| vec![3.0], &region, 100, 42).unwrap();
        assert_eq!(c, 0.0);
        assert!(estimate_lipschitz(|x| vec![x[0].ln()], &region, 100, 42).is_err());
    }
}
