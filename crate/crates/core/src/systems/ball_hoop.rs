//! Ball sliding inside a hoop that spins about its vertical axis.
//!
//! State `(ω, θ)`: angular velocity and angle of the ball from the bottom of
//! the hoop. Retained coordinate: `ω`.
//!
//! ```text
//! ω̇ = −(µ/m)ω + ξ²sinθcosθ − (g/R)sinθ
//! θ̇ = ω
//! ```

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{BoxRegion, ComparisonFunction, ControlSystem, Decomposition, Part, VectorField};
use crate::stability::{
    estimate_lipschitz, FiberwiseCertificate, IissCertificate, PairFunction, StateFunction, LIPSCHITZ_SAFETY_FACTOR,
};

use super::DEFAULT_G;

pub const NAME: &str = "ball-hoop";
pub const DEFAULT_X0: [f64; 2] = [0.5, 0.3];

/// Fiber norm below which the fiberwise certificate is not required to hold.
pub const FIBER_THRESHOLD: f64 = 0.1;

/// Samples used for the Lipschitz estimate feeding the IISS gain.
pub const LIPSCHITZ_SAMPLES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallHoopParams {
    pub m: f64,
    pub r: f64,
    pub g: f64,
    pub mu: f64,
    pub xi_hoop: f64,
}

impl Default for BallHoopParams {
    fn default() -> Self {
        Self {
            m: 1.0,
            r: 5.0,
            g: DEFAULT_G,
            mu: 1.0,
            xi_hoop: 0.1,
        }
    }
}

impl BallHoopParams {
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        [
            ("R", self.r),
            ("g", self.g),
            ("m", self.m),
            ("mu", self.mu),
            ("xi_hoop", self.xi_hoop),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    pub fn from_map(map: &BTreeMap<String, f64>) -> Result<Self> {
        let mut p = Self::default();
        for (k, &v) in map {
            match k.as_str() {
                "m" => p.m = v,
                "R" => p.r = v,
                "g" => p.g = v,
                "mu" => p.mu = v,
                "xi_hoop" => p.xi_hoop = v,
                other => {
                    return Err(Error::input(format!(
                        "unknown parameter `{other}` for {NAME}; valid: R, g, m, mu, xi_hoop"
                    )))
                }
            }
        }
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("m", self.m),
            ("R", self.r),
            ("g", self.g),
            ("mu", self.mu),
            ("xi_hoop", self.xi_hoop),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::input(format!(
                    "{NAME}: parameter {name} must be positive, got {v}"
                )));
            }
        }
        if self.r * self.xi_hoop * self.xi_hoop >= self.g {
            return Err(Error::Constraint(format!(
                "{NAME}: R·ξ² = {} must be below g = {}",
                self.r * self.xi_hoop * self.xi_hoop,
                self.g
            )));
        }
        Ok(())
    }

    /// The angular-acceleration terms driven by `θ`.
    pub fn coupling(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.xi_hoop * self.xi_hoop * s * c - self.g / self.r * s
    }

    pub fn rhs(&self, x: &[f64], out: &mut [f64]) {
        out[0] = -self.mu / self.m * x[0] + self.coupling(x[1]);
        out[1] = x[0];
    }

    /// Builds the field without validating, so that deliberately broken
    /// parameter sets can be studied.
    pub fn field_unchecked(&self) -> VectorField {
        let p = *self;
        VectorField::new(NAME, 2, move |x, out| p.rhs(x, out))
            .expect("dimension is positive")
            .with_params(self.to_map())
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let (s, c) = x[1].sin_cos();
        let xi2 = self.xi_hoop * self.xi_hoop;
        DMatrix::from_row_slice(
            2,
            2,
            &[-self.mu / self.m, xi2 * (c * c - s * s) - self.g / self.r * c, 1.0, 0.0],
        )
    }

    /// Potential part of the Lyapunov function, `V(0, θ)`.
    fn potential(&self, theta: f64) -> f64 {
        let s = theta.sin();
        self.m * self.g * self.r * (1.0 - theta.cos())
            - 0.5 * self.m * self.r * self.r * self.xi_hoop * self.xi_hoop * s * s
    }

    /// `V = ½mR²ω² + mgR(1−cosθ) − ½mR²ξ²sin²θ`.
    pub fn lyapunov_value(&self, x: &[f64]) -> f64 {
        0.5 * self.m * self.r * self.r * x[0] * x[0] + self.potential(x[1])
    }

    pub fn lyapunov(&self) -> StateFunction {
        let p = *self;
        StateFunction::new(move |x| p.lyapunov_value(x)).with_gradient(move |x| {
            let (s, c) = x[1].sin_cos();
            vec![
                p.m * p.r * p.r * x[0],
                p.m * p.g * p.r * s - p.m * p.r * p.r * p.xi_hoop * p.xi_hoop * s * c,
            ]
        })
    }

    /// Closed form of `∇V·X`.
    pub fn lyapunov_rate(&self, x: &[f64]) -> f64 {
        -self.mu * self.r * self.r * x[0] * x[0]
    }

    /// Bounding box of the connected sublevel set `{V <= c}` around the
    /// origin. `V` separates into `½mR²ω²` plus a potential that increases
    /// on `[0, π]`, so both half-widths come from one-dimensional solves.
    pub fn sublevel_box(&self, c: f64) -> Result<BoxRegion> {
        if !(c > 0.0) {
            return Err(Error::input(format!("sublevel value must be positive, got {c}")));
        }
        let w = (2.0 * c / (self.m * self.r * self.r)).sqrt();
        let pi = std::f64::consts::PI;
        let th = if self.potential(pi) <= c {
            pi
        } else {
            let (mut lo, mut hi) = (0.0, pi);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if self.potential(mid) <= c {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        };
        BoxRegion::symmetric(&[w, th])
    }

    pub fn default_box(&self, x0: &[f64]) -> Result<BoxRegion> {
        self.sublevel_box(self.lyapunov_value(x0))
    }

    /// Projected dynamics with `θ` as input.
    pub fn control_system(&self) -> ControlSystem {
        let p = *self;
        ControlSystem::new(format!("{NAME}/projected"), 1, 1, move |x, u, out| {
            out[0] = -p.mu / p.m * x[0] + p.coupling(u[0]);
        })
        .expect("dimensions are positive")
    }

    /// `U = ½(ω₁ − ω₂)²`.
    pub fn incremental_function() -> PairFunction {
        PairFunction::new(|a, b| 0.5 * (a[0] - b[0]).powi(2))
            .with_gradient(|a, b| (vec![a[0] - b[0]], vec![b[0] - a[0]]))
    }

    /// Lipschitz estimate of the `θ` coupling on `input_box`, before the
    /// safety factor.
    pub fn coupling_lipschitz(&self, input_box: &BoxRegion, seed: u64) -> Result<f64> {
        let p = *self;
        estimate_lipschitz(move |t| vec![p.coupling(t[0])], input_box, LIPSCHITZ_SAMPLES, seed)
    }

    /// IISS certificate for the projected dynamics: with `L` the coupling's
    /// Lipschitz constant, `|Δω| >= (2mL/µ)|Δθ|` forces `U̇ <= −(µ/2m)Δω²`.
    pub fn iiss_certificate(&self, lipschitz: f64) -> Result<IissCertificate> {
        let half = ComparisonFunction::power(0.5, 2.0)?;
        let mu_gain = (2.0 * self.m * lipschitz / self.mu).max(f64::MIN_POSITIVE);
        Ok(IissCertificate {
            v: Self::incremental_function(),
            alpha_lower: half,
            alpha_upper: half,
            alpha_decay: ComparisonFunction::power(self.mu / (2.0 * self.m), 2.0)?,
            mu: ComparisonFunction::linear(mu_gain)?,
        })
    }

    /// Fiberwise certificate built from `V` on `region`, valid where
    /// `|θ| >= FIBER_THRESHOLD`. For `|θ| <= θmax`, `(1 − cosθ)/θ²` is
    /// decreasing and `sin²θ <= θ²`, which gives the quadratic lower bound;
    /// the upper bound uses `1 − cosθ <= θ²/2` and `ω² <= ωmax²·θ²/d²`.
    /// Both carry a 10% margin.
    pub fn fiberwise_certificate(&self, region: &BoxRegion) -> Result<FiberwiseCertificate> {
        let half_width = |i: usize| region.lower()[i].abs().max(region.upper()[i].abs());
        let (w_max, th_max) = (half_width(0), half_width(1).min(std::f64::consts::PI));
        let d = FIBER_THRESHOLD;
        if th_max < d {
            return Err(Error::input(format!(
                "{NAME}: θ range {th_max} lies inside the fiber threshold {d}"
            )));
        }
        let mgr = self.m * self.g * self.r;
        let a_lo = 0.9
            * (mgr * (1.0 - th_max.cos()) / (th_max * th_max)
                - 0.5 * self.m * self.r * self.r * self.xi_hoop * self.xi_hoop);
        if !(a_lo > 0.0) {
            return Err(Error::Constraint(format!(
                "{NAME}: no quadratic lower bound for V on |θ| <= {th_max}"
            )));
        }
        let a_hi = 1.1 * (0.5 * self.m * self.r * self.r * w_max * w_max / (d * d) + 0.5 * mgr);
        Ok(FiberwiseCertificate {
            v: self.lyapunov(),
            alpha_lower: ComparisonFunction::power(a_lo, 2.0)?,
            alpha_upper: ComparisonFunction::power(a_hi, 2.0)?,
            d_threshold: d,
        })
    }

    /// State and input boxes of the projected dynamics for a full-state box.
    pub fn split_box(region: &BoxRegion) -> Result<(BoxRegion, BoxRegion)> {
        let d = Decomposition::new(2, 1)?;
        Ok((region.project(&d, Part::Retained)?, region.project(&d, Part::Fiber)?))
    }
}

/// Safety-scaled Lipschitz constant used in the bundled IISS certificate.
pub fn certified_lipschitz(p: &BallHoopParams, input_box: &BoxRegion, seed: u64) -> Result<f64> {
    Ok(LIPSCHITZ_SAFETY_FACTOR * p.coupling_lipschitz(input_box, seed)?)
}
