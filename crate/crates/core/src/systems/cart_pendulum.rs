//! Pendulum hanging from a cart that is tied to a wall by a spring.
//!
//! Stored in the order `(x, v, θ, ω)` so that the retained cart coordinates
//! lead; the conventional order is `(x, θ, v, ω)`. With `D = M + m sin²θ`:
//!
//! ```text
//! ẋ = v
//! v̇ = (mRω²sinθ + mg sinθcosθ − kx − dv + (b/R)ω cosθ) / D
//! θ̇ = ω
//! ω̇ = (−mRω²sinθcosθ − (m+M)g sinθ + kx cosθ + dv cosθ − (1 + M/m)(b/R)ω) / (R·D)
//! ```
//!
//! Cart friction is `−dv` and the pivot friction torque is `−bω`. The `ω`
//! factor in the last term of `v̇` is what the Euler–Lagrange equations give
//! for that torque, and it is required for the reduced field to come out as
//! `(v, −(dv + kx)/M)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{BoxRegion, ComparisonFunction, ControlSystem, Gain, VectorField};
use crate::sampling::sample_box;
use crate::stability::{estimate_lipschitz, IubibssCertificate, PairFunction, LIPSCHITZ_SAFETY_FACTOR};

use super::DEFAULT_G;

pub const NAME: &str = "cart-pendulum";
/// `(x, v, θ, ω)`.
pub const DEFAULT_X0: [f64; 4] = [1.0, 0.0, 0.5, 0.0];

/// Radius threshold `ξ` of the bundled IUBIBSS certificate.
pub const IUBIBSS_XI: f64 = 0.1;

/// Samples used to bound `ω̇` and estimate Lipschitz constants.
pub const BOUND_SAMPLES: usize = 4096;

/// Conventional order `(x, θ, v, ω)` to storage order `(x, v, θ, ω)`.
pub fn to_internal(p: &[f64]) -> [f64; 4] {
    [p[0], p[2], p[1], p[3]]
}

/// Storage order `(x, v, θ, ω)` to conventional order `(x, θ, v, ω)`.
pub fn to_conventional(s: &[f64]) -> [f64; 4] {
    [s[0], s[2], s[1], s[3]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartPendulumParams {
    pub big_m: f64,
    pub m: f64,
    pub r: f64,
    pub k: f64,
    pub g: f64,
    pub d: f64,
    pub b: f64,
}

impl Default for CartPendulumParams {
    fn default() -> Self {
        Self {
            big_m: 2.0,
            m: 1.0,
            r: 1.0,
            k: 1.0,
            g: DEFAULT_G,
            d: 1.0,
            b: 1.0,
        }
    }
}

impl CartPendulumParams {
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        [
            ("M", self.big_m),
            ("R", self.r),
            ("b", self.b),
            ("d", self.d),
            ("g", self.g),
            ("k", self.k),
            ("m", self.m),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    pub fn from_map(map: &BTreeMap<String, f64>) -> Result<Self> {
        let mut p = Self::default();
        for (k, &v) in map {
            match k.as_str() {
                "M" => p.big_m = v,
                "m" => p.m = v,
                "R" => p.r = v,
                "k" => p.k = v,
                "g" => p.g = v,
                "d" => p.d = v,
                "b" => p.b = v,
                other => {
                    return Err(Error::input(format!(
                        "unknown parameter `{other}` for {NAME}; valid: M, R, b, d, g, k, m"
                    )))
                }
            }
        }
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("M", self.big_m),
            ("m", self.m),
            ("R", self.r),
            ("k", self.k),
            ("g", self.g),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::input(format!(
                    "{NAME}: parameter {name} must be positive, got {v}"
                )));
            }
        }
        for (name, v) in [("d", self.d), ("b", self.b)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::input(format!(
                    "{NAME}: parameter {name} must be non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn rhs(&self, s: &[f64], out: &mut [f64]) {
        let (x, v, th, w) = (s[0], s[1], s[2], s[3]);
        let Self {
            big_m,
            m,
            r,
            k,
            g,
            d,
            b,
        } = *self;
        let (sn, cs) = th.sin_cos();
        let den = big_m + m * sn * sn;
        out[0] = v;
        out[1] = (m * r * w * w * sn + m * g * sn * cs - k * x - d * v + b / r * w * cs) / den;
        out[2] = w;
        out[3] = (-m * r * w * w * sn * cs - (m + big_m) * g * sn + k * x * cs + d * v * cs
            - (1.0 + big_m / m) * b / r * w)
            / (r * den);
    }

    pub fn field_unchecked(&self) -> VectorField {
        let p = *self;
        VectorField::new(NAME, 4, move |s, out| p.rhs(s, out))
            .expect("dimension is positive")
            .with_params(self.to_map())
    }

    /// Closed form of the reduced field, `(v, −(dv + kx)/M)`.
    pub fn reduced_rhs(&self, y: &[f64]) -> [f64; 2] {
        [y[1], -(self.d * y[1] + self.k * y[0]) / self.big_m]
    }

    /// Reduced system matrix `[[0, 1], [−k/M, −d/M]]`, row major.
    pub fn reduced_matrix(&self) -> [[f64; 2]; 2] {
        [[0.0, 1.0], [-self.k / self.big_m, -self.d / self.big_m]]
    }

    /// Mechanical energy
    /// `½(M+m)v² + mRvω cosθ + ½mR²ω² + ½kx² + mgR(1 − cosθ)`.
    pub fn energy(&self, s: &[f64]) -> f64 {
        let (x, v, th, w) = (s[0], s[1], s[2], s[3]);
        let Self { big_m, m, r, k, g, .. } = *self;
        0.5 * (big_m + m) * v * v
            + m * r * v * w * th.cos()
            + 0.5 * m * r * r * w * w
            + 0.5 * k * x * x
            + m * g * r * (1.0 - th.cos())
    }

    /// Bounding box of the energy sublevel set `{H <= c}`. The velocity
    /// bound uses the smallest eigenvalue of the mass matrix over all `θ`.
    pub fn energy_box(&self, c: f64) -> Result<BoxRegion> {
        if !(c > 0.0) {
            return Err(Error::input(format!("energy level must be positive, got {c}")));
        }
        let Self { big_m, m, r, k, g, .. } = *self;
        let x_max = (2.0 * c / k).sqrt();
        let cos_min = 1.0 - c / (m * g * r);
        let th_max = if cos_min <= -1.0 {
            std::f64::consts::PI
        } else {
            cos_min.acos()
        };
        // Eigenvalues of [[M+m, mR cosθ], [mR cosθ, mR²]] are smallest at cosθ = ±1.
        let (a, dd, off) = (big_m + m, m * r * r, m * r);
        let lam_min = 0.5 * (a + dd) - (0.25 * (a - dd).powi(2) + off * off).sqrt();
        let q_max = (2.0 * c / lam_min).sqrt();
        BoxRegion::symmetric(&[x_max, q_max, th_max, q_max])
    }

    pub fn default_box(&self, x0: &[f64]) -> Result<BoxRegion> {
        self.energy_box(self.energy(x0))
    }

    /// Cart dynamics written with `(θ, ω, ω̇)` as input:
    /// `F = (v, (mRω²sinθ − kx − dv − mRω̇cosθ)/(M + m))`.
    pub fn control_system(&self) -> ControlSystem {
        let p = *self;
        ControlSystem::new(format!("{NAME}/projected"), 2, 3, move |y, u, out| {
            let h = u[1] * u[1] * u[0].sin() - u[2] * u[0].cos();
            out[0] = y[1];
            out[1] = (p.m * p.r * h - p.k * y[0] - p.d * y[1]) / (p.big_m + p.m);
        })
        .expect("dimensions are positive")
    }

    /// `U = (x₁ − x₂)²/(2(m + M)) + ½(v₁ − v₂)²`.
    pub fn incremental_function(&self) -> PairFunction {
        let s = 1.0 / (self.m + self.big_m);
        PairFunction::new(move |a, b| 0.5 * s * (a[0] - b[0]).powi(2) + 0.5 * (a[1] - b[1]).powi(2)).with_gradient(
            move |a, b| {
                let g = vec![s * (a[0] - b[0]), a[1] - b[1]];
                let neg = g.iter().map(|v| -v).collect();
                (g, neg)
            },
        )
    }

    /// Input box `(θ, ω, ω̇)` for a full-state box, with the `ω̇` range taken
    /// from sampled values of the full field (times the safety factor).
    pub fn input_box(&self, region: &BoxRegion, seed: u64) -> Result<BoxRegion> {
        let mut out = [0.0; 4];
        let mut wdot_max = 0.0f64;
        for s in sample_box(region, BOUND_SAMPLES, seed)? {
            self.rhs(&s, &mut out);
            wdot_max = wdot_max.max(out[3].abs());
        }
        let wdot = LIPSCHITZ_SAFETY_FACTOR * wdot_max;
        BoxRegion::new(
            vec![region.lower()[2], region.lower()[3], -wdot],
            vec![region.upper()[2], region.upper()[3], wdot],
        )
    }

    /// Lipschitz estimate of `ω²sinθ − ω̇cosθ` on the input box, before the
    /// safety factor.
    pub fn coupling_lipschitz(input_box: &BoxRegion, seed: u64) -> Result<f64> {
        estimate_lipschitz(
            |u| vec![u[1] * u[1] * u[0].sin() - u[2] * u[0].cos()],
            input_box,
            BOUND_SAMPLES,
            seed,
        )
    }

    /// IUBIBSS certificate with gain `µ(r) = (2mRL/d)r + ξ` and the sandwich
    /// bounds `r²·min(1/(2(m+M)), ½) <= U <= r²·max(1/(2(m+M)), ½)`.
    pub fn iubibss_certificate(&self, lipschitz: f64, xi: f64) -> Result<IubibssCertificate> {
        if !(self.d > 0.0) {
            return Err(Error::input(format!("{NAME}: the IUBIBSS gain needs d > 0")));
        }
        let c = 0.5 / (self.m + self.big_m);
        let slope = (2.0 * self.m * self.r * lipschitz / self.d).max(f64::MIN_POSITIVE);
        Ok(IubibssCertificate {
            v: self.incremental_function(),
            alpha_lower: ComparisonFunction::power(c.min(0.5), 2.0)?,
            alpha_upper: ComparisonFunction::power(c.max(0.5), 2.0)?,
            mu: Gain::new(ComparisonFunction::linear(slope)?, xi)?,
            xi,
        })
    }
}
