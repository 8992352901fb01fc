use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A class-K∞ function from one of three parametric families.
///
/// Restricting to these families makes `f(0) = 0`, strict monotonicity and
/// unboundedness hold by construction once the coefficients are positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComparisonFunction {
    /// `a·r`
    Linear { a: f64 },
    /// `a·r^p`
    Power { a: f64, p: f64 },
    /// `a·r^p + b·r`
    AffinePower { a: f64, p: f64, b: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::input(format!(
            "comparison coefficient {name} must be finite and positive, got {v}"
        )))
    }
}

impl ComparisonFunction {
    pub fn linear(a: f64) -> Result<Self> {
        positive("a", a)?;
        Ok(Self::Linear { a })
    }

    pub fn power(a: f64, p: f64) -> Result<Self> {
        positive("a", a)?;
        positive("p", p)?;
        Ok(Self::Power { a, p })
    }

    pub fn affine_power(a: f64, p: f64, b: f64) -> Result<Self> {
        positive("a", a)?;
        positive("p", p)?;
        positive("b", b)?;
        Ok(Self::AffinePower { a, p, b })
    }

    /// Re-validates coefficients of a value built directly or deserialized.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Linear { a } => positive("a", a),
            Self::Power { a, p } => positive("a", a).and(positive("p", p)),
            Self::AffinePower { a, p, b } => positive("a", a).and(positive("p", p)).and(positive("b", b)),
        }
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::input(format!(
                "comparison functions are defined on r >= 0, got {r}"
            )));
        }
        Ok(self.value(r))
    }

    /// Evaluation without the sign check; `r` must be nonnegative.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            Self::Linear { a } => a * r,
            Self::Power { a, p } => a * r.powf(p),
            Self::AffinePower { a, p, b } => a * r.powf(p) + b * r,
        }
    }

    /// The same family with the leading coefficients multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Self {
        match *self {
            Self::Linear { a } => Self::Linear { a: a * s },
            Self::Power { a, p } => Self::Power { a: a * s, p },
            Self::AffinePower { a, p, b } => Self::AffinePower { a: a * s, p, b: b * s },
        }
    }
}

/// A gain `r ↦ base(r) + offset`.
///
/// IUBIBSS-style certificates require `µ(r) >= r + ξ` with `ξ > 0`, which no
/// class-K∞ function satisfies at `r = 0`; the offset carries that constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gain {
    pub base: ComparisonFunction,
    #[serde(default)]
    pub offset: f64,
}

impl Gain {
    pub fn new(base: ComparisonFunction, offset: f64) -> Result<Self> {
        base.validate()?;
        if !(offset >= 0.0) || !offset.is_finite() {
            return Err(Error::input(format!(
                "gain offset must be finite and nonnegative, got {offset}"
            )));
        }
        Ok(Self { base, offset })
    }

    pub fn from_base(base: ComparisonFunction) -> Self {
        Self { base, offset: 0.0 }
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        self.base.value(r) + self.offset
    }
}

/// A class-KL function of the form `β(r, s) = γ(r)·exp(-λ s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlFunction {
    pub gamma: ComparisonFunction,
    pub rate: f64,
}

impl KlFunction {
    pub fn new(gamma: ComparisonFunction, rate: f64) -> Result<Self> {
        gamma.validate()?;
        positive("rate", rate)?;
        Ok(Self { gamma, rate })
    }

    pub fn eval(&self, r: f64, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::input(format!("KL time argument must be >= 0, got {s}")));
        }
        Ok(self.gamma.eval(r)? * (-self.rate * s).exp())
    }
}
