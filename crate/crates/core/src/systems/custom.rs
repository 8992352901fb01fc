//! User-defined systems read from TOML.
//!
//! ```toml
//! name = "decoupled"
//! states = ["y", "z"]
//! retained = 1
//! rhs = ["-a*y", "-z + sin(y)"]
//! x0 = [1.0, 0.5]
//!
//! [params]
//! a = 2.0
//! ```
//!
//! `retained` is the number of leading states kept by the reduction. `x0`
//! is optional and defaults to all ones. Parameter overrides replace
//! `[params]` entries before the right-hand sides are parsed.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::model::VectorField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub name: String,
    pub states: Vec<String>,
    pub retained: usize,
    pub rhs: Vec<String>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl SystemConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Merges overrides into the parameters, rejecting unknown names.
    pub fn resolved_params(&self, overrides: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
        let mut params = self.params.clone();
        for (k, v) in overrides {
            match params.get_mut(k) {
                Some(slot) => *slot = *v,
                None => {
                    let valid: Vec<&str> = self.params.keys().map(String::as_str).collect();
                    return Err(Error::input(format!(
                        "unknown parameter `{k}` for {}; valid: {}",
                        self.name,
                        if valid.is_empty() {
                            "(none)".to_string()
                        } else {
                            valid.join(", ")
                        }
                    )));
                }
            }
        }
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.states.len();
        if n == 0 {
            return Err(Error::Config("`states` must not be empty".into()));
        }
        if self.rhs.len() != n {
            return Err(Error::Config(format!(
                "`rhs` has {} entries for {n} states",
                self.rhs.len()
            )));
        }
        if self.retained == 0 || self.retained >= n {
            return Err(Error::Config(format!(
                "`retained` must lie in 1..{n}, got {}",
                self.retained
            )));
        }
        for (i, s) in self.states.iter().enumerate() {
            if self.states[..i].contains(s) {
                return Err(Error::Config(format!("duplicate state name `{s}`")));
            }
            if self.params.contains_key(s) {
                return Err(Error::Config(format!("`{s}` is both a state and a parameter")));
            }
        }
        if let Some(x0) = &self.x0 {
            if x0.len() != n {
                return Err(Error::Config(format!("`x0` has {} entries for {n} states", x0.len())));
            }
        }
        Ok(())
    }

    /// Parses the right-hand sides with the given parameter values.
    pub fn build(&self, params: &BTreeMap<String, f64>) -> Result<VectorField> {
        self.validate()?;
        let exprs: Vec<Expr> = self
            .rhs
            .iter()
            .enumerate()
            .map(|(i, src)| {
                expr::parse(src, &self.states, params).map_err(|e| match e {
                    Error::Expr { offset, message } => {
                        Error::Config(format!("rhs[{i}] (`{src}`), offset {offset}: {message}"))
                    }
                    other => other,
                })
            })
            .collect::<Result<_>>()?;
        VectorField::new(self.name.clone(), self.states.len(), move |x, out| {
            for (o, e) in out.iter_mut().zip(&exprs) {
                *o = e.eval(x);
            }
        })
        .map(|f| f.with_params(params.clone()))
    }

    pub fn initial_condition(&self) -> Vec<f64> {
        self.x0.clone().unwrap_or_else(|| vec![1.0; self.states.len()])
    }
}
