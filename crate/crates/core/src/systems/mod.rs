//! Built-in example systems, user-defined systems, and the registry used by
//! the command line.

pub mod ball_hoop;
pub mod cart_pendulum;
pub mod custom;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{BoxRegion, ControlSystem, Decomposition, VectorField};
use crate::stability::{
    check_fiberwise, check_iiss, check_iubibss, CertificateReport, FiberwiseCertificate, IissCertificate,
    IubibssCertificate, LIPSCHITZ_SAFETY_FACTOR,
};

pub use ball_hoop::BallHoopParams;
pub use cart_pendulum::CartPendulumParams;
pub use custom::SystemConfig;

/// Gravitational acceleration used unless overridden, in m/s².
pub const DEFAULT_G: f64 = 9.81;

pub const BUILTIN_SYSTEMS: [&str; 2] = [ball_hoop::NAME, cart_pendulum::NAME];

pub type JacobianFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    BallHoop(BallHoopParams),
    CartPendulum(CartPendulumParams),
    Custom(SystemConfig),
}

/// A resolved system: field, parameters, decomposition and the extras the
/// command line needs.
#[derive(Clone)]
pub struct SystemEntry {
    pub name: String,
    pub field: VectorField,
    pub params: BTreeMap<String, f64>,
    pub decomp: Decomposition,
    pub state_names: Vec<String>,
    pub default_x0: Vec<f64>,
    pub analytic_jacobian: Option<JacobianFn>,
    pub certificates: Vec<&'static str>,
    pub notes: Vec<String>,
    pub model: Model,
}

impl fmt::Debug for SystemEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemEntry")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("decomp", &self.decomp)
            .field("state_names", &self.state_names)
            .field("default_x0", &self.default_x0)
            .field("certificates", &self.certificates)
            .finish()
    }
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

pub fn ball_hoop(p: BallHoopParams) -> Result<SystemEntry> {
    p.validate()?;
    let jp = p;
    Ok(SystemEntry {
        name: ball_hoop::NAME.into(),
        field: p.field_unchecked(),
        params: p.to_map(),
        decomp: Decomposition::new(2, 1)?,
        state_names: names(&["omega", "theta"]),
        default_x0: ball_hoop::DEFAULT_X0.to_vec(),
        analytic_jacobian: Some(Arc::new(move |x| jp.jacobian(x))),
        certificates: vec!["fiberwise", "iiss"],
        notes: vec![
            "state (omega, theta); retained: omega".into(),
            "reduced field: omega' = -(mu/m) omega".into(),
            format!("g defaults to {DEFAULT_G}"),
            "default box: bounding box of {V <= V(x0)} for the default x0".into(),
        ],
        model: Model::BallHoop(p),
    })
}

pub fn cart_pendulum(p: CartPendulumParams) -> Result<SystemEntry> {
    p.validate()?;
    Ok(SystemEntry {
        name: cart_pendulum::NAME.into(),
        field: p.field_unchecked(),
        params: p.to_map(),
        decomp: Decomposition::new(4, 2)?,
        state_names: names(&["x", "v", "theta", "omega"]),
        default_x0: cart_pendulum::DEFAULT_X0.to_vec(),
        analytic_jacobian: None,
        certificates: vec!["iubibss"],
        notes: vec![
            "state stored as (x, v, theta, omega); conventional order is (x, theta, v, omega)".into(),
            "reduced field: (x', v') = (v, -(d v + k x)/M)".into(),
            format!("g defaults to {DEFAULT_G}"),
            "default box: bounding box of {H <= H(x0)} for the mechanical energy H".into(),
        ],
        model: Model::CartPendulum(p),
    })
}

pub fn from_config(cfg: &SystemConfig, overrides: &BTreeMap<String, f64>) -> Result<SystemEntry> {
    let params = cfg.resolved_params(overrides)?;
    let field = cfg.build(&params)?;
    Ok(SystemEntry {
        name: cfg.name.clone(),
        decomp: Decomposition::new(cfg.states.len(), cfg.retained)?,
        field,
        params,
        state_names: cfg.states.clone(),
        default_x0: cfg.initial_condition(),
        analytic_jacobian: None,
        certificates: Vec::new(),
        notes: vec!["user-defined system".into()],
        model: Model::Custom(cfg.clone()),
    })
}

/// Resolves a built-in system by name, merging parameter overrides into its
/// defaults.
pub fn lookup(name: &str, overrides: &BTreeMap<String, f64>) -> Result<SystemEntry> {
    match name {
        ball_hoop::NAME => ball_hoop(BallHoopParams::from_map(overrides)?),
        cart_pendulum::NAME => cart_pendulum(CartPendulumParams::from_map(overrides)?),
        _ => Err(Error::NotFound {
            name: name.to_string(),
            valid: BUILTIN_SYSTEMS.join(", "),
        }),
    }
}

impl SystemEntry {
    /// Replaces the decomposition, keeping the leading `m` coordinates.
    pub fn with_retained(mut self, m: usize) -> Result<Self> {
        self.decomp = Decomposition::new(self.field.dim(), m)?;
        Ok(self)
    }

    fn has_default_decomposition(&self) -> bool {
        let m = match &self.model {
            Model::BallHoop(_) => 1,
            Model::CartPendulum(_) => 2,
            Model::Custom(c) => c.retained,
        };
        self.decomp.m() == m
    }

    /// Default full-state region: the bounding box of the Lyapunov (or
    /// energy) sublevel set through the default initial condition.
    pub fn default_box(&self) -> Result<BoxRegion> {
        match &self.model {
            Model::BallHoop(p) => p.default_box(&self.default_x0),
            Model::CartPendulum(p) => p.default_box(&self.default_x0),
            Model::Custom(_) => Err(Error::input(format!(
                "`{}` has no default region; pass one explicitly",
                self.name
            ))),
        }
    }

    /// Builds a bundled certificate check on `region` (the default box when
    /// `None`). `seed` drives the sampled constants inside the certificate.
    pub fn certificate(&self, name: &str, region: Option<&BoxRegion>, seed: u64) -> Result<CertificateCheck> {
        if !self.certificates.contains(&name) {
            return Err(Error::input(format!(
                "`{}` has no certificate `{name}`; available: {}",
                self.name,
                if self.certificates.is_empty() {
                    "(none)".to_string()
                } else {
                    self.certificates.join(", ")
                }
            )));
        }
        if !self.has_default_decomposition() {
            return Err(Error::input("bundled certificates assume the default decomposition"));
        }
        let region = match region {
            Some(r) => r.clone(),
            None => self.default_box()?,
        };
        if region.dim() != self.field.dim() {
            return Err(Error::dim("certificate box", self.field.dim(), region.dim()));
        }
        match (&self.model, name) {
            (Model::BallHoop(p), "iiss") => {
                let (state_box, input_box) = BallHoopParams::split_box(&region)?;
                let l = ball_hoop::certified_lipschitz(p, &input_box, seed)?;
                Ok(CertificateCheck::Iiss {
                    system: p.control_system(),
                    cert: p.iiss_certificate(l)?,
                    state_box,
                    input_box,
                })
            }
            (Model::BallHoop(p), "fiberwise") => Ok(CertificateCheck::Fiberwise {
                field: self.field.clone(),
                decomp: self.decomp,
                cert: p.fiberwise_certificate(&region)?,
                region,
            }),
            (Model::CartPendulum(p), "iubibss") => {
                let state_box = region.project(&self.decomp, crate::model::Part::Retained)?;
                let input_box = p.input_box(&region, seed)?;
                let l = LIPSCHITZ_SAFETY_FACTOR * CartPendulumParams::coupling_lipschitz(&input_box, seed)?;
                Ok(CertificateCheck::Iubibss {
                    system: p.control_system(),
                    cert: p.iubibss_certificate(l, cart_pendulum::IUBIBSS_XI)?,
                    state_box,
                    input_box,
                })
            }
            _ => unreachable!("certificate list and builders disagree"),
        }
    }
}

/// A certificate together with the system and boxes it is checked on.
#[derive(Debug, Clone)]
pub enum CertificateCheck {
    Iiss {
        system: ControlSystem,
        cert: IissCertificate,
        state_box: BoxRegion,
        input_box: BoxRegion,
    },
    Iubibss {
        system: ControlSystem,
        cert: IubibssCertificate,
        state_box: BoxRegion,
        input_box: BoxRegion,
    },
    Fiberwise {
        field: VectorField,
        decomp: Decomposition,
        cert: FiberwiseCertificate,
        region: BoxRegion,
    },
}

impl CertificateCheck {
    pub fn kind(&self) -> &'static str {
        match self {
            CertificateCheck::Iiss { .. } => "iiss",
            CertificateCheck::Iubibss { .. } => "iubibss",
            CertificateCheck::Fiberwise { .. } => "fiberwise",
        }
    }

    pub fn run(&self, n_samples: usize, seed: u64) -> Result<CertificateReport> {
        match self {
            CertificateCheck::Iiss {
                system,
                cert,
                state_box,
                input_box,
            } => check_iiss(system, cert, state_box, input_box, n_samples, seed),
            CertificateCheck::Iubibss {
                system,
                cert,
                state_box,
                input_box,
            } => check_iubibss(system, cert, state_box, input_box, n_samples, seed),
            CertificateCheck::Fiberwise {
                field,
                decomp,
                cert,
                region,
            } => check_fiberwise(field, decomp, cert, region, n_samples, seed),
        }
    }

    /// The same check with the lower sandwich bound replaced by twice the
    /// upper one, which no nonzero certificate value can satisfy.
    pub fn corrupted(&self) -> Self {
        let mut c = self.clone();
        match &mut c {
            CertificateCheck::Iiss { cert, .. } => cert.alpha_lower = cert.alpha_upper.scaled(2.0),
            CertificateCheck::Iubibss { cert, .. } => cert.alpha_lower = cert.alpha_upper.scaled(2.0),
            CertificateCheck::Fiberwise { cert, .. } => cert.alpha_lower = cert.alpha_upper.scaled(2.0),
        }
        c
    }
}
