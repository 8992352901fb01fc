//! The `approxred` command line.
//!
//! Every invocation is first resolved into a [`RunConfig`]: system and
//! parameters, decomposition, integrator, initial condition, seed and the
//! command-specific settings, with every default filled in. That config is
//! embedded in the output (`# run_config: {...}` in CSV, a `run_config` key
//! in JSON) so any file can be traced back to, and rerun from, the exact
//! settings that produced it. The output path itself is not recorded, so
//! identical runs produce identical bytes wherever they are written.
//!
//! Exit codes: 0 success or passing verdict, 1 usage error, 2 numerical
//! failure, 3 negative verdict.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::integrate::{integrate_field, IntegratorConfig, Method};
use crate::model::BoxRegion;
use crate::reduce::{
    check_exact_reducible, estimate_delta, measure_deviation, CheckOptions, DeltaMode, ReducibilityVerdict,
    DEFAULT_OUTPUT_DT, DEFAULT_TOL,
};
use crate::sampling::DEFAULT_SEED;
use crate::systems::{self, Model, SystemConfig, SystemEntry};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_NEGATIVE: i32 = 3;

const DEFAULT_EXACT_SAMPLES: usize = 1000;
const DEFAULT_LYAPUNOV_SAMPLES: usize = 10_000;
const DEFAULT_N_IC: usize = 100;

#[derive(Debug, Parser)]
#[command(
    name = "approxred",
    version,
    about = "Approximate reduction of dynamical systems by projection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the full system and write its trajectory.
    Simulate(CommonArgs),
    /// Compare projected full trajectories with reduced trajectories.
    Compare(CommonArgs),
    /// Repeat `compare` over values of one parameter.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Parameter to vary.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Test whether the projection is an exact reduction.
    CheckExact(CommonArgs),
    /// Search for counterexamples to a bundled Lyapunov certificate.
    CheckLyapunov {
        #[command(flatten)]
        common: CommonArgs,
        /// Certificate name (ball-hoop: fiberwise, iiss; cart-pendulum: iubibss).
        #[arg(long)]
        certificate: String,
        /// Replace the certificate's lower bound by twice its upper bound.
        #[arg(long)]
        corrupt: bool,
    },
    /// Estimate the uniform deviation bound over a box of initial states.
    Bound {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of sampled initial conditions.
        #[arg(long, default_value_t = DEFAULT_N_IC)]
        n_ic: usize,
        /// `projected` starts the reduced system at the projected state,
        /// `cross` anywhere in the projected box.
        #[arg(long, default_value = "projected")]
        mode: String,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Built-in system name (ball-hoop, cart-pendulum).
    #[arg(long)]
    pub system: Option<String>,
    /// TOML file defining a custom system.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Parameter override `name=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Initial condition `c1,c2,...`.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// RK4 step size.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub method: Option<String>,
    /// Number of retained leading coordinates.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, env = "APPROXRED_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Box `lo1,hi1;lo2,hi2;...` over the full state.
    #[arg(long = "box", allow_hyphen_values = true)]
    pub region: Option<String>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Which system to run, by built-in name or by embedded definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub name: String,
    #[serde(default)]
    pub overrides: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub definition: Option<SystemConfig>,
}

impl SystemSpec {
    pub fn resolve(&self, retained: Option<usize>) -> Result<SystemEntry> {
        let entry = match &self.definition {
            Some(cfg) => systems::from_config(cfg, &self.overrides)?,
            None => systems::lookup(&self.name, &self.overrides)?,
        };
        match retained {
            Some(m) => entry.with_retained(m),
            None => Ok(entry),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Task {
    Simulate,
    Compare,
    Sweep {
        param: String,
        values: Vec<f64>,
    },
    CheckExact {
        samples: usize,
        tol: f64,
        region: BoxRegion,
    },
    CheckLyapunov {
        certificate: String,
        samples: usize,
        region: BoxRegion,
        corrupt: bool,
    },
    Bound {
        region: BoxRegion,
        n_ic: usize,
        mode: DeltaMode,
    },
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub task: Task,
    pub system: SystemSpec,
    #[serde(default)]
    pub retained: Option<usize>,
    pub integrator: IntegratorConfig,
    pub x0: Vec<f64>,
    pub seed: u64,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Result of executing a [`RunConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// File contents to write.
    pub body: String,
    /// `Some(false)` for a negative verdict.
    pub verdict: Option<bool>,
    /// Short JSON summary echoed on standard output when writing to a file.
    pub summary: Option<String>,
}

fn parse_overrides(set: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for item in set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::input(format!("--set expects key=value, got `{item}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::input(format!("--set {k}: `{v}` is not a number")))?;
        map.insert(k.trim().to_string(), v);
    }
    Ok(map)
}

fn parse_vector(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|_| Error::input(format!("{what}: `{c}` is not a number")))
        })
        .collect()
}

/// Region used when none is given: the system's own default box, or the
/// unit box `[-1, 1]^n` for user-defined systems.
pub fn default_region(entry: &SystemEntry) -> Result<BoxRegion> {
    match entry.model {
        Model::Custom(_) => BoxRegion::symmetric(&vec![1.0; entry.field.dim()]),
        _ => entry.default_box(),
    }
}

impl RunConfig {
    /// Resolves command-line arguments, filling in every default.
    pub fn from_command(cmd: &Command) -> Result<Self> {
        let common = match cmd {
            Command::Simulate(c) | Command::Compare(c) | Command::CheckExact(c) => c,
            Command::Sweep { common, .. } | Command::CheckLyapunov { common, .. } | Command::Bound { common, .. } => {
                common
            }
        };
        let overrides = parse_overrides(&common.set)?;
        let system = match (&common.system, &common.config) {
            (Some(_), Some(_)) => return Err(Error::input("give either --system or --config, not both")),
            (None, None) => {
                return Err(Error::input(format!(
                    "missing --system (valid: {}) or --config",
                    systems::BUILTIN_SYSTEMS.join(", ")
                )))
            }
            (Some(name), None) => SystemSpec {
                name: name.clone(),
                overrides,
                definition: None,
            },
            (None, Some(path)) => {
                let cfg = SystemConfig::load(path)?;
                SystemSpec {
                    name: cfg.name.clone(),
                    overrides,
                    definition: Some(cfg),
                }
            }
        };
        let entry = system.resolve(common.m)?;
        let n = entry.field.dim();

        let x0 = match &common.x0 {
            Some(s) => parse_vector(s, "--x0")?,
            None => entry.default_x0.clone(),
        };
        if x0.len() != n {
            return Err(Error::dim("--x0", n, x0.len()));
        }

        let mut integrator = IntegratorConfig::default().with_output_dt(DEFAULT_OUTPUT_DT);
        if let Some(m) = &common.method {
            integrator.method = m.parse::<Method>()?;
        }
        if let Some(v) = common.dt {
            integrator.dt = v;
        }
        if let Some(v) = common.rtol {
            integrator.rtol = v;
        }
        if let Some(v) = common.atol {
            integrator.atol = v;
        }
        if let Some(v) = common.t_end {
            integrator.t_end = v;
        }
        integrator.validate()?;

        let region = || -> Result<BoxRegion> {
            let r = match &common.region {
                Some(s) => s.parse::<BoxRegion>()?,
                None => default_region(&entry)?,
            };
            if r.dim() != n {
                return Err(Error::dim("--box", n, r.dim()));
            }
            Ok(r)
        };

        let json_only = |task: &str| -> Result<Format> {
            match common.format {
                Some(Format::Csv) => Err(Error::input(format!("{task} writes JSON only"))),
                _ => Ok(Format::Json),
            }
        };

        let (task, format) = match cmd {
            Command::Simulate(_) => (Task::Simulate, common.format.unwrap_or(Format::Csv)),
            Command::Compare(_) => (Task::Compare, common.format.unwrap_or(Format::Csv)),
            Command::Sweep { param, values, .. } => {
                if values.is_empty() {
                    return Err(Error::input("--values needs at least one value"));
                }
                if !entry.params.contains_key(param) {
                    return Err(Error::input(format!(
                        "`{}` has no parameter `{param}`; valid: {}",
                        entry.name,
                        entry.params.keys().cloned().collect::<Vec<_>>().join(", ")
                    )));
                }
                (
                    Task::Sweep {
                        param: param.clone(),
                        values: values.clone(),
                    },
                    common.format.unwrap_or(Format::Csv),
                )
            }
            Command::CheckExact(_) => (
                Task::CheckExact {
                    samples: common.samples.unwrap_or(DEFAULT_EXACT_SAMPLES),
                    tol: common.tol.unwrap_or(DEFAULT_TOL),
                    region: region()?,
                },
                json_only("check-exact")?,
            ),
            Command::CheckLyapunov {
                certificate, corrupt, ..
            } => (
                Task::CheckLyapunov {
                    certificate: certificate.clone(),
                    samples: common.samples.unwrap_or(DEFAULT_LYAPUNOV_SAMPLES),
                    region: region()?,
                    corrupt: *corrupt,
                },
                json_only("check-lyapunov")?,
            ),
            Command::Bound { n_ic, mode, .. } => (
                Task::Bound {
                    region: region()?,
                    n_ic: *n_ic,
                    mode: mode.parse()?,
                },
                json_only("bound")?,
            ),
        };

        Ok(RunConfig {
            task,
            system,
            retained: common.m,
            integrator,
            x0,
            seed: common.seed,
            format,
            out: common.out.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("run config serializes")
    }
}

/// Recovers the [`RunConfig`] embedded in a CSV or JSON output file.
pub fn read_run_config(text: &str) -> Result<RunConfig> {
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# run_config: ") {
            return Ok(serde_json::from_str(rest)?);
        }
    }
    let v: Value = serde_json::from_str(text)?;
    let rc = v
        .get("run_config")
        .ok_or_else(|| Error::input("no run_config found in output"))?;
    Ok(serde_json::from_value(rc.clone())?)
}

/// Shortest decimal representation that parses back to the same double.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn metadata_lines(cfg: &RunConfig, entry: &SystemEntry) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# tool: approxred {VERSION}");
    let _ = writeln!(s, "# system: {}", entry.name);
    let _ = writeln!(s, "# params: {}", serde_json::to_string(&entry.params).unwrap());
    if let Some(g) = entry.params.get("g") {
        let _ = writeln!(s, "# g: {}", num(*g));
    }
    let _ = writeln!(s, "# retained: {}", entry.decomp.m());
    let _ = writeln!(s, "# x0: {}", serde_json::to_string(&cfg.x0).unwrap());
    let _ = writeln!(s, "# integrator: {}", serde_json::to_string(&cfg.integrator).unwrap());
    let _ = writeln!(s, "# seed: {}", cfg.seed);
    let _ = writeln!(s, "# run_config: {}", cfg.to_json());
    s
}

fn json_envelope(cfg: &RunConfig, entry: &SystemEntry, payload: Value) -> String {
    let mut map = match payload {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    map.insert("tool".into(), json!(format!("approxred {VERSION}")));
    map.insert("system".into(), json!(entry.name));
    map.insert("params".into(), json!(entry.params));
    map.insert("run_config".into(), serde_json::to_value(cfg).unwrap());
    let mut s = serde_json::to_string_pretty(&Value::Object(map)).unwrap();
    s.push('\n');
    s
}

fn csv_row(values: impl IntoIterator<Item = f64>) -> String {
    let mut line = values.into_iter().map(num).collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

fn with_override(cfg: &RunConfig, param: &str, value: f64) -> Result<SystemEntry> {
    let mut spec = cfg.system.clone();
    spec.overrides.insert(param.to_string(), value);
    spec.resolve(cfg.retained)
}

/// Runs a resolved configuration and renders its output.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    let entry = cfg.system.resolve(cfg.retained)?;
    let n = entry.field.dim();
    if cfg.x0.len() != n {
        return Err(Error::dim("x0", n, cfg.x0.len()));
    }
    let plain = |body: String| Outcome {
        body,
        verdict: None,
        summary: None,
    };

    match &cfg.task {
        Task::Simulate => {
            let traj = integrate_field(&entry.field, &cfg.x0, &cfg.integrator)?;
            Ok(plain(match cfg.format {
                Format::Csv => {
                    let mut s = metadata_lines(cfg, &entry);
                    let cols: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
                    let _ = writeln!(s, "t,{}", cols.join(","));
                    for (t, x) in traj.iter() {
                        s.push_str(&csv_row(std::iter::once(t).chain(x.iter().copied())));
                    }
                    s
                }
                Format::Json => json_envelope(
                    cfg,
                    &entry,
                    json!({
                        "state_names": entry.state_names,
                        "t": traj.times(),
                        "x": traj.states(),
                    }),
                ),
            }))
        }
        Task::Compare => {
            let rep = measure_deviation(&entry.field, &entry.decomp, &cfg.x0, &cfg.integrator)?;
            let summary = json!({"sup_dev": rep.sup_dev, "t_of_sup": rep.t_of_sup});
            let body = match cfg.format {
                Format::Csv => {
                    let m = entry.decomp.m();
                    let mut s = metadata_lines(cfg, &entry);
                    let _ = writeln!(s, "# summary: {summary}");
                    let mut header = vec!["t".to_string()];
                    header.extend((0..m).map(|i| format!("full_proj_{i}")));
                    header.extend((0..m).map(|i| format!("reduced_{i}")));
                    header.push("deviation".into());
                    let _ = writeln!(s, "{}", header.join(","));
                    for i in 0..rep.times.len() {
                        let row = std::iter::once(rep.times[i])
                            .chain(rep.projected[i].iter().copied())
                            .chain(rep.reduced[i].iter().copied())
                            .chain(std::iter::once(rep.dev_series[i]));
                        s.push_str(&csv_row(row));
                    }
                    s
                }
                Format::Json => json_envelope(
                    cfg,
                    &entry,
                    json!({
                        "summary": summary,
                        "t": rep.times,
                        "full_proj": rep.projected,
                        "reduced": rep.reduced,
                        "deviation": rep.dev_series,
                    }),
                ),
            };
            Ok(Outcome {
                body,
                verdict: None,
                summary: Some(summary.to_string()),
            })
        }
        Task::Sweep { param, values } => {
            let mut rows = Vec::with_capacity(values.len());
            for &v in values {
                let e = with_override(cfg, param, v)?;
                let rep = measure_deviation(&e.field, &e.decomp, &cfg.x0, &cfg.integrator)?;
                rows.push((v, rep.sup_dev, rep.t_of_sup));
            }
            Ok(plain(match cfg.format {
                Format::Csv => {
                    let mut s = metadata_lines(cfg, &entry);
                    let _ = writeln!(s, "# sweep: {param}");
                    s.push_str("param_value,sup_dev,t_of_sup\n");
                    for (v, d, t) in &rows {
                        s.push_str(&csv_row([*v, *d, *t]));
                    }
                    s
                }
                Format::Json => {
                    let rows: Vec<Value> = rows
                        .iter()
                        .map(|(v, d, t)| json!({"param_value": v, "sup_dev": d, "t_of_sup": t}))
                        .collect();
                    json_envelope(cfg, &entry, json!({"param": param, "rows": rows}))
                }
            }))
        }
        Task::CheckExact { samples, tol, region } => {
            let opts = CheckOptions {
                samples: *samples,
                seed: cfg.seed,
                tol: *tol,
            };
            let rep = check_exact_reducible(&entry.field, &entry.decomp, region, &opts)?;
            let ok = rep.verdict == ReducibilityVerdict::ReducibleUpToTol;
            let summary = json!({"verdict": rep.verdict, "max_residual": rep.max_residual});
            Ok(Outcome {
                body: json_envelope(cfg, &entry, serde_json::to_value(&rep)?),
                verdict: Some(ok),
                summary: Some(summary.to_string()),
            })
        }
        Task::CheckLyapunov {
            certificate,
            samples,
            region,
            corrupt,
        } => {
            let mut check = entry.certificate(certificate, Some(region), cfg.seed)?;
            if *corrupt {
                check = check.corrupted();
            }
            let rep = check.run(*samples, cfg.seed)?;
            let summary = json!({"verdict": rep.verdict, "violations": rep.violations});
            let mut payload = serde_json::to_value(&rep)?;
            payload["certificate"] = json!(check.kind());
            Ok(Outcome {
                body: json_envelope(cfg, &entry, payload),
                verdict: Some(rep.passed()),
                summary: Some(summary.to_string()),
            })
        }
        Task::Bound { region, n_ic, mode } => {
            let est = estimate_delta(
                &entry.field,
                &entry.decomp,
                region,
                *n_ic,
                &cfg.integrator,
                *mode,
                cfg.seed,
            )?;
            let summary = json!({"delta_hat": est.delta_hat, "failures": est.failures});
            Ok(Outcome {
                body: json_envelope(cfg, &entry, serde_json::to_value(&est)?),
                verdict: None,
                summary: Some(summary.to_string()),
            })
        }
    }
}

/// Maps a library error to an exit code.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

/// Parses `args` (including the program name), runs, writes output and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = RunConfig::from_command(&cli.command).and_then(|cfg| {
        let outcome = execute(&cfg)?;
        match &cfg.out {
            Some(path) => {
                std::fs::write(path, &outcome.body)?;
                if let Some(s) = &outcome.summary {
                    println!("{s}");
                }
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(outcome.body.as_bytes())?;
                stdout.flush()?;
            }
        }
        Ok(outcome)
    });
    match result {
        Ok(Outcome {
            verdict: Some(false), ..
        }) => EXIT_NEGATIVE,
        Ok(_) => EXIT_OK,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
