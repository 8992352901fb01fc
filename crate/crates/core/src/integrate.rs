//! Initial value problem solvers producing [`Trajectory`] values.
//!
//! Two methods: classical fixed-step RK4 and Dormand–Prince 5(4) with
//! standard error-per-step control. When an output spacing is configured the
//! step sequence is clipped so that every output time is hit exactly, which
//! lets two integrations be compared node by node without interpolation.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::model::{ControlSystem, Trajectory, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Rk45,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "rk45" => Ok(Method::Rk45),
            other => Err(Error::input(format!("unknown method `{other}` (rk4|rk45)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Step size for RK4, seconds.
    pub dt: f64,
    pub rtol: f64,
    pub atol: f64,
    pub t_end: f64,
    pub max_steps: usize,
    /// When set, the trajectory is recorded exactly on `0, h, 2h, ..., t_end`.
    #[serde(default)]
    pub output_dt: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk45,
            dt: 1e-3,
            rtol: 1e-9,
            atol: 1e-9,
            t_end: 10.0,
            max_steps: 10_000_000,
            output_dt: None,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(dt: f64, t_end: f64) -> Self {
        Self {
            method: Method::Rk4,
            dt,
            t_end,
            ..Self::default()
        }
    }

    pub fn rk45(rtol: f64, atol: f64, t_end: f64) -> Self {
        Self {
            method: Method::Rk45,
            rtol,
            atol,
            t_end,
            ..Self::default()
        }
    }

    pub fn with_output_dt(mut self, h: f64) -> Self {
        self.output_dt = Some(h);
        self
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::input(format!("integrator {name} must be positive, got {v}")))
            }
        };
        pos("dt", self.dt)?;
        pos("rtol", self.rtol)?;
        pos("atol", self.atol)?;
        pos("t_end", self.t_end)?;
        if let Some(h) = self.output_dt {
            pos("output_dt", h)?;
        }
        if self.max_steps < 2 {
            return Err(Error::input("integrator max_steps must be >= 2"));
        }
        Ok(())
    }

    /// Nominal accuracy of one integration. Downstream comparisons allow ten
    /// times this much numerical disagreement.
    pub fn tolerance(&self) -> f64 {
        match self.method {
            Method::Rk4 => self.dt.powi(4),
            Method::Rk45 => self.rtol.max(self.atol),
        }
    }

    pub fn comparison_slack(&self) -> f64 {
        10.0 * self.tolerance()
    }
}

/// A time-indexed input `u(t)` for a control system.
#[derive(Clone)]
pub enum InputSignal {
    Constant(Vec<f64>),
    /// Samples on a strictly increasing grid, linearly interpolated.
    Sampled {
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
    Function {
        dim: usize,
        f: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
    },
}

impl std::fmt::Debug for InputSignal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Self::Sampled { times, .. } => f
                .debug_struct("Sampled")
                .field("len", &times.len())
                .finish_non_exhaustive(),
            Self::Function { dim, .. } => f.debug_struct("Function").field("dim", dim).finish_non_exhaustive(),
        }
    }
}

impl InputSignal {
    pub fn sampled(times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::input("sampled input needs one value per time"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::input("sampled input times must be strictly increasing"));
        }
        let dim = values[0].len();
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::input("sampled input values have inconsistent dimension"));
        }
        Ok(Self::Sampled { times, values })
    }

    pub fn function<F>(dim: usize, f: F) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        Self::Function { dim, f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Constant(v) => v.len(),
            Self::Sampled { values, .. } => values[0].len(),
            Self::Function { dim, .. } => *dim,
        }
    }

    /// Writes `u(t)` into `out`.
    pub fn at(&self, t: f64, out: &mut [f64]) -> Result<()> {
        match self {
            Self::Constant(v) => out.copy_from_slice(v),
            Self::Function { f, dim } => {
                let v = f(t);
                check_len("input signal value", *dim, v.len())?;
                out.copy_from_slice(&v);
            }
            Self::Sampled { times, values } => {
                let first = times[0];
                let last = *times.last().unwrap();
                let eps = 1e-12 * last.abs().max(1.0);
                if !(t >= first - eps && t <= last + eps) {
                    return Err(Error::input(format!(
                        "input signal is defined on [{first}, {last}], requested t = {t}"
                    )));
                }
                if times.len() == 1 || t <= first {
                    out.copy_from_slice(&values[0]);
                } else if t >= last {
                    out.copy_from_slice(values.last().unwrap());
                } else {
                    let i = times.partition_point(|&s| s <= t) - 1;
                    let (t0, t1) = (times[i], times[i + 1]);
                    let w = (t - t0) / (t1 - t0);
                    for (o, (a, b)) in out.iter_mut().zip(values[i].iter().zip(&values[i + 1])) {
                        *o = a + w * (b - a);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Integrates `x' = f(x)` from `x0` over `[0, cfg.t_end]`.
pub fn integrate_field(f: &VectorField, x0: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory> {
    check_len(&format!("initial state of `{}`", f.name()), f.dim(), x0.len())?;
    solve(f.name(), x0, cfg, |_t, x, out| {
        f.eval_into(x, out);
        Ok(())
    })
}

/// Integrates `x' = F(x, u(t))` from `x0`, sampling `u` at the stage times.
pub fn integrate_control(
    sys: &ControlSystem,
    x0: &[f64],
    u: &InputSignal,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    check_len(&format!("initial state of `{}`", sys.name()), sys.dim(), x0.len())?;
    check_len(&format!("input of `{}`", sys.name()), sys.input_dim(), u.dim())?;
    let mut ubuf = vec![0.0; sys.input_dim()];
    solve(sys.name(), x0, cfg, move |t, x, out| {
        u.at(t, &mut ubuf)?;
        sys.eval_into(x, &ubuf, out);
        Ok(())
    })
}

/// Interpolates `traj` onto `times`, which must start at 0 and stay within
/// the trajectory's span. Values at original nodes are reproduced exactly.
pub fn resample(traj: &Trajectory, times: &[f64]) -> Result<Trajectory> {
    let states = times.iter().map(|&t| state_at(traj, t)).collect::<Result<Vec<_>>>()?;
    Trajectory::new(times.to_vec(), states)
}

/// Interpolated state at a single time: cubic Hermite when the trajectory
/// stores derivatives, linear otherwise.
pub fn state_at(traj: &Trajectory, t: f64) -> Result<Vec<f64>> {
    let ts = traj.times();
    let end = traj.end_time();
    if !(t >= 0.0 && t <= end) {
        return Err(Error::input(format!("cannot extrapolate: t = {t} outside [0, {end}]")));
    }
    let idx = ts.partition_point(|&s| s < t);
    if idx < ts.len() && ts[idx] == t {
        return Ok(traj.states()[idx].clone());
    }
    let i = idx - 1;
    let (t0, t1) = (ts[i], ts[i + 1]);
    let h = t1 - t0;
    let s = (t - t0) / h;
    let (x0, x1) = (&traj.states()[i], &traj.states()[i + 1]);
    Ok(match traj.derivatives() {
        Some(d) => {
            let (d0, d1) = (&d[i], &d[i + 1]);
            let h10 = s * (1.0 - s) * (1.0 - s);
            let h01 = s * s * (3.0 - 2.0 * s);
            let h11 = s * s * (s - 1.0);
            (0..x0.len())
                .map(|j| x0[j] + h01 * (x1[j] - x0[j]) + h * (h10 * d0[j] + h11 * d1[j]))
                .collect()
        }
        None => x0.iter().zip(x1).map(|(a, b)| a + s * (b - a)).collect(),
    })
}

/// The `i`-th point of a grid with spacing `h`. When `1/h` is an integer
/// `N` this is computed as `i/N`, so `h = 0.01` gives `22.08` rather than
/// `22.080000000000002`.
fn grid_time(i: u64, h: f64) -> f64 {
    let inv = 1.0 / h;
    if (inv - inv.round()).abs() <= 1e-9 * inv {
        i as f64 / inv.round()
    } else {
        i as f64 * h
    }
}

/// Output-time bookkeeping shared by both methods.
struct Stops {
    output_dt: Option<f64>,
    t_end: f64,
    next_index: u64,
}

impl Stops {
    fn next(&self) -> f64 {
        match self.output_dt {
            Some(h) => grid_time(self.next_index, h).min(self.t_end),
            None => self.t_end,
        }
    }

    fn advance(&mut self) {
        self.next_index += 1;
    }
}

fn solve<F>(name: &str, x0: &[f64], cfg: &IntegratorConfig, mut rhs: F) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    cfg.validate()?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::input(format!("initial state of `{name}` is not finite")));
    }
    let n = x0.len();
    let mut f0 = vec![0.0; n];
    rhs(0.0, x0, &mut f0)?;

    let mut times = vec![0.0];
    let mut states = vec![x0.to_vec()];
    let mut derivs = vec![f0.clone()];
    let mut stops = Stops {
        output_dt: cfg.output_dt,
        t_end: cfg.t_end,
        next_index: 1,
    };
    let record_every_step = cfg.output_dt.is_none();

    let mut t = 0.0;
    let mut x = x0.to_vec();
    let mut fx = f0;
    let mut xn = vec![0.0; n];
    let mut fxn = vec![0.0; n];
    let mut steps = 0usize;

    let mut rk = Workspace::new(n);
    let mut h = match cfg.method {
        Method::Rk4 => cfg.dt,
        Method::Rk45 => initial_step(&mut rhs, &x, &fx, cfg, &mut rk)?,
    };

    loop {
        let stop = stops.next();
        let remaining = stop - t;
        let landing = h >= remaining * (1.0 - 1e-9);
        let step = if landing { remaining } else { h };

        steps += 1;
        if steps > cfg.max_steps {
            return Err(Error::Budget {
                system: name.to_string(),
                max_steps: cfg.max_steps,
                t,
            });
        }

        let accepted = match cfg.method {
            Method::Rk4 => {
                rk.rk4(&mut rhs, t, &x, &fx, step, &mut xn)?;
                if xn.iter().all(|v| v.is_finite()) {
                    rhs(t + step, &xn, &mut fxn)?;
                }
                true
            }
            Method::Rk45 => {
                let err = rk.dopri(&mut rhs, t, &x, &fx, step, &mut xn, &mut fxn, cfg)?;
                if !err.is_finite() {
                    h = step * 0.2;
                    false
                } else if err <= 1.0 {
                    let factor = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    // Clipping onto an output time must not shrink the
                    // controller's proposal for the following step.
                    h = if landing { h.max(step * factor) } else { step * factor };
                    true
                } else {
                    h = step * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                    false
                }
            }
        };

        if !accepted {
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Divergence {
                    system: name.to_string(),
                    t,
                });
            }
            continue;
        }
        if xn.iter().any(|v| !v.is_finite()) || fxn.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                system: name.to_string(),
                t,
            });
        }

        t = if landing { stop } else { t + step };
        std::mem::swap(&mut x, &mut xn);
        std::mem::swap(&mut fx, &mut fxn);

        if landing {
            stops.advance();
        }
        if landing || record_every_step {
            times.push(t);
            states.push(x.clone());
            derivs.push(fx.clone());
        }
        if landing && stop >= cfg.t_end {
            break;
        }
    }

    Trajectory::with_derivatives(times, states, derivs)
}

struct Workspace {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b* (fifth minus embedded fourth order weights).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        }
    }

    fn combine(&mut self, x: &[f64], h: f64, terms: &[(usize, f64)]) {
        for j in 0..x.len() {
            let mut acc = 0.0;
            for &(i, a) in terms {
                acc += a * self.k[i][j];
            }
            self.tmp[j] = x[j] + h * acc;
        }
    }

    fn rk4<F>(&mut self, rhs: &mut F, t: f64, x: &[f64], fx: &[f64], h: f64, out: &mut [f64]) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        self.k[0].copy_from_slice(fx);
        self.combine(x, h, &[(0, 0.5)]);
        rhs(t + 0.5 * h, &self.tmp, &mut self.k[1])?;
        self.combine(x, h, &[(1, 0.5)]);
        rhs(t + 0.5 * h, &self.tmp, &mut self.k[2])?;
        self.combine(x, h, &[(2, 1.0)]);
        rhs(t + h, &self.tmp, &mut self.k[3])?;
        for j in 0..x.len() {
            out[j] = x[j] + h / 6.0 * (self.k[0][j] + 2.0 * self.k[1][j] + 2.0 * self.k[2][j] + self.k[3][j]);
        }
        Ok(())
    }

    /// One Dormand–Prince attempt. Returns the scaled RMS error estimate;
    /// `fout` receives the field at the new point (FSAL).
    #[allow(clippy::too_many_arguments)]
    fn dopri<F>(
        &mut self,
        rhs: &mut F,
        t: f64,
        x: &[f64],
        fx: &[f64],
        h: f64,
        out: &mut [f64],
        fout: &mut [f64],
        cfg: &IntegratorConfig,
    ) -> Result<f64>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        self.k[0].copy_from_slice(fx);
        self.combine(x, h, &[(0, A21)]);
        rhs(t + C2 * h, &self.tmp, &mut self.k[1])?;
        self.combine(x, h, &[(0, A31), (1, A32)]);
        rhs(t + C3 * h, &self.tmp, &mut self.k[2])?;
        self.combine(x, h, &[(0, A41), (1, A42), (2, A43)]);
        rhs(t + C4 * h, &self.tmp, &mut self.k[3])?;
        self.combine(x, h, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
        rhs(t + C5 * h, &self.tmp, &mut self.k[4])?;
        self.combine(x, h, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        rhs(t + h, &self.tmp, &mut self.k[5])?;
        self.combine(x, h, &[(0, B1), (2, B3), (3, B4), (4, B5), (5, B6)]);
        out.copy_from_slice(&self.tmp);
        rhs(t + h, out, fout)?;
        self.k[6].copy_from_slice(fout);

        let n = x.len();
        let mut sum = 0.0;
        for j in 0..n {
            let e = h
                * (E1 * self.k[0][j]
                    + E3 * self.k[2][j]
                    + E4 * self.k[3][j]
                    + E5 * self.k[4][j]
                    + E6 * self.k[5][j]
                    + E7 * self.k[6][j]);
            let sc = cfg.atol + cfg.rtol * x[j].abs().max(out[j].abs());
            sum += (e / sc) * (e / sc);
        }
        Ok((sum / n as f64).sqrt())
    }
}

/// Starting step heuristic from Hairer, Nørsett & Wanner.
fn initial_step<F>(rhs: &mut F, x: &[f64], fx: &[f64], cfg: &IntegratorConfig, ws: &mut Workspace) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let sc: Vec<f64> = x.iter().map(|v| cfg.atol + cfg.rtol * v.abs()).collect();
    let rms = |v: &[f64]| (v.iter().zip(&sc).map(|(a, s)| (a / s) * (a / s)).sum::<f64>() / v.len() as f64).sqrt();
    let d0 = rms(x);
    let d1 = rms(fx);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(cfg.t_end);
    for j in 0..x.len() {
        ws.tmp[j] = x[j] + h0 * fx[j];
    }
    let mut f1 = vec![0.0; x.len()];
    rhs(h0, &ws.tmp, &mut f1)?;
    let diff: Vec<f64> = f1.iter().zip(fx).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    let h = (100.0 * h0).min(h1);
    Ok(if h.is_finite() && h > 0.0 { h } else { 1e-6 })
}
