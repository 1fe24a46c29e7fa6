//! Benchmark dynamical systems and a classical fourth-order Runge–Kutta
//! integrator.
//!
//! Flows are integrated with a fixed step; maps are iterated directly. The
//! generation protocol runs a system for `total_steps`, drops the first
//! `discard` states as transient and keeps one state component.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Source, TimeSeries};

/// Right-hand side of an autonomous ODE `x' = f(x)`.
pub trait VectorField: Sync {
    fn dimension(&self) -> usize;

    /// Writes `f(state)` into `out`; both have length `dimension()`.
    fn eval(&self, state: &[f64], out: &mut [f64]);
}

/// Wraps a closure as a vector field.
pub struct FnField<F> {
    dimension: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64]) + Sync> FnField<F> {
    pub fn new(dimension: usize, f: F) -> Self {
        Self { dimension, f }
    }
}

impl<F: Fn(&[f64], &mut [f64]) + Sync> VectorField for FnField<F> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn eval(&self, state: &[f64], out: &mut [f64]) {
        (self.f)(state, out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorenz63 {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

pub fn lorenz63_field(sigma: f64, rho: f64, beta: f64) -> Lorenz63 {
    Lorenz63 { sigma, rho, beta }
}

impl VectorField for Lorenz63 {
    fn dimension(&self) -> usize {
        3
    }

    fn eval(&self, s: &[f64], out: &mut [f64]) {
        let (x, y, z) = (s[0], s[1], s[2]);
        out[0] = self.sigma * (y - x);
        out[1] = x * (self.rho - z) - y;
        out[2] = x * y - self.beta * z;
    }
}

/// The Lorenz 96 ring: `x_k' = (x_{k+1} - x_{k-2}) x_{k-1} - x_k + F`,
/// indices taken modulo `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorenz96 {
    k: usize,
    forcing: f64,
}

pub fn lorenz96_field(k: usize, forcing: f64) -> Result<Lorenz96> {
    if k < 4 {
        return Err(Error::InvalidParameter(format!("Lorenz 96 needs K >= 4, got {k}")));
    }
    Ok(Lorenz96 { k, forcing })
}

impl VectorField for Lorenz96 {
    fn dimension(&self) -> usize {
        self.k
    }

    fn eval(&self, s: &[f64], out: &mut [f64]) {
        let k = self.k;
        for i in 0..k {
            let next = s[(i + 1) % k];
            let prev = s[(i + k - 1) % k];
            let prev2 = s[(i + k - 2) % k];
            out[i] = (next - prev2) * prev - s[i] + self.forcing;
        }
    }
}

/// Scratch space for repeated RK4 steps.
struct Rk4<'a, F: VectorField + ?Sized> {
    field: &'a F,
    dt: f64,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl<'a, F: VectorField + ?Sized> Rk4<'a, F> {
    fn new(field: &'a F, dt: f64) -> Self {
        let d = field.dimension();
        Self {
            field,
            dt,
            k1: vec![0.0; d],
            k2: vec![0.0; d],
            k3: vec![0.0; d],
            k4: vec![0.0; d],
            tmp: vec![0.0; d],
        }
    }

    fn step(&mut self, x: &mut [f64]) {
        let h = self.dt;
        self.field.eval(x, &mut self.k1);
        for ((t, xi), k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k1) {
            *t = xi + 0.5 * h * k;
        }
        self.field.eval(&self.tmp, &mut self.k2);
        for ((t, xi), k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k2) {
            *t = xi + 0.5 * h * k;
        }
        self.field.eval(&self.tmp, &mut self.k3);
        for ((t, xi), k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k3) {
            *t = xi + h * k;
        }
        self.field.eval(&self.tmp, &mut self.k4);
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")))
    }
}

/// Integrates `steps` fixed RK4 steps; row 0 of the result is `x0`.
pub fn rk4_integrate<F: VectorField + ?Sized>(field: &F, x0: &[f64], dt: f64, steps: usize) -> Result<Array2<f64>> {
    let d = field.dimension();
    if x0.len() != d {
        return Err(Error::InvalidParameter(format!(
            "initial state has length {}, field dimension is {d}",
            x0.len()
        )));
    }
    check_dt(dt)?;
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be >= 1".into()));
    }
    let mut out = Array2::zeros((steps + 1, d));
    let mut x = x0.to_vec();
    out.row_mut(0).assign(&ndarray::ArrayView1::from(&x[..]));
    let mut rk = Rk4::new(field, dt);
    for i in 1..=steps {
        rk.step(&mut x);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { step: i });
        }
        out.row_mut(i).assign(&ndarray::ArrayView1::from(&x[..]));
    }
    Ok(out)
}

fn henon_step(a: f64, b: f64, (x, y): (f64, f64)) -> (f64, f64) {
    (1.0 - a * x * x + y, b * x)
}

fn logistic_step(r: f64, x: f64) -> f64 {
    r * x * (1.0 - x)
}

/// Iterates the Hénon map `n` times; row 0 is the initial point.
pub fn henon_iterate(a: f64, b: f64, x0: (f64, f64), n: usize) -> Result<Array2<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let mut out = Array2::zeros((n + 1, 2));
    let mut s = x0;
    out[[0, 0]] = s.0;
    out[[0, 1]] = s.1;
    for i in 1..=n {
        s = henon_step(a, b, s);
        if !(s.0.is_finite() && s.1.is_finite()) {
            return Err(Error::NonFiniteState { step: i });
        }
        out[[i, 0]] = s.0;
        out[[i, 1]] = s.1;
    }
    Ok(out)
}

fn check_logistic(r: f64, x0: f64) -> Result<()> {
    if !(r > 0.0 && r <= 4.0) {
        return Err(Error::InvalidParameter(format!(
            "logistic r must lie in (0, 4], got {r}"
        )));
    }
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "logistic x0 must lie in (0, 1), got {x0}"
        )));
    }
    Ok(())
}

/// Iterates the logistic map `n` times, returning `n + 1` values.
pub fn logistic_iterate(r: f64, x0: f64, n: usize) -> Result<Vec<f64>> {
    check_logistic(r, x0)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(n + 1);
    let mut x = x0;
    out.push(x);
    for _ in 0..n {
        x = logistic_step(r, x);
        out.push(x);
    }
    Ok(out)
}

/// A benchmark system together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "lowercase")]
pub enum System {
    Lorenz63 { sigma: f64, rho: f64, beta: f64 },
    Lorenz96 { k: usize, forcing: f64 },
    Henon { a: f64, b: f64 },
    Logistic { r: f64 },
}

impl System {
    pub const LORENZ63: System = System::Lorenz63 {
        sigma: 10.0,
        rho: 28.0,
        beta: 8.0 / 3.0,
    };
    pub const LORENZ96_K22: System = System::Lorenz96 { k: 22, forcing: 5.0 };
    pub const LORENZ96_K47: System = System::Lorenz96 { k: 47, forcing: 5.0 };
    pub const HENON: System = System::Henon { a: 1.4, b: 0.3 };
    pub const LOGISTIC: System = System::Logistic { r: 3.65 };

    pub fn dimension(&self) -> usize {
        match *self {
            System::Lorenz63 { .. } => 3,
            System::Lorenz96 { k, .. } => k,
            System::Henon { .. } => 2,
            System::Logistic { .. } => 1,
        }
    }

    pub fn is_flow(&self) -> bool {
        matches!(self, System::Lorenz63 { .. } | System::Lorenz96 { .. })
    }

    /// Lorenz 63 starts at (1, 1, 1); Lorenz 96 at the all-F equilibrium
    /// with component 0 nudged by +0.01; the maps at 0.1 (Hénon y0 = 0.1).
    pub fn default_initial_state(&self) -> Vec<f64> {
        match *self {
            System::Lorenz63 { .. } => vec![1.0, 1.0, 1.0],
            System::Lorenz96 { k, forcing } => {
                let mut s = vec![forcing; k];
                if let Some(first) = s.first_mut() {
                    *first += 0.01;
                }
                s
            }
            System::Henon { .. } => vec![0.1, 0.1],
            System::Logistic { .. } => vec![0.1],
        }
    }

    pub fn label(&self) -> String {
        match *self {
            System::Lorenz63 { .. } => "lorenz63".into(),
            System::Lorenz96 { k, forcing } => format!("lorenz96-K{k}-F{forcing}"),
            System::Henon { .. } => "henon".into(),
            System::Logistic { .. } => "logistic".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationProtocol {
    pub total_steps: usize,
    pub discard: usize,
    pub dt: f64,
    pub observable_index: usize,
    /// `None` selects [`System::default_initial_state`].
    pub initial_state: Option<Vec<f64>>,
}

impl GenerationProtocol {
    pub const DEFAULT_STEPS: usize = 60_000;
    pub const DEFAULT_DISCARD: usize = 10_000;
    pub const FLOW_DT: f64 = 1.0 / 64.0;

    /// 60000 RK4 steps of 1/64, first 10000 dropped, component 0 observed.
    pub fn flow() -> Self {
        Self {
            total_steps: Self::DEFAULT_STEPS,
            discard: Self::DEFAULT_DISCARD,
            dt: Self::FLOW_DT,
            observable_index: 0,
            initial_state: None,
        }
    }

    /// 60000 iterates, first 10000 dropped, component 0 observed.
    pub fn map() -> Self {
        Self {
            dt: 1.0,
            ..Self::flow()
        }
    }

    /// The standard protocol for `system`.
    pub fn standard(system: &System) -> Self {
        if system.is_flow() {
            Self::flow()
        } else {
            Self::map()
        }
    }

    /// Same protocol, keeping `len` samples after the transient.
    pub fn with_length(mut self, len: usize) -> Self {
        self.total_steps = self.discard + len;
        self
    }

    fn validate(&self, system: &System) -> Result<Vec<f64>> {
        if self.discard >= self.total_steps {
            return Err(Error::InvalidParameter(format!(
                "discard ({}) must be smaller than total_steps ({})",
                self.discard, self.total_steps
            )));
        }
        if self.total_steps - self.discard < 2 {
            return Err(Error::InvalidParameter("protocol keeps fewer than 2 samples".into()));
        }
        if self.observable_index >= system.dimension() {
            return Err(Error::InvalidParameter(format!(
                "observable index {} out of range for a {}-dimensional system",
                self.observable_index,
                system.dimension()
            )));
        }
        check_dt(self.dt)?;
        let x0 = self
            .initial_state
            .clone()
            .unwrap_or_else(|| system.default_initial_state());
        if x0.len() != system.dimension() {
            return Err(Error::InvalidParameter(format!(
                "initial state has length {}, system dimension is {}",
                x0.len(),
                system.dimension()
            )));
        }
        Ok(x0)
    }
}

/// Runs `system` under `protocol` and returns the observed component with
/// the transient removed. Length is `total_steps - discard`.
pub fn generate_benchmark_trace(system: &System, protocol: &GenerationProtocol) -> Result<TimeSeries> {
    let x0 = protocol.validate(system)?;
    let obs = protocol.observable_index;
    let keep = protocol.total_steps - protocol.discard;
    let mut values = Vec::with_capacity(keep);
    let mut state = x0;

    // State i is recorded for i in discard..total_steps; state 0 is x0.
    let record = |i: usize, s: &[f64], values: &mut Vec<f64>| {
        if i >= protocol.discard {
            values.push(s[obs]);
        }
    };

    match *system {
        System::Lorenz63 { sigma, rho, beta } => {
            let f = lorenz63_field(sigma, rho, beta);
            run_flow(&f, &mut state, protocol, &mut values, record)?;
        }
        System::Lorenz96 { k, forcing } => {
            let f = lorenz96_field(k, forcing)?;
            run_flow(&f, &mut state, protocol, &mut values, record)?;
        }
        System::Henon { a, b } => {
            let mut s = (state[0], state[1]);
            for i in 0..protocol.total_steps {
                if i > 0 {
                    s = henon_step(a, b, s);
                    if !(s.0.is_finite() && s.1.is_finite()) {
                        return Err(Error::NonFiniteState { step: i });
                    }
                }
                record(i, &[s.0, s.1], &mut values);
            }
        }
        System::Logistic { r } => {
            check_logistic(r, state[0])?;
            let mut x = state[0];
            for i in 0..protocol.total_steps {
                if i > 0 {
                    x = logistic_step(r, x);
                }
                record(i, &[x], &mut values);
            }
        }
    }
    TimeSeries::new(values, protocol.dt, system.label(), Source::Synthetic)
}

fn run_flow<F: VectorField>(
    field: &F,
    state: &mut [f64],
    protocol: &GenerationProtocol,
    values: &mut Vec<f64>,
    record: impl Fn(usize, &[f64], &mut Vec<f64>),
) -> Result<()> {
    let mut rk = Rk4::new(field, protocol.dt);
    for i in 0..protocol.total_steps {
        if i > 0 {
            rk.step(state);
            if state.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState { step: i });
            }
        }
        record(i, state, values);
    }
    Ok(())
}
