//! Deterministic large-`n` limit of the weighted SIR chain.
//!
//! With `H_S(x) = (1 - theta) E[x^rho]` and
//! `H_V(x) = E[rho] - (1 - theta) E[rho x^rho] + ln(x) / (p lambda)`, the
//! susceptible fraction and the infective weight density converge to
//! `H_S(psi_t)` and `H_V(psi_t)`, where `psi' = -p lambda psi H_V(psi)`,
//! `psi_0 = 1`. The same curves come out of the per-class system
//! ([`solve_component_ode`]) and of its explicit time-changed solution
//! ([`solve_time_change`]); the three routes are independent numerically.

mod ode;
mod quadrature;
mod time_change;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use ode::{integrate as integrate_ode, Freeze};
pub use quadrature::integrate as integrate_quadrature;
pub use time_change::{extinction_exposure, solve_time_change};

use crate::error::{Error, Result};
use crate::weights::WeightDistribution;

pub const DEFAULT_TOL: f64 = 1e-9;

/// Below this infective density the epidemic is treated as extinct and the
/// state is frozen.
pub const EXTINCTION_LEVEL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitParams {
    pub dist: WeightDistribution,
    pub theta: f64,
    pub p: f64,
    pub lambda: f64,
}

impl LimitParams {
    pub fn new(dist: WeightDistribution, theta: f64, p: f64, lambda: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Domain("theta must lie strictly in (0,1)".into()));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Domain(format!("p = {p} must lie in (0,1]")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda = {lambda} must be positive")));
        }
        Ok(Self {
            dist,
            theta,
            p,
            lambda,
        })
    }

    /// `p * lambda`, the rate constant shared by every limit equation.
    pub fn rate(&self) -> f64 {
        self.p * self.lambda
    }

    fn h_s_unchecked(&self, x: f64) -> f64 {
        (1.0 - self.theta) * self.dist.generalized_moment_unchecked(x, false)
    }

    fn h_v_unchecked(&self, x: f64) -> f64 {
        self.dist.mean() - (1.0 - self.theta) * self.dist.generalized_moment_unchecked(x, true)
            + x.ln() / self.rate()
    }

    /// Initial per-class susceptible densities `(1 - theta) mu_i`.
    pub fn initial_susceptible(&self) -> Vec<f64> {
        self.dist
            .atoms()
            .iter()
            .map(|a| (1.0 - self.theta) * a.mu)
            .collect()
    }

    /// Initial infective weight density `theta E[rho]`.
    pub fn initial_infective_weight(&self) -> f64 {
        self.theta * self.dist.mean()
    }
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("x = {x} must be positive")))
    }
}

pub fn h_s(lp: &LimitParams, x: f64) -> Result<f64> {
    check_positive(x)?;
    Ok(lp.h_s_unchecked(x))
}

/// Defined for every `x > 0`; negative below the extinction root.
pub fn h_v(lp: &LimitParams, x: f64) -> Result<f64> {
    check_positive(x)?;
    Ok(lp.h_v_unchecked(x))
}

/// `1 / (p E[rho^2])`.
pub fn lambda_critical(dist: &WeightDistribution, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!("p = {p} must lie in (0,1]")));
    }
    let m2 = dist.moment(2);
    if m2 <= 0.0 {
        return Err(Error::DegenerateDistribution("E[rho^2] = 0".into()));
    }
    Ok(1.0 / (p * m2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitMethod {
    ScalarPsi,
    ComponentOde,
    TimeChange,
}

/// Limit curves on a time grid. `s_by_class` is indexed `[time][class]`.
///
/// Which fields are primary depends on `method`: the scalar route integrates
/// `psi` and derives the rest through `H_S`, `H_V` and `(1 - theta) mu_i psi^{q_i}`;
/// the component route integrates `s(i)`, `v` and the cumulative exposure
/// `-ln psi`; the time-change route evaluates closed forms at the inverted
/// clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSolution {
    pub method: LimitMethod,
    pub times: Vec<f64>,
    pub psi: Vec<f64>,
    pub hs: Vec<f64>,
    pub hv: Vec<f64>,
    pub s_by_class: Vec<Vec<f64>>,
    pub v: Vec<f64>,
}

impl LimitSolution {
    /// `sum_i s(i)` at each time.
    pub fn susceptible_total(&self) -> Vec<f64> {
        self.s_by_class.iter().map(|row| row.iter().sum()).collect()
    }

    /// CSV with columns `t,psi,hs,hv,s_1..s_K,v`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let k = self.s_by_class.first().map(Vec::len).unwrap_or(0);
        let mut header = vec!["t", "psi", "hs", "hv"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        header.extend((1..=k).map(|i| format!("s_{i}")));
        header.push("v".into());
        writeln!(out, "{}", header.join(","))?;
        for idx in 0..self.times.len() {
            let mut row = vec![
                self.times[idx].to_string(),
                self.psi[idx].to_string(),
                self.hs[idx].to_string(),
                self.hv[idx].to_string(),
            ];
            row.extend(self.s_by_class[idx].iter().map(f64::to_string));
            row.push(self.v[idx].to_string());
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub(crate) fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Precondition("time grid must be nonempty".into()));
    }
    if !(times[0] >= 0.0) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Precondition("time grid must be finite and start at t >= 0".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("time grid must be nondecreasing".into()));
    }
    Ok(())
}

/// Integration always starts from the initial condition at `t = 0`.
fn with_origin(times: &[f64]) -> (Vec<f64>, usize) {
    if times[0] == 0.0 {
        (times.to_vec(), 0)
    } else {
        let mut grid = Vec::with_capacity(times.len() + 1);
        grid.push(0.0);
        grid.extend_from_slice(times);
        (grid, 1)
    }
}

/// `[0, t_end]` in steps of `step`, with `t_end` always the last point.
pub fn uniform_grid(t_end: f64, step: f64) -> Vec<f64> {
    let count = (t_end / step).round().max(1.0) as usize;
    (0..=count).map(|i| t_end * i as f64 / count as f64).collect()
}

/// Integrate the scalar equation `psi' = -p lambda psi H_V(psi)`, `psi_0 = 1`.
pub fn solve_psi(lp: &LimitParams, times: &[f64], tol: f64) -> Result<LimitSolution> {
    check_grid(times)?;
    let (grid, skip) = with_origin(times);
    let rate = lp.rate();
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = -rate * y[0] * lp.h_v_unchecked(y[0]);
    };
    let is_extinct = |y: &[f64]| lp.h_v_unchecked(y[0]) < EXTINCTION_LEVEL;
    let freeze = |_: &mut [f64]| {};
    let states = ode::integrate(
        rhs,
        &[1.0],
        &grid,
        tol,
        Some(Freeze {
            is_extinct: &is_extinct,
            freeze: &freeze,
        }),
    )?;

    let psi: Vec<f64> = states[skip..].iter().map(|y| y[0]).collect();
    let extinct_from = psi.iter().position(|&x| lp.h_v_unchecked(x) < EXTINCTION_LEVEL);
    let hs: Vec<f64> = psi.iter().map(|&x| lp.h_s_unchecked(x)).collect();
    let hv: Vec<f64> = psi
        .iter()
        .enumerate()
        .map(|(i, &x)| match extinct_from {
            Some(k) if i >= k => 0.0,
            _ => lp.h_v_unchecked(x),
        })
        .collect();
    let s0 = lp.initial_susceptible();
    let s_by_class = psi
        .iter()
        .map(|&x| {
            s0.iter()
                .zip(lp.dist.atoms())
                .map(|(s, a)| s * x.powf(a.q))
                .collect()
        })
        .collect();
    Ok(LimitSolution {
        method: LimitMethod::ScalarPsi,
        times: times.to_vec(),
        psi,
        hs,
        v: hv.clone(),
        hv,
        s_by_class,
    })
}

/// Integrate the per-class system
/// `s(i)' = -p lambda v q_i s(i)`, `v' = -v + p lambda v sum_i q_i^2 s(i)`,
/// with the cumulative exposure `z' = p lambda v` carried along (`psi = e^{-z}`).
pub fn solve_component_ode(lp: &LimitParams, times: &[f64], tol: f64) -> Result<LimitSolution> {
    check_grid(times)?;
    let (grid, skip) = with_origin(times);
    let rate = lp.rate();
    let q: Vec<f64> = lp.dist.atoms().iter().map(|a| a.q).collect();
    let k = q.len();
    let mut y0 = lp.initial_susceptible();
    y0.push(lp.initial_infective_weight());
    y0.push(0.0);

    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let v = y[k];
        let mut second = 0.0;
        for i in 0..k {
            dy[i] = -rate * v * q[i] * y[i];
            second += q[i] * q[i] * y[i];
        }
        dy[k] = -v + rate * v * second;
        dy[k + 1] = rate * v;
    };
    let is_extinct = |y: &[f64]| y[k] < EXTINCTION_LEVEL;
    let freeze = |y: &mut [f64]| y[k] = 0.0;
    let states = ode::integrate(
        rhs,
        &y0,
        &grid,
        tol,
        Some(Freeze {
            is_extinct: &is_extinct,
            freeze: &freeze,
        }),
    )?;

    let states = &states[skip..];
    let s_by_class: Vec<Vec<f64>> = states.iter().map(|y| y[..k].to_vec()).collect();
    let v: Vec<f64> = states.iter().map(|y| y[k]).collect();
    let psi: Vec<f64> = states.iter().map(|y| (-y[k + 1]).exp()).collect();
    Ok(LimitSolution {
        method: LimitMethod::ComponentOde,
        times: times.to_vec(),
        psi,
        hs: s_by_class.iter().map(|row| row.iter().sum()).collect(),
        hv: v.clone(),
        v,
        s_by_class,
    })
}

/// Homogeneous complete-graph limit: `s' = -lambda s v`, `v' = lambda s v - v`,
/// `r' = v`, from `(1 - theta, theta, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSolution {
    pub times: Vec<f64>,
    pub s: Vec<f64>,
    pub v: Vec<f64>,
    pub r: Vec<f64>,
}

pub fn classical_limit(theta: f64, lambda: f64, times: &[f64], tol: f64) -> Result<ClassicalSolution> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain("theta must lie strictly in (0,1)".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda = {lambda} must be positive")));
    }
    check_grid(times)?;
    let (grid, skip) = with_origin(times);
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let flow = lambda * y[0] * y[1];
        dy[0] = -flow;
        dy[1] = flow - y[1];
        dy[2] = y[1];
    };
    let is_extinct = |y: &[f64]| y[1] < EXTINCTION_LEVEL;
    let freeze = |y: &mut [f64]| y[1] = 0.0;
    let states = ode::integrate(
        rhs,
        &[1.0 - theta, theta, 0.0],
        &grid,
        tol,
        Some(Freeze {
            is_extinct: &is_extinct,
            freeze: &freeze,
        }),
    )?;
    let states = &states[skip..];
    Ok(ClassicalSolution {
        times: times.to_vec(),
        s: states.iter().map(|y| y[0]).collect(),
        v: states.iter().map(|y| y[1]).collect(),
        r: states.iter().map(|y| y[2]).collect(),
    })
}
