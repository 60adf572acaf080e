//! Explicit solution of the per-class system through a random-time-change.
//!
//! Running the per-class system on the clock `A_u` with `dA/du = 1 / v(A_u)`
//! makes it linear: `s(A_u, i) = (1 - theta) mu_i e^{-p lambda q_i u}` and
//! `v(A_u) = E[rho] - u - (1 - theta) sum_i mu_i q_i e^{-p lambda q_i u}
//! = H_V(e^{-p lambda u})`. Original time is recovered by inverting
//! `A_u = int_0^u dr / H_V(e^{-p lambda r})`, which diverges as `u` approaches
//! the exposure `u*` at which `H_V` vanishes.

use super::quadrature;
use super::{check_grid, LimitMethod, LimitParams, LimitSolution, EXTINCTION_LEVEL};
use crate::error::{Error, Result};

const MAX_INVERSION_ITERS: usize = 200;

/// `H_V(e^{-p lambda u})` written directly in `u`.
fn infective_density(lp: &LimitParams, u: f64) -> f64 {
    let rate = lp.rate();
    let tail: f64 = lp
        .dist
        .atoms()
        .iter()
        .map(|a| a.mu * a.q * (-rate * a.q * u).exp())
        .sum();
    lp.dist.mean() - u - (1.0 - lp.theta) * tail
}

/// The exposure `u* > 0` where `H_V(e^{-p lambda u*}) = 0`. The map
/// `u -> H_V(e^{-p lambda u})` is concave, positive at 0 and negative at
/// `u = E[rho]`, so the root is unique.
pub fn extinction_exposure(lp: &LimitParams) -> Result<f64> {
    let (mut lo, mut hi) = (0.0f64, lp.dist.mean());
    if infective_density(lp, hi) >= 0.0 {
        return Err(Error::DegenerateDistribution(
            "infective density does not change sign".into(),
        ));
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if infective_density(lp, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// The exposure below `u*` at which the density has fallen to `level`.
fn exposure_at_level(lp: &LimitParams, level: f64, u_star: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, u_star);
    if infective_density(lp, lo) <= level {
        return 0.0;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return lo;
        }
        if infective_density(lp, mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// The density written as a function of the distance `d = u* - u` to the
/// root. Close to `u*` the direct form loses every digit to cancellation;
/// this one stays smooth, which the clock quadrature needs.
struct Clock {
    u_star: f64,
    /// `(q_i, (1 - theta) mu_i q_i e^{-p lambda q_i u*})`
    terms: Vec<(f64, f64)>,
    rate: f64,
    quad_tol: f64,
}

impl Clock {
    fn new(lp: &LimitParams, u_star: f64, quad_tol: f64) -> Self {
        let rate = lp.rate();
        let terms = lp
            .dist
            .atoms()
            .iter()
            .map(|a| (a.q, (1.0 - lp.theta) * a.mu * a.q * (-rate * a.q * u_star).exp()))
            .collect();
        Self {
            u_star,
            terms,
            rate,
            quad_tol,
        }
    }

    fn density_at_distance(&self, d: f64) -> f64 {
        d - self
            .terms
            .iter()
            .map(|&(q, c)| c * (self.rate * q * d).exp_m1())
            .sum::<f64>()
    }

    #[cfg(test)]
    fn density(&self, u: f64) -> f64 {
        self.density_at_distance(self.u_star - u)
    }

    /// `A_to - A_from`, integrated in `ln(u* - u)` where the integrand
    /// `d / v(d)` is bounded and smooth all the way to the root.
    fn elapsed(&self, from: f64, to: f64) -> Result<f64> {
        let (a, b) = ((self.u_star - to).ln(), (self.u_star - from).ln());
        let integrand = |s: f64| {
            let d = s.exp();
            d / self.density_at_distance(d)
        };
        quadrature::integrate(&integrand, a, b, self.quad_tol, 1e-13)
    }
}

/// Limit curves from the time-changed closed form, inverted at each grid time
/// by safeguarded Newton iteration on the adaptive quadrature of `A_u`.
///
/// The clock is only run up to the exposure where the density reaches
/// `EXTINCTION_LEVEL`; later times report the frozen state, as the
/// integrating routes do.
pub fn solve_time_change(lp: &LimitParams, times: &[f64], tol: f64) -> Result<LimitSolution> {
    check_grid(times)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let u_star = extinction_exposure(lp)?;
    let u_ext = exposure_at_level(lp, EXTINCTION_LEVEL, u_star);
    let clock = Clock::new(lp, u_star, (tol * 1e-3).max(1e-15));
    let t_ext = clock.elapsed(0.0, u_ext).map_err(|_| Error::HorizonExceeded {
        requested: *times.last().unwrap(),
        t_max: 0.0,
    })?;
    let rate = lp.rate();
    let s0 = lp.initial_susceptible();

    let mut exposures = Vec::with_capacity(times.len());
    let (mut u, mut clock_time) = (0.0f64, 0.0f64);
    for &t in times {
        if t >= t_ext {
            exposures.push((u_ext, true));
            continue;
        }
        if t <= clock_time {
            exposures.push((u, false));
            continue;
        }
        let inversion_tol = (tol * 1e-3).max(64.0 * f64::EPSILON * t);
        let (mut lo, mut hi) = (u, u_ext);
        let mut guess = u + (t - clock_time) * infective_density(lp, u);
        let mut gap = f64::NEG_INFINITY;
        for _ in 0..MAX_INVERSION_ITERS {
            if !(guess > lo && guess < hi) {
                guess = 0.5 * (lo + hi);
            }
            let elapsed = clock_time
                + clock.elapsed(u, guess).map_err(|_| Error::HorizonExceeded {
                    requested: t,
                    t_max: clock_time,
                })?;
            gap = elapsed - t;
            if gap < 0.0 {
                lo = guess;
            } else {
                hi = guess;
            }
            if gap.abs() <= inversion_tol || hi - lo <= 4.0 * f64::EPSILON * u_ext {
                break;
            }
            guess -= gap * infective_density(lp, guess);
        }
        if !gap.is_finite() {
            return Err(Error::HorizonExceeded {
                requested: t,
                t_max: clock_time,
            });
        }
        u = guess;
        clock_time = t + gap;
        exposures.push((u, false));
    }

    let mut sol = LimitSolution {
        method: LimitMethod::TimeChange,
        times: times.to_vec(),
        psi: Vec::with_capacity(times.len()),
        hs: Vec::with_capacity(times.len()),
        hv: Vec::with_capacity(times.len()),
        s_by_class: Vec::with_capacity(times.len()),
        v: Vec::with_capacity(times.len()),
    };
    for (u, extinct) in exposures {
        let psi = (-rate * u).exp();
        let row: Vec<f64> = s0
            .iter()
            .zip(lp.dist.atoms())
            .map(|(s, a)| s * (-rate * a.q * u).exp())
            .collect();
        let v = if extinct { 0.0 } else { infective_density(lp, u) };
        sol.psi.push(psi);
        sol.hs.push(lp.h_s_unchecked(psi));
        sol.hv.push(v);
        sol.v.push(v);
        sol.s_by_class.push(row);
    }
    Ok(sol)
}
