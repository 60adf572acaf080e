//! Dormand–Prince 5(4) with FSAL and mixed absolute/relative error control.

use crate::error::{Error, Result};

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

pub const MAX_STEPS: usize = 2_000_000;

/// Extinction handling: once `is_extinct` holds after an accepted step,
/// `freeze` is applied and the frozen state is reported for every later time.
pub struct Freeze<'a> {
    pub is_extinct: &'a dyn Fn(&[f64]) -> bool,
    pub freeze: &'a dyn Fn(&mut [f64]),
}

/// Integrate `y' = f(t, y)` from `times[0]` and return the state at each entry
/// of `times` (which must be nondecreasing). Steps are clipped to land on the
/// output times exactly.
pub fn integrate<F>(
    f: F,
    y0: &[f64],
    times: &[f64],
    tol: f64,
    freeze: Option<Freeze<'_>>,
) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("output times must be nondecreasing".into()));
    }
    let dim = y0.len();
    let mut out = Vec::with_capacity(times.len());
    let Some(&t0) = times.first() else {
        return Ok(out);
    };

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut k5 = vec![0.0; dim];
    let mut k6 = vec![0.0; dim];
    let mut k7 = vec![0.0; dim];
    let mut stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    f(t, &y, &mut k1);

    let span = times.last().unwrap() - t0;
    let mut h = initial_step(&y, &k1, tol, span);
    let mut steps = 0usize;
    let mut frozen = freeze.as_ref().is_some_and(|fz| (fz.is_extinct)(&y));
    if frozen {
        (freeze.as_ref().unwrap().freeze)(&mut y);
    }

    for &target in times {
        while !frozen && t < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::SolverFailure {
                    t,
                    reason: format!("exceeded {MAX_STEPS} steps (h = {h:e})"),
                });
            }
            let remaining = target - t;
            let clipped = h >= remaining;
            let step = if clipped { remaining } else { h };
            if step <= f64::EPSILON * t.abs().max(1.0) * 4.0 && !clipped {
                return Err(Error::SolverFailure {
                    t,
                    reason: format!("step size underflow (h = {step:e})"),
                });
            }

            for i in 0..dim {
                stage[i] = y[i] + step * A21 * k1[i];
            }
            f(t + C2 * step, &stage, &mut k2);
            for i in 0..dim {
                stage[i] = y[i] + step * (A31 * k1[i] + A32 * k2[i]);
            }
            f(t + C3 * step, &stage, &mut k3);
            for i in 0..dim {
                stage[i] = y[i] + step * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            f(t + C4 * step, &stage, &mut k4);
            for i in 0..dim {
                stage[i] =
                    y[i] + step * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            f(t + C5 * step, &stage, &mut k5);
            for i in 0..dim {
                stage[i] = y[i]
                    + step
                        * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            f(t + step, &stage, &mut k6);
            for i in 0..dim {
                y_new[i] = y[i]
                    + step
                        * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            f(t + step, &y_new, &mut k7);

            let mut err_sq = 0.0;
            for i in 0..dim {
                let e = step
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let scale = tol + tol * y[i].abs().max(y_new[i].abs());
                err_sq += (e / scale).powi(2);
            }
            let err = (err_sq / dim.max(1) as f64).sqrt();

            if !err.is_finite() {
                h = step * MIN_FACTOR;
                continue;
            }
            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if err <= 1.0 {
                t = if clipped { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                // A clipped step says nothing about the natural step size.
                if !clipped || step * factor > h {
                    h = step * factor;
                }
                if let Some(fz) = &freeze {
                    if (fz.is_extinct)(&y) {
                        (fz.freeze)(&mut y);
                        frozen = true;
                    }
                }
            } else {
                h = step * factor.min(1.0);
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn initial_step(y: &[f64], dy: &[f64], tol: f64, span: f64) -> f64 {
    let norm = |v: &[f64], w: &[f64]| {
        let s: f64 = v
            .iter()
            .zip(w)
            .map(|(a, b)| (a / (tol + tol * b.abs())).powi(2))
            .sum();
        (s / v.len().max(1) as f64).sqrt()
    };
    let d0 = norm(y, y);
    let d1 = norm(dy, y);
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let cap = if span > 0.0 { span } else { 1.0 };
    h.min(cap).max(1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let ys = integrate(|_, y, dy| dy[0] = -y[0], &[1.0], &times, 1e-10, None).unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y[0] - (-t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn harmonic_oscillator_phase() {
        let times = [0.0, 1.0, 2.0 * std::f64::consts::PI];
        let ys = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            &[1.0, 0.0],
            &times,
            1e-11,
            None,
        )
        .unwrap();
        assert!((ys[1][0] - 1f64.cos()).abs() < 1e-9);
        assert!((ys[2][0] - 1.0).abs() < 1e-9 && ys[2][1].abs() < 1e-9);
    }

    #[test]
    fn freeze_holds_state() {
        let fz = Freeze {
            is_extinct: &|y: &[f64]| y[0] < 1e-3,
            freeze: &|y: &mut [f64]| y[0] = 0.0,
        };
        let times = [0.0, 5.0, 20.0];
        let ys = integrate(|_, y, dy| dy[0] = -y[0], &[1.0], &times, 1e-8, Some(fz)).unwrap();
        assert_eq!(ys[2][0], 0.0);
        assert!(ys[1][0] > 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(integrate(|_, _, _| {}, &[1.0], &[0.0, 1.0], 0.0, None).is_err());
        assert!(integrate(|_, _, _| {}, &[1.0], &[1.0, 0.0], 1e-6, None).is_err());
    }
}
