//! Adaptive Gauss–Kronrod (7, 15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_DEPTH: u32 = 60;
const MAX_SUBINTERVALS: usize = 1 << 20;

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// `int_a^b f` with absolute error target `abs_tol` (split evenly by width
/// across subintervals) or relative target `rel_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let width = (b - a).abs();
    let mut total = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    let mut visited = 0usize;
    while let Some((lo, hi, depth)) = stack.pop() {
        visited += 1;
        if visited > MAX_SUBINTERVALS {
            return Err(Error::SolverFailure {
                t: lo,
                reason: format!("quadrature exceeded {MAX_SUBINTERVALS} subintervals"),
            });
        }
        let (value, err) = kronrod(f, lo, hi);
        if !value.is_finite() {
            return Err(Error::SolverFailure {
                t: lo,
                reason: "non-finite integrand".into(),
            });
        }
        let share = abs_tol * (hi - lo).abs() / width;
        if err <= share.max(rel_tol * value.abs()) || depth >= MAX_DEPTH {
            if depth >= MAX_DEPTH && err > share.max(rel_tol * value.abs()) {
                return Err(Error::SolverFailure {
                    t: lo,
                    reason: format!("quadrature did not converge on [{lo}, {hi}]"),
                });
            }
            total += value;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_transcendental() {
        let v = integrate(&|x: f64| x.powi(5), 0.0, 2.0, 1e-13, 0.0).unwrap();
        assert!((v - 64.0 / 6.0).abs() < 1e-12);
        let v = integrate(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13, 0.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate(&|x: f64| 1.0 / x, 1e-6, 1.0, 1e-12, 0.0).unwrap();
        assert!((v - 1e6f64.ln()).abs() < 1e-10);
        assert_eq!(integrate(&|x: f64| x, 3.0, 3.0, 1e-9, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn reversed_interval() {
        let v = integrate(&|x: f64| x * x, 1.0, 0.0, 1e-13, 0.0).unwrap();
        assert!((v + 1.0 / 3.0).abs() < 1e-13);
    }
}
