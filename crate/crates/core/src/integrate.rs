//! Adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

use crate::scalar::Scalar;

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

/// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    /// Sum of the local Kronrod-Gauss differences of the accepted panels.
    pub error_estimate: T,
    pub evaluations: usize,
}

fn panel<T: Scalar>(f: &mut impl FnMut(T) -> T, a: T, b: T) -> (T, T) {
    let center = (a + b) * T::lit(0.5);
    let half = (b - a) * T::lit(0.5);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss += pair * T::lit(WG[j / 2]);
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]` by recursive bisection until each panel's
/// error estimate falls below its share of `tol` or `max_depth` is reached.
pub fn adaptive<T: Scalar>(mut f: impl FnMut(T) -> T, a: T, b: T, tol: T, max_depth: u32) -> Quadrature<T> {
    let mut evaluations = 0usize;
    let mut counted = |t: T| {
        evaluations += 1;
        f(t)
    };
    let (value, error_estimate) = recurse(&mut counted, a, b, tol, max_depth);
    Quadrature {
        value,
        error_estimate,
        evaluations,
    }
}

fn recurse<T: Scalar>(f: &mut impl FnMut(T) -> T, a: T, b: T, tol: T, depth: u32) -> (T, T) {
    let (value, err) = panel(f, a, b);
    if err <= tol || depth == 0 || !err.is_finite() {
        return (value, err);
    }
    let mid = (a + b) * T::lit(0.5);
    let half_tol = tol * T::lit(0.5);
    let (v1, e1) = recurse(f, a, mid, half_tol, depth - 1);
    let (v2, e2) = recurse(f, mid, b, half_tol, depth - 1);
    (v1 + v2, e1 + e2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let q = adaptive(|x: f64| 3.0 * x.powi(5) - x * x + 2.0, -1.0, 2.0, 1e-14, 0);
        let exact = 3.0 * (64.0 - 1.0) / 6.0 - (8.0 + 1.0) / 3.0 + 6.0;
        assert_abs_diff_eq!(q.value, exact, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_integral() {
        let q = adaptive(|t: f64| (-t * t).exp(), -12.0, 12.0, 1e-13, 40);
        assert_abs_diff_eq!(q.value, PI.sqrt(), epsilon = 1e-12);
        assert!(q.error_estimate < 1e-12);
    }

    #[test]
    fn oscillatory_integrand() {
        let q = adaptive(|t: f64| (20.0 * t).sin().powi(2), 0.0, PI, 1e-12, 40);
        assert_abs_diff_eq!(q.value, PI / 2.0, epsilon = 1e-11);
    }
}
