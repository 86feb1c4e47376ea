//! One-dimensional integration.
//!
//! Three entry points share one error contract:
//!
//! - [`integrate`]: globally adaptive 7/15-point Gauss–Kronrod for smooth integrands.
//! - [`integrate_singular`]: tanh-sinh (double exponential) for integrands with an
//!   algebraic singularity `(t-a)^p`, `p > -1`, at the left endpoint.
//! - [`integrate_algebraic`]: `∫ (t-a)^pa (b-t)^pb g(t) dt` with the weight handled
//!   analytically, for exponents arbitrarily close to `-1`.
//!
//! Complex integrands are integrated as two real integrals.

use std::cell::Cell;
use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::{Error, Result};

/// Value of a definite integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

/// Complex counterpart of [`QuadResult`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexQuadResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

/// Tolerances and refinement budget.
///
/// A result is accepted once its error estimate is below
/// `max(abs_tol, rel_tol * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum bisection depth of a Gauss–Kronrod subinterval.
    pub max_depth: usize,
    /// Maximum number of step halvings of the tanh-sinh rule.
    pub max_levels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_depth: 20,
            max_levels: 12,
        }
    }
}

impl QuadConfig {
    pub fn absolute(tol: f64) -> Self {
        QuadConfig {
            abs_tol: tol,
            ..Default::default()
        }
    }

    pub fn relative(tol: f64) -> Self {
        QuadConfig {
            abs_tol: 0.0,
            rel_tol: tol,
            ..Default::default()
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0 && self.abs_tol + self.rel_tol > 0.0) {
            return Err(Error::Domain(format!(
                "quadrature tolerances must be non-negative and not both zero (abs {}, rel {})",
                self.abs_tol, self.rel_tol
            )));
        }
        Ok(())
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::Domain(format!(
            "integration interval [{a}, {b}] must be finite with a <= b"
        )));
    }
    Ok(())
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p > -1.0) {
        return Err(Error::Domain(format!(
            "endpoint exponent {p} <= -1: integral diverges"
        )));
    }
    Ok(())
}

// Gauss–Kronrod 7/15 abscissae and weights (QUADPACK qk15).
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
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_SEGMENTS: usize = 4096;

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: usize,
}

fn gauss_kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, depth: usize) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        depth,
    }
}

/// `∫_a^b f(t) dt` with the default refinement budget and absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    integrate_with(f, a, b, &QuadConfig::absolute(tol))
}

/// Globally adaptive Gauss–Kronrod: the subinterval with the largest error is
/// bisected until the summed error meets the tolerance.
pub fn integrate_with<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    check_interval(a, b)?;
    cfg.validate()?;
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 1,
        });
    }

    let mut segments = vec![gauss_kronrod15(&f, a, b, 0)];
    let mut evaluations = 15;
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if !value.is_finite() {
            return Err(Error::Quadrature {
                estimate: value,
                error,
                evaluations,
            });
        }
        if error <= cfg.target(value) {
            return Ok(QuadResult {
                value,
                abs_error_estimate: error,
                evaluations,
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .filter(|(_, s)| s.depth < cfg.max_depth)
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i);
        let Some(i) = worst.filter(|_| segments.len() < MAX_SEGMENTS) else {
            return Err(Error::Quadrature {
                estimate: value,
                error,
                evaluations,
            });
        };
        let s = segments.swap_remove(i);
        let mid = 0.5 * (s.a + s.b);
        segments.push(gauss_kronrod15(&f, s.a, mid, s.depth + 1));
        segments.push(gauss_kronrod15(&f, mid, s.b, s.depth + 1));
        evaluations += 30;
    }
}

const TANH_SINH_T_MAX: f64 = 6.0;

/// Tanh-sinh rule on `[a, b]`. The integrand receives the abscissa together
/// with its exact distances to both endpoints, so weights like `(b-t)^p` can
/// be formed without cancellation.
pub(crate) fn tanh_sinh<F: Fn(f64, f64, f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    check_interval(a, b)?;
    cfg.validate()?;
    let width = b - a;
    if width == 0.0 {
        return Ok(QuadResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 1,
        });
    }

    let evaluations = Cell::new(0usize);
    let node = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        let (near, far) = (width * e / (1.0 + e), width / (1.0 + e));
        let (da, db) = if u < 0.0 { (near, far) } else { (far, near) };
        if da == 0.0 || db == 0.0 {
            return 0.0;
        }
        let x = if da <= db { a + da } else { b - db };
        let weight = 0.5 * width * FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        evaluations.set(evaluations.get() + 1);
        weight * f(x, da, db)
    };

    let mut h = 1.0;
    let mut sum = node(0.0);
    let mut k = 1.0;
    while k <= TANH_SINH_T_MAX {
        sum += node(k) + node(-k);
        k += 1.0;
    }
    let mut previous = h * sum;
    for level in 1..=cfg.max_levels {
        h *= 0.5;
        let mut t = h;
        while t <= TANH_SINH_T_MAX {
            sum += node(t) + node(-t);
            t += 2.0 * h;
        }
        let current = h * sum;
        let error = (current - previous).abs();
        if !current.is_finite() {
            break;
        }
        if level >= 3 && error <= cfg.target(current) {
            return Ok(QuadResult {
                value: current,
                abs_error_estimate: error,
                evaluations: evaluations.get(),
            });
        }
        previous = current;
    }
    let estimate = h * sum;
    Err(Error::Quadrature {
        estimate,
        error: (estimate - previous).abs(),
        evaluations: evaluations.get(),
    })
}

/// `∫_a^b f(t) dt` for `f(t) ~ (t-a)^p · smooth` near `a`, `p > -1`, with
/// absolute tolerance `tol`.
///
/// The integrand must be finite on the open interval; tanh-sinh never
/// evaluates it at the endpoints. Exponents very close to `-1` put most of the
/// mass below the smallest representable node; use [`integrate_algebraic`]
/// for those.
pub fn integrate_singular<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    p: f64,
    tol: f64,
) -> Result<QuadResult> {
    integrate_singular_with(f, a, b, p, &QuadConfig::absolute(tol))
}

pub fn integrate_singular_with<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    p: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    check_exponent(p)?;
    // Nodes that round onto an endpoint carry negligible weight; skipping them
    // keeps integrands singular at the endpoints finite.
    tanh_sinh(|x, _, _| if x <= a || x >= b { 0.0 } else { f(x) }, a, b, cfg)
}

/// `∫_a^b (t-a)^pa (b-t)^pb g(t) dt` for smooth `g`.
///
/// Each half of the interval is mapped by `t - a = v^(1/(pa+1))` (resp.
/// `b - t = v^(1/(pb+1))`), which absorbs the weight exactly; the bounded
/// remainder is integrated by tanh-sinh.
pub fn integrate_algebraic<G: Fn(f64) -> f64>(
    g: G,
    a: f64,
    b: f64,
    pa: f64,
    pb: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    check_interval(a, b)?;
    check_exponent(pa)?;
    check_exponent(pb)?;
    cfg.validate()?;
    let width = b - a;
    if width == 0.0 {
        return Ok(QuadResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 1,
        });
    }
    let half = 0.5 * width;
    let half_cfg = QuadConfig {
        abs_tol: 0.5 * cfg.abs_tol,
        ..*cfg
    };

    let qa = 1.0 / (pa + 1.0);
    let left = tanh_sinh(
        |v, _, _| {
            let d = v.powf(qa);
            g(a + d) * (width - d).powf(pb)
        },
        0.0,
        half.powf(pa + 1.0),
        &half_cfg,
    )?;
    let qb = 1.0 / (pb + 1.0);
    let right = tanh_sinh(
        |v, _, _| {
            let d = v.powf(qb);
            g(b - d) * (width - d).powf(pa)
        },
        0.0,
        half.powf(pb + 1.0),
        &half_cfg,
    )?;
    Ok(QuadResult {
        value: qa * left.value + qb * right.value,
        abs_error_estimate: qa * left.abs_error_estimate + qb * right.abs_error_estimate,
        evaluations: left.evaluations + right.evaluations,
    })
}

/// Complex-valued [`integrate_algebraic`], as two real integrals.
pub fn integrate_algebraic_complex<G: Fn(f64) -> Complex64>(
    g: G,
    a: f64,
    b: f64,
    pa: f64,
    pb: f64,
    cfg: &QuadConfig,
) -> Result<ComplexQuadResult> {
    let re = integrate_algebraic(|t| g(t).re, a, b, pa, pb, cfg)?;
    let im = integrate_algebraic(|t| g(t).im, a, b, pa, pb, cfg)?;
    Ok(ComplexQuadResult {
        value: Complex64::new(re.value, im.value),
        abs_error_estimate: re.abs_error_estimate.hypot(im.abs_error_estimate),
        evaluations: re.evaluations + im.evaluations,
    })
}

/// Complex-valued [`integrate_singular_with`], as two real integrals.
pub fn integrate_singular_complex<G: Fn(f64) -> Complex64>(
    g: G,
    a: f64,
    b: f64,
    p: f64,
    cfg: &QuadConfig,
) -> Result<ComplexQuadResult> {
    let re = integrate_singular_with(|t| g(t).re, a, b, p, cfg)?;
    let im = integrate_singular_with(|t| g(t).im, a, b, p, cfg)?;
    Ok(ComplexQuadResult {
        value: Complex64::new(re.value, im.value),
        abs_error_estimate: re.abs_error_estimate.hypot(im.abs_error_estimate),
        evaluations: re.evaluations + im.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use statrs::function::gamma::ln_gamma;
    use std::f64::consts::PI;

    fn beta_oracle(a: f64, b: f64) -> f64 {
        (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
    }

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|t| t, 0.0, 1.0, 1e-10).unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-15);
        assert!(r.evaluations >= 1);
    }

    #[test]
    fn sine_over_half_period() {
        let r = integrate(f64::sin, 0.0, PI, 1e-10).unwrap();
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn arctangent_gives_pi() {
        let r = integrate(|t| 4.0 / (1.0 + t * t), 0.0, 1.0, 1e-10).unwrap();
        assert_abs_diff_eq!(r.value, PI, epsilon = 1e-10);
        assert!((r.value - PI).abs() <= r.abs_error_estimate.max(1e-10));
    }

    #[test]
    fn inverse_square_root_singularity() {
        let r = integrate_singular(|t| t.powf(-0.5), 0.0, 1.0, -0.5, 1e-10).unwrap();
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn arcsine_density_both_ends() {
        let cfg = QuadConfig::absolute(1e-10);
        let r = integrate_algebraic(|_| 1.0, 0.0, 1.0, -0.5, -0.5, &cfg).unwrap();
        assert_abs_diff_eq!(r.value, PI, epsilon = 1e-10);
        // Plain tanh-sinh loses the part of the right-end mass that sits
        // within rounding distance of 1.
        let r = integrate_singular(|t| (t * (1.0 - t)).powf(-0.5), 0.0, 1.0, -0.5, 1e-10);
        let value = r.map(|r| r.value).unwrap_or_else(|e| match e {
            Error::Quadrature { estimate, .. } => estimate,
            other => panic!("{other}"),
        });
        assert_abs_diff_eq!(value, PI, epsilon = 1e-6);
    }

    #[test]
    fn beta_integral_matches_log_gamma() {
        let cfg = QuadConfig::absolute(1e-12);
        let r = integrate_algebraic(|_| 1.0, 0.0, 1.0, -0.8, -0.7, &cfg).unwrap();
        assert_abs_diff_eq!(r.value, beta_oracle(0.2, 0.3), epsilon = 1e-10);
    }

    #[test]
    fn exponent_near_minus_one() {
        // ∫₀¹ 1e-3 t^(1e-3 - 1) dt = 1, almost all mass below 1e-300.
        let cfg = QuadConfig::absolute(1e-12);
        let r = integrate_algebraic(|_| 1e-3, 0.0, 1.0, 1e-3 - 1.0, 0.0, &cfg).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn divergent_exponent_rejected() {
        assert!(matches!(
            integrate_singular(|t| 1.0 / t, 0.0, 1.0, -1.0, 1e-10),
            Err(Error::Domain(_))
        ));
        let cfg = QuadConfig::default();
        assert!(integrate_algebraic(|_| 1.0, 0.0, 1.0, 0.0, -1.5, &cfg).is_err());
    }

    #[test]
    fn reversed_interval_rejected() {
        assert!(matches!(
            integrate(|t| t, 1.0, 0.0, 1e-10),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn non_convergence_reports_best_estimate() {
        let cfg = QuadConfig {
            abs_tol: 1e-14,
            max_depth: 2,
            ..Default::default()
        };
        match integrate_with(|t| (50.0 * t).sin().abs(), 0.0, 3.0, &cfg) {
            Err(Error::Quadrature { estimate, .. }) => assert!(estimate.is_finite()),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn deterministic() {
        let f = |t: f64| (3.0 * t).cos() * t.sqrt();
        let r1 = integrate_singular(f, 0.0, 2.0, 0.5, 1e-10).unwrap();
        let r2 = integrate_singular(f, 0.0, 2.0, 0.5, 1e-10).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn singular_with_zero_exponent_agrees_with_kronrod() {
        let f = |t: f64| (t * t).exp() / (2.0 + t.sin());
        let a = integrate(f, 0.0, 1.5, 1e-10).unwrap();
        let b = integrate_singular(f, 0.0, 1.5, 0.0, 1e-10).unwrap();
        assert!((a.value - b.value).abs() <= a.abs_error_estimate + b.abs_error_estimate + 1e-12);
    }

    #[test]
    fn complex_integrand_split() {
        let cfg = QuadConfig::absolute(1e-12);
        let r = integrate_algebraic_complex(
            |t| Complex64::new(0.0, t).exp(),
            0.0,
            PI,
            0.0,
            0.0,
            &cfg,
        )
        .unwrap();
        assert_abs_diff_eq!(r.value.re, 0.0, epsilon = 1e-11);
        assert_abs_diff_eq!(r.value.im, 2.0, epsilon = 1e-11);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn linearity(c1 in -2.0..2.0f64, c2 in -2.0..2.0f64, w1 in 0.1..4.0f64, w2 in 0.1..4.0f64) {
            let tol = 1e-10;
            let f = move |t: f64| (w1 * t).sin() + t * t;
            let g = move |t: f64| (-w2 * t).exp();
            let lhs = integrate(|t| c1 * f(t) + c2 * g(t), 0.0, 2.0, tol).unwrap().value;
            let rhs = c1 * integrate(f, 0.0, 2.0, tol).unwrap().value
                + c2 * integrate(g, 0.0, 2.0, tol).unwrap().value;
            prop_assert!((lhs - rhs).abs() <= 10.0 * tol);
        }

        #[test]
        fn interval_additivity(split in 0.05..1.95f64, w in 0.1..6.0f64) {
            let tol = 1e-10;
            let f = move |t: f64| (w * t).cos() / (1.0 + t);
            let whole = integrate(f, 0.0, 2.0, tol).unwrap().value;
            let parts = integrate(f, 0.0, split, tol).unwrap().value
                + integrate(f, split, 2.0, tol).unwrap().value;
            prop_assert!((whole - parts).abs() <= 10.0 * tol);
        }

        #[test]
        fn singular_power_rule(p in -0.95..2.0f64, b in 0.2..3.0f64) {
            let r = integrate_singular(move |t| t.powf(p), 0.0, b, p, 1e-10).unwrap();
            let exact = b.powf(p + 1.0) / (p + 1.0);
            prop_assert!((r.value - exact).abs() <= 1e-9 * exact.max(1.0));
        }
    }
}
