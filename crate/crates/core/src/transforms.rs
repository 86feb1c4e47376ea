//! Integral connection relations between associated Heun functions.
//!
//! First transform, valid for `γ > α > −c`:
//!
//! ```text
//! Hn(c, μ, P; w) = 1/B(γ−α, α+c) ∫₀¹ t^{c+α−1} (1−t)^{γ−α−1} Hn(c, μ, P′_α; wt) dt
//! ```
//!
//! Second transform, valid for `1 > α > −c`, which moves the association
//! parameter to `c+α−1`:
//!
//! ```text
//! Hn(c, μ, P; w) = 1/B(1−α, c+α) ∫₀¹ t^{c+α−1} (1−t)^{−α} Hn(c+α−1, μ, P″_α; wt) dt
//! ```
//!
//! Both follow from the coefficient identities
//! `F_n(P) = (c+α)_n/(c+γ)_n · F_n(P′_α)` and `F_n(P) = (c+α)_n/(c+1)_n · F_n(P″_α)`.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::heun::{assoc_series, map_p_alpha, map_p_alpha2, map_p_beta, map_p_beta2, AssocParams, SeriesConfig};
use crate::quadrature::{integrate_algebraic, QuadConfig};
use crate::{Error, Result};

/// Series value against transform quadrature at one `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformReport {
    pub w: f64,
    /// `Hn(c, μ, P; w)` by series.
    pub lhs: f64,
    /// The transform integral.
    pub rhs: f64,
    pub abs_diff: f64,
    pub params_in: AssocParams,
    pub params_out: AssocParams,
}

/// Which couple of exponents the mapping acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Couple {
    Alpha,
    Beta,
}

/// `B(a, b) = Γ(a)Γ(b)/Γ(a+b)` for `a, b > 0`.
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!("beta function needs a, b > 0, got ({a}, {b})")));
    }
    Ok((ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp())
}

const R_MAX: f64 = 0.9;

fn check_w(w: f64) -> Result<()> {
    if !(w.abs() <= R_MAX) {
        return Err(Error::Domain(format!("transforms need |w| <= {R_MAX}, got {w}")));
    }
    Ok(())
}

fn exponent(a: &AssocParams, couple: Couple) -> f64 {
    match couple {
        Couple::Alpha => a.base.alpha,
        Couple::Beta => a.base.beta,
    }
}

/// The two connection relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    First,
    Second,
}

fn report(
    a: &AssocParams,
    inner: AssocParams,
    w: f64,
    left: f64,
    right: f64,
    quad_tol: f64,
) -> Result<TransformReport> {
    let cfg = SeriesConfig::default();
    let lhs = assoc_series(a, &cfg)?.eval(w)?;
    let series = assoc_series(&inner, &cfg)?;
    let norm = beta_fn(left + 1.0, right + 1.0)?;
    let quad = QuadConfig::absolute(quad_tol);
    let integral = integrate_algebraic(
        |t| series.eval(w * t).unwrap_or(f64::NAN),
        0.0,
        1.0,
        left,
        right,
        &quad,
    )?;
    let rhs = integral.value / norm;
    Ok(TransformReport {
        w,
        lhs,
        rhs,
        abs_diff: (lhs - rhs).abs(),
        params_in: *a,
        params_out: inner,
    })
}

/// Either transform on the chosen couple, with absolute quadrature tolerance `quad_tol`.
pub fn transform(kind: Transform, a: &AssocParams, w: f64, couple: Couple, quad_tol: f64) -> Result<TransformReport> {
    match kind {
        Transform::First => first(a, w, couple, quad_tol),
        Transform::Second => second(a, w, couple, quad_tol),
    }
}

/// First transform acting on the chosen couple.
pub fn transform_first_with(a: &AssocParams, w: f64, couple: Couple) -> Result<TransformReport> {
    first(a, w, couple, DEFAULT_QUAD_TOL)
}

/// Second transform acting on the chosen couple.
pub fn transform_second_with(a: &AssocParams, w: f64, couple: Couple) -> Result<TransformReport> {
    second(a, w, couple, DEFAULT_QUAD_TOL)
}

const DEFAULT_QUAD_TOL: f64 = 1e-12;

fn first(a: &AssocParams, w: f64, couple: Couple, quad_tol: f64) -> Result<TransformReport> {
    a.validate()?;
    check_w(w)?;
    let x = exponent(a, couple);
    let (gamma, c) = (a.base.gamma, a.c);
    if !(gamma > x && x > -c) {
        return Err(Error::Domain(format!(
            "first transform needs gamma > {couple:?} > -c, got gamma = {gamma}, exponent = {x}, c = {c}"
        )));
    }
    let inner = match couple {
        Couple::Alpha => map_p_alpha(a),
        Couple::Beta => map_p_beta(a),
    };
    report(a, inner, w, c + x - 1.0, gamma - x - 1.0, quad_tol)
}

fn second(a: &AssocParams, w: f64, couple: Couple, quad_tol: f64) -> Result<TransformReport> {
    a.validate()?;
    check_w(w)?;
    let x = exponent(a, couple);
    let c = a.c;
    if !(1.0 > x && x > -c) {
        return Err(Error::Domain(format!(
            "second transform needs 1 > {couple:?} > -c, got exponent = {x}, c = {c}"
        )));
    }
    let inner = match couple {
        Couple::Alpha => map_p_alpha2(a),
        Couple::Beta => map_p_beta2(a),
    };
    report(a, inner, w, c + x - 1.0, -x, quad_tol)
}

pub fn transform_first(a: &AssocParams, w: f64) -> Result<TransformReport> {
    transform_first_with(a, w, Couple::Alpha)
}

pub fn transform_second(a: &AssocParams, w: f64) -> Result<TransformReport> {
    transform_second_with(a, w, Couple::Alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heun::HeunParams;
    use crate::quadrature::integrate_singular;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn generic(alpha: f64, gamma: f64, c: f64) -> AssocParams {
        let base = HeunParams::with_fuchs(alpha, 1.1, gamma, 0.6, 0.35, 0.49).unwrap();
        AssocParams::new(base, c, 0.4).unwrap()
    }

    #[test]
    fn beta_values() {
        assert_abs_diff_eq!(beta_fn(1.0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!((beta_fn(0.5, 0.5).unwrap() - PI).abs() <= 1e-12 * PI);
        let q = integrate_singular(|t| t.powf(-0.8) * (1.0 - t).powf(-0.7), 0.0, 1.0, -0.8, 1e-12);
        let b = beta_fn(0.2, 0.3).unwrap();
        let estimate = match q {
            Ok(r) => r.value,
            Err(Error::Quadrature { estimate, .. }) => estimate,
            Err(e) => panic!("{e}"),
        };
        assert!((estimate - b).abs() < 1e-4 * b);
        assert!(beta_fn(0.0, 1.0).is_err());
        assert!(beta_fn(1.0, -2.0).is_err());
    }

    #[test]
    fn normalization_at_origin() {
        let a = generic(0.3, 0.9, 0.4);
        for r in [transform_first(&a, 0.0).unwrap(), transform_second(&a, 0.0).unwrap()] {
            assert_eq!(r.lhs, 1.0);
            assert_abs_diff_eq!(r.rhs, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn first_transform_generic() {
        let r = transform_first(&generic(0.3, 0.9, 0.4), 0.5).unwrap();
        assert!(r.abs_diff < 1e-8, "{r:?}");
    }

    #[test]
    fn first_transform_plain_carlitz() {
        let base = HeunParams::new(0.5, 1.0, 1.5, 0.5, 0.5, 0.3, 0.36).unwrap();
        let r = transform_first(&AssocParams::plain(base), 0.7).unwrap();
        assert!(r.abs_diff < 1e-8, "{r:?}");
    }

    #[test]
    fn second_transform_generic() {
        let r = transform_second(&generic(0.5, 0.9, 0.5), 0.4).unwrap();
        assert!(r.abs_diff < 1e-8, "{r:?}");
        assert_eq!(r.params_out.c, r.params_in.c + r.params_in.base.alpha - 1.0);
    }

    #[test]
    fn second_transform_near_fixed_point() {
        let a = generic(0.999, 1.4, 0.6);
        let r = transform_second(&a, 0.6).unwrap();
        assert_abs_diff_eq!(r.params_out.c, 0.599, epsilon = 1e-12);
        assert!(r.abs_diff < 1e-6, "{r:?}");
    }

    #[test]
    fn beta_couple() {
        let base = HeunParams::with_fuchs(1.3, 0.35, 0.9, 0.6, 0.35, 0.49).unwrap();
        let a = AssocParams::new(base, 0.4, 0.4).unwrap();
        assert!(transform_first(&a, 0.5).is_err());
        assert!(transform_first_with(&a, 0.5, Couple::Beta).unwrap().abs_diff < 1e-8);
        assert!(transform_second_with(&a, 0.5, Couple::Beta).unwrap().abs_diff < 1e-8);
    }

    #[test]
    fn validity_strip_enforced() {
        assert!(transform_first(&generic(1.0, 0.9, 0.4), 0.5).is_err());
        assert!(transform_second(&generic(1.2, 2.0, 0.4), 0.5).is_err());
        assert!(transform_first(&generic(-0.5, 0.9, 0.4), 0.5).is_err());
        assert!(transform_first(&generic(0.3, 0.9, 0.4), 0.95).is_err());
    }

    #[test]
    fn pochhammer_ratio_kernel() {
        let (alpha, gamma, c): (f64, f64, f64) = (0.3, 0.9, 0.4);
        let norm = beta_fn(gamma - alpha, alpha + c).unwrap();
        let cfg = QuadConfig::absolute(1e-14);
        let mut ratio = 1.0;
        for n in 0..=20 {
            let q = integrate_algebraic(|_| 1.0, 0.0, 1.0, n as f64 + c + alpha - 1.0, gamma - alpha - 1.0, &cfg)
                .unwrap();
            assert!((q.value / norm - ratio).abs() <= 1e-12 * ratio.max(1e-3), "n = {n}");
            ratio *= (c + alpha + n as f64) / (c + gamma + n as f64);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn both_transforms_hold(
            alpha in 0.05..0.9f64, gap in 0.2..1.2f64, c in 0.1..1.0f64,
            w in -0.8..0.85f64, k2 in 0.0..1.0f64,
        ) {
            let base = HeunParams::with_fuchs(alpha, 0.8, alpha + gap, 0.5, 0.2, k2).unwrap();
            let a = AssocParams::new(base, c, 0.3).unwrap();
            prop_assert!(transform_first(&a, w).unwrap().abs_diff < 1e-8);
            prop_assert!(transform_second(&a, w).unwrap().abs_diff < 1e-8);
        }
    }
}
