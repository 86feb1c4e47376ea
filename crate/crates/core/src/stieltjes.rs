//! Stieltjes transform `S(z) = ∫ dΨ(s)/(z−s)` of the orthogonality measure of
//! the associated Stieltjes–Carlitz polynomials.
//!
//! The rates are `λ_n = k²(2n+2c+1)²`, `μ_n = 4(n+c)² + μ·δ_{n0}`, and
//!
//! ```text
//! S(z) = −D(c+1, 0; z) / D(c, μ; z),
//! D(c, μ; z) = 1/Γ(2c+1) ∫₀^K cos(√z (K−u)) (2c(2c−1) + μ sn²u) dn u (sn²u)^{c−1} du.
//! ```
//!
//! [`cf_markov`] evaluates the same transform as the Jacobi continued fraction
//! of the recurrence, and [`moments_jacobi`] gives the moments of `Ψ`.

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::elliptic::Modulus;
use crate::quadrature::{integrate_algebraic_complex, integrate_singular_complex, ComplexQuadResult, QuadConfig};
use crate::{Error, Result};

/// Rates of the associated Stieltjes–Carlitz birth-death process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SCRates {
    pub c: f64,
    pub mu: f64,
    pub k2: f64,
}

impl SCRates {
    pub fn new(c: f64, mu: f64, k2: f64) -> Result<Self> {
        if !(c >= 0.0 && mu >= 0.0 && c.is_finite() && mu.is_finite()) {
            return Err(Error::Parameter(format!("rates need c >= 0 and mu >= 0, got c = {c}, mu = {mu}")));
        }
        if !(k2 > 0.0 && k2 < 1.0) {
            return Err(Error::Parameter(format!("rates need 0 < k2 < 1, got {k2}")));
        }
        Ok(SCRates { c, mu, k2 })
    }

    /// Birth rate `λ_n`.
    pub fn lam(&self, n: usize) -> f64 {
        let m = 2.0 * (n as f64 + self.c) + 1.0;
        self.k2 * m * m
    }

    /// Death rate `μ_n`, including the co-recursive bump at `n = 0`.
    pub fn mu_n(&self, n: usize) -> f64 {
        let m = n as f64 + self.c;
        4.0 * m * m + if n == 0 { self.mu } else { 0.0 }
    }

    /// Diagonal `a_n = λ_n + μ_n` of the Jacobi operator.
    pub fn diagonal(&self, n: usize) -> f64 {
        self.lam(n) + self.mu_n(n)
    }

    /// Squared off-diagonal `b_n² = λ_{n−1} μ_n`, `n ≥ 1`.
    pub fn off_diagonal_sq(&self, n: usize) -> f64 {
        self.lam(n - 1) * self.mu_n(n)
    }
}

/// How a [`SpectralResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DRatio,
    ContinuedFraction,
    OdeLaplace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralResult {
    pub z: Complex64,
    pub value: Complex64,
    pub method: Method,
    pub err_estimate: f64,
    /// `z` sits on a zero of the denominator `D(c, μ; z)`.
    pub pole: bool,
}

fn check_z(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) || (z.im == 0.0 && z.re >= 0.0) {
        return Err(Error::Domain(format!("z = {z} lies on the support [0, inf) of the measure")));
    }
    Ok(())
}

fn d_config() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-300,
        rel_tol: 1e-13,
        max_levels: 14,
        ..Default::default()
    }
}

/// `D(c, μ; z)·e^{−|Im √z| K}`; the scale cancels in the ratio and keeps
/// `cosh(√p (K−u))` finite for large `p = −z`.
fn d_scaled(c: f64, mu: f64, zeta: Complex64, modulus: &Modulus) -> Result<ComplexQuadResult> {
    if c < 0.5 {
        return Err(Error::Domain(format!("D(c, mu; z) needs c >= 1/2, got {c}")));
    }
    let k = modulus.complete_k();
    let damp = zeta.im.abs() * k;
    let i = Complex64::i();
    let cos = move |u: f64| {
        let x = k - u;
        0.5 * ((i * zeta * x - damp).exp() + (-i * zeta * x - damp).exp())
    };
    let cfg = d_config();
    let norm = ln_gamma(2.0 * c + 1.0).exp();
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut evaluations = 0;
    let singular = 2.0 * c * (2.0 * c - 1.0);
    if singular != 0.0 {
        // (sn²u)^{c−1} = u^{2c−2} (sn u/u)^{2c−2}
        let r = integrate_algebraic_complex(
            |u| cos(u) * modulus.jacobi(u).dn * modulus.sn_over_u(u).powf(2.0 * c - 2.0),
            0.0,
            k,
            2.0 * c - 2.0,
            0.0,
            &cfg,
        )?;
        value += singular * r.value;
        error += singular * r.abs_error_estimate;
        evaluations += r.evaluations;
    }
    if mu != 0.0 {
        let r = integrate_algebraic_complex(
            |u| cos(u) * modulus.jacobi(u).dn * modulus.sn_over_u(u).powf(2.0 * c),
            0.0,
            k,
            2.0 * c,
            0.0,
            &cfg,
        )?;
        value += mu * r.value;
        error += mu * r.abs_error_estimate;
        evaluations += r.evaluations;
    }
    Ok(ComplexQuadResult {
        value: value / norm,
        abs_error_estimate: error / norm,
        evaluations,
    })
}

/// `D(c, μ; z)` for `c ≥ 1/2` and `z` off `[0, ∞)`.
pub fn d_integral(c: f64, mu: f64, z: Complex64, k2: f64) -> Result<Complex64> {
    check_z(z)?;
    let modulus = Modulus::new(k2)?;
    let zeta = z.sqrt();
    let scaled = d_scaled(c, mu, zeta, &modulus)?;
    Ok(scaled.value * (zeta.im.abs() * modulus.complete_k()).exp())
}

/// The numerator `D(c+1, 0; z)` in its direct form
/// `1/Γ(2c+1) ∫₀^K cos(√z (K−u)) dn u (sn²u)^c du`.
pub fn numerator_direct(c: f64, z: Complex64, k2: f64) -> Result<Complex64> {
    check_z(z)?;
    if c < 0.0 {
        return Err(Error::Domain(format!("numerator needs c >= 0, got {c}")));
    }
    let modulus = Modulus::new(k2)?;
    let k = modulus.complete_k();
    let zeta = z.sqrt();
    let r = integrate_singular_complex(
        |u| {
            let j = modulus.jacobi(u);
            (zeta * (k - u)).cos() * j.dn * (j.sn * j.sn).powf(c)
        },
        0.0,
        k,
        2.0 * c,
        &d_config(),
    )?;
    Ok(r.value / ln_gamma(2.0 * c + 1.0).exp())
}

/// `S(z) = −D(c+1, 0; z)/D(c, μ; z)`.
pub fn stieltjes_s(r: &SCRates, z: Complex64) -> Result<SpectralResult> {
    check_z(z)?;
    let modulus = Modulus::new(r.k2)?;
    let zeta = z.sqrt();
    let num = d_scaled(r.c + 1.0, 0.0, zeta, &modulus)?;
    let den = d_scaled(r.c, r.mu, zeta, &modulus)?;
    if den.value.norm() <= 10.0 * den.abs_error_estimate {
        return Ok(SpectralResult {
            z,
            value: Complex64::new(f64::INFINITY, 0.0),
            method: Method::DRatio,
            err_estimate: f64::INFINITY,
            pole: true,
        });
    }
    let value = -num.value / den.value;
    let rel = num.abs_error_estimate / num.value.norm() + den.abs_error_estimate / den.value.norm();
    Ok(SpectralResult {
        z,
        value,
        method: Method::DRatio,
        err_estimate: rel * value.norm(),
        pole: false,
    })
}

const CF_MIN_DEPTH: usize = 16;
const CF_MAX_DEPTH: usize = 1 << 16;

fn cf_at_depth(r: &SCRates, z: Complex64, depth: usize) -> Complex64 {
    let mut tail = Complex64::new(0.0, 0.0);
    for n in (1..=depth).rev() {
        tail = r.off_diagonal_sq(n) / (z - r.diagonal(n) - tail);
    }
    1.0 / (z - r.diagonal(0) - tail)
}

/// `S(z)` as the Jacobi continued fraction
/// `1/(z − a₀ − b₁²/(z − a₁ − b₂²/(…)))`, evaluated backward from a depth that
/// doubles until two successive values agree to relative `tol`.
pub fn cf_markov(r: &SCRates, z: Complex64, tol: f64) -> Result<SpectralResult> {
    check_z(z)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("continued fraction needs tol > 0, got {tol}")));
    }
    let mut depth = CF_MIN_DEPTH;
    let mut previous = cf_at_depth(r, z, depth);
    while depth < CF_MAX_DEPTH {
        depth *= 2;
        let current = cf_at_depth(r, z, depth);
        let diff = (current - previous).norm();
        if diff <= tol * current.norm() {
            return Ok(SpectralResult {
                z,
                value: current,
                method: Method::ContinuedFraction,
                err_estimate: diff,
                pole: false,
            });
        }
        previous = current;
    }
    Err(Error::ContinuedFraction { depth, partial: previous })
}

/// Moments `m_j = (e₀, Tʲ e₀)`, `j = 0..=n_max`, of the tridiagonal operator with
/// diagonal `a_n` and off-diagonal `b_n`.
pub fn moments_jacobi(r: &SCRates, n_max: usize) -> Result<Vec<f64>> {
    if n_max > 12 {
        return Err(Error::Domain(format!("moments limited to n_max <= 12, got {n_max}")));
    }
    let size = n_max + 1;
    let diag: Vec<f64> = (0..size).map(|n| r.diagonal(n)).collect();
    let off: Vec<f64> = (1..size).map(|n| r.off_diagonal_sq(n).sqrt()).collect();
    let mut v = vec![0.0; size];
    v[0] = 1.0;
    let mut moments = Vec::with_capacity(size);
    for _ in 0..=n_max {
        moments.push(v[0]);
        let next: Vec<f64> = (0..size)
            .map(|n| {
                let mut x = diag[n] * v[n];
                if n > 0 {
                    x += off[n - 1] * v[n - 1];
                }
                if n + 1 < size {
                    x += off[n] * v[n + 1];
                }
                x
            })
            .collect();
        v = next;
    }
    Ok(moments)
}

/// Truncated large-`p` expansion `−S(−p) ≈ Σ_{j≤J} (−1)ʲ m_j / p^{j+1}`
/// using all supplied moments.
pub fn laurent_neg_s(moments: &[f64], p: f64) -> f64 {
    let mut sign = 1.0;
    let mut power = p;
    let mut sum = 0.0;
    for m in moments {
        sum += sign * m / power;
        sign = -sign;
        power *= p;
    }
    sum
}
