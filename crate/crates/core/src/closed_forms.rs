//! The eight closed-form associated-Heun families.
//!
//! Under `√w = sn(θ; k²)` each family turns the associated Heun equation into
//! `G'' + 4σG = J(θ)`, so that `prefactor(w)·Hn(c, μ, P; w)` is a sum of the
//! convolutions
//!
//! ```text
//! COS[f](θ) = ∫₀^θ cos(2√σ(θ−u)) f(u) du,
//! SIN[f](θ) = ∫₀^θ sin(2√σ(θ−u))/(2√σ) f(u) du
//! ```
//!
//! against elliptic integrands of the form `(sn²u)^e · cnᵃu · dnᵇu`. For
//! `σ < 0` the kernels are the real `cosh`/`sinh` forms.

use serde::Serialize;

use crate::elliptic::Modulus;
use crate::heun::{assoc_series, AssocParams, HeunParams, SeriesConfig};
use crate::quadrature::{integrate_algebraic, integrate_singular_with, QuadConfig, QuadResult};
use crate::{Error, Result};

/// Which convolution kernel a term uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kernel {
    Cos,
    Sin,
}

/// One integrand `coef · (sn²u)^sn2_power · cn u^[cn] · dn u^[dn]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelTerm {
    pub kernel: Kernel,
    pub coef: f64,
    pub sn2_power: f64,
    pub cn: bool,
    pub dn: bool,
}

/// Convolution kernel parameters: spectral variable `σ` and upper limit `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSpec {
    pub sigma: f64,
    pub theta: f64,
}

impl KernelSpec {
    pub fn new(sigma: f64, theta: f64) -> Result<Self> {
        if !(sigma.is_finite() && theta.is_finite() && theta >= 0.0) {
            return Err(Error::Domain(format!(
                "kernel needs finite sigma and theta >= 0 (sigma {sigma}, theta {theta})"
            )));
        }
        Ok(KernelSpec { sigma, theta })
    }

    /// `cos(2√σ x)`, `cosh(2√−σ x)` for `σ < 0`.
    pub fn cos_kernel(&self, x: f64) -> f64 {
        if self.sigma >= 0.0 {
            (2.0 * self.sigma.sqrt() * x).cos()
        } else {
            (2.0 * (-self.sigma).sqrt() * x).cosh()
        }
    }

    /// `sin(2√σ x)/(2√σ)`, `sinh(2√−σ x)/(2√−σ)` for `σ < 0`, `x` at `σ = 0`.
    pub fn sin_kernel(&self, x: f64) -> f64 {
        if self.sigma > 0.0 {
            let r = 2.0 * self.sigma.sqrt();
            (r * x).sin() / r
        } else if self.sigma < 0.0 {
            let r = 2.0 * (-self.sigma).sqrt();
            (r * x).sinh() / r
        } else {
            x
        }
    }

    fn kernel(&self, kind: Kernel, x: f64) -> f64 {
        match kind {
            Kernel::Cos => self.cos_kernel(x),
            Kernel::Sin => self.sin_kernel(x),
        }
    }
}

fn quad_cfg(tol: f64) -> QuadConfig {
    QuadConfig {
        abs_tol: tol,
        rel_tol: 0.0,
        max_levels: 14,
        ..Default::default()
    }
}

/// `COS[f](θ)` for `f` integrable on `(0, θ)`.
pub fn kernel_cos<F: Fn(f64) -> f64>(f: F, theta: f64, sigma: f64) -> Result<QuadResult> {
    kernel_cos_weighted(f, theta, sigma, 0.0)
}

/// `SIN[f](θ)` for `f` integrable on `(0, θ)`.
pub fn kernel_sin<F: Fn(f64) -> f64>(f: F, theta: f64, sigma: f64) -> Result<QuadResult> {
    kernel_sin_weighted(f, theta, sigma, 0.0)
}

/// `COS[u^p g(u)](θ)` with the endpoint weight `u^p`, `p > −1`, integrated exactly.
pub fn kernel_cos_weighted<F: Fn(f64) -> f64>(g: F, theta: f64, sigma: f64, p: f64) -> Result<QuadResult> {
    convolve(Kernel::Cos, g, KernelSpec::new(sigma, theta)?, p, 1e-12)
}

/// `SIN[u^p g(u)](θ)` with the endpoint weight `u^p`, `p > −1`, integrated exactly.
pub fn kernel_sin_weighted<F: Fn(f64) -> f64>(g: F, theta: f64, sigma: f64, p: f64) -> Result<QuadResult> {
    convolve(Kernel::Sin, g, KernelSpec::new(sigma, theta)?, p, 1e-12)
}

fn convolve<F: Fn(f64) -> f64>(kind: Kernel, g: F, spec: KernelSpec, p: f64, tol: f64) -> Result<QuadResult> {
    let integrand = |u: f64| spec.kernel(kind, spec.theta - u) * g(u);
    if p == 0.0 {
        integrate_singular_with(integrand, 0.0, spec.theta, 0.0, &quad_cfg(tol))
    } else {
        integrate_algebraic(integrand, 0.0, spec.theta, p, 0.0, &quad_cfg(tol))
    }
}

/// One of the eight families: parameter array, `σ`-shift, prefactor and integrands.
#[derive(Debug, Clone, Copy)]
pub struct FamilySpec {
    pub id: u8,
    /// `(α, β, γ, δ, ε)`.
    pub params: [f64; 5],
    /// `s = σ − shift(c, k²)`.
    pub shift: fn(f64, f64) -> f64,
    /// `prefactor(w, c, k²)`.
    pub prefactor: fn(f64, f64, f64) -> f64,
    /// Integrands as functions of `(c, μ, k²)`.
    pub terms: fn(f64, f64, f64) -> Vec<KernelTerm>,
}

fn term(kernel: Kernel, coef: f64, sn2_power: f64, cn: bool, dn: bool) -> KernelTerm {
    KernelTerm {
        kernel,
        coef,
        sn2_power,
        cn,
        dn,
    }
}

fn terms1(c: f64, mu: f64, k2: f64) -> Vec<KernelTerm> {
    vec![
        term(Kernel::Cos, 2.0 * c, c - 0.5, true, true),
        term(Kernel::Sin, 4.0 * (c * c + c * c * k2 + mu), c, false, false),
        term(Kernel::Sin, -2.0 * c * (2.0 * c + 1.0) * k2, c + 1.0, false, false),
    ]
}

fn terms2(c: f64, mu: f64, k2: f64) -> Vec<KernelTerm> {
    vec![
        term(Kernel::Cos, 2.0 * c, c - 0.5, false, true),
        term(Kernel::Sin, 4.0 * (k2 * c * c + mu), c, true, false),
    ]
}

fn terms3(c: f64, mu: f64, _k2: f64) -> Vec<KernelTerm> {
    vec![
        term(Kernel::Cos, 2.0 * c, c - 0.5, true, false),
        term(Kernel::Sin, 4.0 * (c * c + mu), c, false, true),
    ]
}

fn terms4(c: f64, mu: f64, _k2: f64) -> Vec<KernelTerm> {
    vec![
        term(Kernel::Cos, 2.0 * c, c - 0.5, false, false),
        term(Kernel::Sin, 4.0 * mu, c, true, true),
    ]
}

/// `F(u) = 2c(2c+1)(sn²u)^{c−1/2} + 4μ(sn²u)^{c+1/2}` times `cnᵃ dnᵇ`.
fn sin_only(c: f64, mu: f64, cn: bool, dn: bool) -> Vec<KernelTerm> {
    vec![
        term(Kernel::Sin, 2.0 * c * (2.0 * c + 1.0), c - 0.5, cn, dn),
        term(Kernel::Sin, 4.0 * mu, c + 0.5, cn, dn),
    ]
}

fn terms5(c: f64, mu: f64, _k2: f64) -> Vec<KernelTerm> {
    sin_only(c, mu, false, false)
}

fn terms6(c: f64, mu: f64, _k2: f64) -> Vec<KernelTerm> {
    sin_only(c, mu, true, false)
}

fn terms7(c: f64, mu: f64, _k2: f64) -> Vec<KernelTerm> {
    sin_only(c, mu, false, true)
}

fn terms8(c: f64, mu: f64, _k2: f64) -> Vec<KernelTerm> {
    sin_only(c, mu, true, true)
}

/// The family registry, indexed by `id − 1`.
pub static FAMILIES: [FamilySpec; 8] = [
    FamilySpec {
        id: 1,
        params: [0.0, 0.5, 0.5, 0.5, 0.5],
        shift: |c, k2| k2 * c * c,
        prefactor: |w, c, _| w.powf(c),
        terms: terms1,
    },
    FamilySpec {
        id: 2,
        params: [0.5, 1.0, 0.5, 1.5, 0.5],
        shift: |c, k2| 0.25 + k2 * c * c,
        prefactor: |w, c, _| w.powf(c) * (1.0 - w).sqrt(),
        terms: terms2,
    },
    FamilySpec {
        id: 3,
        params: [0.5, 1.0, 0.5, 0.5, 1.5],
        shift: |c, k2| k2 * (c + 0.5) * (c + 0.5),
        prefactor: |w, c, k2| w.powf(c) * (1.0 - k2 * w).sqrt(),
        terms: terms3,
    },
    FamilySpec {
        id: 4,
        params: [1.0, 1.5, 0.5, 1.5, 1.5],
        shift: |c, k2| 0.25 + k2 * (c + 0.5) * (c + 0.5),
        prefactor: |w, c, k2| w.powf(c) * ((1.0 - w) * (1.0 - k2 * w)).sqrt(),
        terms: terms4,
    },
    FamilySpec {
        id: 5,
        params: [0.5, 1.0, 1.5, 0.5, 0.5],
        shift: |c, k2| 0.25 + k2 * (c + 0.5) * (c + 0.5),
        prefactor: |w, c, _| w.powf(c + 0.5),
        terms: terms5,
    },
    FamilySpec {
        id: 6,
        params: [1.0, 1.5, 1.5, 1.5, 0.5],
        shift: |c, k2| 1.0 + k2 * (c + 0.5) * (c + 0.5),
        prefactor: |w, c, _| w.powf(c + 0.5) * (1.0 - w).sqrt(),
        terms: terms6,
    },
    FamilySpec {
        id: 7,
        params: [1.0, 1.5, 1.5, 0.5, 1.5],
        shift: |c, k2| 0.25 + k2 * (c + 1.0) * (c + 1.0),
        prefactor: |w, c, k2| w.powf(c + 0.5) * (1.0 - k2 * w).sqrt(),
        terms: terms7,
    },
    FamilySpec {
        id: 8,
        params: [1.5, 2.0, 1.5, 1.5, 1.5],
        shift: |c, k2| 1.0 + k2 * (c + 1.0) * (c + 1.0),
        prefactor: |w, c, k2| w.powf(c + 0.5) * ((1.0 - w) * (1.0 - k2 * w)).sqrt(),
        terms: terms8,
    },
];

/// Looks up a family by id `1..=8`.
pub fn family(id: u8) -> Result<&'static FamilySpec> {
    FAMILIES
        .get((id as usize).wrapping_sub(1))
        .ok_or_else(|| Error::Domain(format!("family id {id} outside 1..=8")))
}

impl FamilySpec {
    /// The Heun array with `s = σ − shift(c, k²)`.
    pub fn heun_params(&self, c: f64, sigma: f64, k2: f64) -> Result<HeunParams> {
        let [alpha, beta, gamma, delta, eps] = self.params;
        HeunParams::new(alpha, beta, gamma, delta, eps, sigma - (self.shift)(c, k2), k2)
    }

    pub fn assoc_params(&self, c: f64, mu: f64, sigma: f64, k2: f64) -> Result<AssocParams> {
        AssocParams::new(self.heun_params(c, sigma, k2)?, c, mu)
    }

    /// `prefactor(w) · Hn(w)` from the power series.
    pub fn series_value(&self, c: f64, mu: f64, sigma: f64, w: f64, k2: f64) -> Result<f64> {
        let a = self.assoc_params(c, mu, sigma, k2)?;
        let cfg = SeriesConfig {
            r_max: w.abs().max(SeriesConfig::default().r_max),
            ..Default::default()
        };
        let hn = assoc_series(&a, &cfg)?.eval(w)?;
        Ok((self.prefactor)(w, c, k2) * hn)
    }
}

fn check_family_domain(w: f64, k2: f64) -> Result<()> {
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::Domain(format!("closed forms need 0 < w < 1, got {w}")));
    }
    if !(0.0..1.0).contains(&k2) {
        return Err(Error::Domain(format!("closed forms need 0 <= k2 < 1, got {k2}")));
    }
    Ok(())
}

/// `prefactor(w) · Hn(c, μ, P; w)` from the kernel quadratures.
pub fn eval_family_raw(spec: &FamilySpec, c: f64, mu: f64, sigma: f64, w: f64, k2: f64) -> Result<f64> {
    eval_family_raw_with(spec, c, mu, sigma, w, k2, 1e-12)
}

/// [`eval_family_raw`] with each quadrature accurate to `rel_tol · prefactor(w)`.
pub fn eval_family_raw_with(
    spec: &FamilySpec,
    c: f64,
    mu: f64,
    sigma: f64,
    w: f64,
    k2: f64,
    rel_tol: f64,
) -> Result<f64> {
    check_family_domain(w, k2)?;
    if !(c > 0.0) {
        return Err(Error::Domain(format!(
            "family {} needs c > 0, got {c}; use limit_c0 at c = 0",
            spec.id
        )));
    }
    let modulus = Modulus::new(k2)?;
    let theta = modulus.theta_of_w(w)?;
    let kernel = KernelSpec::new(sigma, theta)?;
    let tol = rel_tol * (spec.prefactor)(w, c, k2);
    let mut total = 0.0;
    for t in (spec.terms)(c, mu, k2) {
        if t.coef == 0.0 {
            continue;
        }
        // (sn²u)^e = u^{2e} (sn u / u)^{2e}; the power of u is the quadrature weight.
        let g = |u: f64| {
            let j = modulus.jacobi(u);
            let mut v = modulus.sn_over_u(u).powf(2.0 * t.sn2_power);
            if t.cn {
                v *= j.cn;
            }
            if t.dn {
                v *= j.dn;
            }
            v
        };
        let r = convolve(t.kernel, g, kernel, 2.0 * t.sn2_power, tol)?;
        total += t.coef * r.value;
    }
    Ok(total)
}

/// `Hn(c, μ, P; w)` for family `spec` at `σ`, from the kernel quadratures.
pub fn eval_family(spec: &FamilySpec, c: f64, mu: f64, sigma: f64, w: f64, k2: f64) -> Result<f64> {
    Ok(eval_family_raw(spec, c, mu, sigma, w, k2)? / (spec.prefactor)(w, c, k2))
}

/// `Hn(0, μ, P; w)` for families 1–4.
///
/// As `c → 0` the term `2c(sn²u)^{c−1/2}` concentrates at `u = 0`, so the
/// COS part tends to `cos(2√σθ)` and only the `4μ` SIN part survives.
/// Families 5–8 have no separate limit formula.
pub fn limit_c0(spec: &FamilySpec, mu: f64, sigma: f64, w: f64, k2: f64) -> Result<f64> {
    check_family_domain(w, k2)?;
    let modulus = Modulus::new(k2)?;
    let theta = modulus.theta_of_w(w)?;
    let kernel = KernelSpec::new(sigma, theta)?;
    let (cn, dn) = match spec.id {
        1 => {
            // SIN[4μ] = (μ/σ)(1 − cos 2√σθ) = 8μ·sin_kernel(θ/2)², stable at σ = 0
            let half = kernel.sin_kernel(0.5 * theta);
            return Ok(kernel.cos_kernel(theta) + 8.0 * mu * half * half);
        }
        2 => (true, false),
        3 => (false, true),
        4 => (true, true),
        id => {
            return Err(Error::Domain(format!(
                "family {id} has no c -> 0 limit formula; evaluate at c > 0"
            )))
        }
    };
    let sin_part = if mu == 0.0 {
        0.0
    } else {
        let g = |u: f64| {
            let j = modulus.jacobi(u);
            (if cn { j.cn } else { 1.0 }) * (if dn { j.dn } else { 1.0 })
        };
        4.0 * mu * convolve(Kernel::Sin, g, kernel, 0.0, 1e-13)?.value
    };
    Ok((kernel.cos_kernel(theta) + sin_part) / (spec.prefactor)(w, 0.0, k2))
}
