//! Heun and associated-Heun functions analytic at `w = 0`.
//!
//! `Hn(c, μ, P; w) = Σ F_n wⁿ` where the `F_n` obey the three-term recurrence
//!
//! ```text
//! (λ_n + μ_n + γ_n − x) F_n = μ_{n+1} F_{n+1} + λ_{n−1} F_{n−1},   F_{−1} = 0, F_0 = 1,
//! λ_n = k²(n+c+α)(n+c+β),  μ_n = (n+c)(n+c+γ−1) + μ·δ_{n0},  γ_n = (1−k²)δ(n+c),
//! x   = s + k²(α+c)(β+c) − k²δc.
//! ```
//!
//! With `c = μ = 0` this is the ordinary Heun recurrence and `Hn` solves
//!
//! ```text
//! w(1−w)(1−k²w)F'' + [γ(1−w)(1−k²w) − δw(1−k²w) − εk²w(1−w)]F' + (αβk²w + s)F = 0.
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::hypergeometric::hyp2f1_complex;
use crate::{Error, Result};

fn is_non_positive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// The array `P = {α, β; γ, δ, ε; s}` together with `k²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeunParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub eps: f64,
    /// Accessory parameter.
    pub s: f64,
    pub k2: f64,
}

impl HeunParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64, eps: f64, s: f64, k2: f64) -> Result<Self> {
        let p = HeunParams {
            alpha,
            beta,
            gamma,
            delta,
            eps,
            s,
            k2,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds the array with `ε` fixed by the Fuchs relation.
    pub fn with_fuchs(alpha: f64, beta: f64, gamma: f64, delta: f64, s: f64, k2: f64) -> Result<Self> {
        Self::new(alpha, beta, gamma, delta, alpha + beta - gamma - delta + 1.0, s, k2)
    }

    /// `α + β − γ − δ − ε + 1`, zero for a valid array.
    pub fn fuchs_residual(&self) -> f64 {
        self.alpha + self.beta - self.gamma - self.delta - self.eps + 1.0
    }

    fn check_fuchs_and_modulus(&self) -> Result<()> {
        let values = [self.alpha, self.beta, self.gamma, self.delta, self.eps, self.s, self.k2];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("parameters must be finite".into()));
        }
        let scale = 1.0f64.max(
            self.alpha.abs() + self.beta.abs() + self.gamma.abs() + self.delta.abs() + self.eps.abs(),
        );
        if self.fuchs_residual().abs() > 1e-12 * scale {
            return Err(Error::Parameter(format!(
                "Fuchs relation alpha + beta = gamma + delta + eps - 1 violated: {} + {} != {} + {} + {} - 1",
                self.alpha, self.beta, self.gamma, self.delta, self.eps
            )));
        }
        if !(0.0..=1.0).contains(&self.k2) {
            return Err(Error::Parameter(format!("k2 = {} outside [0, 1]", self.k2)));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check_fuchs_and_modulus()?;
        if is_non_positive_integer(self.gamma) {
            return Err(Error::Parameter(format!(
                "gamma = {} is a non-positive integer (mu_n would vanish)",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Heun array extended by the association parameter `c` and the
/// co-recursivity parameter `μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssocParams {
    pub base: HeunParams,
    pub c: f64,
    pub mu: f64,
}

impl AssocParams {
    pub fn new(base: HeunParams, c: f64, mu: f64) -> Result<Self> {
        let a = AssocParams { base, c, mu };
        a.validate()?;
        Ok(a)
    }

    /// `c = μ = 0`.
    pub fn plain(base: HeunParams) -> Self {
        AssocParams { base, c: 0.0, mu: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.check_fuchs_and_modulus()?;
        if !(self.c.is_finite() && self.mu.is_finite()) {
            return Err(Error::Parameter("c and mu must be finite".into()));
        }
        if is_non_positive_integer(1.0 + self.c) {
            return Err(Error::Parameter(format!(
                "1 + c = {} is a non-positive integer",
                1.0 + self.c
            )));
        }
        if is_non_positive_integer(self.base.gamma + self.c) {
            return Err(Error::Parameter(format!(
                "gamma + c = {} is a non-positive integer",
                self.base.gamma + self.c
            )));
        }
        Ok(())
    }

    /// The monic variable `x = s + k²(α+c)(β+c) − k²δc`.
    pub fn monic_variable(&self) -> f64 {
        let p = &self.base;
        p.s + p.k2 * (p.alpha + self.c) * (p.beta + self.c) - p.k2 * p.delta * self.c
    }

    fn hash(&self) -> String {
        let p = &self.base;
        let mut hasher = Sha256::new();
        for v in [p.alpha, p.beta, p.gamma, p.delta, p.eps, p.s, p.k2, self.c, self.mu] {
            hasher.update(v.to_le_bytes());
        }
        hasher.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Birth rate `λ_n`, death rate `μ_n` and killing rate `γ_n` at one `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateTriple {
    pub lam: f64,
    pub mu_n: f64,
    pub gam: f64,
}

pub fn heun_rates(p: &HeunParams, n: usize) -> RateTriple {
    let n = n as f64;
    RateTriple {
        lam: p.k2 * (n + p.alpha) * (n + p.beta),
        mu_n: n * (n + p.gamma - 1.0),
        gam: (1.0 - p.k2) * p.delta * n,
    }
}

pub fn assoc_rates(a: &AssocParams, n: usize) -> RateTriple {
    let p = &a.base;
    let m = n as f64 + a.c;
    let bump = if n == 0 { a.mu } else { 0.0 };
    RateTriple {
        lam: p.k2 * (m + p.alpha) * (m + p.beta),
        mu_n: m * (m + p.gamma - 1.0) + bump,
        gam: (1.0 - p.k2) * p.delta * m,
    }
}

/// Runs the recurrence `F_0..=F_last` for the given rates and diagonal shift `x`.
/// The diagonal is formed as `(λ_n − λ_0) + μ_n + γ_n − shift` with `shift = x − λ_0`,
/// so the cancellation at `n = 0` is exact.
fn run_recurrence<R: Fn(usize) -> RateTriple>(rates: R, shift: f64, last: usize) -> Result<Vec<f64>> {
    let mut coeffs = Vec::with_capacity(last + 1);
    coeffs.push(1.0);
    let mut previous_lam = 0.0;
    let mut current = rates(0);
    let lam0 = current.lam;
    for n in 0..last {
        let next = rates(n + 1);
        if next.mu_n == 0.0 {
            return Err(Error::Parameter(format!(
                "mu_{} = 0: recurrence cannot be solved for F_{}",
                n + 1,
                n + 1
            )));
        }
        let below = if n == 0 { 0.0 } else { previous_lam * coeffs[n - 1] };
        let diag = (current.lam - lam0) + current.mu_n + current.gam - shift;
        let f_next = (diag * coeffs[n] - below) / next.mu_n;
        coeffs.push(f_next);
        previous_lam = current.lam;
        current = next;
    }
    Ok(coeffs)
}

/// Truncation policy for [`heun_series`] / [`assoc_series`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    /// Largest `|w|` the series must serve.
    pub r_max: f64,
    /// Bound on the estimated tail, relative to `max(1, max_n |F_n| r_maxⁿ)`.
    pub tol: f64,
    pub initial_terms: usize,
    pub max_terms: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            r_max: 0.9,
            tol: 1e-15,
            initial_terms: 64,
            max_terms: 1 << 16,
        }
    }
}

/// Number of trailing terms inspected by the tail estimate.
const TAIL_WINDOW: usize = 10;

/// Truncated coefficient sequence `F_0..=F_N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoeffSeries {
    params: AssocParams,
    #[serde(rename = "N")]
    n: usize,
    coeffs: Vec<f64>,
    params_hash: String,
    tol: f64,
}

/// A series value with its truncation metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    pub n_terms: usize,
    pub tail_estimate: f64,
}

/// `F`, `F'`, `F''` and `(F − 1)/w` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub shifted: f64,
}

impl CoeffSeries {
    fn new(params: AssocParams, coeffs: Vec<f64>, tol: f64) -> Self {
        CoeffSeries {
            n: coeffs.len() - 1,
            params_hash: params.hash(),
            params,
            coeffs,
            tol,
        }
    }

    pub fn params(&self) -> &AssocParams {
        &self.params
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Truncation order `N`.
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn params_hash(&self) -> &str {
        &self.params_hash
    }

    /// Estimated remainder `Σ_{n>N} |F_n| ρⁿ` and the term scale at radius `ρ`.
    pub fn tail_at(&self, radius: f64) -> (f64, f64) {
        let mut power = 1.0;
        let mut scale = 1.0f64;
        let mut last = 0.0f64;
        let window_start = self.coeffs.len().saturating_sub(TAIL_WINDOW);
        for (n, f) in self.coeffs.iter().enumerate() {
            let term = f.abs() * power;
            scale = scale.max(term);
            if n >= window_start {
                last = last.max(term);
            }
            power *= radius;
        }
        let tail = if radius == 0.0 {
            0.0
        } else if radius < 1.0 {
            last * radius / (1.0 - radius)
        } else {
            f64::INFINITY
        };
        (tail, scale)
    }

    fn check_tail(&self, radius: f64) -> Result<f64> {
        let (tail, scale) = self.tail_at(radius);
        if tail > self.tol * scale {
            return Err(Error::Truncation {
                n: self.n,
                tail,
                tol: self.tol * scale,
                radius,
            });
        }
        Ok(tail)
    }

    pub fn eval_detailed(&self, w: f64) -> Result<SeriesValue> {
        let tail_estimate = self.check_tail(w.abs())?;
        let value = self.coeffs.iter().rev().fold(0.0, |acc, f| acc * w + f);
        Ok(SeriesValue {
            value,
            n_terms: self.n + 1,
            tail_estimate,
        })
    }

    pub fn eval(&self, w: f64) -> Result<f64> {
        Ok(self.eval_detailed(w)?.value)
    }

    /// Term-wise differentiated series at `w`.
    pub fn jet(&self, w: f64) -> Result<SeriesJet> {
        self.check_tail(w.abs())?;
        let mut jet = SeriesJet {
            value: 0.0,
            d1: 0.0,
            d2: 0.0,
            shifted: 0.0,
        };
        for (n, &f) in self.coeffs.iter().enumerate().rev() {
            let k = n as f64;
            jet.value = jet.value * w + f;
            if n >= 1 {
                jet.shifted = jet.shifted * w + f;
                jet.d1 = jet.d1 * w + k * f;
            }
            if n >= 2 {
                jet.d2 = jet.d2 * w + k * (k - 1.0) * f;
            }
        }
        Ok(jet)
    }
}

/// `F_0..=F_N` of the ordinary Heun recurrence.
pub fn heun_coeffs(p: &HeunParams, n: usize) -> Result<CoeffSeries> {
    p.validate()?;
    let coeffs = run_recurrence(|k| heun_rates(p, k), p.s, n)?;
    Ok(CoeffSeries::new(AssocParams::plain(*p), coeffs, SeriesConfig::default().tol))
}

/// `F_0..=F_N` of the associated recurrence.
pub fn assoc_coeffs(a: &AssocParams, n: usize) -> Result<CoeffSeries> {
    a.validate()?;
    let shift = a.base.s - a.base.k2 * a.base.delta * a.c;
    let coeffs = run_recurrence(|k| assoc_rates(a, k), shift, n)?;
    Ok(CoeffSeries::new(*a, coeffs, SeriesConfig::default().tol))
}

fn grow_until_converged<B: Fn(usize) -> Result<CoeffSeries>>(build: B, cfg: &SeriesConfig) -> Result<CoeffSeries> {
    if !(cfg.r_max > 0.0 && cfg.r_max < 1.0 && cfg.tol > 0.0) {
        return Err(Error::Domain(format!(
            "series config needs 0 < r_max < 1 and tol > 0 (r_max {}, tol {})",
            cfg.r_max, cfg.tol
        )));
    }
    let mut n = cfg.initial_terms.max(TAIL_WINDOW);
    loop {
        let mut series = build(n)?;
        series.tol = cfg.tol;
        match series.check_tail(cfg.r_max) {
            Ok(_) => return Ok(series),
            Err(e) if n >= cfg.max_terms => return Err(e),
            Err(_) => n = (2 * n).min(cfg.max_terms),
        }
    }
}

/// Heun coefficients with `N` grown geometrically until the tail at `r_max` passes.
pub fn heun_series(p: &HeunParams, cfg: &SeriesConfig) -> Result<CoeffSeries> {
    grow_until_converged(|n| heun_coeffs(p, n), cfg)
}

/// Associated-Heun coefficients with `N` grown geometrically until the tail at `r_max` passes.
pub fn assoc_series(a: &AssocParams, cfg: &SeriesConfig) -> Result<CoeffSeries> {
    grow_until_converged(|n| assoc_coeffs(a, n), cfg)
}

pub fn eval_series(series: &CoeffSeries, w: f64) -> Result<f64> {
    series.eval(w)
}

/// `G_n = (1+c)_n (γ+c)_n F_n`; `(−1)ⁿ G_n` is monic in the variable `x`.
pub fn monic_g(series: &CoeffSeries, c: f64, gamma: f64) -> Vec<f64> {
    let mut factor = 1.0;
    series
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, f)| {
            if n > 0 {
                let k = (n - 1) as f64;
                factor *= (1.0 + c + k) * (gamma + c + k);
            }
            factor * f
        })
        .collect()
}

/// `P′_α`: α′ = γ, β′ = β, γ′ = α, δ′ = δ+γ−α, ε′ = ε+γ−α; s, c, μ unchanged.
pub fn map_p_alpha(a: &AssocParams) -> AssocParams {
    let p = &a.base;
    let shift = p.gamma - p.alpha;
    AssocParams {
        base: HeunParams {
            alpha: p.gamma,
            gamma: p.alpha,
            delta: p.delta + shift,
            eps: p.eps + shift,
            ..*p
        },
        ..*a
    }
}

/// `P″_α`: α″ = 2−α, β″ = β+1−α, γ″ = γ+1−α, δ″ = δ+1−α, ε″ = ε+1−α,
/// s″ = s+(α−1)(γ+δ−α), c″ = c+α−1, μ″ = μ.
pub fn map_p_alpha2(a: &AssocParams) -> AssocParams {
    let p = &a.base;
    let shift = 1.0 - p.alpha;
    AssocParams {
        base: HeunParams {
            alpha: 2.0 - p.alpha,
            beta: p.beta + shift,
            gamma: p.gamma + shift,
            delta: p.delta + shift,
            eps: p.eps + shift,
            s: p.s + (p.alpha - 1.0) * (p.gamma + p.delta - p.alpha),
            k2: p.k2,
        },
        c: a.c + p.alpha - 1.0,
        mu: a.mu,
    }
}

fn swap_alpha_beta(a: &AssocParams) -> AssocParams {
    AssocParams {
        base: HeunParams {
            alpha: a.base.beta,
            beta: a.base.alpha,
            ..a.base
        },
        ..*a
    }
}

/// `P′_β`: the couples (α, α′) and (β, β′) exchanged.
pub fn map_p_beta(a: &AssocParams) -> AssocParams {
    swap_alpha_beta(&map_p_alpha(&swap_alpha_beta(a)))
}

/// `P″_β`: the couples (α, α″) and (β, β″) exchanged.
pub fn map_p_beta2(a: &AssocParams) -> AssocParams {
    swap_alpha_beta(&map_p_alpha2(&swap_alpha_beta(a)))
}

/// `P̃ = {1−γ+α, 1−γ+β; 2−γ, δ, ε; s−(1−γ)δ}`, so that `Hn(1−γ, 0, P; w) = Hn(P̃; w)`.
pub fn tilde(p: &HeunParams) -> HeunParams {
    let shift = 1.0 - p.gamma;
    HeunParams {
        alpha: p.alpha + shift,
        beta: p.beta + shift,
        gamma: 2.0 - p.gamma,
        s: p.s - shift * p.delta,
        ..*p
    }
}

fn real_part_checked(v: Complex64) -> Result<f64> {
    if v.im.abs() > 1e-12 * v.re.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "hypergeometric form left an imaginary part {:e}",
            v.im
        )));
    }
    Ok(v.re)
}

fn complex_sqrt(x: f64) -> Complex64 {
    Complex64::new(x, 0.0).sqrt()
}

/// `Hn(P; w)` at `k² = 0`: `₂F₁(r₊, r₋; γ; w)`, `r± = a ± √(a² + s)`, `a = (γ+δ−1)/2`.
pub fn special_k0(p: &HeunParams, w: f64) -> Result<f64> {
    p.validate()?;
    if p.k2 != 0.0 {
        return Err(Error::Domain(format!("special_k0 needs k2 = 0, got {}", p.k2)));
    }
    let a = 0.5 * (p.gamma + p.delta - 1.0);
    let root = complex_sqrt(a * a + p.s);
    let v = hyp2f1_complex(a + root, a - root, p.gamma.into(), w)?;
    real_part_checked(v)
}

/// `Hn(P; w)` at `k² = 1`: `(1−w)^r ₂F₁(r+α, r+β; γ; w)`, `r = a + √(a² − αβ − s)`,
/// `a = (γ−α−β)/2`.
pub fn special_k1(p: &HeunParams, w: f64) -> Result<f64> {
    p.validate()?;
    if p.k2 != 1.0 {
        return Err(Error::Domain(format!("special_k1 needs k2 = 1, got {}", p.k2)));
    }
    let a = 0.5 * (p.gamma - p.alpha - p.beta);
    let r = a + complex_sqrt(a * a - p.alpha * p.beta - p.s);
    let prefactor = (r * (1.0 - w).ln()).exp();
    let v = prefactor * hyp2f1_complex(r + p.alpha, r + p.beta, p.gamma.into(), w)?;
    real_part_checked(v)
}

/// Residual of the associated Heun equation at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeResidual {
    /// LHS − RHS.
    pub residual: f64,
    /// Largest magnitude among the individual terms.
    pub scale: f64,
}

impl OdeResidual {
    pub fn relative(&self) -> f64 {
        self.residual.abs() / self.scale
    }
}

/// Plugs the series into
///
/// ```text
/// w(1−w)(1−k²w)F'' + [(γ+2c)(1−w)(1−k²w) − δw(1−k²w) − εk²w(1−w)]F'
///   + [(α+c)(β+c)k²w + c(c+γ−1)(1−w)/w + s − δc]F = c(c+γ−1)/w + μ
/// ```
///
/// with the `1/w` terms combined as `c(c+γ−1)[(F−1)/w − F]`.
pub fn ode_residual(a: &AssocParams, series: &CoeffSeries, w: f64) -> Result<OdeResidual> {
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::Domain(format!("ode_residual needs 0 < w < 1, got {w}")));
    }
    let p = &a.base;
    let c = a.c;
    let jet = series.jet(w)?;
    let one_w = 1.0 - w;
    let one_kw = 1.0 - p.k2 * w;
    let assoc = c * (c + p.gamma - 1.0);
    let terms = [
        w * one_w * one_kw * jet.d2,
        ((p.gamma + 2.0 * c) * one_w * one_kw - p.delta * w * one_kw - p.eps * p.k2 * w * one_w) * jet.d1,
        ((p.alpha + c) * (p.beta + c) * p.k2 * w + p.s - p.delta * c) * jet.value,
        assoc * jet.shifted,
        -assoc * jet.value,
        -a.mu,
    ];
    let residual = terms.iter().sum();
    let scale = terms.iter().fold(f64::MIN_POSITIVE, |m, t| m.max(t.abs()));
    Ok(OdeResidual { residual, scale })
}
