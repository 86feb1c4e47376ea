//! Jacobi elliptic functions with parameter `m = k²`, `0 ≤ k² < 1`.
//!
//! `sn`, `cn`, `dn` and `K` come from the descending Landen (AGM) sequence;
//! the inverse `θ(w)` of `√w = sn(θ; k²)` is computed from its defining
//! integral.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::quadrature::{tanh_sinh, QuadConfig};
use crate::{Error, Result};

const MAX_LANDEN_STEPS: usize = 64;

/// Values of `sn`, `cn`, `dn` at one argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Parameter `k²` with its complete integral `K` and the AGM sequence used
/// by [`Modulus::jacobi`].
#[derive(Debug, Clone, PartialEq)]
pub struct Modulus {
    k2: f64,
    complete_k: f64,
    // (a_n, c_n) of the descending Landen sequence, n = 0..=N.
    landen: Vec<(f64, f64)>,
}

fn check_k2(k2: f64) -> Result<()> {
    if !(0.0..1.0).contains(&k2) {
        return Err(Error::Domain(format!(
            "elliptic parameter k2 = {k2} outside [0, 1)"
        )));
    }
    Ok(())
}

impl Modulus {
    pub fn new(k2: f64) -> Result<Self> {
        check_k2(k2)?;
        let mut a = 1.0f64;
        let mut b = (1.0 - k2).sqrt();
        let mut c = k2.sqrt();
        let mut landen = vec![(a, c)];
        while c > f64::EPSILON * a && landen.len() <= MAX_LANDEN_STEPS {
            let next_a = 0.5 * (a + b);
            c = 0.5 * (a - b);
            b = (a * b).sqrt();
            a = next_a;
            landen.push((a, c));
        }
        Ok(Modulus {
            k2,
            complete_k: FRAC_PI_2 / a,
            landen,
        })
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    /// Quarter period `K(k²)`.
    pub fn complete_k(&self) -> f64 {
        self.complete_k
    }

    /// `(sn, cn, dn)(u; k²)`.
    pub fn jacobi(&self, u: f64) -> JacobiTriple {
        let depth = self.landen.len() - 1;
        let (a_n, _) = self.landen[depth];
        let mut phi = (depth as f64).exp2() * a_n * u;
        for &(a, c) in self.landen[1..].iter().rev() {
            phi = 0.5 * (phi + (c / a * phi.sin()).asin());
        }
        let (sn, cn) = phi.sin_cos();
        let dn = (1.0 - self.k2 * sn * sn).sqrt();
        JacobiTriple { sn, cn, dn }
    }

    /// `sn(u)/u`, continuous at `u = 0`.
    pub fn sn_over_u(&self, u: f64) -> f64 {
        if u == 0.0 {
            1.0
        } else {
            self.jacobi(u).sn / u
        }
    }

    /// Inverse of `w = sn²(θ)` on the real branch: `θ(w) = ∫₀^√w dt/√((1−t²)(1−k²t²))`.
    pub fn theta_of_w(&self, w: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&w) {
            return Err(Error::Domain(format!("theta(w) needs 0 <= w < 1, got {w}")));
        }
        if w == 0.0 {
            return Ok(0.0);
        }
        // t = √w·s; the factors 1 − w s² are formed from the exact distance to s = 1.
        let k2 = self.k2;
        let integrand = |s: f64, _: f64, to_one: f64| {
            let one_minus_s2 = to_one * (1.0 + s);
            let p = (1.0 - w) + w * one_minus_s2;
            let q = (1.0 - k2 * w) + k2 * w * one_minus_s2;
            1.0 / (p * q).sqrt()
        };
        let cfg = QuadConfig {
            abs_tol: 0.0,
            rel_tol: 1e-14,
            max_levels: 14,
            ..Default::default()
        };
        let r = tanh_sinh(integrand, 0.0, 1.0, &cfg)?;
        Ok(w.sqrt() * r.value)
    }
}

/// Arithmetic-geometric mean of two positive numbers.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..MAX_LANDEN_STEPS {
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    a
}

/// Complete elliptic integral of the first kind `K(k²)`.
pub fn complete_k(k2: f64) -> Result<f64> {
    Ok(Modulus::new(k2)?.complete_k())
}

pub fn jacobi(u: f64, k2: f64) -> Result<JacobiTriple> {
    Ok(Modulus::new(k2)?.jacobi(u))
}

pub fn theta_of_w(w: f64, k2: f64) -> Result<f64> {
    Modulus::new(k2)?.theta_of_w(w)
}
