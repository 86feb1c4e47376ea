//! Gauss hypergeometric `₂F₁(a, b; c; z)` by direct power series, `|z| < 1`.
//!
//! No transformation formulas: the callers stay inside `|z| ≤ 0.9` (or slightly
//! above for the birth-death bound), where the series converges geometrically.

use num_complex::Complex64;

use crate::{Error, Result};

const MAX_TERMS: usize = 400_000;

fn check_args(c_re: f64, c_im: f64, z: f64) -> Result<()> {
    if !(z.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "2F1 power series needs |z| < 1, got {z}"
        )));
    }
    if c_im == 0.0 && c_re <= 0.0 && c_re.fract() == 0.0 {
        return Err(Error::Parameter(format!(
            "2F1 lower parameter c = {c_re} is a non-positive integer"
        )));
    }
    Ok(())
}

pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let v = hyp2f1_complex(a.into(), b.into(), c.into(), z)?;
    Ok(v.re)
}

pub fn hyp2f1_complex(a: Complex64, b: Complex64, c: Complex64, z: f64) -> Result<Complex64> {
    check_args(c.re, c.im, z)?;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut quiet = 0;
    for n in 0..MAX_TERMS {
        let k = n as f64;
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm().max(1e-300) {
            quiet += 1;
            if quiet >= 3 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::Truncation {
        n: MAX_TERMS,
        tail: term.norm(),
        tol: 1e-17,
        radius: z.abs(),
    })
}
