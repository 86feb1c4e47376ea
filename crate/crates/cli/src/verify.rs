//! Invariant grids run by `heun verify <suite>`.

use assoc_heun::birthdeath::{km_rows, solve_kolmogorov_with};
use assoc_heun::heun::{AssocParams, HeunParams};
use assoc_heun::stieltjes::SCRates;
use assoc_heun::transforms::{transform, Couple, Transform};
use clap::ValueEnum;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::{closed_form_row, stieltjes_row, FamilyCase};
use crate::config::RunConfig;
use crate::output::{num, Report, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    ClosedForms,
    Transforms,
    Stieltjes,
    Bd,
}

#[derive(Debug, Clone, Serialize)]
pub struct Case {
    pub case: String,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    /// `abs_diff` or `rel_diff`.
    pub metric: &'static str,
    pub tolerance: f64,
    pub passed: bool,
    pub n_cases: usize,
    pub worst: Case,
    pub cases: Vec<Case>,
}

impl Report for VerifyReport {
    fn table(&self) -> Table {
        let mut t = Table::new(&["case", "value"]);
        for c in &self.cases {
            t.push(vec![c.case.clone(), num(c.value)]);
        }
        t
    }
}

fn finish(suite: Suite, metric: &'static str, tolerance: f64, cases: Vec<Case>) -> VerifyReport {
    // NaN counts as a breach and ranks above every finite value
    let rank = |c: &Case| if c.value.is_nan() { f64::INFINITY } else { c.value };
    let worst = cases
        .iter()
        .max_by(|a, b| rank(a).total_cmp(&rank(b)))
        .cloned()
        .unwrap_or(Case {
            case: "none".into(),
            value: 0.0,
        });
    VerifyReport {
        suite,
        metric,
        tolerance,
        passed: cases.iter().all(|c| c.value <= tolerance),
        n_cases: cases.len(),
        worst,
        cases,
    }
}

fn closed_forms(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let mut grid = Vec::new();
    for id in 1..=8u8 {
        for c in [0.3, 0.75, 1.2] {
            for mu in [0.0, 0.5] {
                for sigma in [0.25, 1.0, -0.5] {
                    for k2 in [0.25, 0.64] {
                        for w in [0.1, 0.3, 0.6] {
                            grid.push((FamilyCase { id, c, mu, sigma, k2 }, w));
                        }
                    }
                }
            }
        }
    }
    let cases = grid
        .par_iter()
        .map(|(f, w)| {
            let row = closed_form_row(f, *w, cfg)?;
            Ok(Case {
                case: format!("family={} c={} mu={} sigma={} k2={} w={w}", f.id, f.c, f.mu, f.sigma, f.k2),
                value: row.abs_diff,
            })
        })
        .collect::<Result<_, CliError>>()?;
    Ok(finish(Suite::ClosedForms, "abs_diff", 1e-6, cases))
}

fn transforms(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let mut grid = Vec::new();
    for (x, gamma, c) in [(0.3, 0.9, 0.4), (0.5, 1.6, 0.5), (0.8, 1.1, 0.05)] {
        for k2 in [0.0, 0.49, 1.0] {
            for couple in [Couple::Alpha, Couple::Beta] {
                let (alpha, beta) = match couple {
                    Couple::Alpha => (x, 1.1),
                    Couple::Beta => (1.1, x),
                };
                let a = AssocParams::new(HeunParams::with_fuchs(alpha, beta, gamma, 0.6, 0.35, k2)?, c, 0.4)?;
                for kind in [Transform::First, Transform::Second] {
                    for w in [-0.5, 0.4, 0.9] {
                        grid.push((a, couple, kind, w));
                    }
                }
            }
        }
    }
    let cases = grid
        .par_iter()
        .map(|&(a, couple, kind, w)| {
            let r = transform(kind, &a, w, couple, cfg.quad_tol)?;
            Ok(Case {
                case: format!(
                    "{kind:?} {couple:?} exponent={} gamma={} c={} k2={} w={w}",
                    match couple {
                        Couple::Alpha => a.base.alpha,
                        Couple::Beta => a.base.beta,
                    },
                    a.base.gamma,
                    a.c,
                    a.base.k2
                )
                .to_lowercase(),
                value: r.abs_diff,
            })
        })
        .collect::<Result<_, CliError>>()?;
    Ok(finish(Suite::Transforms, "abs_diff", 1e-8, cases))
}

fn stieltjes(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let mut grid = Vec::new();
    for c in [0.6, 0.75, 1.5] {
        for mu in [0.0, 1.0] {
            for k2 in [0.25, 0.5, 0.81] {
                for z in [-0.5, -1.0, -5.0, -10.0] {
                    grid.push((c, mu, k2, Complex64::new(z, 0.0)));
                }
            }
        }
    }
    grid.push((0.75, 0.5, 0.5, Complex64::new(-1.0, 0.5)));
    grid.push((1.5, 1.0, 0.25, Complex64::new(2.0, -1.0)));
    let cases = grid
        .par_iter()
        .map(|&(c, mu, k2, z)| {
            let row = stieltjes_row(&SCRates::new(c, mu, k2)?, z, cfg.cf_tol)?;
            Ok(Case {
                case: format!("c={c} mu={mu} k2={k2} z={z}"),
                value: row.rel_diff,
            })
        })
        .collect::<Result<_, CliError>>()?;
    Ok(finish(Suite::Stieltjes, "rel_diff", 1e-6, cases))
}

fn bd(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let kc = cfg.kolmogorov();
    let ps = [0.5, 1.0, 2.0, 5.0];
    let mut cases = Vec::new();
    for mu in [0.0, 1.0] {
        let r = SCRates::new(0.75, mu, 0.5)?;
        let traj = solve_kolmogorov_with(&r, &kc)?;
        for row in km_rows(&r, &traj, &ps)? {
            cases.push(Case {
                case: format!("c={} mu={} k2={} p={}", r.c, r.mu, r.k2, row.p),
                value: row.rel_diff,
            });
        }
    }
    Ok(finish(Suite::Bd, "rel_diff", 1e-3, cases))
}

pub fn run(suite: Suite, cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    match suite {
        Suite::ClosedForms => closed_forms(cfg),
        Suite::Transforms => transforms(cfg),
        Suite::Stieltjes => stieltjes(cfg),
        Suite::Bd => bd(cfg),
    }
}
