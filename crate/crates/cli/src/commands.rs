//! One function per subcommand; each returns a serializable report.

use std::path::Path;

use assoc_heun::birthdeath::{km_rows, solve_kolmogorov_with, KmRow, KolmogorovConfig, Stepper};
use assoc_heun::closed_forms::{eval_family_raw_with, family, limit_c0};
use assoc_heun::heun::{assoc_series, heun_series, AssocParams, CoeffSeries, HeunParams, SeriesConfig};
use assoc_heun::stieltjes::{cf_markov, stieltjes_s, SCRates};
use assoc_heun::transforms::{transform, Couple, Transform, TransformReport};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{num, Report, Table};
use crate::CliError;

fn check_radius(ws: &[f64], r_max: f64) -> Result<(), CliError> {
    match ws.iter().find(|w| !(w.abs() <= r_max)) {
        Some(w) => Err(CliError::Usage(format!("|w| = {} exceeds r_max = {r_max}; raise r_max", w.abs()))),
        None => Ok(()),
    }
}

#[derive(Debug, Serialize)]
pub struct EvalRow {
    pub w: f64,
    pub value: f64,
    pub n_terms: usize,
    pub tail_estimate: f64,
}

#[derive(Debug, Serialize)]
pub struct EvalReport<P> {
    pub params: P,
    #[serde(rename = "N")]
    pub n: usize,
    pub params_hash: String,
    pub series_tol: f64,
    pub r_max: f64,
    pub rows: Vec<EvalRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<CoeffSeries>,
}

impl<P: Serialize> Report for EvalReport<P> {
    fn table(&self) -> Table {
        let mut t = Table::new(&["w", "value", "n_terms", "tail_estimate"]);
        for r in &self.rows {
            t.push(vec![num(r.w), num(r.value), r.n_terms.to_string(), num(r.tail_estimate)]);
        }
        t
    }
}

fn eval_rows(series: &CoeffSeries, ws: &[f64]) -> Result<Vec<EvalRow>, CliError> {
    ws.iter()
        .map(|&w| {
            let v = series.eval_detailed(w)?;
            Ok(EvalRow {
                w,
                value: v.value,
                n_terms: v.n_terms,
                tail_estimate: v.tail_estimate,
            })
        })
        .collect()
}

fn eval_report<P>(params: P, series: CoeffSeries, ws: &[f64], cfg: &SeriesConfig, keep: bool) -> Result<EvalReport<P>, CliError> {
    Ok(EvalReport {
        params,
        n: series.order(),
        params_hash: series.params_hash().to_string(),
        series_tol: cfg.tol,
        r_max: cfg.r_max,
        rows: eval_rows(&series, ws)?,
        series: keep.then_some(series),
    })
}

pub fn eval(p: HeunParams, ws: &[f64], cfg: &RunConfig, keep: bool) -> Result<EvalReport<HeunParams>, CliError> {
    check_radius(ws, cfg.r_max)?;
    let sc = cfg.series();
    let series = heun_series(&p, &sc)?;
    eval_report(p, series, ws, &sc, keep)
}

pub fn assoc_eval(a: AssocParams, ws: &[f64], cfg: &RunConfig, keep: bool) -> Result<EvalReport<AssocParams>, CliError> {
    check_radius(ws, cfg.r_max)?;
    let sc = cfg.series();
    let series = assoc_series(&a, &sc)?;
    eval_report(a, series, ws, &sc, keep)
}

#[derive(Debug, Serialize)]
pub struct ClosedFormRow {
    pub w: f64,
    pub prefactor: f64,
    /// `prefactor · Hn` with `Hn` from the power series.
    pub series_value: f64,
    /// `prefactor · Hn` from the elliptic kernel integrals.
    pub closed_form_value: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Serialize)]
pub struct ClosedFormReport {
    pub family: u8,
    pub c: f64,
    pub mu: f64,
    pub sigma: f64,
    pub k2: f64,
    pub params: AssocParams,
    pub quad_tol: f64,
    pub rows: Vec<ClosedFormRow>,
}

impl Report for ClosedFormReport {
    fn table(&self) -> Table {
        let mut t = Table::new(&["w", "prefactor", "series_value", "closed_form_value", "abs_diff"]);
        for r in &self.rows {
            t.push(vec![num(r.w), num(r.prefactor), num(r.series_value), num(r.closed_form_value), num(r.abs_diff)]);
        }
        t
    }
}

pub struct FamilyCase {
    pub id: u8,
    pub c: f64,
    pub mu: f64,
    pub sigma: f64,
    pub k2: f64,
}

/// Series and kernel-integral values of `prefactor · Hn` at one `w`.
pub fn closed_form_row(f: &FamilyCase, w: f64, cfg: &RunConfig) -> Result<ClosedFormRow, CliError> {
    let spec = family(f.id)?;
    let a = spec.assoc_params(f.c, f.mu, f.sigma, f.k2)?;
    let sc = SeriesConfig {
        r_max: cfg.r_max.max(w.abs()),
        ..cfg.series()
    };
    let prefactor = (spec.prefactor)(w, f.c, f.k2);
    let series_value = prefactor * assoc_series(&a, &sc)?.eval(w)?;
    let closed_form_value = if f.c == 0.0 {
        prefactor * limit_c0(spec, f.mu, f.sigma, w, f.k2)?
    } else {
        eval_family_raw_with(spec, f.c, f.mu, f.sigma, w, f.k2, cfg.quad_tol)?
    };
    Ok(ClosedFormRow {
        w,
        prefactor,
        series_value,
        closed_form_value,
        abs_diff: (series_value - closed_form_value).abs(),
    })
}

pub fn closed_form(f: FamilyCase, ws: &[f64], cfg: &RunConfig) -> Result<ClosedFormReport, CliError> {
    let params = family(f.id)?.assoc_params(f.c, f.mu, f.sigma, f.k2)?;
    let rows = ws.par_iter().map(|&w| closed_form_row(&f, w, cfg)).collect::<Result<_, _>>()?;
    Ok(ClosedFormReport {
        family: f.id,
        c: f.c,
        mu: f.mu,
        sigma: f.sigma,
        k2: f.k2,
        params,
        quad_tol: cfg.quad_tol,
        rows,
    })
}

#[derive(Debug, Serialize)]
pub struct TransformCommandReport {
    pub transform: Transform,
    pub couple: Couple,
    pub quad_tol: f64,
    pub rows: Vec<TransformReport>,
}

impl Report for TransformCommandReport {
    fn table(&self) -> Table {
        let mut t = Table::new(&["w", "lhs", "rhs", "abs_diff", "c_out"]);
        for r in &self.rows {
            t.push(vec![num(r.w), num(r.lhs), num(r.rhs), num(r.abs_diff), num(r.params_out.c)]);
        }
        t
    }
}

pub fn transforms(
    kind: Transform,
    couple: Couple,
    a: AssocParams,
    ws: &[f64],
    cfg: &RunConfig,
) -> Result<TransformCommandReport, CliError> {
    let rows = ws
        .par_iter()
        .map(|&w| transform(kind, &a, w, couple, cfg.quad_tol))
        .collect::<Result<_, _>>()?;
    Ok(TransformCommandReport {
        transform: kind,
        couple,
        quad_tol: cfg.quad_tol,
        rows,
    })
}

#[derive(Debug, Serialize)]
pub struct StieltjesRow {
    pub z: Complex64,
    pub s_d_ratio: Complex64,
    pub s_cf: Complex64,
    pub rel_diff: f64,
    pub pole: bool,
}

#[derive(Debug, Serialize)]
pub struct StieltjesReport {
    pub rates: SCRates,
    pub cf_tol: f64,
    pub rows: Vec<StieltjesRow>,
}

impl Report for StieltjesReport {
    fn table(&self) -> Table {
        let mut t = Table::new(&[
            "z_re",
            "z_im",
            "s_d_ratio_re",
            "s_d_ratio_im",
            "s_cf_re",
            "s_cf_im",
            "rel_diff",
        ]);
        for r in &self.rows {
            t.push(vec![
                num(r.z.re),
                num(r.z.im),
                num(r.s_d_ratio.re),
                num(r.s_d_ratio.im),
                num(r.s_cf.re),
                num(r.s_cf.im),
                num(r.rel_diff),
            ]);
        }
        t
    }
}

pub fn stieltjes_row(r: &SCRates, z: Complex64, cf_tol: f64) -> Result<StieltjesRow, CliError> {
    let d = stieltjes_s(r, z)?;
    let cf = cf_markov(r, z, cf_tol)?;
    Ok(StieltjesRow {
        z,
        s_d_ratio: d.value,
        s_cf: cf.value,
        rel_diff: (d.value - cf.value).norm() / cf.value.norm(),
        pole: d.pole,
    })
}

pub fn stieltjes(r: SCRates, zs: &[Complex64], cfg: &RunConfig) -> Result<StieltjesReport, CliError> {
    let rows = zs.par_iter().map(|&z| stieltjes_row(&r, z, cfg.cf_tol)).collect::<Result<_, _>>()?;
    Ok(StieltjesReport {
        rates: r,
        cf_tol: cfg.cf_tol,
        rows,
    })
}

#[derive(Debug, Serialize)]
pub struct BdReport {
    pub rates: SCRates,
    #[serde(rename = "N_trunc")]
    pub n_trunc: usize,
    pub t_max: f64,
    pub dt: f64,
    pub stepper: Stepper,
    pub rows: Vec<KmRow>,
}

impl Report for BdReport {
    fn table(&self) -> Table {
        let mut t = Table::new(&["p", "lhs", "rhs", "rel_diff"]);
        for r in &self.rows {
            t.push(vec![num(r.p), num(r.lhs), num(r.rhs), num(r.rel_diff)]);
        }
        t
    }
}

pub fn bd_check(
    r: SCRates,
    ps: &[f64],
    stepper: Stepper,
    trajectory: Option<&Path>,
    cfg: &RunConfig,
) -> Result<BdReport, CliError> {
    let kc = KolmogorovConfig {
        stepper,
        ..cfg.kolmogorov()
    };
    let traj = solve_kolmogorov_with(&r, &kc)?;
    if let Some(path) = trajectory {
        std::fs::write(path, traj.to_csv())
            .map_err(|e| CliError::Usage(format!("cannot write trajectory {}: {e}", path.display())))?;
    }
    let rows = km_rows(&r, &traj, ps)?;
    Ok(BdReport {
        rates: r,
        n_trunc: kc.n_trunc,
        t_max: traj.t_max(),
        dt: traj.dt,
        stepper,
        rows,
    })
}
