//! Kolmogorov forward system of the associated Stieltjes–Carlitz birth-death
//! process started in state 0:
//!
//! ```text
//! dP_n/dt = λ_{n−1} P_{n−1} + μ_{n+1} P_{n+1} − (λ_n + μ_n) P_n,   P_n(0) = δ_{n0},
//! ```
//!
//! truncated at `N` with an absorbing boundary, and the Karlin–McGregor
//! closure `∫₀^∞ e^{−pt} P₀₀(t) dt = −S(−p)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::elliptic::Modulus;
use crate::hypergeometric::hyp2f1;
use crate::stieltjes::{stieltjes_s, SCRates};
use crate::{Error, Result};

/// Largest negative probability tolerated before a step is declared unstable.
const NEGATIVE_SLACK: f64 = 1e-9;

/// Probabilities `P₀ₙ(t)`, `n = 0..=N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BDState {
    pub probs: Vec<f64>,
    pub t: f64,
    pub rates: SCRates,
}

/// Samples of `P₀₀(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub p00: Vec<f64>,
    pub dt: f64,
    #[serde(rename = "N_trunc")]
    pub n_trunc: usize,
}

impl Trajectory {
    /// Wraps externally produced samples; times must start at 0 and increase.
    pub fn from_samples(times: Vec<f64>, p00: Vec<f64>) -> Result<Self> {
        if times.len() != p00.len() || times.len() < 2 {
            return Err(Error::Domain("trajectory needs at least two (t, p00) pairs of equal length".into()));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("trajectory times must start at 0 and increase".into()));
        }
        if p00.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::Domain("trajectory values must be non-negative".into()));
        }
        Ok(Trajectory {
            dt: times[1] - times[0],
            times,
            p00,
            n_trunc: 0,
        })
    }

    pub fn t_max(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// `t,p00` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,p00\n");
        for (t, p) in self.times.iter().zip(&self.p00) {
            out.push_str(&format!("{t},{p:e}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    /// Classical explicit Runge–Kutta, order 4.
    Rk4,
    /// Implicit two-step backward differentiation, order 2.
    Bdf2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KolmogorovConfig {
    pub n_trunc: usize,
    pub t_max: f64,
    /// Requested step; `None` picks `stability / max_n(λ_n + μ_n)`.
    pub dt: Option<f64>,
    pub stepper: Stepper,
    /// Spacing of the recorded samples.
    pub record_interval: f64,
    /// Bound on `dt · max_n(λ_n + μ_n)` used when `dt` is `None`.
    pub stability: f64,
}

impl Default for KolmogorovConfig {
    fn default() -> Self {
        KolmogorovConfig {
            n_trunc: 60,
            t_max: 10.0,
            dt: None,
            stepper: Stepper::Rk4,
            record_interval: 1e-3,
            stability: 0.1,
        }
    }
}

/// `stability / max_{n ≤ N}(λ_n + μ_n)`.
pub fn stable_dt(r: &SCRates, n_trunc: usize, stability: f64) -> f64 {
    let max_rate = (0..=n_trunc).map(|n| r.diagonal(n)).fold(0.0, f64::max);
    stability / max_rate
}

/// Time stepper for the truncated forward system.
#[derive(Debug, Clone)]
pub struct KolmogorovSolver {
    rates: SCRates,
    lam: Vec<f64>,
    mu: Vec<f64>,
    dt: f64,
    stepper: Stepper,
    state: BDState,
    previous: Option<Vec<f64>>,
}

impl KolmogorovSolver {
    pub fn new(rates: SCRates, n_trunc: usize, dt: f64, stepper: Stepper) -> Result<Self> {
        if n_trunc < 1 {
            return Err(Error::Domain("truncation needs N >= 1".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("time step must be positive, got {dt}")));
        }
        let mut probs = vec![0.0; n_trunc + 1];
        probs[0] = 1.0;
        Ok(KolmogorovSolver {
            lam: (0..=n_trunc).map(|n| rates.lam(n)).collect(),
            mu: (0..=n_trunc).map(|n| rates.mu_n(n)).collect(),
            rates,
            dt,
            stepper,
            state: BDState { probs, t: 0.0, rates },
            previous: None,
        })
    }

    pub fn state(&self) -> &BDState {
        &self.state
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn rates(&self) -> &SCRates {
        &self.rates
    }

    fn derivative(&self, p: &[f64], out: &mut [f64]) {
        let last = p.len() - 1;
        for n in 0..=last {
            let mut d = -(self.lam[n] + self.mu[n]) * p[n];
            if n > 0 {
                d += self.lam[n - 1] * p[n - 1];
            }
            if n < last {
                d += self.mu[n + 1] * p[n + 1];
            }
            out[n] = d;
        }
    }

    fn rk4_step(&mut self) {
        let h = self.dt;
        let p = &self.state.probs;
        let len = p.len();
        let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]);
        let mut tmp = vec![0.0; len];
        self.derivative(p, &mut k1);
        for i in 0..len {
            tmp[i] = p[i] + 0.5 * h * k1[i];
        }
        self.derivative(&tmp, &mut k2);
        for i in 0..len {
            tmp[i] = p[i] + 0.5 * h * k2[i];
        }
        self.derivative(&tmp, &mut k3);
        for i in 0..len {
            tmp[i] = p[i] + h * k3[i];
        }
        self.derivative(&tmp, &mut k4);
        for i in 0..len {
            tmp[i] = p[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        self.state.probs = tmp;
    }

    /// Solves `(scale·I − h·Q) x = rhs` by the Thomas algorithm.
    fn implicit_solve(&self, scale: f64, h: f64, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let diag: Vec<f64> = (0..n).map(|i| scale + h * (self.lam[i] + self.mu[i])).collect();
        // sub-diagonal (row i, column i−1) = −h λ_{i−1}; super-diagonal (row i, column i+1) = −h μ_{i+1}
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        c_prime[0] = if n > 1 { -h * self.mu[1] / diag[0] } else { 0.0 };
        d_prime[0] = rhs[0] / diag[0];
        for i in 1..n {
            let sub = -h * self.lam[i - 1];
            let denom = diag[i] - sub * c_prime[i - 1];
            if i + 1 < n {
                c_prime[i] = -h * self.mu[i + 1] / denom;
            }
            d_prime[i] = (rhs[i] - sub * d_prime[i - 1]) / denom;
        }
        let mut x = d_prime;
        for i in (0..n - 1).rev() {
            x[i] -= c_prime[i] * x[i + 1];
        }
        x
    }

    fn bdf2_step(&mut self) {
        let current = self.state.probs.clone();
        let next = match self.previous.take() {
            None => self.implicit_solve(1.0, self.dt, &current),
            Some(prev) => {
                let rhs: Vec<f64> = current.iter().zip(&prev).map(|(c, p)| 4.0 * c - p).collect();
                self.implicit_solve(3.0, 2.0 * self.dt, &rhs)
            }
        };
        self.previous = Some(current);
        self.state.probs = next;
    }

    /// One step of size `dt`.
    pub fn step(&mut self) -> Result<()> {
        match self.stepper {
            Stepper::Rk4 => self.rk4_step(),
            Stepper::Bdf2 => self.bdf2_step(),
        }
        self.state.t += self.dt;
        if let Some((state, &value)) = self
            .state
            .probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(**p >= -NEGATIVE_SLACK))
        {
            return Err(Error::Stability {
                t: self.state.t,
                state,
                value,
            });
        }
        Ok(())
    }

    /// Steps until `t` is reached to within half a step.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        while self.state.t < t - 0.5 * self.dt {
            self.step()?;
        }
        Ok(())
    }
}

/// RK4 solution with `dt` chosen by the caller, samples every `1e−3`.
pub fn solve_kolmogorov(r: &SCRates, n_trunc: usize, t_max: f64, dt: f64) -> Result<Trajectory> {
    solve_kolmogorov_with(
        r,
        &KolmogorovConfig {
            n_trunc,
            t_max,
            dt: Some(dt),
            ..Default::default()
        },
    )
}

pub fn solve_kolmogorov_with(r: &SCRates, cfg: &KolmogorovConfig) -> Result<Trajectory> {
    if !(cfg.t_max > 0.0 && cfg.record_interval > 0.0 && cfg.record_interval <= cfg.t_max) {
        return Err(Error::Domain(format!(
            "need 0 < record_interval <= t_max (got {}, {})",
            cfg.record_interval, cfg.t_max
        )));
    }
    let requested = cfg.dt.unwrap_or_else(|| stable_dt(r, cfg.n_trunc, cfg.stability));
    // Whole number of steps per record so samples land on the grid exactly.
    let per_record = (cfg.record_interval / requested).ceil().max(1.0) as usize;
    let dt = cfg.record_interval / per_record as f64;
    let records = (cfg.t_max / cfg.record_interval).round() as usize;
    let mut solver = KolmogorovSolver::new(*r, cfg.n_trunc, dt, cfg.stepper)?;
    let mut times = Vec::with_capacity(records + 1);
    let mut p00 = Vec::with_capacity(records + 1);
    times.push(0.0);
    p00.push(1.0);
    for k in 1..=records {
        for _ in 0..per_record {
            solver.step()?;
        }
        times.push(k as f64 * cfg.record_interval);
        p00.push(solver.state().probs[0]);
    }
    Ok(Trajectory {
        times,
        p00,
        dt,
        n_trunc: cfg.n_trunc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplaceResult {
    pub p: f64,
    pub value: f64,
    /// Composite trapezoid over the samples with one Richardson step.
    pub trapezoid: f64,
    /// Exponential extrapolation beyond `t_max`.
    pub tail: f64,
    /// Fitted decay rate of the tail.
    pub decay_rate: f64,
    pub err_estimate: f64,
}

fn trapezoid(times: &[f64], values: &[f64], stride: usize) -> f64 {
    let idx: Vec<usize> = (0..times.len()).step_by(stride).collect();
    idx.windows(2)
        .map(|w| 0.5 * (times[w[1]] - times[w[0]]) * (values[w[0]] + values[w[1]]))
        .sum()
}

/// Least-squares decay rate of `ln P₀₀` over the last tenth of the samples.
fn fit_decay(traj: &Trajectory) -> Option<f64> {
    let n = traj.times.len();
    let start = n - (n / 10).max(2);
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for i in start..n {
        if !(traj.p00[i] > 0.0) {
            return None;
        }
        let (x, y) = (traj.times[i], traj.p00[i].ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let m = (n - start) as f64;
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    slope.is_finite().then_some(-slope)
}

/// `∫₀^∞ e^{−pt} P₀₀(t) dt` with its breakdown.
pub fn laplace_p00_detailed(traj: &Trajectory, p: f64) -> Result<LaplaceResult> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("Laplace variable must be positive, got {p}")));
    }
    let spacing = traj.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if p * spacing > 0.5 {
        return Err(Error::Domain(format!(
            "sample spacing {spacing} too coarse for p = {p}; need spacing <= {}",
            0.5 / p
        )));
    }
    let t_max = traj.t_max();
    let horizon = || Error::Horizon {
        p,
        t_max,
        required: 20.0 / p,
    };
    let weighted: Vec<f64> = traj.times.iter().zip(&traj.p00).map(|(t, v)| (-p * t).exp() * v).collect();
    // Trapezoid at steps h and 2h on an even number of intervals, combined by
    // one Richardson step; a leftover odd interval gets the plain trapezoid.
    let end = traj.times.len() - 1;
    let even_end = end - end % 2;
    let fine_even = trapezoid(&traj.times[..=even_end], &weighted[..=even_end], 1);
    let coarse = trapezoid(&traj.times[..=even_end], &weighted[..=even_end], 2);
    let leftover = trapezoid(&traj.times[even_end..], &weighted[even_end..], 1);
    let correction = (fine_even - coarse) / 3.0;
    let fine = fine_even + correction + leftover;
    let discretization = correction.abs();

    let last = *weighted.last().unwrap();
    let (tail, decay_rate) = if last == 0.0 {
        (0.0, f64::INFINITY)
    } else {
        let rate = fit_decay(traj).ok_or_else(horizon)?;
        if !(p + rate > 0.0) {
            return Err(horizon());
        }
        (last / (p + rate), rate)
    };
    let value = fine + tail;
    // The fitted rate is trusted to 10 %.
    let err_estimate = discretization + 0.1 * tail;
    if p * t_max < 20.0 && err_estimate > 1e-4 * value {
        return Err(horizon());
    }
    Ok(LaplaceResult {
        p,
        value,
        trapezoid: fine,
        tail,
        decay_rate,
        err_estimate,
    })
}

pub fn laplace_p00(traj: &Trajectory, p: f64) -> Result<f64> {
    Ok(laplace_p00_detailed(traj, p)?.value)
}

/// `H = dn θ · Σ P₀ₙ (1+c)_n/(1/2+c)_n w^{n+c}` at `w = sn²θ`, and the bound
/// `dn θ · (sn²θ)^c · ₂F₁(1, 1+c; 1/2+c; sn²θ)`.
pub fn generating_function_bound(state: &BDState, theta: f64) -> Result<(f64, f64)> {
    let r = &state.rates;
    let modulus = Modulus::new(r.k2)?;
    if !(theta >= 0.0 && theta < modulus.complete_k()) {
        return Err(Error::Domain(format!("theta must lie in [0, K), got {theta}")));
    }
    let j = modulus.jacobi(theta);
    let w = j.sn * j.sn;
    let c = r.c;
    let mut weight = 1.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    for (n, p) in state.probs.iter().enumerate() {
        if n > 0 {
            let k = (n - 1) as f64;
            weight *= (1.0 + c + k) / (0.5 + c + k);
            power *= w;
        }
        sum += p * weight * power;
    }
    let wc = w.powf(c);
    let h = j.dn * wc * sum;
    let bound = j.dn * wc * hyp2f1(1.0, 1.0 + c, 0.5 + c, w)?;
    Ok((h, bound))
}

/// One row of [`km_crosscheck`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KmRow {
    pub p: f64,
    /// Laplace transform of the ODE trajectory.
    pub lhs: f64,
    /// `−S(−p)` from the D-ratio.
    pub rhs: f64,
    pub rel_diff: f64,
}

/// Compares `∫ e^{−pt} P₀₀ dt` with `−S(−p)` for each `p`.
pub fn km_crosscheck(r: &SCRates, p_list: &[f64]) -> Result<Vec<KmRow>> {
    km_crosscheck_with(r, p_list, &KolmogorovConfig::default())
}

pub fn km_crosscheck_with(r: &SCRates, p_list: &[f64], cfg: &KolmogorovConfig) -> Result<Vec<KmRow>> {
    let traj = solve_kolmogorov_with(r, cfg)?;
    km_rows(r, &traj, p_list)
}

/// Cross-check rows for an existing trajectory; the `p` cells run in parallel
/// and come back in input order.
pub fn km_rows(r: &SCRates, traj: &Trajectory, p_list: &[f64]) -> Result<Vec<KmRow>> {
    p_list
        .par_iter()
        .map(|&p| {
            let lhs = laplace_p00(traj, p)?;
            let s = stieltjes_s(r, Complex64::new(-p, 0.0))?;
            let rhs = -s.value.re;
            Ok(KmRow {
                p,
                lhs,
                rhs,
                rel_diff: (lhs - rhs).abs() / rhs.abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rates(mu: f64) -> SCRates {
        SCRates::new(0.75, mu, 0.5).unwrap()
    }

    fn short(mu: f64, n_trunc: usize, t_max: f64) -> Trajectory {
        let cfg = KolmogorovConfig {
            n_trunc,
            t_max,
            ..Default::default()
        };
        solve_kolmogorov_with(&rates(mu), &cfg).unwrap()
    }

    #[test]
    fn initial_condition() {
        let s = KolmogorovSolver::new(rates(0.0), 50, 1e-5, Stepper::Rk4).unwrap();
        assert_eq!(s.state().probs[0], 1.0);
        assert!(s.state().probs[1..].iter().all(|p| *p == 0.0));
        let t = short(0.0, 50, 0.01);
        assert_eq!((t.times[0], t.p00[0]), (0.0, 1.0));
    }

    #[test]
    fn first_step_by_hand() {
        let r = rates(0.5);
        let dt = 1e-6;
        let mut s = KolmogorovSolver::new(r, 50, dt, Stepper::Rk4).unwrap();
        s.step().unwrap();
        let a0 = r.diagonal(0);
        assert_abs_diff_eq!(s.state().probs[0], 1.0 - a0 * dt, epsilon = 1e-10);
    }

    #[test]
    fn classical_case_decreases() {
        let r = SCRates::new(0.0, 0.0, 0.5).unwrap();
        let t = solve_kolmogorov_with(
            &r,
            &KolmogorovConfig {
                n_trunc: 50,
                t_max: 2.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(t.p00.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn probabilities_stay_in_range() {
        let cfg = KolmogorovConfig {
            n_trunc: 50,
            ..Default::default()
        };
        let mut s = KolmogorovSolver::new(rates(1.0), cfg.n_trunc, stable_dt(&rates(1.0), 50, 0.1), Stepper::Rk4)
            .unwrap();
        for t in [0.1, 0.5, 1.0, 2.0] {
            s.advance_to(t).unwrap();
            let probs = &s.state().probs;
            assert!(probs.iter().all(|p| *p >= -NEGATIVE_SLACK && *p <= 1.0));
            assert!(probs.iter().sum::<f64>() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn truncation_converged() {
        let a = short(0.0, 50, 1.0);
        let b = short(0.0, 75, 1.0);
        for (i, (x, y)) in a.p00.iter().zip(&b.p00).enumerate().step_by(100) {
            assert!((x - y).abs() < 1e-8, "sample {i}: {x} vs {y}");
        }
    }

    #[test]
    fn bdf2_agrees_with_rk4() {
        let r = rates(0.5);
        let cfg = KolmogorovConfig {
            n_trunc: 50,
            t_max: 1.0,
            dt: Some(1e-4),
            stepper: Stepper::Bdf2,
            ..Default::default()
        };
        let implicit = solve_kolmogorov_with(&r, &cfg).unwrap();
        let explicit = short(0.5, 50, 1.0);
        for (x, y) in implicit.p00.iter().zip(&explicit.p00).step_by(50) {
            assert!((x - y).abs() < 1e-5);
        }
    }

    #[test]
    fn unstable_step_detected() {
        let r = rates(0.0);
        let dt = 5.0 * stable_dt(&r, 50, 1.0);
        let err = solve_kolmogorov(&r, 50, 1.0, dt);
        assert!(matches!(err, Err(Error::Stability { .. })));
    }

    #[test]
    fn laplace_of_exponential() {
        let a = 1.3;
        let times: Vec<f64> = (0..=20000).map(|i| i as f64 * 1e-3).collect();
        let p00 = times.iter().map(|t| (-a * t).exp()).collect();
        let traj = Trajectory::from_samples(times, p00).unwrap();
        for p in [0.5, 2.0, 10.0] {
            let v = laplace_p00(&traj, p).unwrap();
            assert!((v - 1.0 / (p + a)).abs() <= 1e-6 / (p + a), "p = {p}");
        }
        // initial-value theorem
        let v = laplace_p00(&traj, 100.0).unwrap();
        assert!((100.0 * v - 1.0).abs() < 0.02);
        assert!(laplace_p00(&traj, 1e4).is_err());
    }

    #[test]
    fn horizon_error() {
        let times: Vec<f64> = (0..=1000).map(|i| i as f64 * 1e-3).collect();
        let p00 = times.iter().map(|t| 1.0 / (1.0 + t * t * t * t)).collect();
        let traj = Trajectory::from_samples(times, p00).unwrap();
        match laplace_p00(&traj, 0.1) {
            Err(Error::Horizon { required, .. }) => assert_abs_diff_eq!(required, 200.0, epsilon = 1e-9),
            other => panic!("{other:?}"),
        }
        assert!(Trajectory::from_samples(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn larger_mu_decays_faster() {
        let slow = short(0.0, 50, 1.0);
        let fast = short(1.0, 50, 1.0);
        for i in (100..slow.p00.len()).step_by(100) {
            assert!(fast.p00[i] < slow.p00[i]);
        }
    }

    #[test]
    fn bound_holds() {
        let r = rates(1.0);
        let mut s = KolmogorovSolver::new(r, 50, stable_dt(&r, 50, 0.1), Stepper::Rk4).unwrap();
        let k = Modulus::new(r.k2).unwrap().complete_k();
        for t in [0.0, 0.3, 1.0] {
            s.advance_to(t).unwrap();
            for frac in [0.1, 0.5, 0.9] {
                let (h, bound) = generating_function_bound(s.state(), frac * k).unwrap();
                assert!(h >= 0.0 && h <= bound);
            }
        }
    }

    #[test]
    fn csv_export() {
        let traj = Trajectory::from_samples(vec![0.0, 0.5], vec![1.0, 0.25]).unwrap();
        assert_eq!(traj.to_csv(), "t,p00\n0,1e0\n0.5,2.5e-1\n");
    }
}
