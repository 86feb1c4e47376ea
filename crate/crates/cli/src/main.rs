//! `heun`: evaluate Heun and associated-Heun functions, check the elliptic
//! closed forms and integral transforms, and cross-check Stieltjes transforms.
//!
//! Exit codes: 0 success, 1 numerical failure or tolerance breach,
//! 2 usage or validation error.

// `!(x <= y)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use assoc_heun::birthdeath::Stepper;
use assoc_heun::heun::{AssocParams, HeunParams};
use assoc_heun::stieltjes::SCRates;
use assoc_heun::transforms::{Couple, Transform};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::commands::FamilyCase;
use crate::config::{Format, Overrides, RunConfig};
use crate::output::render;
use crate::verify::Suite;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or parameters; exit 2.
    Usage(String),
    /// A computation failed to reach its tolerance; exit 1.
    Numerical(String),
}

impl From<assoc_heun::Error> for CliError {
    fn from(e: assoc_heun::Error) -> Self {
        match e {
            assoc_heun::Error::Domain(_) | assoc_heun::Error::Parameter(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "heun", version, about = "Heun and associated-Heun function toolkit")]
struct Cli {
    /// TOML run configuration; flags below take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    series_tol: Option<f64>,
    #[arg(long, global = true)]
    quad_tol: Option<f64>,
    #[arg(long, global = true)]
    cf_tol: Option<f64>,
    #[arg(long, global = true)]
    r_max: Option<f64>,
    #[arg(long, global = true)]
    n_trunc: Option<usize>,
    #[arg(long, global = true)]
    t_max: Option<f64>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct HeunArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    delta: f64,
    /// Defaults to the value fixed by the Fuchs relation.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    s: f64,
    #[arg(long)]
    k2: f64,
}

impl HeunArgs {
    fn params(&self) -> Result<HeunParams, CliError> {
        let eps = self.eps.unwrap_or(self.alpha + self.beta - self.gamma - self.delta + 1.0);
        Ok(HeunParams::new(self.alpha, self.beta, self.gamma, self.delta, eps, self.s, self.k2)?)
    }
}

#[derive(Args)]
struct AssocArgs {
    #[command(flatten)]
    heun: HeunArgs,
    /// Association parameter.
    #[arg(long)]
    c: f64,
    /// Co-recursive shift.
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
}

impl AssocArgs {
    fn params(&self) -> Result<AssocParams, CliError> {
        Ok(AssocParams::new(self.heun.params()?, self.c, self.mu)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    First,
    Second,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoupleArg {
    Alpha,
    Beta,
}

#[derive(Clone, Copy, ValueEnum)]
enum StepperArg {
    Rk4,
    Bdf2,
}

#[derive(Subcommand)]
enum Command {
    /// Heun function Hl(P; w) by power series.
    #[command(allow_negative_numbers = true)]
    Eval {
        #[command(flatten)]
        heun: HeunArgs,
        /// Evaluation points, repeated or comma-separated.
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
        w: Vec<f64>,
        /// Include the coefficient series in JSON output.
        #[arg(long)]
        coeffs: bool,
    },
    /// Associated Heun function Hn(c, mu, P; w) by power series.
    #[command(allow_negative_numbers = true)]
    AssocEval {
        #[command(flatten)]
        assoc: AssocArgs,
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
        w: Vec<f64>,
        #[arg(long)]
        coeffs: bool,
    },
    /// Elliptic closed-form family against the power series.
    #[command(allow_negative_numbers = true)]
    ClosedForm {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
        family: u8,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        k2: f64,
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
        w: Vec<f64>,
    },
    /// Integral connection transform against the power series.
    #[command(allow_negative_numbers = true)]
    Transform {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, value_enum, default_value = "alpha")]
        couple: CoupleArg,
        #[command(flatten)]
        assoc: AssocArgs,
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
        w: Vec<f64>,
    },
    /// Stieltjes transform by D-ratio and by continued fraction.
    #[command(allow_negative_numbers = true)]
    Stieltjes {
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long)]
        k2: f64,
        /// Complex points such as -1, -1+0.5i; repeated or comma-separated.
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
        z: Vec<Complex64>,
    },
    /// Laplace transform of P00(t) from the Kolmogorov system against -S(-p).
    #[command(allow_negative_numbers = true)]
    BdCheck {
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long)]
        k2: f64,
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
        p: Vec<f64>,
        #[arg(long, value_enum, default_value = "rk4")]
        stepper: StepperArg,
        /// Write the (t, p00) trajectory as CSV.
        #[arg(long, value_name = "FILE")]
        trajectory: Option<PathBuf>,
    },
    /// Run an invariant grid; exit 1 if any case breaches its tolerance.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
}

fn run(cli: Cli) -> Result<(String, bool), CliError> {
    let over = Overrides {
        series_tol: cli.series_tol,
        quad_tol: cli.quad_tol,
        cf_tol: cli.cf_tol,
        r_max: cli.r_max,
        n_trunc: cli.n_trunc,
        t_max: cli.t_max,
        dt: cli.dt,
        format: cli.format,
    };
    let cfg = RunConfig::load(cli.config.as_deref(), &over).map_err(CliError::Usage)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))?;
    }
    let f = cfg.format;
    let out = match cli.command {
        Command::Eval { heun, w, coeffs } => render(&commands::eval(heun.params()?, &w, &cfg, coeffs)?, f),
        Command::AssocEval { assoc, w, coeffs } => {
            render(&commands::assoc_eval(assoc.params()?, &w, &cfg, coeffs)?, f)
        }
        Command::ClosedForm {
            family,
            c,
            mu,
            sigma,
            k2,
            w,
        } => {
            let case = FamilyCase {
                id: family,
                c,
                mu,
                sigma,
                k2,
            };
            render(&commands::closed_form(case, &w, &cfg)?, f)
        }
        Command::Transform { kind, couple, assoc, w } => {
            let kind = match kind {
                KindArg::First => Transform::First,
                KindArg::Second => Transform::Second,
            };
            let couple = match couple {
                CoupleArg::Alpha => Couple::Alpha,
                CoupleArg::Beta => Couple::Beta,
            };
            render(&commands::transforms(kind, couple, assoc.params()?, &w, &cfg)?, f)
        }
        Command::Stieltjes { c, mu, k2, z } => render(&commands::stieltjes(SCRates::new(c, mu, k2)?, &z, &cfg)?, f),
        Command::BdCheck {
            c,
            mu,
            k2,
            p,
            stepper,
            trajectory,
        } => {
            let stepper = match stepper {
                StepperArg::Rk4 => Stepper::Rk4,
                StepperArg::Bdf2 => Stepper::Bdf2,
            };
            let report = commands::bd_check(SCRates::new(c, mu, k2)?, &p, stepper, trajectory.as_deref(), &cfg)?;
            render(&report, f)
        }
        Command::Verify { suite } => {
            let report = verify::run(suite, &cfg)?;
            if !report.passed {
                eprintln!(
                    "verify {}: tolerance {:e} breached; worst {} = {:e} at {}",
                    suite.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default(),
                    report.tolerance,
                    report.metric,
                    report.worst.value,
                    report.worst.case
                );
            }
            return Ok((render(&report, f), report.passed));
        }
    };
    Ok((out, true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((out, passed)) => {
            print!("{out}");
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
