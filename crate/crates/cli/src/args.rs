use std::path::PathBuf;

use clap::{ArgAction, Parser, ValueEnum};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ProblemArg {
    Toy,
    Qp,
    File,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GammaArg {
    Power,
    #[value(name = "rationalA")]
    RationalA,
    #[value(name = "rationalB")]
    RationalB,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BetaArg {
    Power,
    Constant,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EpsArg {
    Power,
    Zero,
}

/// Integrate the mixed-order primal-dual system with Tikhonov regularization,
/// audit its parameter conditions and write CSV reports.
///
/// Values given on the command line override those from --config. Real
/// numbers may be written as fractions, e.g. --theta 1/12.
#[derive(Debug, Parser)]
#[command(name = "pdflow", version)]
pub struct Cli {
    /// Run configuration file (flat `key = value`)
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory [default: out]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Problem scenario [default: toy]
    #[arg(long, value_enum)]
    pub problem: Option<ProblemArg>,

    /// Problem file for --problem file
    #[arg(long, value_name = "PATH")]
    pub problem_file: Option<PathBuf>,

    /// Toy coefficient m [default: 1]
    #[arg(long = "m", value_name = "REAL")]
    pub toy_m: Option<String>,

    /// Toy coefficient n [default: 1]
    #[arg(long = "n", value_name = "REAL")]
    pub toy_n: Option<String>,

    /// Toy coefficient e [default: 1]
    #[arg(long = "e", value_name = "REAL")]
    pub toy_e: Option<String>,

    /// Number of QP constraints [default: 30]
    #[arg(long, value_name = "INT")]
    pub mdim: Option<String>,

    /// QP dimension [default: 50]
    #[arg(long, value_name = "INT")]
    pub ndim: Option<String>,

    /// QP random seed [default: 0]
    #[arg(long, value_name = "INT")]
    pub seed: Option<String>,

    /// Damping family [default: power]
    #[arg(long, value_enum)]
    pub gamma_kind: Option<GammaArg>,

    /// Damping parameter alpha [default: 13]
    #[arg(long, value_name = "REAL")]
    pub alpha: Option<String>,

    /// Scaling family [default: power]
    #[arg(long, value_enum)]
    pub beta_kind: Option<BetaArg>,

    /// Scaling exponent, beta(t) = t^exp [default: 1]
    #[arg(long, value_name = "REAL")]
    pub beta_exp: Option<String>,

    /// Value of a constant scaling [default: 1]
    #[arg(long, value_name = "REAL")]
    pub beta_value: Option<String>,

    /// Tikhonov family [default: power]
    #[arg(long, value_enum)]
    pub eps_kind: Option<EpsArg>,

    /// Tikhonov coefficient c in eps(t) = c/t^r [default: 3]
    #[arg(long, value_name = "REAL")]
    pub eps_c: Option<String>,

    /// Tikhonov exponent r in eps(t) = c/t^r [default: 1.1]
    #[arg(long, value_name = "REAL")]
    pub r: Option<String>,

    /// Parameter theta [default: 1/12]
    #[arg(long, value_name = "REAL")]
    pub theta: Option<String>,

    /// Augmented Lagrangian penalty sigma [default: 1]
    #[arg(long, value_name = "REAL")]
    pub sigma: Option<String>,

    /// Start time [default: 1]
    #[arg(long, value_name = "REAL")]
    pub t0: Option<String>,

    /// Final time [default: 1000]
    #[arg(long, value_name = "REAL")]
    pub tf: Option<String>,

    /// Relative tolerance [default: 1e-6]
    #[arg(long, value_name = "REAL")]
    pub rtol: Option<String>,

    /// Absolute tolerance [default: 1e-9]
    #[arg(long, value_name = "REAL")]
    pub atol: Option<String>,

    /// Initial step [default: 1e-2 (tf - t0) / max(1, |F(t0, Y0)|)]
    #[arg(long, value_name = "REAL")]
    pub h_init: Option<String>,

    /// Smallest allowed step [default: 1e-12]
    #[arg(long, value_name = "REAL")]
    pub h_min: Option<String>,

    /// Largest allowed step [default: tf - t0]
    #[arg(long, value_name = "REAL")]
    pub h_max: Option<String>,

    /// Step budget [default: 10000000]
    #[arg(long, value_name = "INT")]
    pub max_steps: Option<String>,

    /// Number of log-spaced output samples [default: 400]
    #[arg(long, value_name = "INT")]
    pub samples: Option<String>,

    /// Lower end of the rate-fit window [default: 50]
    #[arg(long, value_name = "REAL")]
    pub fit_lo: Option<String>,

    /// Upper end of the rate-fit window [default: 0.9 tf]
    #[arg(long, value_name = "REAL")]
    pub fit_hi: Option<String>,

    /// Drop the Tikhonov term eps(t) x from the dynamics [default: off]
    #[arg(long, action = ArgAction::SetTrue)]
    pub ablation: bool,

    /// Run even if the schedule fails the admissibility conditions [default: off]
    #[arg(long, action = ArgAction::SetTrue)]
    pub allow_violation: bool,

    /// Comma-separated r values; runs one experiment per value [default: none]
    #[arg(long, value_name = "LIST")]
    pub r_sweep: Option<String>,

    /// Worker threads for sweeps [default: number of CPUs]
    #[arg(long, value_name = "INT")]
    pub jobs: Option<String>,

    /// Increase log verbosity (-v info, -vv debug) [default: warnings only]
    #[arg(short, long, action = ArgAction::Count)]
    pub verbose: u8,
}

impl Cli {
    /// Flag values as configuration `(key, value)` pairs.
    pub fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut out: Vec<(&'static str, String)> = Vec::new();
        if let Some(p) = self.problem {
            out.push((
                "problem",
                match p {
                    ProblemArg::Toy => "toy",
                    ProblemArg::Qp => "qp",
                    ProblemArg::File => "file",
                }
                .into(),
            ));
        }
        if let Some(p) = &self.problem_file {
            out.push(("problem.file", p.display().to_string()));
        }
        let strings: [(&'static str, &Option<String>); 25] = [
            ("m", &self.toy_m),
            ("n", &self.toy_n),
            ("e", &self.toy_e),
            ("mdim", &self.mdim),
            ("ndim", &self.ndim),
            ("seed", &self.seed),
            ("gamma.alpha", &self.alpha),
            ("beta.exp", &self.beta_exp),
            ("beta.value", &self.beta_value),
            ("eps.c", &self.eps_c),
            ("eps.r", &self.r),
            ("theta", &self.theta),
            ("sigma", &self.sigma),
            ("t0", &self.t0),
            ("tf", &self.tf),
            ("rtol", &self.rtol),
            ("atol", &self.atol),
            ("h_init", &self.h_init),
            ("h_min", &self.h_min),
            ("h_max", &self.h_max),
            ("max_steps", &self.max_steps),
            ("samples", &self.samples),
            ("fit.lo", &self.fit_lo),
            ("fit.hi", &self.fit_hi),
            ("r_sweep", &self.r_sweep),
        ];
        if let Some(g) = self.gamma_kind {
            out.push((
                "gamma.kind",
                match g {
                    GammaArg::Power => "power",
                    GammaArg::RationalA => "rationalA",
                    GammaArg::RationalB => "rationalB",
                }
                .into(),
            ));
        }
        if let Some(b) = self.beta_kind {
            out.push((
                "beta.kind",
                match b {
                    BetaArg::Power => "power",
                    BetaArg::Constant => "constant",
                }
                .into(),
            ));
        }
        if let Some(e) = self.eps_kind {
            out.push((
                "eps.kind",
                match e {
                    EpsArg::Power => "power",
                    EpsArg::Zero => "zero",
                }
                .into(),
            ));
        }
        for (k, v) in strings {
            if let Some(v) = v {
                out.push((k, v.clone()));
            }
        }
        if let Some(o) = &self.out {
            out.push(("out", o.display().to_string()));
        }
        if let Some(j) = &self.jobs {
            out.push(("jobs", j.clone()));
        }
        if self.ablation {
            out.push(("ablation", "true".into()));
        }
        if self.allow_violation {
            out.push(("allow_violation", "true".into()));
        }
        out
    }
}
