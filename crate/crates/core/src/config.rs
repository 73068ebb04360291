//! Run configuration: flat `key = value` text with dotted keys.
//!
//! ```text
//! # toy run, power damping with alpha = 13
//! problem = toy
//! gamma.kind = power
//! gamma.alpha = 13
//! beta.exp = 1
//! eps.r = 1.1
//! theta = 1/12
//! ```
//!
//! Values may be written as fractions `a/b`. Unknown keys are rejected.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiments::{BetaKind, EpsKind, ExperimentSpec, GammaKind, Scenario};

/// Every key accepted in a configuration file, in echo order.
pub const KEYS: &[&str] = &[
    "problem",
    "problem.file",
    "m",
    "n",
    "e",
    "mdim",
    "ndim",
    "seed",
    "sigma",
    "theta",
    "t0",
    "tf",
    "gamma.kind",
    "gamma.alpha",
    "beta.kind",
    "beta.exp",
    "beta.value",
    "eps.kind",
    "eps.c",
    "eps.r",
    "rtol",
    "atol",
    "h_init",
    "h_min",
    "h_max",
    "max_steps",
    "samples",
    "fit.lo",
    "fit.hi",
    "ablation",
    "allow_violation",
    "out",
    "r_sweep",
    "jobs",
];

/// An experiment plus output and scheduling options.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub spec: ExperimentSpec,
    pub out: PathBuf,
    /// Run one experiment per `r` instead of a single run.
    pub r_sweep: Option<Vec<f64>>,
    pub jobs: Option<usize>,
    /// Parameters of the scenarios not currently selected, so that `problem`
    /// alone decides which one runs regardless of key order.
    toy: (f64, f64, f64),
    qp: (usize, usize, u64),
    problem_file: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            spec: ExperimentSpec::default(),
            out: PathBuf::from("out"),
            r_sweep: None,
            jobs: None,
            toy: (1.0, 1.0, 1.0),
            qp: (30, 50, 0),
            problem_file: PathBuf::new(),
        }
    }
}

fn config_err(key: &str, value: &str, what: &str) -> Error {
    Error::Config(format!("key `{key}`: cannot parse `{value}` as {what}"))
}

/// A real number, optionally written as `a/b`.
pub fn parse_real(key: &str, value: &str) -> Result<f64> {
    let v = value.trim();
    let parsed = match v.split_once('/') {
        Some((a, b)) => a
            .trim()
            .parse::<f64>()
            .ok()
            .zip(b.trim().parse::<f64>().ok())
            .map(|(a, b)| a / b),
        None => v.parse::<f64>().ok(),
    };
    match parsed {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(config_err(key, value, "a finite number")),
    }
}

fn parse_uint(key: &str, value: &str) -> Result<u64> {
    let v = value.trim();
    v.parse::<u64>()
        .or_else(|_| {
            // Allow `1e7`-style integers.
            match v.parse::<f64>() {
                Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 => Ok(x as u64),
                _ => Err(()),
            }
        })
        .map_err(|_| config_err(key, value, "a non-negative integer"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(config_err(key, value, "a boolean")),
    }
}

/// Split a config text into `(key, value)` pairs; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "line {}: expected `key = value`, got `{line}`",
                i + 1
            ))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    /// Set one key from its textual value.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let s = &mut self.spec;
        match key {
            "problem" => {
                s.scenario = match (value.trim(), &s.scenario) {
                    ("toy", Scenario::Toy { .. })
                    | ("qp", Scenario::RandomQp { .. })
                    | ("file", Scenario::File { .. }) => s.scenario.clone(),
                    ("toy", _) => {
                        let (m, n, e) = self.toy;
                        Scenario::Toy { m, n, e }
                    }
                    ("qp", _) => {
                        let (mdim, ndim, seed) = self.qp;
                        Scenario::RandomQp { mdim, ndim, seed }
                    }
                    ("file", _) => Scenario::File {
                        path: self.problem_file.clone(),
                    },
                    (other, _) => return Err(config_err(key, other, "one of toy, qp, file")),
                }
            }
            "problem.file" => {
                self.problem_file = PathBuf::from(value.trim());
                if let Scenario::File { path } = &mut s.scenario {
                    path.clone_from(&self.problem_file);
                }
            }
            "m" | "n" | "e" => {
                let x = parse_real(key, value)?;
                if let Scenario::Toy { m, n, e } = s.scenario {
                    self.toy = (m, n, e);
                }
                match key {
                    "m" => self.toy.0 = x,
                    "n" => self.toy.1 = x,
                    _ => self.toy.2 = x,
                }
                if let Scenario::Toy { .. } = s.scenario {
                    let (m, n, e) = self.toy;
                    s.scenario = Scenario::Toy { m, n, e };
                }
            }
            "mdim" | "ndim" | "seed" => {
                let x = parse_uint(key, value)?;
                if let Scenario::RandomQp { mdim, ndim, seed } = s.scenario {
                    self.qp = (mdim, ndim, seed);
                }
                match key {
                    "mdim" => self.qp.0 = x as usize,
                    "ndim" => self.qp.1 = x as usize,
                    _ => self.qp.2 = x,
                }
                if let Scenario::RandomQp { .. } = s.scenario {
                    let (mdim, ndim, seed) = self.qp;
                    s.scenario = Scenario::RandomQp { mdim, ndim, seed };
                }
            }
            "sigma" => s.sigma = parse_real(key, value)?,
            "theta" => s.theta = parse_real(key, value)?,
            "t0" => s.t0 = parse_real(key, value)?,
            "tf" => s.tf = parse_real(key, value)?,
            "gamma.kind" => {
                s.gamma_kind = match value.trim() {
                    "power" => GammaKind::Power,
                    "rationalA" => GammaKind::RationalA,
                    "rationalB" => GammaKind::RationalB,
                    other => {
                        return Err(config_err(key, other, "one of power, rationalA, rationalB"))
                    }
                }
            }
            "gamma.alpha" => s.alpha = parse_real(key, value)?,
            "beta.kind" => {
                s.beta_kind = match value.trim() {
                    "power" => BetaKind::Power,
                    "constant" => BetaKind::Constant,
                    other => return Err(config_err(key, other, "one of power, constant")),
                }
            }
            "beta.exp" => s.beta_exp = parse_real(key, value)?,
            "beta.value" => s.beta_value = parse_real(key, value)?,
            "eps.kind" => {
                s.eps_kind = match value.trim() {
                    "power" => EpsKind::Power,
                    "zero" => EpsKind::Zero,
                    other => return Err(config_err(key, other, "one of power, zero")),
                }
            }
            "eps.c" => s.eps_c = parse_real(key, value)?,
            "eps.r" => s.eps_r = parse_real(key, value)?,
            "rtol" => s.integrator.rtol = parse_real(key, value)?,
            "atol" => s.integrator.atol = parse_real(key, value)?,
            "h_init" => s.integrator.h_init = Some(parse_real(key, value)?),
            "h_min" => s.integrator.h_min = parse_real(key, value)?,
            "h_max" => s.integrator.h_max = Some(parse_real(key, value)?),
            "max_steps" => s.integrator.max_steps = parse_uint(key, value)?,
            "samples" => s.samples = parse_uint(key, value)? as usize,
            "fit.lo" => s.fit_window.0 = Some(parse_real(key, value)?),
            "fit.hi" => s.fit_window.1 = Some(parse_real(key, value)?),
            "ablation" => s.ablation = parse_bool(key, value)?,
            "allow_violation" => s.allow_violation = parse_bool(key, value)?,
            "out" => self.out = PathBuf::from(value.trim()),
            "r_sweep" => {
                let rs = value
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|t| !t.is_empty())
                    .map(|t| parse_real(key, t))
                    .collect::<Result<Vec<_>>>()?;
                if rs.is_empty() {
                    return Err(config_err(key, value, "a list of numbers"));
                }
                self.r_sweep = Some(rs);
            }
            "jobs" => {
                let j = parse_uint(key, value)? as usize;
                if j == 0 {
                    return Err(config_err(key, value, "a positive integer"));
                }
                self.jobs = Some(j);
            }
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (k, v) in parse_pairs(text)? {
            self.apply(&k, &v)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// Check everything that can be checked before building the problem.
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if let Some(rs) = &self.r_sweep {
            if rs.iter().any(|r| !(*r > 0.0)) {
                return Err(Error::Config("r_sweep values must be > 0".into()));
            }
        }
        Ok(())
    }

    /// The effective configuration in the same `key = value` format.
    pub fn to_text(&self) -> String {
        let s = &self.spec;
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        match &s.scenario {
            Scenario::Toy { m, n, e } => {
                put("problem", "toy".into());
                put("m", m.to_string());
                put("n", n.to_string());
                put("e", e.to_string());
            }
            Scenario::RandomQp { mdim, ndim, seed } => {
                put("problem", "qp".into());
                put("mdim", mdim.to_string());
                put("ndim", ndim.to_string());
                put("seed", seed.to_string());
            }
            Scenario::File { path } => {
                put("problem", "file".into());
                put("problem.file", path.display().to_string());
            }
        }
        put("sigma", format!("{:e}", s.sigma));
        put("theta", format!("{:e}", s.theta));
        put("t0", format!("{:e}", s.t0));
        put("tf", format!("{:e}", s.tf));
        put(
            "gamma.kind",
            match s.gamma_kind {
                GammaKind::Power => "power",
                GammaKind::RationalA => "rationalA",
                GammaKind::RationalB => "rationalB",
            }
            .into(),
        );
        put("gamma.alpha", format!("{:e}", s.alpha));
        match s.beta_kind {
            BetaKind::Power => {
                put("beta.kind", "power".into());
                put("beta.exp", format!("{:e}", s.beta_exp));
            }
            BetaKind::Constant => {
                put("beta.kind", "constant".into());
                put("beta.value", format!("{:e}", s.beta_value));
            }
        }
        match s.eps_kind {
            EpsKind::Power => {
                put("eps.kind", "power".into());
                put("eps.c", format!("{:e}", s.eps_c));
                put("eps.r", format!("{:e}", s.eps_r));
            }
            EpsKind::Zero => put("eps.kind", "zero".into()),
        }
        let it = &s.integrator;
        put("rtol", format!("{:e}", it.rtol));
        put("atol", format!("{:e}", it.atol));
        if let Some(h) = it.h_init {
            put("h_init", format!("{h:e}"));
        }
        put("h_min", format!("{:e}", it.h_min));
        if let Some(h) = it.h_max {
            put("h_max", format!("{h:e}"));
        }
        put("max_steps", it.max_steps.to_string());
        put("samples", s.samples.to_string());
        let (lo, hi) = s.effective_fit_window();
        put("fit.lo", format!("{lo:e}"));
        put("fit.hi", format!("{hi:e}"));
        put("ablation", s.ablation.to_string());
        put("allow_violation", s.allow_violation.to_string());
        put("out", self.out.display().to_string());
        if let Some(rs) = &self.r_sweep {
            put(
                "r_sweep",
                rs.iter()
                    .map(|r| r.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        if let Some(j) = self.jobs {
            put("jobs", j.to_string());
        }
        out
    }
}
