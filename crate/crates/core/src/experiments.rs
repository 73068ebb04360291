//! The toy and random-QP scenarios, single runs, sweeps over `r` and their
//! on-disk reports.
//!
//! A run directory contains `trajectory.csv`, `metrics.csv`, `conditions.txt`
//! and `report.txt`. Every file is written to a temporary name and renamed
//! into place, so a crash never leaves a partially written file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use crate::analysis::metrics::metrics_csv;
use crate::analysis::rate::default_window;
use crate::analysis::{
    audit_decay_inequality, compute_metrics, fit_rate, DecayAudit, MetricSample, RateFit,
};
use crate::dynamics::{DynamicsConfig, SystemState};
use crate::error::{Error, Result};
use crate::integrator::{integrate, FailureKind, IntegratorSettings, Trajectory};
use crate::linalg;
use crate::par::{self, Execution};
use crate::problem::{
    kkt_saddle_point, minimal_norm_solution, MinNormSolution, Objective, ProblemInstance,
    QuadraticObjective, SaddlePoint,
};
use crate::rng::PortableRng;
use crate::schedule::{
    audit_conditions, default_audit_grid, log_grid, CoefficientSchedule, ConditionReport,
    DampingFamily, ScalingFamily, TikhonovFamily,
};

/// Which problem to solve.
#[derive(Clone, Debug, PartialEq)]
pub enum Scenario {
    /// `f(x) = (m x₁ + n x₂ + e x₃)²` subject to `m x₁ − n x₂ + e x₃ = 0`.
    Toy { m: f64, n: f64, e: f64 },
    /// Seeded random equality-constrained QP.
    RandomQp { mdim: usize, ndim: usize, seed: u64 },
    /// A quadratic problem read from a problem file.
    File { path: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaKind {
    Power,
    RationalA,
    RationalB,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BetaKind {
    Power,
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsKind {
    Power,
    Zero,
}

/// Everything that determines a run.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub sigma: f64,
    pub theta: f64,
    pub t0: f64,
    pub tf: f64,
    pub gamma_kind: GammaKind,
    pub alpha: f64,
    pub beta_kind: BetaKind,
    pub beta_exp: f64,
    pub beta_value: f64,
    pub eps_kind: EpsKind,
    pub eps_c: f64,
    pub eps_r: f64,
    /// Drop the `εx` term from the dynamics.
    pub ablation: bool,
    /// Run even if the schedule fails the admissibility conditions.
    pub allow_violation: bool,
    pub integrator: IntegratorSettings,
    pub samples: usize,
    /// Rate-fit window; unset ends default to `[50, 0.9 tf]`.
    pub fit_window: (Option<f64>, Option<f64>),
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            scenario: Scenario::Toy {
                m: 1.0,
                n: 1.0,
                e: 1.0,
            },
            sigma: 1.0,
            theta: 1.0 / 12.0,
            t0: 1.0,
            tf: 1000.0,
            gamma_kind: GammaKind::Power,
            alpha: 13.0,
            beta_kind: BetaKind::Power,
            beta_exp: 1.0,
            beta_value: 1.0,
            eps_kind: EpsKind::Power,
            eps_c: 3.0,
            eps_r: 1.1,
            ablation: false,
            allow_violation: false,
            integrator: IntegratorSettings::default(),
            samples: 400,
            fit_window: (None, None),
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if let Scenario::Toy { m, n, e } = self.scenario {
            if m == 0.0
                || n == 0.0
                || e == 0.0
                || !(m.is_finite() && n.is_finite() && e.is_finite())
            {
                return Err(Error::arg(format!(
                    "toy coefficients must be finite and nonzero, got m = {m}, n = {n}, e = {e}"
                )));
            }
        }
        if let Scenario::RandomQp { mdim, ndim, .. } = self.scenario {
            if !(mdim < ndim) || ndim == 0 {
                return Err(Error::arg(format!(
                    "random QP needs mdim < ndim, got mdim = {mdim}, ndim = {ndim}"
                )));
            }
        }
        if !(self.tf > self.t0) {
            return Err(Error::arg(format!(
                "tf must exceed t0 (t0 = {}, tf = {})",
                self.t0, self.tf
            )));
        }
        if self.samples < 2 {
            return Err(Error::arg("samples must be at least 2"));
        }
        let (lo, hi) = self.effective_fit_window();
        if !(lo > 0.0 && lo < hi) {
            return Err(Error::arg(format!("invalid fit window [{lo}, {hi}]")));
        }
        if !(self.integrator.rtol > 0.0 && self.integrator.atol > 0.0) {
            return Err(Error::arg("rtol and atol must be positive"));
        }
        if !(self.integrator.h_min > 0.0) {
            return Err(Error::arg("h_min must be positive"));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::arg(format!(
                "sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        self.schedule()?;
        Ok(())
    }

    pub fn effective_fit_window(&self) -> (f64, f64) {
        let (lo, hi) = default_window(self.t0, self.tf);
        (
            self.fit_window.0.unwrap_or(lo),
            self.fit_window.1.unwrap_or(hi),
        )
    }

    /// The nominal schedule (ignores the ablation flag).
    pub fn schedule(&self) -> Result<CoefficientSchedule> {
        let gamma = match self.gamma_kind {
            GammaKind::Power => DampingFamily::PowerQuotient { alpha: self.alpha },
            GammaKind::RationalA => DampingFamily::RationalA { alpha: self.alpha },
            GammaKind::RationalB => DampingFamily::RationalB { alpha: self.alpha },
        };
        let beta = match self.beta_kind {
            BetaKind::Power => ScalingFamily::Power { exp: self.beta_exp },
            BetaKind::Constant => ScalingFamily::Constant {
                value: self.beta_value,
            },
        };
        let eps = match self.eps_kind {
            EpsKind::Power => TikhonovFamily::PowerDecay {
                c: self.eps_c,
                r: self.eps_r,
            },
            EpsKind::Zero => TikhonovFamily::Zero,
        };
        CoefficientSchedule::new(self.theta, gamma, beta, eps, self.t0)
    }

    /// The schedule the dynamics actually use: `ε ≡ 0` under ablation.
    pub fn effective_schedule(&self) -> Result<CoefficientSchedule> {
        let s = self.schedule()?;
        Ok(if self.ablation {
            s.without_tikhonov()
        } else {
            s
        })
    }
}

/// A problem with its reference solutions and initial state.
#[derive(Clone, Debug)]
pub struct BuiltProblem {
    pub problem: ProblemInstance,
    pub saddle: SaddlePoint,
    pub min_norm: MinNormSolution,
    pub initial: SystemState,
    /// Construction remarks (resampling, solver fallbacks).
    pub notes: Vec<String>,
}

/// The toy problem with `x̂* = 0`, `λ* = λ̂* = 0` and the start point
/// `x = (1, 1, −1)`, `λ = 1`, `ẋ = (−1, −1, 1)`.
pub fn build_toy(m: f64, n: f64, e: f64, sigma: f64) -> Result<BuiltProblem> {
    if m == 0.0 || n == 0.0 || e == 0.0 {
        return Err(Error::arg(format!(
            "toy coefficients must be nonzero, got m = {m}, n = {n}, e = {e}"
        )));
    }
    let u = DVector::from_vec(vec![m, n, e]);
    let hess = &u * u.transpose() * 2.0;
    let q = QuadraticObjective::new(hess, DVector::zeros(3))?;
    let a = DMatrix::from_row_slice(1, 3, &[m, -n, e]);
    let problem = ProblemInstance::new(Objective::Quadratic(q), a, DVector::zeros(1), sigma)?;
    let zero = SaddlePoint {
        primal: vec![0.0; 3],
        dual: vec![0.0],
    };
    Ok(BuiltProblem {
        problem,
        saddle: zero.clone(),
        min_norm: MinNormSolution {
            primal: zero.primal,
            dual: zero.dual,
            dual_residual: 0.0,
            exact: true,
        },
        initial: SystemState::new(vec![1.0, 1.0, -1.0], vec![1.0], vec![-1.0, -1.0, 1.0])?,
        notes: Vec::new(),
    })
}

/// Raw data of a random QP: `M = RᵀR` (symmetrised), `q`, `A`, `b`.
///
/// Draw order from a fresh [`PortableRng`] seeded with `seed`: `q` (n
/// normals), `A` (m·n normals, row-major), `b` (m uniforms on `[0, 1)`),
/// `R` (n·n normals, row-major).
pub fn random_qp_data(
    mdim: usize,
    ndim: usize,
    seed: u64,
) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>, DVector<f64>) {
    let mut rng = PortableRng::new(seed);
    let q = DVector::from_vec(rng.normal_vec(ndim));
    let a = DMatrix::from_row_slice(mdim, ndim, &rng.normal_vec(mdim * ndim));
    let b = DVector::from_vec(rng.uniform_vec(mdim));
    let r = DMatrix::from_row_slice(ndim, ndim, &rng.normal_vec(ndim * ndim));
    let m = r.transpose() * &r;
    let m = (&m + m.transpose()) * 0.5;
    (m, q, a, b)
}

const MAX_RESAMPLES: u64 = 64;

/// Seeded random QP with reference solutions and the all-ones initial state.
///
/// If `A` is rank deficient the instance is redrawn with `seed + k`
/// (`k = 1, 2, …`) and the substitution is recorded in `notes`.
pub fn build_random_qp(mdim: usize, ndim: usize, seed: u64, sigma: f64) -> Result<BuiltProblem> {
    if !(mdim < ndim) {
        return Err(Error::arg(format!(
            "random QP needs mdim < ndim, got mdim = {mdim}, ndim = {ndim}"
        )));
    }
    let mut notes = Vec::new();
    for k in 0..MAX_RESAMPLES {
        let s = seed.wrapping_add(k);
        let (m, q, a, b) = random_qp_data(mdim, ndim, s);
        let (_, rank) = linalg::lstsq_min_norm(&a.transpose(), &DVector::zeros(ndim))?;
        if rank < mdim {
            notes.push(format!(
                "seed {s}: A has rank {rank} < {mdim}; resampled with seed {}",
                s.wrapping_add(1)
            ));
            continue;
        }
        return finish_quadratic(
            ProblemInstance::new(
                Objective::Quadratic(QuadraticObjective::new(m, q)?),
                a,
                b,
                sigma,
            )?,
            SystemState::new(vec![1.0; ndim], vec![1.0; mdim], vec![1.0; ndim])?,
            notes,
        );
    }
    Err(Error::Solver(format!(
        "no full-rank constraint matrix in {MAX_RESAMPLES} draws from seed {seed}"
    )))
}

/// Quadratic problem from a problem file, started from all ones.
pub fn build_from_file(path: &Path, sigma_override: Option<f64>) -> Result<BuiltProblem> {
    let p = ProblemInstance::from_file(path)?;
    let p = match sigma_override {
        Some(s) => ProblemInstance::new(p.objective().clone(), p.a().clone(), p.b().clone(), s)?,
        None => p,
    };
    let (n, m) = (p.dim_primal(), p.dim_dual());
    finish_quadratic(
        p,
        SystemState::new(vec![1.0; n], vec![1.0; m], vec![1.0; n])?,
        Vec::new(),
    )
}

fn finish_quadratic(
    problem: ProblemInstance,
    initial: SystemState,
    mut notes: Vec<String>,
) -> Result<BuiltProblem> {
    let q = problem
        .objective()
        .as_quadratic()
        .expect("quadratic by construction");
    let saddle = kkt_saddle_point(q, problem.a(), problem.b())?;
    let min_norm = minimal_norm_solution(&problem, &saddle)?;
    if min_norm.dual_residual > 1e-8 {
        notes.push(format!(
            "minimal-norm dual solve residual {:e}",
            min_norm.dual_residual
        ));
    }
    Ok(BuiltProblem {
        problem,
        saddle,
        min_norm,
        initial,
        notes,
    })
}

impl Scenario {
    pub fn build(&self, sigma: f64) -> Result<BuiltProblem> {
        match self {
            Scenario::Toy { m, n, e } => build_toy(*m, *n, *e, sigma),
            Scenario::RandomQp { mdim, ndim, seed } => build_random_qp(*mdim, *ndim, *seed, sigma),
            Scenario::File { path } => build_from_file(path, Some(sigma)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Completed,
    Failed { kind: FailureKind, t: f64 },
}

/// Everything a run produced.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub status: RunStatus,
    pub spec: ExperimentSpec,
    pub built: BuiltProblem,
    pub conditions: ConditionReport,
    pub trajectory: Trajectory,
    pub metrics: Vec<MetricSample>,
    pub decay: Option<DecayAudit>,
    /// `(metric name, fit or reason it could not be fitted)`.
    pub fits: Vec<(&'static str, std::result::Result<RateFit, String>)>,
    pub elapsed: Duration,
}

impl RunReport {
    pub fn completed(&self) -> bool {
        self.status == RunStatus::Completed
    }

    pub fn fit(&self, name: &str) -> Option<&RateFit> {
        self.fits
            .iter()
            .find(|(n, _)| *n == name)
            .and_then(|(_, f)| f.as_ref().ok())
    }

    pub fn final_metrics(&self) -> Option<&MetricSample> {
        self.metrics.last()
    }

    /// Metrics at the sample closest to `t`.
    pub fn metrics_near(&self, t: f64) -> Option<&MetricSample> {
        self.metrics
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    pub fn trajectory_csv(&self) -> String {
        let (n, m) = (
            self.built.problem.dim_primal(),
            self.built.problem.dim_dual(),
        );
        let mut out = String::from("t");
        for i in 1..=n {
            let _ = write!(out, ",x{i}");
        }
        for i in 1..=m {
            let _ = write!(out, ",lambda{i}");
        }
        for i in 1..=n {
            let _ = write!(out, ",v{i}");
        }
        out.push('\n');
        for k in 0..self.trajectory.len() {
            let _ = write!(out, "{:e}", self.trajectory.time(k));
            for v in self.trajectory.state(k) {
                let _ = write!(out, ",{v:e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn metrics_csv(&self) -> String {
        metrics_csv(&self.metrics)
    }

    pub fn report_text(&self, config_echo: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "status: {}",
            match &self.status {
                RunStatus::Completed => "COMPLETED".to_string(),
                RunStatus::Failed { kind, t } => format!("FAILED at t = {t:e} ({kind})"),
            }
        );
        let _ = writeln!(s, "\n[config]\n{config_echo}");
        let _ = writeln!(s, "[schedule]");
        if let Ok(sched) = self.spec.effective_schedule() {
            let _ = writeln!(s, "{}", sched.describe());
        }
        let _ = writeln!(
            s,
            "tikhonov term: {}",
            if self.spec.ablation {
                "off (ablation)"
            } else {
                "on"
            }
        );
        let _ = writeln!(s, "\n[references]");
        let _ = writeln!(s, "x* = {:?}", self.built.saddle.primal);
        let _ = writeln!(s, "lambda* = {:?}", self.built.saddle.dual);
        let _ = writeln!(s, "x_hat* = {:?}", self.built.min_norm.primal);
        let _ = writeln!(
            s,
            "lambda_hat* = {:?} (residual {:e}, {})",
            self.built.min_norm.dual,
            self.built.min_norm.dual_residual,
            if self.built.min_norm.exact {
                "exact"
            } else {
                "approximate"
            }
        );
        for note in &self.built.notes {
            let _ = writeln!(s, "note: {note}");
        }
        let st = &self.trajectory.stats;
        let _ = writeln!(s, "\n[integration]");
        let _ = writeln!(
            s,
            "accepted = {}, rejected = {}, evaluations = {}, samples = {}, last t = {:e}, elapsed = {:.3} s",
            st.accepted,
            st.rejected,
            st.evaluations,
            self.trajectory.len(),
            self.trajectory.last_time().unwrap_or(f64::NAN),
            self.elapsed.as_secs_f64()
        );
        let _ = writeln!(s, "\n[conditions]\n{}", self.conditions.to_text());
        let _ = writeln!(s, "[decay inequality]");
        match &self.decay {
            Some(d) => {
                let _ = writeln!(
                    s,
                    "worst normalized violation = {:e} at t = {:e}; hypotheses {}; {}",
                    d.worst,
                    d.worst_t,
                    if d.conditions_pass {
                        "hold"
                    } else {
                        "fail (informational only)"
                    },
                    if d.certified {
                        "CERTIFIED"
                    } else {
                        "not certified"
                    }
                );
            }
            None => {
                let _ = writeln!(s, "not evaluated");
            }
        }
        let _ = writeln!(
            s,
            "\n[rate fits] (log-log slope over [{:e}, {:e}])",
            self.spec.effective_fit_window().0,
            self.spec.effective_fit_window().1
        );
        for (name, fit) in &self.fits {
            match fit {
                Ok(f) => {
                    let _ = writeln!(
                        s,
                        "{name}: slope = {:.4}, r^2 = {:.4}, points = {}",
                        f.slope, f.r_squared, f.n_points
                    );
                }
                Err(e) => {
                    let _ = writeln!(s, "{name}: no fit ({e})");
                }
            }
        }
        if let Some(last) = self.final_metrics() {
            let _ = writeln!(s, "\n[final sample]");
            let _ = writeln!(s, "{}", MetricSample::CSV_HEADER);
            let _ = writeln!(s, "{}", last.csv_row());
        }
        s
    }

    /// Write the four report files into `dir` (created if needed).
    pub fn write(&self, dir: &Path, config_echo: &str) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_atomic(&dir.join("trajectory.csv"), &self.trajectory_csv())?;
        write_atomic(&dir.join("metrics.csv"), &self.metrics_csv())?;
        write_atomic(&dir.join("conditions.txt"), &self.conditions.to_text())?;
        write_atomic(&dir.join("report.txt"), &self.report_text(config_echo))?;
        Ok(())
    }
}

/// Write via a temporary file in the same directory and rename into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::arg(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Names of the fitted metrics, in report order.
pub const FITTED: [&str; 6] = [
    "lag_gap",
    "feas",
    "scaled_speed",
    "drift",
    "dist_min_norm",
    "grad_err",
];

fn metric_series(rows: &[MetricSample], name: &str) -> Vec<f64> {
    rows.iter()
        .map(|r| match name {
            "lag_gap" => r.lag_gap,
            "feas" => r.feas,
            "scaled_speed" => r.scaled_speed,
            "drift" => r.drift,
            "dist_min_norm" => r.dist_min_norm,
            "grad_err" => r.grad_err,
            _ => unreachable!("unknown metric {name}"),
        })
        .collect()
}

/// Build, audit, integrate and analyse one experiment.
///
/// Integration aborts do not produce an `Err`: the report carries the partial
/// trajectory and a `Failed` status with the abort time.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunReport> {
    spec.validate()?;
    let start = Instant::now();
    let built = spec.scenario.build(spec.sigma)?;
    let schedule = spec.effective_schedule()?;
    let conditions = audit_conditions(&schedule, &default_audit_grid(schedule.t0()))?;
    if !conditions.passes() && !spec.allow_violation {
        return Err(Error::arg(format!(
            "schedule fails the admissibility conditions; set allow_violation to run anyway\n{}",
            conditions.to_text()
        )));
    }

    let cfg = DynamicsConfig::new(built.problem.clone(), schedule.clone(), !spec.ablation)?;
    let samples = log_grid(spec.t0, spec.tf, spec.samples);
    let y0 = built.initial.pack();
    let (trajectory, status) =
        match integrate(&cfg, spec.t0, spec.tf, &y0, &spec.integrator, &samples) {
            Ok(tr) => (tr, RunStatus::Completed),
            Err(Error::Integration(f)) => {
                log::warn!("{f}");
                let f = *f;
                (
                    f.partial,
                    RunStatus::Failed {
                        kind: f.kind,
                        t: f.t,
                    },
                )
            }
            Err(e) => return Err(e),
        };

    let exec = Execution::Parallel;
    let metrics = compute_metrics(
        &trajectory,
        &built.problem,
        &schedule,
        &built.saddle,
        &built.min_norm.primal,
        exec,
    )?;
    let decay = Some(audit_decay_inequality(
        &trajectory,
        &built.problem,
        &schedule,
        &built.saddle,
        exec,
    )?);
    let window = spec.effective_fit_window();
    let times: Vec<f64> = metrics.iter().map(|r| r.t).collect();
    let fits = FITTED
        .iter()
        .map(|&name| {
            let fit =
                fit_rate(&times, &metric_series(&metrics, name), window).map_err(|e| e.to_string());
            (name, fit)
        })
        .collect();

    Ok(RunReport {
        status,
        spec: spec.clone(),
        built,
        conditions,
        trajectory,
        metrics,
        decay,
        fits,
        elapsed: start.elapsed(),
    })
}

/// Summary of an `r` sweep.
#[derive(Clone, Debug)]
pub struct SweepSummary {
    pub rs: Vec<f64>,
    pub final_dist_min_norm: Vec<f64>,
    pub final_lag_gap: Vec<f64>,
    /// `final dist_min_norm` at the smallest `r` ≤ that at the largest `r`.
    pub smaller_r_descends_faster: bool,
    /// `max − min` of `log₁₀` final lag gaps (non-positive gaps excluded).
    pub gap_spread_decades: f64,
    pub all_completed: bool,
}

impl SweepSummary {
    pub fn to_text(&self) -> String {
        let mut s = String::from("r,final_dist_min_norm,final_lag_gap\n");
        for i in 0..self.rs.len() {
            let _ = writeln!(
                s,
                "{},{:e},{:e}",
                self.rs[i], self.final_dist_min_norm[i], self.final_lag_gap[i]
            );
        }
        let _ = writeln!(
            s,
            "\nsmallest r reaches a smaller dist_min_norm than largest r: {}",
            self.smaller_r_descends_faster
        );
        let _ = writeln!(
            s,
            "final lag_gap spread: {:.3} decades",
            self.gap_spread_decades
        );
        let _ = writeln!(s, "all runs completed: {}", self.all_completed);
        s
    }
}

pub fn summarize_sweep(rs: &[f64], reports: &[RunReport]) -> SweepSummary {
    let final_dist: Vec<f64> = reports
        .iter()
        .map(|r| r.final_metrics().map_or(f64::NAN, |m| m.dist_min_norm))
        .collect();
    let final_gap: Vec<f64> = reports
        .iter()
        .map(|r| r.final_metrics().map_or(f64::NAN, |m| m.lag_gap))
        .collect();
    let (imin, imax) = {
        let mut idx: Vec<usize> = (0..rs.len()).collect();
        idx.sort_by(|&a, &b| rs[a].total_cmp(&rs[b]));
        (idx[0], idx[idx.len() - 1])
    };
    let logs: Vec<f64> = final_gap
        .iter()
        .filter(|g| **g > 0.0)
        .map(|g| g.log10())
        .collect();
    let spread = if logs.is_empty() {
        f64::NAN
    } else {
        logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - logs.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    SweepSummary {
        rs: rs.to_vec(),
        smaller_r_descends_faster: final_dist[imin] <= final_dist[imax],
        final_dist_min_norm: final_dist,
        final_lag_gap: final_gap,
        gap_spread_decades: spread,
        all_completed: reports.iter().all(|r| r.completed()),
    }
}

/// Directory name for one sweep member.
pub fn sweep_dir(root: &Path, r: f64) -> PathBuf {
    root.join(format!("r_{r}"))
}

/// Run `base` once per `r` (fanned out over the rayon pool when `exec` is
/// parallel).
pub fn run_sweep(base: &ExperimentSpec, rs: &[f64], exec: Execution) -> Result<Vec<RunReport>> {
    if rs.is_empty() {
        return Err(Error::arg("empty r sweep"));
    }
    par::map_indexed(exec, rs.len(), |i| {
        let mut spec = base.clone();
        spec.eps_kind = EpsKind::Power;
        spec.eps_r = rs[i];
        run_experiment(&spec)
    })
    .into_iter()
    .collect()
}
