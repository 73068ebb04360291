//! Adaptive Bogacki–Shampine 3(2) integration with cubic Hermite dense output.
//!
//! Butcher tableau (FSAL: the fourth stage is the first stage of the next step):
//!
//! ```text
//!   0   |
//!  1/2  | 1/2
//!  3/4  | 0     3/4
//!   1   | 2/9   1/3   4/9
//! ------+----------------------
//!       | 2/9   1/3   4/9   0      (order 3, propagated)
//!       | 7/24  1/4   1/3   1/8    (order 2, error estimate)
//! ```
//!
//! The local error estimate is `h Σ (bᵢ − b*ᵢ) kᵢ` with weights
//! `(−5/72, 1/12, 1/9, −1/8)`, measured in the max norm after componentwise
//! scaling by `atol + rtol·max(|y|, |y_new|)`.

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use crate::dynamics::VectorField;
use crate::error::{Error, Result};

const A21: f64 = 0.5;
const A32: f64 = 0.75;
const B1: f64 = 2.0 / 9.0;
const B2: f64 = 1.0 / 3.0;
const B3: f64 = 4.0 / 9.0;
const E1: f64 = -5.0 / 72.0;
const E2: f64 = 1.0 / 12.0;
const E3: f64 = 1.0 / 9.0;
const E4: f64 = -1.0 / 8.0;

const CANCEL_CHECK_INTERVAL: u64 = 4096;

#[derive(Clone, Debug)]
pub struct IntegratorSettings {
    pub rtol: f64,
    pub atol: f64,
    /// Defaults to `1e-2 (tf − t0) / max(1, ‖F(t0, Y0)‖)`.
    pub h_init: Option<f64>,
    pub h_min: f64,
    /// Defaults to `tf − t0`.
    pub h_max: Option<f64>,
    pub max_steps: u64,
    pub safety: f64,
    /// Keep per-step Hermite data (memory grows with the step count).
    pub record_dense: bool,
    /// Polled every few thousand steps; setting it aborts the run.
    pub cancel: Option<Arc<AtomicBool>>,
    /// Wall-clock limit, polled like `cancel`. Runs cut short by it are not
    /// reproducible; use `max_steps` for deterministic budgets.
    pub deadline: Option<Instant>,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            rtol: 1e-6,
            atol: 1e-9,
            h_init: None,
            h_min: 1e-12,
            h_max: None,
            max_steps: 10_000_000,
            safety: 0.9,
            record_dense: false,
            cancel: None,
            deadline: None,
        }
    }
}

impl IntegratorSettings {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        IntegratorSettings {
            rtol,
            atol,
            ..Default::default()
        }
    }

    fn validate(&self, span: f64) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::arg(format!(
                "tolerances must be positive (rtol = {}, atol = {})",
                self.rtol, self.atol
            )));
        }
        let h_max = self.h_max.unwrap_or(span);
        if !(self.h_min > 0.0 && self.h_min <= h_max) {
            return Err(Error::arg(format!(
                "need 0 < h_min <= h_max (h_min = {}, h_max = {h_max})",
                self.h_min
            )));
        }
        if let Some(h) = self.h_init {
            if !(h > 0.0) {
                return Err(Error::arg(format!("h_init must be positive, got {h}")));
            }
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(Error::arg(format!(
                "safety must be in (0, 1], got {}",
                self.safety
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

/// Hermite data for one accepted step.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSegment {
    pub t0: f64,
    pub t1: f64,
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
    pub f0: Vec<f64>,
    pub f1: Vec<f64>,
}

impl DenseSegment {
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        if t == self.t1 {
            out.copy_from_slice(&self.y1);
            return;
        }
        hermite(
            self.t0,
            self.t1 - self.t0,
            &self.y0,
            &self.f0,
            &self.y1,
            &self.f1,
            t,
            out,
        );
    }
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn hermite(
    t0: f64,
    h: f64,
    y0: &[f64],
    f0: &[f64],
    y1: &[f64],
    f1: &[f64],
    t: f64,
    out: &mut [f64],
) {
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    for i in 0..out.len() {
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
}

/// Sampled solution of an initial-value problem.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    pub stats: StepStats,
    pub dense: Option<Vec<DenseSegment>>,
}

impl Trajectory {
    fn new(dim: usize, capacity: usize, dense: bool) -> Self {
        Trajectory {
            dim,
            times: Vec::with_capacity(capacity),
            states: Vec::with_capacity(capacity * dim),
            stats: StepStats::default(),
            dense: dense.then(Vec::new),
        }
    }

    /// Build a trajectory from explicit samples (e.g. for constructed test cases).
    pub fn from_samples(dim: usize, times: Vec<f64>, states: Vec<f64>) -> Result<Self> {
        if states.len() != times.len() * dim {
            return Err(Error::dim(format!(
                "{} states values for {} samples of dimension {dim}",
                states.len(),
                times.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::arg("sample times must be strictly increasing"));
        }
        Ok(Trajectory {
            dim,
            times,
            states,
            stats: StepStats::default(),
            dense: None,
        })
    }

    fn push(&mut self, t: f64, y: &[f64]) {
        self.times.push(t);
        self.states.extend_from_slice(y);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    /// Interpolate from the stored dense segments, if any.
    pub fn interpolate(&self, t: f64) -> Option<Vec<f64>> {
        let segs = self.dense.as_ref()?;
        let k = segs.partition_point(|s| s.t1 < t);
        let seg = segs.get(k)?;
        if t < seg.t0 {
            return None;
        }
        let mut out = vec![0.0; self.dim];
        seg.eval(t, &mut out);
        Some(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureKind {
    StepUnderflow,
    Budget,
    NonFinite,
    Cancelled,
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureKind::StepUnderflow => "step size fell below h_min (stiffness)",
            FailureKind::Budget => "max_steps exceeded",
            FailureKind::NonFinite => "non-finite field value",
            FailureKind::Cancelled => "cancelled or deadline reached",
        })
    }
}

/// An aborted integration, with everything sampled up to the abort.
#[derive(Clone, Debug)]
pub struct IntegrationFailure {
    pub kind: FailureKind,
    pub t: f64,
    pub partial: Trajectory,
}

impl fmt::Display for IntegrationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "integration aborted at t = {}: {} after {} accepted / {} rejected steps",
            self.t, self.kind, self.partial.stats.accepted, self.partial.stats.rejected
        )
    }
}

impl std::error::Error for IntegrationFailure {}

fn fail(kind: FailureKind, t: f64, partial: Trajectory) -> Error {
    Error::Integration(Box::new(IntegrationFailure { kind, t, partial }))
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn validate_samples(t0: f64, tf: f64, samples: &[f64]) -> Result<Vec<f64>> {
    if samples.iter().any(|&s| !(s >= t0 && s <= tf)) {
        return Err(Error::arg(format!("sample times must lie in [{t0}, {tf}]")));
    }
    if samples.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::arg("sample times must be strictly increasing"));
    }
    let mut grid = Vec::with_capacity(samples.len() + 2);
    if samples.first() != Some(&t0) {
        grid.push(t0);
    }
    grid.extend_from_slice(samples);
    if grid.last() != Some(&tf) {
        grid.push(tf);
    }
    Ok(grid)
}

/// Integrate `Y' = F(t, Y)` from `t0` to `tf`, reporting the state at each
/// requested sample time (plus `t0` and `tf`).
///
/// Samples are interpolated from accepted steps and never influence step
/// selection.
pub fn integrate<F: VectorField + ?Sized>(
    field: &F,
    t0: f64,
    tf: f64,
    y0: &[f64],
    settings: &IntegratorSettings,
    samples: &[f64],
) -> Result<Trajectory> {
    if !(tf > t0) || !t0.is_finite() || !tf.is_finite() {
        return Err(Error::arg(format!(
            "need finite t0 < tf, got t0 = {t0}, tf = {tf}"
        )));
    }
    let dim = field.dim();
    if y0.len() != dim {
        return Err(Error::dim(format!(
            "initial state has length {}, field has dimension {dim}",
            y0.len()
        )));
    }
    if !all_finite(y0) {
        return Err(Error::arg("initial state has non-finite entries"));
    }
    let span = tf - t0;
    settings.validate(span)?;
    let grid = validate_samples(t0, tf, samples)?;
    let h_max = settings.h_max.unwrap_or(span);

    let mut traj = Trajectory::new(dim, grid.len(), settings.record_dense);
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut ytmp = vec![0.0; dim];
    let mut ynew = vec![0.0; dim];
    let mut sample_buf = vec![0.0; dim];

    field.eval(t0, &y, &mut k1);
    traj.stats.evaluations += 1;
    traj.push(t0, &y);
    if !all_finite(&k1) {
        return Err(fail(FailureKind::NonFinite, t0, traj));
    }

    let mut h = match settings.h_init {
        Some(h) => h,
        None => {
            let fnorm = k1.iter().map(|v| v * v).sum::<f64>().sqrt();
            1e-2 * span / fnorm.max(1.0)
        }
    }
    .clamp(settings.h_min, h_max);

    let mut t = t0;
    let mut next_sample = 1;
    let end_slack = 16.0 * f64::EPSILON * tf.abs().max(1.0);

    while t < tf {
        let steps = traj.stats.accepted + traj.stats.rejected;
        if steps >= settings.max_steps {
            return Err(fail(FailureKind::Budget, t, traj));
        }
        if steps.is_multiple_of(CANCEL_CHECK_INTERVAL) {
            let cancelled = settings
                .cancel
                .as_ref()
                .is_some_and(|c| c.load(Ordering::Relaxed))
                || settings.deadline.is_some_and(|d| Instant::now() >= d);
            if cancelled {
                return Err(fail(FailureKind::Cancelled, t, traj));
            }
        }

        let mut step = h;
        let last = t + step >= tf - end_slack;
        if last {
            step = tf - t;
        }
        let t_new = if last { tf } else { t + step };

        for i in 0..dim {
            ytmp[i] = y[i] + step * A21 * k1[i];
        }
        field.eval(t + 0.5 * step, &ytmp, &mut k2);
        for i in 0..dim {
            ytmp[i] = y[i] + step * A32 * k2[i];
        }
        field.eval(t + 0.75 * step, &ytmp, &mut k3);
        for i in 0..dim {
            ynew[i] = y[i] + step * (B1 * k1[i] + B2 * k2[i] + B3 * k3[i]);
        }
        field.eval(t_new, &ynew, &mut k4);
        traj.stats.evaluations += 3;

        if !all_finite(&k2) || !all_finite(&k3) || !all_finite(&ynew) || !all_finite(&k4) {
            return Err(fail(FailureKind::NonFinite, t, traj));
        }

        let mut err: f64 = 0.0;
        for i in 0..dim {
            let e = step * (E1 * k1[i] + E2 * k2[i] + E3 * k3[i] + E4 * k4[i]);
            let scale = settings.atol + settings.rtol * y[i].abs().max(ynew[i].abs());
            err = err.max(e.abs() / scale);
        }

        if err <= 1.0 {
            while next_sample < grid.len() && grid[next_sample] <= t_new {
                let s = grid[next_sample];
                if s == t_new {
                    traj.push(s, &ynew);
                } else {
                    hermite(t, step, &y, &k1, &ynew, &k4, s, &mut sample_buf);
                    traj.push(s, &sample_buf);
                }
                next_sample += 1;
            }
            if let Some(segs) = traj.dense.as_mut() {
                segs.push(DenseSegment {
                    t0: t,
                    t1: t_new,
                    y0: y.clone(),
                    y1: ynew.clone(),
                    f0: k1.clone(),
                    f1: k4.clone(),
                });
            }
            traj.stats.accepted += 1;
            t = t_new;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k4);
            let factor = if err == 0.0 {
                5.0
            } else {
                (settings.safety * err.powf(-1.0 / 3.0)).clamp(0.2, 5.0)
            };
            // A shortened final step says nothing about the natural step size.
            if !last {
                h = (step * factor).min(h_max);
            }
            if traj.stats.accepted.is_multiple_of(1 << 22) {
                log::debug!("t = {t:e}, h = {h:e}, {} steps", traj.stats.accepted);
            }
        } else {
            traj.stats.rejected += 1;
            let factor = (settings.safety * err.powf(-1.0 / 3.0)).clamp(0.2, 5.0);
            h = step * factor;
            if h < settings.h_min {
                return Err(fail(FailureKind::StepUnderflow, t, traj));
            }
        }
    }
    Ok(traj)
}

/// Integrate with the third-order member at constant step `h` and return the
/// Euclidean distance of the final state from `reference`.
pub fn fixed_step_order_probe<F: VectorField + ?Sized>(
    field: &F,
    t0: f64,
    tf: f64,
    y0: &[f64],
    h: f64,
    reference: &[f64],
) -> Result<f64> {
    let dim = field.dim();
    if y0.len() != dim || reference.len() != dim {
        return Err(Error::dim(
            "probe: state and reference must match the field dimension",
        ));
    }
    if !(h > 0.0 && tf > t0) {
        return Err(Error::arg("probe: need h > 0 and tf > t0"));
    }
    let n_real = (tf - t0) / h;
    let n = n_real.round();
    if (n - n_real).abs() > 1e-9 * n_real.max(1.0) {
        return Err(Error::arg(format!(
            "probe: (tf - t0)/h = {n_real} is not an integer"
        )));
    }
    let n = n as u64;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut ytmp = vec![0.0; dim];
    for step in 0..n {
        let t = t0 + step as f64 * h;
        field.eval(t, &y, &mut k1);
        for i in 0..dim {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        field.eval(t + 0.5 * h, &ytmp, &mut k2);
        for i in 0..dim {
            ytmp[i] = y[i] + h * A32 * k2[i];
        }
        field.eval(t + 0.75 * h, &ytmp, &mut k3);
        for i in 0..dim {
            y[i] += h * (B1 * k1[i] + B2 * k2[i] + B3 * k3[i]);
        }
        if !all_finite(&y) {
            return Err(Error::NonFinite { t: t + h });
        }
    }
    Ok(y.iter()
        .zip(reference)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}
