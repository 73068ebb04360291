//! Coefficient schedules `(θ, γ, β, ε)` and the audit of the admissibility
//! conditions
//!
//! ```text
//! (2θ − 1)β + θtβ̇ ≤ 0          (scaling)
//! γ + tγ̇ − tβε ≤ 0             (damping)
//! θtγ − θ − 1 ≥ 0              (coupling)
//! ```
//!
//! For the built-in families every condition is a short sum of powers of `t`,
//! which the auditor builds symbolically so that exact cancellations (such as
//! `γ + tγ̇ = tβε`) give margins that are exactly zero.

use std::fmt;
use std::sync::Arc;

use crate::analysis::quadrature::adaptive_simpson;
use crate::error::{Error, Result};
use crate::par::{self, Execution};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied coefficient: value and first derivative.
#[derive(Clone)]
pub struct CustomFn {
    pub label: String,
    pub value: ScalarFn,
    pub derivative: ScalarFn,
}

impl CustomFn {
    pub fn new(
        label: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CustomFn {
            label: label.into(),
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        }
    }
}

impl fmt::Debug for CustomFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Custom({})", self.label)
    }
}

/// Viscous damping `γ(t)`.
#[derive(Clone, Debug)]
pub enum DampingFamily {
    /// `α / t`
    PowerQuotient {
        alpha: f64,
    },
    /// `(2αt − 1) / t²`
    RationalA {
        alpha: f64,
    },
    /// `(1 + αt) / t²`
    RationalB {
        alpha: f64,
    },
    Custom(CustomFn),
}

/// Time scaling `β(t)`.
#[derive(Clone, Debug)]
pub enum ScalingFamily {
    /// `t^exp`
    Power {
        exp: f64,
    },
    Constant {
        value: f64,
    },
    Custom(CustomFn),
}

/// Tikhonov coefficient `ε(t)`.
#[derive(Clone, Debug)]
pub enum TikhonovFamily {
    /// `c / t^r`
    PowerDecay {
        c: f64,
        r: f64,
    },
    Zero,
    Custom(CustomFn),
}

impl DampingFamily {
    #[inline]
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match self {
            DampingFamily::PowerQuotient { alpha } => (alpha / t, -alpha / (t * t)),
            DampingFamily::RationalA { alpha } => {
                let t2 = t * t;
                (
                    (2.0 * alpha * t - 1.0) / t2,
                    -2.0 * alpha / t2 + 2.0 / (t2 * t),
                )
            }
            DampingFamily::RationalB { alpha } => {
                let t2 = t * t;
                ((1.0 + alpha * t) / t2, -alpha / t2 - 2.0 / (t2 * t))
            }
            DampingFamily::Custom(c) => ((c.value)(t), (c.derivative)(t)),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            DampingFamily::PowerQuotient { alpha } => format!("alpha/t (alpha = {alpha})"),
            DampingFamily::RationalA { alpha } => format!("(2 alpha t - 1)/t^2 (alpha = {alpha})"),
            DampingFamily::RationalB { alpha } => format!("(1 + alpha t)/t^2 (alpha = {alpha})"),
            DampingFamily::Custom(c) => format!("custom ({})", c.label),
        }
    }

    /// `γ + tγ̇` as a power sum.
    fn gamma_plus_t_dgamma(&self) -> Option<PowerSum> {
        let mut s = PowerSum::default();
        match self {
            DampingFamily::PowerQuotient { .. } => {}
            DampingFamily::RationalA { .. } => s.add(1.0, -2.0, 1.0),
            DampingFamily::RationalB { .. } => s.add(-1.0, -2.0, 1.0),
            DampingFamily::Custom(_) => return None,
        }
        Some(s)
    }

    /// `θtγ − θ − 1` as a power sum.
    fn coupling(&self, theta: f64) -> Option<PowerSum> {
        let mut s = PowerSum::default();
        match *self {
            DampingFamily::PowerQuotient { alpha } => {
                s.add(
                    theta * (alpha - 1.0) - 1.0,
                    0.0,
                    theta * alpha.abs() + theta + 1.0,
                );
            }
            DampingFamily::RationalA { alpha } => {
                s.add(
                    theta * (2.0 * alpha - 1.0) - 1.0,
                    0.0,
                    theta * 2.0 * alpha.abs() + theta + 1.0,
                );
                s.add(-theta, -1.0, theta);
            }
            DampingFamily::RationalB { alpha } => {
                s.add(
                    theta * (alpha - 1.0) - 1.0,
                    0.0,
                    theta * alpha.abs() + theta + 1.0,
                );
                s.add(theta, -1.0, theta);
            }
            DampingFamily::Custom(_) => return None,
        }
        Some(s)
    }
}

impl ScalingFamily {
    #[inline]
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match self {
            ScalingFamily::Power { exp } => {
                let v = t.powf(*exp);
                (v, exp * v / t)
            }
            ScalingFamily::Constant { value } => (*value, 0.0),
            ScalingFamily::Custom(c) => ((c.value)(t), (c.derivative)(t)),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ScalingFamily::Power { exp } => format!("t^{exp}"),
            ScalingFamily::Constant { value } => format!("constant {value}"),
            ScalingFamily::Custom(c) => format!("custom ({})", c.label),
        }
    }

    /// `β = k t^p` as `(k, p)`.
    fn power(&self) -> Option<(f64, f64)> {
        match *self {
            ScalingFamily::Power { exp } => Some((1.0, exp)),
            ScalingFamily::Constant { value } => Some((value, 0.0)),
            ScalingFamily::Custom(_) => None,
        }
    }
}

impl TikhonovFamily {
    #[inline]
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match self {
            TikhonovFamily::PowerDecay { c, r } => {
                let v = c * t.powf(-r);
                (v, -r * v / t)
            }
            TikhonovFamily::Zero => (0.0, 0.0),
            TikhonovFamily::Custom(c) => ((c.value)(t), (c.derivative)(t)),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            TikhonovFamily::PowerDecay { c, r } => format!("{c}/t^{r}"),
            TikhonovFamily::Zero => "zero".to_string(),
            TikhonovFamily::Custom(c) => format!("custom ({})", c.label),
        }
    }

    /// `ε = c t^{−r}` as `(c, r)`; `Zero` is `c = 0`.
    fn power(&self) -> Option<(f64, f64)> {
        match *self {
            TikhonovFamily::PowerDecay { c, r } => Some((c, r)),
            TikhonovFamily::Zero => Some((0.0, 1.0)),
            TikhonovFamily::Custom(_) => None,
        }
    }
}

/// `(γ, γ̇, β, β̇, ε, ε̇)` at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficients {
    pub gamma: f64,
    pub dgamma: f64,
    pub beta: f64,
    pub dbeta: f64,
    pub eps: f64,
    pub deps: f64,
}

#[derive(Clone, Debug)]
pub struct CoefficientSchedule {
    theta: f64,
    gamma: DampingFamily,
    beta: ScalingFamily,
    eps: TikhonovFamily,
    t0: f64,
}

impl CoefficientSchedule {
    pub fn new(
        theta: f64,
        gamma: DampingFamily,
        beta: ScalingFamily,
        eps: TikhonovFamily,
        t0: f64,
    ) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::arg(format!("theta must be > 0, got {theta}")));
        }
        if !(t0 > 0.0) || !t0.is_finite() {
            return Err(Error::arg(format!("t0 must be > 0, got {t0}")));
        }
        match gamma {
            DampingFamily::PowerQuotient { alpha } if !(alpha > 0.0) => {
                return Err(Error::arg(format!("alpha/t needs alpha > 0, got {alpha}")))
            }
            DampingFamily::RationalA { alpha } if !(alpha > 0.0 && 2.0 * alpha * t0 > 1.0) => {
                return Err(Error::arg(format!(
                    "(2 alpha t - 1)/t^2 needs alpha > 0 and 2 alpha t0 > 1, got alpha = {alpha}, t0 = {t0}"
                )))
            }
            DampingFamily::RationalB { alpha } if !(alpha >= 0.0) => {
                return Err(Error::arg(format!(
                    "(1 + alpha t)/t^2 needs alpha >= 0, got {alpha}"
                )))
            }
            _ => {}
        }
        match beta {
            ScalingFamily::Power { exp } if !(exp >= 0.0) || !exp.is_finite() => {
                return Err(Error::arg(format!("beta exponent must be >= 0, got {exp}")))
            }
            ScalingFamily::Constant { value } if !(value > 0.0) || !value.is_finite() => {
                return Err(Error::arg(format!(
                    "constant beta must be > 0, got {value}"
                )))
            }
            _ => {}
        }
        match eps {
            TikhonovFamily::PowerDecay { c, r } => {
                if !(c >= 0.0) || !c.is_finite() {
                    return Err(Error::arg(format!(
                        "eps coefficient c must be >= 0, got {c}"
                    )));
                }
                if !(r > 0.0) || !r.is_finite() {
                    return Err(Error::arg(format!("eps exponent r must be > 0, got {r}")));
                }
            }
            TikhonovFamily::Zero | TikhonovFamily::Custom(_) => {}
        }
        let s = CoefficientSchedule {
            theta,
            gamma,
            beta,
            eps,
            t0,
        };
        s.check_custom_families()?;
        Ok(s)
    }

    /// Custom callables are only checkable on a grid.
    fn check_custom_families(&self) -> Result<()> {
        let grid = default_audit_grid(self.t0);
        for &t in &grid {
            let c = self.values(t);
            if matches!(self.gamma, DampingFamily::Custom(_)) && !(c.gamma > 0.0) {
                return Err(Error::arg(format!(
                    "custom gamma is not positive at t = {t}"
                )));
            }
            if matches!(self.beta, ScalingFamily::Custom(_)) && !(c.beta > 0.0) {
                return Err(Error::arg(format!(
                    "custom beta is not positive at t = {t}"
                )));
            }
            if matches!(self.eps, TikhonovFamily::Custom(_)) && !(c.eps >= 0.0 && c.deps <= 0.0) {
                return Err(Error::arg(format!(
                    "custom eps must be nonnegative and non-increasing (fails at t = {t})"
                )));
            }
        }
        Ok(())
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn gamma(&self) -> &DampingFamily {
        &self.gamma
    }

    pub fn beta(&self) -> &ScalingFamily {
        &self.beta
    }

    pub fn eps(&self) -> &TikhonovFamily {
        &self.eps
    }

    /// The same schedule with `ε ≡ 0`.
    pub fn without_tikhonov(&self) -> Self {
        CoefficientSchedule {
            eps: TikhonovFamily::Zero,
            ..self.clone()
        }
    }

    /// All six coefficient values; `t < t0` is a domain error.
    pub fn eval(&self, t: f64) -> Result<Coefficients> {
        if !(t >= self.t0) {
            return Err(Error::Domain { t, t0: self.t0 });
        }
        Ok(self.values(t))
    }

    /// [`eval`](Self::eval) without the domain check, for hot loops.
    #[inline]
    pub fn values(&self, t: f64) -> Coefficients {
        let (gamma, dgamma) = self.gamma.eval(t);
        let (beta, dbeta) = self.beta.eval(t);
        let (eps, deps) = self.eps.eval(t);
        Coefficients {
            gamma,
            dgamma,
            beta,
            dbeta,
            eps,
            deps,
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "theta = {}, gamma = {}, beta = {}, eps = {}, t0 = {}",
            self.theta,
            self.gamma.describe(),
            self.beta.describe(),
            self.eps.describe(),
            self.t0
        )
    }

    /// `tβε = ck t^{1+p−r}` for power families.
    fn t_beta_eps(&self) -> Option<PowerSum> {
        let (k, p) = self.beta.power()?;
        let (c, r) = self.eps.power()?;
        let mut s = PowerSum::default();
        s.add(c * k, 1.0 + p - r, (c * k).abs());
        Some(s)
    }

    fn scaling_sum(&self) -> Option<PowerSum> {
        let (k, p) = self.beta.power()?;
        let mut s = PowerSum::default();
        s.add(
            k * ((2.0 * self.theta - 1.0) + self.theta * p),
            p,
            k * ((2.0 * self.theta - 1.0).abs() + self.theta * p),
        );
        Some(s)
    }

    fn damping_sum(&self) -> Option<PowerSum> {
        let mut s = self.gamma.gamma_plus_t_dgamma()?;
        s.merge_negated(&self.t_beta_eps()?);
        Some(s)
    }

    fn coupling_sum(&self) -> Option<PowerSum> {
        self.gamma.coupling(self.theta)
    }

    fn direct_margins(&self, t: f64) -> ([f64; 3], [f64; 3]) {
        let c = self.values(t);
        let th = self.theta;
        let m6 = (2.0 * th - 1.0) * c.beta + th * t * c.dbeta;
        let s6 = ((2.0 * th - 1.0) * c.beta).abs() + (th * t * c.dbeta).abs();
        let m7 = c.gamma + t * c.dgamma - t * c.beta * c.eps;
        let s7 = c.gamma.abs() + (t * c.dgamma).abs() + (t * c.beta * c.eps).abs();
        let m8 = th * t * c.gamma - th - 1.0;
        let s8 = (th * t * c.gamma).abs() + th + 1.0;
        ([m6, m7, m8], [s6, s7, s8])
    }

    /// `∫_{t0}^{t} sβ(s)ε(s) ds`: closed form for power families, adaptive
    /// Simpson (relative tolerance 1e-10) otherwise.
    pub fn weighted_tikhonov_integral(&self, t: f64) -> Result<f64> {
        if !(t >= self.t0) {
            return Err(Error::Domain { t, t0: self.t0 });
        }
        match (self.beta.power(), self.eps.power()) {
            (Some((k, p)), Some((c, r))) => {
                let ck = c * k;
                if ck == 0.0 {
                    return Ok(0.0);
                }
                Ok(ck * power_integral(1.0 + p - r, self.t0, t))
            }
            _ => Ok(adaptive_simpson(
                |s| {
                    let c = self.values(s);
                    s * c.beta * c.eps
                },
                self.t0,
                t,
                1e-10,
            )),
        }
    }
}

/// `∫_{a}^{b} s^q ds`, stable when `q` is close to −1.
fn power_integral(q: f64, a: f64, b: f64) -> f64 {
    let e = q + 1.0;
    let l = (b / a).ln();
    if e.abs() < 1e-300 {
        l
    } else {
        a.powf(e) * (e * l).exp_m1() / e
    }
}

/// `Σ cᵢ t^{pᵢ}` with like exponents merged.
///
/// Each term also carries the magnitude of what was summed into it, so that a
/// coefficient that is zero up to rounding can be recognised as such.
#[derive(Clone, Debug, Default)]
struct PowerSum {
    terms: Vec<Term>,
}

#[derive(Clone, Copy, Debug)]
struct Term {
    coef: f64,
    exp: f64,
    mag: f64,
}

/// Rounding allowance for boundary cases, in units of the summed magnitude.
const ROUNDING: f64 = 16.0 * f64::EPSILON;

impl PowerSum {
    fn add(&mut self, coef: f64, exp: f64, mag: f64) {
        if let Some(t) = self
            .terms
            .iter_mut()
            .find(|t| (t.exp - exp).abs() <= 1e-12 * exp.abs().max(1.0))
        {
            t.coef += coef;
            t.mag += mag;
        } else {
            self.terms.push(Term { coef, exp, mag });
        }
    }

    fn merge_negated(&mut self, other: &PowerSum) {
        for t in &other.terms {
            self.add(-t.coef, t.exp, t.mag);
        }
    }

    fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|x| x.coef * t.powf(x.exp)).sum()
    }

    /// Terms whose coefficient is not zero up to rounding, by decreasing exponent.
    fn significant(&self) -> Vec<Term> {
        let mut v: Vec<Term> = self
            .terms
            .iter()
            .copied()
            .filter(|t| t.coef.abs() > ROUNDING * t.mag)
            .collect();
        v.sort_by(|a, b| b.exp.total_cmp(&a.exp));
        v
    }

    /// Whether the sum is `≥ 0` on all of `[t0, ∞)`, or `None` if the shape is
    /// too complex to decide. A sum of powers with at most one sign change in
    /// its coefficients has at most one positive root, so the sign on
    /// `[t0, ∞)` is fixed by the value at `t0` and the leading term.
    fn nonnegative_from(&self, t0: f64) -> Option<bool> {
        let sig = self.significant();
        if sig.is_empty() {
            return Some(true);
        }
        let changes = sig
            .windows(2)
            .filter(|w| w[0].coef.signum() != w[1].coef.signum())
            .count();
        if changes > 1 {
            return None;
        }
        let at_t0: f64 = sig.iter().map(|x| x.coef * t0.powf(x.exp)).sum();
        let scale: f64 = sig.iter().map(|x| x.mag * t0.powf(x.exp)).sum();
        Some(sig[0].coef > 0.0 && at_t0 >= -ROUNDING * scale)
    }
}

/// Finiteness classification of an improper integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriState {
    Finite,
    Infinite,
    Unknown,
}

impl fmt::Display for TriState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TriState::Finite => "finite",
            TriState::Infinite => "infinite",
            TriState::Unknown => "unknown",
        })
    }
}

/// Value of an improper integral over `[t0, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IntegralValue {
    Finite(f64),
    Divergent,
}

/// Outcome of one condition check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

/// One admissibility condition: the worst grid margin and the verdict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionCheck {
    /// Worst value over the audit grid (max for scaling/damping, min for coupling).
    pub margin: f64,
    pub verdict: Verdict,
    /// True when the verdict covers all of `[t0, ∞)` analytically.
    pub closed_form: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub scaling: ConditionCheck,
    pub damping: ConditionCheck,
    pub coupling: ConditionCheck,
    /// `∫ tβε < ∞`
    pub fast_regime: TriState,
    /// `∫ βε/t < ∞`
    pub slow_regime: TriState,
    pub fast_integral: Option<IntegralValue>,
    pub slow_integral: Option<IntegralValue>,
    /// `t²βε → ∞` (needed for strong convergence).
    pub t2_beta_eps_diverges: Option<bool>,
    /// `liminf β > 0`.
    pub beta_bounded_below: Option<bool>,
    /// `β → ∞`.
    pub beta_unbounded: Option<bool>,
    pub grid_points: usize,
    pub grid_range: (f64, f64),
}

impl ConditionReport {
    pub fn passes(&self) -> bool {
        [self.scaling, self.damping, self.coupling]
            .iter()
            .all(|c| c.verdict == Verdict::Pass)
    }

    pub fn to_text(&self) -> String {
        let line = |name: &str, rel: &str, c: &ConditionCheck| {
            format!(
                "{name} ({rel}): {} margin = {:e} [{}]\n",
                c.verdict,
                c.margin,
                if c.closed_form { "closed form" } else { "grid" }
            )
        };
        let integral = |v: &Option<IntegralValue>| match v {
            Some(IntegralValue::Finite(x)) => format!("{x:e}"),
            Some(IntegralValue::Divergent) => "divergent".to_string(),
            None => "n/a".to_string(),
        };
        let opt = |v: Option<bool>| match v {
            Some(true) => "yes",
            Some(false) => "no",
            None => "unknown",
        };
        let mut s = String::new();
        s.push_str(&line(
            "scaling",
            "(2theta-1)beta + theta t beta' <= 0",
            &self.scaling,
        ));
        s.push_str(&line(
            "damping",
            "gamma + t gamma' - t beta eps <= 0",
            &self.damping,
        ));
        s.push_str(&line(
            "coupling",
            "theta t gamma - theta - 1 >= 0",
            &self.coupling,
        ));
        s.push_str(&format!(
            "fast_regime (int t beta eps < inf): {} value = {}\n",
            self.fast_regime,
            integral(&self.fast_integral)
        ));
        s.push_str(&format!(
            "slow_regime (int beta eps / t < inf): {} value = {}\n",
            self.slow_regime,
            integral(&self.slow_integral)
        ));
        s.push_str(&format!(
            "t^2 beta eps -> inf: {}\nliminf beta > 0: {}\nbeta -> inf: {}\n",
            opt(self.t2_beta_eps_diverges),
            opt(self.beta_bounded_below),
            opt(self.beta_unbounded)
        ));
        s.push_str(&format!(
            "grid: {} log-spaced points on [{:e}, {:e}]\nall conditions: {}\n",
            self.grid_points,
            self.grid_range.0,
            self.grid_range.1,
            if self.passes() { "PASS" } else { "FAIL" }
        ));
        s
    }
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|k| {
                    if k == 0 {
                        lo
                    } else if k + 1 == count {
                        hi
                    } else {
                        (a + (b - a) * k as f64 / (count - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

pub const MIN_AUDIT_POINTS: usize = 64;

/// 256 log-spaced points on `[t0, 10⁶]` (or `[t0, 10 t0]` for very late starts).
pub fn default_audit_grid(t0: f64) -> Vec<f64> {
    log_grid(t0, 1e6f64.max(10.0 * t0), 256)
}

/// Check the scaling, damping and coupling conditions and classify the integrability regimes.
pub fn audit_conditions(s: &CoefficientSchedule, grid: &[f64]) -> Result<ConditionReport> {
    if grid.len() < MIN_AUDIT_POINTS {
        return Err(Error::arg(format!(
            "audit grid needs at least {MIN_AUDIT_POINTS} points, got {}",
            grid.len()
        )));
    }
    if grid.iter().any(|&t| !(t >= s.t0) || !t.is_finite()) {
        return Err(Error::arg(format!(
            "audit grid must lie in [t0, inf) with t0 = {}",
            s.t0
        )));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::arg("audit grid must be strictly increasing"));
    }

    let sums = [s.scaling_sum(), s.damping_sum(), s.coupling_sum()];
    // Orientation: scaling/7 need ≤ 0, coupling needs ≥ 0.
    let sign = [-1.0, -1.0, 1.0];

    let per_point = par::map_indexed(Execution::Parallel, grid.len(), |i| {
        let t = grid[i];
        let (direct, scale) = s.direct_margins(t);
        let mut out = [(0.0, 0.0); 3];
        for k in 0..3 {
            out[k] = match &sums[k] {
                Some(ps) => (ps.eval(t), scale[k]),
                None => (direct[k], scale[k]),
            };
        }
        out
    });

    let mut checks = [ConditionCheck {
        margin: 0.0,
        verdict: Verdict::Pass,
        closed_form: false,
    }; 3];
    for k in 0..3 {
        let oriented = |p: &[(f64, f64); 3]| sign[k] * p[k].0;
        let worst = per_point
            .iter()
            .min_by(|a, b| oriented(a).total_cmp(&oriented(b)))
            .expect("grid is non-empty");
        let margin = worst[k].0;
        let grid_ok = per_point
            .iter()
            .all(|p| sign[k] * p[k].0 >= -ROUNDING * p[k].1);
        let closed = sums[k].as_ref().and_then(|ps| {
            let mut oriented_sum = PowerSum::default();
            for t in &ps.terms {
                oriented_sum.add(sign[k] * t.coef, t.exp, t.mag);
            }
            oriented_sum.nonnegative_from(s.t0)
        });
        checks[k] = ConditionCheck {
            margin: if margin == 0.0 { 0.0 } else { margin },
            verdict: Verdict::from_bool(closed.unwrap_or(grid_ok)),
            closed_form: closed.is_some(),
        };
    }

    let powers = s.beta.power().zip(s.eps.power());
    let (fast_regime, slow_regime, fast_integral, slow_integral, t2) = match powers {
        Some(((k, p), (c, r))) => {
            let ck = c * k;
            if ck == 0.0 {
                (
                    TriState::Finite,
                    TriState::Finite,
                    Some(IntegralValue::Finite(0.0)),
                    Some(IntegralValue::Finite(0.0)),
                    Some(false),
                )
            } else {
                let fast = if r > p + 2.0 {
                    IntegralValue::Finite(ck * s.t0.powf(2.0 + p - r) / (r - p - 2.0))
                } else {
                    IntegralValue::Divergent
                };
                let slow = if r > p {
                    IntegralValue::Finite(ck * s.t0.powf(p - r) / (r - p))
                } else {
                    IntegralValue::Divergent
                };
                let tri = |v: &IntegralValue| match v {
                    IntegralValue::Finite(_) => TriState::Finite,
                    IntegralValue::Divergent => TriState::Infinite,
                };
                (
                    tri(&fast),
                    tri(&slow),
                    Some(fast),
                    Some(slow),
                    Some(r < p + 2.0),
                )
            }
        }
        None => (TriState::Unknown, TriState::Unknown, None, None, None),
    };
    let (bounded_below, unbounded) = match s.beta.power() {
        Some((k, p)) => (Some(k > 0.0), Some(p > 0.0)),
        None => (None, None),
    };

    Ok(ConditionReport {
        scaling: checks[0],
        damping: checks[1],
        coupling: checks[2],
        fast_regime,
        slow_regime,
        fast_integral,
        slow_integral,
        t2_beta_eps_diverges: t2,
        beta_bounded_below: bounded_below,
        beta_unbounded: unbounded,
        grid_points: grid.len(),
        grid_range: (grid[0], grid[grid.len() - 1]),
    })
}

/// `∫_{t0}^∞ tβ(t)ε(t) dt` for power families; `None` otherwise.
pub fn closed_form_fast_integral(s: &CoefficientSchedule) -> Option<IntegralValue> {
    let (k, p) = s.beta.power()?;
    let (c, r) = s.eps.power()?;
    let ck = c * k;
    Some(if ck == 0.0 {
        IntegralValue::Finite(0.0)
    } else if r > p + 2.0 {
        IntegralValue::Finite(ck * s.t0.powf(2.0 + p - r) / (r - p - 2.0))
    } else {
        IntegralValue::Divergent
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sched(
        theta: f64,
        gamma: DampingFamily,
        beta: ScalingFamily,
        eps: TikhonovFamily,
        t0: f64,
    ) -> CoefficientSchedule {
        CoefficientSchedule::new(theta, gamma, beta, eps, t0).unwrap()
    }

    fn power_family(r: f64) -> CoefficientSchedule {
        sched(
            1.0 / 12.0,
            DampingFamily::PowerQuotient { alpha: 13.0 },
            ScalingFamily::Power { exp: 1.0 },
            TikhonovFamily::PowerDecay { c: 3.0, r },
            1.0,
        )
    }

    fn rational_family(t0: f64) -> CoefficientSchedule {
        sched(
            1.0 / 6.0,
            DampingFamily::RationalA { alpha: 4.0 },
            ScalingFamily::Power { exp: 1.0 },
            TikhonovFamily::PowerDecay { c: 1.0, r: 4.0 },
            t0,
        )
    }

    #[test]
    fn eval_examples() {
        let s = power_family(1.1);
        let c = s.eval(2.0).unwrap();
        assert_eq!((c.gamma, c.dgamma), (6.5, -3.25));
        let c = s.eval(1.0).unwrap();
        assert_eq!(c.eps, 3.0);
        assert_relative_eq!(c.deps, -3.3, max_relative = 1e-15);

        let (g, dg) = DampingFamily::RationalA { alpha: 3.0 }.eval(1.0);
        assert_eq!((g, dg), (5.0, -4.0));
    }

    #[test]
    fn eval_before_t0_is_domain_error() {
        let s = power_family(1.1);
        assert!(matches!(s.eval(0.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn invalid_parameters_rejected() {
        let g = DampingFamily::PowerQuotient { alpha: 13.0 };
        let b = ScalingFamily::Power { exp: 1.0 };
        let e = TikhonovFamily::Zero;
        assert!(CoefficientSchedule::new(0.0, g.clone(), b.clone(), e.clone(), 1.0).is_err());
        assert!(CoefficientSchedule::new(1.0, g.clone(), b.clone(), e.clone(), 0.0).is_err());
        assert!(CoefficientSchedule::new(
            1.0,
            DampingFamily::RationalA { alpha: 0.25 },
            b.clone(),
            e.clone(),
            1.0
        )
        .is_err());
        assert!(CoefficientSchedule::new(
            1.0,
            g.clone(),
            ScalingFamily::Power { exp: -1.0 },
            e.clone(),
            1.0
        )
        .is_err());
        assert!(CoefficientSchedule::new(
            1.0,
            g.clone(),
            b.clone(),
            TikhonovFamily::PowerDecay { c: 1.0, r: 0.0 },
            1.0
        )
        .is_err());
        let growing = CustomFn::new("t", |t| t, |_| 1.0);
        assert!(CoefficientSchedule::new(1.0, g, b, TikhonovFamily::Custom(growing), 1.0).is_err());
    }

    #[test]
    fn power_family_boundary_passes() {
        let s = power_family(4.0);
        let rep = audit_conditions(&s, &default_audit_grid(1.0)).unwrap();
        assert_eq!(rep.coupling.margin, 0.0);
        assert_eq!(rep.coupling.verdict, Verdict::Pass);
        assert!(rep.coupling.closed_form);
        // γ + tγ̇ = 0, so damping is −tβε < 0.
        assert!(rep.damping.margin < 0.0);
        assert!(rep.passes());
        assert_eq!(rep.fast_regime, TriState::Finite);
    }

    #[test]
    fn rational_family_damping_is_exactly_zero() {
        let s = rational_family(1.5);
        let rep = audit_conditions(&s, &default_audit_grid(1.5)).unwrap();
        assert_eq!(rep.damping.margin, 0.0);
        assert_eq!(rep.damping.verdict, Verdict::Pass);
        assert!(rep.passes(), "{}", rep.to_text());
    }

    #[test]
    fn theta_too_large_fails_scaling_condition() {
        let s = sched(
            1.0,
            DampingFamily::PowerQuotient { alpha: 2.0 },
            ScalingFamily::Power { exp: 1.0 },
            TikhonovFamily::PowerDecay { c: 3.0, r: 1.1 },
            1.0,
        );
        let rep = audit_conditions(&s, &default_audit_grid(1.0)).unwrap();
        assert_eq!(rep.scaling.verdict, Verdict::Fail);
        // ((2+1)·1 − 1) t² at the largest grid point.
        assert_relative_eq!(rep.scaling.margin, 2.0 * 1e6, max_relative = 1e-12);
        assert!(!rep.passes());
    }

    #[test]
    fn small_grid_rejected() {
        let s = power_family(1.1);
        assert!(audit_conditions(&s, &log_grid(1.0, 10.0, 63)).is_err());
        assert!(audit_conditions(&s, &log_grid(0.5, 10.0, 64)).is_err());
    }

    #[test]
    fn fast_integral_closed_forms() {
        for (t0, expected) in [(1.0, 1.0), (2.0, 0.5)] {
            match closed_form_fast_integral(&rational_family(t0)) {
                Some(IntegralValue::Finite(v)) => {
                    assert_relative_eq!(v, expected, max_relative = 1e-12)
                }
                other => panic!("{other:?}"),
            }
        }
        let zero = power_family(1.1).without_tikhonov();
        assert_eq!(
            closed_form_fast_integral(&zero),
            Some(IntegralValue::Finite(0.0))
        );
        assert_eq!(
            closed_form_fast_integral(&power_family(1.1)),
            Some(IntegralValue::Divergent)
        );
    }

    #[test]
    fn regimes_for_strong_convergence_window() {
        let rep = audit_conditions(&power_family(1.1), &default_audit_grid(1.0)).unwrap();
        assert_eq!(rep.fast_regime, TriState::Infinite);
        assert_eq!(rep.slow_regime, TriState::Finite);
        assert_eq!(rep.t2_beta_eps_diverges, Some(true));
        assert_eq!(rep.beta_bounded_below, Some(true));
    }

    #[test]
    fn weighted_integral_matches_quadrature() {
        for r in [1.1, 3.0, 4.0] {
            let s = power_family(r);
            let closed = s.weighted_tikhonov_integral(100.0).unwrap();
            let numeric = adaptive_simpson(
                |t| {
                    let c = s.values(t);
                    t * c.beta * c.eps
                },
                1.0,
                100.0,
                1e-12,
            );
            assert_relative_eq!(closed, numeric, max_relative = 1e-10);
        }
    }

    #[test]
    fn custom_families_use_the_grid() {
        let g = CustomFn::new("13/t", |t| 13.0 / t, |t| -13.0 / (t * t));
        let s = sched(
            1.0 / 12.0,
            DampingFamily::Custom(g),
            ScalingFamily::Power { exp: 1.0 },
            TikhonovFamily::PowerDecay { c: 3.0, r: 4.0 },
            1.0,
        );
        let rep = audit_conditions(&s, &default_audit_grid(1.0)).unwrap();
        assert!(!rep.damping.closed_form && !rep.coupling.closed_form);
        assert!(rep.scaling.closed_form);
        assert!(rep.passes());
        let custom_eps = CustomFn::new("e^-t", |t: f64| (-t).exp(), |t: f64| -(-t).exp());
        let s = sched(
            1.0 / 12.0,
            DampingFamily::PowerQuotient { alpha: 13.0 },
            ScalingFamily::Power { exp: 1.0 },
            TikhonovFamily::Custom(custom_eps),
            1.0,
        );
        let rep = audit_conditions(&s, &default_audit_grid(1.0)).unwrap();
        assert_eq!(rep.fast_regime, TriState::Unknown);
        assert_eq!(rep.slow_regime, TriState::Unknown);
        assert!(rep.fast_integral.is_none());
    }
}
