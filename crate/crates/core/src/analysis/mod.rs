//! Lyapunov functions, decay audits, per-sample metrics, rate fits and the
//! Tikhonov path.

pub mod lyapunov;
pub mod metrics;
pub mod quadrature;
pub mod rate;
pub mod tikhonov;

pub use lyapunov::{
    audit_decay_inequality, lyapunov_g, lyapunov_ghat, lyapunov_gtilde, DecayAudit, DECAY_SLACK,
};
pub use metrics::{compute_metrics, lagrangian_gap, MetricSample};
pub use rate::{fit_rate, RateFit};
pub use tikhonov::{tikhonov_path, tikhonov_point};
