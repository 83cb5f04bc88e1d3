//! Trajectory-error metrics, controlled loss injection, the interference
//! sweep and the forecast-window study.

mod bursts;
mod metrics;
mod sweep;
mod window;

pub use bursts::burst_loss_outcomes;
pub use metrics::{aligned_rows, rmse, rmse_rows, slot_sq_errors};
pub use sweep::{run_sweep, task_seed, SweepCell, SweepGrid, SweepResult};
pub use window::{forecast_window_study, window_rmse_curve, ModelKind, WindowCurve, WindowStudy};

use thiserror::Error;

use crate::channel::ChannelError;
use crate::forecast::ForecastError;
use crate::recovery::RecoveryError;
use crate::trace::TraceError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("evaluation config error: {0}")]
    Config(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Recovery(#[from] RecoveryError),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}
