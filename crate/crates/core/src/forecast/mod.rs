//! Moving-average and vector-autoregressive forecasters, their OLS and Adam
//! trainers, and AIC-based lag selection.

pub mod adam;
pub mod aic;
pub mod ma;
pub mod model_io;
pub mod ols;
pub mod var;

pub use adam::{fit_var_adam, fit_var_adam_with_history, AdamConfig, AdamReport, BiasCorrection};
pub use aic::{aic, aic_curve, likelihood_ratio, select_lag, LagSelection, LikelihoodRatio};
pub use ma::MaModel;
pub use model_io::{read_var_model_json, var_model_to_json, write_var_model_json};
pub use ols::{fit_var_ols, fit_var_ols_with, OlsOptions};
pub use var::{Trainer, TrainingWindow, VarModel};

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::scalar::Scalar;
use crate::time::Micros;
use crate::trace::{Command, Provenance};

#[derive(Debug, Error)]
pub enum ForecastError {
    #[error("not enough training data: need {needed} samples, have {available}")]
    InsufficientData { needed: usize, available: usize },
    #[error("design matrix is rank deficient at column {column} (0 = bias, then lag-major joint columns)")]
    RankDeficient { column: usize },
    #[error("training diverged at iteration {iteration}")]
    Diverged { iteration: usize },
    #[error("history holds {got} commands, forecaster needs {needed}")]
    InsufficientHistory { needed: usize, got: usize },
    #[error("residual covariance is degenerate")]
    DegenerateCovariance,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid model or trainer configuration: {0}")]
    InvalidConfig(String),
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<LinalgError> for ForecastError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::RankDeficient { column } => ForecastError::RankDeficient { column },
            LinalgError::NotPositiveDefinite { .. } => ForecastError::DegenerateCovariance,
            LinalgError::Shape(s) => ForecastError::InvalidConfig(s),
        }
    }
}

/// A one-step-ahead predictor over a window of past commands.
pub trait Forecaster<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    /// Number of most recent commands the forecast depends on.
    fn order(&self) -> usize;

    /// Predicts the joints of the command following `history` (oldest
    /// first). Only the last [`order`](Self::order) entries are used.
    fn forecast(&self, history: &[Command<T>]) -> Result<Vec<T>, ForecastError>;
}

/// Forecasts the next command. The result is stamped one `period` after
/// the last history entry and tagged [`Provenance::Forecast`].
pub fn predict<T, F>(model: &F, history: &[Command<T>], period: Micros) -> Result<Command<T>, ForecastError>
where
    T: Scalar,
    F: Forecaster<T> + ?Sized,
{
    let needed = model.order().max(1);
    let Some(last) = history.last().filter(|_| history.len() >= needed) else {
        return Err(ForecastError::InsufficientHistory { needed, got: history.len() });
    };
    let joints = model.forecast(history)?;
    Ok(Command::new(last.seq() + 1, joints, last.gen_time() + period).with_provenance(Provenance::Forecast))
}

pub(crate) fn check_history<T: Scalar>(
    history: &[Command<T>],
    order: usize,
    dim: usize,
) -> Result<&[Command<T>], ForecastError> {
    if history.len() < order {
        return Err(ForecastError::InsufficientHistory { needed: order, got: history.len() });
    }
    let recent = &history[history.len() - order..];
    if let Some(c) = recent.iter().find(|c| c.dim() != dim) {
        return Err(ForecastError::DimensionMismatch { expected: dim, found: c.dim() });
    }
    Ok(recent)
}

/// Either forecaster family, for callers that pick one at run time.
#[derive(Clone, Debug, PartialEq)]
pub enum ForecastModel<T> {
    Var(VarModel<T>),
    Ma(MaModel),
}

impl<T: Scalar> Forecaster<T> for ForecastModel<T> {
    fn dim(&self) -> usize {
        match self {
            ForecastModel::Var(m) => Forecaster::<T>::dim(m),
            ForecastModel::Ma(m) => Forecaster::<T>::dim(m),
        }
    }

    fn order(&self) -> usize {
        match self {
            ForecastModel::Var(m) => Forecaster::<T>::order(m),
            ForecastModel::Ma(m) => Forecaster::<T>::order(m),
        }
    }

    fn forecast(&self, history: &[Command<T>]) -> Result<Vec<T>, ForecastError> {
        match self {
            ForecastModel::Var(m) => m.forecast(history),
            ForecastModel::Ma(m) => m.forecast(history),
        }
    }
}
