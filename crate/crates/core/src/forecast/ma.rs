use serde::{Deserialize, Serialize};

use super::{check_history, ForecastError, Forecaster};
use crate::scalar::Scalar;
use crate::trace::Command;

/// Predicts the mean of the last `window` commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaModel {
    dim: usize,
    window: usize,
}

impl MaModel {
    pub fn new(dim: usize, window: usize) -> Result<Self, ForecastError> {
        if window == 0 || dim == 0 {
            return Err(ForecastError::InvalidConfig("moving average needs dim >= 1 and window >= 1".into()));
        }
        Ok(MaModel { dim, window })
    }

    pub fn window(&self) -> usize {
        self.window
    }
}

impl<T: Scalar> Forecaster<T> for MaModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn order(&self) -> usize {
        self.window
    }

    fn forecast(&self, history: &[Command<T>]) -> Result<Vec<T>, ForecastError> {
        let recent = check_history(history, self.window, self.dim)?;
        let n = T::lit(self.window as f64);
        Ok((0..self.dim)
            .map(|k| recent.iter().map(|c| c.joints()[k]).sum::<T>() / n)
            .collect())
    }
}
