use serde::{Deserialize, Serialize};

use super::adam::AdamConfig;
use super::{check_history, ForecastError, Forecaster};
use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;
use crate::trace::{Command, Trace};

/// How a model's weights were obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trainer {
    Manual,
    Ols {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ridge: Option<f64>,
    },
    Adam(AdamConfig),
}

/// The slice of data a model was fitted on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingWindow {
    pub samples: usize,
    pub first_ms: f64,
    pub last_ms: f64,
}

impl TrainingWindow {
    pub fn of<T: Scalar>(trace: &Trace<T>) -> Self {
        TrainingWindow {
            samples: trace.len(),
            first_ms: trace.start_time().as_ms(),
            last_ms: trace.slot_time(trace.len() - 1).as_ms(),
        }
    }
}

/// Vector autoregression with bias:
/// `y_t = b + A_1 y_{t-1} + ... + A_lag y_{t-lag} + e_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct VarModel<T> {
    dim: usize,
    lag: usize,
    bias: Vec<T>,
    coeffs: Vec<Matrix<T>>,
    residual_cov: Matrix<T>,
    trainer: Trainer,
    trained_at: TrainingWindow,
}

impl<T: Scalar> VarModel<T> {
    /// Builds a model from explicit weights. `coeffs[0]` multiplies the most
    /// recent command.
    pub fn new(bias: Vec<T>, coeffs: Vec<Matrix<T>>, residual_cov: Matrix<T>) -> Result<Self, ForecastError> {
        let dim = bias.len();
        if dim == 0 {
            return Err(ForecastError::InvalidConfig("model dimension must be >= 1".into()));
        }
        if let Some(a) = coeffs.iter().find(|a| a.rows() != dim || a.cols() != dim) {
            return Err(ForecastError::DimensionMismatch { expected: dim, found: a.rows().max(a.cols()) });
        }
        if residual_cov.rows() != dim || residual_cov.cols() != dim {
            return Err(ForecastError::DimensionMismatch { expected: dim, found: residual_cov.rows() });
        }
        if bias.iter().any(|b| !b.is_finite()) || coeffs.iter().any(|a| !a.is_finite()) {
            return Err(ForecastError::InvalidConfig("weights must be finite".into()));
        }
        if !residual_cov.is_finite() || !residual_cov.is_symmetric() {
            return Err(ForecastError::InvalidConfig("residual covariance must be finite and symmetric".into()));
        }
        if (0..dim).any(|i| residual_cov[(i, i)] < T::zero()) {
            return Err(ForecastError::InvalidConfig("residual covariance has a negative variance".into()));
        }
        Ok(VarModel {
            dim,
            lag: coeffs.len(),
            bias,
            coeffs,
            residual_cov,
            trainer: Trainer::Manual,
            trained_at: TrainingWindow::default(),
        })
    }

    pub fn with_training(mut self, trainer: Trainer, trained_at: TrainingWindow) -> Self {
        self.trainer = trainer;
        self.trained_at = trained_at;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn coeffs(&self) -> &[Matrix<T>] {
        &self.coeffs
    }

    pub fn residual_cov(&self) -> &Matrix<T> {
        &self.residual_cov
    }

    pub fn trainer(&self) -> &Trainer {
        &self.trainer
    }

    pub fn trained_at(&self) -> TrainingWindow {
        self.trained_at
    }

    /// Parameter count used by AIC: `d^2 * lag`, bias excluded.
    pub fn n_params(&self) -> usize {
        self.dim * self.dim * self.lag
    }

    /// All weights flattened as `[bias, A_1 row-major, ..., A_lag row-major]`.
    pub fn weights(&self) -> Vec<T> {
        let mut w = self.bias.clone();
        for a in &self.coeffs {
            w.extend_from_slice(a.as_slice());
        }
        w
    }

    /// Largest absolute weight difference to another model of the same shape.
    pub fn max_weight_diff(&self, other: &VarModel<T>) -> T {
        self.weights()
            .iter()
            .zip(other.weights())
            .fold(T::zero(), |m, (a, b)| m.max((*a - b).abs()))
    }

    /// One-step prediction from `recent`, ordered oldest first, whose last
    /// `lag` rows are used.
    pub fn predict_rows(&self, recent: &[&[T]]) -> Vec<T> {
        let n = recent.len();
        let mut out = self.bias.clone();
        for (l, a) in self.coeffs.iter().enumerate() {
            let y = recent[n - 1 - l];
            for (k, o) in out.iter_mut().enumerate() {
                *o = *o + dot(a.row(k), y);
            }
        }
        out
    }

    pub(crate) fn replace_cov(mut self, cov: Matrix<T>) -> Self {
        self.residual_cov = cov;
        self
    }
}

impl<T: Scalar> Forecaster<T> for VarModel<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn order(&self) -> usize {
        self.lag
    }

    fn forecast(&self, history: &[Command<T>]) -> Result<Vec<T>, ForecastError> {
        let recent = check_history(history, self.lag, self.dim)?;
        let rows: Vec<&[T]> = recent.iter().map(Command::joints).collect();
        Ok(self.predict_rows(&rows))
    }
}

/// Residuals `y_t - yhat_t` for every target `t >= first_target`.
pub(crate) fn one_step_residuals<T: Scalar>(model: &VarModel<T>, rows: &[&[T]], first_target: usize) -> Vec<Vec<T>> {
    (first_target..rows.len())
        .map(|t| {
            let pred = model.predict_rows(&rows[..t]);
            rows[t].iter().zip(pred).map(|(y, p)| *y - p).collect()
        })
        .collect()
}

/// Maximum-likelihood covariance `E^T E / n`, symmetric by construction.
pub(crate) fn mle_cov<T: Scalar>(residuals: &[Vec<T>], dim: usize) -> Matrix<T> {
    let mut cov = Matrix::zeros(dim, dim);
    if residuals.is_empty() {
        return cov;
    }
    let n = T::lit(residuals.len() as f64);
    for i in 0..dim {
        for j in 0..=i {
            let s = residuals.iter().map(|e| e[i] * e[j]).sum::<T>() / n;
            cov[(i, j)] = s;
            cov[(j, i)] = s;
        }
    }
    cov
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::predict;
    use crate::time::Micros;
    use proptest::prelude::*;

    fn history(rows: &[Vec<f64>]) -> Vec<Command<f64>> {
        rows.iter()
            .enumerate()
            .map(|(i, r)| Command::new(i, r.clone(), Micros(20_000 * i as i64)))
            .collect()
    }

    #[test]
    fn identity_dynamics_repeat_the_last_command() {
        let m = VarModel::new(vec![0.0; 3], vec![Matrix::identity(3)], Matrix::zeros(3, 3)).unwrap();
        let h = history(&[vec![9.0, 9.0, 9.0], vec![0.1, -0.2, 0.3]]);
        let next = predict(&m, &h, Micros(20_000)).unwrap();
        assert_eq!(next.joints(), &[0.1, -0.2, 0.3]);
        assert_eq!(next.provenance(), crate::trace::Provenance::Forecast);
        assert_eq!(next.gen_time(), Micros(40_000));
    }

    #[test]
    fn lag_ordering_and_bias() {
        // y_t = b + A1 y_{t-1} + A2 y_{t-2} with scalar joints
        let a1 = Matrix::from_row_major(1, 1, vec![2.0]).unwrap();
        let a2 = Matrix::from_row_major(1, 1, vec![-1.0]).unwrap();
        let m = VarModel::new(vec![0.5], vec![a1, a2], Matrix::zeros(1, 1)).unwrap();
        let h = history(&[vec![1.0], vec![3.0]]);
        assert_eq!(m.forecast(&h).unwrap(), vec![0.5 + 6.0 - 1.0]);
        assert_eq!(m.n_params(), 2);
    }

    #[test]
    fn rejects_bad_shapes_and_short_history() {
        assert!(VarModel::new(vec![0.0; 2], vec![Matrix::identity(3)], Matrix::zeros(2, 2)).is_err());
        assert!(VarModel::new(vec![f64::NAN], vec![], Matrix::zeros(1, 1)).is_err());
        let asym = Matrix::from_row_major(2, 2, vec![1.0, 0.5, 0.4, 1.0]).unwrap();
        assert!(VarModel::new(vec![0.0; 2], vec![], asym).is_err());
        let m = VarModel::new(vec![0.0; 2], vec![Matrix::identity(2); 3], Matrix::zeros(2, 2)).unwrap();
        let err = m.forecast(&history(&vec![vec![0.0, 0.0]; 2])).unwrap_err();
        assert!(matches!(err, ForecastError::InsufficientHistory { needed: 3, got: 2 }));
    }

    proptest! {
        #[test]
        fn prediction_is_linear_without_bias(
            w in prop::collection::vec(-1.0f64..1.0, 8),
            h1 in prop::collection::vec(-5.0f64..5.0, 4),
            h2 in prop::collection::vec(-5.0f64..5.0, 4),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
        ) {
            let coeffs = vec![
                Matrix::from_row_major(2, 2, w[..4].to_vec()).unwrap(),
                Matrix::from_row_major(2, 2, w[4..].to_vec()).unwrap(),
            ];
            let m = VarModel::new(vec![0.0; 2], coeffs, Matrix::zeros(2, 2)).unwrap();
            let rows = |h: &[f64]| history(&[h[..2].to_vec(), h[2..].to_vec()]);
            let mix: Vec<f64> = h1.iter().zip(&h2).map(|(x, y)| a * x + b * y).collect();
            let lhs = m.forecast(&rows(&mix)).unwrap();
            let p1 = m.forecast(&rows(&h1)).unwrap();
            let p2 = m.forecast(&rows(&h2)).unwrap();
            for k in 0..2 {
                prop_assert!((lhs[k] - (a * p1[k] + b * p2[k])).abs() < 1e-9);
            }
        }
    }
}
