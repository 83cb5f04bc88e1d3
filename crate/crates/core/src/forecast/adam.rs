use serde::{Deserialize, Serialize};

use super::ols::fill_design_row;
use super::var::{mle_cov, one_step_residuals, Trainer, TrainingWindow, VarModel};
use super::ForecastError;
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::trace::Trace;

/// Exponent used in Adam's moment bias-correction denominators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasCorrection {
    /// `1 - beta^N` with `N` the training-set size, fixed for the whole run.
    #[default]
    TrainingSetSize,
    /// The usual `1 - beta^t` with `t` the update count.
    PerStep,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    #[serde(default)]
    pub bias_correction: BiasCorrection,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            step_size: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
            batch_size: 32,
            epochs: 200,
            bias_correction: BiasCorrection::TrainingSetSize,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<(), ForecastError> {
        let bad = |what: &str| Err(ForecastError::InvalidConfig(format!("adam: {what}")));
        if !(self.beta1 > 0.0 && self.beta1 < 1.0) || !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("betas must lie in (0, 1)");
        }
        // zero is accepted so a run can be frozen at its initialization
        if !(self.step_size >= 0.0 && self.step_size.is_finite()) {
            return bad("step size must be finite and non-negative");
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad("epsilon must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch size must be >= 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AdamReport {
    /// Mean squared one-step error per epoch, measured while training.
    pub epoch_losses: Vec<f64>,
    pub steps: usize,
}

/// VAR fit by mini-batch Adam from all-zero weights.
pub fn fit_var_adam<T: Scalar>(train: &Trace<T>, lag: usize, cfg: &AdamConfig) -> Result<VarModel<T>, ForecastError> {
    fit_var_adam_with_history(train, lag, cfg).map(|(m, _)| m)
}

/// Like [`fit_var_adam`], also returning the loss curve.
///
/// Batches walk the training targets in order. Each batch minimizes the
/// summed squared error divided by the batch length.
pub fn fit_var_adam_with_history<T: Scalar>(
    train: &Trace<T>,
    lag: usize,
    cfg: &AdamConfig,
) -> Result<(VarModel<T>, AdamReport), ForecastError> {
    cfg.validate()?;
    let rows: Vec<&[T]> = train.rows().collect();
    let dim = train.dim();
    let k = 1 + dim * lag;
    if rows.len() < lag + k {
        return Err(ForecastError::InsufficientData { needed: lag + k, available: rows.len() });
    }
    let n_targets = rows.len() - lag;

    // beta[c][out]: c = 0 is the bias, then lag-major joint columns
    let mut w = Matrix::<T>::zeros(k, dim);
    let mut m = Matrix::<T>::zeros(k, dim);
    let mut v = Matrix::<T>::zeros(k, dim);
    let mut grad = Matrix::<T>::zeros(k, dim);
    let mut x = vec![T::zero(); k];
    let mut resid = vec![T::zero(); dim];

    let (b1, b2) = (T::lit(cfg.beta1), T::lit(cfg.beta2));
    let (eta, eps) = (T::lit(cfg.step_size), T::lit(cfg.epsilon));
    let two = T::lit(2.0);
    let one = T::one();
    let fixed_exp = rows.len() as i32;

    let mut report = AdamReport::default();
    let mut step = 0usize;
    for _ in 0..cfg.epochs {
        let mut epoch_sse = 0.0f64;
        for batch_start in (lag..rows.len()).step_by(cfg.batch_size) {
            let batch_end = (batch_start + cfg.batch_size).min(rows.len());
            let blen = T::lit((batch_end - batch_start) as f64);
            for r in 0..k {
                grad.row_mut(r).fill(T::zero());
            }
            let mut sse = T::zero();
            for t in batch_start..batch_end {
                fill_design_row(&mut x, &rows, t, lag);
                for out in 0..dim {
                    let mut pred = T::zero();
                    for c in 0..k {
                        pred = pred + x[c] * w[(c, out)];
                    }
                    resid[out] = pred - rows[t][out];
                    sse = sse + resid[out] * resid[out];
                }
                for c in 0..k {
                    let g = grad.row_mut(c);
                    for out in 0..dim {
                        g[out] = g[out] + two * resid[out] * x[c];
                    }
                }
            }
            step += 1;
            let loss = sse / blen;
            if !loss.is_finite() {
                return Err(ForecastError::Diverged { iteration: step });
            }
            epoch_sse += sse.as_f64();

            let exp = match cfg.bias_correction {
                BiasCorrection::TrainingSetSize => fixed_exp,
                BiasCorrection::PerStep => step.min(i32::MAX as usize) as i32,
            };
            let c1 = one - b1.powi(exp);
            let c2 = one - b2.powi(exp);
            for c in 0..k {
                for out in 0..dim {
                    let g = grad[(c, out)] / blen;
                    let mi = b1 * m[(c, out)] + (one - b1) * g;
                    let vi = b2 * v[(c, out)] + (one - b2) * g * g;
                    m[(c, out)] = mi;
                    v[(c, out)] = vi;
                    w[(c, out)] = w[(c, out)] - eta * (mi / c1) / ((vi / c2).sqrt() + eps);
                }
            }
            if !w.is_finite() {
                return Err(ForecastError::Diverged { iteration: step });
            }
        }
        report.epoch_losses.push(epoch_sse / (n_targets * dim) as f64);
    }
    report.steps = step;

    let bias = w.row(0).to_vec();
    let coeffs = (0..lag)
        .map(|l| {
            let mut a = Matrix::zeros(dim, dim);
            for out in 0..dim {
                for j in 0..dim {
                    a[(out, j)] = w[(1 + l * dim + j, out)];
                }
            }
            a
        })
        .collect();
    let model = VarModel::new(bias, coeffs, Matrix::zeros(dim, dim))?;
    let cov = mle_cov(&one_step_residuals(&model, &rows, lag), dim);
    let model = model.replace_cov(cov).with_training(Trainer::Adam(*cfg), TrainingWindow::of(train));
    Ok((model, report))
}
