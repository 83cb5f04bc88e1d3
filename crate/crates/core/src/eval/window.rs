use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::forecast::{fit_var_ols, Forecaster, MaModel};
use crate::scalar::Scalar;
use crate::trace::{Command, Trace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Var,
    Ma,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Var => "var",
            ModelKind::Ma => "ma",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowCurve {
    pub kind: ModelKind,
    /// Record length with the lowest mean RMSE across windows.
    pub best_record: usize,
    /// RMSE of the w-step-ahead forecast at index `w - 1`, for `best_record`.
    pub rmse: Vec<f64>,
    /// `(R, mean RMSE over windows)` for every scanned record length.
    pub by_record: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowStudy {
    pub window_max: usize,
    pub curves: Vec<WindowCurve>,
}

/// Closed-loop multi-step error of `model` over `test`: from every
/// start index, forecasts `window_max` steps ahead feeding each forecast
/// back as history, and returns the RMSE of each step.
pub fn window_rmse_curve<T: Scalar>(
    model: &dyn Forecaster<T>,
    test: &Trace<T>,
    window_max: usize,
) -> Result<Vec<f64>, EvalError> {
    curve_from(model, test, window_max, model.order().max(1))
}

fn curve_from<T: Scalar>(
    model: &dyn Forecaster<T>,
    test: &Trace<T>,
    window_max: usize,
    start: usize,
) -> Result<Vec<f64>, EvalError> {
    if window_max == 0 {
        return Err(EvalError::Config("window_max must be >= 1".into()));
    }
    let order = model.order().max(1);
    if start < order || start + window_max > test.len() {
        return Err(EvalError::Config(format!(
            "test trace of {} samples is too short for order {order} and window {window_max}",
            test.len()
        )));
    }
    let samples = test.samples();
    let mut sums = vec![0.0f64; window_max];
    let mut history: Vec<Command<T>> = Vec::with_capacity(order + window_max);
    for s in start..=test.len() - window_max {
        history.clear();
        history.extend_from_slice(&samples[s - order..s]);
        for (w, sum) in sums.iter_mut().enumerate() {
            let joints = model.forecast(&history)?;
            let truth = samples[s + w].joints();
            *sum += joints.iter().zip(truth).map(|(a, b)| (*a - *b).as_f64().powi(2)).sum::<f64>();
            history.push(Command::new(s + w, joints, samples[s + w].gen_time()));
        }
    }
    let n = (test.len() - window_max + 1 - start) as f64;
    Ok(sums.into_iter().map(|s| (s / n).sqrt()).collect())
}

fn fit<T: Scalar>(kind: ModelKind, train: &Trace<T>, record: usize) -> Result<Box<dyn Forecaster<T>>, EvalError> {
    Ok(match kind {
        ModelKind::Var => Box::new(fit_var_ols(train, record)?),
        ModelKind::Ma => Box::new(MaModel::new(train.dim(), record)?),
    })
}

/// Fits every model kind for `R = 1..=max_record` on `train` and reports,
/// per kind, the window-error curve of the best R on `test`. All
/// candidates are scored from the same start index so the curves compare.
pub fn forecast_window_study<T: Scalar>(
    train: &Trace<T>,
    test: &Trace<T>,
    window_max: usize,
    kinds: &[ModelKind],
    max_record: usize,
) -> Result<WindowStudy, EvalError> {
    if max_record == 0 || kinds.is_empty() {
        return Err(EvalError::Config("need at least one model kind and max_record >= 1".into()));
    }
    let curves = kinds
        .iter()
        .map(|&kind| {
            let per_r: Vec<(usize, Vec<f64>)> = (1..=max_record)
                .into_par_iter()
                .map(|r| {
                    let model = fit(kind, train, r)?;
                    Ok((r, curve_from(model.as_ref(), test, window_max, max_record)?))
                })
                .collect::<Result<_, EvalError>>()?;
            let by_record: Vec<(usize, f64)> =
                per_r.iter().map(|(r, c)| (*r, c.iter().sum::<f64>() / c.len() as f64)).collect();
            let best = by_record
                .iter()
                .enumerate()
                .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
                .map(|(i, _)| i)
                .expect("max_record >= 1");
            Ok(WindowCurve { kind, best_record: by_record[best].0, rmse: per_r[best].1.clone(), by_record })
        })
        .collect::<Result<_, EvalError>>()?;
    Ok(WindowStudy { window_max, curves })
}
