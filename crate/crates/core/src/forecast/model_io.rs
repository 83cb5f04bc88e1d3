use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::var::{Trainer, TrainingWindow, VarModel};
use super::ForecastError;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// On-disk form of a VAR model. Numbers are written in shortest
/// round-trip form, so `f64` weights survive a save/load cycle bit for bit.
#[derive(Debug, Serialize, Deserialize)]
struct VarModelDoc {
    dim: usize,
    lag: usize,
    bias: Vec<f64>,
    /// One row-major `dim x dim` block per lag, most recent lag first.
    coeffs: Vec<Vec<f64>>,
    /// Row-major `dim x dim`.
    residual_cov: Vec<f64>,
    trainer: Trainer,
    trained_at: TrainingWindow,
}

pub fn var_model_to_json<T: Scalar>(model: &VarModel<T>) -> String {
    let f = |v: &[T]| v.iter().map(|x| x.as_f64()).collect::<Vec<f64>>();
    let doc = VarModelDoc {
        dim: model.dim(),
        lag: model.lag(),
        bias: f(model.bias()),
        coeffs: model.coeffs().iter().map(|a| f(a.as_slice())).collect(),
        residual_cov: f(model.residual_cov().as_slice()),
        trainer: model.trainer().clone(),
        trained_at: model.trained_at(),
    };
    serde_json::to_string_pretty(&doc).expect("model document serializes")
}

pub fn write_var_model_json<T: Scalar, W: Write>(model: &VarModel<T>, mut w: W) -> Result<(), ForecastError> {
    w.write_all(var_model_to_json(model).as_bytes())?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_var_model_json<T: Scalar, R: Read>(r: R) -> Result<VarModel<T>, ForecastError> {
    let doc: VarModelDoc = serde_json::from_reader(r).map_err(|e| ForecastError::Format(e.to_string()))?;
    let d = doc.dim;
    if doc.bias.len() != d || doc.coeffs.len() != doc.lag {
        return Err(ForecastError::Format(format!(
            "expected {d} bias terms and {} coefficient blocks",
            doc.lag
        )));
    }
    let mat = |v: Vec<f64>| {
        Matrix::from_row_major(d, d, v.into_iter().map(T::lit).collect())
            .map_err(|e| ForecastError::Format(e.to_string()))
    };
    let coeffs = doc.coeffs.into_iter().map(mat).collect::<Result<Vec<_>, _>>()?;
    let cov = mat(doc.residual_cov)?;
    let bias = doc.bias.into_iter().map(T::lit).collect();
    Ok(VarModel::new(bias, coeffs, cov)?.with_training(doc.trainer, doc.trained_at))
}
