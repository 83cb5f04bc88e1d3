use super::var::{mle_cov, one_step_residuals, Trainer, TrainingWindow, VarModel};
use super::ForecastError;
use crate::linalg::{lstsq_qr, LinalgError, Matrix};
use crate::scalar::Scalar;
use crate::trace::Trace;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OlsOptions {
    /// Ridge penalty applied to every non-bias weight. Damps the large,
    /// mutually cancelling coefficients that near-collinear joints produce,
    /// which otherwise make closed-loop forecasts diverge.
    pub ridge: Option<f64>,
    /// When set, a rank-deficient design is retried with this ridge penalty
    /// on every non-bias weight instead of failing.
    pub ridge_fallback: Option<f64>,
}

/// Least-squares VAR fit with bias on the whole trace.
pub fn fit_var_ols<T: Scalar>(train: &Trace<T>, lag: usize) -> Result<VarModel<T>, ForecastError> {
    fit_var_ols_with(train, lag, &OlsOptions::default())
}

pub fn fit_var_ols_with<T: Scalar>(train: &Trace<T>, lag: usize, opts: &OlsOptions) -> Result<VarModel<T>, ForecastError> {
    let rows: Vec<&[T]> = train.rows().collect();
    let (model, ridge) = fit_window(&rows, lag, lag, opts)?;
    Ok(model.with_training(Trainer::Ols { ridge }, TrainingWindow::of(train)))
}

/// Fits on the targets `rows[first_target..]` so that models with different
/// lags can share one evaluation window. Returns the ridge value if the
/// fallback was used.
pub(crate) fn fit_window<T: Scalar>(
    rows: &[&[T]],
    lag: usize,
    first_target: usize,
    opts: &OlsOptions,
) -> Result<(VarModel<T>, Option<f64>), ForecastError> {
    debug_assert!(first_target >= lag);
    let dim = rows.first().map_or(0, |r| r.len());
    let k = 1 + dim * lag;
    if dim == 0 || rows.len() < first_target + k {
        return Err(ForecastError::InsufficientData { needed: first_target + k, available: rows.len() });
    }
    let n = rows.len() - first_target;

    let mut x = Matrix::zeros(n, k);
    let mut y = Matrix::zeros(n, dim);
    for (r, t) in (first_target..rows.len()).enumerate() {
        fill_design_row(x.row_mut(r), rows, t, lag);
        y.row_mut(r).copy_from_slice(rows[t]);
    }

    let (beta, ridge) = match opts.ridge {
        Some(lambda) if !(lambda >= 0.0 && lambda.is_finite()) => {
            return Err(ForecastError::InvalidConfig(format!("ridge penalty {lambda} must be finite and >= 0")))
        }
        Some(lambda) if lambda > 0.0 => (solve_ridge(&x, &y, lambda)?, Some(lambda)),
        _ => match lstsq_qr(&x, &y) {
            Ok(b) => (b, None),
            Err(LinalgError::RankDeficient { column }) => match opts.ridge_fallback {
                Some(lambda) if lambda > 0.0 => (solve_ridge(&x, &y, lambda)?, Some(lambda)),
                _ => return Err(ForecastError::RankDeficient { column }),
            },
            Err(e) => return Err(e.into()),
        },
    };

    let bias = beta.row(0).to_vec();
    let coeffs = (0..lag)
        .map(|l| {
            let mut a = Matrix::zeros(dim, dim);
            for out in 0..dim {
                for j in 0..dim {
                    a[(out, j)] = beta[(1 + l * dim + j, out)];
                }
            }
            a
        })
        .collect();
    let model = VarModel::new(bias, coeffs, Matrix::zeros(dim, dim))?;
    let cov = mle_cov(&one_step_residuals(&model, rows, first_target), dim);
    Ok((model.replace_cov(cov), ridge))
}

/// `[1, y_{t-1}, ..., y_{t-lag}]`.
pub(crate) fn fill_design_row<T: Scalar>(out: &mut [T], rows: &[&[T]], t: usize, lag: usize) {
    let dim = rows[t].len();
    out[0] = T::one();
    for l in 1..=lag {
        out[1 + (l - 1) * dim..1 + l * dim].copy_from_slice(rows[t - l]);
    }
}

fn solve_ridge<T: Scalar>(x: &Matrix<T>, y: &Matrix<T>, lambda: f64) -> Result<Matrix<T>, ForecastError> {
    let (n, k) = (x.rows(), x.cols());
    let mut xa = Matrix::zeros(n + k - 1, k);
    let mut ya = Matrix::zeros(n + k - 1, y.cols());
    for r in 0..n {
        xa.row_mut(r).copy_from_slice(x.row(r));
        ya.row_mut(r).copy_from_slice(y.row(r));
    }
    let s = T::lit(lambda.sqrt());
    for c in 1..k {
        xa[(n + c - 1, c)] = s;
    }
    Ok(lstsq_qr(&xa, &ya)?)
}
