use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ols::{fit_window, OlsOptions};
use super::var::{one_step_residuals, VarModel};
use super::ForecastError;
use crate::linalg::Cholesky;
use crate::scalar::Scalar;
use crate::trace::Trace;

/// `2p - log L`, with `p = d^2 * lag` and `log L` the Gaussian
/// log-likelihood of the model's one-step residuals on `data` under the
/// model's residual covariance.
pub fn aic<T: Scalar>(model: &VarModel<T>, data: &Trace<T>) -> Result<T, ForecastError> {
    if data.dim() != model.dim() {
        return Err(ForecastError::DimensionMismatch { expected: model.dim(), found: data.dim() });
    }
    if data.len() <= model.lag() {
        return Err(ForecastError::InsufficientData { needed: model.lag() + 1, available: data.len() });
    }
    let rows: Vec<&[T]> = data.rows().collect();
    aic_window(model, &rows, model.lag())
}

fn aic_window<T: Scalar>(model: &VarModel<T>, rows: &[&[T]], first_target: usize) -> Result<T, ForecastError> {
    let log_l = log_likelihood(model, rows, first_target)?;
    Ok(T::lit(2.0 * model.n_params() as f64) - log_l)
}

fn log_likelihood<T: Scalar>(model: &VarModel<T>, rows: &[&[T]], first_target: usize) -> Result<T, ForecastError> {
    let d = model.dim();
    // a covariance pivot below machine epsilon times the data variance
    // means the residuals are numerically zero
    let scale = max_channel_variance(&rows[first_target..]);
    let scale = if scale > T::zero() { scale } else { T::one() };
    let chol = Cholesky::new(model.residual_cov(), T::epsilon() * scale)
        .map_err(|_| ForecastError::DegenerateCovariance)?;
    let const_term = T::lit(d as f64 * (2.0 * std::f64::consts::PI).ln()) + chol.log_det();
    let half = T::lit(0.5);
    let total = one_step_residuals(model, rows, first_target)
        .iter()
        .map(|e| const_term + chol.quad_form_inv(e))
        .sum::<T>();
    let log_l = -half * total;
    if !log_l.is_finite() {
        return Err(ForecastError::DegenerateCovariance);
    }
    Ok(log_l)
}

fn max_channel_variance<T: Scalar>(rows: &[&[T]]) -> T {
    let n = T::lit(rows.len() as f64);
    let d = rows.first().map_or(0, |r| r.len());
    (0..d)
        .map(|k| {
            let mean = rows.iter().map(|r| r[k]).sum::<T>() / n;
            rows.iter().map(|r| (r[k] - mean) * (r[k] - mean)).sum::<T>() / n
        })
        .fold(T::zero(), |m, v| m.max(v))
}

/// AIC for every lag in `lags`, each model fitted by OLS on the same target
/// window (the one usable by the largest lag).
pub fn aic_curve<T: Scalar>(train: &Trace<T>, lags: RangeInclusive<usize>) -> Result<Vec<(usize, T)>, ForecastError> {
    let rows: Vec<&[T]> = train.rows().collect();
    let first_target = *lags.end();
    let opts = OlsOptions::default();
    lags.into_par_iter()
        .map(|lag| {
            let (model, _) = fit_window(&rows, lag, first_target, &opts)?;
            Ok((lag, aic_window(&model, &rows, first_target)?))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LagSelection<T> {
    pub best_lag: usize,
    /// `(lag, aic)` for lags `1..=max_lag`.
    pub curve: Vec<(usize, T)>,
}

/// Picks the AIC-minimizing lag in `1..=max_lag`; ties go to the smaller lag.
pub fn select_lag<T: Scalar>(train: &Trace<T>, max_lag: usize) -> Result<LagSelection<T>, ForecastError> {
    if max_lag == 0 {
        return Err(ForecastError::InvalidConfig("max_lag must be >= 1".into()));
    }
    let curve = aic_curve(train, 1..=max_lag)?;
    let best_lag = curve
        .iter()
        .fold(None::<(usize, T)>, |best, &(lag, a)| match best {
            Some((_, b)) if b <= a => best,
            _ => Some((lag, a)),
        })
        .map(|(lag, _)| lag)
        .expect("curve is non-empty");
    Ok(LagSelection { best_lag, curve })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodRatio {
    pub value: f64,
    /// Set when the ratio exceeds the `f64` range and `value` is `+inf`.
    pub overflow: bool,
}

/// Likelihood ratio between lag orders `l + 1` and `l`:
/// `exp((aic_l - aic_{l+1}) / 2 + d^2)`.
pub fn likelihood_ratio(aic_l: f64, aic_next: f64, dim: usize) -> LikelihoodRatio {
    let d2 = (dim * dim) as f64;
    let value = ((aic_l - aic_next) / 2.0 + d2).exp();
    LikelihoodRatio { value, overflow: value.is_infinite() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::trace::JointUnit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn var1_trace(h: usize, seed: u64) -> Trace<f64> {
        let a = Matrix::from_row_major(2, 2, vec![0.6, 0.2, -0.3, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut y = vec![0.0, 0.0];
        let mut rows = Vec::new();
        for _ in 0..h {
            let mut next = a.mul_vec(&y);
            for v in next.iter_mut() {
                *v += rng.sample::<f64, _>(StandardNormal);
            }
            y = next;
            rows.push(y.clone());
        }
        Trace::from_rows(20.0, rows, JointUnit::Radians).unwrap()
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(likelihood_ratio(72.0, 144.0, 6).value, 1.0);
        let r = likelihood_ratio(100.0, 100.0, 6);
        assert_eq!(r.value, 36f64.exp());
        assert!(!r.overflow);
        let r = likelihood_ratio(43.45, 0.0, 6);
        assert!(r.value > 1.0e25 && r.value < 2.0e25);
        let r = likelihood_ratio(4.8, 0.0, 6);
        assert!(r.value > 4.0e16 && r.value < 5.0e16);
        let r = likelihood_ratio(2000.0, 0.0, 6);
        assert!(r.overflow && r.value.is_infinite());
    }

    #[test]
    fn extra_lag_with_equal_likelihood_costs_two_d_squared() {
        // identical residuals: the lag-2 term is all zeros
        let t = var1_trace(500, 3);
        let m1 = crate::forecast::fit_var_ols(&t, 1).unwrap();
        let mut coeffs = m1.coeffs().to_vec();
        coeffs.push(Matrix::zeros(2, 2));
        let m2 = VarModel::new(m1.bias().to_vec(), coeffs, m1.residual_cov().clone()).unwrap();
        let rows: Vec<&[f64]> = t.rows().collect();
        let a1 = aic_window(&m1, &rows, 2).unwrap();
        let a2 = aic_window(&m2, &rows, 2).unwrap();
        assert!(((a1 - a2) + 8.0).abs() < 1e-9, "{}", a1 - a2);
    }

    #[test]
    fn perfect_fit_is_degenerate() {
        let (c, s) = (0.4f64.cos(), 0.4f64.sin());
        let a = Matrix::from_row_major(2, 2, vec![c, -s, s, c]).unwrap();
        let mut y = vec![1.0, 0.0];
        let rows: Vec<Vec<f64>> = (0..100)
            .map(|_| {
                let r = y.clone();
                y = a.mul_vec(&y);
                r
            })
            .collect();
        let t = Trace::from_rows(20.0, rows, JointUnit::Radians).unwrap();
        let m = crate::forecast::fit_var_ols(&t, 1).unwrap();
        assert!(matches!(aic(&m, &t), Err(ForecastError::DegenerateCovariance)));
    }

    #[test]
    fn gaussian_log_likelihood_by_hand() {
        // d = 1, lag 0, bias 0, sigma^2 = 4, residuals 1 and -3
        let m = VarModel::new(vec![0.0], vec![], Matrix::from_row_major(1, 1, vec![4.0]).unwrap()).unwrap();
        let t = Trace::from_rows(20.0, vec![vec![1.0], vec![-3.0]], JointUnit::Meters).unwrap();
        let expected = 0.5 * (2.0 * ((2.0 * std::f64::consts::PI).ln() + 4f64.ln()) + (1.0 + 9.0) / 4.0);
        assert!((aic(&m, &t).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn selects_lag_one_on_var1_data() {
        let t = var1_trace(3000, 11);
        let sel = select_lag(&t, 5).unwrap();
        assert_eq!(sel.best_lag, 1);
        assert_eq!(sel.curve.iter().map(|c| c.0).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn single_candidate_and_bad_max() {
        let t = var1_trace(200, 1);
        assert_eq!(select_lag(&t, 1).unwrap().best_lag, 1);
        assert!(select_lag(&t, 0).is_err());
    }

    #[test]
    fn white_noise_prefers_lag_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..4000)
            .map(|_| (0..3).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let t = Trace::from_rows(20.0, rows, JointUnit::Radians).unwrap();
        let sel = select_lag(&t, 6).unwrap();
        assert_eq!(sel.best_lag, 1);
        // past lag 1 the curve climbs by roughly the 2 d^2 = 18 penalty per lag
        for w in sel.curve.windows(2) {
            let step = w[1].1 - w[0].1;
            assert!(step > 9.0 && step < 18.5, "step {step}");
        }
    }

    #[test]
    fn dimension_mismatch() {
        let t = var1_trace(100, 2);
        let m = VarModel::new(vec![0.0; 3], vec![], Matrix::identity(3)).unwrap();
        assert!(matches!(aic(&m, &t), Err(ForecastError::DimensionMismatch { .. })));
    }
}
