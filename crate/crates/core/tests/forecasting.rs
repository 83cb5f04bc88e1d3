use approx::assert_relative_eq;
use foreco_core::forecast::{
    aic_curve, fit_var_adam, fit_var_ols, likelihood_ratio, read_var_model_json, select_lag, var_model_to_json,
    AdamConfig, Forecaster, VarModel,
};
use foreco_core::synth::{random_stable_var, simulate_var};
use foreco_core::trace::Trace;
use nalgebra::DMatrix;

/// Solves the VAR normal equations directly: `(XᵀX) B = XᵀY`.
fn normal_equation_fit(trace: &Trace<f64>, lag: usize) -> DMatrix<f64> {
    let rows: Vec<&[f64]> = trace.rows().collect();
    let d = trace.dim();
    let n = rows.len() - lag;
    let x = DMatrix::from_fn(n, 1 + d * lag, |r, c| {
        let t = r + lag;
        if c == 0 {
            1.0
        } else {
            rows[t - 1 - (c - 1) / d][(c - 1) % d]
        }
    });
    let y = DMatrix::from_fn(n, d, |r, c| rows[r + lag][c]);
    let xtx = x.transpose() * &x;
    xtx.cholesky().expect("well-conditioned design").solve(&(x.transpose() * y))
}

fn max_diff(model: &VarModel<f64>, beta: &DMatrix<f64>) -> f64 {
    let d = model.dim();
    let mut m = 0.0f64;
    for k in 0..d {
        m = m.max((model.bias()[k] - beta[(0, k)]).abs());
        for (l, a) in model.coeffs().iter().enumerate() {
            for j in 0..d {
                m = m.max((a[(k, j)] - beta[(1 + l * d + j, k)]).abs());
            }
        }
    }
    m
}

#[test]
fn ols_matches_normal_equations() {
    for seed in 0..8u64 {
        let dim = 1 + (seed as usize % 6);
        let lag = 1 + (seed as usize % 3);
        let truth = random_stable_var(dim, lag, 0.1, seed);
        let trace = simulate_var(&truth, 2_000, 0.1, 20.0, seed + 100);
        let model = fit_var_ols(&trace, lag).unwrap();
        let oracle = normal_equation_fit(&trace, lag);
        assert!(max_diff(&model, &oracle) < 1e-8, "seed {seed}: {}", max_diff(&model, &oracle));
    }
}

#[test]
fn ols_recovers_a_stable_var2_within_three_standard_errors() {
    let truth = random_stable_var(3, 2, 0.1, 42);
    let trace = simulate_var(&truth, 10_000, 0.1, 20.0, 43);
    let model = fit_var_ols(&trace, 2).unwrap();
    // Standard errors from the diagonal of σ²(XᵀX)⁻¹.
    let rows: Vec<&[f64]> = trace.rows().collect();
    let (d, lag) = (3, 2);
    let n = rows.len() - lag;
    let x = DMatrix::from_fn(n, 1 + d * lag, |r, c| if c == 0 { 1.0 } else { rows[r + lag - 1 - (c - 1) / d][(c - 1) % d] });
    let inv = (x.transpose() * &x).try_inverse().unwrap();
    let mut worst = 0.0f64;
    for k in 0..d {
        let sigma2 = model.residual_cov()[(k, k)];
        for (l, (a_hat, a)) in model.coeffs().iter().zip(truth.coeffs()).enumerate() {
            for j in 0..d {
                let se = (sigma2 * inv[(1 + l * d + j, 1 + l * d + j)]).sqrt();
                worst = worst.max((a_hat[(k, j)] - a[(k, j)]).abs() / se);
            }
        }
    }
    // 18 coefficients: a 3σ miss is unlikely but possible; 4σ is the hard fence.
    assert!(worst < 4.0, "worst deviation {worst} standard errors");
}

#[test]
fn f32_and_f64_fits_agree() {
    let truth = random_stable_var(4, 2, 0.1, 7);
    let trace = simulate_var(&truth, 3_000, 0.1, 20.0, 8);
    let m64 = fit_var_ols(&trace, 2).unwrap();
    let m32 = fit_var_ols(&trace.cast::<f32>(), 2).unwrap();
    for (a, b) in m64.weights().iter().zip(m32.weights()) {
        assert!((a - b as f64).abs() < 1e-3);
    }
}

#[test]
fn aic_finds_var5() {
    let truth = random_stable_var(3, 5, 0.1, 11);
    let trace = simulate_var(&truth, 10_000, 0.1, 20.0, 12);
    let curve = aic_curve(&trace, 0..=19).unwrap();
    assert_eq!(curve.len(), 20);
    let best = curve.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
    assert!((4..=6).contains(&best), "best lag {best}");
    let sel = select_lag(&trace, 8).unwrap();
    assert!((4..=6).contains(&sel.best_lag));
}

#[test]
fn likelihood_ratio_constants() {
    let r = likelihood_ratio(43.45, 0.0, 6);
    assert!((1e25..=2e25).contains(&r.value), "{}", r.value);
    let r = likelihood_ratio(4.8, 0.0, 6);
    assert!((4e16..=5e16).contains(&r.value), "{}", r.value);
}

#[test]
fn adam_reaches_ols_on_noiseless_var1() {
    let truth = random_stable_var(2, 1, 0.0, 3);
    let mut model = truth.clone();
    // Drive the noiseless system from a non-equilibrium start.
    let trace = {
        let mut rows = vec![vec![1.0, -1.0]];
        for _ in 0..599 {
            let last = rows.last().unwrap().clone();
            rows.push(model.predict_rows(&[&last]));
        }
        Trace::from_rows(20.0, rows, foreco_core::trace::JointUnit::Radians).unwrap()
    };
    model = fit_var_ols(&trace, 1).unwrap();
    let adam = fit_var_adam(&trace, 1, &AdamConfig { epochs: 500, ..Default::default() }).unwrap();
    assert!(adam.max_weight_diff(&model) <= 1e-3, "{}", adam.max_weight_diff(&model));
}

#[test]
fn model_file_round_trip_preserves_forecasts() {
    let truth = random_stable_var(6, 3, 0.1, 21);
    let trace = simulate_var(&truth, 1_000, 0.1, 20.0, 22);
    let model = fit_var_ols(&trace, 3).unwrap();
    let back: VarModel<f64> = read_var_model_json(var_model_to_json(&model).as_bytes()).unwrap();
    let history = &trace.samples()[10..13];
    assert_eq!(model.forecast(history).unwrap(), back.forecast(history).unwrap());
    assert_relative_eq!(model.residual_cov()[(0, 0)], back.residual_cov()[(0, 0)]);
}
