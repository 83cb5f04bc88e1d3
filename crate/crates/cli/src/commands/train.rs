use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use foreco_core::forecast::{
    fit_var_adam_with_history, fit_var_ols_with, likelihood_ratio, select_lag, write_var_model_json, AdamConfig,
    BiasCorrection, LikelihoodRatio, OlsOptions,
};
use foreco_core::trace::split_dataset;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{read_trace, sibling, write_atomic, write_json, ManifestBuilder};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LagChoice {
    Fixed(usize),
    Auto,
}

impl FromStr for LagChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(LagChoice::Auto);
        }
        s.parse().map(LagChoice::Fixed).map_err(|_| format!("expected a lag or `auto`, got {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TrainerKind {
    Ols,
    Adam,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BiasCorrectionArg {
    TrainingSetSize,
    PerStep,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Command trace CSV
    #[arg(long)]
    pub trace: PathBuf,
    /// Where to write the model JSON; the AIC report and manifest go beside it
    #[arg(long)]
    pub out: PathBuf,
    /// Lag order, or `auto` to pick it by AIC
    #[arg(long, default_value = "auto")]
    pub lag: LagChoice,
    /// Largest lag in the AIC scan
    #[arg(long, default_value_t = 20)]
    pub max_lag: usize,
    #[arg(long, value_enum, default_value_t = TrainerKind::Ols)]
    pub trainer: TrainerKind,
    /// Ridge penalty on the lag coefficients (OLS only)
    #[arg(long)]
    pub ridge: Option<f64>,
    /// Train on this leading fraction of the trace
    #[arg(long, default_value_t = 1.0)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.001)]
    pub step_size: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.9)]
    pub beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    pub beta2: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = BiasCorrectionArg::TrainingSetSize)]
    pub bias_correction: BiasCorrectionArg,
}

#[derive(Serialize)]
struct AicPoint {
    lag: usize,
    aic: f64,
}

#[derive(Serialize)]
struct RatioPoint {
    from_lag: usize,
    to_lag: usize,
    #[serde(flatten)]
    ratio: LikelihoodRatio,
}

#[derive(Serialize)]
struct AicReport {
    best_lag: usize,
    chosen_lag: usize,
    samples: usize,
    curve: Vec<AicPoint>,
    likelihood_ratios: Vec<RatioPoint>,
    epoch_losses: Option<Vec<f64>>,
}

pub fn run(args: &TrainArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new();
    manifest.input(&args.trace)?;
    let full = read_trace(&args.trace)?;
    let train = if args.train_fraction < 1.0 { split_dataset(&full, args.train_fraction)?.0 } else { full };
    manifest.lap("read");

    let max_lag = match args.lag {
        LagChoice::Fixed(l) => args.max_lag.max(l),
        LagChoice::Auto => args.max_lag,
    };
    let selection = select_lag(&train, max_lag)?;
    let lag = match args.lag {
        LagChoice::Fixed(l) => l,
        LagChoice::Auto => selection.best_lag,
    };
    log::info!("AIC prefers lag {}, training lag {lag}", selection.best_lag);
    manifest.lap("lag_selection");

    let (model, epoch_losses) = match args.trainer {
        TrainerKind::Ols => {
            if args.ridge.is_some_and(|r| !(r >= 0.0 && r.is_finite())) {
                return Err(CliError::config("--ridge must be finite and non-negative"));
            }
            (fit_var_ols_with(&train, lag, &OlsOptions { ridge: args.ridge, ..Default::default() })?, None)
        }
        TrainerKind::Adam => {
            if args.ridge.is_some() {
                return Err(CliError::config("--ridge applies to the ols trainer only"));
            }
            let cfg = AdamConfig {
                step_size: args.step_size,
                beta1: args.beta1,
                beta2: args.beta2,
                epsilon: args.epsilon,
                batch_size: args.batch_size,
                epochs: args.epochs,
                bias_correction: match args.bias_correction {
                    BiasCorrectionArg::TrainingSetSize => BiasCorrection::TrainingSetSize,
                    BiasCorrectionArg::PerStep => BiasCorrection::PerStep,
                },
            };
            if cfg.epochs == 0 {
                manifest.warn("adam with --epochs 0 leaves every weight at its zero initialization".into());
            }
            let (m, report) = fit_var_adam_with_history(&train, lag, &cfg)?;
            (m, Some(report.epoch_losses))
        }
    };
    manifest.lap("train");

    let curve: Vec<AicPoint> = selection.curve.iter().map(|&(lag, aic)| AicPoint { lag, aic }).collect();
    let likelihood_ratios = curve
        .windows(2)
        .map(|w| RatioPoint { from_lag: w[0].lag, to_lag: w[1].lag, ratio: likelihood_ratio(w[0].aic, w[1].aic, train.dim()) })
        .collect();
    let report = AicReport { best_lag: selection.best_lag, chosen_lag: lag, samples: train.len(), curve, likelihood_ratios, epoch_losses };

    write_atomic(&args.out, |w| Ok(write_var_model_json(&model, w)?))?;
    manifest.output(&args.out)?;
    let report_path = sibling(&args.out, "aic.json");
    write_json(&report_path, &report)?;
    manifest.output(&report_path)?;
    manifest.lap("write");
    manifest.finish(&sibling(&args.out, "manifest.json"))
}
