use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, ValueEnum};
use foreco_core::channel::{read_channel_config_json, simulate_channel, write_outcomes_csv, ChannelOutcome, LossCause};
use foreco_core::eval::rmse;
use foreco_core::forecast::read_var_model_json;
use foreco_core::recovery::{replay_deadline, run_recovery, RecoveryPolicy, RecoveryStats};
use foreco_core::trace::RecoveryConfig;
use foreco_core::VarModel;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, open, read_trace, write_atomic, write_json, ManifestBuilder};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Foreco,
    RepeatLast,
    Drop,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// Channel config JSON
    #[arg(long)]
    pub channel: PathBuf,
    /// VAR model JSON, required by the foreco policy
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PolicyArg::Foreco)]
    pub policy: PolicyArg,
    /// Extra delay tolerated beyond one period, ms
    #[arg(long, default_value_t = 0.0)]
    pub tolerance_ms: f64,
    /// Commands kept for forecasting; defaults to the model's lag
    #[arg(long)]
    pub record_len: Option<usize>,
    /// Overrides the channel config's seed
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct ChannelStats {
    commands: usize,
    on_time: usize,
    late: usize,
    lost_rtx_exceeded: usize,
    lost_queue_overflow: usize,
    mean_delivered_delay_ms: Option<f64>,
}

#[derive(Serialize)]
struct Stats {
    recovery: RecoveryStats,
    channel: ChannelStats,
}

#[derive(Serialize)]
struct Summary {
    policy: &'static str,
    rmse: f64,
    baseline_policy: &'static str,
    baseline_rmse: f64,
    /// `rmse / baseline_rmse`; absent when the baseline is exact.
    ratio: Option<f64>,
    unit: &'static str,
    samples: usize,
}

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new();
    manifest.input(&args.trace)?;
    manifest.input(&args.channel)?;
    let trace = read_trace(&args.trace)?;
    let mut cfg = read_channel_config_json(open(&args.channel)?).map_err(|e| CliError::from(e).at(&args.channel))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    manifest.seed("channel", cfg.seed);

    let model: Option<VarModel> = match &args.model {
        Some(path) => {
            manifest.input(path)?;
            Some(read_var_model_json(open(path)?).map_err(|e| CliError::from(e).at(path))?)
        }
        None => None,
    };
    let record_len = args.record_len.unwrap_or_else(|| model.as_ref().map_or(1, |m| m.lag().max(1)));
    let rcfg = RecoveryConfig::new(args.tolerance_ms, record_len, cfg.transport_bound_ms)?;
    let policy = match args.policy {
        PolicyArg::Foreco => {
            let model = model.ok_or_else(|| CliError::config("the foreco policy needs --model"))?;
            RecoveryPolicy::foreco(Arc::new(model), rcfg)
        }
        PolicyArg::RepeatLast => RecoveryPolicy::repeat_last(rcfg),
        PolicyArg::Drop => RecoveryPolicy::drop_late(rcfg),
    };
    let baseline = RecoveryPolicy::repeat_last(rcfg);
    manifest.lap("read");

    let outcomes = simulate_channel(&trace, &cfg)?;
    manifest.lap("channel");
    let executed = run_recovery(&trace, &outcomes, &policy)?;
    let baseline_exec = run_recovery(&trace, &outcomes, &baseline)?;
    manifest.lap("recovery");

    let err = rmse(&executed, &trace)?;
    let base = rmse(&baseline_exec, &trace)?;
    let summary = Summary {
        policy: policy.label(),
        rmse: err,
        baseline_policy: baseline.label(),
        baseline_rmse: base,
        ratio: (base > 0.0).then(|| err / base),
        unit: "rad",
        samples: trace.len(),
    };
    let stats = Stats { recovery: executed.stats, channel: channel_stats(&outcomes, &trace, &rcfg) };

    ensure_dir(&args.out_dir)?;
    let outcomes_path = args.out_dir.join("outcomes.csv");
    write_atomic(&outcomes_path, |w| Ok(write_outcomes_csv(&outcomes, trace.first_seq(), w)?))?;
    let executed_path = args.out_dir.join("executed.csv");
    write_atomic(&executed_path, |w| Ok(executed.write_csv(trace.dim(), w)?))?;
    let stats_path = args.out_dir.join("stats.json");
    write_json(&stats_path, &stats)?;
    let summary_path = args.out_dir.join("summary.json");
    write_json(&summary_path, &summary)?;
    for p in [&outcomes_path, &executed_path, &stats_path, &summary_path] {
        manifest.output(p)?;
    }
    manifest.lap("write");
    log::info!("{}: rmse {err:.6} (repeat_last {base:.6})", policy.label());
    manifest.finish(&args.out_dir.join("manifest.json"))
}

fn channel_stats(outcomes: &[ChannelOutcome], trace: &foreco_core::Trace, cfg: &RecoveryConfig) -> ChannelStats {
    let on_time = outcomes.iter().filter(|o| replay_deadline(o, trace.period(), cfg)).count();
    let lost = |cause| outcomes.iter().filter(|o| **o == ChannelOutcome::Lost(cause)).count();
    let (lost_rtx_exceeded, lost_queue_overflow) = (lost(LossCause::RtxExceeded), lost(LossCause::QueueOverflow));
    let delays: Vec<f64> = outcomes.iter().filter_map(|o| o.delay_ms()).collect();
    ChannelStats {
        commands: outcomes.len(),
        on_time,
        late: outcomes.len() - on_time - lost_rtx_exceeded - lost_queue_overflow,
        lost_rtx_exceeded,
        lost_queue_overflow,
        mean_delivered_delay_ms: (!delays.is_empty()).then(|| delays.iter().sum::<f64>() / delays.len() as f64),
    }
}
