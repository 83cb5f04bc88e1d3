use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use foreco_core::channel::ChannelConfig;
use foreco_core::eval::{run_sweep, SweepGrid};
use foreco_core::forecast::read_var_model_json;
use foreco_core::recovery::RecoveryPolicy;
use foreco_core::trace::RecoveryConfig;
use foreco_core::VarModel;
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, open, read_trace, write_atomic, write_json, ManifestBuilder};

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// Sweep spec JSON: grid axes, channel template and the two policies
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum PolicySpec {
    /// `model` is resolved against the spec file's directory.
    Foreco { model: PathBuf, record_len: Option<usize> },
    RepeatLast,
    Drop,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSpec {
    #[serde(default)]
    grid: SweepGrid,
    #[serde(default)]
    channel: ChannelConfig,
    #[serde(default)]
    tolerance_ms: f64,
    policies: [PolicySpec; 2],
}

pub fn run(args: &SweepArgs, jobs: Option<usize>) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new();
    manifest.input(&args.trace)?;
    manifest.input(&args.spec)?;
    let trace = read_trace(&args.trace)?;
    let spec: SweepSpec = serde_json::from_reader(open(&args.spec)?).map_err(|e| CliError::from(e).at(&args.spec))?;
    spec.channel.validate()?;
    manifest.seed("master", spec.grid.master_seed);

    let base_dir = args.spec.parent().unwrap_or(Path::new("."));
    let mut policies = Vec::with_capacity(2);
    for p in &spec.policies {
        policies.push(build_policy(p, base_dir, spec.tolerance_ms, spec.channel.transport_bound_ms, &mut manifest)?);
    }
    manifest.lap("read");

    let result = run_sweep(&trace, &spec.grid, &spec.channel, (&policies[0], &policies[1]), jobs)?;
    manifest.lap("sweep");

    ensure_dir(&args.out_dir)?;
    for (idx, name) in result.policies.iter().enumerate() {
        for &robots in &result.grid.robot_counts {
            let csv = args.out_dir.join(format!("rmse_{name}_{robots}.csv"));
            write_atomic(&csv, |w| Ok(w.write_all(result.matrix_csv(idx, robots).as_bytes())?))?;
            let dat = args.out_dir.join(format!("rmse_{name}_{robots}.dat"));
            write_atomic(&dat, |w| Ok(w.write_all(result.matrix_gnuplot(idx, robots).as_bytes())?))?;
            manifest.output(&csv)?;
            manifest.output(&dat)?;
        }
    }
    // Written last: its presence marks a complete run.
    let result_path = args.out_dir.join("sweep_result.json");
    write_json(&result_path, &result)?;
    manifest.output(&result_path)?;
    manifest.lap("write");
    let worst = result.worst_cell(1);
    log::info!(
        "worst {} cell: robots {} p_if {} duration {} -> {} {:.6} vs {:.6}",
        result.policies[1],
        worst.robots,
        worst.prob,
        worst.duration,
        result.policies[0],
        worst.mean[0],
        worst.mean[1]
    );
    manifest.finish(&args.out_dir.join("manifest.json"))
}

fn build_policy(
    spec: &PolicySpec,
    base_dir: &Path,
    tolerance_ms: f64,
    transport_bound_ms: f64,
    manifest: &mut ManifestBuilder,
) -> CliResult<RecoveryPolicy<f64>> {
    Ok(match spec {
        PolicySpec::Foreco { model, record_len } => {
            let path = base_dir.join(model);
            manifest.input(&path)?;
            let m: VarModel = read_var_model_json(open(&path)?).map_err(|e| CliError::from(e).at(&path))?;
            let cfg = RecoveryConfig::new(tolerance_ms, record_len.unwrap_or(m.lag().max(1)), transport_bound_ms)?;
            RecoveryPolicy::foreco(Arc::new(m), cfg)
        }
        PolicySpec::RepeatLast => RecoveryPolicy::repeat_last(RecoveryConfig::new(tolerance_ms, 1, transport_bound_ms)?),
        PolicySpec::Drop => RecoveryPolicy::drop_late(RecoveryConfig::new(tolerance_ms, 1, transport_bound_ms)?),
    })
}
