use std::path::PathBuf;

use clap::Args;
use foreco_core::synth::{generate_trace, Profile, SynthOptions};
use foreco_core::trace::write_trace_csv;

use crate::error::{CliError, CliResult};
use crate::output::{sibling, write_atomic, ManifestBuilder};

#[derive(Debug, Args)]
pub struct GenTraceArgs {
    /// pick-and-place, sine-mix or constant
    #[arg(long, default_value = "pick-and-place")]
    pub profile: Profile,
    #[arg(long, default_value_t = 30.0)]
    pub duration_s: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20.0)]
    pub period_ms: f64,
    /// Standard deviation of per-joint noise, radians
    #[arg(long, default_value_t = 1e-4)]
    pub noise_std: f64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &GenTraceArgs) -> CliResult<()> {
    if !(args.period_ms > 0.0 && args.period_ms.is_finite()) {
        return Err(CliError::config("--period-ms must be positive"));
    }
    if !(args.noise_std >= 0.0 && args.noise_std.is_finite()) {
        return Err(CliError::config("--noise-std must be non-negative"));
    }
    let opts = SynthOptions {
        profile: args.profile,
        duration_s: args.duration_s,
        period_ms: args.period_ms,
        seed: args.seed,
        noise_std: args.noise_std,
    };
    if !(args.duration_s.is_finite() && opts.samples() >= 2) {
        return Err(CliError::config("--duration-s must cover at least two periods"));
    }
    let mut manifest = ManifestBuilder::new();
    manifest.seed("trace", args.seed);
    let trace = generate_trace::<f64>(&opts);
    manifest.lap("generate");
    write_atomic(&args.out, |w| Ok(write_trace_csv(&trace, w)?))?;
    manifest.output(&args.out)?;
    manifest.lap("write");
    log::info!("wrote {} samples to {}", trace.len(), args.out.display());
    manifest.finish(&sibling(&args.out, "manifest.json"))
}
