//! Slot-by-slot replay of a command stream over simulated channel outcomes,
//! replacing commands that miss their deadline.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::ChannelOutcome;
use crate::forecast::{ForecastError, Forecaster};
use crate::scalar::Scalar;
use crate::time::Micros;
use crate::trace::{Command, Provenance, RecoveryConfig, Trace};

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error("recovery config error: {0}")]
    Config(String),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What to execute when a command misses its deadline.
#[derive(Clone)]
pub enum RecoveryMode<T> {
    /// Forecast the missing command from the last executed ones.
    FoReCo(Arc<dyn Forecaster<T>>),
    /// Execute the previous command again.
    RepeatLast,
    /// Execute nothing.
    Drop,
}

impl<T> RecoveryMode<T> {
    pub fn label(&self) -> &'static str {
        match self {
            RecoveryMode::FoReCo(_) => "foreco",
            RecoveryMode::RepeatLast => "repeat_last",
            RecoveryMode::Drop => "drop",
        }
    }
}

impl<T> fmt::Debug for RecoveryMode<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug)]
pub struct RecoveryPolicy<T> {
    pub mode: RecoveryMode<T>,
    pub cfg: RecoveryConfig,
}

impl<T: Scalar> RecoveryPolicy<T> {
    pub fn foreco(model: Arc<dyn Forecaster<T>>, cfg: RecoveryConfig) -> Self {
        RecoveryPolicy { mode: RecoveryMode::FoReCo(model), cfg }
    }

    pub fn repeat_last(cfg: RecoveryConfig) -> Self {
        RecoveryPolicy { mode: RecoveryMode::RepeatLast, cfg }
    }

    pub fn drop_late(cfg: RecoveryConfig) -> Self {
        RecoveryPolicy { mode: RecoveryMode::Drop, cfg }
    }

    pub fn label(&self) -> &'static str {
        self.mode.label()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryStats {
    pub on_time: usize,
    pub forecast: usize,
    pub repeated: usize,
    pub dropped: usize,
}

impl RecoveryStats {
    pub fn total(&self) -> usize {
        self.on_time + self.forecast + self.repeated + self.dropped
    }
}

/// Commands the robot executes, one per slot except for dropped slots.
#[derive(Clone, Debug, PartialEq)]
pub struct ExecutedStream<T> {
    pub commands: Vec<Command<T>>,
    pub stats: RecoveryStats,
    /// Every command that reached the robot, on time or late, with its
    /// arrival time. This is what would be appended to the training set.
    pub received: Vec<Command<T>>,
}

/// True iff the command was delivered within `period + tolerance` of its
/// generation, i.e. before the slot in which it must execute closes.
pub fn replay_deadline(outcome: &ChannelOutcome, period: Micros, cfg: &RecoveryConfig) -> bool {
    matches!(outcome.delay(), Some(d) if d <= period + cfg.tolerance())
}

/// Replays `trace` over per-command `outcomes`.
///
/// On-time commands pass through untouched. A late or lost command is
/// replaced according to the policy; forecasts feed on the executed stream,
/// so consecutive misses are predicted in closed loop. During the first
/// `record_len` slots there is not enough history to forecast from, and
/// misses fall back to repeating the last command. A miss before anything
/// was executed repeats the trace's first command, taken as the robot's
/// known initial pose.
pub fn run_recovery<T: Scalar>(
    trace: &Trace<T>,
    outcomes: &[ChannelOutcome],
    policy: &RecoveryPolicy<T>,
) -> Result<ExecutedStream<T>, RecoveryError> {
    if outcomes.len() != trace.len() {
        return Err(RecoveryError::Config(format!(
            "{} outcomes for {} commands",
            outcomes.len(),
            trace.len()
        )));
    }
    let record_len = policy.cfg.record_len();
    if let RecoveryMode::FoReCo(model) = &policy.mode {
        if model.dim() != trace.dim() {
            return Err(RecoveryError::Config(format!(
                "model has dimension {}, trace has {}",
                model.dim(),
                trace.dim()
            )));
        }
        if model.order() > record_len {
            return Err(RecoveryError::Config(format!(
                "model needs {} past commands but only {record_len} are recorded",
                model.order()
            )));
        }
    }

    let period = trace.period();
    let mut commands: Vec<Command<T>> = Vec::with_capacity(trace.len());
    let mut received = Vec::new();
    let mut stats = RecoveryStats::default();

    for (i, (cmd, outcome)) in trace.samples().iter().zip(outcomes).enumerate() {
        if let Some(delay) = outcome.delay() {
            received.push(cmd.clone().with_arrival(cmd.gen_time() + delay).expect("delays are non-negative"));
        }
        if replay_deadline(outcome, period, &policy.cfg) {
            commands.push(received.last().expect("on-time command was received").clone());
            stats.on_time += 1;
            continue;
        }
        let repeat = |commands: &[Command<T>]| {
            let joints = commands.last().map_or_else(|| trace.joints(0).to_vec(), |c| c.joints().to_vec());
            Command::new(cmd.seq(), joints, cmd.gen_time()).with_provenance(Provenance::RepeatLast)
        };
        match &policy.mode {
            RecoveryMode::Drop => stats.dropped += 1,
            RecoveryMode::RepeatLast => {
                commands.push(repeat(&commands));
                stats.repeated += 1;
            }
            RecoveryMode::FoReCo(model) => {
                let order = model.order().max(1);
                if i < record_len || commands.len() < order {
                    commands.push(repeat(&commands));
                    stats.repeated += 1;
                } else {
                    let history = &commands[commands.len() - record_len.min(commands.len())..];
                    let joints = model.forecast(history)?;
                    commands.push(Command::new(cmd.seq(), joints, cmd.gen_time()).with_provenance(Provenance::Forecast));
                    stats.forecast += 1;
                }
            }
        }
    }
    Ok(ExecutedStream { commands, stats, received })
}

impl<T: Scalar> ExecutedStream<T> {
    /// `seq,provenance,j1..jd` with six decimals.
    pub fn write_csv<W: Write>(&self, dim: usize, mut w: W) -> std::io::Result<()> {
        let mut line = String::from("seq,provenance");
        for j in 1..=dim {
            line.push_str(&format!(",j{j}"));
        }
        writeln!(w, "{line}")?;
        for c in &self.commands {
            line.clear();
            line.push_str(&format!("{},{}", c.seq(), c.provenance().as_str()));
            for v in c.joints() {
                line.push_str(&format!(",{:.6}", v.as_f64()));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}
