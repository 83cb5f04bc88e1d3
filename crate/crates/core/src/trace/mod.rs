//! Commands, traces and the recovery timing parameters shared by every
//! other module.

mod csv;

pub use self::csv::{read_trace_csv, write_trace_csv};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::time::Micros;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("command {seq} has {found} joints, expected {expected}")]
    DimensionMismatch { seq: usize, expected: usize, found: usize },
    #[error("command {seq} arrives before it is generated")]
    ArrivalBeforeGeneration { seq: usize },
    #[error("command {seq} breaks the fixed-period schedule")]
    Schedule { seq: usize },
    #[error("cannot split {len} samples with alpha = {alpha}")]
    InvalidSplit { alpha: f64, len: usize },
    #[error("invalid recovery config: {0}")]
    InvalidConfig(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Where a command in an executed stream came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Original,
    Forecast,
    RepeatLast,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Original => "original",
            Provenance::Forecast => "forecast",
            Provenance::RepeatLast => "repeat_last",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointUnit {
    #[default]
    Radians,
    Meters,
    Mixed,
}

/// One joint-state sample.
///
/// A missing arrival time means the command never arrived.
#[derive(Clone, Debug, PartialEq)]
pub struct Command<T> {
    seq: usize,
    joints: Vec<T>,
    gen_time: Micros,
    arrival_time: Option<Micros>,
    provenance: Provenance,
}

impl<T: Scalar> Command<T> {
    pub fn new(seq: usize, joints: Vec<T>, gen_time: Micros) -> Self {
        Command {
            seq,
            joints,
            gen_time,
            arrival_time: None,
            provenance: Provenance::Original,
        }
    }

    pub fn with_arrival(mut self, arrival: Micros) -> Result<Self, TraceError> {
        if arrival < self.gen_time {
            return Err(TraceError::ArrivalBeforeGeneration { seq: self.seq });
        }
        self.arrival_time = Some(arrival);
        Ok(self)
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn seq(&self) -> usize {
        self.seq
    }

    pub fn joints(&self) -> &[T] {
        &self.joints
    }

    pub fn dim(&self) -> usize {
        self.joints.len()
    }

    pub fn gen_time(&self) -> Micros {
        self.gen_time
    }

    pub fn arrival_time(&self) -> Option<Micros> {
        self.arrival_time
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn delay(&self) -> Option<Micros> {
        self.arrival_time.map(|a| a - self.gen_time)
    }

    pub fn delay_ms(&self) -> Option<f64> {
        self.delay().map(Micros::as_ms)
    }

    pub fn is_lost(&self) -> bool {
        self.arrival_time.is_none()
    }
}

/// Ordered commands sampled every `period`.
///
/// Sample `i` has sequence number `seq_0 + i` and generation time
/// `gen_0 + i * period`. Freshly built traces start at sequence 0; the
/// tail half of a split keeps its original numbering.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace<T> {
    period: Micros,
    dim: usize,
    samples: Vec<Command<T>>,
    unit: JointUnit,
}

impl<T: Scalar> Trace<T> {
    /// Builds a trace starting at t = 0 and sequence 0 from joint rows.
    pub fn from_rows(period_ms: f64, rows: Vec<Vec<T>>, unit: JointUnit) -> Result<Self, TraceError> {
        let period = Micros::from_ms(period_ms);
        let samples = rows
            .into_iter()
            .enumerate()
            .map(|(i, joints)| Command::new(i, joints, period * i as i64))
            .collect();
        Self::from_samples(period, samples, unit)
    }

    pub fn from_samples(period: Micros, samples: Vec<Command<T>>, unit: JointUnit) -> Result<Self, TraceError> {
        if period <= Micros::ZERO {
            return Err(TraceError::InvalidTrace(format!("period must be positive, got {period}")));
        }
        let Some(first) = samples.first() else {
            return Err(TraceError::InvalidTrace("trace has no samples".into()));
        };
        let dim = first.dim();
        if dim == 0 {
            return Err(TraceError::InvalidTrace("commands have no joints".into()));
        }
        let (seq0, gen0) = (first.seq, first.gen_time);
        for (i, c) in samples.iter().enumerate() {
            if c.dim() != dim {
                return Err(TraceError::DimensionMismatch { seq: c.seq, expected: dim, found: c.dim() });
            }
            if c.seq != seq0 + i || c.gen_time != gen0 + period * i as i64 {
                return Err(TraceError::Schedule { seq: c.seq });
            }
            if c.joints.iter().any(|v| !v.is_finite()) {
                return Err(TraceError::InvalidTrace(format!("command {} has a non-finite joint", c.seq)));
            }
        }
        Ok(Trace { period, dim, samples, unit })
    }

    pub fn period(&self) -> Micros {
        self.period
    }

    pub fn period_ms(&self) -> f64 {
        self.period.as_ms()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false for a constructed trace; kept for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn unit(&self) -> JointUnit {
        self.unit
    }

    pub fn samples(&self) -> &[Command<T>] {
        &self.samples
    }

    pub fn joints(&self, i: usize) -> &[T] {
        &self.samples[i].joints
    }

    pub fn start_time(&self) -> Micros {
        self.samples[0].gen_time
    }

    pub fn first_seq(&self) -> usize {
        self.samples[0].seq
    }

    /// Generation time of sample `i` reconstructed from the schedule.
    pub fn slot_time(&self, i: usize) -> Micros {
        self.start_time() + self.period * i as i64
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.samples.iter().map(|c| c.joints.as_slice())
    }

    /// Converts the joint values to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Trace<U> {
        let samples = self
            .samples
            .iter()
            .map(|c| Command {
                seq: c.seq,
                joints: c.joints.iter().map(|v| U::lit(v.as_f64())).collect(),
                gen_time: c.gen_time,
                arrival_time: c.arrival_time,
                provenance: c.provenance,
            })
            .collect();
        Trace { period: self.period, dim: self.dim, samples, unit: self.unit }
    }
}

/// Timing parameters of the recovery problem: tolerated delay, history
/// length kept for forecasting and the transport-network delay bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RecoveryConfigDoc", into = "RecoveryConfigDoc")]
pub struct RecoveryConfig {
    tolerance: Micros,
    record_len: usize,
    transport_bound: Micros,
}

#[derive(Serialize, Deserialize)]
struct RecoveryConfigDoc {
    #[serde(default)]
    tolerance_ms: f64,
    #[serde(default = "default_record_len")]
    record_len: usize,
    #[serde(default)]
    transport_bound_ms: f64,
}

fn default_record_len() -> usize {
    1
}

impl TryFrom<RecoveryConfigDoc> for RecoveryConfig {
    type Error = TraceError;
    fn try_from(d: RecoveryConfigDoc) -> Result<Self, TraceError> {
        RecoveryConfig::new(d.tolerance_ms, d.record_len, d.transport_bound_ms)
    }
}

impl From<RecoveryConfig> for RecoveryConfigDoc {
    fn from(c: RecoveryConfig) -> Self {
        RecoveryConfigDoc {
            tolerance_ms: c.tolerance_ms(),
            record_len: c.record_len,
            transport_bound_ms: c.transport_bound_ms(),
        }
    }
}

impl RecoveryConfig {
    pub fn new(tolerance_ms: f64, record_len: usize, transport_bound_ms: f64) -> Result<Self, TraceError> {
        if !(tolerance_ms >= 0.0 && tolerance_ms.is_finite()) {
            return Err(TraceError::InvalidConfig(format!("tolerance must be >= 0, got {tolerance_ms}")));
        }
        if record_len == 0 {
            return Err(TraceError::InvalidConfig("record length must be >= 1".into()));
        }
        if !(transport_bound_ms >= 0.0 && transport_bound_ms.is_finite()) {
            return Err(TraceError::InvalidConfig(format!(
                "transport bound must be >= 0, got {transport_bound_ms}"
            )));
        }
        Ok(RecoveryConfig {
            tolerance: Micros::from_ms(tolerance_ms),
            record_len,
            transport_bound: Micros::from_ms(transport_bound_ms),
        })
    }

    pub fn tolerance(&self) -> Micros {
        self.tolerance
    }

    pub fn tolerance_ms(&self) -> f64 {
        self.tolerance.as_ms()
    }

    pub fn record_len(&self) -> usize {
        self.record_len
    }

    pub fn transport_bound(&self) -> Micros {
        self.transport_bound
    }

    pub fn transport_bound_ms(&self) -> f64 {
        self.transport_bound.as_ms()
    }
}

/// Splits a trace into a training prefix of `floor(alpha * H)` samples and
/// the remaining test suffix.
pub fn split_dataset<T: Scalar>(trace: &Trace<T>, alpha: f64) -> Result<(Trace<T>, Trace<T>), TraceError> {
    let len = trace.len();
    if len == 0 {
        return Err(TraceError::InvalidTrace("cannot split an empty trace".into()));
    }
    if len < 2 || !(alpha > 0.0 && alpha < 1.0) {
        return Err(TraceError::InvalidSplit { alpha, len });
    }
    // nudge so that e.g. 0.29 * 100 lands on 29 rather than 28.999...
    let head = ((alpha * len as f64) + 1e-9).floor() as usize;
    if head == 0 || head >= len {
        return Err(TraceError::InvalidSplit { alpha, len });
    }
    let train = trace.samples[..head].to_vec();
    let test = trace.samples[head..].to_vec();
    Ok((
        Trace { period: trace.period, dim: trace.dim, samples: train, unit: trace.unit },
        Trace { period: trace.period, dim: trace.dim, samples: test, unit: trace.unit },
    ))
}

/// True iff the command arrived and its delay does not exceed the tolerance.
pub fn is_on_time<T: Scalar>(cmd: &Command<T>, cfg: &RecoveryConfig) -> bool {
    matches!(cmd.delay(), Some(d) if d <= cfg.tolerance)
}
